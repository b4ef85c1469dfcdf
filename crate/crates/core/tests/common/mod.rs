//! Seeded generators shared by the integration tests.
#![allow(dead_code, clippy::type_complexity)]

use std::collections::BTreeMap;

use mcbisim::chain::{OpenMarkovChain, Outcome, PointedChain};
use mcbisim::rational::{int, rat};
use mcbisim::{Label, Name, Rational, SubDistribution, Term};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn name(s: &str) -> Name {
    Name::new(s).unwrap()
}

pub fn label(s: &str) -> Label {
    Label::new(s).unwrap()
}

pub fn term(s: &str) -> Term {
    Term::parse(s).unwrap()
}

const WEIGHTS: [(i64, i64); 11] = [
    (1, 2),
    (1, 3),
    (2, 3),
    (1, 4),
    (3, 4),
    (1, 5),
    (2, 5),
    (3, 5),
    (1, 6),
    (5, 6),
    (1, 7),
];

/// A weight in (0,1), occasionally 0 or 1.
pub fn weight(r: &mut impl Rng) -> Rational {
    match r.gen_range(0..20) {
        0 => int(0),
        1 => int(1),
        _ => interior_weight(r),
    }
}

pub fn interior_weight(r: &mut impl Rng) -> Rational {
    let (n, d) = *WEIGHTS.choose(r).unwrap();
    rat(n, d)
}

const LABELS: [&str; 2] = ["a", "b"];
const EXITS: [&str; 2] = ["Z", "U"];
const BINDERS: [&str; 2] = ["X", "Y"];

/// A random term of bounded depth whose free names are exits or members of
/// `scope`.
pub fn random_term_in(r: &mut impl Rng, depth: u32, scope: &[Name]) -> Term {
    let leaf = depth == 0 || r.gen_range(0..6) == 0;
    if leaf {
        let use_scope = !scope.is_empty() && r.gen_bool(0.5);
        let n = if use_scope {
            scope.choose(r).unwrap().clone()
        } else {
            name(EXITS.choose(r).unwrap())
        };
        return Term::name(&n);
    }
    match r.gen_range(0..10) {
        0..=3 => Term::prefix(&label(LABELS.choose(r).unwrap()), random_term_in(r, depth - 1, scope)),
        4..=7 => {
            let l = random_term_in(r, depth - 1, scope);
            let rr = random_term_in(r, depth - 1, scope);
            Term::choice(l, weight(r), rr).unwrap()
        }
        _ => {
            let x = name(BINDERS.choose(r).unwrap());
            let mut inner = scope.to_vec();
            if !inner.contains(&x) {
                inner.push(x.clone());
            }
            Term::rec(&x, random_term_in(r, depth - 1, &inner))
        }
    }
}

/// A random term whose free names are exits only.
pub fn random_term(r: &mut impl Rng, depth: u32) -> Term {
    random_term_in(r, depth, &[])
}

/// A random term that may mention `X` free.
pub fn random_body(r: &mut impl Rng, depth: u32) -> Term {
    random_term_in(r, depth, &[name("X")])
}

/// Splits a mass into `parts` positive rational pieces.
fn split(r: &mut impl Rng, total: &Rational, parts: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..parts).map(|_| r.gen_range(1..=4)).collect();
    let sum: i64 = raw.iter().sum();
    raw.iter().map(|&k| total * rat(k, sum)).collect()
}

fn random_total(r: &mut impl Rng) -> Rational {
    match r.gen_range(0..4) {
        0 => interior_weight(r),
        _ => int(1),
    }
}

/// A random pointed chain with `n` states `s0..`, at most `out` outcomes per
/// state, initial state `s0`.
pub fn random_chain(r: &mut impl Rng, n: usize, out: usize) -> PointedChain {
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut transitions = BTreeMap::new();
    for s in &states {
        let k = r.gen_range(0..=out);
        let mut d = SubDistribution::new();
        if k > 0 {
            let total = random_total(r);
            for m in split(r, &total, k) {
                let o = if r.gen_range(0..4) == 0 {
                    Outcome::Exit(name(EXITS.choose(r).unwrap()))
                } else {
                    Outcome::Step(label(LABELS.choose(r).unwrap()), states.choose(r).unwrap().clone())
                };
                d.add(o, m);
            }
        }
        transitions.insert(s.clone(), d);
    }
    let chain = OpenMarkovChain::new(states.clone(), transitions).unwrap();
    PointedChain::new(chain, states[0].clone()).unwrap()
}

/// A random chain in which every state `s` of a base chain may get a twin
/// `s'` bisimilar to it: the twin copies the row of `s`, sending each step
/// to the target, its twin, or a split of the mass between both.
pub fn chain_with_twins(r: &mut impl Rng, base: usize, out: usize) -> PointedChain {
    let p = random_chain(r, base, out);
    let twin_of = |s: &str| format!("{s}t");
    let twins: Vec<String> = p.chain.states().iter().filter(|_| r.gen_bool(0.6)).cloned().collect();
    let has_twin = |s: &str| twins.iter().any(|t| t == s);
    let mut states: Vec<String> = p.chain.states().to_vec();
    states.extend(twins.iter().map(|s| twin_of(s)));
    let mut transitions = BTreeMap::new();
    let redirect = |r: &mut ChaCha8Rng, row: &SubDistribution<Outcome>| {
        let mut d = SubDistribution::new();
        for (o, m) in row.iter() {
            match o {
                Outcome::Step(a, t) if has_twin(t) => match r.gen_range(0..3) {
                    0 => d.add(o.clone(), m.clone()),
                    1 => d.add(Outcome::Step(a.clone(), twin_of(t)), m.clone()),
                    _ => {
                        let half = m * rat(1, 2);
                        d.add(o.clone(), half.clone());
                        d.add(Outcome::Step(a.clone(), twin_of(t)), half);
                    }
                },
                _ => d.add(o.clone(), m.clone()),
            }
        }
        d
    };
    let mut inner = rng(r.gen());
    for s in p.chain.states() {
        let row = p.chain.transition(s);
        transitions.insert(s.clone(), redirect(&mut inner, row));
        if has_twin(s) {
            transitions.insert(twin_of(s), redirect(&mut inner, row));
        }
    }
    let chain = OpenMarkovChain::new(states, transitions).unwrap();
    PointedChain::new(chain, p.initial).unwrap()
}

/// Naive signature refinement, independent of the library's partition code.
pub fn oracle_classes(c: &OpenMarkovChain) -> Vec<usize> {
    let states = c.states();
    let mut class = vec![0usize; states.len()];
    let mut count = 1;
    loop {
        let mut ids: BTreeMap<(usize, Vec<(String, usize, Rational)>), usize> = BTreeMap::new();
        let mut next = vec![0; states.len()];
        for (i, s) in states.iter().enumerate() {
            let mut sig: BTreeMap<(String, usize), Rational> = BTreeMap::new();
            for (o, m) in c.transition(s).iter() {
                let key = match o {
                    Outcome::Exit(x) => (format!("exit {}", x.as_str()), 0),
                    Outcome::Step(a, t) => (format!("step {}", a.as_str()), class[c.index_of(t).unwrap()]),
                };
                *sig.entry(key).or_insert_with(Rational::zero) += m;
            }
            let sig: Vec<_> = sig
                .into_iter()
                .filter(|(_, m)| !m.is_zero())
                .map(|((k, b), m)| (k, b, m))
                .collect();
            let fresh = ids.len();
            next[i] = *ids.entry((class[i], sig)).or_insert(fresh);
        }
        let n = ids.len();
        class = next;
        if n == count {
            return class;
        }
        count = n;
    }
}

/// A random sub-distribution over `0..points` with support of size `1..=max`.
pub fn random_subdist(r: &mut impl Rng, points: u8, max: usize) -> SubDistribution<u8> {
    let k = r.gen_range(1..=max);
    let mut keys: Vec<u8> = (0..points).collect();
    keys.shuffle(r);
    let total = random_total(r);
    keys.into_iter().take(k).zip(split(r, &total, k)).collect()
}

/// A random script of `len` attempted steps built only from rule instances,
/// so every step is sound by construction. Premises are drawn from earlier
/// conclusions.
pub fn random_script(r: &mut ChaCha8Rng, len: usize) -> mcbisim::deduction::ProofScript {
    use mcbisim::deduction::{Epsilon, ScriptBuilder};
    use mcbisim::term::{alpha_eq, substitute_one};

    let mut b = ScriptBuilder::new();
    let small = |r: &mut ChaCha8Rng| random_term(r, 2);
    for _ in 0..len {
        let n = b.len();
        let pick = |r: &mut ChaCha8Rng| r.gen_range(0..n);
        let attempt = match if n == 0 { r.gen_range(0..8) } else { r.gen_range(0..17) } {
            0 => b.refl(&small(r)),
            1 => b.top(&small(r), &small(r)),
            2 => {
                let (t, s) = (small(r), small(r));
                b.b1(&t, &s)
            }
            3 => b.b2(&small(r), weight(r)),
            4 => {
                let t = Term::choice(small(r), weight(r), small(r)).unwrap();
                b.sc(&t)
            }
            5 => {
                let ts = Term::choice(small(r), interior_weight(r), small(r)).unwrap();
                b.sa(&Term::choice(ts, interior_weight(r), small(r)).unwrap())
            }
            6 => b.unfold(&Term::rec(&name("X"), random_body(r, 2))),
            7 => b.unguard(&name("X"), &random_body(r, 2), interior_weight(r)),
            8 => b.symm(pick(r)),
            9 => {
                let p = pick(r);
                let right = b.concl(p).right.clone();
                match (0..n).find(|&q| alpha_eq(&b.concl(q).left, &right)) {
                    Some(q) => b.triang(p, q),
                    None => b.symm(p),
                }
            }
            10 => b.pref(pick(r), &label(LABELS.choose(r).unwrap())),
            11 | 12 => {
                let (p, q) = (pick(r), pick(r));
                b.ib(p, q, weight(r))
            }
            13 => {
                let p = pick(r);
                let eps = b.concl(p).eps.add(&Epsilon::constant(rat(1, r.gen_range(2..50))));
                b.max(p, eps)
            }
            14 => {
                let p = pick(r);
                let sigma = [(name("Z"), small(r)), (name("U"), small(r))]
                    .into_iter()
                    .take(r.gen_range(1..=2))
                    .collect();
                b.subst(p, sigma)
            }
            15 => {
                // s ≡0 t[s/X] from an unfolding, closed again under a fresh binder
                let body = random_body(r, 2);
                let rec = Term::rec(&name("X"), body.clone());
                let u = b.unfold(&rec).unwrap();
                let renamed = substitute_one(&body, &name("X"), &Term::name(&name("Y")));
                if mcbisim::term::is_guarded(&name("Y"), &renamed) {
                    b.fix(u, &name("Y"), &renamed)
                } else {
                    Ok(u)
                }
            }
            _ => {
                let lhs = Term::choice(Term::name(&name("X")), weight(r), small(r)).unwrap();
                let sc = b.sc(&lhs).unwrap();
                b.cong(sc, &name("X"))
            }
        };
        attempt.expect("generated steps are rule instances");
    }
    b.finish()
}
