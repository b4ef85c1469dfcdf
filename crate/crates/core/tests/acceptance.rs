//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! status if any criterion fails.
#![allow(clippy::type_complexity)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mcbisim::bisim::{bisim_partition, bisimilar, term_bisimilar};
use mcbisim::chain::omc_rec;
use mcbisim::deduction::{check_proof, load_script, semantic_validate, Epsilon, Validation};
use mcbisim::metric::{
    bisim_distance, discounted_distance, kantorovich, pointed_distance, term_distance, DistanceEnclosure,
    DistanceOptions, GroundPoint, TermDistance,
};
use mcbisim::rational::{int, rat, to_f64};
use mcbisim::semantics::{chain_to_term, reachable_chain};
use mcbisim::{Error, OpenMarkovChain, Outcome, PointedChain, Rational, SubDistribution, Term};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

const TOL: f64 = 1e-9;

type Outcome_ = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn opts() -> DistanceOptions {
    DistanceOptions::default()
}

fn fdist(t: &Term, s: &Term, o: &DistanceOptions) -> TermDistance<f64> {
    term_distance::<f64>(t, s, o).unwrap_or_else(|e| panic!("{t} vs {s}: {e}"))
}

/// Both enclosures agree up to `slack`: every point of one lies within
/// `slack` of every point of the other.
fn close(a: (f64, f64), b: (f64, f64), slack: f64) -> bool {
    (a.1 - b.0).abs() <= slack && (b.1 - a.0).abs() <= slack
}

fn chain(rows: &[(&str, &[(&str, &str, Rational)])], initial: &str) -> PointedChain {
    let states: Vec<String> = rows.iter().map(|(s, _)| s.to_string()).collect();
    let mut transitions = BTreeMap::new();
    for (s, outs) in rows {
        let mut d = SubDistribution::new();
        for (a, t, m) in outs.iter() {
            let o = if t.is_empty() {
                Outcome::Exit(name(a))
            } else {
                Outcome::Step(label(a), t.to_string())
            };
            d.add(o, m.clone());
        }
        transitions.insert(s.to_string(), d);
    }
    PointedChain::new(OpenMarkovChain::new(states, transitions).unwrap(), initial).unwrap()
}

// 1

fn worked_value() -> Outcome_ {
    let t = term("rec X.(a.X +[1/2] Z)");
    let s = term("rec Y.(a.Y +[1/3] Z)");
    let start = Instant::now();
    let f = fdist(&t, &s, &opts());
    let float_time = start.elapsed();
    ensure(f.lower <= 0.25 && 0.25 <= f.upper && f.width() <= TOL, || {
        format!("float enclosure [{}, {}]", f.lower, f.upper)
    })?;
    let start = Instant::now();
    let e = term_distance::<Rational>(&t, &s, &opts()).map_err(|e| e.to_string())?;
    let exact_time = start.elapsed();
    let quarter = rat(1, 4);
    ensure(e.lower <= quarter && quarter <= e.upper, || {
        format!("exact enclosure [{}, {}]", e.lower, e.upper)
    })?;
    ensure(
        float_time < Duration::from_secs(1) && exact_time < Duration::from_secs(1),
        || format!("too slow: {float_time:?} / {exact_time:?}"),
    )?;
    Ok(format!(
        "float [{:.12}, {:.12}] in {float_time:?}; exact [{}, {}] in {exact_time:?}",
        f.lower, f.upper, e.lower, e.upper
    ))
}

// 2

fn recursion_counterexample() -> Outcome_ {
    let half = rat(1, 2);
    let eps = rat(1, 4);
    let m = chain(
        &[
            ("m", &[("b", "n", half.clone()), ("a", "u", half.clone())]),
            ("n", &[("b", "n", half.clone()), ("a", "u", half.clone())]),
            ("u", &[("X", "", int(1))]),
        ],
        "m",
    );
    let m2 = chain(
        &[
            ("m", &[("a", "u", &half + &eps), ("b", "n", &half - &eps)]),
            ("n", &[("b", "n", half.clone()), ("a", "u", half.clone())]),
            ("u", &[("X", "", int(1))]),
        ],
        "m",
    );
    let start = Instant::now();
    let before = pointed_distance::<f64>(&m, &m2, &opts()).map_err(|e| e.to_string())?;
    let before_exact = pointed_distance::<Rational>(&m, &m2, &opts()).map_err(|e| e.to_string())?;
    let x = name("X");
    let (r, r2) = (omc_rec(&x, &m), omc_rec(&x, &m2));
    let after = pointed_distance::<f64>(&r, &r2, &opts()).map_err(|e| e.to_string())?;
    let after_exact = pointed_distance::<Rational>(&r, &r2, &opts()).map_err(|e| e.to_string())?;
    let time = start.elapsed();
    ensure(
        (before.lower - 0.25).abs() <= TOL && (before.upper - 0.25).abs() <= TOL,
        || format!("before [{}, {}]", before.lower, before.upper),
    )?;
    ensure(before_exact.lower <= eps && eps <= before_exact.upper, || {
        format!("exact before [{}, {}]", before_exact.lower, before_exact.upper)
    })?;
    ensure(1.0 - after.lower <= TOL && after.upper == 1.0, || {
        format!("after [{}, {}]", after.lower, after.upper)
    })?;
    ensure(
        after_exact.exact && after_exact.lower.is_one() && after_exact.upper.is_one(),
        || format!("exact after [{}, {}]", after_exact.lower, after_exact.upper),
    )?;
    ensure(time < Duration::from_secs(1), || format!("too slow: {time:?}"))?;
    Ok(format!(
        "exact {} before, exact {} after omc_rec(X); float after [{}, {}]; in {time:?}",
        before_exact.upper, after_exact.upper, after.lower, after.upper
    ))
}

// 3

fn kernel_chains() -> Vec<OpenMarkovChain> {
    let mut r = rng(3);
    let mut out = Vec::new();
    while out.len() < 120 {
        let base = r.gen_range(2..=7);
        out.push(chain_with_twins(&mut r, base, 3).chain);
    }
    while out.len() < 180 {
        let n = r.gen_range(2..=15);
        out.push(random_chain(&mut r, n, 3).chain);
    }
    while out.len() < 240 {
        let t = random_term(&mut r, 5);
        let p = reachable_chain(&t).unwrap();
        if p.chain.len() >= 2 && p.chain.len() <= 15 {
            out.push(p.chain);
        }
    }
    out
}

fn kernel() -> Outcome_ {
    let o = opts().with_max_iter(10_000);
    let (mut pairs, mut bisimilar_pairs) = (0, 0);
    let chains = kernel_chains();
    for (k, c) in chains.iter().enumerate() {
        let enc: DistanceEnclosure<f64> = match bisim_distance::<f64>(c, &o) {
            Ok(e) => e,
            Err(Error::NotConverged { best, .. }) => *best,
            Err(e) => return Err(format!("chain {k}: {e}")),
        };
        let partition = bisim_partition(c);
        let oracle = oracle_classes(c);
        let n = c.len();
        for i in 0..n {
            for j in i + 1..n {
                pairs += 1;
                let (lo, hi) = enc.interval(i, j);
                let related = oracle[i] == oracle[j];
                bisimilar_pairs += related as usize;
                let ctx = || format!("chain {k} pair ({}, {}): [{lo}, {hi}]", c.states()[i], c.states()[j]);
                ensure(partition.same_block(i, j) == related, || {
                    format!("{} partition disagrees with oracle", ctx())
                })?;
                ensure((hi == 0.0) == related, ctx)?;
                ensure(related || lo > 0.0, ctx)?;
            }
        }
    }
    Ok(format!(
        "{} chains, {pairs} pairs, {bisimilar_pairs} bisimilar",
        chains.len()
    ))
}

// 4

fn choice(l: &Term, e: Rational, r: &Term) -> Term {
    Term::choice(l.clone(), e, r.clone()).unwrap()
}

fn axiom_instance(r: &mut rand_chacha::ChaCha8Rng, axiom: &str) -> (Term, Term) {
    let mut t = || random_term(r, 3);
    let (a, b, c, d) = (t(), t(), t(), t());
    let e = weight(r);
    let f = weight(r);
    match axiom {
        "B1" => (choice(&a, int(1), &b), a),
        "B2" => (choice(&a, e, &a), a),
        "SC" => (choice(&a, e.clone(), &b), choice(&b, Rational::one() - e, &a)),
        "SA" => {
            let (e, f) = (interior_weight(r), interior_weight(r));
            let ef = &e * &f;
            let g = (&f - &ef) / (Rational::one() - &ef);
            (choice(&choice(&a, e, &b), f, &c), choice(&a, ef, &choice(&b, g, &c)))
        }
        "Unfold" => {
            let x = name("X");
            let rec = Term::rec(&x, random_body(r, 3));
            let Term::Rec(_, body) = &rec else { unreachable!() };
            let unfolded = mcbisim::term::substitute_one(body, &x, &rec);
            (rec, unfolded)
        }
        "Unguard" => {
            let x = name("X");
            let body = random_body(r, 3);
            let e = if r.gen_bool(0.9) { interior_weight(r) } else { int(1) };
            (Term::rec(&x, choice(&body, e, &Term::name(&x))), Term::rec(&x, body))
        }
        "Entr" => (
            choice(&choice(&a, e.clone(), &b), f.clone(), &choice(&c, e.clone(), &d)),
            choice(&choice(&a, f.clone(), &c), e, &choice(&b, f, &d)),
        ),
        "Distr" => (
            choice(&a, f.clone(), &choice(&b, e.clone(), &c)),
            choice(&choice(&a, f.clone(), &b), e, &choice(&a, f, &c)),
        ),
        _ => unreachable!(),
    }
}

fn axioms() -> Outcome_ {
    const AXIOMS: [&str; 8] = ["B1", "B2", "SC", "SA", "Unfold", "Unguard", "Entr", "Distr"];
    let mut r = rng(4);
    let o = opts();
    let mut worst = 0f64;
    for axiom in AXIOMS {
        for k in 0..500 {
            let (l, rr) = axiom_instance(&mut r, axiom);
            let d = fdist(&l, &rr, &o);
            worst = worst.max(d.upper);
            ensure(d.upper <= TOL, || {
                format!("{axiom} instance {k}: {l} vs {rr} has upper {}", d.upper)
            })?;
        }
    }
    let mut ib = 0;
    while ib < 200 {
        let [t, s, t2, s2] = [0; 4].map(|_| random_term(&mut r, 3));
        let e = weight(&mut r);
        let ef = to_f64(&e);
        let d1 = fdist(&t, &s, &o);
        let d2 = fdist(&t2, &s2, &o);
        let dc = fdist(&choice(&t, e.clone(), &t2), &choice(&s, e, &s2), &o);
        ensure(dc.upper <= ef * d1.lower + (1.0 - ef) * d2.lower + 2.0 * TOL, || {
            format!(
                "IB {t} {s} {t2} {s2} at {ef}: {} vs {} / {}",
                dc.upper, d1.lower, d2.lower
            )
        })?;
        ib += 1;
    }
    let mut pref = 0;
    while pref < 200 {
        let (t, s) = (random_term(&mut r, 3), random_term(&mut r, 3));
        let a = label(["a", "b"].choose(&mut r).unwrap());
        let d = fdist(&t, &s, &o);
        let dp = fdist(&Term::prefix(&a, t.clone()), &Term::prefix(&a, s.clone()), &o);
        ensure(close((d.lower, d.upper), (dp.lower, dp.upper), 2.0 * TOL), || {
            format!(
                "Pref {t} {s}: [{}, {}] vs [{}, {}]",
                d.lower, d.upper, dp.lower, dp.upper
            )
        })?;
        pref += 1;
    }
    Ok(format!(
        "8x500 axiom instances (max upper {worst:e}), {ib} IB, {pref} Pref"
    ))
}

// 5

fn two_loops() -> PointedChain {
    chain(
        &[
            ("m", &[("a", "m", rat(1, 2)), ("Z", "", rat(1, 2))]),
            ("n", &[("a", "n", rat(1, 3)), ("Z", "", rat(2, 3))]),
        ],
        "m",
    )
}

fn discounted() -> Outcome_ {
    let c = two_loops().chain;
    let (m, n) = (c.index_of("m").unwrap(), c.index_of("n").unwrap());
    let mut report = Vec::new();
    for lambda in [rat(1, 4), rat(1, 2), rat(3, 4)] {
        let closed = Rational::one() / (int(6) - int(2) * &lambda);
        let f = discounted_distance::<f64>(&c, &lambda, &opts()).map_err(|e| e.to_string())?;
        let v = *f.value.get(m, n);
        let err = (v - to_f64(&closed)).abs();
        ensure(err <= TOL && f.bound >= err, || {
            format!("λ={lambda}: {v} vs {closed}, bound {}", f.bound)
        })?;
        let x = discounted_distance::<Rational>(&c, &lambda, &opts()).map_err(|e| e.to_string())?;
        let xv = x.value.get(m, n).clone();
        let xerr = if xv > closed { &xv - &closed } else { &closed - &xv };
        ensure(xerr <= rat(1, 1_000_000_000) && x.bound >= xerr, || {
            format!("exact λ={lambda}: {xv} vs {closed}, bound {}", x.bound)
        })?;
        report.push(format!("λ={lambda}: {v:.12}"));
    }
    let mut r = rng(5);
    let lambdas = [rat(1, 4), rat(1, 2), rat(3, 4)];
    for k in 0..100 {
        let lambda = lambdas.choose(&mut r).unwrap().clone();
        let lf = to_f64(&lambda);
        let o = opts().with_discount(Some(lambda.clone()));
        let (t, s) = (random_term(&mut r, 3), random_term(&mut r, 3));
        let a = label(["a", "b"].choose(&mut r).unwrap());
        let d = fdist(&t, &s, &o);
        let dp = fdist(&Term::prefix(&a, t.clone()), &Term::prefix(&a, s.clone()), &o);
        ensure(
            close((lf * d.lower, lf * d.upper), (dp.lower, dp.upper), 2.0 * TOL),
            || {
                format!(
                    "dPref pair {k} at λ={lambda}: {t} {s}: [{}, {}] vs [{}, {}]",
                    d.lower, d.upper, dp.lower, dp.upper
                )
            },
        )?;
    }
    Ok(format!("{}; 100 dPref pairs", report.join(", ")))
}

// 6

/// Exhaustive search over spanning-tree bases of the transportation polytope.
fn transport_oracle(supply: &[Rational], demand: &[Rational], cost: &[Vec<Rational>]) -> Rational {
    let (m, n) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best: Option<Rational> = None;
    let mut pick = Vec::with_capacity(k);
    fn subsets(
        cells: &[(usize, usize)],
        from: usize,
        k: usize,
        pick: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        if pick.len() == k {
            visit(pick);
            return;
        }
        for c in from..cells.len() {
            if cells.len() - c < k - pick.len() {
                break;
            }
            pick.push(cells[c]);
            subsets(cells, c + 1, k, pick, visit);
            pick.pop();
        }
    }
    let mut visit = |basis: &[(usize, usize)]| {
        let mut row = supply.to_vec();
        let mut col = demand.to_vec();
        let mut open: BTreeSet<(usize, usize)> = basis.iter().copied().collect();
        let mut flow = Vec::new();
        while !open.is_empty() {
            let leaf = (0..m)
                .find_map(|i| {
                    let cs: Vec<_> = open.iter().filter(|c| c.0 == i).copied().collect();
                    (cs.len() == 1).then(|| (cs[0], row[i].clone()))
                })
                .or_else(|| {
                    (0..n).find_map(|j| {
                        let cs: Vec<_> = open.iter().filter(|c| c.1 == j).copied().collect();
                        (cs.len() == 1).then(|| (cs[0], col[j].clone()))
                    })
                });
            // no leaf: the cells contain a cycle and are not a basis
            let Some(((i, j), f)) = leaf else { return };
            row[i] -= &f;
            col[j] -= &f;
            open.remove(&(i, j));
            flow.push((i, j, f));
        }
        if row.iter().chain(col.iter()).any(|x| !x.is_zero()) || flow.iter().any(|(_, _, f)| f < &Rational::zero()) {
            return;
        }
        let value: Rational = flow.iter().map(|(i, j, f)| f * &cost[*i][*j]).sum();
        if best.as_ref().is_none_or(|b| &value < b) {
            best = Some(value);
        }
    };
    subsets(&cells, 0, k, &mut pick, &mut visit);
    best.expect("a feasible basis exists")
}

fn kantorovich_oracle() -> Outcome_ {
    let mut r = rng(6);
    let points = 4u8;
    for k in 0..1000 {
        let metric = r.gen_bool(0.5);
        let mut table = BTreeMap::new();
        for i in 0..points {
            for j in i + 1..points {
                let v = if metric {
                    rat(r.gen_range(6..=12), 12)
                } else {
                    rat(r.gen_range(0..=12), 12)
                };
                table.insert((i, j), v);
            }
        }
        let ground = |x: &GroundPoint<u8>, y: &GroundPoint<u8>| match (x, y) {
            (GroundPoint::Bottom, GroundPoint::Bottom) => int(0),
            (GroundPoint::Bottom, _) | (_, GroundPoint::Bottom) => int(1),
            (GroundPoint::Point(i), GroundPoint::Point(j)) if i == j => int(0),
            (GroundPoint::Point(i), GroundPoint::Point(j)) => table[&(*i.min(j), *i.max(j))].clone(),
        };
        let mu = random_subdist(&mut r, points, 3);
        let nu = random_subdist(&mut r, points, 3);
        let (value, coupling) = kantorovich::<u8, Rational>(&mu, &nu, ground);

        let ext = |d: &SubDistribution<u8>| {
            let mut v: Vec<(GroundPoint<u8>, Rational)> =
                d.iter().map(|(p, m)| (GroundPoint::Point(*p), m.clone())).collect();
            let deficit = Rational::one() - d.total();
            if !deficit.is_zero() {
                v.push((GroundPoint::Bottom, deficit));
            }
            v
        };
        let (xs, ys) = (ext(&mu), ext(&nu));
        let supply: Vec<_> = xs.iter().map(|(_, m)| m.clone()).collect();
        let demand: Vec<_> = ys.iter().map(|(_, m)| m.clone()).collect();
        let cost: Vec<Vec<_>> = xs
            .iter()
            .map(|(x, _)| ys.iter().map(|(y, _)| ground(x, y)).collect())
            .collect();
        let expected = transport_oracle(&supply, &demand, &cost);
        ensure(value == expected, || {
            format!("pair {k}: solver {value}, oracle {expected} for {mu:?} {nu:?}")
        })?;
        ensure(coupling.cost(ground) == value, || {
            format!("pair {k}: coupling cost differs")
        })?;
        let marg = |m: Vec<(GroundPoint<u8>, Rational)>| m.into_iter().collect::<BTreeMap<_, _>>();
        ensure(marg(coupling.left_marginal()) == marg(xs.clone()), || {
            format!("pair {k}: left marginal")
        })?;
        ensure(marg(coupling.right_marginal()) == marg(ys.clone()), || {
            format!("pair {k}: right marginal")
        })?;
    }
    Ok("1000 pairs agree exactly".into())
}

// 7

fn roundtrip_pair_check(
    p: &PointedChain,
    p2: &PointedChain,
    q: &PointedChain,
    q2: &PointedChain,
) -> std::result::Result<(), String> {
    let o = opts();
    let a = pointed_distance::<f64>(p, q, &o).map_err(|e| e.to_string())?;
    let b = pointed_distance::<f64>(p2, q2, &o).map_err(|e| e.to_string())?;
    ensure(close((a.lower, a.upper), (b.lower, b.upper), 2.0 * TOL), || {
        format!("[{}, {}] vs [{}, {}]", a.lower, a.upper, b.lower, b.upper)
    })
}

fn kleene() -> Outcome_ {
    let mut r = rng(7);
    let back = |p: &PointedChain| -> std::result::Result<PointedChain, String> {
        let t = chain_to_term(p).map_err(|e| e.to_string())?;
        reachable_chain(&t).map_err(|e| e.to_string())
    };
    for k in 0..100 {
        let (n, m) = (r.gen_range(1..=10), r.gen_range(1..=10));
        let p = random_chain(&mut r, n, 2);
        let q = random_chain(&mut r, m, 2);
        let (p2, q2) = (back(&p)?, back(&q)?);
        ensure(bisimilar(&p, &p2) && bisimilar(&q, &q2), || {
            format!("chain {k} not bisimilar to its term")
        })?;
        roundtrip_pair_check(&p, &p2, &q, &q2).map_err(|e| format!("chain pair {k}: {e}"))?;
    }
    for k in 0..100 {
        let (t, s) = (random_term(&mut r, 4), random_term(&mut r, 4));
        let (p, q) = (reachable_chain(&t).unwrap(), reachable_chain(&s).unwrap());
        let t2 = chain_to_term(&p).map_err(|e| e.to_string())?;
        let s2 = chain_to_term(&q).map_err(|e| e.to_string())?;
        ensure(
            term_bisimilar(&t, &t2).unwrap() && term_bisimilar(&s, &s2).unwrap(),
            || format!("term {k}: {t} vs {t2}"),
        )?;
        let (p2, q2) = (reachable_chain(&t2).unwrap(), reachable_chain(&s2).unwrap());
        roundtrip_pair_check(&p, &p2, &q, &q2).map_err(|e| format!("term pair {k}: {e}"))?;
    }
    Ok("100 chain pairs and 100 term pairs".into())
}

// 8

fn checker() -> Outcome_ {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("proofs/worked_example.json");
    let script = load_script(&std::fs::read(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    check_proof(&script).map_err(|v| v.to_string())?;
    let t = term("rec X.(a.X +[1/2] Z)");
    let s = term("rec Y.(a.Y +[1/3] Z)");
    let goal = &script.goal;
    ensure(
        goal.hyps.is_empty()
            && mcbisim::term::alpha_eq(&goal.concl.left, &t)
            && mcbisim::term::alpha_eq(&goal.concl.right, &s)
            && goal.concl.eps == Epsilon::constant(rat(1, 4)),
        || format!("goal is {goal}"),
    )?;
    let rules: BTreeSet<String> = script.steps.iter().map(|s| s.rule_name().to_string()).collect();
    for needed in ["B2", "SA", "SC", "Top", "Pref", "IB", "Contract"] {
        ensure(rules.contains(needed), || format!("no {needed} step"))?;
    }
    let last = script.steps.last().unwrap();
    ensure(
        last.witness.a == Some(rat(1, 3)) && last.witness.b == Some(rat(1, 6)),
        || "contraction witnesses".into(),
    )?;

    for i in 0..script.steps.len() {
        let mut bad = script.clone();
        let eps = &mut bad.steps[i].judgment.concl.eps;
        eps.constant -= rat(1, 1000);
        ensure(check_proof(&bad).is_err(), || {
            format!("mutating step {i} went unnoticed")
        })?;
    }

    let mut r = rng(8);
    let o = opts();
    let (mut judgments, mut undecided) = (0, 0);
    let mut used = BTreeSet::new();
    for k in 0..100 {
        let script = random_script(&mut r, 12);
        check_proof(&script).map_err(|v| format!("script {k}: {v}"))?;
        for (i, step) in script.steps.iter().enumerate() {
            used.insert(step.rule_name().to_string());
            if !step.judgment.hyps.is_empty() {
                continue;
            }
            judgments += 1;
            match semantic_validate(&step.judgment, &o).map_err(|e| format!("script {k} step {i}: {e}"))? {
                Validation::Holds => {}
                Validation::Undecided(d) if d.width() <= o.tol => undecided += 1,
                v => return Err(format!("script {k} step {i}: {} is {v:?}", step.judgment)),
            }
        }
    }
    Ok(format!(
        "worked script ok, {} mutations rejected, {judgments} random judgments valid ({undecided} within enclosure width) using {}",
        script.steps.len(),
        used.into_iter().collect::<Vec<_>>().join(" ")
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome_); 8] = [
        ("worked example distance is 1/4", worked_value),
        ("recursion is not non-expansive", recursion_counterexample),
        ("zero distance is bisimilarity", kernel),
        ("axioms and rules are sound", axioms),
        ("discounted closed form and dPref", discounted),
        ("Kantorovich solver matches oracle", kantorovich_oracle),
        ("quantitative Kleene roundtrip", kleene),
        ("proof checker", checker),
    ];
    let mut failed = 0;
    for (i, (what, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let time = start.elapsed();
        match result {
            Ok(detail) => println!("PASS criterion {}: {what} ({detail}) [{time:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {what}: {detail} [{time:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
