//! Operational semantics of terms and the conversions between terms and
//! finite chains.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Zero};

use crate::chain::{omc_choice, omc_name, omc_prefix, omc_rec, OpenMarkovChain, Outcome, PointedChain, StateId};
use crate::distribution::SubDistribution;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::term::{alpha_normalize, formal_sum, is_guarded, substitute, substitute_one, Label, Name, Term};
use crate::DEFAULT_STATE_CAP;

/// One outcome of a term's transition: a labelled move to a successor term,
/// or an exit through a free name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Step(Label, Term),
    Exit(Name),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Step(a, t) => write!(f, "({a}, {t})"),
            Move::Exit(x) => write!(f, "{x}"),
        }
    }
}

pub type Derivative = SubDistribution<Move>;

/// The one-step transition distribution of `t`.
///
/// For `rec X.t` the unguarded occurrences of `X` show up as exits through
/// `X`; their mass `p` is resolved geometrically, and guarded occurrences in
/// successor terms are replaced by the recursion itself.
pub fn one_step(t: &Term) -> Derivative {
    match t {
        Term::Name(x) => SubDistribution::dirac(Move::Exit(x.clone())),
        Term::Prefix(a, b) => SubDistribution::dirac(Move::Step(a.clone(), (**b).clone())),
        Term::Choice(l, e, r) => {
            if e.is_one() {
                one_step(l)
            } else if e.is_zero() {
                one_step(r)
            } else {
                one_step(l).mix(e, &one_step(r))
            }
        }
        Term::Rec(x, body) => {
            let mut d = one_step(body);
            let p = d.remove(&Move::Exit(x.clone()));
            if p.is_one() {
                return SubDistribution::new();
            }
            let scale = Rational::one() / (Rational::one() - p);
            d.iter()
                .map(|(m, q)| {
                    let m = match m {
                        Move::Step(a, s) if s.has_free(x) => Move::Step(a.clone(), substitute_one(s, x, t)),
                        other => other.clone(),
                    };
                    (m, q * &scale)
                })
                .collect()
        }
    }
}

/// Reachable chain of `t` with the default state cap.
pub fn reachable_chain(t: &Term) -> Result<PointedChain> {
    reachable_chain_capped(t, DEFAULT_STATE_CAP)
}

pub fn reachable_chain_capped(t: &Term, cap: usize) -> Result<PointedChain> {
    explore(t, cap).map(|(p, _)| p)
}

/// Breadth-first closure of [`one_step`] from `t`, keyed on α-normal forms.
/// State `i` is named `"i"` and corresponds to the `i`-th returned term; the
/// initial state is `"0"`.
pub fn explore(t: &Term, cap: usize) -> Result<(PointedChain, Vec<Term>)> {
    let start = alpha_normalize(t);
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut terms = vec![start.clone()];
    index.insert(start, 0);
    if cap == 0 {
        return Err(Error::StateCapExceeded { cap });
    }
    let mut queue = VecDeque::from([0usize]);
    let mut rows: Vec<SubDistribution<Outcome>> = vec![SubDistribution::new()];
    while let Some(i) = queue.pop_front() {
        let d = one_step(&terms[i]);
        let mut row = SubDistribution::new();
        for (m, p) in d.iter() {
            let o = match m {
                Move::Exit(x) => Outcome::Exit(x.clone()),
                Move::Step(a, s) => {
                    let key = alpha_normalize(s);
                    let j = match index.get(&key) {
                        Some(&j) => j,
                        None => {
                            if terms.len() >= cap {
                                return Err(Error::StateCapExceeded { cap });
                            }
                            let j = terms.len();
                            terms.push(key.clone());
                            index.insert(key, j);
                            rows.push(SubDistribution::new());
                            queue.push_back(j);
                            j
                        }
                    };
                    Outcome::Step(a.clone(), j.to_string())
                }
            };
            row.add(o, p.clone());
        }
        rows[i] = row;
    }
    let states: Vec<StateId> = (0..terms.len()).map(|i| i.to_string()).collect();
    let transitions = states.iter().cloned().zip(rows).collect();
    let chain = OpenMarkovChain::unchecked(states, transitions);
    Ok((
        PointedChain {
            chain,
            initial: "0".into(),
        },
        terms,
    ))
}

/// Chain of `t` built by the pointed-chain algebra, compositionally.
pub fn denote(t: &Term) -> PointedChain {
    match t {
        Term::Name(x) => omc_name(x),
        Term::Prefix(a, b) => omc_prefix(a, &denote(b)),
        Term::Choice(l, e, r) => omc_choice(&denote(l), e, &denote(r)).expect("term weights lie in [0,1]"),
        Term::Rec(x, b) => omc_rec(x, &denote(b)),
    }
}

/// A system of recursive equations `X_i = t_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    pub variables: Vec<Name>,
    pub rhs: Vec<Term>,
}

impl EquationSystem {
    pub fn new(variables: Vec<Name>, rhs: Vec<Term>) -> Self {
        assert_eq!(variables.len(), rhs.len(), "one right-hand side per variable");
        EquationSystem { variables, rhs }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// The first variable not guarded in some right-hand side.
    pub fn unguarded(&self) -> Option<(usize, &Name)> {
        for (i, t) in self.rhs.iter().enumerate() {
            for x in &self.variables {
                if t.has_free(x) && !is_guarded(x, t) {
                    return Some((i, x));
                }
            }
        }
        None
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, t) in self.variables.iter().zip(&self.rhs) {
            writeln!(f, "{x} = {t}")?;
        }
        Ok(())
    }
}

/// Equational normal form of `t`: one variable per reachable state, the first
/// standing for `t` itself.
pub fn normal_form(t: &Term) -> Result<EquationSystem> {
    normal_form_capped(t, DEFAULT_STATE_CAP)
}

pub fn normal_form_capped(t: &Term, cap: usize) -> Result<EquationSystem> {
    let p = reachable_chain_capped(t, cap)?;
    system_of_chain(&p.chain, &p.initial)
}

/// Variables `V1, V2, …` (with a longer stem if that would clash with `avoid`).
fn fresh_variables(k: usize, avoid: &BTreeSet<Name>) -> Vec<Name> {
    let mut stem = String::from("V");
    loop {
        let vars: Vec<Name> = (1..=k)
            .map(|i| Name::new(format!("{stem}{i}")).expect("valid name"))
            .collect();
        if vars.iter().all(|v| !avoid.contains(v)) {
            return vars;
        }
        stem.push('V');
    }
}

/// Equations read off the states reachable from `initial`, with the variable
/// of `initial` first.
pub fn system_of_chain(chain: &OpenMarkovChain, initial: &str) -> Result<EquationSystem> {
    let violations = chain.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidChain(violations));
    }
    if !chain.contains(initial) {
        return Err(Error::UnknownState(initial.to_string()));
    }
    let mut order = chain.reachable_from(initial);
    let pos = order.iter().position(|s| s == initial).expect("initial reaches itself");
    let init = order.remove(pos);
    order.insert(0, init);
    let vars = fresh_variables(order.len(), &chain.exit_names());
    let var_of: HashMap<&str, &Name> = order.iter().map(|s| s.as_str()).zip(&vars).collect();
    let rhs = order
        .iter()
        .map(|s| {
            let d = chain.transition(s);
            let mut entries: Vec<(Rational, Term)> = d
                .iter()
                .map(|(o, p)| {
                    let t = match o {
                        Outcome::Step(a, target) => Term::prefix(a, Term::name(var_of[target.as_str()])),
                        Outcome::Exit(y) => Term::name(y),
                    };
                    (p.clone(), t)
                })
                .collect();
            let deficit = d.deficit();
            if !deficit.is_zero() {
                entries.push((deficit, Term::nil()));
            }
            formal_sum(&entries).expect("chain rows are sub-probability distributions")
        })
        .collect();
    Ok(EquationSystem::new(vars, rhs))
}

/// Solves a guarded system: returns terms `s_i` with `s_i ≡ t_i[s̄/X̄]`.
pub fn unique_solution(sys: &EquationSystem) -> Result<Vec<Term>> {
    check_guarded(sys)?;
    Ok((0..sys.len()).map(|i| solve(sys, i, &mut Vec::new(), false)).collect())
}

fn check_guarded(sys: &EquationSystem) -> Result<()> {
    match sys.unguarded() {
        Some((i, x)) => Err(Error::Unguarded {
            var: x.to_string(),
            equation: sys.variables[i].to_string(),
        }),
        None => Ok(()),
    }
}

/// `rec X_i. t_i[ solve(j) / X_j ]` for the variables not yet bound on the
/// current path; `prune` drops binders whose variable does not occur.
fn solve(sys: &EquationSystem, i: usize, path: &mut Vec<usize>, prune: bool) -> Term {
    path.push(i);
    let rhs = &sys.rhs[i];
    let bindings: BTreeMap<Name, Term> = (0..sys.len())
        .filter(|j| !path.contains(j) && rhs.has_free(&sys.variables[*j]))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|j| (sys.variables[j].clone(), solve(sys, j, path, prune)))
        .collect();
    path.pop();
    let body = substitute(rhs, &bindings);
    let x = &sys.variables[i];
    if prune && !body.has_free(x) {
        body
    } else {
        Term::rec(x, body)
    }
}

/// A term whose reachable chain is bisimilar to `p`.
pub fn chain_to_term(p: &PointedChain) -> Result<Term> {
    let sys = system_of_chain(&p.chain, &p.initial)?;
    check_guarded(&sys)?;
    Ok(solve(&sys, 0, &mut Vec::new(), true))
}
