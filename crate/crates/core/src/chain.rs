//! Finite open Markov chains and the algebra of pointed chains.
//!
//! A state moves with some probability either to a labelled successor state or
//! to a name (an exit point); the remaining mass, if any, is the probability of
//! termination.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::distribution::SubDistribution;
use crate::error::{Error, Result};
use crate::rational::{format_rational, is_unit_interval, parse_rational, Rational};
use crate::term::{Label, Name};

pub type StateId = String;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Step(Label, StateId),
    Exit(Name),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Step(a, s) => write!(f, "({a}, {s})"),
            Outcome::Exit(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateState,
    MissingTransition,
    UnknownSource,
    DanglingTarget,
    NonPositiveMass,
    MassExceedsOne,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::DuplicateState => "duplicate-state",
            ViolationKind::MissingTransition => "missing-transition",
            ViolationKind::UnknownSource => "unknown-source",
            ViolationKind::DanglingTarget => "dangling-target",
            ViolationKind::NonPositiveMass => "non-positive-mass",
            ViolationKind::MassExceedsOne => "mass-exceeds-one",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: StateId,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {:?}: {} ({})", self.state, self.kind.as_str(), self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OpenMarkovChain {
    states: Vec<StateId>,
    transitions: BTreeMap<StateId, SubDistribution<Outcome>>,
}

impl OpenMarkovChain {
    /// Builds a chain and rejects it unless [`validate`](Self::validate) is clean.
    pub fn new(states: Vec<StateId>, transitions: BTreeMap<StateId, SubDistribution<Outcome>>) -> Result<Self> {
        let chain = OpenMarkovChain::unchecked(states, transitions);
        let violations = chain.validate();
        if violations.is_empty() {
            Ok(chain)
        } else {
            Err(Error::InvalidChain(violations))
        }
    }

    /// Builds a chain without checking it. The analysis functions assume a
    /// valid chain and may panic otherwise.
    pub fn unchecked(states: Vec<StateId>, transitions: BTreeMap<StateId, SubDistribution<Outcome>>) -> Self {
        OpenMarkovChain { states, transitions }
    }

    pub fn empty() -> Self {
        OpenMarkovChain::default()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                out.push(violation(
                    s,
                    ViolationKind::DuplicateState,
                    "listed more than once".into(),
                ));
            }
        }
        for s in &self.states {
            if !self.transitions.contains_key(s) && seen.remove(s) {
                out.push(violation(
                    s,
                    ViolationKind::MissingTransition,
                    "no transition entry".into(),
                ));
            }
        }
        let known: BTreeSet<&StateId> = self.states.iter().collect();
        for (s, dist) in &self.transitions {
            if !known.contains(s) {
                out.push(violation(
                    s,
                    ViolationKind::UnknownSource,
                    "transition for a state not in the state list".into(),
                ));
            }
            for (o, p) in dist.iter() {
                if !p.is_positive() {
                    out.push(violation(
                        s,
                        ViolationKind::NonPositiveMass,
                        format!("{o} has mass {}", format_rational(p)),
                    ));
                }
                if let Outcome::Step(_, t) = o {
                    if !known.contains(t) {
                        out.push(violation(
                            s,
                            ViolationKind::DanglingTarget,
                            format!("step to unknown state {t:?}"),
                        ));
                    }
                }
            }
            let total = dist.total();
            if total > Rational::one() {
                out.push(violation(
                    s,
                    ViolationKind::MassExceedsOne,
                    format!("total mass {}", format_rational(&total)),
                ));
            }
        }
        out
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.transitions.contains_key(s)
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    /// Transition distribution of `s`; the empty distribution for unknown states.
    pub fn transition(&self, s: &str) -> &SubDistribution<Outcome> {
        static EMPTY: std::sync::OnceLock<SubDistribution<Outcome>> = std::sync::OnceLock::new();
        self.transitions
            .get(s)
            .unwrap_or_else(|| EMPTY.get_or_init(SubDistribution::new))
    }

    pub fn transitions(&self) -> &BTreeMap<StateId, SubDistribution<Outcome>> {
        &self.transitions
    }

    /// All exit names mentioned by some transition.
    pub fn exit_names(&self) -> BTreeSet<Name> {
        self.transitions
            .values()
            .flat_map(|d| d.support())
            .filter_map(|o| match o {
                Outcome::Exit(x) => Some(x.clone()),
                Outcome::Step(..) => None,
            })
            .collect()
    }

    /// States reachable from `from` (in state-list order).
    pub fn reachable_from(&self, from: &str) -> Vec<StateId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from.to_string()];
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            for o in self.transition(&s).support() {
                if let Outcome::Step(_, t) = o {
                    if !seen.contains(t) {
                        stack.push(t.clone());
                    }
                }
            }
        }
        self.states.iter().filter(|s| seen.contains(*s)).cloned().collect()
    }

    /// The sub-chain on `keep`, which must be closed under successors.
    pub fn restrict(&self, keep: &[StateId]) -> OpenMarkovChain {
        let transitions = keep.iter().map(|s| (s.clone(), self.transition(s).clone())).collect();
        OpenMarkovChain::unchecked(keep.to_vec(), transitions)
    }

    pub(crate) fn indexed(&self) -> Indexed {
        let index: HashMap<&str, usize> = self.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let rows = self
            .states
            .iter()
            .map(|s| {
                self.transition(s)
                    .iter()
                    .map(|(o, p)| {
                        let target = match o {
                            Outcome::Step(a, t) => Target::Step(
                                a.clone(),
                                *index
                                    .get(t.as_str())
                                    .unwrap_or_else(|| panic!("dangling target {t:?}; validate the chain first")),
                            ),
                            Outcome::Exit(x) => Target::Exit(x.clone()),
                        };
                        (target, p.clone())
                    })
                    .collect()
            })
            .collect();
        Indexed { rows }
    }
}

fn violation(s: &str, kind: ViolationKind, detail: String) -> Violation {
    Violation {
        state: s.to_string(),
        kind,
        detail,
    }
}

/// Outcome with the target state replaced by its position in the state list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Step(Label, usize),
    Exit(Name),
}

/// Positional view of a chain used by the numeric and refinement code.
#[derive(Clone, Debug)]
pub(crate) struct Indexed {
    pub rows: Vec<Vec<(Target, Rational)>>,
}

impl Indexed {
    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedChain {
    pub chain: OpenMarkovChain,
    pub initial: StateId,
}

impl PointedChain {
    pub fn new(chain: OpenMarkovChain, initial: impl Into<StateId>) -> Result<Self> {
        let initial = initial.into();
        if !chain.contains(&initial) {
            return Err(Error::UnknownState(initial));
        }
        Ok(PointedChain { chain, initial })
    }

    pub fn initial_index(&self) -> usize {
        self.chain
            .index_of(&self.initial)
            .expect("initial state belongs to the chain")
    }

    /// Drops the states that cannot be reached from the initial one.
    pub fn trimmed(&self) -> PointedChain {
        let keep = self.chain.reachable_from(&self.initial);
        PointedChain {
            chain: self.chain.restrict(&keep),
            initial: self.initial.clone(),
        }
    }
}

/// State renaming produced by [`disjoint_union`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injections {
    pub left: BTreeMap<StateId, StateId>,
    pub right: BTreeMap<StateId, StateId>,
}

/// `a ⊕ b`: the states of `a` keep their identifiers, clashing states of `b`
/// get primes appended. Exit names are shared.
pub fn disjoint_union(a: &OpenMarkovChain, b: &OpenMarkovChain) -> (OpenMarkovChain, Injections) {
    let mut taken: BTreeSet<StateId> = a.states.iter().cloned().collect();
    taken.extend(b.states.iter().cloned());
    let left: BTreeMap<StateId, StateId> = a.states.iter().map(|s| (s.clone(), s.clone())).collect();
    let mut right = BTreeMap::new();
    let mut used: BTreeSet<StateId> = a.states.iter().cloned().collect();
    for s in &b.states {
        let fresh = if used.contains(s) {
            let mut c = format!("{s}'");
            while taken.contains(&c) || used.contains(&c) {
                c.push('\'');
            }
            c
        } else {
            s.clone()
        };
        used.insert(fresh.clone());
        right.insert(s.clone(), fresh);
    }
    let mut states = a.states.clone();
    states.extend(b.states.iter().map(|s| right[s].clone()));
    let mut transitions = a.transitions.clone();
    for s in &b.states {
        let renamed = rename_targets(b.transition(s), &right);
        transitions.insert(right[s].clone(), renamed);
    }
    (
        OpenMarkovChain::unchecked(states, transitions),
        Injections { left, right },
    )
}

fn rename_targets(d: &SubDistribution<Outcome>, map: &BTreeMap<StateId, StateId>) -> SubDistribution<Outcome> {
    d.map_outcomes(|o| match o {
        Outcome::Step(a, t) => Outcome::Step(a.clone(), map.get(t).cloned().unwrap_or_else(|| t.clone())),
        Outcome::Exit(x) => Outcome::Exit(x.clone()),
    })
}

fn fresh_state(base: &str, chain: &OpenMarkovChain) -> StateId {
    let mut s = base.to_string();
    while chain.contains(&s) {
        s.push('\'');
    }
    s
}

fn with_new_initial(chain: OpenMarkovChain, base: &str, dist: SubDistribution<Outcome>) -> PointedChain {
    let init = fresh_state(base, &chain);
    let OpenMarkovChain {
        mut states,
        mut transitions,
    } = chain;
    states.insert(0, init.clone());
    transitions.insert(init.clone(), dist);
    PointedChain {
        chain: OpenMarkovChain { states, transitions },
        initial: init,
    }
}

/// One state that exits to `x` with probability 1.
pub fn omc_name(x: &Name) -> PointedChain {
    let s: StateId = "x".into();
    let chain = OpenMarkovChain {
        states: vec![s.clone()],
        transitions: BTreeMap::from([(s.clone(), SubDistribution::dirac(Outcome::Exit(x.clone())))]),
    };
    PointedChain { chain, initial: s }
}

/// A fresh initial state stepping with label `a` to the old initial state.
pub fn omc_prefix(a: &Label, p: &PointedChain) -> PointedChain {
    let dist = SubDistribution::dirac(Outcome::Step(a.clone(), p.initial.clone()));
    with_new_initial(p.chain.clone(), "p", dist)
}

/// A fresh initial state behaving as `p` with probability `e` and as `q`
/// with probability `1 - e`, over `p ⊕ q`.
pub fn omc_choice(p: &PointedChain, e: &Rational, q: &PointedChain) -> Result<PointedChain> {
    if !is_unit_interval(e) {
        return Err(Error::WeightOutOfRange(format_rational(e)));
    }
    let (union, inj) = disjoint_union(&p.chain, &q.chain);
    let left = union.transition(&inj.left[&p.initial]).clone();
    let right = union.transition(&inj.right[&q.initial]).clone();
    let dist = left.mix(e, &right);
    Ok(with_new_initial(union, "c", dist))
}

/// Closes the exit `x` by looping it back into the initial state.
///
/// Every state's mass `p` on `x` is replaced by `p·σ`, where σ is the
/// distribution reached from the initial state once all its own `x`-loops
/// have been resolved: the non-`x` part of its transition divided by
/// `1 - τ(m)(x)`, or nothing when the initial state exits to `x` surely.
pub fn omc_rec(x: &Name, p: &PointedChain) -> PointedChain {
    let exit = Outcome::Exit(x.clone());
    let mut sigma = p.chain.transition(&p.initial).clone();
    let self_mass = sigma.remove(&exit);
    let sigma = if self_mass.is_one() {
        SubDistribution::new()
    } else {
        sigma.scaled(&(Rational::one() / (Rational::one() - &self_mass)))
    };
    let transitions = p
        .chain
        .transitions
        .iter()
        .map(|(s, d)| {
            let mut d = d.clone();
            let px = d.remove(&exit);
            if !px.is_zero() {
                d.add_scaled(&sigma, &px);
            }
            (s.clone(), d)
        })
        .collect();
    PointedChain {
        chain: OpenMarkovChain {
            states: p.chain.states.clone(),
            transitions,
        },
        initial: p.initial.clone(),
    }
}

// ---------------------------------------------------------------------------
// JSON

/// Parses the JSON chain format. A missing `"initial"` selects the first state.
pub fn load_chain(bytes: &[u8]) -> Result<PointedChain> {
    let value: Value = serde_json::from_slice(bytes)?;
    chain_from_json(&value)
}

pub fn chain_from_json(value: &Value) -> Result<PointedChain> {
    let root = value.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    for key in root.keys() {
        if !matches!(key.as_str(), "states" | "initial" | "transitions") {
            return Err(schema(&format!("$.{key}"), "unknown field"));
        }
    }
    let states_v = root
        .get("states")
        .ok_or_else(|| schema("$", "missing field \"states\""))?
        .as_array()
        .ok_or_else(|| schema("$.states", "expected an array of strings"))?;
    let mut states = Vec::with_capacity(states_v.len());
    let mut seen = BTreeSet::new();
    for (i, s) in states_v.iter().enumerate() {
        let s = s
            .as_str()
            .ok_or_else(|| schema(&format!("$.states[{i}]"), "expected a string"))?;
        if !seen.insert(s.to_string()) {
            return Err(schema(&format!("$.states[{i}]"), &format!("duplicate state {s:?}")));
        }
        states.push(s.to_string());
    }
    let trans_v = root
        .get("transitions")
        .ok_or_else(|| schema("$", "missing field \"transitions\""))?
        .as_object()
        .ok_or_else(|| schema("$.transitions", "expected an object"))?;
    let mut transitions = BTreeMap::new();
    for (s, entries) in trans_v {
        let path = format!("$.transitions.{s}");
        if !seen.contains(s) {
            return Err(schema(&path, "state not listed in \"states\""));
        }
        let entries = entries
            .as_array()
            .ok_or_else(|| schema(&path, "expected an array of outcomes"))?;
        let mut dist = SubDistribution::new();
        for (j, e) in entries.iter().enumerate() {
            let epath = format!("{path}[{j}]");
            let o = e.as_object().ok_or_else(|| schema(&epath, "expected an object"))?;
            let prob = parse_prob(o.get("prob"), &format!("{epath}.prob"))?;
            let outcome = match (o.get("label"), o.get("target"), o.get("name")) {
                (Some(l), Some(t), None) => {
                    let l = l
                        .as_str()
                        .ok_or_else(|| schema(&format!("{epath}.label"), "expected a string"))?;
                    let label = Label::new(l).map_err(|e| schema(&format!("{epath}.label"), &e.to_string()))?;
                    let t = t
                        .as_str()
                        .ok_or_else(|| schema(&format!("{epath}.target"), "expected a string"))?;
                    if !seen.contains(t) {
                        return Err(schema(&format!("{epath}.target"), &format!("unknown state {t:?}")));
                    }
                    Outcome::Step(label, t.to_string())
                }
                (None, None, Some(x)) => {
                    let x = x
                        .as_str()
                        .ok_or_else(|| schema(&format!("{epath}.name"), "expected a string"))?;
                    let name = Name::new(x).map_err(|e| schema(&format!("{epath}.name"), &e.to_string()))?;
                    Outcome::Exit(name)
                }
                _ => return Err(schema(&epath, "expected either {label, target, prob} or {name, prob}")),
            };
            for key in o.keys() {
                if !matches!(key.as_str(), "label" | "target" | "name" | "prob") {
                    return Err(schema(&format!("{epath}.{key}"), "unknown field"));
                }
            }
            dist.add(outcome, prob);
        }
        if dist.total() > Rational::one() {
            return Err(schema(
                &path,
                &format!("total mass {} exceeds 1", format_rational(&dist.total())),
            ));
        }
        transitions.insert(s.clone(), dist);
    }
    for s in &states {
        transitions.entry(s.clone()).or_default();
    }
    let initial = match root.get("initial") {
        Some(v) => {
            let s = v.as_str().ok_or_else(|| schema("$.initial", "expected a string"))?;
            if !seen.contains(s) {
                return Err(schema("$.initial", &format!("unknown state {s:?}")));
            }
            s.to_string()
        }
        None => states
            .first()
            .cloned()
            .ok_or_else(|| schema("$.states", "a pointed chain needs at least one state"))?,
    };
    let chain = OpenMarkovChain::new(states, transitions)?;
    Ok(PointedChain { chain, initial })
}

fn parse_prob(v: Option<&Value>, path: &str) -> Result<Rational> {
    let text = match v {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err(schema(path, "expected a rational string such as \"1/3\"")),
        None => return Err(schema(path, "missing probability")),
    };
    let p = parse_rational(&text).map_err(|e| schema(path, &e.to_string()))?;
    if !p.is_positive() || p > Rational::one() {
        return Err(schema(
            path,
            &format!("probability {} outside (0,1]", format_rational(&p)),
        ));
    }
    Ok(p)
}

fn schema(path: &str, message: &str) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.to_string(),
    }
}

pub fn chain_to_json(p: &PointedChain) -> Value {
    let mut transitions = Map::new();
    for s in &p.chain.states {
        let entries: Vec<Value> = p
            .chain
            .transition(s)
            .iter()
            .map(|(o, prob)| match o {
                Outcome::Step(a, t) => json!({"label": a.as_str(), "target": t, "prob": format_rational(prob)}),
                Outcome::Exit(x) => json!({"name": x.as_str(), "prob": format_rational(prob)}),
            })
            .collect();
        transitions.insert(s.clone(), Value::Array(entries));
    }
    json!({
        "states": p.chain.states,
        "initial": p.initial,
        "transitions": transitions,
    })
}

pub fn save_chain(p: &PointedChain) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&chain_to_json(p)).expect("chain json serializes");
    out.push(b'\n');
    out
}
