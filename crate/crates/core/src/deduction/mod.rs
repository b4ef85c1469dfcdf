//! Quantitative equational reasoning: judgments `Γ ⊢ t ≡_ε s`, proof
//! scripts, a step-by-step checker, and semantic validation against the
//! bisimilarity distance.
//!
//! Epsilons are affine forms `a·eps + b` in one indeterminate `eps`, so a
//! single step can be checked for every value of `eps` at once. That is what
//! the contraction rule needs: from `{t ≡_eps s} ⊢ t ≡_{a·eps+b} s` (with
//! `a < 1`) and `⊢ t ≡_1 s` it concludes `⊢ t ≡_{b/(1-a)} s`.

mod builder;
mod checker;
pub mod examples;
mod script;
mod validate;

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::ParseError;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::term::{alpha_eq, Term};

pub use builder::ScriptBuilder;
pub use checker::{check_contract_rule, check_proof, check_step, StepViolation};
pub use script::{load_script, save_script, script_from_json, script_to_json};
pub use validate::{free_model_distance, semantic_validate, Validation};

/// `coef·eps + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Epsilon {
    pub coef: Rational,
    pub constant: Rational,
}

impl Epsilon {
    pub fn constant(c: Rational) -> Self {
        Epsilon {
            coef: Rational::zero(),
            constant: c,
        }
    }

    pub fn zero() -> Self {
        Epsilon::default()
    }

    pub fn one() -> Self {
        Epsilon::constant(Rational::from_integer(1.into()))
    }

    /// The bare indeterminate `eps`.
    pub fn var() -> Self {
        Epsilon {
            coef: Rational::from_integer(1.into()),
            constant: Rational::zero(),
        }
    }

    pub fn affine(coef: Rational, constant: Rational) -> Self {
        Epsilon { coef, constant }
    }

    pub fn is_closed(&self) -> bool {
        self.coef.is_zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.coef.is_negative() && !self.constant.is_negative()
    }

    pub fn as_closed(&self) -> Option<&Rational> {
        self.is_closed().then_some(&self.constant)
    }

    pub fn add(&self, other: &Epsilon) -> Epsilon {
        Epsilon {
            coef: &self.coef + &other.coef,
            constant: &self.constant + &other.constant,
        }
    }

    pub fn scale(&self, k: &Rational) -> Epsilon {
        Epsilon {
            coef: &self.coef * k,
            constant: &self.constant * k,
        }
    }

    /// `self ≥ other` for every `eps ≥ 0`.
    pub fn dominates(&self, other: &Epsilon) -> bool {
        self.coef >= other.coef && self.constant >= other.constant
    }

    /// `self > other` for every `eps ≥ 0`.
    pub fn strictly_dominates(&self, other: &Epsilon) -> bool {
        self.coef >= other.coef && self.constant > other.constant
    }

    pub fn parse(text: &str) -> Result<Epsilon, ParseError> {
        parse_epsilon(text)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = Rational::from_integer(1.into());
        if self.coef.is_zero() {
            return write!(f, "{}", format_rational(&self.constant));
        }
        if self.coef == one {
            write!(f, "eps")?;
        } else {
            write!(f, "{}*eps", format_rational(&self.coef))?;
        }
        if self.constant.is_positive() {
            write!(f, " + {}", format_rational(&self.constant))?;
        } else if self.constant.is_negative() {
            write!(f, " - {}", format_rational(&-self.constant.clone()))?;
        }
        Ok(())
    }
}

fn parse_epsilon(text: &str) -> Result<Epsilon, ParseError> {
    let mut eps = Epsilon::zero();
    let mut rest = text;
    let mut negative = false;
    let mut offset = 0;
    let mut first = true;
    loop {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        rest = trimmed;
        if !first {
            if rest.is_empty() {
                break;
            }
            match rest.as_bytes()[0] {
                b'+' => negative = false,
                b'-' => negative = true,
                _ => return Err(ParseError::new(offset, "expected `+` or `-`")),
            }
            rest = &rest[1..];
            offset += 1;
        }
        first = false;
        let end = rest
            .char_indices()
            .skip(1)
            .find(|&(_, c)| c == '+' || c == '-')
            .map_or(rest.len(), |(i, _)| i);
        let part = rest[..end].trim();
        if part.is_empty() {
            return Err(ParseError::new(offset, "empty summand"));
        }
        let (value, is_var) = match part.strip_suffix("eps") {
            Some(c) => {
                let c = c.trim_end().trim_end_matches('*').trim();
                let v = if c.is_empty() {
                    Rational::from_integer(1.into())
                } else {
                    parse_rational(c).map_err(|e| ParseError::new(offset + e.position, e.message))?
                };
                (v, true)
            }
            None => (
                parse_rational(part).map_err(|e| ParseError::new(offset + e.position, e.message))?,
                false,
            ),
        };
        let value = if negative { -value } else { value };
        if is_var {
            eps.coef += value;
        } else {
            eps.constant += value;
        }
        offset += end;
        rest = &rest[end..];
    }
    Ok(eps)
}

/// `left ≡_eps right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantEquation {
    pub left: Term,
    pub right: Term,
    pub eps: Epsilon,
}

impl QuantEquation {
    pub fn new(left: Term, right: Term, eps: Epsilon) -> Self {
        QuantEquation { left, right, eps }
    }

    /// Same equation up to α-equivalence of both sides.
    pub fn matches(&self, other: &QuantEquation) -> bool {
        self.eps == other.eps && alpha_eq(&self.left, &other.left) && alpha_eq(&self.right, &other.right)
    }
}

impl fmt::Display for QuantEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≡[{}] {}", self.left, self.eps, self.right)
    }
}

/// `Γ ⊢ φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub hyps: Vec<QuantEquation>,
    pub concl: QuantEquation,
}

impl Judgment {
    pub fn new(hyps: Vec<QuantEquation>, concl: QuantEquation) -> Self {
        Judgment { hyps, concl }
    }

    pub fn closed(concl: QuantEquation) -> Self {
        Judgment {
            hyps: Vec::new(),
            concl,
        }
    }

    pub fn has_hyp(&self, eq: &QuantEquation) -> bool {
        self.hyps.iter().any(|h| h.matches(eq))
    }

    /// Every hypothesis of `self` is among those of `other`.
    pub fn hyps_within(&self, other: &Judgment) -> bool {
        self.hyps.iter().all(|h| other.has_hyp(h))
    }

    pub fn matches(&self, other: &Judgment) -> bool {
        self.concl.matches(&other.concl) && self.hyps_within(other) && other.hyps_within(self)
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hyps: Vec<String> = self.hyps.iter().map(|h| h.to_string()).collect();
        if !hyps.is_empty() {
            write!(f, "{{{}}} ", hyps.join(", "))?;
        }
        write!(f, "⊢ {}", self.concl)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Assum,
    Refl,
    Symm,
    Triang,
    Max,
    Subst,
    Cut,
    B1,
    B2,
    SC,
    SA,
    Unfold,
    Unguard,
    Fix,
    Cong,
    Top,
    Pref,
    DPref,
    IB,
    Contract,
}

impl Rule {
    pub const ALL: [Rule; 20] = [
        Rule::Assum,
        Rule::Refl,
        Rule::Symm,
        Rule::Triang,
        Rule::Max,
        Rule::Subst,
        Rule::Cut,
        Rule::B1,
        Rule::B2,
        Rule::SC,
        Rule::SA,
        Rule::Unfold,
        Rule::Unguard,
        Rule::Fix,
        Rule::Cong,
        Rule::Top,
        Rule::Pref,
        Rule::DPref,
        Rule::IB,
        Rule::Contract,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Assum => "Assum",
            Rule::Refl => "Refl",
            Rule::Symm => "Symm",
            Rule::Triang => "Triang",
            Rule::Max => "Max",
            Rule::Subst => "Subst",
            Rule::Cut => "Cut",
            Rule::B1 => "B1",
            Rule::B2 => "B2",
            Rule::SC => "SC",
            Rule::SA => "SA",
            Rule::Unfold => "Unfold",
            Rule::Unguard => "Unguard",
            Rule::Fix => "Fix",
            Rule::Cong => "Cong",
            Rule::Top => "Top",
            Rule::Pref => "Pref",
            Rule::DPref => "dPref",
            Rule::IB => "IB",
            Rule::Contract => "Contract",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule-specific data carried by a step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    /// Substitution applied by `Subst`.
    pub subst: Option<std::collections::BTreeMap<crate::term::Name, Term>>,
    /// Recursion variable for `Fix`.
    pub name: Option<crate::term::Name>,
    /// Contraction coefficients for `Contract`.
    pub a: Option<Rational>,
    pub b: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub judgment: Judgment,
    /// `None` for rule names the checker does not know (always rejected).
    pub rule: Result<Rule, String>,
    /// Indices of earlier steps, 0-based.
    pub premises: Vec<usize>,
    pub witness: Witness,
}

impl ProofStep {
    pub fn new(rule: Rule, premises: Vec<usize>, judgment: Judgment) -> Self {
        ProofStep {
            judgment,
            rule: Ok(rule),
            premises,
            witness: Witness::default(),
        }
    }

    pub fn rule_name(&self) -> &str {
        match &self.rule {
            Ok(r) => r.name(),
            Err(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofScript {
    /// Discount λ for `dPref`; absent in undiscounted scripts.
    pub discount: Option<Rational>,
    pub goal: Judgment,
    pub steps: Vec<ProofStep>,
}
