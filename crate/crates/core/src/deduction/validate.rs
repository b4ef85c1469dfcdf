//! Semantic validation of judgments against the bisimilarity distance of
//! the reachable open Markov chains, reading free names as exits.

use num_traits::One;

use super::{Judgment, QuantEquation};
use crate::error::{Error, Result};
use crate::metric::{term_distance, DistanceOptions, TermDistance};
use crate::rational::Rational;
use crate::term::{alpha_eq, Term};

#[derive(Clone, Debug, PartialEq)]
pub enum Validation {
    Holds,
    /// The conclusion's distance is provably above its epsilon while every
    /// hypothesis holds.
    Fails(TermDistance<Rational>),
    /// The enclosure of the conclusion straddles its epsilon, or some
    /// hypothesis could not be decided.
    Undecided(TermDistance<Rational>),
}

impl Validation {
    pub fn holds(&self) -> bool {
        matches!(self, Validation::Holds)
    }
}

/// Distance in the initial model of the deduction system, which coincides
/// with the distance between the reachable chains of the two terms.
pub fn free_model_distance(t: &Term, s: &Term, opts: &DistanceOptions) -> Result<TermDistance<Rational>> {
    term_distance(t, s, opts)
}

enum Verdict {
    Yes,
    No(TermDistance<Rational>),
    Unknown(TermDistance<Rational>),
}

fn decide(eq: &QuantEquation, opts: &DistanceOptions) -> Result<Verdict> {
    let eps = eq
        .eps
        .as_closed()
        .ok_or_else(|| Error::NotCheckable(format!("epsilon {} depends on eps", eq.eps)))?;
    if *eps >= Rational::one() || alpha_eq(&eq.left, &eq.right) {
        return Ok(Verdict::Yes);
    }
    let d = free_model_distance(&eq.left, &eq.right, opts)?;
    Ok(if d.upper <= *eps {
        Verdict::Yes
    } else if d.lower > *eps {
        Verdict::No(d)
    } else {
        Verdict::Unknown(d)
    })
}

/// Checks `Γ ⊢ φ` in the chain model: if every hypothesis holds then so
/// must the conclusion. A refuted hypothesis makes the judgment hold.
///
/// `opts.discount` selects the discounted distance; a discount of 1 is the
/// undiscounted one.
pub fn semantic_validate(j: &Judgment, opts: &DistanceOptions) -> Result<Validation> {
    let mut opts = opts.clone();
    if opts.discount.as_ref().is_some_and(|l| l.is_one()) {
        opts.discount = None;
    }
    let mut pending = None;
    for h in &j.hyps {
        match decide(h, &opts)? {
            Verdict::Yes => {}
            Verdict::No(_) => return Ok(Validation::Holds),
            Verdict::Unknown(d) => pending = Some(d),
        }
    }
    Ok(match decide(&j.concl, &opts)? {
        Verdict::Yes => Validation::Holds,
        Verdict::No(d) => match pending {
            Some(_) => Validation::Undecided(d),
            None => Validation::Fails(d),
        },
        Verdict::Unknown(d) => Validation::Undecided(d),
    })
}
