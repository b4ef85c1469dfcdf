//! Ready-made derivations: the distance between `rec X.(a.X +[1/2] Z)` and
//! `rec Y.(a.Y +[1/3] Z)`, and the entropic and distributive identities of
//! barycentric algebras.

use num_traits::{One, Zero};

use super::{Epsilon, ProofScript, QuantEquation, ScriptBuilder, StepViolation};
use crate::rational::{rat, Rational};
use crate::term::{Label, Name, Term};

/// `(rec X.(a.X +[1/2] Z), rec Y.(a.Y +[1/3] Z))`.
pub fn worked_terms() -> (Term, Term) {
    (
        Term::parse("rec X. (a.X +[1/2] Z)").expect("valid term"),
        Term::parse("rec Y. (a.Y +[1/3] Z)").expect("valid term"),
    )
}

struct Rearranged {
    /// `t ≡0 a.t +[1/6] (a.t +[2/5] Z)`
    left: usize,
    /// `Z +[1/6] (a.s +[2/5] Z) ≡0 s`
    right: usize,
    refl_z: usize,
    /// `a.t ≡1 Z`
    top: usize,
}

fn rearrange(b: &mut ScriptBuilder, t: &Term, s: &Term) -> Result<Rearranged, StepViolation> {
    let a = Label::new("a").expect("valid label");
    let z = Term::name(&Name::new("Z").expect("valid name"));
    let at = Term::prefix(&a, t.clone());
    let as_ = Term::prefix(&a, s.clone());
    let ch = |l: &Term, e: Rational, r: &Term| Term::choice(l.clone(), e, r.clone()).expect("weight in range");

    let unfold_t = b.unfold(t)?;
    let unfold_s = b.unfold(s)?;

    let split = b.b2(&at, rat(1, 3))?;
    let split = b.symm(split)?;
    let refl_z = b.refl(&z)?;
    let lifted = b.ib(split, refl_z, rat(1, 2))?;
    let assoc = b.sa(&ch(&ch(&at, rat(1, 3), &at), rat(1, 2), &z))?;
    let left = b.chain(&[unfold_t, lifted, assoc])?;

    let swap = b.sc(&ch(&as_, rat(1, 3), &z))?;
    let split = b.b2(&z, rat(1, 4))?;
    let split = b.symm(split)?;
    let refl_as = b.refl(&as_)?;
    let lifted = b.ib(split, refl_as, rat(2, 3))?;
    let assoc = b.sa(&ch(&ch(&z, rat(1, 4), &z), rat(2, 3), &as_))?;
    let swap_inner = b.sc(&ch(&z, rat(3, 5), &as_))?;
    let inner = b.ib(refl_z, swap_inner, rat(1, 6))?;
    let s_chain = b.chain(&[unfold_s, swap, lifted, assoc, inner])?;

    let top = b.top(&at, &z)?;
    let right = b.symm(s_chain)?;
    Ok(Rearranged {
        left,
        right,
        refl_z,
        top,
    })
}

/// One round of the estimate: from `t ≡c s` (step `bound`) derive
/// `t ≡[c/3 + 1/6] s`, or `t ≡[λc/3 + 1/6] s` when discounted.
fn round(b: &mut ScriptBuilder, r: &Rearranged, bound: usize, discounted: bool) -> Result<usize, StepViolation> {
    let a = Label::new("a").expect("valid label");
    let pref = if discounted {
        b.dpref(bound, &a)?
    } else {
        b.pref(bound, &a)?
    };
    let tail = b.ib(pref, r.refl_z, rat(2, 5))?;
    let mixed = b.ib(r.top, tail, rat(1, 6))?;
    let half = b.triang(r.left, mixed)?;
    b.triang(half, r.right)
}

fn contraction_script(mut b: ScriptBuilder, discounted: bool) -> Result<ProofScript, StepViolation> {
    let (t, s) = worked_terms();
    let r = rearrange(&mut b, &t, &s)?;
    let hyp = b.assume(QuantEquation::new(t.clone(), s.clone(), Epsilon::var()))?;
    let schema = round(&mut b, &r, hyp, discounted)?;
    let top = b.top(&t, &s)?;
    b.contract(schema, top)?;
    Ok(b.finish())
}

/// `⊢ t ≡[1/4] s` through the contraction rule with `a = 1/3`, `b = 1/6`.
pub fn worked_example() -> ProofScript {
    contraction_script(ScriptBuilder::new(), false).expect("the worked derivation checks")
}

/// The discounted variant: `⊢ t ≡[(1/6)/(1 - λ/3)] s` using `dPref`.
pub fn worked_example_discounted(lambda: Rational) -> Result<ProofScript, StepViolation> {
    contraction_script(ScriptBuilder::discounted(lambda), true)
}

/// `⊢ t ≡[1/4 + γ] s` without the contraction rule: the estimate is unrolled
/// from `⊢ t ≡1 s` until it drops to `1/4 + γ`, then widened by `Max`.
/// Returns the script and the number of rounds. Requires `γ > 0`.
pub fn worked_example_unrolled(gamma: &Rational) -> Result<(ProofScript, usize), StepViolation> {
    let mut b = ScriptBuilder::new();
    let (t, s) = worked_terms();
    let r = rearrange(&mut b, &t, &s)?;
    let target = rat(1, 4) + gamma;
    let mut bound = b.top(&t, &s)?;
    let mut rounds = 0;
    while b.concl(bound).eps.constant > target {
        bound = round(&mut b, &r, bound, false)?;
        rounds += 1;
    }
    if b.concl(bound).eps.constant < target {
        b.max(bound, Epsilon::constant(target))?;
    }
    Ok((b.finish(), rounds))
}

/// Proves `(t +[e] s) +[d] (t' +[e] s') ≡0 (t +[d] t') +[e] (s +[d] s')` for
/// `e, d` strictly between 0 and 1 and returns the final step.
pub fn entropic_in(
    b: &mut ScriptBuilder,
    [t, s, t2, s2]: [&Term; 4],
    e: &Rational,
    d: &Rational,
) -> Result<usize, StepViolation> {
    let zero = Rational::zero();
    let one = Rational::one();
    if !(e > &zero && e < &one && d > &zero && d < &one) {
        return Err(StepViolation {
            step: Some(b.len()),
            rule: "SA".into(),
            message: "weights must lie strictly between 0 and 1".into(),
        });
    }
    let ch = |l: &Term, w: &Rational, r: &Term| Term::choice(l.clone(), w.clone(), r.clone()).expect("weight in range");
    let lhs = ch(&ch(t, e, s), d, &ch(t2, e, s2));
    let rhs = ch(&ch(t, d, t2), e, &ch(s, d, s2));

    let assoc_l = b.sa(&lhs)?;
    let assoc_r = b.sa(&rhs)?;
    let Term::Choice(_, ed, inner) = b.concl(assoc_l).right.clone() else {
        unreachable!("SA yields a choice")
    };
    let Term::Choice(_, _, target) = b.concl(assoc_r).right.clone() else {
        unreachable!("SA yields a choice")
    };
    let Term::Choice(_, g, _) = &*target else {
        unreachable!("SA yields a nested choice")
    };

    let swap = b.sc(&inner)?;
    let assoc = b.sa(&b.concl(swap).right.clone())?;
    let Term::Choice(_, _, tail) = b.concl(assoc).right.clone() else {
        unreachable!("SA yields a choice")
    };
    let swap_tail = b.sc(&tail)?;
    let refl_t2 = b.refl(t2)?;
    let lifted = b.ib(refl_t2, swap_tail, g.clone())?;
    let inner_eq = b.chain(&[swap, assoc, lifted])?;
    let refl_t = b.refl(t)?;
    let outer = b.ib(refl_t, inner_eq, ed)?;
    let back = b.symm(assoc_r)?;
    b.chain(&[assoc_l, outer, back])
}

/// Proves `u +[d] (t' +[e] s') ≡0 (u +[d] t') +[e] (u +[d] s')`.
pub fn distributive_in(
    b: &mut ScriptBuilder,
    [u, t2, s2]: [&Term; 3],
    e: &Rational,
    d: &Rational,
) -> Result<usize, StepViolation> {
    let inner = Term::choice(t2.clone(), e.clone(), s2.clone()).expect("weight in range");
    let split = b.b2(u, e.clone())?;
    let split = b.symm(split)?;
    let refl = b.refl(&inner)?;
    let lifted = b.ib(split, refl, d.clone())?;
    let entr = entropic_in(b, [u, u, t2, s2], e, d)?;
    b.triang(lifted, entr)
}

fn names<const N: usize>(ns: [&str; N]) -> [Term; N] {
    ns.map(|n| Term::name(&Name::new(n).expect("valid name")))
}

pub fn entropic(e: &Rational, d: &Rational) -> Result<ProofScript, StepViolation> {
    let [t, s, t2, s2] = names(["T", "S", "U", "V"]);
    let mut b = ScriptBuilder::new();
    entropic_in(&mut b, [&t, &s, &t2, &s2], e, d)?;
    Ok(b.finish())
}

pub fn distributive(e: &Rational, d: &Rational) -> Result<ProofScript, StepViolation> {
    let [u, t2, s2] = names(["U", "T", "S"]);
    let mut b = ScriptBuilder::new();
    distributive_in(&mut b, [&u, &t2, &s2], e, d)?;
    Ok(b.finish())
}
