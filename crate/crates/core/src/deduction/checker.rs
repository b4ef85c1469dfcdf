//! Step-by-step verification of proof scripts.

use std::fmt;

use num_traits::{One, Zero};

use super::{Epsilon, Judgment, ProofScript, ProofStep, QuantEquation, Rule};
use crate::rational::{format_rational, Rational};
use crate::term::{alpha_eq, is_guarded, substitute, substitute_one, Term};

/// The first failed side condition of a script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepViolation {
    /// Offending step, or `None` when the goal itself is unproven.
    pub step: Option<usize>,
    pub rule: String,
    pub message: String,
}

impl fmt::Display for StepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {i} ({}): {}", self.rule, self.message),
            None => write!(f, "goal: {}", self.message),
        }
    }
}

impl std::error::Error for StepViolation {}

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same(t: &Term, s: &Term, what: &str) -> Check {
    ensure(alpha_eq(t, s), || format!("{what}: expected {t}, found {s}"))
}

fn eps_is(eq: &QuantEquation, want: &Epsilon) -> Check {
    ensure(eq.eps == *want, || format!("epsilon must be {want}, found {}", eq.eps))
}

fn choice(t: &Term, what: &str) -> std::result::Result<(Term, Rational, Term), String> {
    match t {
        Term::Choice(l, e, r) => Ok(((**l).clone(), e.clone(), (**r).clone())),
        _ => Err(format!("{what} must be a choice, found {t}")),
    }
}

fn arity(step: &ProofStep, n: usize) -> Check {
    ensure(step.premises.len() == n, || {
        format!("expects {n} premise(s), found {}", step.premises.len())
    })
}

/// Every hypothesis of a premise must be available in the conclusion.
fn inherits(step: &ProofStep, premises: &[&Judgment]) -> Check {
    for (k, p) in premises.iter().enumerate() {
        if let Some(h) = p.hyps.iter().find(|h| !step.judgment.has_hyp(h)) {
            return Err(format!(
                "hypothesis {h} of premise {} is missing from the conclusion",
                step.premises[k]
            ));
        }
    }
    Ok(())
}

/// Verifies one step against the judgments established before it.
pub fn check_step(
    index: usize,
    step: &ProofStep,
    earlier: &[Judgment],
    discount: Option<&Rational>,
) -> Result<(), StepViolation> {
    let fail = |message: String| StepViolation {
        step: Some(index),
        rule: step.rule_name().to_string(),
        message,
    };
    let rule = step
        .rule
        .clone()
        .map_err(|name| fail(format!("unknown rule {name:?}")))?;
    for p in &step.premises {
        if *p >= earlier.len() {
            return Err(fail(format!("premise {p} does not refer to an earlier step")));
        }
    }
    let j = &step.judgment;
    for eq in j.hyps.iter().chain(std::iter::once(&j.concl)) {
        if !eq.eps.is_nonnegative() {
            return Err(fail(format!("negative epsilon {}", eq.eps)));
        }
    }
    let premises: Vec<&Judgment> = step.premises.iter().map(|&p| &earlier[p]).collect();
    let result = match rule {
        Rule::Subst | Rule::Cut | Rule::Contract => Ok(()),
        _ => inherits(step, &premises),
    }
    .and_then(|()| check_rule(rule, step, &premises, discount));
    result.map_err(fail)
}

fn check_rule(rule: Rule, step: &ProofStep, p: &[&Judgment], discount: Option<&Rational>) -> Check {
    let c = &step.judgment.concl;
    let zero = Epsilon::zero();
    match rule {
        Rule::Assum => {
            arity(step, 0)?;
            ensure(step.judgment.has_hyp(c), || format!("{c} is not among the hypotheses"))
        }
        Rule::Refl => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            same(&c.left, &c.right, "right side")
        }
        Rule::Symm => {
            arity(step, 1)?;
            let q = &p[0].concl;
            eps_is(c, &q.eps)?;
            same(&q.right, &c.left, "left side")?;
            same(&q.left, &c.right, "right side")
        }
        Rule::Triang => {
            arity(step, 2)?;
            let (q1, q2) = (&p[0].concl, &p[1].concl);
            same(&q1.left, &c.left, "left side")?;
            same(&q1.right, &q2.left, "middle term")?;
            same(&q2.right, &c.right, "right side")?;
            eps_is(c, &q1.eps.add(&q2.eps))
        }
        Rule::Max => {
            arity(step, 1)?;
            let q = &p[0].concl;
            same(&q.left, &c.left, "left side")?;
            same(&q.right, &c.right, "right side")?;
            ensure(c.eps.strictly_dominates(&q.eps), || {
                format!("epsilon {} is not strictly larger than {}", c.eps, q.eps)
            })
        }
        Rule::Subst => {
            arity(step, 1)?;
            let sigma = step.witness.subst.as_ref().ok_or("missing substitution witness")?;
            let apply = |eq: &QuantEquation| {
                QuantEquation::new(
                    substitute(&eq.left, sigma),
                    substitute(&eq.right, sigma),
                    eq.eps.clone(),
                )
            };
            let want = apply(&p[0].concl);
            ensure(want.matches(c), || format!("substituted conclusion is {want}"))?;
            for h in &p[0].hyps {
                let h = apply(h);
                ensure(step.judgment.has_hyp(&h), || {
                    format!("substituted hypothesis {h} is missing")
                })?;
            }
            Ok(())
        }
        Rule::Cut => {
            ensure(!step.premises.is_empty(), || "expects at least one premise".into())?;
            let main = p[0];
            ensure(main.concl.matches(c), || format!("premise concludes {}", main.concl))?;
            for theta in &main.hyps {
                let proved = step.judgment.has_hyp(theta) || p[1..].iter().any(|q| q.concl.matches(theta));
                ensure(proved, || format!("hypothesis {theta} is neither proved nor assumed"))?;
            }
            for (k, q) in p.iter().enumerate().skip(1) {
                if let Some(h) = q.hyps.iter().find(|h| !step.judgment.has_hyp(h)) {
                    return Err(format!(
                        "hypothesis {h} of premise {} is missing from the conclusion",
                        step.premises[k]
                    ));
                }
            }
            Ok(())
        }
        Rule::B1 => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            let (l, e, _) = choice(&c.left, "left side")?;
            ensure(e.is_one(), || {
                format!("weight must be 1, found {}", format_rational(&e))
            })?;
            same(&l, &c.right, "right side")
        }
        Rule::B2 => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            let (l, _, r) = choice(&c.left, "left side")?;
            same(&l, &r, "right operand")?;
            same(&l, &c.right, "right side")
        }
        Rule::SC => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            let (t, e, s) = choice(&c.left, "left side")?;
            let (s2, e2, t2) = choice(&c.right, "right side")?;
            same(&t, &t2, "right operand of the right side")?;
            same(&s, &s2, "left operand of the right side")?;
            let want = Rational::one() - &e;
            ensure(e2 == want, || {
                format!(
                    "weight must be {}, found {}",
                    format_rational(&want),
                    format_rational(&e2)
                )
            })
        }
        Rule::SA => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            let (ts, e1, u) = choice(&c.left, "left side")?;
            let (t, e, s) = choice(&ts, "left operand of the left side")?;
            let (t2, w1, su) = choice(&c.right, "right side")?;
            let (s2, w2, u2) = choice(&su, "right operand of the right side")?;
            ensure(e < Rational::one() && e1 < Rational::one(), || {
                format!(
                    "weights {} and {} must lie in [0,1)",
                    format_rational(&e),
                    format_rational(&e1)
                )
            })?;
            same(&t, &t2, "first summand")?;
            same(&s, &s2, "second summand")?;
            same(&u, &u2, "third summand")?;
            let ee = &e * &e1;
            let f = (&e1 - &ee) / (Rational::one() - &ee);
            ensure(w1 == ee && w2 == f, || {
                format!(
                    "weights must be {} and {}, found {} and {}",
                    format_rational(&ee),
                    format_rational(&f),
                    format_rational(&w1),
                    format_rational(&w2)
                )
            })
        }
        Rule::Unfold => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            let Term::Rec(x, body) = &c.left else {
                return Err(format!("left side must be a recursion, found {}", c.left));
            };
            same(&substitute_one(body, x, &c.left), &c.right, "right side")
        }
        Rule::Unguard => {
            arity(step, 0)?;
            eps_is(c, &zero)?;
            let (Term::Rec(x, body), Term::Rec(y, rbody)) = (&c.left, &c.right) else {
                return Err("both sides must be recursions".into());
            };
            let (t, e, last) = choice(body, "left body")?;
            ensure(last == Term::Name(x.clone()), || {
                format!("right operand must be {x}, found {last}")
            })?;
            ensure(!e.is_zero(), || "weight must be positive".into())?;
            same(&Term::rec(x, t), &Term::rec(y, (**rbody).clone()), "right side")
        }
        Rule::Fix => {
            arity(step, 1)?;
            eps_is(c, &zero)?;
            let Term::Rec(x, t) = &c.right else {
                return Err(format!("right side must be a recursion, found {}", c.right));
            };
            if let Some(w) = &step.witness.name {
                ensure(w == x, || format!("witness name {w} differs from the binder {x}"))?;
            }
            ensure(is_guarded(x, t), || format!("{x} is not guarded in {t}"))?;
            let q = &p[0].concl;
            eps_is(q, &zero)?;
            same(&q.left, &c.left, "premise left side")?;
            same(&substitute_one(t, x, &c.left), &q.right, "premise right side")
        }
        Rule::Cong => {
            arity(step, 1)?;
            eps_is(c, &zero)?;
            let (Term::Rec(x, t), Term::Rec(y, s)) = (&c.left, &c.right) else {
                return Err("both sides must be recursions".into());
            };
            let s = if x == y {
                (**s).clone()
            } else {
                ensure(!s.has_free(x), || format!("{x} occurs free in the right body"))?;
                substitute_one(s, y, &Term::name(x))
            };
            let q = &p[0].concl;
            eps_is(q, &zero)?;
            same(t, &q.left, "premise left side")?;
            same(&s, &q.right, "premise right side")?;
            let captured = p[0].hyps.iter().find(|h| h.left.has_free(x) || h.right.has_free(x));
            ensure(captured.is_none(), || {
                format!("{x} occurs free in a premise hypothesis")
            })
        }
        Rule::Top => {
            arity(step, 0)?;
            eps_is(c, &Epsilon::one())
        }
        Rule::Pref | Rule::DPref => {
            arity(step, 1)?;
            let (Term::Prefix(a, t), Term::Prefix(b, s)) = (&c.left, &c.right) else {
                return Err("both sides must be prefixes".into());
            };
            ensure(a == b, || format!("labels {a} and {b} differ"))?;
            let q = &p[0].concl;
            same(&q.left, t, "premise left side")?;
            same(&q.right, s, "premise right side")?;
            if rule == Rule::Pref {
                return eps_is(c, &q.eps);
            }
            let lambda = discount.ok_or("dPref needs a discount header")?;
            let bound = q.eps.scale(lambda);
            ensure(c.eps.dominates(&bound), || {
                format!("epsilon {} is below {bound}", c.eps)
            })
        }
        Rule::IB => {
            arity(step, 2)?;
            let (t, e, t2) = choice(&c.left, "left side")?;
            let (s, e2, s2) = choice(&c.right, "right side")?;
            ensure(e == e2, || {
                format!("weights {} and {} differ", format_rational(&e), format_rational(&e2))
            })?;
            let (q1, q2) = (&p[0].concl, &p[1].concl);
            same(&q1.left, &t, "first premise left side")?;
            same(&q1.right, &s, "first premise right side")?;
            same(&q2.left, &t2, "second premise left side")?;
            same(&q2.right, &s2, "second premise right side")?;
            let bound = q1.eps.scale(&e).add(&q2.eps.scale(&(Rational::one() - &e)));
            ensure(c.eps.dominates(&bound), || {
                format!("epsilon {} is below {bound}", c.eps)
            })
        }
        Rule::Contract => contract(step, p),
    }
}

fn contract(step: &ProofStep, p: &[&Judgment]) -> Check {
    arity(step, 2)?;
    let (schema, top) = (p[0], p[1]);
    let c = &step.judgment.concl;
    let sc = &schema.concl;
    same(&sc.left, &c.left, "schema left side")?;
    same(&sc.right, &c.right, "schema right side")?;
    let parametric = QuantEquation::new(sc.left.clone(), sc.right.clone(), Epsilon::var());
    ensure(schema.has_hyp(&parametric), || {
        format!("schema lacks the hypothesis {parametric}")
    })?;
    let rest: Vec<&QuantEquation> = schema.hyps.iter().filter(|h| !h.matches(&parametric)).collect();
    if let Some(h) = rest.iter().find(|h| !h.eps.is_closed()) {
        return Err(format!("other schema hypothesis {h} must not depend on eps"));
    }
    let (a, b) = (&sc.eps.coef, &sc.eps.constant);
    ensure(*a < Rational::one(), || {
        format!("coefficient a = {} must be below 1", format_rational(a))
    })?;
    if let Some(wa) = &step.witness.a {
        ensure(wa == a, || {
            format!(
                "witness a = {} but the schema has {}",
                format_rational(wa),
                format_rational(a)
            )
        })?;
    }
    if let Some(wb) = &step.witness.b {
        ensure(wb == b, || {
            format!(
                "witness b = {} but the schema has {}",
                format_rational(wb),
                format_rational(b)
            )
        })?;
    }
    same(&top.concl.left, &c.left, "start left side")?;
    same(&top.concl.right, &c.right, "start right side")?;
    ensure(top.concl.eps.is_closed(), || {
        format!("start bound {} must be closed", top.concl.eps)
    })?;
    let want = Epsilon::constant(b / (Rational::one() - a));
    eps_is(c, &want)?;
    for h in rest.into_iter().chain(top.hyps.iter()) {
        ensure(step.judgment.has_hyp(h), || {
            format!("hypothesis {h} is missing from the conclusion")
        })?;
    }
    Ok(())
}

/// Checks a single application of the contraction rule in isolation.
pub fn check_contract_rule(step: &ProofStep, earlier: &[Judgment]) -> Result<(), StepViolation> {
    if step.rule != Ok(Rule::Contract) {
        return Err(StepViolation {
            step: None,
            rule: step.rule_name().to_string(),
            message: "not a contraction step".into(),
        });
    }
    check_step(earlier.len(), step, earlier, None)
}

/// Checks every step in order, then that the last one establishes the goal.
pub fn check_proof(script: &ProofScript) -> Result<(), StepViolation> {
    if let Some(d) = &script.discount {
        if !(d > &Rational::zero() && d <= &Rational::one()) {
            return Err(StepViolation {
                step: None,
                rule: "header".into(),
                message: format!("discount {} outside (0,1]", format_rational(d)),
            });
        }
    }
    let mut earlier = Vec::with_capacity(script.steps.len());
    for (i, step) in script.steps.iter().enumerate() {
        check_step(i, step, &earlier, script.discount.as_ref())?;
        earlier.push(step.judgment.clone());
    }
    let goal_fail = |message: String| StepViolation {
        step: None,
        rule: "goal".into(),
        message,
    };
    let last = earlier
        .last()
        .ok_or_else(|| goal_fail("the script has no steps".into()))?;
    if !last.concl.matches(&script.goal.concl) {
        return Err(goal_fail(format!(
            "last step proves {}, not {}",
            last.concl, script.goal.concl
        )));
    }
    if !last.hyps_within(&script.goal) {
        return Err(goal_fail("last step relies on hypotheses outside the goal".into()));
    }
    Ok(())
}
