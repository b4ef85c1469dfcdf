//! Programmatic construction of proof scripts. Every method computes the
//! conclusion its rule licenses, appends the step, and checks it on the spot.

use std::collections::BTreeMap;

use num_traits::One;

use super::checker::{check_step, StepViolation};
use super::{Epsilon, Judgment, ProofScript, ProofStep, QuantEquation, Rule, Witness};
use crate::rational::Rational;
use crate::term::{substitute, substitute_one, Label, Name, Term};

type Built = Result<usize, StepViolation>;

#[derive(Clone, Debug, Default)]
pub struct ScriptBuilder {
    discount: Option<Rational>,
    steps: Vec<ProofStep>,
}

fn union(parts: &[&[QuantEquation]]) -> Vec<QuantEquation> {
    let mut out: Vec<QuantEquation> = Vec::new();
    for part in parts {
        for h in *part {
            if !out.iter().any(|o| o.matches(h)) {
                out.push(h.clone());
            }
        }
    }
    out
}

fn choice_ok(l: Term, e: Rational, r: Term) -> Term {
    Term::Choice(Box::new(l), e, Box::new(r))
}

impl ScriptBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn discounted(lambda: Rational) -> Self {
        ScriptBuilder {
            discount: Some(lambda),
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn judgment(&self, i: usize) -> &Judgment {
        &self.steps[i].judgment
    }

    pub fn concl(&self, i: usize) -> &QuantEquation {
        &self.steps[i].judgment.concl
    }

    /// Appends an arbitrary step and checks it.
    pub fn push(&mut self, step: ProofStep) -> Built {
        let earlier: Vec<Judgment> = self.steps.iter().map(|s| s.judgment.clone()).collect();
        check_step(self.steps.len(), &step, &earlier, self.discount.as_ref())?;
        self.steps.push(step);
        Ok(self.steps.len() - 1)
    }

    fn derive(&mut self, rule: Rule, premises: Vec<usize>, concl: QuantEquation, witness: Witness) -> Built {
        let parts: Vec<&[QuantEquation]> = premises
            .iter()
            .filter_map(|&p| self.steps.get(p).map(|s| s.judgment.hyps.as_slice()))
            .collect();
        let hyps = union(&parts);
        self.push(ProofStep {
            judgment: Judgment::new(hyps, concl),
            rule: Ok(rule),
            premises,
            witness,
        })
    }

    fn axiom(&mut self, rule: Rule, left: Term, right: Term, eps: Epsilon) -> Built {
        self.derive(rule, vec![], QuantEquation::new(left, right, eps), Witness::default())
    }

    fn bad(&self, rule: Rule, message: impl Into<String>) -> StepViolation {
        StepViolation {
            step: Some(self.steps.len()),
            rule: rule.name().to_string(),
            message: message.into(),
        }
    }

    fn premise(&self, rule: Rule, p: usize) -> Result<&QuantEquation, StepViolation> {
        self.steps
            .get(p)
            .map(|s| &s.judgment.concl)
            .ok_or_else(|| self.bad(rule, format!("premise {p} does not refer to an earlier step")))
    }

    pub fn assume(&mut self, eq: QuantEquation) -> Built {
        self.push(ProofStep::new(Rule::Assum, vec![], Judgment::new(vec![eq.clone()], eq)))
    }

    pub fn refl(&mut self, t: &Term) -> Built {
        self.axiom(Rule::Refl, t.clone(), t.clone(), Epsilon::zero())
    }

    pub fn symm(&mut self, p: usize) -> Built {
        let q = self.premise(Rule::Symm, p)?.clone();
        self.derive(
            Rule::Symm,
            vec![p],
            QuantEquation::new(q.right, q.left, q.eps),
            Witness::default(),
        )
    }

    pub fn triang(&mut self, p: usize, q: usize) -> Built {
        let a = self.premise(Rule::Triang, p)?.clone();
        let b = self.premise(Rule::Triang, q)?.clone();
        let eq = QuantEquation::new(a.left, b.right, a.eps.add(&b.eps));
        self.derive(Rule::Triang, vec![p, q], eq, Witness::default())
    }

    /// Folds `Triang` over a sequence of steps.
    pub fn chain(&mut self, steps: &[usize]) -> Built {
        let (&first, rest) = steps
            .split_first()
            .ok_or_else(|| self.bad(Rule::Triang, "empty chain"))?;
        rest.iter().try_fold(first, |acc, &s| self.triang(acc, s))
    }

    pub fn max(&mut self, p: usize, eps: Epsilon) -> Built {
        let q = self.premise(Rule::Max, p)?.clone();
        self.derive(
            Rule::Max,
            vec![p],
            QuantEquation::new(q.left, q.right, eps),
            Witness::default(),
        )
    }

    pub fn subst(&mut self, p: usize, sigma: BTreeMap<Name, Term>) -> Built {
        let j = self
            .steps
            .get(p)
            .map(|s| s.judgment.clone())
            .ok_or_else(|| self.bad(Rule::Subst, "missing premise"))?;
        let apply = |eq: &QuantEquation| {
            QuantEquation::new(
                substitute(&eq.left, &sigma),
                substitute(&eq.right, &sigma),
                eq.eps.clone(),
            )
        };
        let hyps = j.hyps.iter().map(apply).collect();
        let concl = apply(&j.concl);
        self.push(ProofStep {
            judgment: Judgment::new(hyps, concl),
            rule: Ok(Rule::Subst),
            premises: vec![p],
            witness: Witness {
                subst: Some(sigma),
                ..Witness::default()
            },
        })
    }

    /// Discharges the hypotheses of `main` that the `proofs` establish.
    pub fn cut(&mut self, main: usize, proofs: &[usize]) -> Built {
        let j = self
            .steps
            .get(main)
            .map(|s| s.judgment.clone())
            .ok_or_else(|| self.bad(Rule::Cut, "missing premise"))?;
        let proved: Vec<QuantEquation> = proofs
            .iter()
            .filter_map(|&p| self.steps.get(p))
            .map(|s| s.judgment.concl.clone())
            .collect();
        let open: Vec<QuantEquation> = j
            .hyps
            .iter()
            .filter(|h| !proved.iter().any(|p| p.matches(h)))
            .cloned()
            .collect();
        let mut parts: Vec<&[QuantEquation]> = vec![&open];
        for &p in proofs {
            if let Some(s) = self.steps.get(p) {
                parts.push(&s.judgment.hyps);
            }
        }
        let hyps = union(&parts);
        let mut premises = vec![main];
        premises.extend_from_slice(proofs);
        self.push(ProofStep {
            judgment: Judgment::new(hyps, j.concl),
            rule: Ok(Rule::Cut),
            premises,
            witness: Witness::default(),
        })
    }

    /// `t +[1] s ≡0 t`.
    pub fn b1(&mut self, t: &Term, s: &Term) -> Built {
        self.axiom(
            Rule::B1,
            choice_ok(t.clone(), Rational::one(), s.clone()),
            t.clone(),
            Epsilon::zero(),
        )
    }

    /// `t +[e] t ≡0 t`.
    pub fn b2(&mut self, t: &Term, e: Rational) -> Built {
        self.axiom(Rule::B2, choice_ok(t.clone(), e, t.clone()), t.clone(), Epsilon::zero())
    }

    /// `t +[e] s ≡0 s +[1-e] t` for the choice `lhs`.
    pub fn sc(&mut self, lhs: &Term) -> Built {
        let Term::Choice(t, e, s) = lhs else {
            return Err(self.bad(Rule::SC, format!("{lhs} is not a choice")));
        };
        let rhs = choice_ok((**s).clone(), Rational::one() - e, (**t).clone());
        self.axiom(Rule::SC, lhs.clone(), rhs, Epsilon::zero())
    }

    /// `(t +[e] s) +[e'] u ≡0 t +[ee'] (s +[(e'-ee')/(1-ee')] u)` for `lhs`.
    pub fn sa(&mut self, lhs: &Term) -> Built {
        let Term::Choice(ts, e1, u) = lhs else {
            return Err(self.bad(Rule::SA, format!("{lhs} is not a choice")));
        };
        let Term::Choice(t, e, s) = &**ts else {
            return Err(self.bad(Rule::SA, format!("{ts} is not a choice")));
        };
        let ee = e * e1;
        if ee.is_one() {
            return Err(self.bad(Rule::SA, "weights must lie in [0,1)"));
        }
        let f = (e1 - &ee) / (Rational::one() - &ee);
        let rhs = choice_ok((**t).clone(), ee, choice_ok((**s).clone(), f, (**u).clone()));
        self.axiom(Rule::SA, lhs.clone(), rhs, Epsilon::zero())
    }

    /// `rec X.t ≡0 t[rec X.t / X]`.
    pub fn unfold(&mut self, r: &Term) -> Built {
        let Term::Rec(x, body) = r else {
            return Err(self.bad(Rule::Unfold, format!("{r} is not a recursion")));
        };
        self.axiom(Rule::Unfold, r.clone(), substitute_one(body, x, r), Epsilon::zero())
    }

    /// `rec X.(t +[e] X) ≡0 rec X.t`.
    pub fn unguard(&mut self, x: &Name, t: &Term, e: Rational) -> Built {
        let lhs = Term::rec(x, choice_ok(t.clone(), e, Term::name(x)));
        self.axiom(Rule::Unguard, lhs, Term::rec(x, t.clone()), Epsilon::zero())
    }

    /// From `s ≡0 t[s/X]` conclude `s ≡0 rec X.t`.
    pub fn fix(&mut self, p: usize, x: &Name, t: &Term) -> Built {
        let q = self.premise(Rule::Fix, p)?.clone();
        let eq = QuantEquation::new(q.left, Term::rec(x, t.clone()), Epsilon::zero());
        let w = Witness {
            name: Some(x.clone()),
            ..Witness::default()
        };
        self.derive(Rule::Fix, vec![p], eq, w)
    }

    /// From `t ≡0 s` conclude `rec X.t ≡0 rec X.s`.
    pub fn cong(&mut self, p: usize, x: &Name) -> Built {
        let q = self.premise(Rule::Cong, p)?.clone();
        let eq = QuantEquation::new(Term::rec(x, q.left), Term::rec(x, q.right), Epsilon::zero());
        self.derive(Rule::Cong, vec![p], eq, Witness::default())
    }

    pub fn top(&mut self, t: &Term, s: &Term) -> Built {
        self.axiom(Rule::Top, t.clone(), s.clone(), Epsilon::one())
    }

    pub fn pref(&mut self, p: usize, a: &Label) -> Built {
        let q = self.premise(Rule::Pref, p)?.clone();
        let eq = QuantEquation::new(Term::prefix(a, q.left), Term::prefix(a, q.right), q.eps);
        self.derive(Rule::Pref, vec![p], eq, Witness::default())
    }

    /// Like [`pref`](Self::pref) with the error scaled by the discount.
    pub fn dpref(&mut self, p: usize, a: &Label) -> Built {
        let q = self.premise(Rule::DPref, p)?.clone();
        let lambda = self
            .discount
            .clone()
            .ok_or_else(|| self.bad(Rule::DPref, "no discount configured"))?;
        let eq = QuantEquation::new(Term::prefix(a, q.left), Term::prefix(a, q.right), q.eps.scale(&lambda));
        self.derive(Rule::DPref, vec![p], eq, Witness::default())
    }

    /// Combines `t ≡ε s` and `t' ≡ε' s'` into `t +[e] t' ≡ s +[e] s'` at the
    /// tightest admissible error.
    pub fn ib(&mut self, p: usize, q: usize, e: Rational) -> Built {
        let a = self.premise(Rule::IB, p)?.clone();
        let b = self.premise(Rule::IB, q)?.clone();
        let eps = a.eps.scale(&e).add(&b.eps.scale(&(Rational::one() - &e)));
        let eq = QuantEquation::new(
            choice_ok(a.left, e.clone(), b.left),
            choice_ok(a.right, e, b.right),
            eps,
        );
        self.derive(Rule::IB, vec![p, q], eq, Witness::default())
    }

    /// Closes a parametric schema `{t ≡ eps s} ⊢ t ≡[a·eps + b] s` against a
    /// closed starting bound.
    pub fn contract(&mut self, schema: usize, start: usize) -> Built {
        let j = self
            .steps
            .get(schema)
            .map(|s| s.judgment.clone())
            .ok_or_else(|| self.bad(Rule::Contract, "missing schema"))?;
        let start_hyps = self
            .steps
            .get(start)
            .map(|s| s.judgment.hyps.clone())
            .ok_or_else(|| self.bad(Rule::Contract, "missing start"))?;
        let parametric = QuantEquation::new(j.concl.left.clone(), j.concl.right.clone(), Epsilon::var());
        let rest: Vec<QuantEquation> = j.hyps.iter().filter(|h| !h.matches(&parametric)).cloned().collect();
        let (a, b) = (j.concl.eps.coef.clone(), j.concl.eps.constant.clone());
        if a >= Rational::one() {
            return Err(self.bad(Rule::Contract, "coefficient must be below 1"));
        }
        let eps = Epsilon::constant(&b / (Rational::one() - &a));
        self.push(ProofStep {
            judgment: Judgment::new(
                union(&[&rest, &start_hyps]),
                QuantEquation::new(j.concl.left, j.concl.right, eps),
            ),
            rule: Ok(Rule::Contract),
            premises: vec![schema, start],
            witness: Witness {
                a: Some(a),
                b: Some(b),
                ..Witness::default()
            },
        })
    }

    /// The script whose goal is the last step's judgment.
    pub fn finish(self) -> ProofScript {
        let goal = self
            .steps
            .last()
            .map(|s| s.judgment.clone())
            .unwrap_or_else(|| Judgment::closed(QuantEquation::new(Term::nil(), Term::nil(), Epsilon::zero())));
        ProofScript {
            discount: self.discount,
            goal,
            steps: self.steps,
        }
    }
}
