//! The Kantorovich bisimilarity pseudometric.
//!
//! [`bisim_distance`] brackets the least fixed point of Ψ between the
//! increasing iterates Ψⁿ(0) and the decreasing iterates Ψ̃ⁿ(1) (Ψ with
//! bisimilar pairs clamped to zero). [`discounted_distance`] iterates the
//! contraction Ψ^λ with an a-priori Banach error bound. In exact mode both
//! try to close the enclosure by solving the linear system induced by the
//! current optimal couplings and checking the candidate is a fixed point.

mod linear;
pub mod transport;

use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bisim::{refine, Partition};
use crate::chain::{disjoint_union, Indexed, OpenMarkovChain, PointedChain, StateId, Target};
use crate::distribution::SubDistribution;
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::scalar::Scalar;
use crate::semantics::reachable_chain_capped;
use crate::term::Term;
use crate::DEFAULT_STATE_CAP;

pub use linear::solve_linear;
pub use transport::{solve_transport, TransportSolution};

/// An outcome, or the padding point ⊥ that absorbs missing mass.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundPoint<K> {
    Point(K),
    Bottom,
}

/// `d*`: `d` plus ⊥ carrying the mass deficit `1 - total`.
pub fn bottom_extend<K: Ord + Clone>(d: &SubDistribution<K>) -> SubDistribution<GroundPoint<K>> {
    let mut out = d.map_outcomes(|k| GroundPoint::Point(k.clone()));
    out.add(GroundPoint::Bottom, d.deficit());
    out
}

/// Symmetric matrix with zero diagonal, indexed by chain state positions.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudometricMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> PseudometricMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        PseudometricMatrix {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    /// The discrete metric: 1 off the diagonal.
    pub fn ones(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { S::zero() } else { S::one() })
    }

    /// Builds the matrix from its strict upper triangle; the diagonal is zero.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[j * self.n + i] = v.clone();
        self.data[i * self.n + j] = v;
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PseudometricMatrix<T> {
        PseudometricMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> PseudometricMatrix<f64> {
        self.map(|x| x.to_f64())
    }

    /// `max |self - other|` over all entries.
    pub fn max_distance(&self, other: &Self) -> S {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |acc, (a, b)| S::max_of(acc, (a.clone() - b.clone()).abs()))
    }

    pub fn le(&self, other: &Self) -> bool {
        self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    /// Checks zero diagonal, symmetry, range `[0,1]` and the triangle
    /// inequality, the latter two up to `slack`.
    pub fn check_pseudometric(&self, slack: &S) -> std::result::Result<(), String> {
        let n = self.n;
        for i in 0..n {
            if !self.get(i, i).is_zero() {
                return Err(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if v != self.get(j, i) {
                    return Err(format!("asymmetric at ({i},{j})"));
                }
                if *v < -slack.clone() || *v > S::one() + slack.clone() {
                    return Err(format!("entry ({i},{j}) = {v} outside [0,1]"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = self.get(i, k).clone() + self.get(k, j).clone() + slack.clone();
                    if *self.get(i, j) > via {
                        return Err(format!("triangle inequality fails for ({i},{k},{j})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    fn expand(&self, block_of: &[usize]) -> Self {
        Self::from_fn(block_of.len(), |i, j| self.get(block_of[i], block_of[j]).clone())
    }

    fn pointwise(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        PseudometricMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for PseudometricMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

/// Certified lower and upper bounds on the distance between every pair of states.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceEnclosure<S> {
    pub states: Vec<StateId>,
    pub lower: PseudometricMatrix<S>,
    pub upper: PseudometricMatrix<S>,
    pub iterations: usize,
    /// Set when an exact fixed point was certified, so `lower == upper == δ`.
    pub exact: bool,
}

impl<S: Scalar> DistanceEnclosure<S> {
    pub fn width(&self) -> S {
        self.upper.max_distance(&self.lower)
    }

    pub fn index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    pub fn interval(&self, i: usize, j: usize) -> (S, S) {
        (self.lower.get(i, j).clone(), self.upper.get(i, j).clone())
    }

    pub fn to_f64(&self) -> DistanceEnclosure<f64> {
        DistanceEnclosure {
            states: self.states.clone(),
            lower: self.lower.to_f64(),
            upper: self.upper.to_f64(),
            iterations: self.iterations,
            exact: self.exact,
        }
    }
}

/// Discounted distances with the a-priori Banach bound on the error of `value`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountedDistance<S> {
    pub states: Vec<StateId>,
    pub value: PseudometricMatrix<S>,
    /// Every entry of `value` exceeds the true distance by at most `bound`.
    pub bound: S,
    pub iterations: usize,
    pub exact: bool,
}

impl<S: Scalar> DiscountedDistance<S> {
    pub fn enclosure(&self) -> DistanceEnclosure<S> {
        let lower = self.value.map(|v| S::max_of(S::zero(), v.clone() - self.bound.clone()));
        DistanceEnclosure {
            states: self.states.clone(),
            lower,
            upper: self.value.clone(),
            iterations: self.iterations,
            exact: self.exact,
        }
    }
}

/// Bounds on the distance between two pointed chains or terms.
#[derive(Clone, Debug, PartialEq)]
pub struct TermDistance<S> {
    pub lower: S,
    pub upper: S,
    pub iterations: usize,
    pub exact: bool,
    /// Banach bound for discounted runs.
    pub bound: Option<S>,
    pub left_states: usize,
    pub right_states: usize,
}

impl<S: Scalar> TermDistance<S> {
    pub fn width(&self) -> S {
        self.upper.clone() - self.lower.clone()
    }

    pub fn contains(&self, x: &S) -> bool {
        self.lower <= *x && *x <= self.upper
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceOptions {
    pub tol: Rational,
    pub max_iter: usize,
    /// `Some(λ)` with `0 < λ < 1` selects the discounted distance.
    pub discount: Option<Rational>,
    pub state_cap: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            tol: Rational::new(1.into(), 1_000_000_000.into()),
            max_iter: 1_000_000,
            discount: None,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl DistanceOptions {
    pub fn with_tol(mut self, tol: Rational) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_discount(mut self, discount: Option<Rational>) -> Self {
        self.discount = discount;
        self
    }
}

/// A joint distribution with prescribed marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling<K, S> {
    pub entries: Vec<(GroundPoint<K>, GroundPoint<K>, S)>,
}

impl<K: Ord + Clone, S: Scalar> Coupling<K, S> {
    pub fn left_marginal(&self) -> Vec<(GroundPoint<K>, S)> {
        marginal(self.entries.iter().map(|(x, _, m)| (x, m)))
    }

    pub fn right_marginal(&self) -> Vec<(GroundPoint<K>, S)> {
        marginal(self.entries.iter().map(|(_, y, m)| (y, m)))
    }

    pub fn cost(&self, mut ground: impl FnMut(&GroundPoint<K>, &GroundPoint<K>) -> S) -> S {
        let mut acc = S::zero();
        for (x, y, m) in &self.entries {
            acc += ground(x, y) * m.clone();
        }
        acc
    }
}

fn marginal<'a, K: Ord + Clone + 'a, S: Scalar>(
    it: impl Iterator<Item = (&'a GroundPoint<K>, &'a S)>,
) -> Vec<(GroundPoint<K>, S)> {
    let mut out: std::collections::BTreeMap<GroundPoint<K>, S> = Default::default();
    for (k, m) in it {
        *out.entry(k.clone()).or_insert_with(S::zero) += m.clone();
    }
    out.into_iter().filter(|(_, m)| !m.is_zero()).collect()
}

/// The Kantorovich distance between `mu` and `nu` (both ⊥-extended) under
/// `ground`, with an optimal coupling.
pub fn kantorovich<K: Ord + Clone, S: Scalar>(
    mu: &SubDistribution<K>,
    nu: &SubDistribution<K>,
    ground: impl Fn(&GroundPoint<K>, &GroundPoint<K>) -> S,
) -> (S, Coupling<K, S>) {
    let (xs, a): (Vec<_>, Vec<S>) = bottom_extend(mu)
        .iter()
        .map(|(k, m)| (k.clone(), S::from_rational(m)))
        .unzip();
    let (ys, b): (Vec<_>, Vec<S>) = bottom_extend(nu)
        .iter()
        .map(|(k, m)| (k.clone(), S::from_rational(m)))
        .unzip();
    let cost: Vec<Vec<S>> = xs.iter().map(|x| ys.iter().map(|y| ground(x, y)).collect()).collect();
    let sol = solve_transport(&a, &b, &cost);
    let entries = sol
        .flow
        .into_iter()
        .map(|(i, j, f)| (xs[i].clone(), ys[j].clone(), f))
        .collect();
    (sol.value, Coupling { entries })
}

/// The lifted ground pseudometric Λ^λ(d) on ⊥-extended outcomes.
#[derive(Clone, Debug)]
pub struct Lift<'a, S> {
    d: &'a PseudometricMatrix<S>,
    discount: S,
}

impl<S: Scalar> Lift<'_, S> {
    pub fn distance(&self, x: &GroundPoint<Target>, y: &GroundPoint<Target>) -> S {
        ground(self.d, &self.discount, x, y)
    }
}

/// Λ^λ(d); `discount` must lie in (0, 1], and 1 gives the undiscounted lift.
pub fn lift_lambda<'a, S: Scalar>(d: &'a PseudometricMatrix<S>, discount: &Rational) -> Result<Lift<'a, S>> {
    check_discount(discount, true)?;
    Ok(Lift {
        d,
        discount: S::from_rational(discount),
    })
}

fn check_discount(discount: &Rational, allow_one: bool) -> Result<()> {
    let ok = *discount > Rational::zero()
        && if allow_one {
            *discount <= Rational::one()
        } else {
            *discount < Rational::one()
        };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidDiscount(format_rational(discount)))
    }
}

fn ground<S: Scalar>(d: &PseudometricMatrix<S>, lambda: &S, x: &GroundPoint<Target>, y: &GroundPoint<Target>) -> S {
    use GroundPoint::{Bottom, Point};
    match (x, y) {
        (Point(Target::Step(a, i)), Point(Target::Step(b, j))) if a == b => {
            if i == j {
                S::zero()
            } else {
                lambda.clone() * d.get(*i, *j).clone()
            }
        }
        (Point(Target::Exit(p)), Point(Target::Exit(q))) if p == q => S::zero(),
        (Bottom, Bottom) => S::zero(),
        _ => S::one(),
    }
}

/// A ⊥-extended transition row with scalar masses.
struct Row<S> {
    points: Vec<GroundPoint<Target>>,
    mass: Vec<S>,
}

fn extended_rows<S: Scalar>(ix: &Indexed) -> Vec<Row<S>> {
    ix.rows
        .iter()
        .map(|row| {
            let d: SubDistribution<Target> = row.iter().cloned().collect();
            let (points, mass) = bottom_extend(&d)
                .iter()
                .map(|(k, m)| (k.clone(), S::from_rational(m)))
                .unzip();
            Row { points, mass }
        })
        .collect()
}

type CellCoupling<S> = Vec<(usize, usize, S)>;

fn pair_distance<S: Scalar>(r: &Row<S>, s: &Row<S>, d: &PseudometricMatrix<S>, lambda: &S) -> (S, CellCoupling<S>) {
    let cost: Vec<Vec<S>> = r
        .points
        .iter()
        .map(|x| s.points.iter().map(|y| ground(d, lambda, x, y)).collect())
        .collect();
    let sol = solve_transport(&r.mass, &s.mass, &cost);
    (sol.value, sol.flow)
}

const PARALLEL_PAIRS: usize = 32;

/// One application of Ψ^λ over all pairs `i < j`; optionally keeps the
/// optimal couplings.
fn psi<S: Scalar>(
    rows: &[Row<S>],
    d: &PseudometricMatrix<S>,
    lambda: &S,
    keep: bool,
) -> (PseudometricMatrix<S>, Vec<CellCoupling<S>>) {
    let n = rows.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| pair_distance(&rows[i], &rows[j], d, lambda);
    let results: Vec<(S, CellCoupling<S>)> = if pairs.len() >= PARALLEL_PAIRS {
        pairs.par_iter().map(eval).collect()
    } else {
        pairs.iter().map(eval).collect()
    };
    let mut out = PseudometricMatrix::zeros(n);
    let mut couplings = Vec::new();
    for ((i, j), (v, c)) in pairs.iter().zip(results) {
        out.set(*i, *j, v);
        if keep {
            couplings.push(c);
        }
    }
    (out, couplings)
}

/// Ψ^λ(d) on `c`, diagonal forced to zero.
pub fn psi_step<S: Scalar>(
    c: &OpenMarkovChain,
    d: &PseudometricMatrix<S>,
    discount: &Rational,
) -> Result<PseudometricMatrix<S>> {
    check_discount(discount, true)?;
    let rows = extended_rows::<S>(&c.indexed());
    Ok(psi(&rows, d, &S::from_rational(discount), false).0)
}

/// Ψ̃(d): as Ψ(d) but zero on pairs inside a block of `partition`.
pub fn psi_tilde_step<S: Scalar>(
    c: &OpenMarkovChain,
    d: &PseudometricMatrix<S>,
    partition: &Partition,
) -> PseudometricMatrix<S> {
    let rows = extended_rows::<S>(&c.indexed());
    let (mut out, _) = psi(&rows, d, &S::one(), false);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if partition.same_block(i, j) {
                out.set(i, j, S::zero());
            }
        }
    }
    out
}

/// Quotient rows: one per bisimilarity block, targets renamed to blocks.
fn quotient_rows(ix: &Indexed) -> (Indexed, Vec<usize>) {
    let block_of = refine(ix);
    let k = block_of.iter().map(|b| b + 1).max().unwrap_or(0);
    let mut rows = vec![None; k];
    for (i, &b) in block_of.iter().enumerate() {
        if rows[b].is_none() {
            let d: SubDistribution<Target> = ix.rows[i]
                .iter()
                .map(|(t, p)| {
                    let t = match t {
                        Target::Step(a, j) => Target::Step(a.clone(), block_of[*j]),
                        Target::Exit(x) => Target::Exit(x.clone()),
                    };
                    (t, p.clone())
                })
                .collect();
            rows[b] = Some(d.iter().map(|(t, p)| (t.clone(), p.clone())).collect());
        }
    }
    (
        Indexed {
            rows: rows.into_iter().map(|r| r.expect("every block has a member")).collect(),
        },
        block_of,
    )
}

const SNAP_MAX_VARIABLES: usize = 300;

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Solves `d = c + λ·P·d` for the given couplings and accepts the solution
/// only if it is an exact fixed point of Ψ^λ lying inside `[lower, upper]`.
fn snap<S: Scalar>(
    rows: &[Row<S>],
    couplings: &[CellCoupling<S>],
    lambda: &S,
    lower: &PseudometricMatrix<S>,
    upper: &PseudometricMatrix<S>,
) -> Option<PseudometricMatrix<S>> {
    let n = rows.len();
    let vars = n * (n - 1) / 2;
    if !S::EXACT || vars == 0 || vars > SNAP_MAX_VARIABLES {
        return None;
    }
    let mut a = vec![vec![S::zero(); vars]; vars];
    let mut b = vec![S::zero(); vars];
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            a[p][p] += S::one();
            for (x, y, f) in &couplings[p] {
                let (gx, gy) = (&rows[i].points[*x], &rows[j].points[*y]);
                match (gx, gy) {
                    (GroundPoint::Point(Target::Step(l1, k)), GroundPoint::Point(Target::Step(l2, l))) if l1 == l2 => {
                        if k != l {
                            a[p][pair_index(n, *k, *l)] -= lambda.clone() * f.clone();
                        }
                    }
                    _ => b[p] += ground(lower, lambda, gx, gy) * f.clone(),
                }
            }
            p += 1;
        }
    }
    let x = solve_linear(a, b)?;
    if x.iter().any(|v| *v < S::zero() || *v > S::one()) {
        return None;
    }
    let cand = PseudometricMatrix::from_fn(n, |i, j| x[pair_index(n, i, j)].clone());
    if !lower.le(&cand) || !cand.le(upper) {
        return None;
    }
    let (image, _) = psi(rows, &cand, lambda, false);
    if image != cand || cand.check_pseudometric(&S::zero()).is_err() {
        return None;
    }
    Some(cand)
}

fn check_tol(tol: &Rational) -> Result<()> {
    if *tol > Rational::zero() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance)
    }
}

/// Certified enclosure of the bisimilarity distance between all state pairs.
///
/// Stops when the widest gap is at most `opts.tol`, when the two iterates
/// coincide, or (exact mode) when a fixed point is certified.
pub fn bisim_distance<S: Scalar>(c: &OpenMarkovChain, opts: &DistanceOptions) -> Result<DistanceEnclosure<S>> {
    check_tol(&opts.tol)?;
    let (q, block_of) = quotient_rows(&c.indexed());
    let rows = extended_rows::<S>(&q);
    let k = rows.len();
    let tol = S::from_rational(&opts.tol);
    let one = S::one();
    let mut lower = PseudometricMatrix::<S>::zeros(k);
    let mut upper = PseudometricMatrix::<S>::ones(k);
    let mut exact = false;
    let mut iterations = 0;
    let mut next_snap = 1;
    let converged = loop {
        let gap = upper.max_distance(&lower);
        if iterations > 0 && (gap <= tol || lower == upper) {
            break true;
        }
        if iterations >= opts.max_iter {
            break false;
        }
        iterations += 1;
        let want = S::EXACT && iterations == next_snap;
        let (lo, couplings) = psi(&rows, &lower, &one, want);
        let (up, _) = psi(&rows, &upper, &one, false);
        let new_lower = lower.pointwise(&lo, S::max_of);
        let new_upper = upper.pointwise(&up, S::min_of);
        if want {
            next_snap *= 2;
            if let Some(d) = snap(&rows, &couplings, &one, &new_lower, &new_upper) {
                lower = d.clone();
                upper = d;
                exact = true;
                continue;
            }
        }
        lower = new_lower;
        upper = new_upper;
    };
    let enclosure = DistanceEnclosure {
        states: c.states().to_vec(),
        lower: lower.expand(&block_of),
        upper: upper.expand(&block_of),
        iterations,
        exact: exact || (S::EXACT && lower == upper),
    };
    if converged {
        Ok(enclosure)
    } else {
        let gap = enclosure.width().to_f64();
        Err(Error::NotConverged {
            iterations,
            gap,
            best: Box::new(enclosure.to_f64()),
        })
    }
}

/// The λ-discounted distance, iterated from the all-ones matrix until the
/// bound `λⁿ/(1-λ)·‖Ψ^λ(1) - 1‖` drops to `opts.tol`.
pub fn discounted_distance<S: Scalar>(
    c: &OpenMarkovChain,
    discount: &Rational,
    opts: &DistanceOptions,
) -> Result<DiscountedDistance<S>> {
    check_discount(discount, false)?;
    check_tol(&opts.tol)?;
    let (q, block_of) = quotient_rows(&c.indexed());
    let rows = extended_rows::<S>(&q);
    let k = rows.len();
    let lambda = S::from_rational(discount);
    let tol = S::from_rational(&opts.tol);
    let factor = S::one() / (S::one() - lambda.clone());
    let start = PseudometricMatrix::<S>::ones(k);
    let mut value = start.clone();
    let mut first_change = None;
    let mut power = S::one();
    let mut bound = S::one();
    let mut iterations = 0;
    let mut exact = false;
    let mut next_snap = 1;
    let converged = loop {
        if iterations > 0 && bound <= tol {
            break true;
        }
        if iterations >= opts.max_iter {
            break false;
        }
        iterations += 1;
        let want = S::EXACT && iterations == next_snap;
        let (next, couplings) = psi(&rows, &value, &lambda, want);
        let change = first_change.get_or_insert_with(|| next.max_distance(&start)).clone();
        power *= lambda.clone();
        bound = power.clone() * factor.clone() * change;
        if want {
            next_snap *= 2;
            let floor = PseudometricMatrix::zeros(k);
            if let Some(d) = snap(&rows, &couplings, &lambda, &floor, &next) {
                value = d;
                bound = S::zero();
                exact = true;
                continue;
            }
        }
        value = next;
    };
    let result = DiscountedDistance {
        states: c.states().to_vec(),
        value: value.expand(&block_of),
        exact: exact || (S::EXACT && bound.is_zero()),
        bound,
        iterations,
    };
    if converged {
        Ok(result)
    } else {
        let enc = result.enclosure();
        Err(Error::NotConverged {
            iterations,
            gap: result.bound.to_f64(),
            best: Box::new(enc.to_f64()),
        })
    }
}

/// Enclosure for every pair: undiscounted, or discounted when `opts.discount` is set.
pub fn distance_enclosure<S: Scalar>(c: &OpenMarkovChain, opts: &DistanceOptions) -> Result<DistanceEnclosure<S>> {
    match &opts.discount {
        Some(l) => Ok(discounted_distance::<S>(c, l, opts)?.enclosure()),
        None => bisim_distance::<S>(c, opts),
    }
}

/// Distance between the initial states of two pointed chains, computed on
/// their disjoint union.
pub fn pointed_distance<S: Scalar>(
    p: &PointedChain,
    q: &PointedChain,
    opts: &DistanceOptions,
) -> Result<TermDistance<S>> {
    let (u, inj) = disjoint_union(&p.chain, &q.chain);
    let i = u.index_of(&inj.left[&p.initial]).expect("left initial");
    let j = u.index_of(&inj.right[&q.initial]).expect("right initial");
    let (lower, upper, iterations, exact, bound) = match &opts.discount {
        Some(l) => {
            let r = discounted_distance::<S>(&u, l, opts)?;
            let v = r.value.get(i, j).clone();
            let lo = S::max_of(S::zero(), v.clone() - r.bound.clone());
            (lo, v, r.iterations, r.exact, Some(r.bound))
        }
        None => {
            let e = bisim_distance::<S>(&u, opts)?;
            let (lo, hi) = e.interval(i, j);
            (lo, hi, e.iterations, e.exact, None)
        }
    };
    Ok(TermDistance {
        lower,
        upper,
        iterations,
        exact,
        bound,
        left_states: p.chain.len(),
        right_states: q.chain.len(),
    })
}

/// Distance between two terms through their reachable chains.
pub fn term_distance<S: Scalar>(t: &Term, s: &Term, opts: &DistanceOptions) -> Result<TermDistance<S>> {
    let p = reachable_chain_capped(t, opts.state_cap)?;
    let q = reachable_chain_capped(s, opts.state_cap)?;
    pointed_distance(&p, &q, opts)
}

/// Spot check that the lifted ground distance is a pseudometric for some
/// matrix `d` over the chain `c`.
pub fn lift_is_pseudometric<S: Scalar>(
    c: &OpenMarkovChain,
    d: &PseudometricMatrix<S>,
    discount: &Rational,
) -> Result<bool> {
    let lift = lift_lambda(d, discount)?;
    let mut points: Vec<GroundPoint<Target>> = vec![GroundPoint::Bottom];
    for row in c.indexed().rows {
        points.extend(row.into_iter().map(|(t, _)| GroundPoint::Point(t)));
    }
    points.sort();
    points.dedup();
    let slack = S::pivot_tolerance();
    for x in &points {
        if !lift.distance(x, x).is_zero() {
            return Ok(false);
        }
        for y in &points {
            if lift.distance(x, y) != lift.distance(y, x) {
                return Ok(false);
            }
            for z in &points {
                if lift.distance(x, z) > lift.distance(x, y) + lift.distance(y, z) + slack.clone() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::bisim_partition;
    use crate::chain::Outcome;
    use crate::rational::{int, rat};
    use crate::term::{Label, Name};
    use std::collections::BTreeMap;

    fn two_loops() -> OpenMarkovChain {
        let a = Label::new("a").unwrap();
        let z = Name::new("Z").unwrap();
        let row = |s: &str, p: Rational, q: Rational| -> SubDistribution<Outcome> {
            [(Outcome::Step(a.clone(), s.into()), p), (Outcome::Exit(z.clone()), q)]
                .into_iter()
                .collect()
        };
        OpenMarkovChain::new(
            vec!["m".into(), "n".into()],
            BTreeMap::from([
                ("m".into(), row("m", rat(1, 2), rat(1, 2))),
                ("n".into(), row("n", rat(1, 3), rat(2, 3))),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn bottom_extension() {
        let d: SubDistribution<u8> = [(1, rat(1, 2))].into_iter().collect();
        let e = bottom_extend(&d);
        assert_eq!(e.get(&GroundPoint::Bottom), rat(1, 2));
        assert_eq!(e.total(), int(1));
        let full: SubDistribution<u8> = [(1, int(1))].into_iter().collect();
        assert_eq!(bottom_extend(&full).len(), 1);
        assert_eq!(
            bottom_extend(&SubDistribution::<u8>::new()),
            SubDistribution::dirac(GroundPoint::Bottom)
        );
    }

    #[test]
    fn lift_case_table() {
        let mut d = PseudometricMatrix::<Rational>::zeros(2);
        d.set(0, 1, rat(1, 4));
        let lift = lift_lambda(&d, &int(1)).unwrap();
        let a = Label::new("a").unwrap();
        let z = GroundPoint::Point(Target::Exit(Name::new("Z").unwrap()));
        let am = GroundPoint::Point(Target::Step(a.clone(), 0));
        let an = GroundPoint::Point(Target::Step(a, 1));
        assert_eq!(lift.distance(&am, &an), rat(1, 4));
        assert_eq!(lift.distance(&am, &z), int(1));
        assert_eq!(lift.distance(&z, &z), int(0));
        assert_eq!(lift.distance(&z, &GroundPoint::Bottom), int(1));
        assert!(lift_lambda(&d, &int(0)).is_err());
        assert!(lift_lambda(&d, &rat(3, 2)).is_err());
        let half = lift_lambda(&d, &rat(1, 2)).unwrap();
        assert_eq!(half.distance(&am, &an), rat(1, 8));
    }

    #[test]
    fn psi_on_two_loops() {
        let c = two_loops();
        let z = psi_step::<Rational>(&c, &PseudometricMatrix::zeros(2), &int(1)).unwrap();
        assert_eq!(*z.get(0, 1), rat(1, 6));
        let o = psi_step::<Rational>(&c, &PseudometricMatrix::ones(2), &int(1)).unwrap();
        assert_eq!(*o.get(0, 1), rat(1, 2));
        let part = bisim_partition(&c);
        assert_eq!(psi_tilde_step(&c, &PseudometricMatrix::ones(2), &part), o);
    }

    #[test]
    fn exact_distance_snaps_to_quarter() {
        let e = bisim_distance::<Rational>(&two_loops(), &DistanceOptions::default()).unwrap();
        assert!(e.exact);
        assert_eq!(e.interval(0, 1), (rat(1, 4), rat(1, 4)));
    }

    #[test]
    fn float_distance_brackets_quarter() {
        let e = bisim_distance::<f64>(&two_loops(), &DistanceOptions::default()).unwrap();
        let (lo, hi) = e.interval(0, 1);
        assert!(lo <= 0.25 + 1e-15 && 0.25 - 1e-15 <= hi && hi - lo <= 1e-9, "{lo} {hi}");
    }

    #[test]
    fn discounted_closed_form() {
        for l in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            let expected = int(1) / (int(6) - int(2) * &l);
            let r = discounted_distance::<Rational>(&two_loops(), &l, &DistanceOptions::default()).unwrap();
            assert_eq!(*r.value.get(0, 1), expected);
            let f = discounted_distance::<f64>(&two_loops(), &l, &DistanceOptions::default()).unwrap();
            let err = (f.value.get(0, 1) - crate::rational::to_f64(&expected)).abs();
            assert!(err <= f.bound + 1e-15 && f.bound <= 1e-9);
        }
        assert!(discounted_distance::<f64>(&two_loops(), &int(1), &DistanceOptions::default()).is_err());
    }

    #[test]
    fn not_converged_carries_enclosure() {
        let opts = DistanceOptions::default().with_max_iter(3);
        match bisim_distance::<f64>(&two_loops(), &opts) {
            Err(Error::NotConverged { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert!(best.lower.get(0, 1) <= &0.25 && best.upper.get(0, 1) >= &0.25);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kantorovich_one_step_oracle() {
        let a = Label::new("a").unwrap();
        let z = Name::new("Z").unwrap();
        let mu: SubDistribution<Outcome> = [
            (Outcome::Step(a.clone(), "s".into()), rat(1, 2)),
            (Outcome::Exit(z.clone()), rat(1, 2)),
        ]
        .into_iter()
        .collect();
        let nu = SubDistribution::dirac(Outcome::Step(a, "s".into()));
        let (v, c) = kantorovich(&mu, &nu, |x, y| if x == y { int(0) } else { int(1) });
        assert_eq!(v, rat(1, 2));
        assert_eq!(c.left_marginal().len(), 2);
        assert_eq!(
            c.right_marginal(),
            vec![(
                GroundPoint::Point(Outcome::Step(Label::new("a").unwrap(), "s".into())),
                int(1)
            )]
        );
    }

    #[test]
    fn terminating_states_are_at_distance_zero() {
        let c = OpenMarkovChain::new(
            vec!["p".into(), "q".into()],
            BTreeMap::from([
                ("p".into(), SubDistribution::new()),
                ("q".into(), SubDistribution::new()),
            ]),
        )
        .unwrap();
        let e = bisim_distance::<Rational>(&c, &DistanceOptions::default()).unwrap();
        assert_eq!(e.interval(0, 1), (int(0), int(0)));
    }

    #[test]
    fn lift_self_check() {
        let c = two_loops();
        let d = PseudometricMatrix::from_fn(2, |_, _| rat(1, 3));
        assert!(lift_is_pseudometric(&c, &d, &int(1)).unwrap());
    }
}
