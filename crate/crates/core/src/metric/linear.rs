//! Dense Gaussian elimination with partial pivoting.

use crate::scalar::Scalar;

/// Solves `a·x = b`. Returns `None` when `a` is singular (every candidate
/// pivot in some column is within the scalar's pivot tolerance of zero).
#[allow(clippy::needless_range_loop)]
pub fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n), "square system");
    let tol = S::pivot_tolerance();
    for col in 0..n {
        let mut best = None;
        for r in col..n {
            let mag = a[r][col].abs();
            if mag > tol && best.as_ref().is_none_or(|(_, m): &(usize, S)| mag > *m) {
                best = Some((r, mag));
                if S::EXACT {
                    break;
                }
            }
        }
        let (p, _) = best?;
        a.swap(col, p);
        b.swap(col, p);
        let pivot = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = f.clone() * a[col][c].clone();
                a[r][c] -= delta;
            }
            let delta = f * b[col].clone();
            b[r] -= delta;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc -= a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Some(x)
}
