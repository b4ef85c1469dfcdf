//! Balanced transportation problems solved by the transportation (network)
//! simplex method on a spanning tree of the bipartite source/sink graph.
//!
//! The initial basis comes from the northwest-corner rule. Entering cells are
//! the first ones in row-major order with negative reduced cost, and ties for
//! the leaving cell go to the smallest row-major index, which rules out
//! cycling on degenerate bases.

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct TransportSolution<S> {
    pub value: S,
    /// Basic cells `(source, sink, flow)`; cells with zero flow are omitted.
    pub flow: Vec<(usize, usize, S)>,
    pub pivots: usize,
}

/// Safety net for floating-point runs; exact runs terminate on their own.
const MAX_PIVOTS: usize = 100_000;

/// Minimizes `Σ cost[i][j]·x[i][j]` subject to row sums `supply` and column
/// sums `demand`, `x ≥ 0`. Both marginals must carry the same total mass.
pub fn solve_transport<S: Scalar>(supply: &[S], demand: &[S], cost: &[Vec<S>]) -> TransportSolution<S> {
    let m = supply.len();
    let n = demand.len();
    assert!(m > 0 && n > 0, "transport problem needs sources and sinks");
    assert_eq!(cost.len(), m);
    let tol = S::pivot_tolerance();

    if m == 1 || n == 1 {
        let flow: Vec<(usize, usize, S)> = if m == 1 {
            demand.iter().enumerate().map(|(j, d)| (0, j, d.clone())).collect()
        } else {
            supply.iter().enumerate().map(|(i, s)| (i, 0, s.clone())).collect()
        };
        return finish(flow, cost, 0);
    }

    let mut basis = northwest_corner(supply, demand, &tol);
    let mut pivots = 0;
    loop {
        let (u, v) = potentials(m, n, &basis, cost);
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !basis.iter().any(|b| b.0 == i && b.1 == j))
            .find(|&(i, j)| cost[i][j].clone() - u[i].clone() - v[j].clone() < -tol.clone());
        let Some((ei, ej)) = entering else { break };
        if pivots >= MAX_PIVOTS {
            break;
        }
        pivots += 1;

        // path in the tree from sink ej back to source ei; its cells alternate
        // minus, plus, minus, … once the entering cell closes the cycle
        let path = tree_path(m, n, &basis, ej, ei);
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = minus
            .iter()
            .map(|&k| basis[k].2.clone())
            .fold(None, |acc: Option<S>, f| match acc {
                Some(a) if a <= f => Some(a),
                _ => Some(f),
            })
            .expect("a cycle has at least one minus cell");
        let leave = *minus
            .iter()
            .filter(|&&k| basis[k].2 <= theta)
            .min_by_key(|&&k| basis[k].0 * n + basis[k].1)
            .expect("the minimum is attained");
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis[k].2 -= theta.clone();
            } else {
                basis[k].2 += theta.clone();
            }
        }
        basis[leave] = (ei, ej, theta);
    }
    let flow = basis.into_iter().filter(|c| !c.2.is_zero()).collect();
    finish(flow, cost, pivots)
}

fn finish<S: Scalar>(flow: Vec<(usize, usize, S)>, cost: &[Vec<S>], pivots: usize) -> TransportSolution<S> {
    let mut value = S::zero();
    for (i, j, f) in &flow {
        value += cost[*i][*j].clone() * f.clone();
    }
    TransportSolution { value, flow, pivots }
}

/// `m + n - 1` basic cells forming a spanning tree.
fn northwest_corner<S: Scalar>(supply: &[S], demand: &[S], tol: &S) -> Vec<(usize, usize, S)> {
    let (m, n) = (supply.len(), demand.len());
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(m + n - 1);
    loop {
        let x = S::max_of(S::min_of(a[i].clone(), b[j].clone()), S::zero());
        a[i] -= x.clone();
        b[j] -= x.clone();
        cells.push((i, j, x));
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 {
            i += 1;
        } else if i == m - 1 {
            j += 1;
        } else if a[i] <= *tol {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

/// Dual values with `u[0] = 0` and `u[i] + v[j] = cost[i][j]` on the basis.
fn potentials<S: Scalar>(m: usize, n: usize, basis: &[(usize, usize, S)], cost: &[Vec<S>]) -> (Vec<S>, Vec<S>) {
    let mut u: Vec<Option<S>> = vec![None; m];
    let mut v: Vec<Option<S>> = vec![None; n];
    u[0] = Some(S::zero());
    let mut done = 1;
    while done < m + n {
        let before = done;
        for &(i, j, _) in basis {
            match (&u[i], &v[j]) {
                (Some(ui), None) => {
                    v[j] = Some(cost[i][j].clone() - ui.clone());
                    done += 1;
                }
                (None, Some(vj)) => {
                    u[i] = Some(cost[i][j].clone() - vj.clone());
                    done += 1;
                }
                _ => {}
            }
        }
        assert!(done > before, "basis is not a spanning tree");
    }
    (
        u.into_iter().map(|x| x.expect("row potential")).collect(),
        v.into_iter().map(|x| x.expect("column potential")).collect(),
    )
}

/// Basis positions along the tree path from sink `from_col` to source `to_row`.
fn tree_path<S>(m: usize, n: usize, basis: &[(usize, usize, S)], from_col: usize, to_row: usize) -> Vec<usize> {
    // nodes: rows 0..m, columns m..m+n
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    for (k, &(i, j, _)) in basis.iter().enumerate() {
        adj[i].push((m + j, k));
        adj[m + j].push((i, k));
    }
    let start = m + from_col;
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        if x == to_row {
            break;
        }
        for &(y, k) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                prev[y] = Some((x, k));
                stack.push(y);
            }
        }
    }
    let mut path = Vec::new();
    let mut x = to_row;
    while x != start {
        let (p, k) = prev[x].expect("tree is connected");
        path.push(k);
        x = p;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat, Rational};

    #[test]
    fn classic_instance() {
        let supply = [20.0f64, 30.0, 25.0];
        let demand = [10.0, 10.0, 35.0, 20.0];
        let cost = vec![
            vec![8.0, 6.0, 10.0, 9.0],
            vec![9.0, 12.0, 13.0, 7.0],
            vec![14.0, 9.0, 16.0, 5.0],
        ];
        let sol = solve_transport(&supply, &demand, &cost);
        assert!((sol.value - 675.0).abs() < 1e-9, "{}", sol.value);
    }

    #[test]
    fn exact_degenerate_instance() {
        let half = rat(1, 2);
        let supply = [half.clone(), half.clone()];
        let demand = [half.clone(), half.clone()];
        let cost = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        let sol = solve_transport(&supply, &demand, &cost);
        assert_eq!(sol.value, Rational::from_integer(0.into()));
        let mut rows = [Rational::from_integer(0.into()), Rational::from_integer(0.into())];
        for (i, _, f) in &sol.flow {
            rows[*i] += f;
        }
        assert_eq!(rows, [half.clone(), half]);
    }

    #[test]
    fn single_row_or_column() {
        let sol = solve_transport(&[1.0f64], &[0.25, 0.75], &[vec![2.0, 4.0]]);
        assert!((sol.value - 3.5).abs() < 1e-12);
        let sol = solve_transport(&[0.5f64, 0.5], &[1.0], &[vec![1.0], vec![3.0]]);
        assert!((sol.value - 2.0).abs() < 1e-12);
    }
}
