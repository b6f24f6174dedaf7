//! Brute-force oracles and random instance generators shared by the
//! integration tests. Nothing here calls the solvers under test.

#![allow(dead_code)]

use rand::Rng;
use vpmn::flow::{FlowEdge, FlowNetwork};
use vpmn::simplex::{LpProblem, Relation};

/// Random directed network on 2..=`max_nodes` nodes, source 0 and sink
/// `n - 1`, capacities uniform in [0, 10].
pub fn random_network<R: Rng>(rng: &mut R, max_nodes: usize, density: f64) -> FlowNetwork {
    let n = rng.gen_range(2..=max_nodes);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                edges.push(FlowEdge {
                    from: u,
                    to: v,
                    capacity: rng.gen_range(0.0..10.0),
                });
            }
        }
    }
    FlowNetwork::new(n, edges, 0, n - 1).unwrap()
}

/// Smallest source/sink cut over every vertex bipartition.
pub fn brute_force_min_cut(net: &FlowNetwork) -> f64 {
    let n = net.num_nodes();
    let (s, t) = (net.source(), net.sink());
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let inside = |v: usize| mask & (1 << v) != 0;
        if !inside(s) || inside(t) {
            continue;
        }
        let cut: f64 = net
            .edges()
            .iter()
            .filter(|e| inside(e.from) && !inside(e.to))
            .map(|e| e.capacity)
            .sum();
        best = best.min(cut);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enumerated {
    Infeasible,
    Optimal(f64),
}

/// Solves a bounded LP by visiting every basic solution: each choice of
/// `n` tight hyperplanes among the rows, `x_j = 0` and `x_j = u_j` is solved
/// directly and kept if feasible. Requires every variable to have a finite
/// upper bound so that a nonempty feasible set has a vertex.
pub fn vertex_enumeration(p: &LpProblem) -> Enumerated {
    let n = p.num_vars();
    assert!(p.upper_bounds().iter().all(|u| u.is_finite()), "oracle needs bounded variables");
    let mut planes: Vec<(Vec<f64>, f64)> = p
        .constraints()
        .iter()
        .map(|c| (c.coefficients.clone(), c.rhs))
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0));
        planes.push((e, p.upper_bounds()[j]));
    }
    let scale = 1.0
        + p.constraints()
            .iter()
            .flat_map(|c| c.coefficients.iter().chain([&c.rhs]))
            .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let feasible = |x: &[f64]| {
        x.iter().zip(p.upper_bounds()).all(|(&v, &u)| v >= -tol && v <= u + tol)
            && p.constraints().iter().all(|c| {
                let lhs: f64 = c.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs + tol,
                    Relation::Ge => lhs >= c.rhs - tol,
                    Relation::Eq => (lhs - c.rhs).abs() <= tol,
                }
            })
    };
    let mut best: Option<f64> = None;
    for subset in combinations(planes.len(), n) {
        let a: Vec<Vec<f64>> = subset.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&k| planes[k].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if feasible(&x) {
            let obj: f64 = p.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(obj, |b| b.max(obj)));
        }
    }
    best.map_or(Enumerated::Infeasible, Enumerated::Optimal)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Small LP with integer data in a box: 1..=4 variables, 1..=4 rows of
/// mixed relations. Integer coefficients make degenerate vertices common.
pub fn random_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=4);
    let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=5) as f64).collect();
    let mut p = LpProblem::maximize(obj);
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=4) as f64).collect();
        let relation = match rng.gen_range(0..6) {
            0 => Relation::Eq,
            1 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = rng.gen_range(-2..=10) as f64;
        p.add_constraint(coeffs, relation, rhs);
    }
    for j in 0..n {
        p.set_upper_bound(j, rng.gen_range(1..=6) as f64);
    }
    p
}

/// Mean distance from the center of a square of side `side` to a uniform
/// point in it.
pub fn mean_distance_to_square_center(side: f64) -> f64 {
    let r2 = std::f64::consts::SQRT_2;
    side / 6.0 * (r2 + (1.0 + r2).ln())
}

/// Bounded LP with real data: 1..=5 variables, 1..=6 rows of mixed
/// relations, coefficients and right-hand sides uniform in [-5, 5], each
/// variable boxed in [0, u] with u uniform in [1, 10].
pub fn random_real_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=6);
    let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let mut p = LpProblem::maximize(obj);
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        let relation = match rng.gen_range(0..6) {
            0 => Relation::Eq,
            1 => Relation::Ge,
            _ => Relation::Le,
        };
        p.add_constraint(coeffs, relation, rng.gen_range(-5.0..=5.0));
    }
    for j in 0..n {
        p.set_upper_bound(j, rng.gen_range(1.0..=10.0));
    }
    p
}
