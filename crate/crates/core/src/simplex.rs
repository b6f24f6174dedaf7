//! Dense two-phase primal simplex with Bland's rule.
//!
//! Problems are `max c·x` subject to linear rows (`≤`, `=`, `≥`) and
//! `0 ≤ x_j ≤ u_j`. Finite upper bounds are handled implicitly by the
//! bounded-variable ratio test, so link capacities do not become tableau
//! rows.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    upper_bounds: Vec<f64>,
}

impl LpProblem {
    /// Maximize `objective · x` over `x ≥ 0`, initially without rows.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            upper_bounds: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper_bounds
    }

    pub fn add_constraint(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self
    }

    /// Adds a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse_constraint(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> &mut Self {
        let mut coefficients = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            if let Some(c) = coefficients.get_mut(j) {
                *c += a;
            } else {
                // out of range: leave a row of the wrong width for validate() to report
                coefficients.resize(j + 1, 0.0);
                coefficients[j] += a;
            }
        }
        self.add_constraint(coefficients, relation, rhs)
    }

    pub fn set_upper_bound(&mut self, var: usize, upper: f64) -> &mut Self {
        if var >= self.upper_bounds.len() {
            self.upper_bounds.resize(var + 1, f64::INFINITY);
        }
        self.upper_bounds[var] = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(invalid("objective coefficients must be finite"));
        }
        if self.upper_bounds.len() != n {
            return Err(invalid(format!(
                "{} upper bounds for {n} variables",
                self.upper_bounds.len()
            )));
        }
        if let Some(u) = self.upper_bounds.iter().find(|u| u.is_nan() || **u < 0.0) {
            return Err(invalid(format!("upper bound {u} is below the implicit lower bound 0")));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(invalid(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if row.coefficients.iter().any(|a| !a.is_finite()) || !row.rhs.is_finite() {
                return Err(invalid(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (xj, uj) in x.iter().zip(&self.upper_bounds) {
            worst = worst.max(-xj).max(xj - uj);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; meaningful only when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    /// Columns that may never enter (artificials in phase 2).
    banned: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Continue,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    fn value_of_nonbasic(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::AtUpper => self.upper[j],
            _ => 0.0,
        }
    }

    fn recompute_reduced_costs(&mut self) {
        self.reduced.copy_from_slice(&self.cost);
        for r in 0..self.rows {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.cols..(r + 1) * self.cols];
                for (d, a) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
        for r in 0..self.rows {
            self.reduced[self.basis[r]] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + q];
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.a.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, pr) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *d -= f * pr;
            }
            self.reduced[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = ColState::Basic;
        debug_assert_ne!(leaving, q);
    }

    fn step(&mut self) -> Result<StepOutcome> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::Internal(format!(
                "simplex exceeded {} iterations",
                self.max_iterations
            )));
        }
        // Bland: lowest-index improving column
        let entering = (0..self.cols).find(|&j| {
            !self.banned[j]
                && match self.state[j] {
                    ColState::AtLower => self.reduced[j] > COST_TOL && self.upper[j] > 0.0,
                    ColState::AtUpper => self.reduced[j] < -COST_TOL,
                    ColState::Basic => false,
                }
        });
        let Some(q) = entering else {
            return Ok(StepOutcome::Optimal);
        };
        let dir = if self.state[q] == ColState::AtUpper { -1.0 } else { 1.0 };

        // (ratio, variable index, row or None for a bound flip, leaves at upper)
        let mut best: Option<(f64, usize, Option<usize>, bool)> = None;
        let mut consider = |ratio: f64, var: usize, row: Option<usize>, to_upper: bool| {
            let ratio = ratio.max(0.0);
            let better = match best {
                None => true,
                Some((b, bv, _, _)) => ratio < b - PIVOT_TOL || (ratio <= b + PIVOT_TOL && var < bv),
            };
            if better {
                best = Some((ratio, var, row, to_upper));
            }
        };
        if self.upper[q].is_finite() {
            consider(self.upper[q], q, None, false);
        }
        for r in 0..self.rows {
            let alpha = dir * self.at(r, q);
            let b = self.basis[r];
            if alpha > PIVOT_TOL {
                consider(self.xb[r] / alpha, b, Some(r), false);
            } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                consider((self.upper[b] - self.xb[r]) / -alpha, b, Some(r), true);
            }
        }
        let Some((theta, _, row, to_upper)) = best else {
            return Ok(StepOutcome::Unbounded);
        };

        for r in 0..self.rows {
            let a = self.at(r, q);
            if a != 0.0 {
                self.xb[r] -= theta * dir * a;
            }
        }
        match row {
            None => {
                self.state[q] = if dir > 0.0 {
                    ColState::AtUpper
                } else {
                    ColState::AtLower
                };
            }
            Some(r) => {
                let entering_value = self.value_of_nonbasic(q) + dir * theta;
                let leaving = self.basis[r];
                self.pivot(r, q);
                self.state[leaving] = if to_upper {
                    ColState::AtUpper
                } else {
                    ColState::AtLower
                };
                self.xb[r] = entering_value;
            }
        }
        Ok(StepOutcome::Continue)
    }

    fn run(&mut self) -> Result<StepOutcome> {
        loop {
            match self.step()? {
                StepOutcome::Continue => {}
                done => return Ok(done),
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.cols).map(|j| self.value_of_nonbasic(j)).collect();
        for r in 0..self.rows {
            x[self.basis[r]] = self.xb[r];
        }
        x
    }
}

pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.constraints.len();

    // normalize to b >= 0
    let rows: Vec<(Vec<f64>, Relation, f64)> = p
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coefficients.iter().map(|a| -a).collect(), rel, -c.rhs)
            } else {
                (c.coefficients.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * cols],
        xb: vec![0.0; m],
        basis: vec![0; m],
        state: vec![ColState::AtLower; cols],
        upper: vec![f64::INFINITY; cols],
        cost: vec![0.0; cols],
        reduced: vec![0.0; cols],
        banned: vec![false; cols],
        iterations: 0,
        max_iterations: 50_000 + 50 * (m + cols),
    };
    t.upper[..n].copy_from_slice(&p.upper_bounds);

    let (mut next_slack, mut next_art) = (n, art_start);
    for (r, (coef, rel, rhs)) in rows.iter().enumerate() {
        t.a[r * cols..r * cols + n].copy_from_slice(coef);
        t.xb[r] = *rhs;
        match rel {
            Relation::Le => {
                t.a[r * cols + next_slack] = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.a[r * cols + next_slack] = -1.0;
                next_slack += 1;
                t.a[r * cols + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.a[r * cols + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
        }
    }
    for r in 0..m {
        t.state[t.basis[r]] = ColState::Basic;
    }

    let scale = rows.iter().fold(1.0f64, |s, r| s.max(r.2));
    if n_art > 0 {
        for c in &mut t.cost[art_start..] {
            *c = -1.0;
        }
        t.recompute_reduced_costs();
        t.run()?;
        let infeasibility: f64 = (0..m)
            .filter(|&r| t.basis[r] >= art_start)
            .map(|r| t.xb[r])
            .sum();
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
            });
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..m {
            if t.basis[r] < art_start {
                continue;
            }
            let pick = (0..art_start)
                .filter(|&j| t.state[j] != ColState::Basic)
                .map(|j| (j, t.at(r, j).abs()))
                .filter(|&(_, a)| a > PIVOT_TOL)
                .max_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((j, _)) = pick {
                let value = t.value_of_nonbasic(j);
                let leaving = t.basis[r];
                t.pivot(r, j);
                t.state[leaving] = ColState::AtLower;
                t.xb[r] = value;
            }
        }
        for j in art_start..cols {
            t.banned[j] = true;
            t.cost[j] = 0.0;
        }
    }

    t.cost[..n].copy_from_slice(&p.objective);
    for c in &mut t.cost[n..] {
        *c = 0.0;
    }
    t.recompute_reduced_costs();
    match t.run()? {
        StepOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective: f64::INFINITY,
        }),
        _ => {
            let mut x = t.values();
            x.truncate(n);
            for (v, u) in x.iter_mut().zip(&p.upper_bounds) {
                // snap round-off at the bounds
                if v.abs() < 1e-12 {
                    *v = 0.0;
                }
                if (*v - u).abs() < 1e-12 {
                    *v = *u;
                }
            }
            let objective = x.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                x,
                objective,
            })
        }
    }
}

/// Plain-text form, one statement per line:
///
/// ```text
/// max 1 2
/// row 1 1 <= 4
/// row 1 0 = 3
/// upper 1 3
/// ```
impl fmt::Display for LpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "max")?;
        for c in &self.objective {
            write!(f, " {c}")?;
        }
        writeln!(f)?;
        for row in &self.constraints {
            write!(f, "row")?;
            for a in &row.coefficients {
                write!(f, " {a}")?;
            }
            writeln!(f, " {} {}", row.relation.symbol(), row.rhs)?;
        }
        for (j, u) in self.upper_bounds.iter().enumerate() {
            if u.is_finite() {
                writeln!(f, "upper {j} {u}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for LpProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_num = |tok: &str, line: usize| -> Result<f64> {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a number, got `{tok}`"),
            })
        };
        let mut problem: Option<LpProblem> = None;
        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let keyword = tokens.next().unwrap_or_default();
            let rest: Vec<&str> = tokens.collect();
            match keyword {
                "max" => {
                    if problem.is_some() {
                        return Err(Error::Parse {
                            line,
                            message: "duplicate `max` line".into(),
                        });
                    }
                    let c = rest.iter().map(|t| parse_num(t, line)).collect::<Result<Vec<_>>>()?;
                    problem = Some(LpProblem::maximize(c));
                }
                "row" => {
                    let p = need_problem(&mut problem, line)?;
                    let pos = rest
                        .iter()
                        .position(|t| matches!(*t, "<=" | "=" | ">="))
                        .ok_or(Error::Parse {
                            line,
                            message: "row needs one of <=, =, >=".into(),
                        })?;
                    let relation = match rest[pos] {
                        "<=" => Relation::Le,
                        ">=" => Relation::Ge,
                        _ => Relation::Eq,
                    };
                    if rest.len() != pos + 2 {
                        return Err(Error::Parse {
                            line,
                            message: "row needs exactly one right-hand side".into(),
                        });
                    }
                    let coef = rest[..pos].iter().map(|t| parse_num(t, line)).collect::<Result<Vec<_>>>()?;
                    if coef.len() != p.num_vars() {
                        return Err(Error::Parse {
                            line,
                            message: format!("row has {} coefficients, expected {}", coef.len(), p.num_vars()),
                        });
                    }
                    let rhs = parse_num(rest[pos + 1], line)?;
                    p.add_constraint(coef, relation, rhs);
                }
                "upper" => {
                    let p = need_problem(&mut problem, line)?;
                    if rest.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            message: "expected `upper <var> <bound>`".into(),
                        });
                    }
                    let j: usize = rest[0].parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad variable index `{}`", rest[0]),
                    })?;
                    if j >= p.num_vars() {
                        return Err(Error::Parse {
                            line,
                            message: format!("variable {j} out of range"),
                        });
                    }
                    let u = parse_num(rest[1], line)?;
                    p.set_upper_bound(j, u);
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown statement `{other}`"),
                    })
                }
            }
        }
        let p = problem.ok_or(Error::Parse {
            line: 0,
            message: "missing `max` line".into(),
        })?;
        p.validate().map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(p)
    }
}

fn need_problem(p: &mut Option<LpProblem>, line: usize) -> Result<&mut LpProblem> {
    p.as_mut().ok_or(Error::Parse {
        line,
        message: "`max` must come first".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lp(obj: &[f64], rows: &[(&[f64], Relation, f64)]) -> LpProblem {
        let mut p = LpProblem::maximize(obj.to_vec());
        for (a, rel, b) in rows {
            p.add_constraint(a.to_vec(), *rel, *b);
        }
        p
    }

    #[test]
    fn box_problem() {
        let p = lp(&[1.0, 1.0], &[(&[1.0, 0.0], Relation::Le, 1.0), (&[0.0, 1.0], Relation::Le, 2.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert_eq!(s.x, vec![1.0, 2.0]);
    }

    #[test]
    fn infeasible_problem() {
        let p = lp(&[1.0], &[(&[1.0], Relation::Ge, 1.0), (&[1.0], Relation::Le, 0.0)]);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn polytope_vertex() {
        let p = lp(
            &[1.0, 2.0],
            &[
                (&[1.0, 1.0], Relation::Le, 4.0),
                (&[1.0, 0.0], Relation::Le, 3.0),
                (&[0.0, 1.0], Relation::Le, 3.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective - 7.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn same_vertex_with_implicit_bounds() {
        let mut p = lp(&[1.0, 2.0], &[(&[1.0, 1.0], Relation::Le, 4.0)]);
        p.set_upper_bound(0, 3.0).set_upper_bound(1, 3.0);
        let s = solve(&p).unwrap();
        assert!((s.objective - 7.0).abs() < 1e-12);
        assert_eq!(s.x, vec![1.0, 3.0]);
    }

    #[test]
    fn unbounded_problem() {
        let p = lp(&[1.0, 0.0], &[(&[0.0, 1.0], Relation::Le, 1.0)]);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // max x + y, x - y = -1, x + y <= 5  ->  x = 2, y = 3
        let p = lp(&[1.0, 1.0], &[(&[1.0, -1.0], Relation::Eq, -1.0), (&[1.0, 1.0], Relation::Le, 5.0)]);
        let s = solve(&p).unwrap();
        assert!((s.objective - 5.0).abs() < 1e-12);
        assert!(p.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let p = lp(
            &[1.0, 1.0],
            &[
                (&[1.0, 1.0], Relation::Eq, 2.0),
                (&[2.0, 2.0], Relation::Eq, 4.0),
                (&[1.0, 0.0], Relation::Le, 1.5),
            ],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!(p.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn degenerate_zero_optimum() {
        // equal-split rows with one dead branch force the all-zero vertex
        let mut p = lp(
            &[1.0, 1.0],
            &[(&[1.0, -1.0], Relation::Eq, 0.0)],
        );
        p.set_upper_bound(0, 3.0).set_upper_bound(1, 0.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn weak_duality_bounds() {
        // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
        // dual y = (2, 0, 1) is feasible: 2 + 1 >= 3, 2 >= 2; bound 2*4 + 3 = 11
        let p = lp(
            &[3.0, 2.0],
            &[
                (&[1.0, 1.0], Relation::Le, 4.0),
                (&[1.0, 3.0], Relation::Le, 6.0),
                (&[1.0, 0.0], Relation::Le, 3.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert!(s.objective <= 11.0 + 1e-9);
        assert!((s.objective - 11.0).abs() < 1e-9);
        // looser dual (3, 0, 0): bound 12
        assert!(s.objective <= 12.0);
    }

    #[test]
    fn rejects_malformed() {
        let p = lp(&[1.0, 1.0], &[(&[1.0], Relation::Le, 1.0)]);
        assert!(matches!(solve(&p), Err(Error::InvalidParameter(_))));
        let mut p = LpProblem::maximize(vec![1.0]);
        p.set_upper_bound(0, -1.0);
        assert!(solve(&p).is_err());
    }

    #[test]
    fn text_format() {
        let mut p = lp(&[1.0, 2.5], &[(&[1.0, 1.0], Relation::Le, 4.0), (&[1.0, -1.0], Relation::Ge, -2.0)]);
        p.set_upper_bound(1, 3.0);
        let text = p.to_string();
        assert_eq!(text, "max 1 2.5\nrow 1 1 <= 4\nrow 1 -1 >= -2\nupper 1 3\n");
        assert_eq!(text.parse::<LpProblem>().unwrap(), p);

        let err = "max 1 1\nrow 1 x <= 2\n".parse::<LpProblem>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!("row 1 <= 2\n".parse::<LpProblem>().is_err());
        assert!("max 1\nupper 3 1\n".parse::<LpProblem>().is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(
            obj in prop::collection::vec(-5.0f64..5.0, 1..5),
            rows in prop::collection::vec((prop::collection::vec(-5.0f64..5.0, 5), 0u8..3, -5.0f64..5.0), 0..5),
        ) {
            let n = obj.len();
            let mut p = LpProblem::maximize(obj);
            for (a, r, b) in rows {
                let rel = [Relation::Le, Relation::Eq, Relation::Ge][r as usize];
                p.add_constraint(a[..n].to_vec(), rel, b);
            }
            p.set_upper_bound(0, 2.0);
            prop_assert_eq!(p.to_string().parse::<LpProblem>().unwrap(), p);
        }

        #[test]
        fn optimal_solutions_are_feasible(
            obj in prop::collection::vec(-5.0f64..5.0, 3),
            rows in prop::collection::vec((prop::collection::vec(-5.0f64..5.0, 3), 0u8..3, -5.0f64..5.0), 0..5),
        ) {
            let mut p = LpProblem::maximize(obj);
            for (a, r, b) in rows {
                let rel = [Relation::Le, Relation::Eq, Relation::Ge][r as usize];
                p.add_constraint(a, rel, b);
            }
            for j in 0..3 {
                p.set_upper_bound(j, 4.0);
            }
            let s = solve(&p).unwrap();
            prop_assert_ne!(s.status, LpStatus::Unbounded);
            if s.status == LpStatus::Optimal {
                prop_assert!(p.max_violation(&s.x) <= 1e-8);
            }
        }
    }
}
