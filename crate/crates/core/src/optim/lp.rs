//! General-form linear programs over free variables.

use std::io::Write;

use super::simplex::{solve_standard, StdStatus};
use super::{SolverReport, SolverStatus};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// `min cᵀv s.t. G v = h, P v ≥ q` with `v` free.
///
/// Sign restrictions on variables are written as rows of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vector,
    pub eq_matrix: Matrix,
    pub eq_rhs: Vector,
    pub ineq_matrix: Matrix,
    pub ineq_rhs: Vector,
}

/// Which standard-form problem the simplex core works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpRoute {
    /// Pick whichever tableau is smaller.
    #[default]
    Auto,
    /// Split free variables and add one surplus per inequality.
    Primal,
    /// Solve the dual problem; its tableau has one row per variable.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub route: LpRoute,
    /// Defaults to `50 · (variables + constraints)`.
    pub max_iterations: Option<usize>,
    pub feasibility_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            route: LpRoute::Auto,
            max_iterations: None,
            feasibility_tol: 1e-8,
        }
    }
}

impl LinearProgram {
    /// Program with no constraints yet.
    pub fn new(objective: Vector) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_matrix: Matrix::zeros(0, n),
            eq_rhs: Vector::zeros(0),
            ineq_matrix: Matrix::zeros(0, n),
            ineq_rhs: Vector::zeros(0),
        }
    }

    pub fn with_equalities(mut self, g: Matrix, h: Vector) -> Self {
        self.eq_matrix = g;
        self.eq_rhs = h;
        self
    }

    pub fn with_inequalities(mut self, p: Matrix, q: Vector) -> Self {
        self.ineq_matrix = p;
        self.ineq_rhs = q;
        self
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rhs.len() + self.ineq_rhs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_variables();
        if self.eq_matrix.ncols() != n {
            return Err(Error::dims("equality matrix columns", n, self.eq_matrix.ncols()));
        }
        if self.ineq_matrix.ncols() != n {
            return Err(Error::dims("inequality matrix columns", n, self.ineq_matrix.ncols()));
        }
        if self.eq_matrix.nrows() != self.eq_rhs.len() {
            return Err(Error::dims("equality rhs", self.eq_matrix.nrows(), self.eq_rhs.len()));
        }
        if self.ineq_matrix.nrows() != self.ineq_rhs.len() {
            return Err(Error::dims(
                "inequality rhs",
                self.ineq_matrix.nrows(),
                self.ineq_rhs.len(),
            ));
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.eq_matrix.iter().all(|v| v.is_finite())
            && self.eq_rhs.iter().all(|v| v.is_finite())
            && self.ineq_matrix.iter().all(|v| v.is_finite())
            && self.ineq_rhs.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("linear program has non-finite entries"));
        }
        Ok(())
    }

    /// Largest violation of any constraint at `v`.
    pub fn max_violation(&self, v: &Vector) -> f64 {
        let eq = (&self.eq_matrix * v - &self.eq_rhs).amax();
        let ineq = (&self.ineq_rhs - &self.ineq_matrix * v)
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x));
        if self.eq_rhs.is_empty() {
            ineq
        } else {
            eq.max(ineq)
        }
    }

    /// The dual `max hᵀλ + qᵀμ s.t. Gᵀλ + Pᵀμ = c, μ ≥ 0`, written as a
    /// minimization over `(λ, μ)`.
    pub fn dual(&self) -> LinearProgram {
        let (k, p) = (self.eq_rhs.len(), self.ineq_rhs.len());
        let mut objective = Vector::zeros(k + p);
        objective.rows_mut(0, k).copy_from(&(-&self.eq_rhs));
        objective.rows_mut(k, p).copy_from(&(-&self.ineq_rhs));
        let mut g = Matrix::zeros(self.num_variables(), k + p);
        g.columns_mut(0, k).copy_from(&self.eq_matrix.transpose());
        g.columns_mut(k, p).copy_from(&self.ineq_matrix.transpose());
        let mut nonneg = Matrix::zeros(p, k + p);
        nonneg.view_mut((0, k), (p, p)).fill_with_identity();
        LinearProgram::new(objective)
            .with_equalities(g, self.objective.clone())
            .with_inequalities(nonneg, Vector::zeros(p))
    }

    /// Debug dump: an `objective` line, then one line per constraint with
    /// its kind (`eq` or `ge`), coefficients and right-hand side.
    pub fn write_tableau<W: Write>(&self, mut w: W) -> Result<()> {
        let join = |it: &mut dyn Iterator<Item = f64>| {
            it.map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",")
        };
        writeln!(w, "objective,{}", join(&mut self.objective.iter().copied()))?;
        for (row, rhs) in self.eq_matrix.row_iter().zip(self.eq_rhs.iter()) {
            writeln!(w, "eq,{},{rhs:.16e}", join(&mut row.iter().copied()))?;
        }
        for (row, rhs) in self.ineq_matrix.row_iter().zip(self.ineq_rhs.iter()) {
            writeln!(w, "ge,{},{rhs:.16e}", join(&mut row.iter().copied()))?;
        }
        Ok(())
    }
}

/// `min ‖D*h‖₁ s.t. C h ≥ c` and optionally `gᵀh = γ`, as a linear program in
/// `(h, w)` with `−w ≤ D*h ≤ w`. The first `n` entries of a solution are `h`.
pub fn analysis_l1_program(
    d: &Matrix,
    cone: &Matrix,
    cone_rhs: &Vector,
    equality: Option<(&Vector, f64)>,
) -> LinearProgram {
    let (n, big_n) = d.shape();
    let m = cone.nrows();
    let vars = n + big_n;
    let mut c = Vector::zeros(vars);
    c.rows_mut(n, big_n).fill(1.0);
    let dt = d.transpose();
    let mut p = Matrix::zeros(2 * big_n + m, vars);
    let mut q = Vector::zeros(2 * big_n + m);
    p.view_mut((0, 0), (big_n, n)).copy_from(&(-&dt));
    p.view_mut((0, n), (big_n, big_n)).fill_with_identity();
    p.view_mut((big_n, 0), (big_n, n)).copy_from(&dt);
    p.view_mut((big_n, n), (big_n, big_n)).fill_with_identity();
    p.view_mut((2 * big_n, 0), (m, n)).copy_from(cone);
    q.rows_mut(2 * big_n, m).copy_from(cone_rhs);
    let lp = LinearProgram::new(c).with_inequalities(p, q);
    match equality {
        Some((g, gamma)) => {
            let mut row = Matrix::zeros(1, vars);
            row.view_mut((0, 0), (1, n)).copy_from(&g.transpose());
            lp.with_equalities(row, Vector::from_element(1, gamma))
        }
        None => lp,
    }
}

fn status_of(s: StdStatus) -> SolverStatus {
    match s {
        StdStatus::Optimal => SolverStatus::Optimal,
        StdStatus::Infeasible => SolverStatus::Infeasible,
        StdStatus::Unbounded => SolverStatus::Unbounded,
        StdStatus::IterationLimit => SolverStatus::IterationLimit,
    }
}

struct RouteResult {
    status: SolverStatus,
    v: Vector,
    iterations: usize,
}

fn solve_primal_route(lp: &LinearProgram, max_iter: usize) -> RouteResult {
    let n = lp.num_variables();
    let (k, p) = (lp.eq_rhs.len(), lp.ineq_rhs.len());
    let cols = 2 * n + p;
    let mut a = Matrix::zeros(k + p, cols);
    a.view_mut((0, 0), (k, n)).copy_from(&lp.eq_matrix);
    a.view_mut((0, n), (k, n)).copy_from(&(-&lp.eq_matrix));
    a.view_mut((k, 0), (p, n)).copy_from(&lp.ineq_matrix);
    a.view_mut((k, n), (p, n)).copy_from(&(-&lp.ineq_matrix));
    for i in 0..p {
        a[(k + i, 2 * n + i)] = -1.0;
    }
    let b: Vec<f64> = lp.eq_rhs.iter().chain(lp.ineq_rhs.iter()).copied().collect();
    let mut c = vec![0.0; cols];
    for j in 0..n {
        c[j] = lp.objective[j];
        c[n + j] = -lp.objective[j];
    }
    let sol = solve_standard(&a, &b, &c, max_iter);
    let v = Vector::from_fn(n, |j, _| sol.x[j] - sol.x[n + j]);
    RouteResult {
        status: status_of(sol.status),
        v,
        iterations: sol.iterations,
    }
}

fn solve_dual_route(lp: &LinearProgram, max_iter: usize) -> RouteResult {
    let n = lp.num_variables();
    let (k, p) = (lp.eq_rhs.len(), lp.ineq_rhs.len());
    // min dᵀz s.t. M z = c, z ≥ 0 with M = [Gᵀ, −Gᵀ, Pᵀ], d = [−h, h, −q].
    let cols = 2 * k + p;
    let mut m = Matrix::zeros(n, cols);
    m.view_mut((0, 0), (n, k)).copy_from(&lp.eq_matrix.transpose());
    m.view_mut((0, k), (n, k)).copy_from(&(-lp.eq_matrix.transpose()));
    m.view_mut((0, 2 * k), (n, p)).copy_from(&lp.ineq_matrix.transpose());
    let mut d = vec![0.0; cols];
    for i in 0..k {
        d[i] = -lp.eq_rhs[i];
        d[k + i] = lp.eq_rhs[i];
    }
    for i in 0..p {
        d[2 * k + i] = -lp.ineq_rhs[i];
    }
    let sol = solve_standard(&m, lp.objective.as_slice(), &d, max_iter);
    let status = match sol.status {
        StdStatus::Optimal => SolverStatus::Optimal,
        // An unbounded dual certifies primal infeasibility.
        StdStatus::Unbounded => SolverStatus::Infeasible,
        // An infeasible dual leaves primal infeasible or unbounded open; the
        // primal route settles it.
        StdStatus::Infeasible => return solve_primal_route(lp, max_iter),
        StdStatus::IterationLimit => SolverStatus::IterationLimit,
    };
    RouteResult {
        status,
        v: -Vector::from_vec(sol.duals),
        iterations: sol.iterations,
    }
}

fn prefers_dual(lp: &LinearProgram) -> bool {
    let n = lp.num_variables();
    let (k, p) = (lp.eq_rhs.len(), lp.ineq_rhs.len());
    let primal_size = (k + p) * (2 * n + p + k + p);
    let dual_size = n * (2 * k + p + n);
    dual_size < primal_size
}

/// Solves a linear program with the dense simplex method.
///
/// Infeasible, unbounded and capped runs are reported through
/// [`SolverReport::status`]; `Err` is reserved for malformed programs. A
/// status of [`SolverStatus::Optimal`] guarantees the returned point violates
/// no constraint by more than the feasibility tolerance; a numerically
/// inaccurate vertex is reported as [`SolverStatus::IterationLimit`].
pub fn solve_lp_with(lp: &LinearProgram, opts: &LpOptions) -> Result<(Vector, SolverReport)> {
    lp.validate()?;
    let max_iter = opts
        .max_iterations
        .unwrap_or(50 * (lp.num_variables() + lp.num_constraints()));
    let use_dual = match opts.route {
        LpRoute::Auto => prefers_dual(lp),
        LpRoute::Primal => false,
        LpRoute::Dual => true,
    };
    let mut res = if use_dual {
        solve_dual_route(lp, max_iter)
    } else {
        solve_primal_route(lp, max_iter)
    };
    let mut violation = lp.max_violation(&res.v);
    if res.status == SolverStatus::Optimal && violation > opts.feasibility_tol {
        let other = if use_dual {
            solve_primal_route(lp, max_iter)
        } else {
            solve_dual_route(lp, max_iter)
        };
        let other_violation = lp.max_violation(&other.v);
        if other.status == SolverStatus::Optimal && other_violation <= opts.feasibility_tol {
            res = RouteResult {
                iterations: res.iterations + other.iterations,
                ..other
            };
            violation = other_violation;
        } else {
            res.status = SolverStatus::IterationLimit;
        }
    }
    let report = SolverReport {
        status: res.status,
        iterations: res.iterations,
        objective_value: lp.objective.dot(&res.v),
        max_constraint_violation: violation,
    };
    Ok((res.v, report))
}

pub fn solve_lp(lp: &LinearProgram) -> Result<(Vector, SolverReport)> {
    solve_lp_with(lp, &LpOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    const ROUTES: [LpRoute; 3] = [LpRoute::Auto, LpRoute::Primal, LpRoute::Dual];

    fn solve(lp: &LinearProgram, route: LpRoute) -> (Vector, SolverReport) {
        solve_lp_with(
            lp,
            &LpOptions {
                route,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn single_bound() {
        let lp = LinearProgram::new(v(&[1.0])).with_inequalities(m(1, 1, &[1.0]), v(&[1.0]));
        for route in ROUTES {
            let (x, rep) = solve(&lp, route);
            assert_eq!(rep.status, SolverStatus::Optimal);
            assert!((x[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_constraint() {
        let lp = LinearProgram::new(v(&[1.0, 1.0]))
            .with_equalities(m(1, 2, &[1.0, 1.0]), v(&[1.0]))
            .with_inequalities(Matrix::identity(2, 2), v(&[0.0, 0.0]));
        for route in ROUTES {
            let (x, rep) = solve(&lp, route);
            assert_eq!(rep.status, SolverStatus::Optimal);
            assert!((rep.objective_value - 1.0).abs() < 1e-12);
            assert!(x.iter().all(|&c| c >= -1e-12));
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x >= 1 and -x >= 0.
        let infeasible =
            LinearProgram::new(v(&[1.0])).with_inequalities(m(2, 1, &[1.0, -1.0]), v(&[1.0, 0.0]));
        // min -x s.t. x >= 0.
        let unbounded =
            LinearProgram::new(v(&[-1.0])).with_inequalities(m(1, 1, &[1.0]), v(&[0.0]));
        for route in ROUTES {
            assert_eq!(solve(&infeasible, route).1.status, SolverStatus::Infeasible);
            assert_eq!(solve(&unbounded, route).1.status, SolverStatus::Unbounded);
        }
    }

    #[test]
    fn malformed_programs_are_errors() {
        let lp = LinearProgram::new(v(&[1.0, 2.0])).with_inequalities(m(1, 1, &[1.0]), v(&[0.0]));
        assert!(solve_lp(&lp).is_err());
        let lp = LinearProgram::new(v(&[f64::NAN]));
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn tableau_dump_has_one_line_per_constraint() {
        let lp = LinearProgram::new(v(&[1.0, 1.0]))
            .with_equalities(m(1, 2, &[1.0, 1.0]), v(&[1.0]))
            .with_inequalities(Matrix::identity(2, 2), v(&[0.0, 0.0]));
        let mut buf = Vec::new();
        lp.write_tableau(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("objective,"));
        assert!(lines[1].starts_with("eq,"));
        assert_eq!(lines[3].split(',').count(), 4);
    }
}
