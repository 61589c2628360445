//! Recovery algorithms.
//!
//! Direction only, from `y = sgn(Af)`:
//! * [`lp_direction`]: `min ‖D*h‖₁ s.t. y_i(Ah)_i ≥ 0, Σ y_i(Ah)_i = 1`.
//! * [`ht_direction`]: `D·H_t(D*A*y)`.
//!
//! Direction and magnitude, from `y = sgn(Af − τ)`:
//! * [`lp_full`]: the direction program on the lifted problem, rescaled by the
//!   lifted coordinate.
//! * [`socp_full`]: `min ‖D*h‖₁` over the sign cone intersected with a ball.
//! * [`ht_full`]: `(−σ²/⟨τ,y⟩)·D·H_{t−1}(D*A*y)`.

use crate::error::{DegenerateKind, Error, Result};
use crate::frames::TightFrame;
use crate::measure::lift_matrix;
use crate::optim::{
    analysis_l1_program, solve_cone_ball_l1, solve_lp, ConeBallOptions, SolverReport,
};
use crate::signals::hard_threshold;
use crate::{Matrix, Vector};

/// Allowed violation of the sign constraints and of the normalization in the
/// post-solve checks.
pub const CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    Solver(SolverReport),
    Thresholding {
        t: usize,
        /// `⟨τ, y⟩` for the full-recovery variant.
        tau_y: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOutput {
    pub f_hat: Vector,
    /// Only the direction of `f_hat` is meaningful.
    pub direction_only: bool,
    pub diagnostics: Diagnostics,
}

fn check_inputs(d: &TightFrame, a: &Matrix, y: &[i8]) -> Result<()> {
    if a.ncols() != d.rows() {
        return Err(Error::dims("measurement columns vs frame rows", d.rows(), a.ncols()));
    }
    if y.len() != a.nrows() {
        return Err(Error::dims("observation length", a.nrows(), y.len()));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::param("observations must be ±1"));
    }
    Ok(())
}

fn check_thresholds(a: &Matrix, tau: &Vector, sigma: f64) -> Result<()> {
    if tau.len() != a.nrows() {
        return Err(Error::dims("threshold length", a.nrows(), tau.len()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// `D*A*y`.
fn back_projection(d: &TightFrame, a: &Matrix, y: &[i8]) -> Vector {
    let yv = Vector::from_iterator(y.len(), y.iter().map(|&v| f64::from(v)));
    d.matrix().tr_mul(&a.tr_mul(&yv))
}

/// Minimizer of `‖D*h‖₁` over `{h : y_i(Ah)_i ≥ 0, Σ y_i(Ah)_i = 1}`, with
/// both constraints verified after the solve.
fn direction_program(d: &Matrix, a: &Matrix, y: &[i8]) -> Result<(Vector, SolverReport)> {
    let n = a.ncols();
    let mut rows = a.clone();
    for (i, mut row) in rows.row_iter_mut().enumerate() {
        row *= f64::from(y[i]);
    }
    // Solved for h' = m·h so that the optimum is of unit order; the cone
    // rows are normalized, which leaves the cone unchanged.
    let m = a.nrows().max(1) as f64;
    let normal = rows.row_sum().transpose() / m;
    let mut cone = rows.clone();
    for mut row in cone.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let lp = analysis_l1_program(d, &cone, &Vector::zeros(a.nrows()), Some((&normal, 1.0)));
    let (v, report) = solve_lp(&lp)?;
    if !report.is_optimal() {
        return Err(Error::Solver(report));
    }
    let h = v.rows(0, n) / m;
    let signed = &rows * &h;
    let worst = signed.min();
    if worst < -CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation(format!(
            "sign constraint violated by {:e}",
            -worst
        )));
    }
    let l1 = (a * &h).lp_norm(1);
    if (l1 - 1.0).abs() > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation(format!("‖Ah‖₁ = {l1}, expected 1")));
    }
    Ok((h, report))
}

/// Linear-programming direction estimate from `y = sgn(Af)`.
pub fn lp_direction(d: &TightFrame, a: &Matrix, y: &[i8]) -> Result<RecoveryOutput> {
    check_inputs(d, a, y)?;
    let (f_hat, report) = direction_program(d.matrix(), a, y)?;
    Ok(RecoveryOutput {
        f_hat,
        direction_only: true,
        diagnostics: Diagnostics::Solver(report),
    })
}

/// Hard-thresholding direction estimate `D·H_t(D*A*y)`. Levels above the
/// frame size keep every coefficient.
pub fn ht_direction(d: &TightFrame, a: &Matrix, y: &[i8], t: usize) -> Result<RecoveryOutput> {
    check_inputs(d, a, y)?;
    if t == 0 {
        return Err(Error::param("threshold level must be at least 1"));
    }
    let t = t.min(d.cols());
    let z = hard_threshold(&back_projection(d, a, y), t)?;
    let f_hat = d.synthesis(&z)?;
    if f_hat.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate(DegenerateKind::ZeroThresholded));
    }
    Ok(RecoveryOutput {
        f_hat,
        direction_only: true,
        diagnostics: Diagnostics::Thresholding { t, tau_y: None },
    })
}

/// `⌈16 ε⁻² κ s⌉`.
pub fn choose_t(epsilon: f64, kappa: f64, s: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::param(format!("kappa must be at least 1, got {kappa}")));
    }
    if s == 0 {
        return Err(Error::param("sparsity must be at least 1"));
    }
    let exact = 16.0 * kappa * s as f64 / (epsilon * epsilon);
    // Guard against products such as 128.00000000000003.
    Ok((exact * (1.0 - 1e-12)).ceil() as usize)
}

/// Level for [`ht_full`]: `⌈16 (ε′/8)⁻² κ (s+1)⌉` with
/// `ε′ = rσε / (2(r² + σ²))`.
pub fn choose_t_full(epsilon: f64, kappa: f64, s: usize, r: f64, sigma: f64) -> Result<usize> {
    if !(r > 0.0 && sigma > 0.0) {
        return Err(Error::param("r and sigma must be positive"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let eps_prime = r * sigma * epsilon / (2.0 * (r * r + sigma * sigma));
    choose_t(eps_prime / 8.0, kappa, s + 1)
}

/// Full estimate by linear programming on the lifted problem
/// `(D̃, [A | −τ/σ], y)`: with lifted solution `(ĥ, û)`, returns `(σ/û) ĥ`.
pub fn lp_full(
    d: &TightFrame,
    a: &Matrix,
    tau: &Vector,
    sigma: f64,
    y: &[i8],
) -> Result<RecoveryOutput> {
    check_inputs(d, a, y)?;
    check_thresholds(a, tau, sigma)?;
    let lifted_a = lift_matrix(a, tau, sigma)?;
    let lifted_d = d.lift();
    let (g, report) = direction_program(lifted_d.matrix(), &lifted_a, y)?;
    let n = d.rows();
    let u = g[n];
    if u.abs() <= 1e-12 * g.norm() {
        return Err(Error::Degenerate(DegenerateKind::ZeroLiftedCoordinate));
    }
    Ok(RecoveryOutput {
        f_hat: g.rows(0, n) * (sigma / u),
        direction_only: false,
        diagnostics: Diagnostics::Solver(report),
    })
}

/// Full estimate `min ‖D*h‖₁ s.t. sgn(Ah − τ) = y, ‖h‖₂ ≤ r`.
pub fn socp_full(
    d: &TightFrame,
    a: &Matrix,
    tau: &Vector,
    y: &[i8],
    r: f64,
) -> Result<RecoveryOutput> {
    socp_full_with(d, a, tau, y, r, &ConeBallOptions::default())
}

pub fn socp_full_with(
    d: &TightFrame,
    a: &Matrix,
    tau: &Vector,
    y: &[i8],
    r: f64,
    opts: &ConeBallOptions,
) -> Result<RecoveryOutput> {
    check_inputs(d, a, y)?;
    let (f_hat, report) = solve_cone_ball_l1(d, a, tau, y, r, opts)?;
    if !report.is_optimal() {
        return Err(Error::Solver(report));
    }
    Ok(RecoveryOutput {
        f_hat,
        direction_only: false,
        diagnostics: Diagnostics::Solver(report),
    })
}

/// Full hard-thresholding estimate `(−σ²/⟨τ,y⟩)·D·H_{t−1}(D*A*y)`.
pub fn ht_full(
    d: &TightFrame,
    a: &Matrix,
    tau: &Vector,
    sigma: f64,
    y: &[i8],
    t: usize,
) -> Result<RecoveryOutput> {
    check_inputs(d, a, y)?;
    check_thresholds(a, tau, sigma)?;
    if t == 0 {
        return Err(Error::param("threshold level must be at least 1"));
    }
    let tau_y: f64 = tau.iter().zip(y).map(|(&t, &s)| t * f64::from(s)).sum();
    if tau_y == 0.0 {
        return Err(Error::Degenerate(DegenerateKind::ZeroThresholdCorrelation));
    }
    let level = (t - 1).min(d.cols());
    let z = hard_threshold(&back_projection(d, a, y), level)?;
    let f_hat = d.synthesis(&z)? * (-sigma * sigma / tau_y);
    Ok(RecoveryOutput {
        f_hat,
        direction_only: false,
        diagnostics: Diagnostics::Thresholding {
            t,
            tau_y: Some(tau_y),
        },
    })
}
