//! `min ‖D*h‖₁ s.t. y_i(⟨a_i, h⟩ − τ_i) ≥ 0, ‖h‖₂ ≤ r` by over-relaxed ADMM.
//!
//! The problem is rescaled to `h = r·g` and split as `u = D*g`, `z = Bg`,
//! `b = g`, where `B` holds the rows `y_i a_i / √m`. The `g`-update solves with
//! `2I + BᵀB`, factored once. The `u`, `z` and `b` updates are soft
//! thresholding, per-row clipping and a ball rescale. A final pass of cyclic
//! projections removes the residual infeasibility of the ADMM iterate.

use nalgebra::Cholesky;

use super::{analysis_l1_program, solve_lp, SolverReport, SolverStatus};
use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeBallOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub relaxation: f64,
    pub rho: f64,
    /// Allowed violation of each sign constraint, relative to `‖a_i‖r + |τ_i|`,
    /// and of the ball, relative to `r`.
    pub feasibility_tol: f64,
    pub polish_passes: usize,
    /// Try the ball-free linear program first; its optimum is returned when it
    /// lies inside the ball.
    pub lp_first: bool,
}

impl Default for ConeBallOptions {
    fn default() -> Self {
        ConeBallOptions {
            max_iterations: 10_000,
            tolerance: 1e-9,
            relaxation: 1.6,
            rho: 1.0,
            feasibility_tol: 1e-8,
            polish_passes: 2_000,
            lp_first: true,
        }
    }
}

const MAX_SHED: usize = 4;

fn soft_threshold(v: &mut Vector, k: f64) {
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - k).max(0.0);
    }
}

fn project_ball(v: &mut Vector, radius: f64) {
    let norm = v.norm();
    if norm > radius {
        *v *= radius / norm;
    }
}

struct SignCone {
    /// Rows `y_i a_i`.
    rows: Matrix,
    /// `y_i τ_i`.
    offsets: Vector,
    scales: Vector,
    row_norms_sq: Vector,
}

impl SignCone {
    fn new(a: &Matrix, tau: &Vector, y: &[i8], r: f64) -> Self {
        let mut rows = a.clone();
        for (i, mut row) in rows.row_iter_mut().enumerate() {
            row *= f64::from(y[i]);
        }
        let offsets = Vector::from_fn(a.nrows(), |i, _| f64::from(y[i]) * tau[i]);
        let row_norms_sq = Vector::from_fn(a.nrows(), |i, _| rows.row(i).norm_squared());
        let scales = Vector::from_fn(a.nrows(), |i, _| row_norms_sq[i].sqrt() * r + tau[i].abs());
        SignCone {
            rows,
            offsets,
            scales,
            row_norms_sq,
        }
    }

    /// Largest scaled violation of any sign constraint.
    fn violation(&self, h: &Vector) -> f64 {
        let slack = &self.rows * h - &self.offsets;
        slack
            .iter()
            .zip(self.scales.iter())
            .map(|(&s, &c)| (-s / c.max(f64::MIN_POSITIVE)).max(0.0))
            .fold(0.0, f64::max)
    }
}

fn ball_violation(h: &Vector, r: f64) -> f64 {
    ((h.norm() - r) / r).max(0.0)
}

/// Cyclic projections onto the violated halfspaces and the ball.
fn polish(cone: &SignCone, h: &mut Vector, r: f64, passes: usize, target: f64) -> usize {
    for pass in 0..passes {
        if cone.violation(h) <= target && ball_violation(h, r) <= target {
            return pass;
        }
        for i in 0..cone.rows.nrows() {
            let row = cone.rows.row(i);
            let slack = row.dot(&h.transpose()) - cone.offsets[i];
            // Aim slightly inside the halfspace so rounding keeps it satisfied.
            let margin = 0.1 * target * cone.scales[i];
            if slack < margin && cone.row_norms_sq[i] > 0.0 {
                let step = (margin - slack) / cone.row_norms_sq[i];
                for (hj, &aj) in h.iter_mut().zip(row.iter()) {
                    *hj += step * aj;
                }
            }
        }
        project_ball(h, r);
    }
    passes
}

/// Zero pattern of the analysis coefficients, active sign constraints and
/// whether the ball binds, read off the prox outputs.
#[derive(Debug, Clone, PartialEq)]
struct Pattern {
    signs: Vec<i8>,
    active: Vec<bool>,
    ball: bool,
}

impl Pattern {
    fn read(u: &Vector, z: &Vector, lower: &Vector, ball: bool) -> Self {
        Pattern {
            signs: u.iter().map(|&x| (x > 0.0) as i8 - (x < 0.0) as i8).collect(),
            active: z.iter().zip(lower.iter()).map(|(a, b)| a == b).collect(),
            ball,
        }
    }

    /// Keeps only the active constraints carrying a clearly nonzero multiplier.
    fn strict(&self, lz: &Vector) -> Self {
        let cutoff = 1e-6 * lz.amax();
        Pattern {
            active: self
                .active
                .iter()
                .zip(lz.iter())
                .map(|(&a, &l)| a && l < -cutoff)
                .collect(),
            ..self.clone()
        }
    }
}

/// Minimizer of the program restricted to the face described by `p`, in the
/// rescaled variable `g = h / r`.
fn active_set_point(dm: &Matrix, cone: &SignCone, r: f64, p: &Pattern) -> Option<Vector> {
    let n = dm.nrows();
    let zero: Vec<usize> = (0..p.signs.len()).filter(|&j| p.signs[j] == 0).collect();
    let active: Vec<usize> = (0..p.active.len()).filter(|&i| p.active[i]).collect();
    let k = zero.len() + active.len();
    let mut e = Matrix::zeros(k.max(n), n);
    let mut rhs = Vector::zeros(k.max(n));
    for (row, &j) in zero.iter().enumerate() {
        e.set_row(row, &dm.column(j).transpose());
    }
    for (off, &i) in active.iter().enumerate() {
        e.set_row(zero.len() + off, &cone.rows.row(i));
        rhs[zero.len() + off] = cone.offsets[i] / r;
    }
    for row in 0..k {
        let norm = e.row(row).norm();
        if norm > 0.0 {
            e.row_mut(row).scale_mut(1.0 / norm);
            rhs[row] /= norm;
        }
    }
    let svd = e.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-9 * smax.max(f64::MIN_POSITIVE);
    let mut g = svd.solve(&rhs, tol).ok()?;
    if (&e * &g - &rhs).amax() > 1e-9 {
        return None;
    }
    let v_t = svd.v_t.as_ref()?;
    let null: Vec<Vector> = (0..n)
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if null.is_empty() {
        return Some(g);
    }
    let mut c = Vector::zeros(n);
    for (j, &s) in p.signs.iter().enumerate() {
        if s != 0 {
            c += dm.column(j) * f64::from(s);
        }
    }
    let basis = Matrix::from_columns(&null);
    let cn = basis.tr_mul(&c);
    if cn.norm() > 1e-9 * c.norm().max(1.0) {
        // The objective decreases along the face; only the ball stops it.
        let slack = 1.0 - g.norm_squared();
        if !p.ball || slack < 0.0 {
            return None;
        }
        g -= basis * &cn * (slack.sqrt() / cn.norm());
    }
    Some(g)
}

struct Candidate {
    h: Vector,
    violation: f64,
    objective: f64,
}

impl Candidate {
    fn new(h: Vector, dm: &Matrix, cone: &SignCone, r: f64) -> Self {
        Candidate {
            violation: cone.violation(&h).max(ball_violation(&h, r)),
            objective: dm.tr_mul(&h).lp_norm(1),
            h,
        }
    }
}

/// Feasible candidate from the face of `p` or of its strict variant.
fn face_candidate(
    dm: &Matrix,
    cone: &SignCone,
    r: f64,
    p: &Pattern,
    lz: &Vector,
    target: f64,
) -> Option<Candidate> {
    let mut patterns = vec![p.clone(), p.strict(lz)];
    // Spurious active constraints make the face empty; shed the ones with the
    // weakest multipliers.
    let mut weakest: Vec<usize> = (0..p.active.len()).filter(|&i| p.active[i]).collect();
    weakest.sort_by(|&a, &b| lz[b].total_cmp(&lz[a]));
    let mut shed = p.clone();
    for &i in weakest.iter().take(MAX_SHED) {
        shed.active[i] = false;
        patterns.push(shed.clone());
    }
    for &i in &weakest {
        let mut single = p.clone();
        single.active[i] = false;
        patterns.push(single);
    }
    patterns
        .iter()
        .filter_map(|q| active_set_point(dm, cone, r, q))
        .map(|gs| Candidate::new(gs * r, dm, cone, r))
        .filter(|c| c.violation <= target)
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
}

/// Optimum of the program without the ball, if it exists and fits in the ball.
fn ball_free_optimum(
    dm: &Matrix,
    cone: &SignCone,
    r: f64,
    target: f64,
) -> Option<(Candidate, usize)> {
    let lp = analysis_l1_program(dm, &cone.rows, &cone.offsets, None);
    let (v, rep) = solve_lp(&lp).ok()?;
    if !rep.is_optimal() {
        return None;
    }
    let cand = Candidate::new(v.rows(0, dm.nrows()).into_owned(), dm, cone, r);
    (cand.violation <= target).then_some((cand, rep.iterations))
}

/// Solves the ℓ1 program over the sign cone `{h : sgn(Ah − τ) = y}` (with
/// closed inequalities) intersected with the ball of radius `r`.
///
/// Every few hundred iterations the face identified by the ADMM iterate is
/// solved exactly; once that face is stable and yields a feasible point the
/// run stops. Otherwise the final iterate is projected onto the constraints.
/// The returned report has status `Optimal` only when the point satisfies
/// every constraint to the feasibility tolerance; `Infeasible` means no
/// feasible point was found.
pub fn solve_cone_ball_l1(
    d: &TightFrame,
    a: &Matrix,
    tau: &Vector,
    y: &[i8],
    r: f64,
    opts: &ConeBallOptions,
) -> Result<(Vector, SolverReport)> {
    let (m, n) = a.shape();
    if d.rows() != n {
        return Err(Error::dims("frame rows vs measurement columns", n, d.rows()));
    }
    if tau.len() != m {
        return Err(Error::dims("threshold length", m, tau.len()));
    }
    if y.len() != m {
        return Err(Error::dims("observation length", m, y.len()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("radius must be positive, got {r}")));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::param("observations must be ±1"));
    }
    let dm = d.matrix();
    let big_n = d.cols();
    let cone = SignCone::new(a, tau, y, r);
    let row_scale = 1.0 / (m.max(1) as f64).sqrt();
    let b = &cone.rows * row_scale;
    let lower = &cone.offsets * (row_scale / r);
    let target = 0.1 * opts.feasibility_tol;

    if opts.lp_first {
        if let Some((cand, iterations)) = ball_free_optimum(dm, &cone, r, target) {
            return Ok((
                cand.h,
                SolverReport {
                    status: SolverStatus::Optimal,
                    iterations,
                    objective_value: cand.objective,
                    max_constraint_violation: cand.violation,
                },
            ));
        }
    }

    let gram = b.tr_mul(&b) + Matrix::identity(n, n) * 2.0;
    let chol = Cholesky::new(gram).ok_or_else(|| Error::param("singular ADMM system"))?;

    let mut g = Vector::zeros(n);
    let mut u = Vector::zeros(big_n);
    let mut z = Vector::zeros(m);
    let mut bb = Vector::zeros(n);
    let (mut lu, mut lz, mut lb) = (Vector::zeros(big_n), Vector::zeros(m), Vector::zeros(n));
    let mut rho = opts.rho;
    let alpha = opts.relaxation;
    let dim = (big_n + m + n) as f64;
    let mut iterations = 0;
    let mut last_pattern: Option<Pattern> = None;
    let mut stable = 0;
    let mut early: Option<Candidate> = None;

    while iterations < opts.max_iterations {
        iterations += 1;
        let rhs = dm * (&u - &lu) + b.tr_mul(&(&z - &lz)) + (&bb - &lb);
        g = chol.solve(&rhs);

        let kg_u = dm.tr_mul(&g);
        let kg_z = &b * &g;
        let kg_b = g.clone();
        let relax = |kg: &Vector, w: &Vector| kg * alpha + w * (1.0 - alpha);
        let (ru, rz, rb) = (relax(&kg_u, &u), relax(&kg_z, &z), relax(&kg_b, &bb));

        let (u_old, z_old, b_old) = (u.clone(), z.clone(), bb.clone());
        u = &ru + &lu;
        soft_threshold(&mut u, 1.0 / rho);
        z = &rz + &lz;
        for (zi, &lo) in z.iter_mut().zip(lower.iter()) {
            *zi = zi.max(lo);
        }
        bb = &rb + &lb;
        let ball_binds = bb.norm() >= 1.0;
        project_ball(&mut bb, 1.0);

        lu += &ru - &u;
        lz += &rz - &z;
        lb += &rb - &bb;

        let primal = ((&kg_u - &u).norm_squared()
            + (&kg_z - &z).norm_squared()
            + (&kg_b - &bb).norm_squared())
        .sqrt();
        let du = &u - &u_old;
        let dz = &z - &z_old;
        let db = &bb - &b_old;
        let dual = rho * (dm * &du + b.tr_mul(&dz) + &db).norm();
        let kg_norm =
            (kg_u.norm_squared() + kg_z.norm_squared() + kg_b.norm_squared()).sqrt();
        let w_norm = (u.norm_squared() + z.norm_squared() + bb.norm_squared()).sqrt();
        let lam_norm = rho * (dm * &lu + b.tr_mul(&lz) + &lb).norm();
        let scale_primal = dim.sqrt() + kg_norm.max(w_norm);
        let eps_primal = opts.tolerance * scale_primal;
        let eps_dual = opts.tolerance * (dim.sqrt() + lam_norm);
        if primal <= eps_primal && dual <= eps_dual {
            break;
        }
        if iterations % 100 == 0 {
            let pattern = Pattern::read(&u, &z, &lower, ball_binds);
            if last_pattern.as_ref() == Some(&pattern) {
                stable += 1;
            } else {
                stable = 0;
            }
            if stable >= 2 && primal <= 1e-6 * scale_primal {
                if let Some(cand) = face_candidate(dm, &cone, r, &pattern, &lz, target) {
                    let admm_objective = kg_u.lp_norm(1) * r;
                    if cand.objective <= admm_objective + 1e-6 * (1.0 + admm_objective) {
                        early = Some(cand);
                        break;
                    }
                }
            }
            last_pattern = Some(pattern);
        }
        if iterations % 50 == 0 {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                lu /= factor;
                lz /= factor;
                lb /= factor;
            }
        }
    }

    let best = match early {
        Some(c) => c,
        None => {
            let mut h = &g * r;
            polish(&cone, &mut h, r, opts.polish_passes, target);
            let projected = Candidate::new(h, dm, &cone, r);
            let pattern = Pattern::read(&u, &z, &lower, bb.norm() >= 1.0 - 1e-12);
            match face_candidate(dm, &cone, r, &pattern, &lz, target) {
                Some(c)
                    if projected.violation > opts.feasibility_tol
                        || c.objective < projected.objective =>
                {
                    c
                }
                _ => projected,
            }
        }
    };
    let status = if best.violation <= opts.feasibility_tol {
        SolverStatus::Optimal
    } else {
        SolverStatus::Infeasible
    };
    Ok((
        best.h,
        SolverReport {
            status,
            iterations,
            objective_value: best.objective,
            max_constraint_violation: best.violation,
        },
    ))
}
