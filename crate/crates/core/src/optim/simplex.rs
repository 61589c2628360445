//! Dense two-phase tableau simplex for `min cᵀx s.t. Ax = b, x ≥ 0`.
//!
//! Entering variables follow Dantzig's rule until a run of degenerate pivots
//! is detected, after which Bland's smallest-index rule takes over until the
//! objective strictly improves again. Leaving-variable ties are always broken
//! by the smallest basic index. The tableau is periodically rebuilt from the
//! original data through an LU factorization of the basis to keep round-off
//! from accumulating.

use crate::Matrix;

const PIVOT_TOL: f64 = 1e-9;
const REL_PIVOT_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-9;
const NOISE_TOL: f64 = 1e-7;
const DEGENERATE_STREAK: usize = 50;
const REINVERT_EVERY: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StdStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct StdSolution {
    pub status: StdStatus,
    /// Primal point (length = number of columns of `A`).
    pub x: Vec<f64>,
    /// Simplex multipliers `π` with `Bᵀπ = c_B`, one per row of `A`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

struct Tableau<'a> {
    a: &'a Matrix,
    b: &'a [f64],
    flip: Vec<f64>,
    rows: usize,
    cols: usize,
    width: usize,
    /// Row-major `rows × (width + 1)`; the last column is the right-hand side.
    body: Vec<f64>,
    /// Reduced costs, last entry is minus the objective value.
    reduced: Vec<f64>,
    costs: Vec<f64>,
    basis: Vec<usize>,
    scratch: Vec<f64>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl<'a> Tableau<'a> {
    fn new(a: &'a Matrix, b: &'a [f64]) -> Self {
        let (rows, cols) = a.shape();
        let width = cols + rows;
        let stride = width + 1;
        let flip: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut body = vec![0.0; rows * stride];
        for i in 0..rows {
            let row = &mut body[i * stride..(i + 1) * stride];
            for j in 0..cols {
                row[j] = flip[i] * a[(i, j)];
            }
            row[cols + i] = 1.0;
            row[width] = flip[i] * b[i];
        }
        Tableau {
            a,
            b,
            flip,
            rows,
            cols,
            width,
            body,
            reduced: vec![0.0; stride],
            costs: vec![0.0; width],
            basis: (cols..width).collect(),
            scratch: vec![0.0; stride],
        }
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn rhs(&self, i: usize) -> f64 {
        self.body[i * self.stride() + self.width]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.body[i * self.stride() + j]
    }

    /// Column `j` of `[F A | I]` where `F` flips rows with negative `b`.
    fn ext_column(&self, j: usize) -> Vec<f64> {
        if j < self.cols {
            (0..self.rows).map(|i| self.flip[i] * self.a[(i, j)]).collect()
        } else {
            let mut e = vec![0.0; self.rows];
            e[j - self.cols] = 1.0;
            e
        }
    }

    fn basis_matrix(&self) -> Matrix {
        let mut bm = Matrix::zeros(self.rows, self.rows);
        for (k, &j) in self.basis.iter().enumerate() {
            bm.set_column(k, &nalgebra::DVector::from_vec(self.ext_column(j)));
        }
        bm
    }

    /// `π` solving `Bᵀπ = c_B` in the row-flipped space.
    fn multipliers(&self) -> Option<Vec<f64>> {
        let cb = nalgebra::DVector::from_iterator(
            self.rows,
            self.basis.iter().map(|&j| self.costs[j]),
        );
        let lu = self.basis_matrix().transpose().lu();
        lu.solve(&cb).map(|p| p.as_slice().to_vec())
    }

    /// Rebuilds body and reduced costs from the original data. Returns false
    /// when the basis is numerically singular.
    fn reinvert(&mut self) -> bool {
        let rows = self.rows;
        let Some(binv) = self.basis_matrix().lu().try_inverse() else {
            return false;
        };
        let mut binv_f = binv.clone();
        for (i, mut col) in binv_f.column_iter_mut().enumerate() {
            col *= self.flip[i];
        }
        let structural = &binv_f * self.a;
        let fb = nalgebra::DVector::from_iterator(rows, (0..rows).map(|i| self.b[i]));
        let rhs = &binv_f * fb;
        let stride = self.stride();
        for i in 0..rows {
            let row = &mut self.body[i * stride..(i + 1) * stride];
            for j in 0..self.cols {
                row[j] = structural[(i, j)];
            }
            for k in 0..rows {
                row[self.cols + k] = binv[(i, k)];
            }
            row[self.width] = rhs[i];
        }
        for (k, &j) in self.basis.clone().iter().enumerate() {
            // Clean the basic columns exactly.
            for i in 0..rows {
                self.body[i * stride + j] = if i == k { 1.0 } else { 0.0 };
            }
        }
        self.recompute_reduced()
    }

    fn recompute_reduced(&mut self) -> bool {
        let Some(pi) = self.multipliers() else {
            return false;
        };
        let stride = self.stride();
        // d_j = c_j − πᵀ ext_j
        let mut fpi = vec![0.0; self.rows];
        for i in 0..self.rows {
            fpi[i] = self.flip[i] * pi[i];
        }
        for j in 0..self.cols {
            let col = self.a.column(j);
            let dot: f64 = col.iter().zip(&fpi).map(|(x, y)| x * y).sum();
            self.reduced[j] = self.costs[j] - dot;
        }
        for k in 0..self.rows {
            self.reduced[self.cols + k] = self.costs[self.cols + k] - pi[k];
        }
        let z: f64 = (0..self.rows)
            .map(|i| self.costs[self.basis[i]] * self.body[i * stride + self.width])
            .sum();
        self.reduced[self.width] = -z;
        for &j in &self.basis {
            self.reduced[j] = 0.0;
        }
        true
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let stride = self.stride();
        let piv = self.body[r * stride + j];
        self.scratch
            .copy_from_slice(&self.body[r * stride..(r + 1) * stride]);
        for v in self.scratch.iter_mut() {
            *v /= piv;
        }
        self.scratch[j] = 1.0;
        let pivot_row = &self.scratch;
        for i in 0..self.rows {
            let row = &mut self.body[i * stride..(i + 1) * stride];
            if i == r {
                row.copy_from_slice(pivot_row);
                continue;
            }
            let factor = row[j];
            if factor != 0.0 {
                for (x, p) in row.iter_mut().zip(pivot_row) {
                    *x -= factor * p;
                }
                row[j] = 0.0;
            }
        }
        let factor = self.reduced[j];
        if factor != 0.0 {
            for (x, p) in self.reduced.iter_mut().zip(pivot_row) {
                *x -= factor * p;
            }
            self.reduced[j] = 0.0;
        }
        self.basis[r] = j;
    }

    fn entering(&self, allow_artificial: bool, bland: bool, skipped: &[bool]) -> Option<usize> {
        let limit = if allow_artificial { self.width } else { self.cols };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..limit {
            let d = self.reduced[j];
            if d < -OPT_TOL && !skipped[j] {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, j: usize) -> Option<(usize, f64)> {
        let scale = (0..self.rows).fold(0.0f64, |acc, i| acc.max(self.entry(i, j).abs()));
        let tol = PIVOT_TOL.max(REL_PIVOT_TOL * scale);
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let aij = self.entry(i, j);
            if aij > tol {
                let ratio = self.rhs(i).max(0.0) / aij;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best
    }

    fn run_phase(
        &mut self,
        allow_artificial: bool,
        iterations: &mut usize,
        max_iter: usize,
    ) -> PhaseEnd {
        let mut streak = 0usize;
        let mut since_reinvert = 0usize;
        // Columns whose negative reduced cost is indistinguishable from
        // round-off and which admit no pivot; cleared after every pivot.
        let mut skipped = vec![false; self.width];
        loop {
            if since_reinvert >= REINVERT_EVERY {
                self.reinvert();
                since_reinvert = 0;
            }
            let bland = streak > DEGENERATE_STREAK;
            let Some(j) = self.entering(allow_artificial, bland, &skipped) else {
                if since_reinvert > 0 {
                    self.reinvert();
                    since_reinvert = 0;
                    skipped.fill(false);
                    if self.entering(allow_artificial, bland, &skipped).is_some() {
                        continue;
                    }
                }
                return PhaseEnd::Optimal;
            };
            if *iterations >= max_iter {
                return PhaseEnd::IterationLimit;
            }
            let Some((r, ratio)) = self.leaving(j) else {
                // Phase I is bounded below, so a ray there is round-off.
                if allow_artificial || self.reduced[j] > -NOISE_TOL {
                    skipped[j] = true;
                    continue;
                }
                return PhaseEnd::Unbounded;
            };
            if ratio <= 1e-12 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, j);
            skipped.fill(false);
            *iterations += 1;
            since_reinvert += 1;
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.cols {
                x[j] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}

/// Solves `min cᵀx s.t. Ax = b, x ≥ 0`.
pub(crate) fn solve_standard(a: &Matrix, b: &[f64], c: &[f64], max_iter: usize) -> StdSolution {
    let (rows, cols) = a.shape();
    debug_assert_eq!(b.len(), rows);
    debug_assert_eq!(c.len(), cols);
    let mut tab = Tableau::new(a, b);
    let mut iterations = 0;
    let fail = |status, iterations| StdSolution {
        status,
        x: vec![0.0; cols],
        duals: vec![0.0; rows],
        iterations,
    };

    // Phase I: minimize the sum of artificials.
    for k in 0..rows {
        tab.costs[cols + k] = 1.0;
    }
    tab.recompute_reduced();
    match tab.run_phase(true, &mut iterations, max_iter) {
        PhaseEnd::Optimal => {}
        PhaseEnd::IterationLimit => return fail(StdStatus::IterationLimit, iterations),
        // Phase I is bounded below by zero.
        PhaseEnd::Unbounded => return fail(StdStatus::IterationLimit, iterations),
    }
    let b_scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let infeasibility = -tab.reduced[tab.width];
    if infeasibility > 1e-9 * b_scale {
        return fail(StdStatus::Infeasible, iterations);
    }

    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant and keep their artificial at zero.
    for i in 0..rows {
        if tab.basis[i] >= cols {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..cols {
                let v = tab.entry(i, j).abs();
                if v > 1e-7 && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                tab.pivot(i, j);
            }
        }
    }

    // Phase II.
    for j in 0..tab.width {
        tab.costs[j] = if j < cols { c[j] } else { 0.0 };
    }
    if !tab.reinvert() {
        return fail(StdStatus::IterationLimit, iterations);
    }
    let status = match tab.run_phase(false, &mut iterations, max_iter) {
        PhaseEnd::Optimal => StdStatus::Optimal,
        PhaseEnd::Unbounded => StdStatus::Unbounded,
        PhaseEnd::IterationLimit => StdStatus::IterationLimit,
    };
    if status != StdStatus::Optimal {
        return fail(status, iterations);
    }
    tab.reinvert();
    let x = tab.primal();
    let duals = tab
        .multipliers()
        .map(|pi| pi.iter().zip(&tab.flip).map(|(p, f)| p * f).collect())
        .unwrap_or_else(|| vec![0.0; rows]);
    StdSolution {
        status,
        x,
        duals,
        iterations,
    }
}
