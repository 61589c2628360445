//! Tight-frame dictionaries `D ∈ R^{n×N}` with `D D* = I_n`.
//!
//! `D*` is the transpose; the analysis operator maps a signal to its frame
//! coefficients `D* f ∈ R^N` and the synthesis operator maps coefficients
//! back to `D x ∈ R^n`. Tightness makes `D D* f = f` and `‖D* f‖₂ = ‖f‖₂`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng;
use crate::{io, Matrix, Vector};

/// Frobenius tolerance on `D D* − I` accepted by the constructors.
pub const TIGHTNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TightFrame {
    matrix: Matrix,
    label: String,
}

/// Result of [`verify_tight`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessCheck {
    pub residual: f64,
    pub is_tight: bool,
}

/// Frobenius residual `‖D D* − I‖_F` and whether it is at most `tol`.
pub fn verify_tight(d: &Matrix, tol: f64) -> TightnessCheck {
    let gram = d * d.transpose();
    let residual = (gram - Matrix::identity(d.nrows(), d.nrows())).norm();
    TightnessCheck {
        residual,
        is_tight: residual <= tol,
    }
}

impl TightFrame {
    /// Wraps a matrix after checking the tight-frame condition.
    pub fn from_matrix(matrix: Matrix, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() < matrix.nrows() {
            return Err(Error::param(format!(
                "a tight frame needs 1 <= n <= N, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let check = verify_tight(&matrix, TIGHTNESS_TOL);
        if !check.is_tight {
            return Err(Error::param(format!(
                "matrix is not a tight frame: ||DD* - I||_F = {:e}",
                check.residual
            )));
        }
        Ok(TightFrame {
            matrix,
            label: label.into(),
        })
    }

    /// `D = I_n`, which reduces everything to classical one-bit sensing.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        Ok(TightFrame {
            matrix: Matrix::identity(n, n),
            label: "identity".into(),
        })
    }

    /// First `n` rows of the orthogonal factor of a seeded Gaussian `N×N`
    /// matrix.
    pub fn random(n: usize, big_n: usize, seed: u64) -> Result<Self> {
        check_dims(n, big_n)?;
        let mut rng = rng::rng(seed);
        let g = Matrix::from_fn(big_n, big_n, |_, _| rng::gaussian(&mut rng));
        let q = g.qr().q();
        let matrix = q.rows(0, n).into_owned();
        Self::from_matrix(matrix, format!("random-{seed}"))
    }

    /// Real harmonic frame: scaled cosine/sine rows sampled at the `N`
    /// equispaced angles `2πj/N`.
    ///
    /// Odd `n` includes the constant row; `n = N` even includes the
    /// alternating (Nyquist) row. Every column has norm `√(n/N)`.
    pub fn harmonic(n: usize, big_n: usize) -> Result<Self> {
        check_dims(n, big_n)?;
        let nf = big_n as f64;
        let angle = |j: usize| 2.0 * PI * j as f64 / nf;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        let constant = || vec![1.0 / nf.sqrt(); big_n];
        let mut pairs = n / 2;
        if n % 2 == 1 {
            rows.push(constant());
        } else if n == big_n {
            rows.push(constant());
            rows.push(
                (0..big_n)
                    .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt())
                    .collect(),
            );
            pairs -= 1;
        }
        let scale = (2.0 / nf).sqrt();
        for k in 1..=pairs {
            let k = k as f64;
            rows.push((0..big_n).map(|j| scale * (k * angle(j)).cos()).collect());
            rows.push((0..big_n).map(|j| scale * (k * angle(j)).sin()).collect());
        }
        let matrix = Matrix::from_fn(n, big_n, |i, j| rows[i][j]);
        Self::from_matrix(matrix, "harmonic")
    }

    /// Block-diagonal frame `[[A, 0], [0, B]]`.
    pub fn block_diagonal(a: &TightFrame, b: &TightFrame) -> TightFrame {
        let (n1, c1) = a.matrix.shape();
        let (n2, c2) = b.matrix.shape();
        let mut matrix = Matrix::zeros(n1 + n2, c1 + c2);
        matrix.view_mut((0, 0), (n1, c1)).copy_from(&a.matrix);
        matrix.view_mut((n1, c1), (n2, c2)).copy_from(&b.matrix);
        TightFrame {
            matrix,
            label: format!("{}+{}", a.label, b.label),
        }
    }

    /// Lifted dictionary `D̃ = [[D, 0], [0, 1]] ∈ R^{(n+1)×(N+1)}`.
    pub fn lift(&self) -> TightFrame {
        let (n, big_n) = self.matrix.shape();
        let mut matrix = Matrix::zeros(n + 1, big_n + 1);
        matrix.view_mut((0, 0), (n, big_n)).copy_from(&self.matrix);
        matrix[(n, big_n)] = 1.0;
        TightFrame {
            matrix,
            label: format!("lifted-{}", self.label),
        }
    }

    /// Signal dimension `n`.
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of atoms `N`.
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `D* f`.
    pub fn analysis(&self, f: &Vector) -> Result<Vector> {
        if f.len() != self.rows() {
            return Err(Error::dims("analysis", self.rows(), f.len()));
        }
        Ok(self.matrix.tr_mul(f))
    }

    /// `D x`.
    pub fn synthesis(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.cols() {
            return Err(Error::dims("synthesis", self.cols(), x.len()));
        }
        Ok(&self.matrix * x)
    }

    /// Power-iteration estimate of `‖D‖_{2→2}`; equals 1 for a tight frame.
    pub fn operator_norm_estimate(&self, iterations: usize, seed: u64) -> f64 {
        let mut v = rng::unit_vector(&mut rng::rng(seed), self.rows());
        let mut estimate = 0.0;
        for _ in 0..iterations {
            let w = &self.matrix * self.matrix.tr_mul(&v);
            estimate = w.norm().sqrt();
            if w.norm() == 0.0 {
                return 0.0;
            }
            v = w.normalize();
        }
        estimate
    }

    /// Writes the frame as `n,N,label` followed by `n` rows of `N` values.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        io::write_matrix(w, &self.matrix, &self.label)
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (matrix, label) = io::read_matrix(r)?;
        Self::from_matrix(matrix, label)
    }
}

fn check_dims(n: usize, big_n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    if big_n < n {
        return Err(Error::param(format!(
            "a tight frame needs N >= n, got n = {n}, N = {big_n}"
        )));
    }
    Ok(())
}
