//! Gaussian sensing ensembles, one-bit quantizers and the lifting of
//! thresholded measurements to plain sign measurements in `R^{n+1}`.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::{self, derive_seed};
use crate::{io, Matrix, Vector};

const MATRIX_STREAM: u64 = 0x4d41_5452;
const THRESHOLD_STREAM: u64 = 0x5441_5553;

/// `sgn` with the convention `sgn(0) = +1`.
pub fn sgn(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Gaussian measurement matrix with optional Gaussian thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble {
    a: Matrix,
    seed: u64,
    sigma: f64,
    tau: Option<Vector>,
}

impl SensingEnsemble {
    /// `m×n` matrix with i.i.d. standard normal entries.
    pub fn sample(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::param("ensemble dimensions must be at least 1"));
        }
        let mut rng = rng::rng(derive_seed(seed, &[MATRIX_STREAM]));
        let a = Matrix::from_fn(m, n, |_, _| rng::gaussian(&mut rng));
        Ok(SensingEnsemble {
            a,
            seed,
            sigma: 0.0,
            tau: None,
        })
    }

    /// Draws thresholds `τ_i ~ N(0, σ²)` from a stream independent of `A`.
    pub fn with_thresholds(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("threshold scale must be positive, got {sigma}")));
        }
        let mut rng = rng::rng(derive_seed(self.seed, &[THRESHOLD_STREAM]));
        self.tau = Some(Vector::from_fn(self.a.nrows(), |_, _| {
            sigma * rng::gaussian(&mut rng)
        }));
        self.sigma = sigma;
        Ok(self)
    }

    /// Ensemble from explicit parts, e.g. hand-built test instances.
    pub fn from_parts(a: Matrix, tau: Option<Vector>, sigma: f64) -> Result<Self> {
        if let Some(t) = &tau {
            if t.len() != a.nrows() {
                return Err(Error::dims("thresholds", a.nrows(), t.len()));
            }
        }
        if sigma < 0.0 {
            return Err(Error::param("threshold scale must be non-negative"));
        }
        Ok(SensingEnsemble {
            a,
            seed: 0,
            sigma,
            tau,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn thresholds(&self) -> Option<&Vector> {
        self.tau.as_ref()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of measurements `m`.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Signal dimension `n`.
    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// `A' = (√(2/π)/m) A`.
    pub fn renormalized(&self) -> Matrix {
        &self.a * ((2.0 / PI).sqrt() / self.a.nrows() as f64)
    }

    /// `A' = (√(π/2)/m) A`, the scaling with `E‖A'f‖₁ = ‖f‖₂`.
    ///
    /// Under [`renormalized`](Self::renormalized) the ℓ₁ norm concentrates at
    /// `(2/π)‖f‖₂` instead, so sign-product and ℓ₁-isometry deviations never
    /// fall below `1 − 2/π`.
    pub fn isometric(&self) -> Matrix {
        &self.a * ((PI / 2.0).sqrt() / self.a.nrows() as f64)
    }

    /// Lifted matrix `Ã = [A | −τ/σ]`.
    pub fn lift(&self) -> Result<Matrix> {
        let tau = self
            .tau
            .as_ref()
            .ok_or_else(|| Error::param("lifting needs thresholds"))?;
        lift_matrix(&self.a, tau, self.sigma)
    }

    /// Writes `A` in the matrix CSV format, followed by a line of thresholds
    /// when present.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        io::write_matrix(&mut w, &self.a, &format!("gaussian-{}", self.seed))?;
        if let Some(tau) = &self.tau {
            io::write_vector_line(&mut w, tau)?;
        }
        Ok(())
    }
}

pub fn lift_matrix(a: &Matrix, tau: &Vector, sigma: f64) -> Result<Matrix> {
    if !(sigma > 0.0) {
        return Err(Error::param(format!("lifting needs sigma > 0, got {sigma}")));
    }
    if tau.len() != a.nrows() {
        return Err(Error::dims("lift", a.nrows(), tau.len()));
    }
    let (m, n) = a.shape();
    let mut lifted = Matrix::zeros(m, n + 1);
    lifted.view_mut((0, 0), (m, n)).copy_from(a);
    lifted.set_column(n, &(-tau / sigma));
    Ok(lifted)
}

/// Lifted signal `f̃ = [f; σ]`.
pub fn lift_signal(f: &Vector, sigma: f64) -> Result<Vector> {
    if !(sigma > 0.0) {
        return Err(Error::param(format!("lifting needs sigma > 0, got {sigma}")));
    }
    Ok(Vector::from_iterator(
        f.len() + 1,
        f.iter().copied().chain(std::iter::once(sigma)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerModel {
    /// `y = sgn(A f)`.
    Sign,
    /// `y = sgn(A f − τ)`.
    Dithered,
}

/// One-bit measurement vector, entries exactly ±1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneBitObservation {
    y: Vec<i8>,
    model: QuantizerModel,
    seed: u64,
}

impl OneBitObservation {
    pub fn new(y: Vec<i8>, model: QuantizerModel) -> Result<Self> {
        if let Some(bad) = y.iter().find(|v| **v != 1 && **v != -1) {
            return Err(Error::param(format!("observation entry {bad} is not +-1")));
        }
        Ok(OneBitObservation { y, model, seed: 0 })
    }

    pub fn signs(&self) -> &[i8] {
        &self.y
    }

    pub fn model(&self) -> QuantizerModel {
        self.model
    }

    /// Seed of the ensemble that produced the observation.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn to_vector(&self) -> Vector {
        Vector::from_iterator(self.y.len(), self.y.iter().map(|&v| v as f64))
    }

    pub fn write_line<W: Write>(&self, mut w: W) -> Result<()> {
        let line: Vec<&str> = self
            .y
            .iter()
            .map(|&v| if v > 0 { "1" } else { "-1" })
            .collect();
        writeln!(w, "{}", line.join(","))?;
        Ok(())
    }

    pub fn parse_line(line: &str, model: QuantizerModel) -> Result<Self> {
        let y = line
            .trim()
            .split(',')
            .map(|tok| match tok.trim() {
                "1" | "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("expected +-1, found {other:?}"),
                }),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(y, model)
    }
}

/// Signs of `A f`.
pub fn sign_measure(e: &SensingEnsemble, f: &Vector) -> Result<OneBitObservation> {
    if f.len() != e.cols() {
        return Err(Error::dims("sign_measure", e.cols(), f.len()));
    }
    let y = (&e.a * f).iter().map(|&v| sgn(v)).collect();
    Ok(OneBitObservation {
        y,
        model: QuantizerModel::Sign,
        seed: e.seed,
    })
}

/// Signs of `A f − τ`.
pub fn dithered_measure(e: &SensingEnsemble, f: &Vector) -> Result<OneBitObservation> {
    if f.len() != e.cols() {
        return Err(Error::dims("dithered_measure", e.cols(), f.len()));
    }
    let tau = e
        .tau
        .as_ref()
        .ok_or_else(|| Error::param("dithered measurement needs thresholds"))?;
    let y = (&e.a * f - tau).iter().map(|&v| sgn(v)).collect();
    Ok(OneBitObservation {
        y,
        model: QuantizerModel::Dithered,
        seed: e.seed,
    })
}
