//! One-bit compressive sensing of dictionary-sparse signals.
//!
//! Signals `f ∈ R^n` are sparse with respect to a tight frame `D ∈ R^{n×N}`
//! (`D D* = I_n`) and observed through one-bit measurements, either
//! `y = sgn(A f)` (direction only) or `y = sgn(A f − τ)` with Gaussian
//! thresholds (direction and magnitude).
//!
//! The crate is split along the pipeline:
//!
//! * [`frames`]: tight-frame construction and the analysis/synthesis operators.
//! * [`signals`]: hard thresholding, effective sparsity, ground-truth generation.
//! * [`measure`]: Gaussian ensembles, quantizers and the dimension lifting.
//! * [`optim`]: a dense simplex LP solver and an ADMM solver for ℓ₁
//!   minimization over a sign cone intersected with an ℓ₂ ball.
//! * [`recover`]: the five recovery algorithms.
//! * [`analysis`]: Monte Carlo estimators of the random-matrix properties.
//! * [`bench`]: config-driven experiment harness and CSV persistence.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod frames;
pub mod io;
pub mod measure;
pub mod optim;
pub mod recover;
pub mod rng;
pub mod signals;

pub use error::{DegenerateKind, Error, Result};
pub use frames::TightFrame;
pub use measure::{OneBitObservation, QuantizerModel, SensingEnsemble};
pub use optim::{LinearProgram, SolverReport, SolverStatus};
pub use recover::{Diagnostics, RecoveryOutput};
pub use signals::{GroundTruth, SparsityReport};

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
