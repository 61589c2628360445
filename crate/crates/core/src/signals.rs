//! Sparsity arithmetic and ground-truth signal generation.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::rng::{self, Rng};
use crate::Vector;

/// Indices of the `t` largest-magnitude entries; ties go to the lowest index.
pub fn largest_support(x: &Vector, t: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    order.truncate(t);
    order
}

/// Hard thresholding operator `H_t`: keeps the `t` largest-magnitude entries
/// and zeroes the rest.
pub fn hard_threshold(x: &Vector, t: usize) -> Result<Vector> {
    if t > x.len() {
        return Err(Error::param(format!(
            "threshold level {t} exceeds vector length {}",
            x.len()
        )));
    }
    let mut out = Vector::zeros(x.len());
    for i in largest_support(x, t) {
        out[i] = x[i];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityReport {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
    /// `(‖x‖₁/‖x‖₂)²`.
    pub s_eff: f64,
}

impl SparsityReport {
    /// `‖x‖₁ ≤ √s ‖x‖₂`.
    pub fn is_effectively_sparse(&self, s: f64) -> bool {
        self.l1 <= s.sqrt() * self.l2
    }
}

pub fn effective_sparsity(x: &Vector) -> Result<SparsityReport> {
    let l1 = x.lp_norm(1);
    let l2 = x.norm();
    if l2 == 0.0 {
        return Err(Error::Degenerate(crate::DegenerateKind::ZeroSignal));
    }
    let ratio = l1 / l2;
    Ok(SparsityReport {
        l0: x.iter().filter(|v| **v != 0.0).count(),
        l1,
        l2,
        s_eff: ratio * ratio,
    })
}

/// `‖f/‖f‖₂ − g/‖g‖₂‖₂`, in `[0, 2]`.
pub fn direction_error(f: &Vector, g: &Vector) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::dims("direction_error", f.len(), g.len()));
    }
    let (nf, ng) = (f.norm(), g.norm());
    if nf == 0.0 || ng == 0.0 || !nf.is_finite() || !ng.is_finite() {
        return Err(Error::Degenerate(crate::DegenerateKind::ZeroSignal));
    }
    Ok((f / nf - g / ng).norm())
}

/// A signal together with how it was generated.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub f: Vector,
    /// Generating coefficients, `f = D x`.
    pub x: Option<Vector>,
    /// Nominal sparsity level.
    pub s: usize,
    /// Measured inflation: `max(1, s_eff(D* f)/s)`.
    pub kappa: f64,
    pub norm_r: f64,
}

impl GroundTruth {
    /// The zero signal. Only useful to exercise degenerate paths.
    pub fn zero(n: usize, s: usize) -> Self {
        GroundTruth {
            f: Vector::zeros(n),
            x: None,
            s,
            kappa: 1.0,
            norm_r: 0.0,
        }
    }

    /// Effective analysis sparsity `κ s` bound carried by this signal.
    pub fn analysis_level(&self) -> f64 {
        self.kappa * self.s as f64
    }
}

const SYNTHESIS_ATTEMPTS: usize = 100;
const ANALYSIS_ATTEMPTS: usize = 1000;

/// Random `k`-sparse coefficient vector with standard normal nonzeros on a
/// uniformly random support. A full support consumes no randomness for the
/// index draw.
pub(crate) fn sparse_coefficients(rng: &mut Rng, len: usize, k: usize) -> Vector {
    let mut x = Vector::zeros(len);
    if k >= len {
        for v in x.iter_mut() {
            *v = rng::gaussian(rng);
        }
    } else {
        let mut support = index::sample(rng, len, k).into_vec();
        support.sort_unstable();
        for i in support {
            x[i] = rng::gaussian(rng);
        }
    }
    x
}

fn kappa_of(d: &TightFrame, f: &Vector, s: usize) -> Result<f64> {
    let report = effective_sparsity(&d.analysis(f)?)?;
    Ok((report.s_eff / s as f64).max(1.0))
}

/// `f = D x` with `x` `s`-sparse, rescaled so `‖f‖₂ = r`.
pub fn gen_synthesis_sparse(d: &TightFrame, s: usize, seed: u64, r: f64) -> Result<GroundTruth> {
    if s == 0 || s > d.cols() {
        return Err(Error::param(format!(
            "synthesis sparsity must be in 1..={}, got {s}",
            d.cols()
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("signal norm must be positive, got {r}")));
    }
    let mut rng = rng::rng(seed);
    for _ in 0..SYNTHESIS_ATTEMPTS {
        let x = sparse_coefficients(&mut rng, d.cols(), s);
        let f = d.synthesis(&x)?;
        let norm = f.norm();
        if norm <= 1e-12 * x.norm() || norm == 0.0 {
            continue;
        }
        let scale = r / norm;
        let f = f * scale;
        let x = x * scale;
        let kappa = kappa_of(d, &f, s)?;
        return Ok(GroundTruth {
            f,
            x: Some(x),
            s,
            kappa,
            norm_r: r,
        });
    }
    Err(Error::GenerationFailed {
        attempts: SYNTHESIS_ATTEMPTS,
        reason: "every draw synthesized the zero signal".into(),
    })
}

/// Effectively `s`-analysis-sparse signal (`‖D* f‖₁ ≤ √s ‖D* f‖₂`) with
/// `‖f‖₂ = r`.
///
/// Rejection sampler over synthesis-sparse candidates whose inner sparsity
/// decreases from `s` to 1 over the attempt budget. Generic dictionaries
/// (columns in general position) may admit no such signal for small `s`, in
/// which case this fails.
pub fn gen_analysis_sparse_effective(
    d: &TightFrame,
    s: usize,
    seed: u64,
    r: f64,
) -> Result<GroundTruth> {
    if s == 0 {
        return Err(Error::param("analysis sparsity must be at least 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("signal norm must be positive, got {r}")));
    }
    let start = s.min(d.cols());
    let mut rng = rng::rng(seed);
    for attempt in 0..ANALYSIS_ATTEMPTS {
        let k = (start - attempt * start / ANALYSIS_ATTEMPTS).max(1);
        let x = sparse_coefficients(&mut rng, d.cols(), k);
        let f = d.synthesis(&x)?;
        let norm = f.norm();
        if norm <= 1e-12 * x.norm() || norm == 0.0 {
            continue;
        }
        let report = effective_sparsity(&d.analysis(&f)?)?;
        if !report.is_effectively_sparse(s as f64) {
            continue;
        }
        let scale = r / norm;
        let f = f * scale;
        let kappa = kappa_of(d, &f, s)?;
        return Ok(GroundTruth {
            f,
            x: Some(x * scale),
            s,
            kappa,
            norm_r: r,
        });
    }
    Err(Error::GenerationFailed {
        attempts: ANALYSIS_ATTEMPTS,
        reason: format!(
            "dictionary {} ({}x{}) is unsuitable for effective analysis sparsity {s}",
            d.label(),
            d.rows(),
            d.cols()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vector, rng};
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    /// Best t-term approximation by trying every support of size t.
    fn brute_force_best(x: &Vector, t: usize) -> (f64, Vec<usize>) {
        let n = x.len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != t {
                continue;
            }
            let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let err: f64 = (0..n)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| x[i] * x[i])
                .sum::<f64>()
                .sqrt();
            if err < best.0 {
                best = (err, support);
            }
        }
        best
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(hard_threshold(&v(&[3.0, -1.0, 2.0]), 2).unwrap(), v(&[3.0, 0.0, 2.0]));
        assert_eq!(hard_threshold(&v(&[1.0, -1.0, 1.0]), 2).unwrap(), v(&[1.0, -1.0, 0.0]));
        assert_eq!(hard_threshold(&v(&[1.0, 2.0]), 0).unwrap(), v(&[0.0, 0.0]));
        assert!(hard_threshold(&v(&[1.0, 2.0]), 3).is_err());
    }

    #[test]
    fn threshold_matches_brute_force() {
        let mut r = rng(5);
        for trial in 0..300 {
            let x = gaussian_vector(&mut r, 8);
            let t = 1 + trial % 3;
            let (best_err, best_support) = brute_force_best(&x, t);
            let h = hard_threshold(&x, t).unwrap();
            assert!(((&x - &h).norm() - best_err).abs() < 1e-12);
            let mut support = largest_support(&x, t);
            support.sort_unstable();
            assert_eq!(support, best_support);
        }
    }

    #[test]
    fn effective_sparsity_examples() {
        let e = effective_sparsity(&v(&[0.0, -3.0, 0.0])).unwrap();
        assert_eq!(e.s_eff, 1.0);
        assert_eq!(e.l0, 1);
        let ones = effective_sparsity(&Vector::from_element(7, 1.0)).unwrap();
        assert!((ones.s_eff - 7.0).abs() < 1e-12);
        let sparse = effective_sparsity(&v(&[1.0, 0.0, -5.0, 0.0, 2.0])).unwrap();
        assert!(sparse.s_eff <= 3.0);
        assert!(sparse.is_effectively_sparse(3.0));
        assert!(effective_sparsity(&Vector::zeros(3)).is_err());
    }

    #[test]
    fn direction_error_examples() {
        let f = v(&[1.0, 2.0, -0.5]);
        assert!(direction_error(&f, &(&f * 2.0)).unwrap() < 1e-15);
        assert!((direction_error(&f, &(-&f)).unwrap() - 2.0).abs() < 1e-15);
        let e1 = v(&[1.0, 0.0]);
        let e2 = v(&[0.0, 1.0]);
        assert!((direction_error(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(direction_error(&f, &Vector::zeros(3)).unwrap_err().is_degenerate());
    }

    #[test]
    fn synthesis_signals_meet_their_contract() {
        let d = TightFrame::random(16, 24, 3).unwrap();
        for seed in 0..50 {
            let g = gen_synthesis_sparse(&d, 3, seed, 2.5).unwrap();
            assert!((g.f.norm() - 2.5).abs() < 1e-12);
            let x = g.x.as_ref().unwrap();
            assert!(x.iter().filter(|c| **c != 0.0).count() <= 3);
            assert!((d.synthesis(x).unwrap() - &g.f).norm() < 1e-12);
            let report = effective_sparsity(&d.analysis(&g.f).unwrap()).unwrap();
            assert!(g.kappa >= 1.0);
            assert!(g.analysis_level() >= report.s_eff - 1e-9);
        }
        let id = TightFrame::identity(6).unwrap();
        let g = gen_synthesis_sparse(&id, 1, 4, 1.0).unwrap();
        assert_eq!(g.f.iter().filter(|c| **c != 0.0).count(), 1);
        assert!(gen_synthesis_sparse(&id, 0, 4, 1.0).is_err());
        assert!(gen_synthesis_sparse(&id, 7, 4, 1.0).is_err());
    }

    #[test]
    fn analysis_signals_pass_the_ratio_test() {
        let id = TightFrame::identity(10).unwrap();
        for seed in 0..30 {
            let g = gen_analysis_sparse_effective(&id, 3, seed, 1.0).unwrap();
            let coeffs = id.analysis(&g.f).unwrap();
            assert!(coeffs.lp_norm(1) <= 3f64.sqrt() * coeffs.norm());
            assert!((g.f.norm() - 1.0).abs() < 1e-12);
        }
        let d = TightFrame::random(16, 32, 1).unwrap();
        let accepted = (0..200)
            .filter(|&seed| gen_analysis_sparse_effective(&d, 10, seed, 1.0).is_ok())
            .count();
        assert!(accepted > 0);
    }

    proptest! {
        #[test]
        fn threshold_is_idempotent_and_best(seed in any::<u64>(), t in 0usize..=10) {
            let mut r = rng(seed);
            let x = gaussian_vector(&mut r, 10);
            let h = hard_threshold(&x, t).unwrap();
            prop_assert_eq!(hard_threshold(&h, t).unwrap(), h.clone());
            let err = (&x - &h).norm();
            for _ in 0..50 {
                let z = sparse_coefficients(&mut r, 10, t);
                prop_assert!(err <= (&x - &z).norm() + 1e-12);
            }
            // Tail bound: ||x - H_t x||_2 <= ||x||_1 / (2 sqrt t).
            if t > 0 {
                prop_assert!(err <= x.lp_norm(1) / (2.0 * (t as f64).sqrt()) + 1e-12);
            }
        }

        #[test]
        fn direction_error_is_scale_invariant(
            seed in any::<u64>(), a in 0.01f64..100.0, b in 0.01f64..100.0
        ) {
            let mut r = rng(seed);
            let f = gaussian_vector(&mut r, 6);
            let g = gaussian_vector(&mut r, 6);
            let base = direction_error(&f, &g).unwrap();
            let scaled = direction_error(&(&f * a), &(&g * b)).unwrap();
            prop_assert!((base - scaled).abs() < 1e-12);
            prop_assert!((0.0..=2.0).contains(&base));
        }
    }
}
