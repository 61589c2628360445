//! Monte Carlo estimators for the random-matrix properties behind the
//! recovery guarantees.
//!
//! Every estimator replaces a supremum over a continuous set by a maximum over
//! finitely many samples, so reported constants are lower bounds on the true
//! ones. Samples are drawn from per-sample streams derived from the seed and
//! evaluated in parallel; results do not depend on the thread count.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::measure::sgn;
use crate::rng::{self, derive_seed, Rng};
use crate::signals::{effective_sparsity, gen_analysis_sparse_effective, sparse_coefficients};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Spep,
    Rip1,
    Tes,
    Width,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Spep => "spep",
            Property::Rip1 => "rip1",
            Property::Tes => "tes",
            Property::Width => "width",
        })
    }
}

/// Which sphere [`tes_check`] samples from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sphere {
    /// Unit vectors with `‖D*f‖₁ ≤ √s ‖D*f‖₂`.
    Analysis,
    /// Unit vectors `Dx` with `x` `s`-sparse.
    Synthesis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyEstimate {
    pub property: Property,
    pub s: usize,
    /// `ε` for tessellation, `δ̂` for the ℓ1 isometry, the width estimate for
    /// Gaussian width, and `0` otherwise.
    pub param: f64,
    pub m: usize,
    pub n: usize,
    pub big_n: usize,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub violation_count: usize,
    pub seed: u64,
}

/// Median of a sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

struct Summary {
    min: f64,
    max: f64,
    mean: f64,
    median: f64,
}

fn summarize(values: &[f64]) -> Summary {
    Summary {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        median: median(values),
    }
}

fn check_shapes(a: &Matrix, d: &TightFrame, s: usize, samples: usize) -> Result<()> {
    if a.ncols() != d.rows() {
        return Err(Error::dims("matrix columns vs frame rows", d.rows(), a.ncols()));
    }
    if s == 0 || s > d.cols() {
        return Err(Error::param(format!("sparsity must be in 1..={}, got {s}", d.cols())));
    }
    if samples == 0 {
        return Err(Error::param("need at least one sample"));
    }
    Ok(())
}

/// Unit-norm `Dx` with `x` `s`-sparse, together with `x`.
pub fn synthesis_unit(rng: &mut Rng, d: &TightFrame, s: usize) -> (Vector, Vector) {
    loop {
        let x = sparse_coefficients(rng, d.cols(), s);
        let f = d.matrix() * &x;
        let norm = f.norm();
        if norm > 1e-12 {
            return (f / norm, x / norm);
        }
    }
}

fn sign_pattern(a: &Matrix, f: &Vector) -> Vec<i8> {
    (a * f).iter().map(|&v| sgn(v)).collect()
}

/// `|⟨A′f, sgn(A′g)⟩ − ⟨f, g⟩|` over random unit pairs from `D(Σ_s)`.
///
/// `a_prime` must already be scaled, normally by
/// [`SensingEnsemble::isometric`](crate::SensingEnsemble::isometric).
pub fn spep_deviation(
    a_prime: &Matrix,
    d: &TightFrame,
    s: usize,
    pairs: usize,
    seed: u64,
) -> Result<PropertyEstimate> {
    check_shapes(a_prime, d, s, pairs)?;
    let deviations: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng::rng(derive_seed(seed, &[p as u64]));
            let (f, _) = synthesis_unit(&mut rng, d, s);
            let (g, _) = synthesis_unit(&mut rng, d, s);
            let af = a_prime * &f;
            let sg: f64 = (a_prime * &g)
                .iter()
                .zip(af.iter())
                .map(|(&ag, &x)| f64::from(sgn(ag)) * x)
                .sum();
            (sg - f.dot(&g)).abs()
        })
        .collect();
    let st = summarize(&deviations);
    Ok(PropertyEstimate {
        property: Property::Spep,
        s,
        param: 0.0,
        m: a_prime.nrows(),
        n: d.rows(),
        big_n: d.cols(),
        samples: pairs,
        min: st.min,
        max: st.max,
        mean: st.mean,
        median: st.median,
        violation_count: 0,
        seed,
    })
}

/// Ratios `‖A′f‖₁ / ‖f‖₂` over random `f ∈ D(Σ_s)`; `param` holds
/// `δ̂ = max(1 − min, max − 1)`.
pub fn rip1_ratios(
    a_prime: &Matrix,
    d: &TightFrame,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<PropertyEstimate> {
    check_shapes(a_prime, d, s, trials)?;
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng::rng(derive_seed(seed, &[p as u64]));
            let x = sparse_coefficients(&mut rng, d.cols(), s);
            let f = d.matrix() * &x;
            (a_prime * &f).lp_norm(1) / f.norm()
        })
        .filter(|r| r.is_finite())
        .collect();
    if ratios.is_empty() {
        return Err(Error::param("every sampled signal vanished"));
    }
    let st = summarize(&ratios);
    Ok(PropertyEstimate {
        property: Property::Rip1,
        s,
        param: (1.0 - st.min).max(st.max - 1.0),
        m: a_prime.nrows(),
        n: d.rows(),
        big_n: d.cols(),
        samples: ratios.len(),
        min: st.min,
        max: st.max,
        mean: st.mean,
        median: st.median,
        violation_count: 0,
        seed,
    })
}

const PERTURBATION_ATTEMPTS: usize = 50;

struct TesPair {
    distance: f64,
    hamming: f64,
    collide: bool,
}

fn tes_pair(
    a: &Matrix,
    d: &TightFrame,
    s: usize,
    eps: f64,
    sphere: Sphere,
    p: usize,
    seed: u64,
) -> Result<Option<TesPair>> {
    let mut rng = rng::rng(derive_seed(seed, &[p as u64]));
    let analysis_point = |rng: &mut Rng| -> Result<Vector> {
        let sub = rand::Rng::random::<u64>(rng);
        Ok(gen_analysis_sparse_effective(d, s, sub, 1.0)?.f)
    };
    let (f, x) = match sphere {
        Sphere::Synthesis => {
            let (f, x) = synthesis_unit(&mut rng, d, s);
            (f, Some(x))
        }
        Sphere::Analysis => (analysis_point(&mut rng)?, None),
    };
    let g = if p % 2 == 0 {
        match sphere {
            Sphere::Synthesis => synthesis_unit(&mut rng, d, s).0,
            Sphere::Analysis => analysis_point(&mut rng)?,
        }
    } else {
        let rho = eps * [0.25, 0.5, 1.0][(p / 2) % 3];
        let mut found = None;
        for _ in 0..PERTURBATION_ATTEMPTS {
            let u = match (&x, sphere) {
                // Same support, so the perturbed point stays in D(Σ_s).
                (Some(x), Sphere::Synthesis) => {
                    let mut dx = Vector::zeros(x.len());
                    for (i, &v) in x.iter().enumerate() {
                        if v != 0.0 {
                            dx[i] = rng::gaussian(&mut rng);
                        }
                    }
                    d.matrix() * dx
                }
                _ => rng::gaussian_vector(&mut rng, d.rows()),
            };
            let un = u.norm();
            if un == 0.0 {
                continue;
            }
            let g = &f + u * (rho / un);
            let gn = g.norm();
            if gn == 0.0 {
                continue;
            }
            let g = g / gn;
            let inside = match sphere {
                Sphere::Synthesis => true,
                Sphere::Analysis => effective_sparsity(&d.analysis(&g)?)?
                    .is_effectively_sparse(s as f64),
            };
            if inside {
                found = Some(g);
                break;
            }
        }
        match found {
            Some(g) => g,
            None => return Ok(None),
        }
    };
    let sf = sign_pattern(a, &f);
    let sg = sign_pattern(a, &g);
    let differing = sf.iter().zip(&sg).filter(|(a, b)| a != b).count();
    Ok(Some(TesPair {
        distance: (&f - &g).norm(),
        hamming: differing as f64 / a.nrows().max(1) as f64,
        collide: differing == 0,
    }))
}

/// Counts pairs on the requested sphere with identical sign patterns under
/// `A` but distance above `ε`.
///
/// Even-indexed pairs are independent draws; odd-indexed pairs perturb the
/// first point by `ρ ∈ {ε/4, ε/2, ε}` and renormalize. `max` is the largest
/// distance between colliding points (0 without collisions) and `median` the
/// median normalized Hamming distance. Analysis-sphere perturbations that
/// leave the sphere are redrawn and, failing that, skipped; `samples` counts
/// evaluated pairs.
pub fn tes_check(
    a: &Matrix,
    d: &TightFrame,
    s: usize,
    eps: f64,
    pairs: usize,
    seed: u64,
    sphere: Sphere,
) -> Result<PropertyEstimate> {
    check_shapes(a, d, s, pairs)?;
    if !(eps > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {eps}")));
    }
    let results: Vec<Option<TesPair>> = (0..pairs)
        .into_par_iter()
        .map(|p| tes_pair(a, d, s, eps, sphere, p, seed))
        .collect::<Result<_>>()?;
    let evaluated: Vec<TesPair> = results.into_iter().flatten().collect();
    if evaluated.is_empty() {
        return Err(Error::param("no pair could be evaluated"));
    }
    let collided: Vec<f64> = evaluated
        .iter()
        .filter(|p| p.collide)
        .map(|p| p.distance)
        .collect();
    let hamming: Vec<f64> = evaluated.iter().map(|p| p.hamming).collect();
    Ok(PropertyEstimate {
        property: Property::Tes,
        s,
        param: eps,
        m: a.nrows(),
        n: d.rows(),
        big_n: d.cols(),
        samples: evaluated.len(),
        min: hamming.iter().copied().fold(f64::INFINITY, f64::min),
        max: collided.iter().copied().fold(0.0, f64::max),
        mean: hamming.iter().sum::<f64>() / hamming.len() as f64,
        median: median(&hamming),
        violation_count: collided.iter().filter(|&&dist| dist > eps).count(),
        seed,
    })
}

/// Estimate of `w(K) = E sup_{f∈K} ⟨f, g⟩` from a finite sample of `K`.
///
/// `sampler` draws points of `K`; the sample of size `sample_size` is fixed
/// and the supremum over it is averaged over `draws` Gaussian vectors. The
/// estimate (in `mean` and `param`) is a lower bound on the width in
/// expectation.
pub fn gaussian_width_mc<F>(
    sampler: F,
    sample_size: usize,
    draws: usize,
    seed: u64,
) -> Result<PropertyEstimate>
where
    F: Fn(&mut Rng) -> Vector,
{
    if sample_size == 0 {
        return Err(Error::param("gaussian width needs a nonempty sample"));
    }
    if draws == 0 {
        return Err(Error::param("gaussian width needs at least one draw"));
    }
    let mut rng = rng::rng(derive_seed(seed, &[0]));
    let points: Vec<Vector> = (0..sample_size).map(|_| sampler(&mut rng)).collect();
    let n = points[0].len();
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::param("sampler returned points of different dimensions"));
    }
    let cloud = Matrix::from_columns(&points);
    let sups: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::rng(derive_seed(seed, &[1, k as u64]));
            let g = rng::gaussian_vector(&mut rng, n);
            cloud.tr_mul(&g).max()
        })
        .collect();
    let st = summarize(&sups);
    Ok(PropertyEstimate {
        property: Property::Width,
        s: 0,
        param: st.mean,
        m: 0,
        n,
        big_n: 0,
        samples: draws,
        min: st.min,
        max: st.max,
        mean: st.mean,
        median: st.median,
        violation_count: 0,
        seed,
    })
}

/// Both sides of the lifting inequality
/// `‖f_[n]/f_{n+1} − g_[n]/g_{n+1}‖₂ ≤ (‖f̃‖‖g̃‖ / |f_{n+1} g_{n+1}|)·‖f̃/‖f̃‖ − g̃/‖g̃‖‖₂`.
pub fn lifting_inequality_sides(f: &Vector, g: &Vector) -> Result<(f64, f64)> {
    if f.len() != g.len() {
        return Err(Error::dims("lifted vectors", f.len(), g.len()));
    }
    if f.len() < 2 {
        return Err(Error::param("lifted vectors need at least two entries"));
    }
    let n = f.len() - 1;
    let (fl, gl) = (f[n], g[n]);
    if fl == 0.0 || gl == 0.0 {
        return Err(Error::Degenerate(crate::DegenerateKind::ZeroLiftedCoordinate));
    }
    let lhs = (f.rows(0, n) / fl - g.rows(0, n) / gl).norm();
    let (fn_, gn) = (f.norm(), g.norm());
    let rhs = fn_ * gn / (fl.abs() * gl.abs()) * (f / fn_ - g / gn).norm();
    Ok((lhs, rhs))
}

/// Whether the lifting inequality holds up to `1e-12` (relative to the right
/// side).
pub fn lifting_inequality_check(f: &Vector, g: &Vector) -> Result<bool> {
    let (lhs, rhs) = lifting_inequality_sides(f, g)?;
    Ok(lhs <= rhs + 1e-12 * rhs.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SensingEnsemble;
    use crate::rng::{gaussian_vector, unit_vector};

    fn a_prime(m: usize, n: usize, seed: u64) -> Matrix {
        SensingEnsemble::sample(m, n, seed).unwrap().isometric()
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn spep_reduces_to_classical_check_for_identity() {
        let n = 6;
        let a = a_prime(200, n, 1);
        let d = TightFrame::identity(n).unwrap();
        let est = spep_deviation(&a, &d, n, 40, 9).unwrap();
        // Classical check: f, g uniform on the sphere, drawn from the same streams.
        let dev: Vec<f64> = (0..40u64)
            .map(|p| {
                let mut rng = rng::rng(derive_seed(9, &[p]));
                let f = gaussian_vector(&mut rng, n);
                let g = gaussian_vector(&mut rng, n);
                let (f, g) = (&f / f.norm(), &g / g.norm());
                let af = &a * &f;
                let ag = &a * &g;
                let pairing: f64 = (0..a.nrows()).map(|i| af[i] * f64::from(sgn(ag[i]))).sum();
                (pairing - f.dot(&g)).abs()
            })
            .collect();
        assert!((est.max - dev.iter().copied().fold(0.0, f64::max)).abs() < 1e-12);
        assert!((est.median - median(&dev)).abs() < 1e-12);
    }

    #[test]
    fn spep_self_pairing_is_l1_norm() {
        let a = a_prime(300, 5, 2);
        let mut rng = rng::rng(4);
        let f = unit_vector(&mut rng, 5);
        let af = &a * &f;
        let pairing: f64 = af.iter().map(|&v| v * f64::from(sgn(v))).sum();
        assert!((pairing - af.lp_norm(1)).abs() < 1e-14);
    }

    #[test]
    fn spep_deviation_is_sane_and_shrinks() {
        let d = TightFrame::random(12, 18, 5).unwrap();
        let mut medians = vec![];
        for m in [250, 1000, 4000] {
            let est = spep_deviation(&a_prime(m, 12, 3), &d, 2, 200, 11).unwrap();
            assert!(est.max <= 10.0);
            medians.push(est.median);
        }
        assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    }

    #[test]
    fn rip1_ratio_is_scale_free_and_delta_shrinks() {
        let d = TightFrame::random(10, 15, 1).unwrap();
        let small = rip1_ratios(&a_prime(200, 10, 2), &d, 2, 300, 3).unwrap();
        let large = rip1_ratios(&a_prime(3200, 10, 2), &d, 2, 300, 3).unwrap();
        assert!(large.param < small.param);
        assert!(small.min <= small.median && small.median <= small.max);
        // Scale invariance of the ratio.
        let a = a_prime(100, 10, 7);
        let f = d.matrix() * sparse_coefficients(&mut rng::rng(1), 15, 2);
        let r1 = (&a * &f).lp_norm(1) / f.norm();
        let f2 = &f * 2.0;
        let r2 = (&a * &f2).lp_norm(1) / f2.norm();
        assert!((r1 - r2).abs() < 1e-14);
    }

    #[test]
    fn tes_trivial_pairs_never_violate() {
        let a = SensingEnsemble::sample(50, 6, 1).unwrap().matrix().clone();
        let mut rng = rng::rng(3);
        let f = unit_vector(&mut rng, 6);
        assert_eq!(sign_pattern(&a, &f), sign_pattern(&a, &f));
        let flipped: Vec<i8> = sign_pattern(&a, &(-&f));
        let direct = sign_pattern(&a, &f);
        assert!(flipped.iter().zip(&direct).all(|(x, y)| x != y));
    }

    #[test]
    fn tes_violations_fall_with_m() {
        let d = TightFrame::random(8, 12, 2).unwrap();
        let count = |m: usize, seed: u64| {
            let a = SensingEnsemble::sample(m, 8, seed).unwrap().matrix().clone();
            tes_check(&a, &d, 2, 0.5, 300, seed, Sphere::Synthesis)
                .unwrap()
                .violation_count
        };
        let mut inversions = 0;
        for seed in 0..5 {
            let counts: Vec<usize> = [4, 16, 256].iter().map(|&m| count(m, seed)).collect();
            inversions += counts.windows(2).filter(|w| w[1] > w[0]).count();
            assert_eq!(counts[2], 0);
        }
        assert!(inversions <= 1);
    }

    #[test]
    fn tes_analysis_sphere_on_identity() {
        let d = TightFrame::identity(6).unwrap();
        let a = SensingEnsemble::sample(400, 6, 1).unwrap().matrix().clone();
        let est = tes_check(&a, &d, 3, 0.5, 60, 2, Sphere::Analysis).unwrap();
        assert!(est.samples > 0);
        assert_eq!(est.violation_count, 0);
    }

    #[test]
    fn width_of_single_point_is_near_zero() {
        let draws = 4000;
        let est = gaussian_width_mc(
            |_| Vector::from_row_slice(&[1.0, 0.0, 0.0]),
            1,
            draws,
            5,
        )
        .unwrap();
        assert!(est.mean.abs() <= 3.0 / (draws as f64).sqrt());
    }

    #[test]
    fn width_of_subspace_spheres_within_bounds() {
        let n = 16;
        for k in [1usize, 2, 4] {
            let est = gaussian_width_mc(
                |rng| {
                    let mut v = Vector::zeros(n);
                    let u = unit_vector(rng, k);
                    v.rows_mut(0, k).copy_from(&u);
                    v
                },
                4000,
                2000,
                7,
            )
            .unwrap();
            let lower = k as f64 / ((k + 1) as f64).sqrt();
            let slack = 0.15;
            assert!(est.mean >= lower - slack, "k={k}: {}", est.mean);
            assert!(est.mean <= (k as f64).sqrt(), "k={k}: {}", est.mean);
        }
    }

    #[test]
    fn width_of_sphere_below_root_n() {
        let n = 8;
        let est = gaussian_width_mc(|rng| unit_vector(rng, n), 2000, 500, 1).unwrap();
        assert!(est.mean <= (n as f64).sqrt());
        assert!(gaussian_width_mc(|rng| unit_vector(rng, n), 0, 10, 1).is_err());
    }

    #[test]
    fn lifting_inequality_examples() {
        let f = Vector::from_row_slice(&[0.3, -2.0, 1.5]);
        assert!(lifting_inequality_check(&f, &f).unwrap());
        assert_eq!(lifting_inequality_sides(&f, &f).unwrap(), (0.0, 0.0));
        let (lhs, rhs) = lifting_inequality_sides(
            &Vector::from_row_slice(&[1.0, 1.0]),
            &Vector::from_row_slice(&[-1.0, 1.0]),
        )
        .unwrap();
        assert!((lhs - 2.0).abs() < 1e-15);
        assert!((rhs - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let zero_last = Vector::from_row_slice(&[1.0, 0.0]);
        assert!(lifting_inequality_check(&zero_last, &f.rows(0, 2).into_owned()).is_err());
    }

    #[test]
    fn estimators_are_deterministic() {
        let d = TightFrame::random(6, 9, 1).unwrap();
        let a = a_prime(120, 6, 1);
        assert_eq!(
            spep_deviation(&a, &d, 2, 50, 3).unwrap(),
            spep_deviation(&a, &d, 2, 50, 3).unwrap()
        );
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let parallel = pool.install(|| rip1_ratios(&a, &d, 2, 64, 8).unwrap());
        assert_eq!(parallel, rip1_ratios(&a, &d, 2, 64, 8).unwrap());
    }
}
