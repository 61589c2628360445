//! Randomized invariants spanning frames, measurements and recovery.

use onebit::analysis::lifting_inequality_sides;
use onebit::frames::verify_tight;
use onebit::measure::{lift_matrix, lift_signal, sgn, sign_measure, SensingEnsemble};
use onebit::recover::{ht_direction, lp_direction};
use onebit::rng::{gaussian_vector, rng};
use onebit::signals::{direction_error, gen_synthesis_sparse};
use onebit::{Matrix, TightFrame, Vector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructed_frames_are_tight(n in 1usize..12, extra in 0usize..12, seed in any::<u64>()) {
        let big_n = n + extra;
        let random = TightFrame::random(n, big_n, seed).unwrap();
        let harmonic = TightFrame::harmonic(n, big_n).unwrap();
        let both = TightFrame::block_diagonal(&random, &harmonic);
        for d in [&random, &harmonic, &both, &both.lift()] {
            prop_assert!(verify_tight(d.matrix(), 1e-10).is_tight);
        }
    }

    #[test]
    fn analysis_preserves_norm(n in 1usize..10, extra in 0usize..10, seed in any::<u64>()) {
        let d = TightFrame::random(n, n + extra, seed).unwrap();
        let f = gaussian_vector(&mut rng(seed ^ 1), n);
        let coeffs = d.analysis(&f).unwrap();
        prop_assert!((coeffs.norm() - f.norm()).abs() <= 1e-10 * f.norm().max(1.0));
        prop_assert!((d.synthesis(&coeffs).unwrap() - &f).norm() <= 1e-10 * f.norm().max(1.0));
    }

    #[test]
    fn lifted_signs_match_dithered_signs(
        m in 1usize..20, n in 1usize..8, sigma in 0.1f64..4.0, seed in any::<u64>()
    ) {
        let mut r = rng(seed);
        let a = Matrix::from_fn(m, n, |_, _| gaussian_vector(&mut r, 1)[0]);
        let tau = gaussian_vector(&mut r, m) * sigma;
        let f = gaussian_vector(&mut r, n);
        let lifted = lift_matrix(&a, &tau, sigma).unwrap() * lift_signal(&f, sigma).unwrap();
        let direct = &a * &f - &tau;
        for i in 0..m {
            prop_assert_eq!(sgn(lifted[i]), sgn(direct[i]));
        }
    }

    #[test]
    fn lifting_inequality_holds(n in 1usize..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = gaussian_vector(&mut r, n + 1);
        let g = gaussian_vector(&mut r, n + 1);
        let (lhs, rhs) = lifting_inequality_sides(&f, &g).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn recovery_ignores_positive_scaling_of_a(seed in any::<u64>(), c in 0.01f64..100.0) {
        let d = TightFrame::random(6, 9, seed).unwrap();
        let truth = gen_synthesis_sparse(&d, 2, seed ^ 2, 1.0).unwrap();
        let e = SensingEnsemble::sample(80, 6, seed ^ 3).unwrap();
        let y = sign_measure(&e, &truth.f).unwrap().signs().to_vec();
        let scaled = e.matrix() * c;

        let ht = ht_direction(&d, e.matrix(), &y, 4).unwrap().f_hat;
        let ht_scaled = ht_direction(&d, &scaled, &y, 4).unwrap().f_hat;
        prop_assert!(direction_error(&ht, &ht_scaled).unwrap() <= 1e-10);

        let lp = lp_direction(&d, e.matrix(), &y).unwrap().f_hat;
        let lp_scaled = lp_direction(&d, &scaled, &y).unwrap().f_hat;
        let gap: Vector = &lp - &lp_scaled * c;
        prop_assert!(gap.norm() <= 1e-6 * lp.norm());
    }
}
