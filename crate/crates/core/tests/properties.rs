use fractune::lti::{
    freq_response, h2_norm, h2_norm_lyapunov, logspace, oustaloup, pade_delay, simulate,
    tustin_c2d, tustin_d2c, ClosedLoop, FractionalTf, FrequencyEval, Polynomial, RationalTf,
};
use fractune::numerics::{nelder_mead, NelderMeadOptions};
use fractune::sysid::{aic, estimate_arx, lfilter, DataRecord, EstimatorSpec};
use fractune::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stable strictly proper system with real poles in [-10, -0.1].
fn stable_system() -> impl Strategy<Value = RationalTf> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..10.0, n),
                prop::collection::vec(-3.0f64..3.0, n),
            )
        })
        .prop_filter_map("numerator vanished", |(poles, mut num)| {
            let neg: Vec<f64> = poles.iter().map(|p| -p).collect();
            let den = Polynomial::from_real_roots(&neg);
            num.pop();
            if num.iter().all(|c| c.abs() < 1e-3) {
                num = vec![1.0];
            }
            RationalTf::new(Polynomial::new(num), den).ok()
        })
}

fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn h2_quadrature_matches_lyapunov(sys in stable_system()) {
        let q = h2_norm(&sys).unwrap();
        let l = h2_norm_lyapunov(&sys).unwrap();
        prop_assert!((q - l).abs() <= 5e-3 * l.max(1e-9), "quadrature {q} vs lyapunov {l}");
    }

    #[test]
    fn tustin_round_trip(sys in stable_system(), ts in 0.01f64..0.5) {
        let (num, den) = tustin_c2d(&sys, ts).unwrap();
        let back = tustin_d2c(&num, &den, ts).unwrap();
        for w in [0.01, 0.3, 1.0, 3.0] {
            let a = sys.response_at(w).unwrap();
            let b = back.response_at(w).unwrap();
            prop_assert!(rel_close(a, b, 1e-8), "w={w}: {a} vs {b}");
        }
    }

    #[test]
    fn product_roots_contain_factor_roots(
        p in prop::collection::vec(-5.0f64..5.0, 1..4),
        q in prop::collection::vec(-5.0f64..5.0, 1..4),
    ) {
        let all: Vec<f64> = p.iter().chain(&q).copied().collect();
        let min_gap = all.iter().enumerate().flat_map(|(i, a)| all[i + 1..].iter().map(move |b| (a - b).abs()))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.05);
        let pp = Polynomial::from_real_roots(&p);
        let qq = Polynomial::from_real_roots(&q);
        let roots = (&pp * &qq).roots().unwrap();
        prop_assert_eq!(roots.len(), all.len());
        for r in &all {
            let best = roots.iter().map(|z| (z - Complex64::new(*r, 0.0)).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-6, "root {r} missing (nearest {best})");
        }
    }

    #[test]
    fn sensitivity_plus_complementary_is_one(
        k in 0.1f64..10.0, t in 0.1f64..10.0, a in 0.3f64..1.8, l in 0.0f64..2.0,
        kp in 0.01f64..2.0, ki in 0.01f64..2.0, lam in 0.2f64..1.5, w in 1e-3f64..1e3,
    ) {
        let plant = FractionalTf::from_pairs(&[(k, 0.0)], &[(t, a), (1.0, 0.0)], l).unwrap();
        let ctrl = FractionalTf::from_pairs(&[(kp, lam), (ki, 0.0)], &[(1.0, lam)], 0.0).unwrap();
        let lp = ClosedLoop::new(plant, ctrl);
        if let (Some(s), Some(tt)) = (lp.sensitivity().response_at(w), lp.complementary().response_at(w)) {
            prop_assert!((s + tt - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn pade_is_all_pass(l in 1e-3f64..20.0, n in 1usize..=8, w in 1e-4f64..1e4) {
        let p = pade_delay(l, n).unwrap();
        let g = p.response_at(w).unwrap();
        prop_assert!((g.norm() - 1.0).abs() < 1e-12, "|P(jw)| = {}", g.norm());
    }

    #[test]
    fn positive_gain_scale_keeps_phase(sys in stable_system(), k in 1e-3f64..1e3) {
        let omegas = logspace(-2.0, 2.0, 15);
        let a = freq_response(&sys, &omegas).unwrap().phase_deg_unwrapped();
        let b = freq_response(&sys.scale(k), &omegas).unwrap().phase_deg_unwrapped();
        for (x, y) in a.iter().zip(&b) {
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nelder_mead_never_worse_than_start(
        x0 in prop::collection::vec(-3.0f64..3.0, 1..5),
        c in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let f = |x: &[f64]| -> f64 {
            x.iter().enumerate().map(|(i, v)| {
                let d = v - c[i % 4];
                d * d + 0.1 * (3.0 * v).sin()
            }).sum()
        };
        let f0 = f(&x0);
        let r = nelder_mead(f, &x0, &NelderMeadOptions::default()).unwrap();
        prop_assert!(r.f <= f0);
    }

    #[test]
    fn oustaloup_error_shrinks_with_order(alpha in 0.1f64..0.9) {
        let band = (1e-4, 1e4);
        let omegas = logspace(-1.0, 1.0, 41);
        let err = |order: usize| -> f64 {
            let g = oustaloup(alpha, order, band).unwrap();
            omegas.iter().map(|&w| {
                let exact = alpha * std::f64::consts::FRAC_PI_2;
                (g.response_at(w).unwrap().arg() - exact).abs()
            }).fold(0.0, f64::max)
        };
        let (e2, e4, e6) = (err(2), err(4), err(6));
        prop_assert!(e4 < e2 && e6 < e4, "{e2} {e4} {e6}");
    }

    #[test]
    fn step_response_settles_at_dc_gain(sys in stable_system()) {
        let ts = 0.02;
        let y = simulate(&sys, &vec![1.0; 8000], ts).unwrap();
        let dc = sys.dc_gain().unwrap();
        prop_assert!(y.iter().all(|v| v.is_finite()));
        let last = *y.last().unwrap();
        prop_assert!((last - dc).abs() <= 1e-3 * dc.abs().max(1e-3), "{last} vs {dc}");
    }

    #[test]
    fn aic_scaling(v in 1e-8f64..1e3, c in 1e-3f64..1e3, d in 1usize..20, n in 50usize..5000) {
        let base = aic(v, d, n).unwrap();
        prop_assert!((aic(c * v, d, n).unwrap() - base - c.ln()).abs() < 1e-9);
        prop_assert!((aic(v, d + 1, n).unwrap() - base - 2.0 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn arx_recovers_noise_free_tustin_plant(
        p1 in 0.2f64..5.0, p2 in 0.2f64..5.0, z in -3.0f64..3.0, ts in 0.05f64..0.5, seed in any::<u64>(),
    ) {
        let plant = RationalTf::new(
            Polynomial::new(vec![1.0, z]),
            Polynomial::from_real_roots(&[-p1, -p2]),
        ).unwrap();
        let (num, den) = tustin_c2d(&plant, ts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = lfilter(num.coeffs(), den.coeffs(), &u);
        let data = DataRecord::new(ts, u, y).unwrap();
        let spec = EstimatorSpec::arx(2, 3, 0);
        let m = estimate_arx(&data, &spec).unwrap();
        let theta = m.coeffs.to_theta(&spec);
        let expected: Vec<f64> = den.coeffs()[1..].iter().chain(num.coeffs()).copied().collect();
        for (got, want) in theta.iter().zip(&expected) {
            prop_assert!((got - want).abs() < 1e-8, "{theta:?} vs {expected:?}");
        }
    }
}
