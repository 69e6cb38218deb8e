use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use widthlab_core::bodies::{dual_gauge, induced_ball, linear_image, Body, MultiplierSpec};
use widthlab_core::linalg::{dot, norm2, random_subspace, varrho, Matrix};
use widthlab_core::manifolds::{ManifoldParams, SpectralData};
use widthlab_core::ortho::{trig_system, OrthonormalSystem};

fn trig5() -> Arc<OrthonormalSystem> {
    static SYSTEM: OnceLock<Arc<OrthonormalSystem>> = OnceLock::new();
    SYSTEM.get_or_init(|| Arc::new(trig_system(2))).clone()
}

fn vec5() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 5)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0..12.0f64]
}

fn invertible3() -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0..2.0f64, 9)
        .prop_map(|v| Matrix::new(3, 3, v).unwrap())
        .prop_filter("well conditioned", |m| {
            let s = m.singular_values();
            s[2] > 0.05 * s[0]
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norm_is_a_norm(a in vec5(), b in vec5(), c in -4.0..4.0f64, p in exponent()) {
        let s = trig5();
        let na = s.lp_norm(&a, p).unwrap();
        let nb = s.lp_norm(&b, p).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(s.lp_norm(&sum, p).unwrap() <= na + nb + 1e-9 * (1.0 + na + nb));
        let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
        prop_assert!((s.lp_norm(&scaled, p).unwrap() - c.abs() * na).abs() <= 1e-9 * (1.0 + na));
        prop_assert!(na >= 0.0);
    }

    #[test]
    fn lp_norm_grows_with_exponent(a in vec5(), p in 1.0..8.0f64, dq in 0.0..8.0f64) {
        let s = trig5();
        let lo = s.lp_norm(&a, p).unwrap();
        let hi = s.lp_norm(&a, p + dq).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12) + 1e-12);
        prop_assert!(hi <= s.lp_norm(&a, f64::INFINITY).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn induced_gauges_bracket_euclidean(a in vec5(), p in 2.0..10.0f64) {
        let s = trig5();
        let e = norm2(&a);
        let g1 = induced_ball(s.clone(), 1.0).unwrap().gauge(&a);
        let gp = induced_ball(s.clone(), p).unwrap().gauge(&a);
        prop_assert!(g1 <= e * (1.0 + 1e-12) + 1e-12);
        prop_assert!(e <= gp * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), x in vec5(), s in 1usize..5) {
        let l = random_subspace(5, s, seed).unwrap();
        let once = l.project(&x).unwrap();
        let twice = l.project(&once).unwrap();
        for (u, v) in once.iter().zip(&twice) {
            prop_assert!((u - v).abs() < 1e-10);
        }
        prop_assert!(norm2(&once) <= norm2(&x) + 1e-10);
    }

    #[test]
    fn varrho_is_homogeneous(m in invertible3(), c in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64]) {
        let r = varrho(&m).unwrap();
        let rc = varrho(&m.scaled(c)).unwrap();
        prop_assert!((rc - c.abs() * r).abs() <= 1e-9 * (1.0 + rc));
    }

    #[test]
    fn inscribed_ball_of_linear_image(m in invertible3(), u in prop::collection::vec(-1.0..1.0f64, 3)) {
        prop_assume!(norm2(&u) > 1e-3);
        let r = varrho(&m).unwrap();
        let v = linear_image(&Body::euclidean(3), &m).unwrap();
        let boundary: Vec<f64> = u.iter().map(|x| r * x / norm2(&u)).collect();
        prop_assert!(v.gauge(&boundary) <= 1.0 + 1e-9);
    }

    #[test]
    fn linear_image_gauge_axioms(m in invertible3(), x in prop::collection::vec(-2.0..2.0f64, 3), y in prop::collection::vec(-2.0..2.0f64, 3), c in -3.0..3.0f64) {
        let v = linear_image(&Body::cube(3), &m).unwrap();
        let gx = v.gauge(&x);
        let gy = v.gauge(&y);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(v.gauge(&sum) <= gx + gy + 1e-9 * (1.0 + gx + gy));
        let neg: Vec<f64> = x.iter().map(|a| c * a).collect();
        prop_assert!((v.gauge(&neg) - c.abs() * gx).abs() <= 1e-9 * (1.0 + gx));
    }

    #[test]
    fn support_function_dominates_pairings(x in vec5(), y in vec5(), p in prop_oneof![Just(1.5), Just(3.0), Just(4.0)]) {
        prop_assume!(norm2(&y) > 1e-3);
        let s = trig5();
        let h = dual_gauge(&s, p, &x).unwrap();
        let g = s.lp_norm(&y, p).unwrap();
        prop_assert!(dot(&x, &y) <= h * g * (1.0 + 1e-7) + 1e-9);
    }

    #[test]
    fn class_a_truncations_are_monotone(gamma in 0.1..4.0f64, n in 1usize..60) {
        let spectral = SpectralData::covering(ManifoldParams::sphere(2).unwrap(), n + 1).unwrap();
        let entries = MultiplierSpec::power(gamma).entries(&spectral, n).unwrap();
        prop_assert!(entries.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(entries.iter().all(|&e| e > 0.0 && e <= 1.0));
    }
}
