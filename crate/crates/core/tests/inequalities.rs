use dcapprox::numeric::ulps_of;
use dcapprox::NormedSpace;
use proptest::prelude::*;

const SLACK: f64 = 1e-9;

fn pair(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_dim).prop_flat_map(|d| {
        (
            prop::collection::vec(-3.0f64..3.0, d),
            prop::collection::vec(-3.0f64..3.0, d),
        )
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(1.0),
        Just(1.5),
        Just(2.0),
        Just(3.0),
        Just(4.0),
        Just(7.5),
        Just(12.0),
        Just(f64::INFINITY)
    ]
}

fn clarkson_exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.0), Just(2.5), Just(3.0), Just(4.0), Just(6.0)]
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn norm_axioms((x, y) in pair(5), p in exponent(), a in -4.0f64..4.0) {
        let s = NormedSpace::lp(x.len(), p).unwrap();
        prop_assert_eq!(s.norm_slice(&vec![0.0; x.len()]), 0.0);
        let ax: Vec<f64> = x.iter().map(|t| a * t).collect();
        let lhs = s.norm_slice(&ax);
        let rhs = a.abs() * s.norm_slice(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        prop_assert!(s.norm_slice(&add(&x, &y)) <= s.norm_slice(&x) + s.norm_slice(&y) + 1e-12);
    }

    #[test]
    fn quadratic_defect_dominates_norm_gap((x, y) in pair(5), p in exponent()) {
        let s = NormedSpace::lp(x.len(), p).unwrap();
        let q = s.defect2_slices(&x, &y);
        let gap = s.norm_slice(&x) - s.norm_slice(&y);
        prop_assert!(q >= gap * gap - SLACK, "{} < {}", q, gap * gap);
    }

    #[test]
    fn power_defect_dominates_distance((x, y) in pair(4), q in clarkson_exponent()) {
        let s = NormedSpace::lp(x.len(), q).unwrap();
        let lhs = s.defect_p_slices(q, &x, &y);
        let rhs = s.norm_pow_slice(&sub(&x, &y), q);
        prop_assert!(lhs >= rhs - SLACK * (1.0 + rhs), "{} < {}", lhs, rhs);
    }

    #[test]
    fn power_defect_dominates_norm_gap((x, y) in pair(4), p in exponent(), power in clarkson_exponent()) {
        // Holds in every norm; it fixes the search radius of the power regularizer.
        let s = NormedSpace::lp(x.len(), p).unwrap();
        let lhs = s.defect_p_slices(power, &x, &y);
        let gap = (s.norm_slice(&x) - s.norm_slice(&y)).abs().powf(power);
        prop_assert!(lhs >= gap - SLACK * (1.0 + gap), "{} < {}", lhs, gap);
    }

    #[test]
    fn uniform_convexity_two_sided((u, v) in pair(4), q in clarkson_exponent()) {
        let s = NormedSpace::lp(u.len(), q).unwrap();
        let lhs = s.norm_pow_slice(&add(&u, &v), q) + s.norm_pow_slice(&sub(&u, &v), q);
        let rhs = 2.0 * s.norm_pow_slice(&u, q) + 2.0 * s.norm_pow_slice(&v, q);
        prop_assert!(lhs >= rhs - SLACK * (1.0 + rhs), "{} < {}", lhs, rhs);
    }

    #[test]
    fn defect_along_segment((x, y) in pair(4), p in exponent(), mu in 0.0f64..=1.0) {
        let s = NormedSpace::lp(x.len(), p).unwrap();
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| mu * a + (1.0 - mu) * b).collect();
        let nx = s.norm_sq_slice(&x);
        let ny = s.norm_sq_slice(&y);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let m = s.norm_sq_slice(&mid);
        let rhs = s.defect2_slices(&x, &y) + (nx - ny).abs() + 4.0 * (m - nx).abs().max((m - ny).abs());
        prop_assert!(s.defect2_slices(&x, &z) <= rhs + SLACK);
    }

    #[test]
    fn parallelogram_law_in_l2((x, y) in pair(6)) {
        let s = NormedSpace::lp(x.len(), 2.0).unwrap();
        let q = s.defect2_slices(&x, &y);
        let d = s.norm_sq_slice(&sub(&x, &y));
        let scale = 2.0 * s.norm_sq_slice(&x) + 2.0 * s.norm_sq_slice(&y);
        prop_assert!(ulps_of(q - d, scale) <= 4.0, "{} ulps", ulps_of(q - d, scale));
    }

    #[test]
    fn power_two_is_quadratic((x, y) in pair(4), p in exponent()) {
        let s = NormedSpace::lp(x.len(), p).unwrap();
        prop_assert_eq!(s.defect_p_slices(2.0, &x, &y), s.defect2_slices(&x, &y));
    }
}
