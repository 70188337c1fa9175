use proptest::prelude::*;
use spirallab::extensions::{semigroup_action, BallSpace, HomogeneousPolynomial, SpiralMatrix};
use spirallab::semigroups::flow;
use spirallab::sharp::{f_sharp, SharpParams};
use spirallab::spec::{parse_complex, parse_grid, parse_polynomial, parse_real_list, polynomial_to_json, FunctionSpec, GeneratorSpec};
use spirallab::univalent::{disk_automorphism, distortion_bounds, normalize_at, UnivalentMap};
use spirallab::Complex64;

fn disk_point(rmax: f64) -> impl Strategy<Value = Complex64> {
    (0.0..rmax, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| Complex64::new(a, b))
}

fn families() -> Vec<UnivalentMap> {
    vec![
        UnivalentMap::identity(),
        UnivalentMap::koebe(),
        UnivalentMap::half_plane(),
        UnivalentMap::mobius_spiral(Complex64::new(0.3, 0.0)).unwrap(),
        UnivalentMap::mobius_spiral(Complex64::new(0.0, 0.3)).unwrap(),
        UnivalentMap::spiral_koebe(0.7).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn automorphism_is_an_involution(x0 in disk_point(0.95), z in disk_point(0.999)) {
        let w = disk_automorphism(x0, z).unwrap();
        prop_assert!(w.norm() < 1.0 + 1e-12);
        let back = disk_automorphism(x0, w).unwrap();
        prop_assert!((back - z).norm() <= 1e-12);
        prop_assert!(disk_automorphism(x0, x0).unwrap().norm() <= 1e-15);
        prop_assert!((disk_automorphism(x0, Complex64::new(0.0, 0.0)).unwrap() - x0).norm() <= 1e-15);
    }

    #[test]
    fn inverse_undoes_eval(z in disk_point(0.9), k in 0usize..6) {
        let h = &families()[k];
        let w = h.eval(z).unwrap();
        let x = h.invert(w, Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!((x - z).norm() <= 1e-9, "{}: {z} -> {w} -> {x}", h.describe());
    }

    #[test]
    fn koebe_distortion_lower_bounds(x0 in disk_point(0.95), z in disk_point(0.99), k in 0usize..6) {
        let h = &families()[k];
        let g = normalize_at(h, x0).unwrap();
        let (d_low, v_low) = distortion_bounds(z).unwrap();
        prop_assert!(g.deriv(z).unwrap().norm() >= d_low * (1.0 - 1e-10));
        prop_assert!(g.eval(z).unwrap().norm() >= v_low * (1.0 - 1e-10));
    }

    #[test]
    fn polynomial_is_homogeneous(
        coefs in proptest::collection::vec(complex(1.0), 3),
        y in proptest::collection::vec(complex(1.0), 2),
        c in complex(2.0),
    ) {
        let q = HomogeneousPolynomial::new(3, 2, [
            (vec![3, 0], coefs[0]),
            (vec![2, 1], coefs[1]),
            (vec![0, 3], coefs[2]),
        ]).unwrap();
        let scaled: Vec<Complex64> = y.iter().map(|v| v * c).collect();
        let lhs = q.eval(&scaled).unwrap();
        let rhs = c.powu(3) * q.eval(&y).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn linear_semigroup_law(
        t in 0.0..3.0f64,
        s in 0.0..3.0f64,
        z in disk_point(1.0),
        w in disk_point(1.0),
        mu in (0.1..3.0f64, -3.0..3.0f64),
        lambda in (0.1..3.0f64, -3.0..3.0f64),
    ) {
        let a = SpiralMatrix::new(Complex64::new(mu.0, mu.1), Complex64::new(lambda.0, lambda.1), 2.0).unwrap();
        let (z1, w1) = semigroup_action(&a, s, z, &[w]).unwrap();
        let (z2, w2) = semigroup_action(&a, t, z1, &w1).unwrap();
        let (z3, w3) = semigroup_action(&a, t + s, z, &[w]).unwrap();
        prop_assert!((z2 - z3).norm() <= 1e-14);
        prop_assert!((w2[0] - w3[0]).norm() <= 1e-14);
    }

    #[test]
    fn ball_samples_are_interior(seed in any::<u64>(), r in 1.0..4.0f64, m in 1usize..4) {
        let space = BallSpace::euclidean(r, m).unwrap();
        let mut rng = spirallab::sampling::seeded_rng(seed);
        for _ in 0..20 {
            let p = space.sample_interior(&mut rng, 1e-3);
            prop_assert!(space.gauge(p.x, &p.y) <= 1.0 - 1e-3 + 1e-12);
        }
    }

    #[test]
    fn sharp_ratio_stays_above_its_limit(re in 0.05..5.0f64, im in -5.0..5.0f64, r in 1u32..4, t in 1e-4..50.0f64) {
        let p = SharpParams::new(Complex64::new(re, im), r).unwrap();
        let v = f_sharp(&p, t).unwrap();
        prop_assert!(v >= p.limit() - 1e-12 && v <= 1.0 + 1e-12);
    }

    #[test]
    fn cli_value_parsers_never_panic(s in "\\PC{0,40}") {
        let _ = parse_complex(&s);
        let _ = parse_real_list(&s);
        let _ = parse_grid(&s);
        let _ = FunctionSpec::parse(&s);
        let _ = GeneratorSpec::parse(&s);
        let _ = parse_polynomial(&s, None);
    }

    #[test]
    fn polynomial_json_round_trip(coefs in proptest::collection::vec(complex(2.0), 3)) {
        let q = HomogeneousPolynomial::new(2, 2, [(vec![2, 0], coefs[0]), (vec![1, 1], coefs[1]), (vec![0, 2], coefs[2])]).unwrap();
        let text = polynomial_to_json(&q).to_string();
        prop_assert_eq!(parse_polynomial(&text, Some(2)).unwrap(), q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn logistic_flow_semigroup_law(z in disk_point(0.95), t in 0.0..2.0f64, s in 0.0..2.0f64) {
        let g = GeneratorSpec::Logistic {}.build().unwrap();
        let direct = flow(&g, z, t + s, 1e-10).unwrap().endpoint;
        let split = flow(&g, flow(&g, z, s, 1e-10).unwrap().endpoint, t, 1e-10).unwrap().endpoint;
        prop_assert!((direct - split).norm() <= 1e-7);
        // closed form z e^{-t} / (1 - z + z e^{-t})
        let e = (-(t + s)).exp();
        prop_assert!((direct - z * e / (1.0 - z + z * e)).norm() <= 1e-8);
    }
}
