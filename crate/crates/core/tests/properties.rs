use nalgebra::DVector;
use proptest::prelude::*;

use kframe::bundle::{trivial_so2_bundle, ObserverSection};
use kframe::connection::{check_covariance, decompose_connection, Christoffel};
use kframe::gauge::{gauge_transform, random_gauge_map, random_gauge_values, ParticleField};
use kframe::linalg::MatN;
use kframe::manifold::{finite_diff, Chart, LatticeMap};
use kframe::matgroups::{classify, in_group, ClassifyResult, GroupSpec, KValue};

fn k_value() -> impl Strategy<Value = KValue> {
    prop_oneof![
        (-9.0f64..9.0).prop_map(KValue::Finite),
        Just(KValue::Finite(0.0)),
        Just(KValue::Omega),
    ]
}

fn so2_chart() -> Chart {
    Chart::spanning("U", vec![6, 5], &[0.0, 0.0], &[1.0, 1.0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_closed_under_products_and_inverses(k in k_value(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let spec = GroupSpec::ok(k);
        let a = spec.random_element(s1, 0.5);
        let b = spec.random_element(s2, 0.5);
        prop_assert!(in_group(&(&a * &b), k, 1e-8, false).unwrap());
        prop_assert!(in_group(&a.inverse().unwrap(), k, 1e-8, false).unwrap());
    }

    #[test]
    fn members_classify_to_their_k(k in k_value(), seed in any::<u64>()) {
        let spec = GroupSpec::ok(k);
        let set: Vec<MatN> = (0..3).map(|i| spec.random_element(seed.wrapping_add(i), 0.5)).collect();
        match classify(&set, 1e-9) {
            ClassifyResult::Unique { k: got } => prop_assert!(got.approx_eq(&k, 1e-6), "{got} vs {k}"),
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn k_value_serde_round_trip(k in k_value()) {
        let text = serde_json::to_string(&k).unwrap();
        let back: KValue = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, k);
    }

    #[test]
    fn group_spec_serde_round_trip(k in k_value()) {
        for spec in [GroupSpec::ok(k), GroupSpec::so2(), GroupSpec::spatial_rotations()] {
            let text = serde_json::to_string(&spec).unwrap();
            let back: GroupSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, spec);
        }
    }

    #[test]
    fn link_covariance_is_exact(seed in any::<u64>(), scale in 0.1f64..3.0) {
        let chart = kframe::scenarios::gauge_chart();
        let b = trivial_so2_bundle(chart.clone());
        let psi = kframe::scenarios::gauge_field(&chart);
        let links = kframe::scenarios::gauge_connection(&chart);
        let g = random_gauge_values(&b, 0, seed, scale);
        let rep = check_covariance(&psi, &links, &g, &GroupSpec::so2(), 1e-10).unwrap();
        prop_assert!(rep.passed && rep.delta_cov <= 1e-10, "{rep:?}");
    }

    #[test]
    fn gauge_round_trip(seed in any::<u64>()) {
        let chart = so2_chart();
        let b = trivial_so2_bundle(chart.clone());
        let sigma0 = [ObserverSection::identity(&chart, 2)];
        let psi = ParticleField::single(LatticeMap::from_fn(&chart, |_, x| DVector::from_vec(vec![1.0 + x[0], x[1] - 0.3])));
        let g = random_gauge_map(&b, 0, seed, 1.5, 1);
        let moved = gauge_transform(&b, &psi, &g, &sigma0, 1e-9).unwrap();
        let back = gauge_transform(&b, &moved, &g.inverse().unwrap(), &sigma0, 1e-9).unwrap();
        prop_assert!(back.max_diff(&psi).unwrap() <= 1e-10);
    }

    #[test]
    fn decomposition_parts_have_their_symmetry(entries in proptest::collection::vec(-2.0f64..2.0, 27), d in 0.5f64..3.0) {
        let chart = Chart::spanning("U", vec![4], &[0.0], &[1.0]).unwrap();
        let metric = LatticeMap::from_fn(&chart, |_, x| MatN::from_diagonal(&[-1.0, d + x[0], 1.0]));
        let gamma = Christoffel::from_fn(&chart, 3, |s, a, b, c| entries[(a * 3 + b) * 3 + c] * (1.0 + s as f64));
        let dec = decompose_connection(&gamma, &metric).unwrap();
        prop_assert!(dec.symmetric.max_diff(&dec.symmetric.swapped()).unwrap() <= 1e-14);
        let swapped = dec.antisymmetric.swapped();
        for s in 0..chart.num_sites() {
            for i in 0..27 {
                let (a, b, c) = (i / 9, (i / 3) % 3, i % 3);
                prop_assert!((dec.antisymmetric.get(s, a, b, c) + swapped.get(s, a, b, c)).abs() <= 1e-14);
            }
        }
        prop_assert!(dec.reassemble().unwrap().max_diff(&gamma).unwrap() <= 1e-12);
    }

    #[test]
    fn finite_differences_exact_on_linear_fields(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let chart = Chart::spanning("U", vec![7, 4], &[-1.0, 0.0], &[2.0, 1.0]).unwrap();
        let f = LatticeMap::from_fn(&chart, |_, x| a * x[0] + b * x[1] + c);
        let dx = finite_diff(&f, 0).unwrap();
        let dy = finite_diff(&f, 1).unwrap();
        prop_assert!(dx.values.iter().all(|v| (v - a).abs() <= 1e-11));
        prop_assert!(dy.values.iter().all(|v| (v - b).abs() <= 1e-11));
    }
}
