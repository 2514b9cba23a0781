use proptest::prelude::*;
use structnet::compressor::{
    compress, conv_to_toeplitz, restructure_shallow_network, sup_gap, toeplitz_layer_to_conv, CompressMode,
    CompressOptions, ShallowMode,
};
use structnet::identity_approx::{choose_h, rho_apply, Activation, SampleDomain};
use structnet::network::Network;
use structnet::structmat::{MatrixKind, ToeplitzMatrix};
use structnet::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chosen_h_meets_eps(act in 0usize..5, exp in 1i32..5, radius in 0.1..3.0f64) {
        let act = Activation::all()[act];
        let eps = 10f64.powi(-exp);
        let domain = SampleDomain::grid(2, 9, -radius, radius).unwrap();
        let h = choose_h(act, &domain, eps).unwrap();
        for x in domain.points() {
            let r = rho_apply(act, h, x).unwrap();
            let err = r.iter().zip(x).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= eps);
        }
    }

    #[test]
    fn conv_round_trip(m in 1usize..20, n in 1usize..20, seed in any::<u64>()) {
        let params: Vec<f64> = (0..m + n - 1).map(|i| ((i as u64 ^ seed) % 97) as f64 / 48.0 - 1.0).collect();
        let t = ToeplitzMatrix::new(m, n, params).unwrap();
        let spec = toeplitz_layer_to_conv(&t);
        prop_assert_eq!(conv_to_toeplitz(&spec).unwrap(), t.clone());
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let (a, b) = (spec.apply(&x).unwrap(), t.matvec_naive(&x).unwrap());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-13);
        }
    }
}

fn small_net() -> Network {
    Network::random(&[2, 4, 3, 1], &[MatrixKind::Dense; 3], Activation::Tanh, 21).unwrap()
}

#[test]
fn every_mode_meets_eps_on_held_out_points() {
    let net = small_net();
    let tuning = SampleDomain::grid(2, 25, -1.0, 1.0).unwrap();
    let held_out = SampleDomain::uniform(2, 3000, -1.0, 1.0, 8).unwrap();
    for mode in [CompressMode::Lu, CompressMode::Toeplitz, CompressMode::Hankel] {
        let report = compress(&net, &tuning, 0.05, mode, &CompressOptions::default()).unwrap();
        assert!(report.achieved_error <= 0.05, "{mode}: {}", report.achieved_error);
        let gap = sup_gap(&net, &report.network, held_out.points()).unwrap();
        assert!(gap <= 0.05, "{mode}: held-out gap {gap}");
        let want = match mode {
            CompressMode::Toeplitz => Some(MatrixKind::Toeplitz),
            CompressMode::Hankel => Some(MatrixKind::Hankel),
            CompressMode::Lu => None,
        };
        for layer in report.network.layers() {
            match want {
                Some(k) => assert_eq!(layer.weight().kind(), k),
                None => assert!(matches!(layer.weight().kind(), MatrixKind::Upper | MatrixKind::Lower)),
            }
        }
    }
}

#[test]
fn relu_compression_is_exact_in_lu_mode() {
    let net = Network::random(&[3, 5, 2], &[MatrixKind::Dense; 2], Activation::Relu, 2).unwrap();
    let domain = SampleDomain::uniform(3, 200, -1.0, 1.0, 1).unwrap();
    let report = compress(&net, &domain, 1e-3, CompressMode::Lu, &CompressOptions::default()).unwrap();
    assert!(report.achieved_error <= 1e-3);
}

#[test]
fn invalid_eps_is_rejected() {
    let domain = SampleDomain::grid(2, 3, -1.0, 1.0).unwrap();
    for eps in [0.0, -1.0, f64::NAN] {
        assert!(compress(&small_net(), &domain, eps, CompressMode::Lu, &CompressOptions::default()).is_err());
    }
}

#[test]
fn domain_dimension_must_match() {
    let domain = SampleDomain::grid(3, 3, -1.0, 1.0).unwrap();
    let err = compress(&small_net(), &domain, 0.1, CompressMode::Lu, &CompressOptions::default()).unwrap_err();
    assert!(!matches!(err, Error::CompressionInfeasible { .. }));
}

#[test]
fn shallow_network_restructuring_preserves_outputs() {
    let net = Network::random(&[3, 6, 1], &[MatrixKind::Dense; 2], Activation::Sigmoid, 9).unwrap();
    let points = SampleDomain::uniform(3, 100, -2.0, 2.0, 4).unwrap();
    for mode in [ShallowMode::Toeplitz, ShallowMode::Hankel, ShallowMode::Lower] {
        let s = restructure_shallow_network(&net, mode).unwrap();
        assert!(sup_gap(&net, &s, points.points()).unwrap() <= 1e-12, "{mode:?}");
    }
}
