use proptest::prelude::*;
use rdcn::traffic::{generate_tm, raw_tm, sinkhorn, TmParams, DEFAULT_NOISE};
use rdcn::{DemandMatrix, Error};

fn quiet(t_l: f64, n_f: usize, c_l: f64, n: usize, seed: u64) -> TmParams {
    TmParams {
        noise: 0.0,
        ..TmParams::new(t_l, n_f, c_l, n, seed)
    }
}

#[test]
fn default_noise_is_one_percent() {
    assert_eq!(DEFAULT_NOISE, 0.01);
    assert_eq!(TmParams::new(0.2, 8, 0.7, 8, 1).noise, 0.01);
}

#[test]
fn all_large_without_noise_weights_each_flow_equally() {
    let n_f = 6;
    let m = generate_tm(&quiet(1.0, n_f, 0.7, 9, 3)).unwrap();
    assert!(m.is_doubly_stochastic(1e-12));
    // every cell is a multiple of 1/n_f
    for i in 0..9 {
        for &x in m.row(i) {
            let k = x * n_f as f64;
            assert!((k - k.round()).abs() < 1e-12);
        }
    }
    // the raw sum only needs a uniform rescale
    let raw = raw_tm(&quiet(1.0, n_f, 0.7, 9, 3)).unwrap();
    assert!(m.max_abs_difference(&raw.scaled(1.0 / 0.7)) < 1e-12);
}

#[test]
fn literal_mode_changes_weights() {
    let a = raw_tm(&quiet(0.25, 8, 0.9, 12, 5)).unwrap();
    let b = raw_tm(&TmParams {
        literal: true,
        ..quiet(0.25, 8, 0.9, 12, 5)
    })
    .unwrap();
    assert!(a.max_abs_difference(&b) > 1e-3);
    assert!((b.weight() - 12.0).abs() < 1e-9);
}

#[test]
fn invalid_parameters() {
    for p in [
        TmParams::new(1.2, 8, 0.5, 8, 1),
        TmParams::new(0.2, 8, -0.1, 8, 1),
        TmParams::new(0.2, 0, 0.5, 8, 1),
        TmParams::new(0.2, 8, 0.5, 1, 1),
        TmParams {
            noise: -1.0,
            ..TmParams::new(0.2, 8, 0.5, 8, 1)
        },
    ] {
        assert!(matches!(generate_tm(&p), Err(Error::InvalidParams(_))), "{p:?}");
    }
    assert!(sinkhorn(&DemandMatrix::zeros(3), 1e-9).is_err());
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let p = TmParams::new(0.2, 64, 0.7, 32, 11);
    assert_eq!(generate_tm(&p).unwrap(), generate_tm(&p).unwrap());
    let q = TmParams { seed: 12, ..p };
    assert_ne!(generate_tm(&p).unwrap(), generate_tm(&q).unwrap());
}

#[test]
fn sparsity_and_max_fall_with_more_flows() {
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for n_f in [16, 64, 256, 1024] {
        let (mut sparsity, mut max) = (0.0, 0.0);
        for seed in 0..30 {
            let met = generate_tm(&TmParams::new(0.2, n_f, 0.7, 64, seed)).unwrap().metrics();
            sparsity += met.sparsity / 30.0;
            max += met.max_entry / 30.0;
        }
        assert!(sparsity < prev.0, "n_f={n_f}");
        assert!(max < prev.1, "n_f={n_f}");
        prev = (sparsity, max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_matrices_are_doubly_stochastic(t_l in 0.0f64..=1.0, c_l in 0.0f64..=1.0, n_f in 1usize..200,
                                                n in 3usize..=40, seed in any::<u64>()) {
        let p = TmParams::new(t_l, n_f, c_l, n, seed);
        let m = generate_tm(&p).unwrap();
        prop_assert!(m.is_doubly_stochastic(1e-6));
        prop_assert!((0..n).all(|i| m.get(i, i) == 0.0));
    }

    #[test]
    fn noiseless_raw_weight_is_n(t_l in 0.05f64..0.95, c_l in 0.0f64..=1.0, n_f in 2usize..200, n in 3usize..=40, seed in any::<u64>()) {
        let p = quiet(t_l, n_f, c_l, n, seed);
        prop_assume!(p.small_flows() >= 1 && p.large_flows() >= 1);
        let m = raw_tm(&p).unwrap();
        prop_assert!((m.weight() - n as f64).abs() < 1e-9);
    }
}
