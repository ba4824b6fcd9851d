mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rdcn::bvn::{decompose, reconstruct, BvnOptions};
use rdcn::matrix::{make_mv, make_mvu, make_perm, DemandMatrix, Permutation};
use rdcn::schedule::{skewness, total_traffic, verify_complete, verify_feasible};
use rdcn::systems::{
    extract_uniform, pivot, pivot_plan, pivot_plus, report, rr_cycle_configurations, rr_upper, run,
    schedule_bvn_direct, schedule_rr_direct, schedule_rr_mulp, schedule_rr_oneperm, ScheduleResult, SystemConfig,
    SystemKind,
};
use rdcn::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Everything a produced schedule must satisfy regardless of the scheduler.
fn check_result(res: &ScheduleResult, input: &DemandMatrix, cfg: &SystemConfig) -> std::result::Result<(), String> {
    let n = input.n();
    let rep = report(res, input, cfg);
    if !rep.feasibility.feasible {
        return Err(format!("{}: infeasible {:?}", res.label, rep.feasibility.violation));
    }
    if !verify_complete(&res.served, res.traffic()) {
        return Err(format!("{}: served matrix not delivered", res.label));
    }
    if !rep.epsilon_complete {
        return Err(format!("{}: input not delivered within eps", res.label));
    }
    if !close(res.simulated_dct(), res.claimed_dct, 1e-9) {
        return Err(format!(
            "{}: simulated {} claimed {}",
            res.label,
            res.simulated_dct(),
            res.claimed_dct
        ));
    }
    if let Ok(phi) = skewness(res.traffic()) {
        let identity = 2.0 - total_traffic(res.traffic()).weight() / res.served.weight();
        if (phi - identity).abs() > 1e-9 {
            return Err(format!("{}: skew {phi} vs {identity}", res.label));
        }
    }
    if res.label.is_rr() {
        let floor = (n as f64 - 1.0) * total_traffic(res.traffic()).max_entry() / (cfg.duty_cycle() * cfg.rate);
        if res.simulated_dct() < floor * (1.0 - 1e-9) {
            return Err(format!(
                "{}: dct {} below max-entry floor {floor}",
                res.label,
                res.simulated_dct()
            ));
        }
    }
    Ok(())
}

#[test]
fn cycle_configurations_cover_complete_graph() {
    assert!(rr_cycle_configurations(1).is_err());
    for n in [2, 4, 5, 13] {
        let cs = rr_cycle_configurations(n).unwrap();
        assert_eq!(cs.len(), n - 1);
        let mut seen = vec![vec![0; n]; n];
        for c in &cs {
            for x in 0..n {
                seen[x][c.target(x)] += 1;
            }
        }
        let pairs: usize = seen.iter().flatten().sum();
        assert_eq!(pairs, n * (n - 1));
        for (x, row) in seen.iter().enumerate() {
            for (y, &k) in row.iter().enumerate() {
                assert_eq!(k, usize::from(x != y));
            }
        }
    }
}

#[test]
fn scheduler_names_round_trip() {
    for k in SystemKind::ALL {
        assert_eq!(k.as_str().parse::<SystemKind>().unwrap(), k);
    }
    assert!(matches!("rotor".parse::<SystemKind>(), Err(Error::UnknownSystem(_))));
}

#[test]
fn config_validation() {
    let cfg = SystemConfig {
        rr: 0.01,
        ..Default::default()
    };
    assert!(cfg.validate().is_err());
    let cfg = SystemConfig {
        rr: 0.01,
        delta: Some(0.09),
        ..Default::default()
    };
    cfg.validate().unwrap();
    assert!((cfg.duty_cycle() - 0.9).abs() < 1e-15);
    assert!(SystemConfig {
        rate: 0.0,
        ..Default::default()
    }
    .validate()
    .is_err());
    assert!(SystemConfig {
        eta: 1.5,
        ..Default::default()
    }
    .validate()
    .is_err());
}

#[test]
fn bvn_direct_examples() {
    let rb = 0.015;
    let cfg = SystemConfig::with_rb(rb);
    let p = make_perm(10, 2).unwrap();
    let res = schedule_bvn_direct(&p, &cfg).unwrap();
    assert!(close(res.claimed_dct, 1.0 + rb, 1e-12));
    check_result(&res, &p, &cfg).unwrap();

    let m = make_mv(64, 63, 1).unwrap();
    let res = schedule_bvn_direct(&m, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 1.945, 1e-9));

    let m = common::random_ds(12, 5, 4);
    let res = schedule_bvn_direct(&m, &cfg).unwrap();
    let v = res.topology().len() as f64;
    assert!(close(res.simulated_dct(), res.served.weight() / 12.0 + v * rb, 1e-12));
}

#[test]
fn rr_direct_examples() {
    let cfg = SystemConfig::default();
    let uni = DemandMatrix::uniform(64).unwrap();
    assert!(close(schedule_rr_direct(&uni, &cfg).unwrap().claimed_dct, 1.0, 1e-12));
    let p = make_perm(64, 5).unwrap();
    let res = schedule_rr_direct(&p, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 63.0, 1e-12));
    check_result(&res, &p, &cfg).unwrap();
    for v in [1, 7, 20, 50] {
        let m = make_mv(64, v, 3).unwrap();
        let res = schedule_rr_direct(&m, &cfg).unwrap();
        assert!(close(res.simulated_dct(), 63.0 / v as f64, 1e-12));
    }
    let slow = SystemConfig { eta: 0.9, ..cfg };
    assert!(close(
        schedule_rr_direct(&uni, &slow).unwrap().simulated_dct(),
        1.0 / 0.9,
        1e-12
    ));
}

#[test]
fn oneperm_examples() {
    let cfg = SystemConfig::default();
    let p = make_perm(64, 9).unwrap();
    let res = schedule_rr_oneperm(&p, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 1.96875, 1e-12));
    check_result(&res, &p, &cfg).unwrap();

    let p5 = make_perm(5, 1).unwrap();
    let res = schedule_rr_oneperm(&p5, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 1.6, 1e-12));
    assert_eq!(res.topology().len(), 8);

    let scaled = p.scaled(0.37);
    let res2 = schedule_rr_oneperm(&scaled, &cfg).unwrap();
    assert!(close(res2.simulated_dct(), 0.37 * 1.96875, 1e-12));

    assert!(matches!(
        schedule_rr_oneperm(&make_mv(6, 2, 1).unwrap(), &cfg),
        Err(Error::NotDerangement(_))
    ));
}

#[test]
fn mulp_examples() {
    let cfg = SystemConfig::default();
    let m = common::random_ds(64, 6, 21);
    let res = schedule_rr_mulp(&m, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 1.96875, 1e-9));
    check_result(&res, &m, &cfg).unwrap();

    let p = make_perm(11, 4).unwrap();
    assert!(close(
        schedule_rr_mulp(&p, &cfg).unwrap().simulated_dct(),
        schedule_rr_oneperm(&p, &cfg).unwrap().simulated_dct(),
        1e-15
    ));

    let m2 = common::two_shift_matrix();
    let res = schedule_rr_mulp(&m2, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 1.6, 1e-12));
    assert!(verify_complete(&m2, res.traffic()));
    assert!(verify_feasible(res.topology(), res.traffic(), 1.0).feasible);
    assert!((skewness(res.traffic()).unwrap() - 2.0 / 5.0).abs() < 1e-12);
}

#[test]
fn rr_upper_follows_piecewise_formula_on_mv() {
    let cfg = SystemConfig::default();
    let n = 64;
    for v in 1..n {
        let m = make_mv(n, v, 17).unwrap();
        let res = rr_upper(&m, &cfg).unwrap();
        let nf = n as f64;
        let want = if (v as f64) < nf / 2.0 {
            2.0 - 2.0 / nf
        } else {
            (nf - 1.0) / v as f64
        };
        assert!(
            close(res.simulated_dct(), want, 1e-9),
            "v={v}: {} vs {want}",
            res.simulated_dct()
        );
        let mulp_branch = (2.0 - 2.0 / nf) * m.weight() / ((nf - 1.0) * nf) <= m.max_entry();
        assert_eq!(res.traffic().first_hops().is_empty(), !mulp_branch, "v={v}");
    }
    let uni = DemandMatrix::uniform(16).unwrap();
    let res = rr_upper(&uni, &cfg).unwrap();
    assert!(close(res.simulated_dct(), 1.0, 1e-12));
    assert!(res.traffic().first_hops().is_empty());
}

#[test]
fn pivot_on_mv_is_whole_matrix_choice() {
    let n = 64;
    let rb = 0.015;
    let cfg = SystemConfig::with_rb(rb);
    for v in [1, 10, 39, 40, 63] {
        let m = make_mv(n, v, 2).unwrap();
        let res = pivot(&m, &cfg).unwrap();
        let bvn = 1.0 + rb * v as f64;
        let upper = (2.0 - 2.0 / 64.0f64).min(63.0 / v as f64);
        assert!(close(res.simulated_dct(), bvn.min(upper), 1e-9));
        let split = res.split.as_ref().unwrap();
        assert!(split.pivot == 0 || split.pivot == v);
        check_result(&res, &m, &cfg).unwrap();
    }
    let m = make_mv(n, 40, 1).unwrap();
    assert!(pivot(&m, &cfg).unwrap().claimed_dct <= 1.6 + 1e-3);
}

#[test]
fn pivot_plus_extracts_uniform_component() {
    let n = 32;
    let cfg = SystemConfig::with_rb(0.01);
    let m = make_mvu(n, 5, 0.3, 8).unwrap();
    let (c, rest) = extract_uniform(&m);
    assert!(close(c * (n as f64 - 1.0), 0.3, 1e-12));
    let want = make_mv(n, 5, 8).unwrap().scaled(0.7);
    assert!(rest.max_abs_difference(&want) < 1e-12);
    let res = pivot_plus(&m, &cfg).unwrap();
    assert!(close(res.split.as_ref().unwrap().uniform_cell, c, 1e-15));
    check_result(&res, &m, &cfg).unwrap();

    let m0 = make_mv(n, 5, 8).unwrap();
    let a = pivot_plus(&m0, &cfg).unwrap();
    let b = pivot(&m0, &cfg).unwrap();
    assert_eq!(a.claimed_dct, b.claimed_dct);
    assert_eq!(a.topology(), b.topology());
}

#[test]
fn fixed_slot_modes() {
    let n = 8;
    let m = make_mv(n, 3, 4).unwrap();
    let delta = 0.05;
    let rr = 0.01;
    let eta = delta / (delta + rr);
    let fluid = SystemConfig {
        rr,
        delta: Some(delta),
        ..Default::default()
    };
    let res = schedule_rr_direct(&m, &fluid).unwrap();
    assert!(close(res.simulated_dct(), 7.0 * (1.0 / 3.0) / eta, 1e-12));
    check_result(&res, &m, &fluid).unwrap();

    let quant = SystemConfig {
        quantize: true,
        ..fluid
    };
    let res = schedule_rr_direct(&m, &quant).unwrap();
    let cycles = ((1.0 / 3.0) / delta).ceil();
    assert!(close(res.simulated_dct(), 7.0 * cycles * (delta + rr), 1e-12));
    check_result(&res, &m, &quant).unwrap();

    let p = make_perm(n, 1).unwrap();
    let res = schedule_rr_oneperm(&p, &fluid).unwrap();
    assert!(close(res.simulated_dct(), (2.0 - 2.0 / n as f64) / eta, 1e-12));
    check_result(&res, &p, &fluid).unwrap();
    let res = schedule_rr_oneperm(&p, &quant).unwrap();
    let per_link = 1.0 / n as f64;
    let cycles = (per_link / delta).ceil();
    assert!(close(res.simulated_dct(), 2.0 * 7.0 * cycles * (delta + rr), 1e-12));
    check_result(&res, &p, &quant).unwrap();
}

#[test]
fn pivot_plan_matches_brute_force_split_costs() {
    let n = 10;
    let cfg = SystemConfig::with_rb(0.03);
    for seed in 0..20 {
        let m = common::random_ds(n, 7, seed);
        let d = decompose(&m, &BvnOptions::default()).unwrap();
        let plan = pivot_plan(&d, &cfg);
        assert_eq!(plan.dcts.len(), d.len() + 1);
        let nf = n as f64;
        for i in 0..=d.len() {
            let bvn: f64 = d.coeffs()[..i].iter().map(|b| b + cfg.rb).sum();
            let mut suffix = DemandMatrix::zeros(n);
            let mut cells = vec![vec![0.0; n]; n];
            for (beta, p) in d.terms().skip(i) {
                for k in 0..n {
                    cells[k][p.target(k)] += beta;
                }
            }
            if i < d.len() {
                suffix = DemandMatrix::from_rows(cells).unwrap();
            }
            let rr = if i == d.len() {
                0.0
            } else {
                ((2.0 - 2.0 / nf) * suffix.weight() / nf).min((nf - 1.0) * suffix.max_entry())
            };
            assert!((plan.dcts[i] - (bvn + rr)).abs() < 1e-12, "seed {seed} split {i}");
        }
        let best = plan.dcts.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(plan.dct, best);
        assert_eq!(plan.dcts[plan.pivot], best);
        assert!(plan.dcts[..plan.pivot].iter().all(|&x| x > best));
    }
}

#[test]
fn mixed_matrix_splits_between_subsystems() {
    // one heavy permutation plus many light ones: the heavy term goes to BvN
    let n = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let heavy = Permutation::cyclic_shift(n, 1).unwrap();
    let mut rows = vec![vec![0.0; n]; n];
    for (k, row) in rows.iter_mut().enumerate() {
        row[heavy.target(k)] += 0.7;
    }
    for _ in 0..12 {
        let p = Permutation::random(n, &mut rng).unwrap();
        for (k, row) in rows.iter_mut().enumerate() {
            row[p.target(k)] += 0.3 / 12.0;
        }
    }
    let m = DemandMatrix::from_rows(rows).unwrap();
    let cfg = SystemConfig::with_rb(0.05);
    let res = pivot(&m, &cfg).unwrap();
    let split = res.split.as_ref().unwrap();
    assert!(split.pivot >= 1 && split.pivot < res.decomposition_len.unwrap());
    let bvn = schedule_bvn_direct(&m, &cfg).unwrap().claimed_dct;
    let upper = rr_upper(&m, &cfg).unwrap().claimed_dct;
    assert!(res.claimed_dct < bvn.min(upper));
    check_result(&res, &m, &cfg).unwrap();
    assert!(split.bvn_part.weight() > 0.0 && split.rr_part.weight() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_scheduler_is_feasible_complete_and_honest(
        n in 3usize..=20, k in 1usize..=10, scale in 0.2f64..2.0, seed in any::<u64>(),
        rb in 0.0f64..0.1, eta in 0.5f64..=1.0, fixed in any::<bool>(), quantize in any::<bool>(), rate in 0.5f64..4.0,
    ) {
        let m = common::random_scaled_ds(n, k, scale, seed);
        let mut cfg = SystemConfig { rb, eta, rate, ..Default::default() };
        if fixed {
            cfg.delta = Some(0.02);
            cfg.rr = 0.02 * (1.0 - eta) / eta;
            cfg.eta = 1.0;
            cfg.quantize = quantize;
        }
        for kind in SystemKind::ALL {
            if kind == SystemKind::RrOneperm {
                continue;
            }
            let res = run(kind, &m, &cfg).unwrap();
            prop_assert_eq!(res.label, kind);
            if let Err(e) = check_result(&res, &m, &cfg) {
                return Err(TestCaseError::fail(e));
            }
        }
        let p = Permutation::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().to_matrix(scale);
        let res = schedule_rr_oneperm(&p, &cfg).unwrap();
        if let Err(e) = check_result(&res, &p, &cfg) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn pivot_dominates_both_systems(n in 3usize..=24, k in 1usize..=16, seed in any::<u64>(), rb in 0.0f64..0.2) {
        let m = common::random_ds(n, k, seed);
        let cfg = SystemConfig::with_rb(rb);
        let d = decompose(&m, &cfg.bvn).unwrap();
        let plan = pivot_plan(&d, &cfg);
        let bvn = schedule_bvn_direct(&m, &cfg).unwrap().claimed_dct;
        let upper = rr_upper(&m, &cfg).unwrap().claimed_dct;
        prop_assert!(plan.dct <= bvn.min(upper) + 1e-12);
        prop_assert!(plan.dct <= plan.dcts[0] && plan.dct <= plan.dcts[d.len()]);
    }

    #[test]
    fn oneperm_skew_and_mulp_skew_are_two_over_n(n in 3usize..=24, k in 1usize..=6, seed in any::<u64>()) {
        let cfg = SystemConfig::default();
        let m = common::random_ds(n, k, seed);
        let res = schedule_rr_mulp(&m, &cfg).unwrap();
        prop_assert!((skewness(res.traffic()).unwrap() - 2.0 / n as f64).abs() < 1e-12);
        let d = decompose(&m, &cfg.bvn).unwrap();
        prop_assert!(reconstruct(&d).max_abs_difference(&res.served) == 0.0);
    }
}
