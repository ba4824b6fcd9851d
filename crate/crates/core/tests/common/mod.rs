#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdcn::schedule::{Schedule, TopologySchedule, TrafficSchedule};
use rdcn::{DemandMatrix, Permutation};

/// Random doubly stochastic matrix: a convex combination of `k` random derangements.
pub fn random_ds(n: usize, k: usize, seed: u64) -> DemandMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rows = vec![vec![0.0; n]; n];
    for w in weights {
        let p = Permutation::random(n, &mut rng).unwrap();
        for (r, row) in rows.iter_mut().enumerate() {
            row[p.target(r)] += w / total;
        }
    }
    DemandMatrix::from_rows(rows).unwrap()
}

/// Like `random_ds` but every row and column sums to `scale`.
pub fn random_scaled_ds(n: usize, k: usize, scale: f64, seed: u64) -> DemandMatrix {
    random_ds(n, k, seed).scaled(scale)
}

/// 4x4 matrix with cells 0, 1/3, 2/3 whose 2/3-cells admit no perfect matching.
pub fn thirds_matrix() -> DemandMatrix {
    let t = 1.0 / 3.0;
    let tt = 2.0 / 3.0;
    DemandMatrix::from_rows(vec![
        vec![0.0, tt, t, 0.0],
        vec![t, 0.0, t, t],
        vec![0.0, t, 0.0, tt],
        vec![tt, 0.0, t, 0.0],
    ])
    .unwrap()
}

/// n=5, demand 1/2 to each ring neighbour.
pub fn two_shift_matrix() -> DemandMatrix {
    let n = 5;
    let mut rows = vec![vec![0.0; n]; n];
    for (l, row) in rows.iter_mut().enumerate() {
        row[(l + 1) % n] = 0.5;
        row[(l + 4) % n] = 0.5;
    }
    DemandMatrix::from_rows(rows).unwrap()
}

/// Hand-built two-cycle rr schedule for `two_shift_matrix`: each neighbour flow
/// sends 1/6 directly in each cycle and relays 1/6 through the one node whose
/// onward link is empty (l -> l+1 via l+3, l -> l+4 via l+2). Eight slots of 1/6.
pub fn two_shift_schedule() -> Schedule {
    let n = 5;
    let h = 1.0 / 6.0;
    let mut topo = TopologySchedule::new();
    for _cycle in 0..2 {
        for shift in 1..n {
            topo.push(Permutation::cyclic_shift(n, shift).unwrap(), h, 0.0).unwrap();
        }
    }
    let mut t = TrafficSchedule::new(n, 8);
    for cycle in 0..2 {
        let base = cycle * 4;
        for l in 0..n {
            // slot base+0 is shift 1, base+3 is shift 4
            t.push_direct(base, l, (l + 1) % n, h);
            t.push_direct(base + 3, l, (l + 4) % n, h);
        }
    }
    for l in 0..n {
        // first cycle: l -> l+3 (shift 3) for flow l -> l+1, l -> l+2 (shift 2) for flow l -> l+4
        t.push_first_hop(2, l, (l + 1) % n, (l + 3) % n, h);
        t.push_first_hop(1, l, (l + 4) % n, (l + 2) % n, h);
        // second cycle: the relays forward on the same shifts
        t.push_second_hop(6, l, (l + 1) % n, (l + 3) % n, h);
        t.push_second_hop(5, l, (l + 4) % n, (l + 2) % n, h);
    }
    Schedule::new(topo, t)
}
