//! Stochastic demand matrices built from large and small random-permutation flows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DemandMatrix, Permutation};

pub const DEFAULT_NOISE: f64 = 0.01;
const SINKHORN_TOLERANCE: f64 = 1e-12;
const SINKHORN_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmParams {
    /// Fraction of flows that are large.
    pub t_l: f64,
    /// Flows per node.
    pub n_f: usize,
    /// Share of the load carried by large flows.
    pub c_l: f64,
    pub n: usize,
    /// Noise standard deviation relative to a flow's nominal weight.
    pub noise: f64,
    pub seed: u64,
    /// Weight large flows by `t_l / n_l` (and small ones by `(1 - t_l) / n_s`)
    /// instead of by the load share `c_l`.
    pub literal: bool,
}

impl TmParams {
    pub fn new(t_l: f64, n_f: usize, c_l: f64, n: usize, seed: u64) -> Self {
        TmParams {
            t_l,
            n_f,
            c_l,
            n,
            noise: DEFAULT_NOISE,
            seed,
            literal: false,
        }
    }

    pub fn large_flows(&self) -> usize {
        let raw = self.t_l * self.n_f as f64;
        // guard against 0.2 * 5 = 1.0000000000000002
        let k = (raw - 1e-9).ceil().max(0.0) as usize;
        k.min(self.n_f)
    }

    pub fn small_flows(&self) -> usize {
        self.n_f - self.large_flows()
    }

    fn validate(&self) -> Result<()> {
        let frac = |x: f64| (0.0..=1.0).contains(&x);
        if !frac(self.t_l) || !frac(self.c_l) {
            return Err(Error::InvalidParams(format!(
                "t_l={} and c_l={} must lie in [0,1]",
                self.t_l, self.c_l
            )));
        }
        if self.n_f == 0 {
            return Err(Error::InvalidParams("n_f must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidParams(format!("noise must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }

    fn shares(&self) -> (f64, f64) {
        if self.literal {
            (self.t_l, 1.0 - self.t_l)
        } else {
            (self.c_l, 1.0 - self.c_l)
        }
    }
}

/// Sum of noisy weighted random derangements, before normalization.
pub fn raw_tm(p: &TmParams) -> Result<DemandMatrix> {
    p.validate()?;
    let n = p.n;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (large_share, small_share) = p.shares();
    let n_l = p.large_flows();
    let n_s = p.small_flows();
    let mut m = DemandMatrix::zeros(n);
    for i in 0..p.n_f {
        let mean = if i < n_l {
            large_share / n_l as f64
        } else {
            small_share / n_s as f64
        };
        let perm = Permutation::random(n, &mut rng)?;
        let weight = if p.noise > 0.0 && mean > 0.0 {
            let normal = Normal::new(mean, p.noise * mean).map_err(|e| Error::InvalidParams(e.to_string()))?;
            normal.sample(&mut rng).max(0.0)
        } else {
            mean
        };
        if weight > 0.0 {
            for k in 0..n {
                m.add_to(k, perm.target(k), weight);
            }
        }
    }
    Ok(m)
}

/// Alternating row/column scaling until every sum is within `tol` of 1.
pub fn sinkhorn(m: &DemandMatrix, tol: f64) -> Result<DemandMatrix> {
    let n = m.n();
    let mut cells = m.as_slice().to_vec();
    for _ in 0..SINKHORN_MAX_ITERS {
        for i in 0..n {
            let s: f64 = cells[i * n..(i + 1) * n].iter().sum();
            if s <= 0.0 {
                return Err(Error::InvalidParams(format!("row {i} is empty")));
            }
            cells[i * n..(i + 1) * n].iter_mut().for_each(|c| *c /= s);
        }
        let mut cols = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                cols[j] += cells[i * n + j];
            }
        }
        if cols.iter().any(|&c| c <= 0.0) {
            return Err(Error::InvalidParams("empty column".into()));
        }
        for i in 0..n {
            for j in 0..n {
                cells[i * n + j] /= cols[j];
            }
        }
        let worst_row = (0..n)
            .map(|i| (cells[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst_row <= tol {
            return DemandMatrix::from_cells(n, cells);
        }
    }
    Err(Error::InvalidParams("matrix scaling did not converge".into()))
}

/// A doubly stochastic TM(t_l, n_f, c_l, n) sample.
pub fn generate_tm(p: &TmParams) -> Result<DemandMatrix> {
    sinkhorn(&raw_tm(p)?, SINKHORN_TOLERANCE)
}
