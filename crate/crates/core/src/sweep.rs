//! Parameter sweeps over M(v) and TM matrices, aggregated to CSV rows.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::throughput;
use crate::bvn::decompose;
use crate::error::{Error, Result};
use crate::matrix::{make_mv, DemandMatrix, MatrixMetrics};
use crate::systems::{pivot_plan, upper_plan, SystemConfig, SystemKind};
use crate::traffic::{generate_tm, TmParams, DEFAULT_NOISE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Mv,
    Flows,
    ClSparse,
    ClDense,
    TlSparse,
    TlDense,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Mv,
        Experiment::Flows,
        Experiment::ClSparse,
        Experiment::ClDense,
        Experiment::TlSparse,
        Experiment::TlDense,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Mv => "mv",
            Experiment::Flows => "flows",
            Experiment::ClSparse => "cl-sparse",
            Experiment::ClDense => "cl-dense",
            Experiment::TlSparse => "tl-sparse",
            Experiment::TlDense => "tl-dense",
        }
    }

    pub fn default_rb(&self) -> f64 {
        match self {
            Experiment::Mv => 0.015,
            _ => 0.01,
        }
    }

    /// The swept values of x.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let tenths = || (1..=9).map(|k| k as f64 / 10.0).collect();
        match self {
            Experiment::Mv => (1..n).map(|v| v as f64).collect(),
            Experiment::Flows => {
                let top = 4 * n * n;
                std::iter::successors(Some(4usize), |&x| Some(x * 2))
                    .take_while(|&x| x <= top)
                    .map(|x| x as f64)
                    .collect()
            }
            _ => tenths(),
        }
    }

    fn tm_params(&self, x: f64, n: usize, seed: u64) -> TmParams {
        let (t_l, n_f, c_l) = match self {
            Experiment::Flows => (0.2, x as usize, 0.7),
            Experiment::ClSparse => (0.2, 64, x),
            Experiment::ClDense => (0.2, 3000, x),
            Experiment::TlSparse => (x, 64, 0.7),
            Experiment::TlDense => (x, 3000, 0.7),
            Experiment::Mv => unreachable!("M(v) sweep has no TM parameters"),
        };
        TmParams::new(t_l, n_f, c_l, n, seed)
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Overrides the experiment's default BvN reconfiguration time.
    pub rb: Option<f64>,
    pub system: SystemConfig,
    pub noise: f64,
    pub literal: bool,
    /// Overrides the experiment's default x grid.
    pub grid: Option<Vec<f64>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 64,
            repeats: 30,
            seed: 1,
            rb: None,
            system: SystemConfig::default(),
            noise: DEFAULT_NOISE,
            literal: false,
            grid: None,
        }
    }
}

/// Per-run completion times of the three systems on one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub bvn: f64,
    pub rr: f64,
    pub comp: f64,
    pub bvn_length: usize,
    /// Fraction of the served weight the composite schedule sends over BvN.
    pub bvn_share: f64,
    pub metrics: MatrixMetrics,
}

/// Decomposes once and prices BvN-Direct, rr-Upper and Pivot on `m`.
pub fn evaluate_matrix(m: &DemandMatrix, cfg: &SystemConfig) -> Result<RunOutcome> {
    let d = decompose(m, &cfg.bvn)?;
    let bvn = d.coeff_sum() / cfg.rate + d.len() as f64 * cfg.rb;
    let (rr, _) = upper_plan(m, Some(&d), cfg);
    let plan = pivot_plan(&d, cfg);
    let total = d.coeff_sum();
    let head: f64 = d.coeffs()[..plan.pivot].iter().sum();
    Ok(RunOutcome {
        bvn,
        rr,
        comp: plan.dct,
        bvn_length: d.len(),
        bvn_share: if total > 0.0 { head / total } else { 0.0 },
        metrics: m.metrics(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub system: String,
    pub dct_mean: f64,
    pub dct_std: f64,
    pub throughput_mean: f64,
    pub sparsity_mean: f64,
    pub max_entry_mean: f64,
    pub variation_distance_mean: f64,
    pub bvn_length_mean: f64,
    pub bvn_share_mean: f64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-run seed.
pub fn derive_seed(seed: u64, point: usize, run: usize) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ point as u64) ^ run as u64)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn run_sweep(exp: Experiment, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidParams("repeats must be at least 1".into()));
    }
    let mut sys = cfg.system;
    sys.rb = cfg.rb.unwrap_or_else(|| exp.default_rb());
    sys.validate()?;
    let grid = cfg.grid.clone().unwrap_or_else(|| exp.grid(cfg.n));
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..cfg.repeats).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let seed = derive_seed(cfg.seed, p, r);
            let m = match exp {
                Experiment::Mv => make_mv(cfg.n, grid[p] as usize, seed)?,
                _ => {
                    let mut tm = exp.tm_params(grid[p], cfg.n, seed);
                    tm.noise = cfg.noise;
                    tm.literal = cfg.literal;
                    generate_tm(&tm)?
                }
            };
            evaluate_matrix(&m, &sys)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(grid.len() * 3);
    for (p, &x) in grid.iter().enumerate() {
        let runs = &outcomes[p * cfg.repeats..(p + 1) * cfg.repeats];
        let avg = |f: &dyn Fn(&RunOutcome) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
        let sparsity = avg(&|o| o.metrics.sparsity);
        let max_entry = avg(&|o| o.metrics.max_entry);
        let variation = avg(&|o| o.metrics.variation_distance);
        let length = avg(&|o| o.bvn_length as f64);
        let share = avg(&|o| o.bvn_share);
        type Getter = fn(&RunOutcome) -> f64;
        let pick: [(SystemKind, Getter); 3] = [
            (SystemKind::BvnDirect, |o| o.bvn),
            (SystemKind::RrUpper, |o| o.rr),
            (SystemKind::CompPivot, |o| o.comp),
        ];
        for (kind, get) in pick {
            let dcts: Vec<f64> = runs.iter().map(get).collect();
            let thr: Vec<f64> = dcts.iter().map(|&d| throughput(d)).collect::<Result<_>>()?;
            let (dct_mean, dct_std) = mean_std(&dcts);
            rows.push(SweepRow {
                x,
                system: kind.to_string(),
                dct_mean,
                dct_std,
                throughput_mean: mean_std(&thr).0,
                sparsity_mean: sparsity,
                max_entry_mean: max_entry,
                variation_distance_mean: variation,
                bvn_length_mean: length,
                bvn_share_mean: share,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flows_grid_is_geometric() {
        let g = Experiment::Flows.grid(64);
        assert_eq!(g.first(), Some(&4.0));
        assert_eq!(g.last(), Some(&16384.0));
        assert_eq!(g.len(), 13);
    }

    #[test]
    fn experiment_names() {
        for e in Experiment::ALL {
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
        assert!("bogus".parse::<Experiment>().is_err());
    }
}
