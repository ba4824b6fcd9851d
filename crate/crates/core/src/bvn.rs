//! Birkhoff-von Neumann epsilon-decomposition into weighted derangements.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{adjacency, lexicographic_min, perfect_matching};
use crate::matrix::{DemandMatrix, Permutation, DS_TOLERANCE};

/// Cells at or below this value never count as support, even when `epsilon == 0`.
pub const SUPPORT_FLOOR: f64 = 1e-12;

pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingStrategy {
    /// Any perfect matching found by augmenting paths.
    MinGreedy,
    /// The matching whose smallest cell is largest; ties go to the
    /// lexicographically smallest permutation.
    #[default]
    MaxBottleneck,
}

impl std::str::FromStr for MatchingStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-greedy" => Ok(Self::MinGreedy),
            "max-bottleneck" => Ok(Self::MaxBottleneck),
            other => Err(Error::InvalidParams(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvnOptions {
    pub epsilon: f64,
    pub strategy: MatchingStrategy,
    pub ds_tolerance: f64,
}

impl Default for BvnOptions {
    fn default() -> Self {
        BvnOptions {
            epsilon: DEFAULT_EPSILON,
            strategy: MatchingStrategy::MaxBottleneck,
            ds_tolerance: DS_TOLERANCE,
        }
    }
}

impl BvnOptions {
    pub fn exact() -> Self {
        BvnOptions {
            epsilon: 0.0,
            ..Default::default()
        }
    }
}

/// Ordered terms `beta_i * P_i` plus the Frobenius norm of what was left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvnDecomposition {
    n: usize,
    coeffs: Vec<f64>,
    perms: Vec<Permutation>,
    residual: f64,
    #[serde(default)]
    sorted: bool,
}

impl BvnDecomposition {
    pub fn empty(n: usize) -> Self {
        BvnDecomposition {
            n,
            coeffs: Vec::new(),
            perms: Vec::new(),
            residual: 0.0,
            sorted: true,
        }
    }

    /// Builds a decomposition from explicit terms; `sorted` is derived.
    pub fn from_terms(n: usize, terms: Vec<(f64, Permutation)>, residual: f64) -> Result<Self> {
        for (b, p) in &terms {
            if !(b.is_finite() && *b > 0.0) {
                return Err(Error::InvalidParams(format!("coefficient {b} must be positive")));
            }
            if p.n() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: p.n(),
                });
            }
        }
        let sorted = terms.windows(2).all(|w| w[0].0 >= w[1].0);
        let (coeffs, perms) = terms.into_iter().unzip();
        Ok(BvnDecomposition {
            n,
            coeffs,
            perms,
            residual,
            sorted,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn is_sorted(&self) -> bool {
        self.sorted
    }
    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }
    pub fn terms(&self) -> impl Iterator<Item = (f64, &Permutation)> {
        self.coeffs.iter().copied().zip(self.perms.iter())
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn from_json<R: Read>(r: R) -> Result<Self> {
        let d: BvnDecomposition = serde_json::from_reader(r)?;
        BvnDecomposition::from_terms(d.n, d.coeffs.into_iter().zip(d.perms).collect(), d.residual)
    }
}

/// `sum beta_i P_i`.
pub fn reconstruct(d: &BvnDecomposition) -> DemandMatrix {
    let n = d.n;
    let mut m = DemandMatrix::zeros(n);
    for (b, p) in d.terms() {
        for k in 0..n {
            m.add_to(k, p.target(k), b);
        }
    }
    m
}

/// A perfect matching over cells strictly above `threshold`, or `None`.
pub fn support_matching(m: &DemandMatrix, threshold: f64, strategy: MatchingStrategy) -> Option<Permutation> {
    matching_on(m.as_slice(), m.n(), threshold, strategy)
        .map(|t| Permutation::new(t).expect("support excludes the diagonal"))
}

fn matching_on(cells: &[f64], n: usize, threshold: f64, strategy: MatchingStrategy) -> Option<Vec<usize>> {
    let threshold = threshold.max(0.0);
    match strategy {
        MatchingStrategy::MinGreedy => {
            let adj = adjacency(n, |i, j| i != j && cells[i * n + j] > threshold);
            perfect_matching(&adj)
        }
        MatchingStrategy::MaxBottleneck => bottleneck_matching(cells, n, threshold),
    }
}

fn bottleneck_matching(cells: &[f64], n: usize, threshold: f64) -> Option<Vec<usize>> {
    // No matching can beat the smallest row or column maximum.
    let mut cap = f64::INFINITY;
    for i in 0..n {
        let mut rmax = 0.0f64;
        let mut cmax = 0.0f64;
        for j in 0..n {
            rmax = rmax.max(cells[i * n + j]);
            cmax = cmax.max(cells[j * n + i]);
        }
        cap = cap.min(rmax).min(cmax);
    }
    if cap <= threshold {
        return None;
    }
    let mut values: Vec<f64> = cells
        .iter()
        .enumerate()
        .filter(|&(idx, &v)| idx / n != idx % n && v > threshold && v <= cap)
        .map(|(_, &v)| v)
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let feasible = |b: f64| {
        let adj = adjacency(n, |i, j| i != j && cells[i * n + j] >= b);
        perfect_matching(&adj).map(|m| (adj, m))
    };
    // Largest index whose value still admits a perfect matching.
    let (mut lo, mut hi) = (0usize, values.len());
    let mut best = feasible(values[0])?;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match feasible(values[mid]) {
            Some(found) => {
                lo = mid;
                best = found;
            }
            None => hi = mid,
        }
    }
    let (adj, mut mate) = best;
    lexicographic_min(&adj, &mut mate);
    Some(mate)
}

/// Greedy epsilon-decomposition. Terms come back sorted by coefficient, largest first.
pub fn decompose(m: &DemandMatrix, opts: &BvnOptions) -> Result<BvnDecomposition> {
    let n = m.n();
    if m.doubly_stochastic_load(opts.ds_tolerance).is_none() {
        let rows = m.row_sums();
        let cols = m.col_sums();
        let lo = rows.iter().chain(&cols).copied().fold(f64::INFINITY, f64::min);
        let hi = rows.iter().chain(&cols).copied().fold(0.0, f64::max);
        return Err(Error::NotDoublyStochastic(format!(
            "row/column sums span [{lo}, {hi}] (tolerance {})",
            opts.ds_tolerance
        )));
    }
    if n < 2 {
        return Ok(BvnDecomposition::empty(n));
    }
    let eps = opts.epsilon.max(0.0);
    let threshold = (eps / (n * n) as f64).max(SUPPORT_FLOOR);
    let mut work = m.as_slice().to_vec();
    let mut terms: Vec<(f64, Permutation)> = Vec::new();
    let frob = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut residual = frob(&work);
    while residual > eps {
        let Some(targets) = matching_on(&work, n, threshold, opts.strategy) else {
            if residual <= eps + n as f64 * opts.ds_tolerance {
                break;
            }
            return Err(Error::NoPerfectMatching { residual });
        };
        let (argmin, beta) = targets
            .iter()
            .enumerate()
            .map(|(k, &t)| (k, work[k * n + t]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n >= 2");
        for (k, &t) in targets.iter().enumerate() {
            let cell = &mut work[k * n + t];
            *cell = if k == argmin { 0.0 } else { (*cell - beta).max(0.0) };
        }
        terms.push((beta, Permutation::new(targets).expect("support excludes the diagonal")));
        residual = frob(&work);
    }
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    BvnDecomposition::from_terms(n, terms, residual)
}
