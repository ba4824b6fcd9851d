//! Demand matrices, derangement permutations and the M(v) / M(v,u) families.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance on row/column sums.
pub const DS_TOLERANCE: f64 = 1e-9;

/// A derangement: `target(k)` is the column of the single 1 in row `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(targets: Vec<usize>) -> Result<Self> {
        let n = targets.len();
        if n < 2 {
            return Err(Error::NotDerangement(format!("size {n} < 2")));
        }
        let mut seen = vec![false; n];
        for (k, &t) in targets.iter().enumerate() {
            if t >= n {
                return Err(Error::NotDerangement(format!("row {k} maps to {t} >= {n}")));
            }
            if t == k {
                return Err(Error::NotDerangement(format!("fixed point at {k}")));
            }
            if seen[t] {
                return Err(Error::NotDerangement(format!("column {t} used twice")));
            }
            seen[t] = true;
        }
        Ok(Permutation(targets))
    }

    /// `k -> (k + shift) mod n`, for `1 <= shift < n`.
    pub fn cyclic_shift(n: usize, shift: usize) -> Result<Self> {
        if n < 2 || shift == 0 || shift >= n {
            return Err(Error::InvalidParams(format!("shift {shift} invalid for n={n}")));
        }
        Ok(Permutation((0..n).map(|k| (k + shift) % n).collect()))
    }

    /// Uniformly random derangement by rejection sampling.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("no derangement of size {n}")));
        }
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            p.shuffle(rng);
            if p.iter().enumerate().all(|(k, &t)| k != t) {
                return Ok(Permutation(p));
            }
        }
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn target(&self, row: usize) -> usize {
        self.0[row]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (k, &t) in self.0.iter().enumerate() {
            inv[t] = k;
        }
        Permutation(inv)
    }

    #[inline]
    pub fn connects(&self, x: usize, y: usize) -> bool {
        self.0.get(x) == Some(&y)
    }

    /// `weight * P` as a dense matrix.
    pub fn to_matrix(&self, weight: f64) -> DemandMatrix {
        let n = self.n();
        let mut m = DemandMatrix::zeros(n);
        for (k, &t) in self.0.iter().enumerate() {
            m.cells[k * n + t] = weight;
        }
        m
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// Square nonnegative matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix {
    n: usize,
    cells: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetrics {
    pub weight: f64,
    pub max_entry: f64,
    pub sparsity: f64,
    pub variation_distance: f64,
}

impl DemandMatrix {
    pub fn zeros(n: usize) -> Self {
        DemandMatrix {
            n,
            cells: vec![0.0; n * n],
        }
    }

    /// Row-major cells; validates shape, finiteness, sign and the diagonal.
    pub fn from_cells(n: usize, cells: Vec<f64>) -> Result<Self> {
        if n == 0 || cells.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                got: cells.len(),
            });
        }
        for (idx, &v) in cells.iter().enumerate() {
            let (row, col) = (idx / n, idx % n);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidCell { row, col, value: v });
            }
            if row == col && v != 0.0 {
                return Err(Error::NonZeroDiagonal(row));
            }
        }
        Ok(DemandMatrix { n, cells })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some((bad_row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                bad_row,
                cols: r.len(),
            });
        }
        Self::from_cells(n, rows.into_iter().flatten().collect())
    }

    /// Uniform matrix M(n-1): every off-diagonal cell equals `1/(n-1)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("uniform matrix needs n >= 2, got {n}")));
        }
        let c = 1.0 / (n - 1) as f64;
        let mut m = DemandMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.cells[i * n + j] = c;
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.n + col]
    }

    /// Sets an off-diagonal cell. Negative or non-finite values are rejected.
    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidCell { row, col, value });
        }
        if row == col && value != 0.0 {
            return Err(Error::NonZeroDiagonal(row));
        }
        self.cells[row * self.n + col] = value;
        Ok(())
    }

    pub(crate) fn add_to(&mut self, row: usize, col: usize, value: f64) {
        self.cells[row * self.n + col] += value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.n..(row + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cells
    }

    pub fn weight(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest off-diagonal cell.
    pub fn min_off_diagonal(&self) -> f64 {
        let n = self.n;
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    best = best.min(self.cells[i * n + j]);
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i).iter().enumerate() {
                s[j] += v;
            }
        }
        s
    }

    /// Common row/column sum `lambda` if every sum is within `tol` of it.
    pub fn doubly_stochastic_load(&self, tol: f64) -> Option<f64> {
        let rows = self.row_sums();
        let cols = self.col_sums();
        let lambda = self.weight() / self.n as f64;
        rows.iter()
            .chain(cols.iter())
            .all(|s| (s - lambda).abs() <= tol)
            .then_some(lambda)
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        self.doubly_stochastic_load(tol).is_some()
    }

    pub fn scaled(&self, factor: f64) -> DemandMatrix {
        DemandMatrix {
            n: self.n,
            cells: self.cells.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn frobenius_distance(&self, other: &DemandMatrix) -> f64 {
        assert_eq!(self.n, other.n, "frobenius_distance: size mismatch");
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_difference(&self, other: &DemandMatrix) -> f64 {
        assert_eq!(self.n, other.n, "max_abs_difference: size mismatch");
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sparsity counts every zero cell, diagonal included; variation distance
    /// only looks at off-diagonal cells.
    pub fn metrics(&self) -> MatrixMetrics {
        let n = self.n;
        let weight = self.weight();
        let zeros = self.cells.iter().filter(|&&v| v == 0.0).count();
        let variation_distance = if weight > 0.0 && n > 1 {
            let avg = weight / (n * (n - 1)) as f64;
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        acc += (self.cells[i * n + j] - avg).abs();
                    }
                }
            }
            0.5 * acc / weight
        } else {
            0.0
        };
        MatrixMetrics {
            weight,
            max_entry: self.max_entry(),
            sparsity: zeros as f64 / (n * n) as f64,
            variation_distance,
        }
    }

    /// Dense CSV: `n` lines of `n` comma-separated values, no header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("cell ({i},{j}) `{s}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix file".into()));
        }
        Self::from_rows(rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        for i in 0..self.n {
            wtr.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// The `v` cyclic shifts used for M(v), drawn without replacement from `1..n`.
pub fn mv_shifts(n: usize, v: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 || v == 0 || v > n - 1 {
        return Err(Error::InvalidParams(format!(
            "M(v) needs 1 <= v <= n-1, got v={v}, n={n}"
        )));
    }
    let mut shifts: Vec<usize> = (1..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shifts.shuffle(&mut rng);
    shifts.truncate(v);
    Ok(shifts)
}

/// M(v): `v` disjoint derangements weighted `1/v` each.
pub fn make_mv(n: usize, v: usize, seed: u64) -> Result<DemandMatrix> {
    let shifts = mv_shifts(n, v, seed)?;
    let c = 1.0 / v as f64;
    let mut m = DemandMatrix::zeros(n);
    for s in shifts {
        for k in 0..n {
            m.cells[k * n + (k + s) % n] = c;
        }
    }
    Ok(m)
}

/// M(v,u) = u M(n-1) + (1-u) M(v).
pub fn make_mvu(n: usize, v: usize, u: f64, seed: u64) -> Result<DemandMatrix> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidParams(format!("u must lie in [0,1], got {u}")));
    }
    let base = make_mv(n, v, seed)?;
    if u == 0.0 {
        return Ok(base);
    }
    let uni = u / (n - 1) as f64;
    let mut m = DemandMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m.cells[i * n + j] = uni + (1.0 - u) * base.cells[i * n + j];
            }
        }
    }
    Ok(m)
}

/// A random derangement as a saturated permutation matrix.
pub fn make_perm(n: usize, seed: u64) -> Result<DemandMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Permutation::random(n, &mut rng)?.to_matrix(1.0))
}
