//! Closed-form completion times, bounds, crossing points and collision cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DemandMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
}

/// Inputs echoed alongside a bound; unset fields are omitted from JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub kind: BoundKind,
    pub source: String,
    pub params: BoundParams,
}

/// BvN: every permutation is held `beta/r` and costs one reconfiguration.
pub fn dct_bvn(weight: f64, n: usize, v: usize, rb: f64, rate: f64) -> f64 {
    weight / (n as f64 * rate) + v as f64 * rb
}

/// rr, single hop only.
pub fn dct_rr_direct(n: usize, max_entry: f64, eta: f64, rate: f64) -> f64 {
    (n as f64 - 1.0) * max_entry / (eta * rate)
}

/// rr with every permutation spread over two cycles.
pub fn dct_rr_mulp(n: usize, weight: f64, eta: f64, rate: f64) -> f64 {
    let nf = n as f64;
    (2.0 - 2.0 / nf) * weight / (eta * rate * nf)
}

/// The better of the two rr schedules.
pub fn dct_rr_upper(n: usize, weight: f64, max_entry: f64, eta: f64, rate: f64) -> f64 {
    dct_rr_mulp(n, weight, eta, rate).min(dct_rr_direct(n, max_entry, eta, rate))
}

/// Lower bound for any rr schedule with skewness `phi` and `w` unused links per row.
pub fn dct_rr_lower(n: usize, weight: f64, eta: f64, rate: f64, phi: f64, w: usize) -> f64 {
    let nf = n as f64;
    (2.0 - phi) * (weight / (eta * rate * nf)) * ((nf - 1.0) / (nf - w as f64))
}

/// Largest achievable skewness on M(v) with `w` inactive cells per row.
pub fn skew_upper_mv(n: usize, v: f64, w: usize) -> f64 {
    2.0 * v / (n as f64 - w as f64 + v)
}

/// rr lower bound on saturated M(v) (one inactive cell per row).
pub fn dct_rr_lower_mv(n: usize, v: f64, eta: f64, rate: f64) -> f64 {
    dct_rr_lower(n, n as f64, eta, rate, skew_upper_mv(n, v, 1), 1)
}

/// Where the BvN line `1 + rb v` meets the rr Direct curve `(n-1)/v`.
pub fn bvn_direct_crossing(n: usize, rb: f64) -> f64 {
    ((1.0 + 4.0 * rb * (n as f64 - 1.0)).sqrt() - 1.0) / (2.0 * rb)
}

/// Where the BvN line meets the MulP plateau `2 - 2/n`.
pub fn bvn_mulp_crossing(n: usize, rb: f64) -> f64 {
    (n as f64 - 2.0) / (n as f64 * rb)
}

/// Where the BvN line meets the rr lower bound on M(v).
pub fn low_crossing(rb: f64, n: usize) -> f64 {
    let nf = n as f64;
    let b = rb - 1.0 - nf * rb;
    (rb * (1.0 - nf) - 1.0 + (4.0 * rb * (nf - 1.0) + b * b).sqrt()) / (2.0 * rb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemFamily {
    Bvn,
    Rr,
    Comp,
}

impl std::str::FromStr for SystemFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bvn" => Ok(Self::Bvn),
            "rr" => Ok(Self::Rr),
            "comp" => Ok(Self::Comp),
            other => Err(Error::UnknownSystem(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub v: f64,
    pub u: f64,
    pub dct: f64,
}

/// Worst-case DCT of a system over the M(v,u) family.
pub fn system_dct_mvu(family: SystemFamily, n: usize, rb: f64, eta: f64, rate: f64) -> WorstCase {
    let nf = n as f64;
    let mulp = (2.0 - 2.0 / nf) / (eta * rate);
    match family {
        SystemFamily::Bvn => WorstCase {
            v: nf - 1.0,
            u: 0.0,
            dct: 1.0 / rate + (nf - 1.0) * rb,
        },
        SystemFamily::Rr => WorstCase {
            v: 1.0,
            u: 0.0,
            dct: mulp,
        },
        SystemFamily::Comp => {
            let bvn_line = |v: f64| 1.0 / rate + rb * v;
            if rb <= 0.0 {
                return WorstCase {
                    v: nf - 1.0,
                    u: 0.0,
                    dct: 1.0 / rate,
                };
            }
            let threshold = 2.0 * (mulp * rate - 1.0) / (nf * rate);
            if rb < threshold {
                let ir = 1.0 / rate;
                let v = (-ir + (ir * ir + 4.0 * rb * (nf - 1.0) / (eta * rate)).sqrt()) / (2.0 * rb);
                let v = v.min(nf - 1.0);
                WorstCase {
                    v,
                    u: 0.0,
                    dct: bvn_line(v),
                }
            } else {
                let v = ((mulp * rate - 1.0) / (rate * rb)).max(1.0);
                WorstCase {
                    v,
                    u: 0.0,
                    dct: bvn_line(v).min(mulp),
                }
            }
        }
    }
}

/// Composite DCT on M(v,u) once the uniform part is sent single-hop.
pub fn dct_comp_mvu(v: f64, u: f64, n: usize, rb: f64, eta: f64, rate: f64) -> f64 {
    let nf = n as f64;
    let er = eta * rate;
    let uni = u / er;
    let keep = 1.0 - u;
    if keep <= 0.0 {
        return uni;
    }
    let bvn = |v: f64| keep / rate + rb * v;
    let direct = |v: f64| keep * (nf - 1.0) / (v * er);
    let plateau = keep * (2.0 - 2.0 / nf) / er;
    if rb <= 0.0 {
        return uni + bvn(v);
    }
    let threshold = 2.0 * keep * ((2.0 - 2.0 / nf) / eta - 1.0) / (nf * rate);
    if rb < threshold {
        let b = keep / rate;
        let cross = (-b + (b * b + 4.0 * rb * keep * (nf - 1.0) / er).sqrt()) / (2.0 * rb);
        if v < cross {
            uni + bvn(v)
        } else {
            uni + direct(v)
        }
    } else {
        let cross = keep * ((2.0 - 2.0 / nf) / eta - 1.0) / (rate * rb);
        if v < cross {
            uni + bvn(v)
        } else if v < nf / 2.0 {
            uni + plateau
        } else {
            uni + direct(v)
        }
    }
}

/// Relative advantage of the composite system over the better single system.
pub fn psi(n: usize, rb: f64) -> f64 {
    let comp = system_dct_mvu(SystemFamily::Comp, n, rb, 1.0, 1.0).dct;
    let rr = system_dct_mvu(SystemFamily::Rr, n, rb, 1.0, 1.0).dct;
    let bvn = system_dct_mvu(SystemFamily::Bvn, n, rb, 1.0, 1.0).dct;
    (rr / comp).min(bvn / comp) - 1.0
}

pub fn throughput(dct: f64) -> Result<f64> {
    if dct.is_finite() && dct > 0.0 {
        Ok(1.0 / dct)
    } else {
        Err(Error::NonPositiveDct(dct))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionKind {
    Single,
    Dual,
}

/// Empty cell `(row, col)` whose use as a relay lands on demand cells `(col, a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionCell {
    pub row: usize,
    pub col: usize,
    pub kind: CollisionKind,
    pub witnesses: Vec<usize>,
}

/// Cells above `tau` count as demand.
pub fn find_collision_cells(m: &DemandMatrix, tau: f64) -> Vec<CollisionCell> {
    let n = m.n();
    let mut out = Vec::new();
    for l in 0..n {
        for j in 0..n {
            if j == l || m.get(l, j) > tau {
                continue;
            }
            let witnesses: Vec<usize> = (0..n)
                .filter(|&a| a != l && a != j && m.get(l, a) > tau && m.get(j, a) > tau)
                .collect();
            let kind = match witnesses.len() {
                0 => continue,
                1 => CollisionKind::Single,
                _ => CollisionKind::Dual,
            };
            out.push(CollisionCell {
                row: l,
                col: j,
                kind,
                witnesses,
            });
        }
    }
    out
}
