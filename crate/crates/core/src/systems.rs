//! BvN, round-robin and composite schedulers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::{self, BoundKind, BoundParams, BoundReport};
use crate::bvn::{decompose, reconstruct, BvnDecomposition, BvnOptions, SUPPORT_FLOOR};
use crate::error::{Error, Result};
use crate::matrix::{DemandMatrix, Permutation};
use crate::schedule::{
    self, summarize, verify_complete_within, verify_epsilon, verify_feasible, FeasibilityReport, Schedule,
    TopologySchedule, TrafficEntry, TrafficSchedule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    BvnDirect,
    RrDirect,
    RrOneperm,
    RrMulp,
    RrUpper,
    RrUpperPlus,
    CompPivot,
    CompPivotPlus,
}

impl SystemKind {
    pub const ALL: [SystemKind; 8] = [
        SystemKind::BvnDirect,
        SystemKind::RrDirect,
        SystemKind::RrOneperm,
        SystemKind::RrMulp,
        SystemKind::RrUpper,
        SystemKind::RrUpperPlus,
        SystemKind::CompPivot,
        SystemKind::CompPivotPlus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::BvnDirect => "bvn-direct",
            SystemKind::RrDirect => "rr-direct",
            SystemKind::RrOneperm => "rr-oneperm",
            SystemKind::RrMulp => "rr-mulp",
            SystemKind::RrUpper => "rr-upper",
            SystemKind::RrUpperPlus => "rr-upper-plus",
            SystemKind::CompPivot => "comp-pivot",
            SystemKind::CompPivotPlus => "comp-pivot-plus",
        }
    }

    pub fn is_rr(&self) -> bool {
        matches!(
            self,
            SystemKind::RrDirect
                | SystemKind::RrOneperm
                | SystemKind::RrMulp
                | SystemKind::RrUpper
                | SystemKind::RrUpperPlus
        )
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownSystem(s.to_string()))
    }
}

/// Reconfiguration charged between subsystems of a composite schedule.
pub const SUBSYSTEM_TRANSITION: f64 = 0.0;

/// Rate, reconfiguration and rr timing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub rate: f64,
    /// BvN reconfiguration time.
    pub rb: f64,
    /// rr reconfiguration time; only meaningful with a fixed slot length.
    pub rr: f64,
    /// Fixed rr slot length. `None` sizes every rr cycle to its load.
    pub delta: Option<f64>,
    /// rr duty cycle when `delta` is `None`.
    pub eta: f64,
    /// Round fixed-slot cycle counts up to whole cycles.
    pub quantize: bool,
    pub bvn: BvnOptions,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            rate: 1.0,
            rb: 0.0,
            rr: 0.0,
            delta: None,
            eta: 1.0,
            quantize: false,
            bvn: BvnOptions::default(),
        }
    }
}

impl SystemConfig {
    pub fn with_rb(rb: f64) -> Self {
        SystemConfig {
            rb,
            ..Default::default()
        }
    }

    pub fn duty_cycle(&self) -> f64 {
        match self.delta {
            Some(d) => d / (d + self.rr),
            None => self.eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParams(format!("{what} = {v}")));
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return bad("rate", self.rate);
        }
        if !(self.rb.is_finite() && self.rb >= 0.0) {
            return bad("rb", self.rb);
        }
        if !(self.rr.is_finite() && self.rr >= 0.0) {
            return bad("rr", self.rr);
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d > 0.0) {
                return bad("delta", d);
            }
        } else if self.rr > 0.0 {
            return Err(Error::InvalidParams(
                "an rr reconfiguration time needs a fixed slot length (delta)".into(),
            ));
        }
        let eta = self.duty_cycle();
        if !(eta > 0.0 && eta <= 1.0) {
            return bad("eta", eta);
        }
        Ok(())
    }

    /// Hold times of the cycles needed to push `load` bits over every link.
    fn cycle_holds(&self, load: f64) -> Vec<f64> {
        if load <= 0.0 {
            return Vec::new();
        }
        let Some(delta) = self.delta else {
            return vec![load / self.rate];
        };
        let x = load / (delta * self.rate);
        if self.quantize {
            let k = (x * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            return vec![delta; k];
        }
        let whole = x.floor();
        let mut holds = vec![delta; whole as usize];
        let frac = x - whole;
        if frac > 1e-12 || holds.is_empty() {
            holds.push(frac * delta);
        }
        holds
    }

    /// Reconfiguration paid after an rr slot held for `alpha`.
    fn rr_reconf(&self, alpha: f64) -> f64 {
        alpha * (1.0 - self.duty_cycle()) / self.duty_cycle()
    }

    /// Wall-clock time of one rr phase carrying `load` per link.
    pub fn rr_phase_time(&self, n: usize, load: f64) -> f64 {
        let holds: f64 = self.cycle_holds(load).iter().sum();
        (n as f64 - 1.0) * holds / self.duty_cycle()
    }

    pub fn rr_direct_time(&self, n: usize, max_entry: f64) -> f64 {
        self.rr_phase_time(n, max_entry)
    }

    pub fn oneperm_time(&self, n: usize, beta: f64) -> f64 {
        2.0 * self.rr_phase_time(n, beta / n as f64)
    }

    pub fn bvn_time(&self, beta: f64) -> f64 {
        beta / self.rate + self.rb
    }
}

/// How a composite schedule split its input.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSplit {
    /// Number of leading (largest) terms served by BvN.
    pub pivot: usize,
    pub bvn_part: DemandMatrix,
    pub rr_part: DemandMatrix,
    /// Per-cell load of the extracted uniform component (0 for plain pivot).
    pub uniform_cell: f64,
    pub rr_uses_mulp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    pub label: SystemKind,
    pub schedule: Schedule,
    pub claimed_dct: f64,
    /// Demand actually scheduled; differs from the input by the decomposition residual.
    pub served: DemandMatrix,
    pub split: Option<PivotSplit>,
    pub decomposition_len: Option<usize>,
}

impl ScheduleResult {
    pub fn topology(&self) -> &TopologySchedule {
        &self.schedule.topology
    }
    pub fn traffic(&self) -> &TrafficSchedule {
        &self.schedule.traffic
    }
    pub fn simulated_dct(&self) -> f64 {
        schedule::completion_time(&self.schedule.topology)
    }
}

/// The `n-1` cyclic shifts whose union is the complete graph.
pub fn rr_cycle_configurations(n: usize) -> Result<Vec<Permutation>> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("rr cycle needs n >= 2, got {n}")));
    }
    (1..n).map(|i| Permutation::cyclic_shift(n, i)).collect()
}

fn bvn_schedule(d: &BvnDecomposition, take: usize, cfg: &SystemConfig) -> Result<Schedule> {
    let n = d.n();
    let mut topo = TopologySchedule::new();
    let mut traffic = TrafficSchedule::new(n, take);
    for (slot, (beta, p)) in d.terms().take(take).enumerate() {
        topo.push(p.clone(), beta / cfg.rate, cfg.rb)?;
        for k in 0..n {
            traffic.push_direct(slot, k, p.target(k), beta);
        }
    }
    Ok(Schedule::new(topo, traffic))
}

fn partial_reconstruct(d: &BvnDecomposition, range: std::ops::Range<usize>) -> DemandMatrix {
    let terms = d
        .terms()
        .skip(range.start)
        .take(range.len())
        .map(|(b, p)| (b, p.clone()))
        .collect();
    reconstruct(&BvnDecomposition::from_terms(d.n(), terms, 0.0).expect("terms come from a valid decomposition"))
}

pub fn schedule_bvn_direct(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let d = decompose(m, &cfg.bvn)?;
    bvn_direct_from(&d, cfg)
}

pub fn bvn_direct_from(d: &BvnDecomposition, cfg: &SystemConfig) -> Result<ScheduleResult> {
    let schedule = bvn_schedule(d, d.len(), cfg)?;
    let claimed_dct = d.coeff_sum() / cfg.rate + d.len() as f64 * cfg.rb;
    Ok(ScheduleResult {
        label: SystemKind::BvnDirect,
        schedule,
        claimed_dct,
        served: reconstruct(d),
        split: None,
        decomposition_len: Some(d.len()),
    })
}

/// Every cell on its own link, spread over as many cycles as the largest cell needs.
fn rr_direct_schedule(m: &DemandMatrix, cfg: &SystemConfig) -> Result<Schedule> {
    let n = m.n();
    let configs = rr_cycle_configurations(n)?;
    let holds = cfg.cycle_holds(m.max_entry());
    let total: f64 = holds.iter().sum();
    let mut topo = TopologySchedule::new();
    let mut traffic = TrafficSchedule::new(n, holds.len() * configs.len());
    let mut slot = 0;
    for &alpha in &holds {
        let share = alpha / total;
        for c in &configs {
            topo.push(c.clone(), alpha, cfg.rr_reconf(alpha))?;
            for k in 0..n {
                let bits = m.get(k, c.target(k)) * share;
                if bits > 0.0 {
                    traffic.push_direct(slot, k, c.target(k), bits);
                }
            }
            slot += 1;
        }
    }
    Ok(Schedule::new(topo, traffic))
}

pub fn schedule_rr_direct(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let schedule = rr_direct_schedule(m, cfg)?;
    Ok(ScheduleResult {
        label: SystemKind::RrDirect,
        schedule,
        claimed_dct: cfg.rr_direct_time(m.n(), m.max_entry()),
        served: m.clone(),
        split: None,
        decomposition_len: None,
    })
}

/// Two rr phases for `beta * P`. In phase one each source sends `beta/n` of its
/// flow on every outgoing link (direct on the aligned link, first hops elsewhere);
/// in phase two every relay forwards what it holds (second hops) and the aligned
/// link again carries `beta/n` directly.
pub fn oneperm_entries(
    p: &Permutation,
    beta: f64,
    cfg: &SystemConfig,
) -> Result<(TopologySchedule, Vec<TrafficEntry>)> {
    let n = p.n();
    let configs = rr_cycle_configurations(n)?;
    let inv = p.inverse();
    let per_link = beta / n as f64;
    let holds = cfg.cycle_holds(per_link);
    let total: f64 = holds.iter().sum();
    let mut topo = TopologySchedule::new();
    let mut entries = Vec::with_capacity(2 * holds.len() * configs.len() * n);
    for phase in 0..2 {
        for &alpha in &holds {
            let w = per_link * alpha / total;
            for c in &configs {
                let t = topo.len();
                topo.push(c.clone(), alpha, cfg.rr_reconf(alpha))?;
                for x in 0..n {
                    let y = c.target(x);
                    let (s, d) = if phase == 0 {
                        (x, p.target(x))
                    } else {
                        (inv.target(y), y)
                    };
                    entries.push(TrafficEntry { t, w, s, d, x, y });
                }
            }
        }
    }
    Ok((topo, entries))
}

fn oneperm_schedule(p: &Permutation, beta: f64, cfg: &SystemConfig) -> Result<Schedule> {
    let (topo, entries) = oneperm_entries(p, beta, cfg)?;
    let traffic = summarize(&entries, &topo)?;
    Ok(Schedule::new(topo, traffic))
}

/// Recovers `(beta, P)` from a scaled derangement matrix.
pub fn as_scaled_permutation(m: &DemandMatrix) -> Result<(f64, Permutation)> {
    let n = m.n();
    let mut targets = Vec::with_capacity(n);
    let mut beta = None;
    for k in 0..n {
        let nz: Vec<usize> = (0..n).filter(|&j| m.get(k, j) > 0.0).collect();
        if nz.len() != 1 {
            return Err(Error::NotDerangement(format!(
                "row {k} has {} non-zero cells",
                nz.len()
            )));
        }
        let v = m.get(k, nz[0]);
        match beta {
            None => beta = Some(v),
            Some(b) if (v - b).abs() > 1e-12 * b => {
                return Err(Error::NotDerangement(format!("row {k} carries {v}, expected {b}")));
            }
            _ => {}
        }
        targets.push(nz[0]);
    }
    Ok((beta.unwrap_or(0.0), Permutation::new(targets)?))
}

pub fn schedule_rr_oneperm(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let (beta, p) = as_scaled_permutation(m)?;
    let schedule = oneperm_schedule(&p, beta, cfg)?;
    Ok(ScheduleResult {
        label: SystemKind::RrOneperm,
        schedule,
        claimed_dct: cfg.oneperm_time(m.n(), beta),
        served: m.clone(),
        split: None,
        decomposition_len: None,
    })
}

fn mulp_schedule<'a>(
    n: usize,
    terms: impl Iterator<Item = (f64, &'a Permutation)>,
    cfg: &SystemConfig,
) -> Result<Schedule> {
    let mut out = Schedule::empty(n);
    for (beta, p) in terms {
        out.append(oneperm_schedule(p, beta, cfg)?);
    }
    Ok(out)
}

fn mulp_time<'a>(n: usize, betas: impl Iterator<Item = &'a f64>, cfg: &SystemConfig) -> f64 {
    betas.map(|&b| cfg.oneperm_time(n, b)).sum()
}

pub fn schedule_rr_mulp(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let d = decompose(m, &cfg.bvn)?;
    mulp_from(&d, cfg)
}

pub fn mulp_from(d: &BvnDecomposition, cfg: &SystemConfig) -> Result<ScheduleResult> {
    let n = d.n();
    Ok(ScheduleResult {
        label: SystemKind::RrMulp,
        schedule: mulp_schedule(n, d.terms(), cfg)?,
        claimed_dct: mulp_time(n, d.coeffs().iter(), cfg),
        served: reconstruct(d),
        split: None,
        decomposition_len: Some(d.len()),
    })
}

/// Completion time of the better rr schedule, and whether it is MulP.
pub fn upper_plan(m: &DemandMatrix, d: Option<&BvnDecomposition>, cfg: &SystemConfig) -> (f64, bool) {
    let direct = cfg.rr_direct_time(m.n(), m.max_entry());
    match d {
        Some(d) => {
            let mulp = mulp_time(m.n(), d.coeffs().iter(), cfg);
            if mulp <= direct {
                (mulp, true)
            } else {
                (direct, false)
            }
        }
        None => (direct, false),
    }
}

/// The better of MulP and Direct. Inputs that cannot be decomposed go Direct.
pub fn rr_upper(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let d = decompose(m, &cfg.bvn).ok();
    let (_, use_mulp) = upper_plan(m, d.as_ref(), cfg);
    let mut res = match (use_mulp, d) {
        (true, Some(d)) => mulp_from(&d, cfg)?,
        _ => schedule_rr_direct(m, cfg)?,
    };
    res.label = SystemKind::RrUpper;
    Ok(res)
}

/// Splits `m` into `c (J - I)` and a remainder, with `c` the smallest off-diagonal cell.
pub fn extract_uniform(m: &DemandMatrix) -> (f64, DemandMatrix) {
    let n = m.n();
    let c = m.min_off_diagonal();
    if c <= 0.0 {
        return (0.0, m.clone());
    }
    let mut rest = DemandMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = m.get(i, j) - c;
                rest.add_to(i, j, if v > SUPPORT_FLOOR { v } else { 0.0 });
            }
        }
    }
    (c, rest)
}

fn uniform_matrix(n: usize, c: f64) -> DemandMatrix {
    let mut u = DemandMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                u.add_to(i, j, c);
            }
        }
    }
    u
}

fn add_matrices(a: &DemandMatrix, b: &DemandMatrix) -> DemandMatrix {
    let n = a.n();
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..n {
            out.add_to(i, j, b.get(i, j));
        }
    }
    out
}

/// Upper on the remainder plus Direct on the uniform component.
pub fn rr_upper_plus(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let (c, rest) = extract_uniform(m);
    let mut res = rr_upper(&rest, cfg)?;
    if c > 0.0 {
        let uni = uniform_matrix(m.n(), c);
        res.schedule.append(rr_direct_schedule(&uni, cfg)?);
        res.claimed_dct += SUBSYSTEM_TRANSITION + cfg.rr_direct_time(m.n(), c);
        res.served = add_matrices(&res.served, &uni);
    }
    res.label = SystemKind::RrUpperPlus;
    Ok(res)
}

/// Completion time of every split point of a sorted decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotPlan {
    /// `dcts[i]`: the `i` largest terms on BvN, the rest on the better rr schedule.
    pub dcts: Vec<f64>,
    /// Whether the rr part of split `i` uses MulP.
    pub rr_mulp: Vec<bool>,
    pub pivot: usize,
    pub dct: f64,
}

pub fn pivot_plan(d: &BvnDecomposition, cfg: &SystemConfig) -> PivotPlan {
    let n = d.n();
    let v = d.len();
    let coeffs = d.coeffs();
    // rr cost of each suffix, built from the smallest term upward
    let mut suffix_upper = vec![0.0; v + 1];
    let mut suffix_mulp_flag = vec![false; v + 1];
    let mut acc = vec![0.0f64; n * n];
    let mut max_cell = 0.0f64;
    let mut mulp = 0.0;
    for i in (0..v).rev() {
        let p = &d.perms()[i];
        for k in 0..n {
            let cell = &mut acc[k * n + p.target(k)];
            *cell += coeffs[i];
            max_cell = max_cell.max(*cell);
        }
        mulp += cfg.oneperm_time(n, coeffs[i]);
        let direct = cfg.rr_direct_time(n, max_cell);
        if mulp <= direct {
            suffix_upper[i] = mulp;
            suffix_mulp_flag[i] = true;
        } else {
            suffix_upper[i] = direct;
        }
    }
    let mut dcts = Vec::with_capacity(v + 1);
    let mut prefix = 0.0;
    for i in 0..=v {
        if i > 0 {
            prefix += cfg.bvn_time(coeffs[i - 1]);
        }
        let transition = if i > 0 && i < v { SUBSYSTEM_TRANSITION } else { 0.0 };
        dcts.push(prefix + transition + suffix_upper[i]);
    }
    let (pivot, dct) =
        dcts.iter().copied().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, x)| if x < best.1 { (i, x) } else { best },
        );
    PivotPlan {
        dcts,
        rr_mulp: suffix_mulp_flag,
        pivot,
        dct,
    }
}

pub fn pivot(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let d = decompose(m, &cfg.bvn)?;
    pivot_from(&d, cfg)
}

pub fn pivot_from(d: &BvnDecomposition, cfg: &SystemConfig) -> Result<ScheduleResult> {
    let n = d.n();
    let v = d.len();
    let plan = pivot_plan(d, cfg);
    let f = plan.pivot;
    let mut schedule = bvn_schedule(d, f, cfg)?;
    let bvn_part = partial_reconstruct(d, 0..f);
    let rr_part = partial_reconstruct(d, f..v);
    let uses_mulp = plan.rr_mulp[f];
    if f < v {
        let rr = if uses_mulp {
            mulp_schedule(n, d.terms().skip(f), cfg)?
        } else {
            rr_direct_schedule(&rr_part, cfg)?
        };
        schedule.append(rr);
    }
    Ok(ScheduleResult {
        label: SystemKind::CompPivot,
        schedule,
        claimed_dct: plan.dct,
        served: add_matrices(&bvn_part, &rr_part),
        split: Some(PivotSplit {
            pivot: f,
            bvn_part,
            rr_part,
            uniform_cell: 0.0,
            rr_uses_mulp: uses_mulp,
        }),
        decomposition_len: Some(v),
    })
}

/// Pivot on the remainder after sending the uniform component single-hop.
pub fn pivot_plus(m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    cfg.validate()?;
    let (c, rest) = extract_uniform(m);
    let mut res = pivot(&rest, cfg)?;
    if c > 0.0 {
        let uni = uniform_matrix(m.n(), c);
        res.schedule.append(rr_direct_schedule(&uni, cfg)?);
        res.claimed_dct += SUBSYSTEM_TRANSITION + cfg.rr_direct_time(m.n(), c);
        res.served = add_matrices(&res.served, &uni);
        if let Some(split) = res.split.as_mut() {
            split.uniform_cell = c;
        }
    }
    res.label = SystemKind::CompPivotPlus;
    Ok(res)
}

pub fn run(kind: SystemKind, m: &DemandMatrix, cfg: &SystemConfig) -> Result<ScheduleResult> {
    match kind {
        SystemKind::BvnDirect => schedule_bvn_direct(m, cfg),
        SystemKind::RrDirect => schedule_rr_direct(m, cfg),
        SystemKind::RrOneperm => schedule_rr_oneperm(m, cfg),
        SystemKind::RrMulp => schedule_rr_mulp(m, cfg),
        SystemKind::RrUpper => rr_upper(m, cfg),
        SystemKind::RrUpperPlus => rr_upper_plus(m, cfg),
        SystemKind::CompPivot => pivot(m, cfg),
        SystemKind::CompPivotPlus => pivot_plus(m, cfg),
    }
}

/// Simulated completion time, verifier verdicts and the matching analytic bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DctReport {
    pub label: SystemKind,
    pub n: usize,
    pub simulated_dct: f64,
    pub claimed_dct: f64,
    pub throughput: Option<f64>,
    pub feasibility: FeasibilityReport,
    /// The served matrix is delivered exactly.
    pub complete: bool,
    /// The input is delivered up to the decomposition tolerance.
    pub epsilon_complete: bool,
    pub skewness: Option<f64>,
    pub slots: usize,
    pub bounds: Vec<BoundReport>,
}

impl DctReport {
    pub fn passed(&self) -> bool {
        self.feasibility.feasible
            && self.epsilon_complete
            && (self.simulated_dct - self.claimed_dct).abs() <= 1e-9 * self.claimed_dct.max(1.0)
    }
}

/// Off-diagonal links a schedule never uses, minimized over rows.
pub fn inactive_cells_per_row(t: &TrafficSchedule) -> usize {
    let n = t.n();
    let load = schedule::total_traffic(t);
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && load.get(i, j) <= 0.0).count())
        .min()
        .unwrap_or(0)
}

pub fn report(res: &ScheduleResult, input: &DemandMatrix, cfg: &SystemConfig) -> DctReport {
    let t = res.traffic();
    let n = input.n();
    let eta = cfg.duty_cycle();
    let simulated = res.simulated_dct();
    let skew = schedule::skewness(t).ok();
    let weight = input.weight();
    let max = input.max_entry();
    let base = BoundParams {
        n: Some(n),
        eta: Some(eta),
        rate: Some(cfg.rate),
        weight: Some(weight),
        ..Default::default()
    };
    let mut bounds = Vec::new();
    let mut push = |value: f64, kind: BoundKind, source: &str, params: BoundParams| {
        bounds.push(BoundReport {
            value,
            kind,
            source: source.to_string(),
            params,
        })
    };
    match res.label {
        SystemKind::BvnDirect => {
            let v = res.topology().len();
            let served_w = res.served.weight();
            push(
                analytics::dct_bvn(served_w, n, v, cfg.rb, cfg.rate),
                BoundKind::Exact,
                "bvn-linear",
                BoundParams {
                    v: Some(v as f64),
                    rb: Some(cfg.rb),
                    weight: Some(served_w),
                    ..base.clone()
                },
            );
        }
        k if k.is_rr() => {
            push(
                analytics::dct_rr_direct(n, max, eta, cfg.rate),
                BoundKind::Upper,
                "rr-direct",
                BoundParams {
                    max: Some(max),
                    ..base.clone()
                },
            );
            push(
                analytics::dct_rr_mulp(n, weight, eta, cfg.rate),
                BoundKind::Upper,
                "rr-mulp",
                base.clone(),
            );
            if let Some(phi) = skew {
                let w = inactive_cells_per_row(t);
                if w < n {
                    push(
                        analytics::dct_rr_lower(n, res.served.weight(), eta, cfg.rate, phi, w),
                        BoundKind::Lower,
                        "rr-skew-lower",
                        BoundParams {
                            phi: Some(phi),
                            w: Some(w),
                            weight: Some(res.served.weight()),
                            ..base.clone()
                        },
                    );
                }
                let hat = schedule::total_traffic(t);
                push(
                    analytics::dct_rr_direct(n, hat.max_entry(), eta, cfg.rate),
                    BoundKind::Lower,
                    "rr-max-link-load",
                    BoundParams {
                        max: Some(hat.max_entry()),
                        ..base.clone()
                    },
                );
            }
        }
        _ => {
            push(
                analytics::dct_rr_upper(n, weight, max, eta, cfg.rate),
                BoundKind::Upper,
                "rr-upper",
                BoundParams {
                    max: Some(max),
                    ..base.clone()
                },
            );
            if let Some(len) = res.decomposition_len {
                push(
                    analytics::dct_bvn(res.served.weight(), n, len, cfg.rb, cfg.rate),
                    BoundKind::Upper,
                    "bvn-linear",
                    BoundParams {
                        v: Some(len as f64),
                        rb: Some(cfg.rb),
                        ..base.clone()
                    },
                );
            }
        }
    }
    DctReport {
        label: res.label,
        n,
        simulated_dct: simulated,
        claimed_dct: res.claimed_dct,
        throughput: analytics::throughput(simulated).ok(),
        feasibility: verify_feasible(res.topology(), t, cfg.rate),
        complete: verify_complete_within(&res.served, t, 1e-9 * res.served.max_entry().max(1.0)),
        epsilon_complete: verify_epsilon(input, t, cfg.bvn.epsilon),
        skewness: skew,
        slots: res.topology().len(),
        bounds,
    }
}
