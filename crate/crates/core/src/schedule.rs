//! Topology and traffic schedules, summarization and the feasibility verifier.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DemandMatrix, Permutation};

/// One configuration held for `alpha` seconds, followed by `reconf` seconds of downtime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    #[serde(rename = "pi")]
    pub config: Permutation,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub reconf: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopologySchedule {
    slots: Vec<Slot>,
}

impl TopologySchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, config: Permutation, alpha: f64, reconf: f64) -> Result<()> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "slot hold time must be positive, got {alpha}"
            )));
        }
        if !(reconf.is_finite() && reconf >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "reconfiguration time must be >= 0, got {reconf}"
            )));
        }
        if let Some(n) = self.n() {
            if config.n() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: config.n(),
                });
            }
        }
        self.slots.push(Slot { config, alpha, reconf });
        Ok(())
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }
    pub fn len(&self) -> usize {
        self.slots.len()
    }
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
    pub fn n(&self) -> Option<usize> {
        self.slots.first().map(|s| s.config.n())
    }

    pub fn extend(&mut self, other: TopologySchedule) {
        self.slots.extend(other.slots);
    }

    fn validate(&self) -> Result<()> {
        let mut copy = TopologySchedule::new();
        for s in &self.slots {
            copy.push(s.config.clone(), s.alpha, s.reconf)?;
        }
        Ok(())
    }
}

/// Sum of hold and reconfiguration times.
pub fn completion_time(s: &TopologySchedule) -> f64 {
    s.slots.iter().map(|x| x.alpha + x.reconf).sum()
}

/// A detailed transmission: `w` bits of flow `s -> d` crossing link `x -> y` in slot `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficEntry {
    pub t: usize,
    pub w: f64,
    pub s: usize,
    pub d: usize,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectFlow {
    pub slot: usize,
    pub src: usize,
    pub dst: usize,
    pub bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopFlow {
    pub slot: usize,
    pub src: usize,
    pub dst: usize,
    pub relay: usize,
    pub bits: f64,
}

/// Sparse per-slot direct, first-hop and second-hop traffic.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSchedule {
    n: usize,
    slots: usize,
    direct: Vec<DirectFlow>,
    first_hops: Vec<HopFlow>,
    second_hops: Vec<HopFlow>,
}

impl TrafficSchedule {
    pub fn new(n: usize, slots: usize) -> Self {
        TrafficSchedule {
            n,
            slots,
            direct: Vec::new(),
            first_hops: Vec::new(),
            second_hops: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn slot_count(&self) -> usize {
        self.slots
    }
    pub fn direct(&self) -> &[DirectFlow] {
        &self.direct
    }
    pub fn first_hops(&self) -> &[HopFlow] {
        &self.first_hops
    }
    pub fn second_hops(&self) -> &[HopFlow] {
        &self.second_hops
    }

    pub fn push_direct(&mut self, slot: usize, src: usize, dst: usize, bits: f64) {
        self.direct.push(DirectFlow { slot, src, dst, bits });
    }
    pub fn push_first_hop(&mut self, slot: usize, src: usize, dst: usize, relay: usize, bits: f64) {
        self.first_hops.push(HopFlow {
            slot,
            src,
            dst,
            relay,
            bits,
        });
    }
    pub fn push_second_hop(&mut self, slot: usize, src: usize, dst: usize, relay: usize, bits: f64) {
        self.second_hops.push(HopFlow {
            slot,
            src,
            dst,
            relay,
            bits,
        });
    }

    /// Mutable access for fault-injection in tests and tools.
    pub fn second_hops_mut(&mut self) -> &mut Vec<HopFlow> {
        &mut self.second_hops
    }
    pub fn first_hops_mut(&mut self) -> &mut Vec<HopFlow> {
        &mut self.first_hops
    }
    pub fn direct_mut(&mut self) -> &mut Vec<DirectFlow> {
        &mut self.direct
    }

    /// Appends `other`, shifting its slots past the current ones.
    pub fn append(&mut self, other: &TrafficSchedule) {
        let off = self.slots;
        self.direct.extend(other.direct.iter().map(|f| DirectFlow {
            slot: f.slot + off,
            ..*f
        }));
        self.first_hops.extend(other.first_hops.iter().map(|f| HopFlow {
            slot: f.slot + off,
            ..*f
        }));
        self.second_hops.extend(other.second_hops.iter().map(|f| HopFlow {
            slot: f.slot + off,
            ..*f
        }));
        self.slots += other.slots;
    }

    /// Per-slot `(m_dl, m_1h, m_2h)`, indexed by original source and final destination.
    pub fn slot_matrices(&self, slot: usize) -> (DemandMatrix, DemandMatrix, DemandMatrix) {
        let mut dl = DemandMatrix::zeros(self.n);
        let mut h1 = DemandMatrix::zeros(self.n);
        let mut h2 = DemandMatrix::zeros(self.n);
        for f in self.direct.iter().filter(|f| f.slot == slot) {
            dl.add_to(f.src, f.dst, f.bits);
        }
        for f in self.first_hops.iter().filter(|f| f.slot == slot) {
            h1.add_to(f.src, f.dst, f.bits);
        }
        for f in self.second_hops.iter().filter(|f| f.slot == slot) {
            h2.add_to(f.src, f.dst, f.bits);
        }
        (dl, h1, h2)
    }

    pub fn direct_total(&self) -> DemandMatrix {
        let mut m = DemandMatrix::zeros(self.n);
        for f in &self.direct {
            m.add_to(f.src, f.dst, f.bits);
        }
        m
    }

    pub fn first_hop_total(&self) -> DemandMatrix {
        hop_total(self.n, &self.first_hops)
    }

    pub fn second_hop_total(&self) -> DemandMatrix {
        hop_total(self.n, &self.second_hops)
    }

    /// What left each source: `sum m_dl + sum m_1h`.
    pub fn sent(&self) -> DemandMatrix {
        let mut m = self.direct_total();
        for f in &self.first_hops {
            m.add_to(f.src, f.dst, f.bits);
        }
        m
    }

    /// What reached each destination: `sum m_dl + sum m_2h`.
    pub fn delivered(&self) -> DemandMatrix {
        let mut m = self.direct_total();
        for f in &self.second_hops {
            m.add_to(f.src, f.dst, f.bits);
        }
        m
    }

    /// Bits carried by each link over the slots in `range`.
    pub fn link_load(&self, range: Range<usize>) -> DemandMatrix {
        let mut m = DemandMatrix::zeros(self.n);
        for f in self.direct.iter().filter(|f| range.contains(&f.slot)) {
            m.add_to(f.src, f.dst, f.bits);
        }
        for f in self.first_hops.iter().filter(|f| range.contains(&f.slot)) {
            m.add_to(f.src, f.relay, f.bits);
        }
        for f in self.second_hops.iter().filter(|f| range.contains(&f.slot)) {
            m.add_to(f.relay, f.dst, f.bits);
        }
        m
    }

    /// Detailed entries equivalent to this schedule.
    pub fn entries(&self) -> Vec<TrafficEntry> {
        let mut out = Vec::with_capacity(self.direct.len() + self.first_hops.len() + self.second_hops.len());
        out.extend(self.direct.iter().map(|f| TrafficEntry {
            t: f.slot,
            w: f.bits,
            s: f.src,
            d: f.dst,
            x: f.src,
            y: f.dst,
        }));
        out.extend(self.first_hops.iter().map(|f| TrafficEntry {
            t: f.slot,
            w: f.bits,
            s: f.src,
            d: f.dst,
            x: f.src,
            y: f.relay,
        }));
        out.extend(self.second_hops.iter().map(|f| TrafficEntry {
            t: f.slot,
            w: f.bits,
            s: f.src,
            d: f.dst,
            x: f.relay,
            y: f.dst,
        }));
        out
    }
}

fn hop_total(n: usize, hops: &[HopFlow]) -> DemandMatrix {
    let mut m = DemandMatrix::zeros(n);
    for f in hops {
        m.add_to(f.src, f.dst, f.bits);
    }
    m
}

/// Classifies detailed entries into direct, first-hop and second-hop traffic.
pub fn summarize(entries: &[TrafficEntry], topology: &TopologySchedule) -> Result<TrafficSchedule> {
    let n = topology.n().unwrap_or(0);
    let mut t = TrafficSchedule::new(n, topology.len());
    for e in entries {
        let slot = topology.slots().get(e.t).ok_or(Error::InadmissibleEntry {
            slot: e.t,
            x: e.x,
            y: e.y,
        })?;
        if e.x >= n || e.y >= n || e.s >= n || e.d >= n || !slot.config.connects(e.x, e.y) {
            return Err(Error::InadmissibleEntry {
                slot: e.t,
                x: e.x,
                y: e.y,
            });
        }
        if !(e.w.is_finite() && e.w > 0.0) {
            return Err(Error::MalformedEntry(format!("{e:?}: bits must be positive")));
        }
        match (e.s == e.x, e.d == e.y) {
            (true, true) => t.push_direct(e.t, e.s, e.d, e.w),
            (true, false) => t.push_first_hop(e.t, e.s, e.d, e.y, e.w),
            (false, true) => t.push_second_hop(e.t, e.s, e.d, e.x, e.w),
            (false, false) => return Err(Error::MalformedEntry(format!("{e:?}"))),
        }
    }
    Ok(t)
}

/// Total link load over the whole schedule.
pub fn total_traffic(t: &TrafficSchedule) -> DemandMatrix {
    t.link_load(0..t.slot_count())
}

/// A violated feasibility property with its location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "kebab-case")]
pub enum Violation {
    Shape {
        detail: String,
    },
    Admissibility {
        slot: usize,
        x: usize,
        y: usize,
    },
    TransmissionTime {
        slot: usize,
        x: usize,
        y: usize,
        load: f64,
        capacity: f64,
    },
    Causality {
        src: usize,
        dst: usize,
        relay: usize,
        slot: Option<usize>,
        deficit: f64,
    },
}

impl Violation {
    /// 1 = admissibility, 2 = transmission time, 3 = causality; 0 for shape errors.
    pub fn property(&self) -> u8 {
        match self {
            Violation::Shape { .. } => 0,
            Violation::Admissibility { .. } => 1,
            Violation::TransmissionTime { .. } => 2,
            Violation::Causality { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violation: Option<Violation>,
}

impl FeasibilityReport {
    fn fail(v: Violation) -> Self {
        FeasibilityReport {
            feasible: false,
            violation: Some(v),
        }
    }
}

const REL_TOL: f64 = 1e-9;

/// Checks admissibility, per-slot link capacity at `rate`, and hop ordering.
pub fn verify_feasible(s: &TopologySchedule, t: &TrafficSchedule, rate: f64) -> FeasibilityReport {
    let n = t.n();
    if t.slot_count() != s.len() || s.n().is_some_and(|m| m != n) {
        return FeasibilityReport::fail(Violation::Shape {
            detail: format!(
                "traffic has {} slots over n={n}, topology has {} slots over n={:?}",
                t.slot_count(),
                s.len(),
                s.n()
            ),
        });
    }
    if let Err(e) = s.validate() {
        return FeasibilityReport::fail(Violation::Shape { detail: e.to_string() });
    }
    let slots = s.slots();
    let mut load = vec![0.0f64; slots.len() * n];
    let bad_bits = |b: f64| !(b.is_finite() && b >= 0.0);

    // (1) admissibility, accumulating per-link loads on the way
    for f in t.direct() {
        if f.slot >= slots.len()
            || f.src >= n
            || f.dst >= n
            || bad_bits(f.bits)
            || !slots[f.slot].config.connects(f.src, f.dst)
        {
            return FeasibilityReport::fail(Violation::Admissibility {
                slot: f.slot,
                x: f.src,
                y: f.dst,
            });
        }
        load[f.slot * n + f.src] += f.bits;
    }
    for (hops, first) in [(t.first_hops(), true), (t.second_hops(), false)] {
        for f in hops {
            let (x, y) = if first { (f.src, f.relay) } else { (f.relay, f.dst) };
            let ok = f.slot < slots.len()
                && f.src < n
                && f.dst < n
                && f.relay < n
                && f.relay != f.src
                && f.relay != f.dst
                && !bad_bits(f.bits)
                && slots[f.slot].config.connects(x, y);
            if !ok {
                return FeasibilityReport::fail(Violation::Admissibility { slot: f.slot, x, y });
            }
            load[f.slot * n + x] += f.bits;
        }
    }

    // (2) transmission time
    for (i, slot) in slots.iter().enumerate() {
        let capacity = slot.alpha * rate;
        for x in 0..n {
            let l = load[i * n + x];
            if l > capacity * (1.0 + REL_TOL) + 1e-15 {
                return FeasibilityReport::fail(Violation::TransmissionTime {
                    slot: i,
                    x,
                    y: slot.config.target(x),
                    load: l,
                    capacity,
                });
            }
        }
    }

    // (3) causality: a second hop only forwards what arrived in strictly earlier slots
    // (slot, is first hop, bits) per (src, dst, relay)
    type Event = (usize, bool, f64);
    let mut events: HashMap<(usize, usize, usize), Vec<Event>> = HashMap::new();
    for f in t.first_hops() {
        events
            .entry((f.src, f.dst, f.relay))
            .or_default()
            .push((f.slot, true, f.bits));
    }
    for f in t.second_hops() {
        events
            .entry((f.src, f.dst, f.relay))
            .or_default()
            .push((f.slot, false, f.bits));
    }
    let mut keys: Vec<_> = events.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let ev = events.get_mut(&key).expect("key present");
        // second hops of a slot are processed before first hops of the same slot
        ev.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let scale = ev.iter().map(|e| e.2).sum::<f64>().max(1.0);
        let tol = REL_TOL * scale;
        let mut buffered = 0.0;
        for &(slot, first, bits) in ev.iter() {
            if first {
                buffered += bits;
            } else {
                buffered -= bits;
                if buffered < -tol {
                    return FeasibilityReport::fail(Violation::Causality {
                        src: key.0,
                        dst: key.1,
                        relay: key.2,
                        slot: Some(slot),
                        deficit: -buffered,
                    });
                }
            }
        }
        if buffered.abs() > tol {
            return FeasibilityReport::fail(Violation::Causality {
                src: key.0,
                dst: key.1,
                relay: key.2,
                slot: None,
                deficit: buffered,
            });
        }
    }
    FeasibilityReport {
        feasible: true,
        violation: None,
    }
}

/// Every bit of `m` both leaves its source and reaches its destination, within `tol` per cell.
pub fn verify_complete_within(m: &DemandMatrix, t: &TrafficSchedule, tol: f64) -> bool {
    if m.n() != t.n() {
        return false;
    }
    m.max_abs_difference(&t.sent()) <= tol && m.max_abs_difference(&t.delivered()) <= tol
}

pub fn verify_complete(m: &DemandMatrix, t: &TrafficSchedule) -> bool {
    verify_complete_within(m, t, crate::matrix::DS_TOLERANCE)
}

/// Frobenius norm of unsent demand is at most `eps`.
pub fn verify_epsilon(m: &DemandMatrix, t: &TrafficSchedule, eps: f64) -> bool {
    if m.n() != t.n() {
        return false;
    }
    let slack = 1e-12 * m.weight().max(1.0);
    m.frobenius_distance(&t.sent()) <= eps + slack
}

/// Fraction of delivered bits that took a single hop. Each two-hop bit
/// counts once, as the mean of its first- and second-hop mass.
pub fn skewness(t: &TrafficSchedule) -> Result<f64> {
    let dl: f64 = t.direct().iter().map(|f| f.bits).sum();
    let h1: f64 = t.first_hops().iter().map(|f| f.bits).sum();
    let h2: f64 = t.second_hops().iter().map(|f| f.bits).sum();
    let total = dl + 0.5 * (h1 + h2);
    if total <= 0.0 {
        return Err(Error::EmptySchedule);
    }
    Ok(dl / total)
}

/// A topology schedule with its traffic.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub topology: TopologySchedule,
    pub traffic: TrafficSchedule,
}

impl Schedule {
    pub fn new(topology: TopologySchedule, traffic: TrafficSchedule) -> Self {
        Schedule { topology, traffic }
    }

    pub fn empty(n: usize) -> Self {
        Schedule::new(TopologySchedule::new(), TrafficSchedule::new(n, 0))
    }

    pub fn completion_time(&self) -> f64 {
        completion_time(&self.topology)
    }

    pub fn append(&mut self, other: Schedule) {
        self.traffic.append(&other.traffic);
        self.topology.extend(other.topology);
    }
}

#[derive(Serialize, Deserialize)]
struct TrafficJson {
    dl: Vec<Vec<(usize, usize, f64)>>,
    h1: Vec<Vec<(usize, usize, usize, f64)>>,
    h2: Vec<Vec<(usize, usize, usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleJson {
    topology: TopologySchedule,
    traffic: TrafficJson,
}

impl TrafficSchedule {
    fn to_json_repr(&self) -> TrafficJson {
        let mut dl = vec![Vec::new(); self.slots];
        let mut h1 = vec![Vec::new(); self.slots];
        let mut h2 = vec![Vec::new(); self.slots];
        for f in &self.direct {
            dl[f.slot].push((f.src, f.dst, f.bits));
        }
        for f in &self.first_hops {
            h1[f.slot].push((f.src, f.dst, f.relay, f.bits));
        }
        for f in &self.second_hops {
            h2[f.slot].push((f.src, f.dst, f.relay, f.bits));
        }
        TrafficJson { dl, h1, h2 }
    }

    fn from_json_repr(n: usize, slots: usize, j: TrafficJson) -> Result<Self> {
        if j.dl.len() > slots || j.h1.len() > slots || j.h2.len() > slots {
            return Err(Error::Parse("traffic lists more slots than the topology".into()));
        }
        let mut t = TrafficSchedule::new(n, slots);
        for (slot, v) in j.dl.into_iter().enumerate() {
            for (s, d, w) in v {
                t.push_direct(slot, s, d, w);
            }
        }
        for (slot, v) in j.h1.into_iter().enumerate() {
            for (s, d, q, w) in v {
                t.push_first_hop(slot, s, d, q, w);
            }
        }
        for (slot, v) in j.h2.into_iter().enumerate() {
            for (s, d, q, w) in v {
                t.push_second_hop(slot, s, d, q, w);
            }
        }
        Ok(t)
    }
}

impl Schedule {
    pub fn to_json_value(&self) -> serde_json::Value {
        let repr = ScheduleJson {
            topology: self.topology.clone(),
            traffic: self.traffic.to_json_repr(),
        };
        serde_json::to_value(repr).expect("schedule serializes")
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &self.to_json_value())?;
        Ok(())
    }

    /// Reads `{"topology": [...], "traffic": {...}}`; `n` is taken from the topology
    /// or, for an empty topology, from `fallback_n`.
    pub fn from_json_value(v: serde_json::Value, fallback_n: usize) -> Result<Self> {
        let repr: ScheduleJson = serde_json::from_value(v)?;
        repr.topology.validate()?;
        let n = repr.topology.n().unwrap_or(fallback_n);
        let traffic = TrafficSchedule::from_json_repr(n, repr.topology.len(), repr.traffic)?;
        Ok(Schedule::new(repr.topology, traffic))
    }

    pub fn from_json<R: Read>(r: R, fallback_n: usize) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_reader(r)?;
        Self::from_json_value(v, fallback_n)
    }
}
