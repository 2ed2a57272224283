//! Minimum transmit power subject to a rate floor, a detection floor and a
//! false-alarm ceiling, for the eight sensing/communication cases.
//!
//! Powers are in watts. Communication fading is whatever the [`LinkBudget`]
//! carries; the power split `ρ_c` is chosen per case.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::{self, DetectorKind, SensingParams};
use crate::error::{IsacError, Result};
use crate::parallel::{try_map_indexed, Execution};
use crate::rate::{self, CommMode};
use crate::scenario::LinkBudget;
use crate::specfun::q_inverse;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosTargets {
    /// b/s/Hz
    pub r_min: f64,
    pub pd_min: f64,
    pub pfa_delta: f64,
}

impl QosTargets {
    pub fn new(r_min: f64, pd_min: f64, pfa_delta: f64) -> Result<Self> {
        let t = Self { r_min, pd_min, pfa_delta };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0) || !self.r_min.is_finite() {
            return Err(IsacError::InvalidTargets(format!("r_min must be finite and >= 0, got {}", self.r_min)));
        }
        if !(0.0 < self.pfa_delta && self.pfa_delta < self.pd_min && self.pd_min < 1.0) {
            return Err(IsacError::InvalidTargets(format!(
                "need 0 < pfa_delta < pd_min < 1, got pfa_delta = {}, pd_min = {}",
                self.pfa_delta, self.pd_min
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl CaseId {
    pub const ALL: [CaseId; 8] = [
        CaseId::I,
        CaseId::II,
        CaseId::III,
        CaseId::IV,
        CaseId::V,
        CaseId::VI,
        CaseId::VII,
        CaseId::VIII,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::I => "I",
            CaseId::II => "II",
            CaseId::III => "III",
            CaseId::IV => "IV",
            CaseId::V => "V",
            CaseId::VI => "VI",
            CaseId::VII => "VII",
            CaseId::VIII => "VIII",
        }
    }

    pub fn comm_mode(&self) -> CommMode {
        match self {
            CaseId::I | CaseId::II | CaseId::III | CaseId::IV => CommMode::Free,
            _ => CommMode::Interfered,
        }
    }

    pub fn sensing_kind(&self) -> DetectorKind {
        match self {
            CaseId::I | CaseId::V => DetectorKind::CoherentKnownH,
            CaseId::II | CaseId::VI => DetectorKind::GlrtUnknownH,
            CaseId::III | CaseId::VII => DetectorKind::InterferedKnownH,
            CaseId::IV | CaseId::VIII => DetectorKind::InterferedUnknownH,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == up)
            .ok_or_else(|| IsacError::Config(format!("unknown case '{s}', expected I..VIII")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Rate,
    Pd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub comm_mode: CommMode,
    pub sensing_kind: DetectorKind,
    /// Infinite when infeasible.
    pub p_min_w: f64,
    /// Power on the sensing waveform, `ρ_s P_min`.
    pub p_sensing_w: f64,
    pub rho_c: f64,
    /// CFAR threshold at the optimum.
    pub kappa: f64,
    pub feasible: bool,
    /// Constraints active at the optimum, sorted.
    pub binding: Vec<Constraint>,
}

impl AllocationResult {
    fn infeasible(comm_mode: CommMode, kind: DetectorKind) -> Self {
        Self {
            comm_mode,
            sensing_kind: kind,
            p_min_w: f64::INFINITY,
            p_sensing_w: f64::INFINITY,
            rho_c: f64::NAN,
            kappa: f64::NAN,
            feasible: false,
            binding: Vec::new(),
        }
    }
}

/// Relative width at which power bisection stops.
const POWER_REL_TOL: f64 = 1e-12;
/// Grid size and golden-section steps of the split search.
const SPLIT_GRID: usize = 16;
const SPLIT_GOLDEN_STEPS: usize = 30;
/// The split search stops once PD sits this close above its target.
const PD_ROOT_TOL: f64 = 1e-9;
/// Largest split the search considers; some sensing waveform stays on air.
const RHO_C_MAX: f64 = 1.0 - 1e-6;
const MAX_BRACKET_STEPS: usize = 300;

/// Two operating points are both binding when their powers agree this well.
const TIE_REL_TOL: f64 = 1e-9;

fn snr_total(link: &LinkBudget, p_w: f64, t: u32) -> f64 {
    p_w * t as f64 * link.g_s / link.sigma_s2_w
}

/// Communication power that meets `r_min` with `p_s_w` on the sensing waveform.
pub fn comm_power(targets: &QosTargets, mode: CommMode, link: &LinkBudget, p_s_w: f64) -> f64 {
    rate::comm_power_for_rate(targets.r_min, mode, p_s_w, link.g_c, link.sigma_c2_w)
}

/// Sensing outcome at a given total power and split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingEval {
    pub kappa: f64,
    pub pd: f64,
}

/// CFAR threshold and detection probability for `kind` at `(p_w, rho_c)`.
pub fn sensing_at(kind: DetectorKind, targets: &QosTargets, link: &LinkBudget, t: u32, p_w: f64, rho_c: f64) -> Result<SensingEval> {
    let params = SensingParams::new(snr_total(link, p_w, t), t, rho_c, 0.0)?;
    let kappa = detectors::threshold_for_pfa(kind, &params, targets.pfa_delta)?;
    let pd = detectors::pd(kind, &params.with_kappa(kappa))?;
    Ok(SensingEval { kappa, pd })
}

/// Split and total power when `p_s_w` goes to sensing and the rest just
/// meets the rate floor. `None` if no power is on air at all.
fn split_for(targets: &QosTargets, mode: CommMode, link: &LinkBudget, p_s_w: f64) -> Option<(f64, f64)> {
    let p_c = comm_power(targets, mode, link, p_s_w);
    let p = p_c + p_s_w;
    if p > 0.0 {
        Some((p, p_c / p))
    } else {
        None
    }
}

/// Sensing power found by [`min_sensing_power`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingPower {
    pub p_s_w: f64,
    pub kappa: f64,
    pub pd: f64,
    pub feasible: bool,
}

/// Smallest sensing power meeting `pd_min` at `pfa_delta`.
///
/// Assisted kinds use the whole transmit power for sensing, so the result
/// is the total power that meets the detection floor. For interfered kinds
/// the communication power is pinned by the rate floor given the sensing
/// power (`comm_mode` decides how), which changes `ζ` along the search.
pub fn min_sensing_power(
    kind: DetectorKind,
    targets: &QosTargets,
    link: &LinkBudget,
    t_symbols: u32,
    comm_mode: CommMode,
) -> Result<SensingPower> {
    targets.validate()?;
    if t_symbols < 1 {
        return Err(IsacError::domain("min_sensing_power", "t_symbols must be >= 1"));
    }
    if kind.is_interfered() && targets.r_min == 0.0 {
        // no communication power at all; the interfered models need some
        return Err(IsacError::singular("min_sensing_power", "interfered sensing needs r_min > 0"));
    }
    // PD at sensing power `x`; `None` when nothing is on air
    let eval = |x: f64| -> Result<Option<SensingEval>> {
        if kind.is_interfered() {
            match split_for(targets, comm_mode, link, x) {
                Some((p, rho_c)) => sensing_at(kind, targets, link, t_symbols, p, rho_c).map(Some),
                None => Ok(None),
            }
        } else if x > 0.0 {
            sensing_at(kind, targets, link, t_symbols, x, 1.0).map(Some)
        } else {
            Ok(None)
        }
    };
    let meets = |e: &Option<SensingEval>| e.is_some_and(|e| e.pd >= targets.pd_min);

    if kind == DetectorKind::CoherentKnownH {
        let d = q_inverse(targets.pfa_delta)? - q_inverse(targets.pd_min)?;
        let p = link.sigma_s2_w / (2.0 * t_symbols as f64 * link.g_s) * d * d;
        let e = sensing_at(kind, targets, link, t_symbols, p, 1.0)?;
        return Ok(SensingPower { p_s_w: p, kappa: e.kappa, pd: e.pd, feasible: true });
    }

    if kind.is_interfered() {
        let e0 = eval(0.0)?;
        if let Some(e) = e0.filter(|e| e.pd >= targets.pd_min) {
            return Ok(SensingPower { p_s_w: 0.0, kappa: e.kappa, pd: e.pd, feasible: true });
        }
    }

    // the coherent power is a natural scale for the search
    let d = q_inverse(targets.pfa_delta)? - q_inverse(targets.pd_min)?;
    let guess = (link.sigma_s2_w / (2.0 * t_symbols as f64 * link.g_s) * d * d).max(f64::MIN_POSITIVE);
    let mut hi = guess;
    let mut hi_eval = eval(hi)?;
    let mut lo: f64;
    let mut steps = 0;
    if meets(&hi_eval) {
        loop {
            lo = 0.5 * hi;
            let e = eval(lo)?;
            if !meets(&e) {
                break;
            }
            hi = lo;
            hi_eval = e;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo < f64::MIN_POSITIVE * 4.0 {
                lo = 0.0;
                break;
            }
        }
    } else {
        loop {
            lo = hi;
            hi *= 2.0;
            hi_eval = eval(hi)?;
            if meets(&hi_eval) {
                break;
            }
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Ok(SensingPower { p_s_w: f64::INFINITY, kappa: f64::NAN, pd: f64::NAN, feasible: false });
            }
        }
    }

    while hi - lo > POWER_REL_TOL * hi {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        let e = eval(mid)?;
        if meets(&e) {
            hi = mid;
            hi_eval = e;
        } else {
            lo = mid;
        }
    }
    let e = hi_eval.ok_or_else(|| IsacError::numeric("min_sensing_power", "bisection ended without a feasible point"))?;
    Ok(SensingPower { p_s_w: hi, kappa: e.kappa, pd: e.pd, feasible: true })
}

/// Solves for any pairing of communication mode and sensing detector.
pub fn solve(comm_mode: CommMode, kind: DetectorKind, targets: &QosTargets, link: &LinkBudget, t_symbols: u32) -> Result<AllocationResult> {
    targets.validate()?;
    let sp = min_sensing_power(kind, targets, link, t_symbols, comm_mode)?;
    if !sp.feasible {
        return Ok(AllocationResult::infeasible(comm_mode, kind));
    }

    if !kind.is_interfered() {
        // all power on the communication waveform; it serves both ends
        let p_rate = comm_power(targets, comm_mode, link, 0.0);
        let p_min = sp.p_s_w.max(p_rate);
        let mut binding = Vec::new();
        if p_rate >= p_min * (1.0 - TIE_REL_TOL) && targets.r_min > 0.0 {
            binding.push(Constraint::Rate);
        }
        if sp.p_s_w >= p_min * (1.0 - TIE_REL_TOL) {
            binding.push(Constraint::Pd);
        }
        let kappa = if p_min == sp.p_s_w {
            sp.kappa
        } else {
            sensing_at(kind, targets, link, t_symbols, p_min, 1.0)?.kappa
        };
        return Ok(AllocationResult {
            comm_mode,
            sensing_kind: kind,
            p_min_w: p_min,
            p_sensing_w: 0.0,
            rho_c: 1.0,
            kappa,
            feasible: true,
            binding,
        });
    }

    let p_c = comm_power(targets, comm_mode, link, sp.p_s_w);
    let p_pin = p_c + sp.p_s_w;
    let pinned = AllocationResult {
        comm_mode,
        sensing_kind: kind,
        p_min_w: p_pin,
        p_sensing_w: sp.p_s_w,
        rho_c: if p_pin > 0.0 { p_c / p_pin } else { 1.0 },
        kappa: sp.kappa,
        feasible: true,
        binding: if sp.p_s_w > 0.0 { vec![Constraint::Rate, Constraint::Pd] } else { vec![Constraint::Rate] },
    };
    // When PD grows with ρ_c a split above the rate floor can meet both
    // targets with less power than the pinned one. The best PD over splits is
    // smooth in power, so its crossing is found by regula falsi on ln P.
    let gap = |p: f64| -> Result<f64> {
        Ok(best_split(comm_mode, kind, targets, link, t_symbols, p)?.map_or(-1.0, |(_, e)| e.pd - targets.pd_min))
    };
    let mut hi = p_pin * (1.0 - 1e3 * POWER_REL_TOL);
    let mut f_hi = gap(hi)?;
    if sp.p_s_w == 0.0 || f_hi < 0.0 {
        return Ok(pinned);
    }
    let mut lo = 0.5 * hi;
    let mut f_lo = gap(lo)?;
    let mut steps = 0;
    while f_lo >= 0.0 {
        (hi, f_hi) = (lo, f_lo);
        lo *= 0.5;
        f_lo = gap(lo)?;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(IsacError::numeric("solve", "split search did not bracket the minimum power"));
        }
    }
    let mut side = 0i8;
    while hi - lo > POWER_REL_TOL * hi && f_hi > PD_ROOT_TOL {
        let (ll, lh) = (lo.ln(), hi.ln());
        let mut x = (lh - f_hi * (lh - ll) / (f_hi - f_lo)).exp();
        if !(x > lo && x < hi) {
            x = (lo * hi).sqrt();
        }
        let f = gap(x)?;
        if f >= 0.0 {
            (hi, f_hi) = (x, f);
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            (lo, f_lo) = (x, f);
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(IsacError::numeric("solve", "split search did not converge"));
        }
    }
    let (rho_c, e) = best_split(comm_mode, kind, targets, link, t_symbols, hi)?
        .ok_or_else(|| IsacError::numeric("solve", "split search ended without a feasible point"))?;
    let rho_edge = min_rho_c_for_rate(targets, comm_mode, link, hi).unwrap_or(1.0);
    let mut binding = Vec::new();
    if rho_c <= rho_edge * (1.0 + TIE_REL_TOL) {
        binding.push(Constraint::Rate);
    }
    binding.push(Constraint::Pd);
    Ok(AllocationResult {
        comm_mode,
        sensing_kind: kind,
        p_min_w: hi,
        p_sensing_w: (1.0 - rho_c) * hi,
        rho_c,
        kappa: e.kappa,
        feasible: true,
        binding,
    })
}

pub fn solve_case(case: CaseId, targets: &QosTargets, link: &LinkBudget, t_symbols: u32) -> Result<AllocationResult> {
    solve(case.comm_mode(), case.sensing_kind(), targets, link, t_symbols)
}

/// Every case, in `CaseId::ALL` order.
pub fn solve_all(targets: &QosTargets, link: &LinkBudget, t_symbols: u32, exec: Execution) -> Result<Vec<(CaseId, AllocationResult)>> {
    try_map_indexed(exec, CaseId::ALL.len(), |i| {
        let c = CaseId::ALL[i];
        solve_case(c, targets, link, t_symbols).map(|r| (c, r))
    })
}

/// Rate and sensing outcome of an explicit allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub rate: f64,
    pub kappa: f64,
    pub pd: f64,
}

pub fn evaluate(
    comm_mode: CommMode,
    kind: DetectorKind,
    targets: &QosTargets,
    link: &LinkBudget,
    t_symbols: u32,
    p_w: f64,
    rho_c: f64,
) -> Result<Evaluation> {
    let s = sensing_at(kind, targets, link, t_symbols, p_w, rho_c)?;
    Ok(Evaluation {
        rate: rate::rate(comm_mode, p_w, rho_c, link.g_c, link.sigma_c2_w),
        kappa: s.kappa,
        pd: s.pd,
    })
}

/// Smallest `ρ_c` that meets the rate floor at total power `p_w`, or `None`
/// if even `ρ_c = 1` falls short.
pub fn min_rho_c_for_rate(targets: &QosTargets, mode: CommMode, link: &LinkBudget, p_w: f64) -> Option<f64> {
    let snr = (targets.r_min * std::f64::consts::LN_2).exp_m1();
    if snr == 0.0 {
        return Some(0.0);
    }
    let pg = p_w * link.g_c;
    if pg <= 0.0 {
        return None;
    }
    let rho = match mode {
        CommMode::Free => snr * link.sigma_c2_w / pg,
        CommMode::Interfered => snr * (pg + link.sigma_c2_w) / (pg * (1.0 + snr)),
    };
    (rho <= 1.0).then_some(rho)
}

/// Rate-feasible split at total power `p_w` with the highest PD, or `None`
/// if the rate floor cannot be met.
///
/// Assisted kinds always take `ρ_c = 1`. For interfered kinds PD is scanned
/// over `[ρ_min, RHO_C_MAX]` and the best cell refined by golden section.
pub fn best_split(
    comm_mode: CommMode,
    kind: DetectorKind,
    targets: &QosTargets,
    link: &LinkBudget,
    t_symbols: u32,
    p_w: f64,
) -> Result<Option<(f64, SensingEval)>> {
    let Some(lo) = min_rho_c_for_rate(targets, comm_mode, link, p_w) else {
        return Ok(None);
    };
    if !kind.is_interfered() {
        return sensing_at(kind, targets, link, t_symbols, p_w, 1.0).map(|e| Some((1.0, e)));
    }
    if lo == 0.0 {
        return Err(IsacError::singular("best_split", "interfered sensing needs r_min > 0"));
    }
    let at = |r: f64| sensing_at(kind, targets, link, t_symbols, p_w, r);
    if lo >= RHO_C_MAX {
        return at(lo).map(|e| Some((lo, e)));
    }
    let step = (RHO_C_MAX - lo) / (SPLIT_GRID - 1) as f64;
    let grid: Vec<f64> = (0..SPLIT_GRID).map(|i| if i + 1 == SPLIT_GRID { RHO_C_MAX } else { lo + step * i as f64 }).collect();
    let mut best = (lo, at(lo)?);
    let mut best_i = 0;
    for (i, &r) in grid.iter().enumerate().skip(1) {
        let e = at(r)?;
        if e.pd > best.1.pd {
            best = (r, e);
            best_i = i;
        }
    }
    let (mut a, mut b) = (grid[best_i.saturating_sub(1)], grid[(best_i + 1).min(SPLIT_GRID - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut e1, mut e2) = (at(x1)?, at(x2)?);
    for _ in 0..SPLIT_GOLDEN_STEPS {
        if e1.pd >= e2.pd {
            b = x2;
            (x2, e2) = (x1, e1);
            x1 = b - g * (b - a);
            e1 = at(x1)?;
        } else {
            a = x1;
            (x1, e1) = (x2, e2);
            x2 = a + g * (b - a);
            e2 = at(x2)?;
        }
    }
    for (r, e) in [(x1, e1), (x2, e2)] {
        if e.pd > best.1.pd {
            best = (r, e);
        }
    }
    Ok(Some(best))
}

/// Whether any split at total power `p_w` meets every target.
pub fn feasible_at(
    comm_mode: CommMode,
    kind: DetectorKind,
    targets: &QosTargets,
    link: &LinkBudget,
    t_symbols: u32,
    p_w: f64,
) -> Result<bool> {
    Ok(best_split(comm_mode, kind, targets, link, t_symbols, p_w)?.is_some_and(|(_, e)| e.pd >= targets.pd_min))
}

/// One point of a PD-versus-rate frontier at fixed total power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub rho_c: f64,
    pub rate: f64,
    /// `None` where the detector is singular (`ρ_c = 0` for interfered kinds).
    pub pd: Option<f64>,
}

/// Rate and PD at `pfa_delta` as `ρ_c` sweeps `rho_c_grid`.
pub fn tradeoff_curve(
    case: CaseId,
    link: &LinkBudget,
    t_symbols: u32,
    p_w: f64,
    pfa_delta: f64,
    rho_c_grid: &[f64],
) -> Result<Vec<TradeoffPoint>> {
    if let Some(r) = rho_c_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(IsacError::domain("tradeoff_curve", format!("rho_c grid values must lie in [0, 1], got {r}")));
    }
    if !(pfa_delta > 0.0 && pfa_delta < 1.0) {
        return Err(IsacError::domain("tradeoff_curve", format!("pfa_delta must lie in (0, 1), got {pfa_delta}")));
    }
    let kind = case.sensing_kind();
    let mode = case.comm_mode();
    let lambda = snr_total(link, p_w, t_symbols);
    rho_c_grid
        .iter()
        .map(|&rho_c| {
            let rate = rate::rate(mode, p_w, rho_c, link.g_c, link.sigma_c2_w);
            let pd = if kind.is_interfered() && rho_c == 0.0 {
                None
            } else {
                let params = SensingParams::new(lambda, t_symbols, rho_c, 0.0)?;
                Some(detectors::pd_at_pfa(kind, &params, pfa_delta)?)
            };
            Ok(TradeoffPoint { rho_c, rate, pd })
        })
        .collect()
}

/// Radar-and-communication coexistence: sensing gets `ρ_s P` over half the
/// symbols with a coherent detector, communication gets `ρ_c P` for the
/// other half of the time.
pub fn rc_baseline_curve(link: &LinkBudget, t_symbols: u32, p_w: f64, pfa_delta: f64, rho_c_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    let t_half = t_symbols / 2;
    if t_half < 1 {
        return Err(IsacError::domain("rc_baseline_curve", "need t_symbols >= 2 to split in time"));
    }
    if !(pfa_delta > 0.0 && pfa_delta < 1.0) {
        return Err(IsacError::domain("rc_baseline_curve", format!("pfa_delta must lie in (0, 1), got {pfa_delta}")));
    }
    rho_c_grid
        .iter()
        .map(|&rho_c| {
            if !(0.0..=1.0).contains(&rho_c) {
                return Err(IsacError::domain("rc_baseline_curve", format!("rho_c must lie in [0, 1], got {rho_c}")));
            }
            let rate = 0.5 * rate::rate_sensing_free(p_w, rho_c, link.g_c, link.sigma_c2_w);
            let p_s = (1.0 - rho_c) * p_w;
            let pd = if p_s > 0.0 {
                let params = SensingParams::new(snr_total(link, p_s, t_half), t_half, 1.0, 0.0)?;
                detectors::pd_at_pfa(DetectorKind::CoherentKnownH, &params, pfa_delta)?
            } else {
                // nothing transmitted for sensing: the detector is a coin with bias pfa
                pfa_delta
            };
            Ok(TradeoffPoint { rho_c, rate, pd: Some(pd) })
        })
        .collect()
}
