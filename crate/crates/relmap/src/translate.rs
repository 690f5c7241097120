//! Inverse mapping: derive network-level parameter bounds from
//! application-level availability and reliability requirements.
//!
//! Closed-form inverses are used wherever the algebra permits; only the
//! reliability-over-down-time feasibility set needs bracketed bisection,
//! seeded by a geometric scan plus golden-section localization of the
//! interior minimum. Requirement targets are treated as non-strict (`>=`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{reliability_cycles_raw, NetworkParams};

/// Default upper end of the searched mean-down-time range, in cycles.
pub const DEFAULT_TAU_CAP: f64 = 1e9;

const BISECT_MAX_ITER: u32 = 200;
const BISECT_TOL: f64 = 1e-12;

/// A closed range of mean down times, in cycles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// What a requirement implies for one network parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibilityOutcome {
    /// Tight bound on the queried quantity; meeting it with equality meets
    /// the requirement with equality.
    Bound { value: f64 },
    /// Every in-domain value of the queried quantity satisfies the
    /// requirement.
    Unconstrained,
    /// No in-domain value satisfies the requirement.
    Infeasible,
    /// The satisfying values, as disjoint sorted closed intervals.
    IntervalSet { intervals: Vec<Interval> },
}

/// Outcome of an inversion together with a human-readable explanation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityResult {
    #[serde(flatten)]
    pub outcome: FeasibilityOutcome,
    pub diagnostic: String,
}

impl FeasibilityResult {
    fn bound(value: f64, diagnostic: String) -> Self {
        Self {
            outcome: FeasibilityOutcome::Bound { value },
            diagnostic,
        }
    }

    fn unconstrained(diagnostic: String) -> Self {
        Self {
            outcome: FeasibilityOutcome::Unconstrained,
            diagnostic,
        }
    }

    fn infeasible(diagnostic: String) -> Self {
        Self {
            outcome: FeasibilityOutcome::Infeasible,
            diagnostic,
        }
    }

    fn intervals(intervals: Vec<Interval>, diagnostic: String) -> Self {
        Self {
            outcome: FeasibilityOutcome::IntervalSet { intervals },
            diagnostic,
        }
    }

    pub fn bound_value(&self) -> Option<f64> {
        match self.outcome {
            FeasibilityOutcome::Bound { value } => Some(value),
            _ => None,
        }
    }

    pub fn interval_set(&self) -> Option<&[Interval]> {
        match &self.outcome {
            FeasibilityOutcome::IntervalSet { intervals } => Some(intervals),
            _ => None,
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self.outcome, FeasibilityOutcome::Unconstrained)
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.outcome, FeasibilityOutcome::Infeasible)
    }
}

fn check_availability_target(a_req: f64) -> Result<()> {
    if !(a_req.is_finite() && a_req > 0.0 && a_req < 1.0) {
        return Err(Error::InvalidInput(format!(
            "availability target must lie in (0, 1), got {a_req}"
        )));
    }
    Ok(())
}

fn check_reliability_target(r_req: f64) -> Result<()> {
    if !(r_req.is_finite() && r_req > 0.0) {
        return Err(Error::InvalidInput(format!(
            "reliability target must be positive, got {r_req}"
        )));
    }
    Ok(())
}

fn check_per(per: f64) -> Result<()> {
    if !(per.is_finite() && per > 0.0 && per < 1.0) {
        return Err(Error::InvalidInput(format!(
            "packet error ratio must lie in (0, 1), got {per}"
        )));
    }
    Ok(())
}

fn check_tau_dn(tau_dn: f64) -> Result<()> {
    if !(tau_dn.is_finite() && tau_dn >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "mean down time must be at least one cycle, got {tau_dn}"
        )));
    }
    Ok(())
}

/// Largest packet error ratio that still meets an availability target at a
/// fixed mean down time: `p_max = (1 - A_req) / (1 - 1/tau_dn)^n_sv`.
pub fn max_per_for_availability(a_req: f64, tau_dn: f64, n_sv: u32) -> Result<FeasibilityResult> {
    check_availability_target(a_req)?;
    check_tau_dn(tau_dn)?;
    let survive = (1.0 - 1.0 / tau_dn).powi(n_sv.min(i32::MAX as u32) as i32);
    if survive == 0.0 {
        return Ok(FeasibilityResult::unconstrained(format!(
            "every burst is shorter than the survival window of {n_sv} cycles, so \
             availability is 1 for any packet error ratio"
        )));
    }
    let p_max = (1.0 - a_req) / survive;
    if p_max >= 1.0 {
        return Ok(FeasibilityResult::unconstrained(format!(
            "availability target {a_req} is met for every packet error ratio below 1 \
             (unclamped bound {p_max})"
        )));
    }
    Ok(FeasibilityResult::bound(
        p_max,
        format!(
            "availability >= {a_req} holds for packet error ratios up to {p_max} at a mean \
             down time of {tau_dn} cycles with n_sv = {n_sv}"
        ),
    ))
}

/// Largest mean down time that still meets an availability target at a fixed
/// packet error ratio.
pub fn max_tau_dn_for_availability(a_req: f64, per: f64, n_sv: u32) -> Result<FeasibilityResult> {
    check_availability_target(a_req)?;
    check_per(per)?;
    let budget = 1.0 - a_req;
    if per <= budget {
        return Ok(FeasibilityResult::unconstrained(format!(
            "packet error ratio {per} already meets the availability target {a_req} \
             regardless of burst length"
        )));
    }
    if n_sv == 0 {
        return Ok(FeasibilityResult::infeasible(format!(
            "without survival tolerance, availability equals 1 - p = {} < {a_req}",
            1.0 - per
        )));
    }
    let ratio = (budget / per).powf(1.0 / n_sv as f64);
    let tau_max = 1.0 / (1.0 - ratio);
    if !tau_max.is_finite() {
        return Ok(FeasibilityResult::unconstrained(format!(
            "packet error ratio {per} is so close to the budget {budget} that any finite \
             mean down time satisfies the target"
        )));
    }
    Ok(FeasibilityResult::bound(
        tau_max,
        format!(
            "availability >= {a_req} holds for mean down times up to {tau_max} cycles at \
             p = {per} with n_sv = {n_sv}"
        ),
    ))
}

/// Largest packet error ratio that still meets a reliability target (in
/// cycles) at a fixed mean down time:
/// `p_max = 1 / (r_d * (1 - r_d)^n_sv * (R_req + tau_dn))`.
pub fn max_per_for_reliability(r_req: f64, tau_dn: f64, n_sv: u32) -> Result<FeasibilityResult> {
    check_reliability_target(r_req)?;
    check_tau_dn(tau_dn)?;
    let r_d = 1.0 / tau_dn;
    let survive = (1.0 - r_d).powi(n_sv.min(i32::MAX as u32) as i32);
    if survive == 0.0 {
        return Ok(FeasibilityResult::unconstrained(format!(
            "every burst is shorter than the survival window of {n_sv} cycles, so the \
             application never fails and any reliability target is met"
        )));
    }
    let p_max = 1.0 / (r_d * survive * (r_req + tau_dn));
    if p_max >= 1.0 {
        return Ok(FeasibilityResult::unconstrained(format!(
            "reliability target {r_req} cycles is met for every packet error ratio below 1 \
             (unclamped bound {p_max})"
        )));
    }
    Ok(FeasibilityResult::bound(
        p_max,
        format!(
            "reliability >= {r_req} cycles holds for packet error ratios up to {p_max} at a \
             mean down time of {tau_dn} cycles with n_sv = {n_sv}"
        ),
    ))
}

/// Mean-down-time values in `[1, tau_cap]` meeting a reliability target at a
/// fixed packet error ratio.
///
/// For `n_sv = 0` reliability grows with the down time (fewer, longer
/// bursts), giving one lower-bounded interval. For `n_sv >= 1` it diverges
/// both towards `tau_dn = 1` (every burst survived) and towards large
/// `tau_dn`, with a single interior minimum, so the answer is the complement
/// of at most one open interval.
pub fn tau_dn_intervals_for_reliability(
    r_req: f64,
    per: f64,
    n_sv: u32,
    tau_cap: f64,
) -> Result<FeasibilityResult> {
    check_reliability_target(r_req)?;
    check_per(per)?;
    if !(tau_cap.is_finite() && tau_cap > 1.0) {
        return Err(Error::InvalidInput(format!(
            "search cap must exceed one cycle, got {tau_cap}"
        )));
    }

    if n_sv == 0 {
        // R = tau_dn * (1 - p) / p, increasing in tau_dn.
        let threshold = r_req * per / (1.0 - per);
        let low = threshold.max(1.0);
        if low > tau_cap {
            return Ok(FeasibilityResult::infeasible(format!(
                "reliability {r_req} cycles at p = {per} needs a mean down time of \
                 {threshold} cycles, beyond the search cap {tau_cap}"
            )));
        }
        return Ok(FeasibilityResult::intervals(
            vec![Interval {
                low,
                high: tau_cap,
            }],
            format!(
                "reliability >= {r_req} cycles holds for mean down times of at least \
                 {low} cycles (searched up to {tau_cap})"
            ),
        ));
    }

    let reliability = |tau: f64| reliability_cycles_raw(per, 1.0 / tau, n_sv);
    let (tau_min, r_min) = locate_minimum(&reliability, tau_cap);
    if r_min >= r_req {
        return Ok(FeasibilityResult::intervals(
            vec![Interval {
                low: 1.0,
                high: tau_cap,
            }],
            format!(
                "the worst-case reliability over [1, {tau_cap}] is {r_min} cycles at \
                 tau_dn = {tau_min}, already above the target {r_req}"
            ),
        ));
    }

    let gap = |tau: f64| reliability(tau) - r_req;
    // Reliability diverges at tau_dn -> 1+, so the left interval always exists.
    let left_edge = bisect(&gap, 1.0, tau_min)?;
    let mut intervals = vec![Interval {
        low: 1.0,
        high: left_edge,
    }];
    if reliability(tau_cap) >= r_req {
        let right_edge = bisect(&gap, tau_min, tau_cap)?;
        intervals.push(Interval {
            low: right_edge,
            high: tau_cap,
        });
    }
    Ok(FeasibilityResult::intervals(
        intervals,
        format!(
            "reliability >= {r_req} cycles fails only for mean down times near the interior \
             minimum at tau_dn = {tau_min} ({r_min} cycles)"
        ),
    ))
}

/// Network parameters meeting an availability and a reliability target with
/// equality: `tau_dn = R_req * u / (1 - u)` and `p = u / (1 - 1/tau_dn)^n_sv`
/// with `u = 1 - A_req`.
pub fn joint_solve(a_req: f64, r_req: f64, n_sv: u32) -> Result<NetworkParams> {
    check_availability_target(a_req)?;
    check_reliability_target(r_req)?;
    let u = 1.0 - a_req;
    let tau_dn = r_req * u / (1.0 - u);
    if tau_dn < 1.0 {
        return Err(Error::Infeasible(format!(
            "targets A = {a_req}, R = {r_req} cycles imply a mean down time of {tau_dn} \
             cycles, below the one-cycle floor"
        )));
    }
    let survive = (1.0 - 1.0 / tau_dn).powi(n_sv.min(i32::MAX as u32) as i32);
    // u > 0 and survive >= 0, so per lands in (0, inf] and never NaN.
    let per = u / survive;
    if per >= 1.0 {
        return Err(Error::Infeasible(format!(
            "targets A = {a_req}, R = {r_req} cycles with n_sv = {n_sv} imply a packet \
             error ratio of {per}"
        )));
    }
    // Construction re-checks the one-cycle floor on the mean up time.
    NetworkParams::from_per_and_mean_down_time(per, tau_dn)
}

/// Geometric scan over `tau - 1` followed by golden-section refinement.
/// The target function is unimodal on `(1, tau_cap]`.
fn locate_minimum(f: &dyn Fn(f64) -> f64, tau_cap: f64) -> (f64, f64) {
    let mut samples = vec![1.0];
    let mut offset = 1e-9;
    while offset < tau_cap - 1.0 {
        samples.push(1.0 + offset);
        offset *= 2.0;
    }
    samples.push(tau_cap);

    let mut best = 1;
    let mut best_value = f(samples[1]);
    for (i, &tau) in samples.iter().enumerate().skip(2) {
        let value = f(tau);
        if value < best_value {
            best_value = value;
            best = i;
        }
    }
    let lo = samples[best - 1];
    let hi = samples[(best + 1).min(samples.len() - 1)];
    golden_section_min(f, lo, hi)
}

fn golden_section_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= 1e-10 * hi.max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Plain bisection on a verified sign change; terminates at `BISECT_TOL`
/// absolute or when the bracket can no longer shrink.
fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change over [{lo}, {hi}] ({f_lo} vs {f_hi})"
        )));
    }
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECT_TOL {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
