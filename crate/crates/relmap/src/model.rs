//! Domain types and the closed-form mappings between network-level loss
//! parameters and application-level dependability metrics.
//!
//! Everything is expressed in traffic cycles internally; seconds are a
//! presentation-layer conversion through the cycle period `T_c`.

use serde::{Deserialize, Serialize};
use serde::ser::Serializer;

use crate::error::{Error, Result};

/// Cyclic traffic description: one packet is sent every `cycle_period`
/// seconds and must arrive within `delay_bound` seconds to count as
/// delivered.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicTrafficSpec {
    /// Cycle period `T_c` in seconds.
    pub cycle_period: f64,
    /// Survival time in seconds: how long consecutive delivery failures are
    /// tolerated before the application itself goes down.
    pub survival_time: f64,
    /// Per-packet delay bound in seconds.
    pub delay_bound: f64,
    /// Payload size in bytes (informational only).
    pub packet_size: Option<u64>,
}

impl CyclicTrafficSpec {
    pub fn new(cycle_period: f64, survival_time: f64, delay_bound: f64) -> Result<Self> {
        if !(cycle_period.is_finite() && cycle_period > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cycle period must be positive, got {cycle_period}"
            )));
        }
        if !(survival_time.is_finite() && survival_time >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "survival time must be non-negative, got {survival_time}"
            )));
        }
        if !(delay_bound.is_finite() && delay_bound > 0.0) {
            return Err(Error::InvalidInput(format!(
                "delay bound must be positive, got {delay_bound}"
            )));
        }
        Ok(Self {
            cycle_period,
            survival_time,
            delay_bound,
            packet_size: None,
        })
    }

    /// Number of whole cycles covered by the survival time.
    pub fn survival_cycles(&self) -> u32 {
        survival_cycles(self.survival_time, self.cycle_period)
            .expect("validated at construction")
    }
}

/// Number of consecutive packet failures an application tolerates:
/// `floor(survival_time / cycle_period)`.
pub fn survival_cycles(survival_time: f64, cycle_period: f64) -> Result<u32> {
    if !(cycle_period.is_finite() && cycle_period > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cycle period must be positive, got {cycle_period}"
        )));
    }
    if !(survival_time.is_finite() && survival_time >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "survival time must be non-negative, got {survival_time}"
        )));
    }
    let ratio = (survival_time / cycle_period).floor();
    if ratio > u32::MAX as f64 {
        return Err(Error::InvalidInput(format!(
            "survival time spans {ratio} cycles, which exceeds the supported range"
        )));
    }
    Ok(ratio as u32)
}

/// Network-level loss behaviour stored as per-cycle exit probabilities.
///
/// `r_u` is the probability that an up cycle is followed by a lost cycle and
/// `r_d` the probability that a lost cycle is followed by a delivered one, so
/// run lengths are geometric with means `tau_un = 1/r_u` and `tau_dn = 1/r_d`
/// cycles, and the long-run packet error ratio is `p = r_u / (r_u + r_d)`.
///
/// Both rates live in `(0, 1]`: a run is at least one cycle long.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    r_u: f64,
    r_d: f64,
}

impl NetworkParams {
    /// Build from the raw exit probabilities.
    pub fn from_exit_rates(r_u: f64, r_d: f64) -> Result<Self> {
        for (name, r) in [("up-state exit rate", r_u), ("down-state exit rate", r_d)] {
            if !(r.is_finite() && r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1], got {r}"
                )));
            }
        }
        Ok(Self { r_u, r_d })
    }

    /// Build from a packet error ratio `p` in `(0, 1)` and a mean down time
    /// in cycles (>= 1). Fails when the pair implies a mean up time below
    /// one cycle, i.e. `p > tau_dn / (1 + tau_dn)`.
    pub fn from_per_and_mean_down_time(per: f64, mean_down_cycles: f64) -> Result<Self> {
        if !(per.is_finite() && per > 0.0 && per < 1.0) {
            return Err(Error::InvalidInput(format!(
                "packet error ratio must lie in (0, 1), got {per}"
            )));
        }
        if !(mean_down_cycles.is_finite() && mean_down_cycles >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "mean down time must be at least one cycle, got {mean_down_cycles}"
            )));
        }
        let r_d = 1.0 / mean_down_cycles;
        let r_u = per * r_d / (1.0 - per);
        if r_u > 1.0 {
            return Err(Error::Infeasible(format!(
                "per {per} with mean down time {mean_down_cycles} cycles implies a mean up \
                 time of {:.6} cycles, below the one-cycle floor",
                1.0 / r_u
            )));
        }
        Ok(Self { r_u, r_d })
    }

    /// Build from mean up/down run lengths in cycles (both >= 1).
    pub fn from_mean_times(mean_up_cycles: f64, mean_down_cycles: f64) -> Result<Self> {
        for (name, tau) in [
            ("mean up time", mean_up_cycles),
            ("mean down time", mean_down_cycles),
        ] {
            if !(tau.is_finite() && tau >= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be at least one cycle, got {tau}"
                )));
            }
        }
        Ok(Self {
            r_u: 1.0 / mean_up_cycles,
            r_d: 1.0 / mean_down_cycles,
        })
    }

    /// Per-cycle probability of leaving the up state.
    pub fn up_exit_rate(&self) -> f64 {
        self.r_u
    }

    /// Per-cycle probability of leaving the down state.
    pub fn down_exit_rate(&self) -> f64 {
        self.r_d
    }

    /// Long-run packet error ratio `p = r_u / (r_u + r_d)`.
    pub fn per(&self) -> f64 {
        self.r_u / (self.r_u + self.r_d)
    }

    /// Mean up run length in cycles.
    pub fn mean_up_time(&self) -> f64 {
        1.0 / self.r_u
    }

    /// Mean down run (loss burst) length in cycles.
    pub fn mean_down_time(&self) -> f64 {
        1.0 / self.r_d
    }

    /// Network-level availability, `1 - p`.
    pub fn network_availability(&self) -> f64 {
        1.0 - self.per()
    }

    /// Application-level availability for a tolerance of `n_sv` consecutive
    /// lost cycles: `A = 1 - p * (1 - r_d)^n_sv`.
    pub fn app_availability(&self, n_sv: u32) -> f64 {
        1.0 - self.per() * pow_n(1.0 - self.r_d, n_sv)
    }

    /// Mean length of an application up period in cycles:
    /// `R = 1 / (p * r_d * (1 - r_d)^n_sv) - tau_dn`.
    ///
    /// With `r_d = 1` and `n_sv >= 1` every burst is survived and the
    /// application never fails; that case is reported as
    /// [`MeanCycles::Unbounded`] rather than as an infinity.
    pub fn app_reliability(&self, n_sv: u32) -> MeanCycles {
        if self.r_d == 1.0 && n_sv >= 1 {
            return MeanCycles::Unbounded;
        }
        MeanCycles::Finite(reliability_cycles_raw(self.per(), self.r_d, n_sv))
    }

    /// Steady-state rate of application failure events per cycle:
    /// `L_z = p * r_d * (1 - r_d)^n_sv`. Satisfies `R = A / L_z`.
    pub fn transition_rate(&self, n_sv: u32) -> f64 {
        self.per() * self.r_d * pow_n(1.0 - self.r_d, n_sv)
    }

    /// Evaluate every metric at once. `cycle_period` (seconds), when given,
    /// enables the second-based views on the report.
    pub fn full_report(&self, n_sv: u32, cycle_period: Option<f64>) -> Result<ReliabilityReport> {
        if let Some(tc) = cycle_period {
            if !(tc.is_finite() && tc > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "cycle period must be positive, got {tc}"
                )));
            }
        }
        let app_availability = self.app_availability(n_sv);
        let transition_rate = self.transition_rate(n_sv);
        // (1 - A) / L_z; collapses to tau_dn for this chain, undefined when
        // the application never goes down.
        let app_mean_downtime = if transition_rate > 0.0 {
            Some((1.0 - app_availability) / transition_rate)
        } else {
            None
        };
        Ok(ReliabilityReport {
            app_availability,
            app_reliability: Some(self.app_reliability(n_sv)),
            app_mean_downtime,
            transition_rate,
            network_availability: self.network_availability(),
            packet_error_ratio: self.per(),
            network_mean_uptime: Some(self.mean_up_time()),
            network_mean_downtime: Some(self.mean_down_time()),
            cycle_period,
        })
    }
}

/// `(1 - r_d)^n_sv` and friends; saturates the exponent instead of wrapping.
fn pow_n(base: f64, n: u32) -> f64 {
    base.powi(n.min(i32::MAX as u32) as i32)
}

/// Raw reliability closed form; returns `+inf` where the mean diverges.
pub(crate) fn reliability_cycles_raw(per: f64, r_d: f64, n_sv: u32) -> f64 {
    1.0 / (per * r_d * pow_n(1.0 - r_d, n_sv)) - 1.0 / r_d
}

/// Application availability under the independent (memoryless) loss
/// approximation with per-cycle loss probability `p`: `1 - p^(n_sv + 1)`.
///
/// For any bursty channel with a mean burst longer than one cycle this is an
/// optimistic estimate.
pub fn independent_app_availability(per: f64, n_sv: u32) -> f64 {
    assert!(
        per.is_finite() && (0.0..1.0).contains(&per),
        "loss probability must lie in [0, 1), got {per}"
    );
    1.0 - pow_n(per, n_sv + 1)
}

/// Application-level requirement bundle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppRequirements {
    /// Required application availability, in `(0, 1)`.
    pub availability_target: f64,
    /// Required mean up period in cycles, when stated.
    pub reliability_target_cycles: Option<f64>,
    /// Tolerated consecutive lost cycles.
    pub survival_cycles: u32,
}

impl AppRequirements {
    pub fn new(
        availability_target: f64,
        reliability_target_cycles: Option<f64>,
        survival_cycles: u32,
    ) -> Result<Self> {
        if !(availability_target.is_finite()
            && availability_target > 0.0
            && availability_target < 1.0)
        {
            return Err(Error::InvalidInput(format!(
                "availability target must lie in (0, 1), got {availability_target}"
            )));
        }
        if let Some(r) = reliability_target_cycles {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "reliability target must be positive, got {r}"
                )));
            }
        }
        Ok(Self {
            availability_target,
            reliability_target_cycles,
            survival_cycles,
        })
    }
}

/// A mean duration in cycles, with an explicit variant for a mean that never
/// terminates (no failure event ever occurs). Serializes as a plain number
/// or the string `"unbounded"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanCycles {
    Finite(f64),
    Unbounded,
}

impl MeanCycles {
    pub fn finite(self) -> Option<f64> {
        match self {
            MeanCycles::Finite(v) => Some(v),
            MeanCycles::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, MeanCycles::Unbounded)
    }
}

impl Serialize for MeanCycles {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MeanCycles::Finite(v) => serializer.serialize_f64(*v),
            MeanCycles::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

/// Application- and network-level dependability metrics, in cycles.
///
/// Produced either analytically ([`NetworkParams::full_report`]) or from a
/// recorded trace (`trace::BinaryTrace::app_metrics`). Means with no
/// observed/defined value are `None`; a mean whose period never ends is
/// [`MeanCycles::Unbounded`]. The two are distinct claims.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReliabilityReport {
    /// Long-run fraction of cycles the application is up.
    pub app_availability: f64,
    /// Mean application up period (reliability/MTBF) in cycles; `None` when
    /// no up period was observed at all.
    pub app_reliability: Option<MeanCycles>,
    /// Mean application down period in cycles.
    pub app_mean_downtime: Option<f64>,
    /// Application failure events per cycle.
    pub transition_rate: f64,
    /// Long-run fraction of cycles the network is up (`1 - p`).
    pub network_availability: f64,
    /// Packet error ratio `p`.
    pub packet_error_ratio: f64,
    /// Mean network up run in cycles.
    pub network_mean_uptime: Option<f64>,
    /// Mean network down run (burst) in cycles.
    pub network_mean_downtime: Option<f64>,
    /// Cycle period in seconds, when known.
    pub cycle_period: Option<f64>,
}

impl ReliabilityReport {
    /// Reliability in seconds, when finite and the cycle period is known.
    pub fn app_reliability_seconds(&self) -> Option<f64> {
        match (self.app_reliability, self.cycle_period) {
            (Some(MeanCycles::Finite(cycles)), Some(tc)) => Some(cycles * tc),
            _ => None,
        }
    }

    /// Application mean downtime in seconds, when defined and the cycle
    /// period is known.
    pub fn app_mean_downtime_seconds(&self) -> Option<f64> {
        match (self.app_mean_downtime, self.cycle_period) {
            (Some(cycles), Some(tc)) => Some(cycles * tc),
            _ => None,
        }
    }
}
