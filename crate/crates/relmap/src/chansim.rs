//! Seeded synthetic channel generators — a bursty two-state model and an
//! independent-loss model — plus a Monte Carlo harness that validates the
//! closed forms against trace estimates.
//!
//! Reproducibility is part of the interface: identical parameters and seed
//! give bit-identical traces on every platform and at every thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MeanCycles, NetworkParams};
use crate::trace::BinaryTrace;

/// RNG algorithm identifier recorded in every randomized output.
/// Replication `r` draws from the ChaCha stream with identifier `r`.
pub const RNG_ALGORITHM: &str = "chacha8/seed64/stream-per-replication";

/// Two-state bursty loss channel: in the up state every packet is
/// delivered, in the down state every packet is lost.
///
/// `g` is the per-cycle probability of falling from up to down, `b` the
/// probability of recovering from down to up. This maps one-to-one onto
/// [`NetworkParams`]: `g = 1/tau_un`, `b = 1/tau_dn`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GilbertParams {
    g: f64,
    b: f64,
}

impl GilbertParams {
    pub fn new(g: f64, b: f64) -> Result<Self> {
        for (name, value) in [("up-to-down probability", g), ("down-to-up probability", b)] {
            if !(value.is_finite() && value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1], got {value}"
                )));
            }
        }
        Ok(Self { g, b })
    }

    /// Exact mapping from network parameters; the stationary loss ratio of
    /// the channel equals the packet error ratio.
    pub fn from_network_params(params: &NetworkParams) -> Self {
        Self {
            g: params.up_exit_rate(),
            b: params.down_exit_rate(),
        }
    }

    /// Inverse of [`GilbertParams::from_network_params`], bit-exact.
    pub fn to_network_params(&self) -> NetworkParams {
        NetworkParams::from_exit_rates(self.g, self.b).expect("domains coincide")
    }

    pub fn up_to_down(&self) -> f64 {
        self.g
    }

    pub fn down_to_up(&self) -> f64 {
        self.b
    }

    /// Stationary fraction of lost cycles, `g / (g + b)`.
    pub fn loss_ratio(&self) -> f64 {
        self.g / (self.g + self.b)
    }
}

/// Initial channel state for trace generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartState {
    /// Draw from the stationary distribution (no warm-up bias).
    Stationary,
    Up,
    Down,
}

/// Generate a bursty trace of `n_cycles` bits, starting from the stationary
/// distribution. Bit `t` reflects the channel state during cycle `t`.
pub fn generate(
    channel: &GilbertParams,
    n_cycles: u64,
    seed: u64,
    cycle_period: f64,
) -> Result<BinaryTrace> {
    generate_with_start(channel, n_cycles, seed, cycle_period, StartState::Stationary)
}

/// As [`generate`], with an explicit initial state for boundary testing.
pub fn generate_with_start(
    channel: &GilbertParams,
    n_cycles: u64,
    seed: u64,
    cycle_period: f64,
    start: StartState,
) -> Result<BinaryTrace> {
    check_cycles(n_cycles, 1)?;
    let bits = generate_bits(channel, n_cycles, &mut replication_rng(seed, 0), start);
    BinaryTrace::new(bits, cycle_period)
}

/// Generate a trace with independent per-cycle loss probability `per`.
pub fn bernoulli(per: f64, n_cycles: u64, seed: u64, cycle_period: f64) -> Result<BinaryTrace> {
    check_cycles(n_cycles, 1)?;
    if !(per.is_finite() && (0.0..1.0).contains(&per)) {
        return Err(Error::InvalidInput(format!(
            "loss probability must lie in [0, 1), got {per}"
        )));
    }
    let bits = bernoulli_bits(per, n_cycles, &mut replication_rng(seed, 0));
    BinaryTrace::new(bits, cycle_period)
}

/// Empirical metrics aggregated over independently seeded replications.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub replications: u32,
    pub cycles_per_rep: u64,
    pub n_sv: u32,
    /// Mean application availability across replications.
    pub mean_availability: f64,
    /// Standard error of the availability mean.
    pub stderr_availability: f64,
    /// Mean application reliability in cycles, over replications that
    /// observed at least one failure; `None` when none did.
    pub mean_reliability_cycles: Option<f64>,
    /// Standard error of the reliability mean; `None` with fewer than two
    /// contributing replications.
    pub stderr_reliability_cycles: Option<f64>,
    /// Application failure events summed over all replications.
    pub failure_event_count: u64,
    pub seed: u64,
    pub rng_algorithm: &'static str,
}

/// Run seeded replications of the bursty channel matching `params` and
/// compare the trace estimates against the closed forms.
///
/// Replication `r` uses the RNG stream `r` derived from `seed`; replications
/// may execute concurrently and the aggregate is independent of scheduling.
pub fn monte_carlo_validate(
    params: &NetworkParams,
    n_sv: u32,
    n_cycles: u64,
    replications: u32,
    seed: u64,
) -> Result<MonteCarloResult> {
    let channel = GilbertParams::from_network_params(params);
    monte_carlo_with(n_sv, n_cycles, replications, seed, move |rng, cycles| {
        generate_bits(&channel, cycles, rng, StartState::Stationary)
    })
}

/// As [`monte_carlo_validate`] but over the independent-loss channel.
pub fn monte_carlo_bernoulli(
    per: f64,
    n_sv: u32,
    n_cycles: u64,
    replications: u32,
    seed: u64,
) -> Result<MonteCarloResult> {
    if !(per.is_finite() && (0.0..1.0).contains(&per)) {
        return Err(Error::InvalidInput(format!(
            "loss probability must lie in [0, 1), got {per}"
        )));
    }
    monte_carlo_with(n_sv, n_cycles, replications, seed, move |rng, cycles| {
        bernoulli_bits(per, cycles, rng)
    })
}

fn monte_carlo_with(
    n_sv: u32,
    n_cycles: u64,
    replications: u32,
    seed: u64,
    make_bits: impl Fn(&mut ChaCha8Rng, u64) -> Vec<u8> + Sync,
) -> Result<MonteCarloResult> {
    check_cycles(n_cycles, 10_000)?;
    if replications < 2 {
        return Err(Error::InvalidInput(format!(
            "at least 2 replications required, got {replications}"
        )));
    }

    struct RepOutcome {
        availability: f64,
        reliability: Option<f64>,
        failures: u64,
    }

    let outcomes: Vec<RepOutcome> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let bits = make_bits(&mut rng, n_cycles);
            let trace = BinaryTrace::new(bits, 1.0).expect("generated trace is valid");
            let metrics = trace.app_metrics(n_sv);
            RepOutcome {
                availability: metrics.app_availability,
                reliability: match metrics.app_reliability {
                    Some(MeanCycles::Finite(cycles)) => Some(cycles),
                    _ => None,
                },
                failures: (metrics.transition_rate * n_cycles as f64).round() as u64,
            }
        })
        .collect();

    let availabilities: Vec<f64> = outcomes.iter().map(|o| o.availability).collect();
    let (mean_availability, stderr_availability) = mean_and_stderr(&availabilities);
    let reliabilities: Vec<f64> = outcomes.iter().filter_map(|o| o.reliability).collect();
    let (mean_reliability_cycles, stderr_reliability_cycles) = if reliabilities.is_empty() {
        (None, None)
    } else {
        let (mean, stderr) = mean_and_stderr(&reliabilities);
        let stderr = (reliabilities.len() >= 2).then_some(stderr);
        (Some(mean), stderr)
    };

    Ok(MonteCarloResult {
        replications,
        cycles_per_rep: n_cycles,
        n_sv,
        mean_availability,
        stderr_availability,
        mean_reliability_cycles,
        stderr_reliability_cycles,
        failure_event_count: outcomes.iter().map(|o| o.failures).sum(),
        seed,
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// RNG for one replication: ChaCha8 keyed by `seed` on stream `replication`,
/// so replications never share a stream.
fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn generate_bits(
    channel: &GilbertParams,
    n_cycles: u64,
    rng: &mut ChaCha8Rng,
    start: StartState,
) -> Vec<u8> {
    let mut down = match start {
        StartState::Stationary => rng.random_bool(channel.loss_ratio()),
        StartState::Up => false,
        StartState::Down => true,
    };
    let mut bits = Vec::with_capacity(n_cycles as usize);
    for _ in 0..n_cycles {
        bits.push(if down { 0 } else { 1 });
        down = if down {
            !rng.random_bool(channel.b)
        } else {
            rng.random_bool(channel.g)
        };
    }
    bits
}

fn bernoulli_bits(per: f64, n_cycles: u64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut bits = Vec::with_capacity(n_cycles as usize);
    for _ in 0..n_cycles {
        bits.push(if rng.random_bool(per) { 0 } else { 1 });
    }
    bits
}

fn check_cycles(n_cycles: u64, minimum: u64) -> Result<()> {
    if n_cycles < minimum {
        return Err(Error::InvalidInput(format!(
            "at least {minimum} cycles required, got {n_cycles}"
        )));
    }
    if n_cycles > (usize::MAX / 2) as u64 {
        return Err(Error::InvalidInput(format!(
            "{n_cycles} cycles exceed addressable trace length"
        )));
    }
    Ok(())
}

/// Sample mean and its standard error (sample standard deviation divided by
/// the square root of the sample size).
fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let variance = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (variance / n).sqrt())
}
