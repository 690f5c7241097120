//! Binary reception traces and the empirical estimation pipeline: packet-log
//! ingestion, run-length statistics, the survival-time filter, and
//! packet-weighted downtime CDFs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MeanCycles, ReliabilityReport};

/// One transmitted packet: its sequence number and observed delay in
/// seconds. A missing delay means the packet never arrived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketLogRecord {
    pub seq: usize,
    pub delay: Option<f64>,
}

/// Per-cycle reception outcome: `1` for a packet that arrived within its
/// delay bound, `0` otherwise. The index is the cycle number.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryTrace {
    bits: Vec<u8>,
    cycle_period: f64,
}

/// One maximal run of identical outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub up: bool,
    pub len: u64,
}

impl BinaryTrace {
    /// Wrap a non-empty bit sequence; every element must be 0 or 1. The
    /// cycle period is in seconds.
    pub fn new(bits: Vec<u8>, cycle_period: f64) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidInput("trace must be non-empty".into()));
        }
        if !(cycle_period.is_finite() && cycle_period > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cycle period must be positive, got {cycle_period}"
            )));
        }
        if let Some(pos) = bits.iter().position(|b| *b > 1) {
            return Err(Error::InvalidInput(format!(
                "trace element at cycle {pos} is {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self { bits, cycle_period })
    }

    /// Build the reception trace for `expected_count` cycles from a packet
    /// log. Cycle `i` is 1 iff a record with `seq = i` exists, was received,
    /// and its delay is within `delay_bound` (seconds). Missing sequence
    /// numbers count as lost, so silent tail loss is included.
    pub fn from_packet_log(
        records: &[PacketLogRecord],
        expected_count: usize,
        delay_bound: f64,
        cycle_period: f64,
    ) -> Result<Self> {
        if expected_count == 0 {
            return Err(Error::InvalidInput(
                "expected packet count must be at least 1".into(),
            ));
        }
        if !(delay_bound.is_finite() && delay_bound > 0.0) {
            return Err(Error::InvalidInput(format!(
                "delay bound must be positive, got {delay_bound}"
            )));
        }
        let mut bits = vec![0u8; expected_count];
        let mut seen = vec![false; expected_count];
        for record in records {
            if record.seq >= expected_count {
                return Err(Error::InvalidInput(format!(
                    "sequence number {} outside the expected range 0..{expected_count}",
                    record.seq
                )));
            }
            if seen[record.seq] {
                return Err(Error::InvalidInput(format!(
                    "duplicate sequence number {}",
                    record.seq
                )));
            }
            seen[record.seq] = true;
            if matches!(record.delay, Some(d) if d <= delay_bound) {
                bits[record.seq] = 1;
            }
        }
        Self::new(bits, cycle_period)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    /// Cycle period in seconds.
    pub fn cycle_period(&self) -> f64 {
        self.cycle_period
    }

    /// Maximal runs of identical bits, left to right. Boundary-truncated
    /// runs are included.
    pub fn runs(&self) -> Vec<Run> {
        let mut runs = Vec::new();
        let mut current = self.bits[0];
        let mut len = 0u64;
        for &bit in &self.bits {
            if bit == current {
                len += 1;
            } else {
                runs.push(Run {
                    up: current == 1,
                    len,
                });
                current = bit;
                len = 1;
            }
        }
        runs.push(Run {
            up: current == 1,
            len,
        });
        runs
    }

    /// Run-length statistics over the whole trace, boundary runs included.
    pub fn run_stats(&self) -> RunStats {
        RunStats::from_runs(self.runs())
    }

    /// Run-length statistics with the first and last run dropped, for
    /// sensitivity checks against boundary truncation. `None` when nothing
    /// remains.
    pub fn run_stats_interior(&self) -> Option<RunStats> {
        let runs = self.runs();
        if runs.len() <= 2 {
            return None;
        }
        Some(RunStats::from_runs(runs[1..runs.len() - 1].to_vec()))
    }

    /// Apply the survival-time tolerance: in every maximal run of `k` lost
    /// cycles the first `min(k, n_sv)` become 1, so bursts no longer than
    /// `n_sv` vanish and longer ones shrink by `n_sv`. The result is the
    /// sequence as the application experiences it.
    ///
    /// A burst at the very start of the trace is treated as if preceded by
    /// an up cycle; use [`BinaryTrace::survival_filter_with`] to turn that
    /// off.
    pub fn survival_filter(&self, n_sv: u32) -> BinaryTrace {
        self.survival_filter_with(n_sv, true)
    }

    /// As [`BinaryTrace::survival_filter`], with explicit control over
    /// whether a trace-initial burst is eligible for filtering.
    pub fn survival_filter_with(&self, n_sv: u32, filter_leading_burst: bool) -> BinaryTrace {
        let mut bits = Vec::with_capacity(self.bits.len());
        let mut budget: u64 = if filter_leading_burst { n_sv as u64 } else { 0 };
        for &bit in &self.bits {
            if bit == 1 {
                bits.push(1);
                budget = n_sv as u64;
            } else if budget > 0 {
                bits.push(1);
                budget -= 1;
            } else {
                bits.push(0);
            }
        }
        BinaryTrace {
            bits,
            cycle_period: self.cycle_period,
        }
    }

    /// Application- and network-level metrics: the application-side numbers
    /// come from the survival-filtered trace, the network-side numbers from
    /// the raw one.
    pub fn app_metrics(&self, n_sv: u32) -> ReliabilityReport {
        self.app_metrics_with(n_sv, true)
    }

    /// As [`BinaryTrace::app_metrics`], with explicit control over filtering
    /// of a trace-initial burst.
    pub fn app_metrics_with(&self, n_sv: u32, filter_leading_burst: bool) -> ReliabilityReport {
        let network = self.run_stats();
        let filtered = self.survival_filter_with(n_sv, filter_leading_burst);
        let app = filtered.run_stats();
        let n = network.n_total as f64;

        let app_reliability = if app.down_runs.is_empty() {
            if app.up_runs.is_empty() {
                None
            } else {
                // The single observed up period never ended.
                Some(MeanCycles::Unbounded)
            }
        } else {
            app.mean_up().map(MeanCycles::Finite)
        };

        ReliabilityReport {
            app_availability: (app.n_total - app.n_failed) as f64 / n,
            app_reliability,
            app_mean_downtime: app.mean_down(),
            transition_rate: app.down_runs.len() as f64 / n,
            network_availability: 1.0 - network.per(),
            packet_error_ratio: network.per(),
            network_mean_uptime: network.mean_up(),
            network_mean_downtime: network.mean_down(),
            cycle_period: Some(self.cycle_period),
        }
    }

    /// Packet-weighted downtime CDF: the value at downtime `x` is the
    /// fraction of cycles that are either delivered or belong to a down run
    /// of length at most `x / cycle_period`. Points are emitted at 0 and at
    /// every distinct down-run length; the function is a right-continuous
    /// step in between, reaching 1 at the longest down run.
    pub fn downtime_cdf(&self) -> Vec<CdfPoint> {
        let stats = self.run_stats();
        let n = stats.n_total as f64;
        let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
        for &len in &stats.down_runs {
            *histogram.entry(len).or_insert(0) += len;
        }
        let mut points = vec![CdfPoint {
            downtime: 0.0,
            cumulative: (stats.n_total - stats.n_failed) as f64 / n,
        }];
        let mut covered = stats.n_total - stats.n_failed;
        for (len, cycles) in histogram {
            covered += cycles;
            points.push(CdfPoint {
                downtime: len as f64 * self.cycle_period,
                cumulative: covered as f64 / n,
            });
        }
        points
    }

    /// Parse the text trace format: one `0` or `1` per line, `#` starts a
    /// comment line. The cycle period is not part of the format and must be
    /// supplied.
    pub fn from_text(text: &str, cycle_period: f64) -> Result<Self> {
        let mut bits = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "0" => bits.push(0),
                "1" => bits.push(1),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "trace line {}: expected 0 or 1, got {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(bits, cycle_period)
    }

    /// Serialize to the text trace format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.bits.len() * 2);
        for &bit in &self.bits {
            out.push(if bit == 1 { '1' } else { '0' });
            out.push('\n');
        }
        out
    }
}

/// Run-length statistics of a trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    /// Cycles covered by these statistics.
    pub n_total: u64,
    /// Lost cycles among them.
    pub n_failed: u64,
    /// Lengths of maximal delivered runs, in trace order.
    pub up_runs: Vec<u64>,
    /// Lengths of maximal lost runs, in trace order.
    pub down_runs: Vec<u64>,
}

impl RunStats {
    fn from_runs(runs: Vec<Run>) -> Self {
        let mut stats = RunStats {
            n_total: 0,
            n_failed: 0,
            up_runs: Vec::new(),
            down_runs: Vec::new(),
        };
        for run in runs {
            stats.n_total += run.len;
            if run.up {
                stats.up_runs.push(run.len);
            } else {
                stats.n_failed += run.len;
                stats.down_runs.push(run.len);
            }
        }
        stats
    }

    /// Observed packet error ratio `n_failed / n_total`.
    pub fn per(&self) -> f64 {
        self.n_failed as f64 / self.n_total as f64
    }

    /// Mean up-run length in cycles; `None` when no up run was observed.
    pub fn mean_up(&self) -> Option<f64> {
        mean(&self.up_runs)
    }

    /// Mean down-run length in cycles; `None` when no down run was observed.
    pub fn mean_down(&self) -> Option<f64> {
        mean(&self.down_runs)
    }
}

fn mean(lengths: &[u64]) -> Option<f64> {
    if lengths.is_empty() {
        return None;
    }
    Some(lengths.iter().sum::<u64>() as f64 / lengths.len() as f64)
}

/// One step of a packet-weighted downtime CDF.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CdfPoint {
    /// Downtime in seconds.
    pub downtime: f64,
    /// Fraction of cycles delivered or inside a down run no longer than
    /// `downtime`.
    pub cumulative: f64,
}

/// Parse a packet log CSV with header `seq,delay_us`; an empty delay means
/// the packet never arrived. Delays are converted to seconds.
pub fn parse_packet_log<R: std::io::Read>(reader: R) -> Result<Vec<PacketLogRecord>> {
    #[derive(Deserialize)]
    struct Row {
        seq: usize,
        delay_us: Option<f64>,
    }
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::InvalidInput(format!("packet log: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["seq", "delay_us"] {
        return Err(Error::InvalidInput(format!(
            "packet log header must be `seq,delay_us`, got {headers:?}"
        )));
    }
    let mut records = Vec::new();
    for row in csv_reader.deserialize::<Row>() {
        let row = row.map_err(|e| Error::InvalidInput(format!("packet log: {e}")))?;
        records.push(PacketLogRecord {
            seq: row.seq,
            delay: row.delay_us.map(|us| us * 1e-6),
        });
    }
    Ok(records)
}

/// Render a downtime CDF as CSV with header `downtime_ms,cdf`.
pub fn format_downtime_cdf_csv(points: &[CdfPoint]) -> String {
    let mut out = String::from("downtime_ms,cdf\n");
    for point in points {
        writeln!(out, "{},{}", point.downtime * 1e3, point.cumulative).expect("string write");
    }
    out
}
