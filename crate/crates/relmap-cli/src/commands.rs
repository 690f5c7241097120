//! Implementations of the five subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde_json::{Map, Value};

use relmap::chansim::{self, GilbertParams, MonteCarloResult};
use relmap::trace::{self, BinaryTrace};
use relmap::translate::{self, FeasibilityOutcome, FeasibilityResult};
use relmap::{MeanCycles, NetworkParams, ReliabilityReport};

use crate::report::Report;
use crate::{
    AnalyzeArgs, CliError, InvertArgs, MapArgs, Metric, OutputArgs, OutputFormat, SimulateArgs,
    SweepArgs, SweepVar,
};

type CliResult = Result<(), CliError>;

pub fn map(args: MapArgs) -> CliResult {
    let cycle_s = cycle_seconds(args.cycle_ms)?;
    let tau_dn_cycles = resolve_tau_dn(args.tau_dn.as_deref(), args.tau_dn_cycles, cycle_s)?;
    let params = NetworkParams::from_per_and_mean_down_time(args.per, tau_dn_cycles)?;
    let metrics = params.full_report(args.nsv, cycle_s)?;

    if let Some(path) = &args.dump_chain {
        let model = relmap::fsmc::FsmcModel::build(params, args.nsv)?;
        write_file(path, &chain_csv(&model)?)?;
    }

    let mut report = Report::new("map");
    report.input("per", args.per, "probability");
    report.input("tau_dn", tau_dn_cycles, "cycles");
    report.input_count("nsv", args.nsv as u64);
    if let Some(ms) = args.cycle_ms {
        report.input("cycle_period", ms, "milliseconds");
    }
    push_metrics(&mut report, &metrics);
    write_report(&report, &args.out, OutputFormat::Json)
}

pub fn invert(args: InvertArgs) -> CliResult {
    let availability = match (args.availability, args.nines) {
        (Some(a), None) => Some(a),
        (None, Some(n)) => {
            let target = 1.0 - 10f64.powi(-(n.min(400) as i32));
            // Beyond ~15 nines the target rounds to exactly 1.0, which no
            // finite channel can meet; refuse rather than silently weaken.
            if target >= 1.0 {
                return Err(CliError::Invalid(format!(
                    "{n} nines round to an availability of 1.0, beyond double precision"
                )));
            }
            Some(target)
        }
        (None, None) => None,
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    };
    let cycle_s = cycle_seconds(args.cycle_ms)?;

    let mut report = Report::new("invert");
    if let Some(a) = availability {
        report.input("availability_target", a, "probability");
    }
    if let Some(r) = args.reliability_cycles {
        report.input("reliability_target", r, "cycles");
    }
    if let Some(p) = args.per {
        report.input("per", p, "probability");
    }
    if let Some(t) = args.tau_dn_cycles {
        report.input("tau_dn", t, "cycles");
    }
    report.input_count("nsv", args.nsv as u64);

    match (availability, args.reliability_cycles, args.per, args.tau_dn_cycles) {
        // Both targets, nothing fixed: solve for the exact parameter pair.
        (Some(a), Some(r), None, None) => {
            let params = translate::joint_solve(a, r, args.nsv)?;
            report.result_text("solved_for", "per and tau_dn");
            report.result("per", params.per(), "probability");
            report.result("tau_dn", params.mean_down_time(), "cycles");
            report.result("tau_un", params.mean_up_time(), "cycles");
            report.result(
                "achieved_availability",
                params.app_availability(args.nsv),
                "probability",
            );
            report.result_mean(
                "achieved_reliability",
                Some(params.app_reliability(args.nsv)),
                "cycles",
            );
            if let Some(tc) = cycle_s {
                if let Some(cycles) = params.app_reliability(args.nsv).finite() {
                    report.result("achieved_reliability_seconds", cycles * tc, "seconds");
                }
            }
        }
        (Some(a), None, None, Some(tau)) => {
            let bound = translate::max_per_for_availability(a, tau, args.nsv)?;
            push_feasibility(&mut report, "max_per", "probability", &bound);
        }
        (Some(a), None, Some(per), None) => {
            let bound = translate::max_tau_dn_for_availability(a, per, args.nsv)?;
            push_feasibility(&mut report, "max_tau_dn", "cycles", &bound);
        }
        (None, Some(r), None, Some(tau)) => {
            let bound = translate::max_per_for_reliability(r, tau, args.nsv)?;
            push_feasibility(&mut report, "max_per", "probability", &bound);
        }
        (None, Some(r), Some(per), None) => {
            report.input("tau_cap", args.tau_cap_cycles, "cycles");
            let set = translate::tau_dn_intervals_for_reliability(
                r,
                per,
                args.nsv,
                args.tau_cap_cycles,
            )?;
            push_feasibility(&mut report, "tau_dn", "cycles", &set);
        }
        (None, None, ..) => {
            return Err(CliError::Invalid(
                "provide --availability/--nines and/or --reliability-cycles".into(),
            ))
        }
        (Some(_), None, None, None) | (None, Some(_), None, None) => {
            return Err(CliError::Invalid(
                "a single target needs a fixed parameter (--per or --tau-dn-cycles); \
                 give both targets to solve for the exact pair"
                    .into(),
            ))
        }
        _ => {
            return Err(CliError::Invalid(
                "over-constrained: give both targets and no fixed parameter, or one target \
                 plus one fixed parameter (--per or --tau-dn-cycles)"
                    .into(),
            ))
        }
    }
    write_report(&report, &args.out, OutputFormat::Json)
}

pub fn simulate(args: SimulateArgs) -> CliResult {
    let cycle_s = cycle_seconds(args.cycle_ms)?;
    if !(args.per.is_finite() && (0.0..1.0).contains(&args.per)) {
        return Err(CliError::Invalid(format!(
            "packet error ratio must lie in [0, 1), got {}",
            args.per
        )));
    }

    let (mc, analytic, channel_kind): (MonteCarloResult, Option<NetworkParams>, &str) =
        if args.independent {
            let mc = chansim::monte_carlo_bernoulli(
                args.per, args.nsv, args.cycles, args.reps, args.seed,
            )?;
            // The independent channel is the two-state chain with
            // r_u = p and r_d = 1 - p.
            let analytic = (args.per > 0.0)
                .then(|| NetworkParams::from_exit_rates(args.per, 1.0 - args.per))
                .transpose()?;
            (mc, analytic, "independent")
        } else {
            let tau = args.tau_dn_cycles.expect("required by clap");
            let params = NetworkParams::from_per_and_mean_down_time(args.per, tau)?;
            let mc =
                chansim::monte_carlo_validate(&params, args.nsv, args.cycles, args.reps, args.seed)?;
            (mc, Some(params), "bursty")
        };

    if let Some(path) = &args.trace_out {
        // Stream 0 is replication 0, so this reproduces the first
        // replication bit for bit.
        let first = if args.independent {
            chansim::bernoulli(args.per, args.cycles, args.seed, cycle_s.unwrap_or(1.0))?
        } else {
            let channel = GilbertParams::from_network_params(&analytic.expect("bursty"));
            chansim::generate(&channel, args.cycles, args.seed, cycle_s.unwrap_or(1.0))?
        };
        write_file(path, &first.to_text())?;
    }

    let mut report = Report::new("simulate");
    report.rng(mc.rng_algorithm, mc.seed);
    report.input("per", args.per, "probability");
    if let Some(tau) = args.tau_dn_cycles {
        report.input("tau_dn", tau, "cycles");
    }
    report.input_text("channel", channel_kind);
    report.input_count("cycles", args.cycles);
    report.input_count("replications", args.reps as u64);
    report.input_count("nsv", args.nsv as u64);
    if let Some(ms) = args.cycle_ms {
        report.input("cycle_period", ms, "milliseconds");
    }

    report.result("mean_availability", mc.mean_availability, "probability");
    report.result(
        "stderr_availability",
        mc.stderr_availability,
        "probability",
    );
    report.result_opt(
        "mean_reliability",
        mc.mean_reliability_cycles,
        "cycles",
    );
    report.result_opt(
        "stderr_reliability",
        mc.stderr_reliability_cycles,
        "cycles",
    );
    if let (Some(tc), Some(cycles)) = (cycle_s, mc.mean_reliability_cycles) {
        report.result("mean_reliability_seconds", cycles * tc, "seconds");
    }
    report.result_count("failure_event_count", mc.failure_event_count);

    match analytic {
        Some(params) => {
            report.result(
                "analytic_availability",
                params.app_availability(args.nsv),
                "probability",
            );
            report.result_mean(
                "analytic_reliability",
                Some(params.app_reliability(args.nsv)),
                "cycles",
            );
        }
        None => {
            // Lossless independent channel.
            report.result("analytic_availability", 1.0, "probability");
            report.result_mean("analytic_reliability", Some(MeanCycles::Unbounded), "cycles");
        }
    }
    write_report(&report, &args.out, OutputFormat::Json)
}

pub fn analyze(args: AnalyzeArgs) -> CliResult {
    let cycle_s = cycle_seconds(args.cycle_ms)?;
    let trace_cycle = cycle_s.unwrap_or(1.0);

    let (trace, source) = match (&args.trace, &args.packet_log) {
        (Some(path), None) => {
            let text = read_file(path)?;
            (BinaryTrace::from_text(&text, trace_cycle)?, path)
        }
        (None, Some(path)) => {
            let expected = args.expected.expect("required by clap");
            let bound_ms = args.delay_bound_ms.expect("required by clap");
            let records = trace::parse_packet_log(open_file(path)?)?;
            (
                BinaryTrace::from_packet_log(&records, expected, bound_ms * 1e-3, trace_cycle)?,
                path,
            )
        }
        (None, None) => {
            return Err(CliError::Invalid(
                "provide --trace or --packet-log".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    };

    if let Some(path) = &args.cdf_out {
        if cycle_s.is_none() {
            return Err(CliError::Invalid(
                "--cdf-out needs --cycle-ms to express downtimes in milliseconds".into(),
            ));
        }
        let csv_text = trace::format_downtime_cdf_csv(&trace.downtime_cdf());
        write_file(path, &csv_text)?;
    }

    let metrics = trace.app_metrics_with(args.nsv, !args.no_leading_filter);
    let stats = trace.run_stats();

    let mut report = Report::new("analyze");
    report.input_text("source", &source.display().to_string());
    report.input_count("nsv", args.nsv as u64);
    if let Some(ms) = args.cycle_ms {
        report.input("cycle_period", ms, "milliseconds");
    }
    if let Some(ms) = args.delay_bound_ms {
        report.input("delay_bound", ms, "milliseconds");
    }
    if args.no_leading_filter {
        report.input_text("leading_burst", "not filtered");
    }
    report.result_count("cycles", stats.n_total);
    report.result_count("failed_cycles", stats.n_failed);
    push_metrics(&mut report, &metrics);
    write_report(&report, &args.out, OutputFormat::Json)
}

pub fn sweep(args: SweepArgs) -> CliResult {
    let grid = sweep_grid(&args)?;
    if args.monte_carlo && (args.cycles.is_none() || args.reps.is_none() || args.seed.is_none()) {
        return Err(CliError::Invalid(
            "--monte-carlo needs --cycles, --reps and --seed".into(),
        ));
    }

    struct Row {
        swept: f64,
        analytic: Value,
        mc_mean: Option<f64>,
        mc_stderr: Option<f64>,
    }

    let mut rows = Vec::with_capacity(grid.len());
    for (index, &swept) in grid.iter().enumerate() {
        let (params, n_sv) = match args.var {
            SweepVar::TauDn => {
                let n_sv = args.nsv.ok_or_else(|| {
                    CliError::Invalid("sweeping tau_dn needs a fixed --nsv".into())
                })?;
                (
                    NetworkParams::from_per_and_mean_down_time(args.per, swept)?,
                    n_sv,
                )
            }
            SweepVar::Nsv => {
                let tau = args.tau_dn_cycles.ok_or_else(|| {
                    CliError::Invalid("sweeping nsv needs a fixed --tau-dn-cycles".into())
                })?;
                (
                    NetworkParams::from_per_and_mean_down_time(args.per, tau)?,
                    swept as u32,
                )
            }
        };

        let analytic = match args.metric {
            Metric::Availability => Value::from(params.app_availability(n_sv)),
            Metric::Unavailability => Value::from(1.0 - params.app_availability(n_sv)),
            Metric::Reliability => match params.app_reliability(n_sv) {
                MeanCycles::Finite(cycles) => Value::from(cycles),
                MeanCycles::Unbounded => Value::from("unbounded"),
            },
        };

        let (mc_mean, mc_stderr) = if args.monte_carlo {
            let mc = chansim::monte_carlo_validate(
                &params,
                n_sv,
                args.cycles.expect("checked"),
                args.reps.expect("checked"),
                args.seed.expect("checked").wrapping_add(index as u64),
            )?;
            match args.metric {
                Metric::Availability => (Some(mc.mean_availability), Some(mc.stderr_availability)),
                Metric::Unavailability => {
                    (Some(1.0 - mc.mean_availability), Some(mc.stderr_availability))
                }
                Metric::Reliability => (mc.mean_reliability_cycles, mc.stderr_reliability_cycles),
            }
        } else {
            (None, None)
        };

        rows.push(Row {
            swept,
            analytic,
            mc_mean,
            mc_stderr,
        });
    }

    let format = args.out.format.unwrap_or(OutputFormat::Csv);
    let metric_name = match args.metric {
        Metric::Availability => "availability",
        Metric::Unavailability => "unavailability",
        Metric::Reliability => "reliability",
    };
    match format {
        OutputFormat::Csv => {
            let mut text = String::new();
            if args.monte_carlo {
                text.push_str("swept_value,analytic_value,mc_mean,mc_stderr\n");
            } else {
                text.push_str("swept_value,analytic_value\n");
            }
            for row in &rows {
                write!(text, "{},{}", row.swept, value_cell(&row.analytic)).expect("string write");
                if args.monte_carlo {
                    write!(
                        text,
                        ",{},{}",
                        row.mc_mean.map(|v| v.to_string()).unwrap_or_default(),
                        row.mc_stderr.map(|v| v.to_string()).unwrap_or_default()
                    )
                    .expect("string write");
                }
                text.push('\n');
            }
            write_output(&text, &args.out.output)
        }
        OutputFormat::Json => {
            let mut report = Report::new("sweep");
            if let Some(seed) = args.seed.filter(|_| args.monte_carlo) {
                report.rng(chansim::RNG_ALGORITHM, seed);
                report.input_text("seed_derivation", "point i uses seed + i");
            }
            report.input_text(
                "swept_variable",
                match args.var {
                    SweepVar::TauDn => "tau_dn",
                    SweepVar::Nsv => "nsv",
                },
            );
            report.input("per", args.per, "probability");
            if let Some(tau) = args.tau_dn_cycles {
                report.input("tau_dn", tau, "cycles");
            }
            if let Some(n) = args.nsv {
                report.input_count("nsv", n as u64);
            }
            report.input_text("metric", metric_name);
            let metric_unit = match args.metric {
                Metric::Reliability => "cycles",
                _ => "probability",
            };
            report.result_text("analytic_value_unit", metric_unit);
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    obj.insert("swept_value".into(), Value::from(row.swept));
                    obj.insert("analytic_value".into(), row.analytic.clone());
                    if args.monte_carlo {
                        obj.insert(
                            "mc_mean".into(),
                            row.mc_mean.map(Value::from).unwrap_or(Value::Null),
                        );
                        obj.insert(
                            "mc_stderr".into(),
                            row.mc_stderr.map(Value::from).unwrap_or(Value::Null),
                        );
                    }
                    Value::Object(obj)
                })
                .collect();
            report.result_value("rows", Value::Array(json_rows));
            write_report(&report, &args.out, OutputFormat::Json)
        }
    }
}

fn sweep_grid(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    if args.steps == 0 {
        return Err(CliError::Invalid("empty grid: --steps must be >= 1".into()));
    }
    if !(args.from.is_finite() && args.to.is_finite()) || args.from > args.to {
        return Err(CliError::Invalid(format!(
            "bad range: --from {} --to {}",
            args.from, args.to
        )));
    }
    if args.steps == 1 && args.from != args.to {
        return Err(CliError::Invalid(
            "one step cannot span a range; use --steps >= 2 or --from == --to".into(),
        ));
    }
    let mut grid = Vec::with_capacity(args.steps as usize);
    for i in 0..args.steps {
        let value = if args.steps == 1 {
            args.from
        } else {
            args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64
        };
        grid.push(value);
    }
    if args.var == SweepVar::Nsv {
        for value in &mut grid {
            let rounded = value.round();
            if (*value - rounded).abs() > 1e-9 || rounded < 0.0 {
                return Err(CliError::Invalid(format!(
                    "nsv grid point {value} is not a whole tolerance; choose --from/--to/--steps \
                     that land on integers"
                )));
            }
            *value = rounded;
        }
    }
    Ok(grid)
}

/// Shared result block for analytic and trace-derived metric reports.
fn push_metrics(report: &mut Report, metrics: &ReliabilityReport) {
    report.result("app_availability", metrics.app_availability, "probability");
    report.result_mean("app_reliability", metrics.app_reliability, "cycles");
    if let Some(seconds) = metrics.app_reliability_seconds() {
        report.result("app_reliability_seconds", seconds, "seconds");
    }
    report.result_opt("app_mean_downtime", metrics.app_mean_downtime, "cycles");
    if let Some(seconds) = metrics.app_mean_downtime_seconds() {
        report.result("app_mean_downtime_seconds", seconds, "seconds");
    }
    report.result(
        "transition_rate",
        metrics.transition_rate,
        "events_per_cycle",
    );
    report.result(
        "network_availability",
        metrics.network_availability,
        "probability",
    );
    report.result(
        "packet_error_ratio",
        metrics.packet_error_ratio,
        "probability",
    );
    report.result_opt(
        "network_mean_uptime",
        metrics.network_mean_uptime,
        "cycles",
    );
    report.result_opt(
        "network_mean_downtime",
        metrics.network_mean_downtime,
        "cycles",
    );
}

fn push_feasibility(report: &mut Report, quantity: &str, unit: &str, result: &FeasibilityResult) {
    report.result_text("quantity", quantity);
    match &result.outcome {
        FeasibilityOutcome::Bound { value } => {
            report.result_text("kind", "bound");
            report.result(quantity, *value, unit);
        }
        FeasibilityOutcome::Unconstrained => report.result_text("kind", "unconstrained"),
        FeasibilityOutcome::Infeasible => report.result_text("kind", "infeasible"),
        FeasibilityOutcome::IntervalSet { intervals } => {
            report.result_text("kind", "interval_set");
            let rendered: Vec<Value> = intervals
                .iter()
                .map(|iv| {
                    let mut obj = Map::new();
                    obj.insert("low".into(), Value::from(iv.low));
                    obj.insert("high".into(), Value::from(iv.high));
                    Value::Object(obj)
                })
                .collect();
            report.result_value("intervals", Value::Array(rendered));
            report.result_text("intervals_unit", unit);
        }
    }
    report.result_text("diagnostic", &result.diagnostic);
}

/// CSV dump of a chain: transition matrix with state labels, then the
/// steady-state vector.
fn chain_csv(model: &relmap::fsmc::FsmcModel) -> Result<String, CliError> {
    let labels = model.state_labels();
    let mut out = String::from("# transition matrix, row-major\n");
    out.push_str("from_state,");
    out.push_str(&labels.join(","));
    out.push('\n');
    for (i, label) in labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..model.dim() {
            write!(out, ",{}", model.entry(i, j)).expect("string write");
        }
        out.push('\n');
    }
    let pi = model.steady_state().map_err(CliError::from)?;
    out.push_str("# steady state\nstate,probability\n");
    for (label, prob) in labels.iter().zip(pi.probabilities()) {
        writeln!(out, "{label},{prob}").expect("string write");
    }
    Ok(out)
}

fn value_cell(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Accepts `12ms`, `0.5s` and the like; bare numbers are rejected as
/// ambiguous.
fn parse_duration_seconds(text: &str) -> Result<f64, CliError> {
    let text = text.trim();
    let (number, scale) = if let Some(v) = text.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = text.strip_suffix('s') {
        (v, 1.0)
    } else {
        return Err(CliError::Invalid(format!(
            "duration {text:?} needs a unit suffix (ms or s)"
        )));
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("cannot parse duration {text:?}")))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(CliError::Invalid(format!(
            "duration must be positive, got {text:?}"
        )));
    }
    Ok(value * scale)
}

fn cycle_seconds(cycle_ms: Option<f64>) -> Result<Option<f64>, CliError> {
    match cycle_ms {
        None => Ok(None),
        Some(ms) if ms.is_finite() && ms > 0.0 => Ok(Some(ms * 1e-3)),
        Some(ms) => Err(CliError::Invalid(format!(
            "cycle period must be positive, got {ms} ms"
        ))),
    }
}

fn resolve_tau_dn(
    duration: Option<&str>,
    cycles: Option<f64>,
    cycle_s: Option<f64>,
) -> Result<f64, CliError> {
    match (duration, cycles) {
        (None, Some(cycles)) => Ok(cycles),
        (Some(text), None) => {
            let seconds = parse_duration_seconds(text)?;
            let tc = cycle_s.ok_or_else(|| {
                CliError::Invalid("--tau-dn as a duration needs --cycle-ms".into())
            })?;
            Ok(seconds / tc)
        }
        (None, None) => Err(CliError::Invalid(
            "provide --tau-dn or --tau-dn-cycles".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    }
}

fn write_report(report: &Report, out: &OutputArgs, default: OutputFormat) -> CliResult {
    let text = match out.format.unwrap_or(default) {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };
    write_output(&text, &out.output)
}

fn write_output(text: &str, path: &Option<PathBuf>) -> CliResult {
    match path {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn open_file(path: &PathBuf) -> Result<fs::File, CliError> {
    fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
