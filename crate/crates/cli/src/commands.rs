use std::path::Path;

use ackhold_core::holder::HolderTraceRow;
use ackhold_core::netsim::{run, CwndSample, Metrics, Scenario, SenderVariant};
use ackhold_core::schedule::{
    build_schedule, forward_scan_split, rto_curve, PacingSchedule, SchedulerInput, SplitEval,
};
use rayon::prelude::*;

use crate::csvout::{num, Table};
use crate::scenario_file::ScenarioSpec;
use crate::CliError;

fn schedule_error(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Release timetable for one outage. `truncated` in the header comment flags
/// a schedule that could not cover the whole outage.
pub fn cmd_schedule(input: &SchedulerInput) -> Result<(PacingSchedule, Table), CliError> {
    let s = build_schedule(input).map_err(schedule_error)?;
    let mut table = Table::new(
        &[
            "ACK release timetable: inter-release gap and predicted fixed-host RTO per released ACK",
            &format!(
                "N={} T={} mu0={} sigma0={} guard={} split_n={} theta={} covered={} truncated={}",
                input.total_acks,
                num(input.outage),
                num(input.mu0),
                num(input.sigma0),
                num(input.guard_fraction),
                s.split_n,
                num(s.theta),
                num(s.covered_time),
                s.truncated
            ),
        ],
        &["index", "ack_index", "duplicate", "release_offset", "gap", "predicted_rto_after"],
    );
    for (i, r) in s.releases.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            r.ack_index.to_string(),
            u8::from(r.duplicate).to_string(),
            num(r.offset),
            num(r.gap),
            num(r.rto_after),
        ]);
    }
    if s.truncated {
        log::warn!("schedule covers {} s of a {} s outage", s.covered_time, s.outage);
    }
    Ok((s, table))
}

/// Final RTO as a function of the split point over every feasible split.
pub fn cmd_rto_curve(input: &SchedulerInput) -> Result<(Vec<SplitEval>, Table), CliError> {
    let curve = rto_curve(input).map_err(schedule_error)?;
    let scan = forward_scan_split(input).map_err(schedule_error)?;
    let best = curve.iter().min_by(|a, b| a.final_rto().total_cmp(&b.final_rto())).map(|e| e.split);
    let mut table = Table::new(
        &[
            "final fixed-host RTO after all releases versus number of phase-one releases n",
            &format!(
                "N={} T={} mu0={} sigma0={} guard={}",
                input.total_acks,
                num(input.outage),
                num(input.mu0),
                num(input.sigma0),
                num(input.guard_fraction)
            ),
        ],
        &["n", "elapsed_phase_one", "theta", "final_rto", "is_argmin", "forward_scan_stop"],
    );
    for e in &curve {
        table.push(vec![
            e.split.to_string(),
            num(e.elapsed),
            num(e.theta),
            num(e.final_rto()),
            u8::from(Some(e.split) == best).to_string(),
            u8::from(e.split == scan).to_string(),
        ]);
    }
    Ok((curve, table))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub scenario: Scenario,
    pub baseline: Metrics,
    pub holding: Metrics,
    /// Holding throughput over baseline throughput.
    pub improvement_ratio: f64,
}

impl RunReport {
    pub fn description(&self) -> String {
        let fades: Vec<String> =
            self.scenario.fade_windows.iter().map(|w| format!("{}s@{}s", num(w.duration), num(w.start))).collect();
        format!(
            "{}: {} s transfer, fades [{}], prediction factor {}, seed {}",
            self.name,
            num(self.scenario.transfer_duration),
            fades.join(" "),
            num(self.scenario.prediction_error_factor),
            self.scenario.rng_seed
        )
    }
}

fn run_pair(scenario: &Scenario) -> Result<(Metrics, Metrics), CliError> {
    let (base, hold) = rayon::join(
        || run(&scenario.with_variant(SenderVariant::RenoBaseline)),
        || run(&scenario.with_variant(SenderVariant::AckHolding)),
    );
    let base = base.map_err(|e| CliError::Input(e.to_string()))?;
    let hold = hold.map_err(|e| CliError::Input(e.to_string()))?;
    Ok((base, hold))
}

fn ratio(hold: &Metrics, base: &Metrics) -> f64 {
    if base.throughput > 0.0 {
        hold.throughput / base.throughput
    } else if hold.throughput > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Runs both variants of a scenario.
pub fn run_report(spec: &ScenarioSpec, seed: Option<u64>) -> Result<RunReport, CliError> {
    let mut scenario = spec.scenario.clone();
    if let Some(seed) = seed {
        scenario.rng_seed = seed;
    }
    let (baseline, holding) = run_pair(&scenario)?;
    let improvement_ratio = ratio(&holding, &baseline);
    Ok(RunReport { name: spec.name.clone(), scenario, baseline, holding, improvement_ratio })
}

pub fn report_table(report: &RunReport) -> Table {
    let mut t = Table::new(
        &["throughput comparison, segments delivered per second of transfer", &report.description()],
        &[
            "variant",
            "segments_delivered",
            "throughput",
            "timeout_count",
            "held_ack_timeouts",
            "fast_retransmits",
            "improvement_ratio",
        ],
    );
    for m in [&report.baseline, &report.holding] {
        t.push(vec![
            m.variant.to_string(),
            m.segments_delivered.to_string(),
            num(m.throughput),
            m.timeout_count.to_string(),
            m.held_ack_timeouts.to_string(),
            m.fast_retransmits.to_string(),
            num(if m.variant == SenderVariant::AckHolding { report.improvement_ratio } else { 1.0 }),
        ]);
    }
    t
}

pub fn cwnd_table(variant: SenderVariant, trace: &[CwndSample]) -> Table {
    let mut t = Table::new(
        &[&format!("congestion window, slow-start threshold and RTO over time, {variant}")],
        &["time_s", "cwnd_segments", "ssthresh_segments", "rto_s", "sender_state"],
    );
    for s in trace {
        t.push(vec![num(s.time), num(s.cwnd), num(s.ssthresh), num(s.rto), s.state.to_string()]);
    }
    t
}

pub fn holder_table(trace: &[HolderTraceRow]) -> Table {
    let mut t = Table::new(
        &["base-station holder transitions and emissions"],
        &["time", "connection_id", "event", "mode", "emitted_count"],
    );
    for r in trace {
        t.push(vec![
            num(r.time),
            r.connection.to_string(),
            r.event.to_string(),
            r.mode.to_string(),
            r.emitted_count.to_string(),
        ]);
    }
    t
}

/// Names of the files [`cmd_run`] writes.
pub const RUN_FILES: [&str; 4] = ["report.csv", "cwnd_reno_baseline.csv", "cwnd_ack_holding.csv", "holder_trace.csv"];

/// Runs both variants and writes the report and traces into `out`.
pub fn cmd_run(spec: &ScenarioSpec, seed: Option<u64>, out: &Path) -> Result<RunReport, CliError> {
    let report = run_report(spec, seed)?;
    let tables = [
        report_table(&report),
        cwnd_table(SenderVariant::RenoBaseline, &report.baseline.cwnd_trace),
        cwnd_table(SenderVariant::AckHolding, &report.holding.cwnd_trace),
        holder_table(&report.holding.holder_trace),
    ];
    for (name, table) in RUN_FILES.iter().zip(&tables) {
        table.write(&out.join(name))?;
    }
    Ok(report)
}

/// Scenario knobs a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PredictionErrorFactor,
    FadeDuration,
    PredictionLead,
    WirelessJitter,
    GuardFraction,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::PredictionErrorFactor,
        SweepParam::FadeDuration,
        SweepParam::PredictionLead,
        SweepParam::WirelessJitter,
        SweepParam::GuardFraction,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::PredictionErrorFactor => "prediction_error_factor",
            Self::FadeDuration => "fade_duration",
            Self::PredictionLead => "prediction_lead",
            Self::WirelessJitter => "wireless_jitter",
            Self::GuardFraction => "guard_fraction",
        }
    }

    fn apply(&self, base: &Scenario, value: f64) -> Scenario {
        let mut sc = base.clone();
        match self {
            Self::PredictionErrorFactor => sc.prediction_error_factor = value,
            Self::FadeDuration => sc.fade_windows.iter_mut().for_each(|w| w.duration = value),
            Self::PredictionLead => sc.prediction_lead = value,
            Self::WirelessJitter => sc.wireless_jitter = value,
            Self::GuardFraction => sc.guard_fraction = value,
        }
        sc
    }
}

impl std::str::FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(SweepParam::name).collect();
            CliError::Input(format!("unknown sweep parameter {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub baseline: Metrics,
    pub holding: Metrics,
    pub improvement_ratio: f64,
}

/// Runs both variants at every value, in parallel; rows keep the order of
/// `values`.
pub fn cmd_sweep(
    spec: &ScenarioSpec,
    param: SweepParam,
    values: &[f64],
    seed: Option<u64>,
) -> Result<(Vec<SweepRow>, Table), CliError> {
    let mut base = spec.scenario.clone();
    if let Some(seed) = seed {
        base.rng_seed = seed;
    }
    let scenarios: Vec<Scenario> = values.iter().map(|&v| param.apply(&base, v)).collect();
    for (sc, v) in scenarios.iter().zip(values) {
        sc.validate().map_err(|e| CliError::Input(format!("{}={}: {e}", param.name(), num(*v))))?;
    }
    let rows = scenarios
        .par_iter()
        .zip(values.par_iter())
        .map(|(sc, &value)| {
            let (baseline, holding) = run_pair(sc)?;
            let improvement_ratio = ratio(&holding, &baseline);
            Ok(SweepRow { value, baseline, holding, improvement_ratio })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(
        &[&format!("throughput of both variants while varying {}", param.name()), &spec.name],
        &[
            param.name(),
            "reno_baseline_throughput",
            "ack_holding_throughput",
            "improvement_ratio",
            "reno_baseline_timeouts",
            "ack_holding_timeouts",
        ],
    );
    for r in &rows {
        table.push(vec![
            num(r.value),
            num(r.baseline.throughput),
            num(r.holding.throughput),
            num(r.improvement_ratio),
            r.baseline.timeout_count.to_string(),
            r.holding.timeout_count.to_string(),
        ]);
    }
    Ok((rows, table))
}
