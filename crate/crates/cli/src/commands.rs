//! The four experiment commands. Each is deterministic given a scenario
//! and seed: reruns produce byte-identical files.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use tactile_core::classify::track_ripeness;
use tactile_core::control::{
    run_fixed_distance, run_force_threshold, GraspMode, GraspOutcome, SlipEvent,
};
use tactile_core::hardness::HardnessReport;

use crate::output::{
    runtime_err, write_json, write_trace_csv, TraceHeader, FORMAT_VERSION,
};
use crate::scenario::Scenario;
use crate::CliError;

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| runtime_err(&out.display().to_string(), e))
}

fn trace_header(scenario: &Scenario) -> TraceHeader {
    TraceHeader {
        frame_rate: scenario.sim.frame_rate,
        dims: scenario.sim.dims,
        scenario_digest: scenario.digest(),
        seed: scenario.sim.seed,
    }
}

/// Runs the scenario's configured grasp mode.
pub fn run_scenario(scenario: &Scenario) -> Result<GraspOutcome, CliError> {
    let pipe = scenario.pipeline();
    let slip = scenario.effective_slip();
    let result = match scenario.controller.mode {
        GraspMode::FixedDistance(_) => run_fixed_distance(
            &scenario.fruit,
            &scenario.sim,
            &scenario.controller,
            &pipe,
            slip,
        ),
        GraspMode::ForceThreshold(_) => run_force_threshold(
            &scenario.fruit,
            &scenario.sim,
            &scenario.controller,
            &pipe,
            slip,
        ),
    };
    result.map_err(|e| CliError::Runtime(format!("{}: {e}", scenario.fruit.name)))
}

#[derive(Serialize)]
struct OutcomeDoc<'a> {
    format_version: u32,
    seed: u64,
    scenario: String,
    outcome: &'a GraspOutcome,
}

/// Executes one grasp; writes `trace.csv` and `outcome.json`.
pub fn cmd_grasp(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let outcome = run_scenario(scenario)?;
    write_trace_csv(&out.join("trace.csv"), &outcome.trace, &trace_header(scenario))?;
    write_json(
        &out.join("outcome.json"),
        &OutcomeDoc {
            format_version: FORMAT_VERSION,
            seed: scenario.sim.seed,
            scenario: scenario.digest(),
            outcome: &outcome,
        },
    )
}

/// Runs every scenario and writes `comparison.csv` sorted by hardness,
/// hardest first.
pub fn cmd_compare(scenarios: &[Scenario], out: &Path) -> Result<(), CliError> {
    if scenarios.len() < 2 {
        return Err(CliError::Validation(format!(
            "compare needs at least 2 scenarios, got {}",
            scenarios.len()
        )));
    }
    ensure_out_dir(out)?;
    let mut rows: Vec<(String, f64, usize, f64)> = scenarios
        .par_iter()
        .map(|scenario| {
            let outcome = run_scenario(scenario)?;
            let report = outcome.report.as_ref().ok_or_else(|| {
                CliError::Runtime(format!(
                    "{}: run produced no hardness report ({:?})",
                    scenario.fruit.name, outcome.terminated_by
                ))
            })?;
            Ok((
                scenario.fruit.name.clone(),
                report.h,
                outcome.steps_taken,
                report.peak_force,
            ))
        })
        .collect::<Result<_, CliError>>()?;
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut text = String::from("name,h,steps_taken,peak_force\n");
    for (name, h, steps, peak) in rows {
        text.push_str(&format!("{name},{h},{steps},{peak}\n"));
    }
    fs::write(out.join("comparison.csv"), text)
        .map_err(|e| runtime_err(&out.display().to_string(), e))
}

#[derive(Serialize)]
struct TrendsDoc {
    format_version: u32,
    seed: u64,
    scenario: String,
    slope_trend: f64,
    peak_trend: f64,
}

/// Re-grasps the ripening fruit for every scheduled day; writes
/// `trajectory.csv` (day, h, peak_force) and `trends.json`.
pub fn cmd_ripeness(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let days = scenario.days.as_ref().ok_or_else(|| {
        CliError::Validation("days: required for the ripeness command".into())
    })?;
    if days.len() < 2 {
        return Err(CliError::Validation(format!(
            "days: need at least 2 entries, got {}",
            days.len()
        )));
    }
    ensure_out_dir(out)?;
    let reports: Vec<(f64, HardnessReport)> = days
        .par_iter()
        .map(|&day| {
            let aged = scenario
                .fruit
                .ripen(day)
                .map_err(|e| CliError::Runtime(format!("day {day}: {e}")))?;
            let daily = Scenario {
                fruit: aged,
                days: None,
                ..scenario.clone()
            };
            let outcome = run_scenario(&daily)?;
            let report = outcome.report.ok_or_else(|| {
                CliError::Runtime(format!("day {day}: run produced no hardness report"))
            })?;
            Ok((day, report))
        })
        .collect::<Result<_, CliError>>()?;
    let trajectory =
        track_ripeness(&reports).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut text = String::from("day,h,peak_force\n");
    for p in &trajectory.points {
        text.push_str(&format!("{},{},{}\n", p.day, p.h, p.peak_force));
    }
    fs::write(out.join("trajectory.csv"), text)
        .map_err(|e| runtime_err(&out.display().to_string(), e))?;
    write_json(
        &out.join("trends.json"),
        &TrendsDoc {
            format_version: FORMAT_VERSION,
            seed: scenario.sim.seed,
            scenario: scenario.digest(),
            slope_trend: trajectory.slope_trend,
            peak_trend: trajectory.peak_trend,
        },
    )
}

#[derive(Serialize)]
struct EventsDoc {
    format_version: u32,
    seed: u64,
    scenario: String,
    events: Vec<SlipEvent>,
}

/// Runs the grasp with the scheduled slip; writes `events.json` and
/// `trace.csv`.
pub fn cmd_slip(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    if scenario.slip_injection.is_none() {
        return Err(CliError::Validation(
            "slip_injection: required for the slip command".into(),
        ));
    }
    ensure_out_dir(out)?;
    let outcome = run_scenario(scenario)?;
    write_trace_csv(&out.join("trace.csv"), &outcome.trace, &trace_header(scenario))?;
    write_json(
        &out.join("events.json"),
        &EventsDoc {
            format_version: FORMAT_VERSION,
            seed: scenario.sim.seed,
            scenario: scenario.digest(),
            events: outcome.slip_events,
        },
    )
}
