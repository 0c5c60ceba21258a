//! Run artifacts: trajectory and gradient CSVs, a sampled flow CSV, and a
//! JSON report that embeds the feasibility verdict and echoes the full
//! configuration.
//!
//! Times are fixed to four decimals (the clocks are integer multiples of
//! 0.1 ms); every other float uses the shortest representation that parses
//! back to the same value.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::hemo::FlowProfile;
use crate::safety::{build_report, FeasibilityReport, SafetyLimits};
use crate::sim::SimLog;

/// Writes `t,x,y,z,vx,vy,vz,s,margin` rows, one per logged sample.
pub fn write_trajectory<W: Write>(w: &mut W, log: &SimLog) -> Result<()> {
    debug_assert_eq!(log.samples.len(), log.vf_checks.len());
    writeln!(w, "t,x,y,z,vx,vy,vz,s,margin")?;
    for (s, c) in log.samples.iter().zip(&log.vf_checks) {
        writeln!(
            w,
            "{:.4},{},{},{},{},{},{},{},{}",
            s.t,
            s.position.x,
            s.position.y,
            s.position.z,
            s.velocity.x,
            s.velocity.y,
            s.velocity.z,
            s.s,
            c.margin
        )?;
    }
    Ok(())
}

/// Writes `t,gx,gy,gz,clamped` rows, one per emitted command, with the
/// clamp flag as 0/1.
pub fn write_gradients<W: Write>(w: &mut W, log: &SimLog) -> Result<()> {
    writeln!(w, "t,gx,gy,gz,clamped")?;
    for c in &log.commands {
        writeln!(
            w,
            "{:.4},{},{},{},{}",
            c.t,
            c.g.x,
            c.g.y,
            c.g.z,
            u8::from(c.clamped)
        )?;
    }
    Ok(())
}

/// Samples the blood velocity at `sample_rate_hz` over `duration` seconds
/// (inclusive of both endpoints) and writes `t,v` rows.
pub fn write_flow<W: Write>(
    w: &mut W,
    flow: &FlowProfile,
    duration: f64,
    sample_rate_hz: f64,
) -> Result<()> {
    writeln!(w, "t,v")?;
    let n = (duration * sample_rate_hz).round() as u64;
    for i in 0..=n {
        let t = i as f64 / sample_rate_hz;
        writeln!(w, "{:.4},{}", t, flow.blood_velocity(t))?;
    }
    Ok(())
}

/// Everything `report.json` holds: the feasibility verdict (flattened),
/// run outcome, and the configuration that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub feasibility: FeasibilityReport,
    /// Mean wall-clock cost of a control/sampling step (s).
    pub mean_control_step_s: f64,
    pub completed: bool,
    pub aborted_on_violation: bool,
    pub end_time_s: f64,
    pub end_path_distance_m: f64,
    pub config: Config,
}

/// Builds the report for a finished run.
pub fn run_report(log: &SimLog, limits: &SafetyLimits, config: &Config) -> RunReport {
    RunReport {
        feasibility: build_report(log, limits),
        mean_control_step_s: log.mean_control_step(),
        completed: log.completed,
        aborted_on_violation: log.aborted_on_violation,
        end_time_s: log.end_time,
        end_path_distance_m: log.end_path_distance,
        config: config.clone(),
    }
}

/// Writes a report as pretty-printed JSON.
pub fn write_report_json<W: Write>(w: &mut W, report: &RunReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, report)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    writeln!(w)?;
    Ok(())
}

/// Writes `trajectory.csv`, `gradients.csv`, and `report.json` into
/// `out_dir` (created if absent) and returns the report.
pub fn export_run(
    log: &SimLog,
    limits: &SafetyLimits,
    config: &Config,
    out_dir: &Path,
) -> Result<RunReport> {
    fs::create_dir_all(out_dir)?;
    let mut w = BufWriter::new(File::create(out_dir.join("trajectory.csv"))?);
    write_trajectory(&mut w, log)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(out_dir.join("gradients.csv"))?);
    write_gradients(&mut w, log)?;
    w.flush()?;
    let report = run_report(log, limits, config);
    let mut w = BufWriter::new(File::create(out_dir.join("report.json"))?);
    write_report_json(&mut w, &report)?;
    w.flush()?;
    Ok(report)
}
