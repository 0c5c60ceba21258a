//! Gradient-waveform safety audit: per-axis slew rates against the
//! scanner's limit, amplitude-clamp accounting, and the aggregate
//! feasibility report for a closed-loop run.

use nalgebra::Vector3;
use serde::Serialize;

use crate::control::GradientCommand;
use crate::error::{Error, Result};
use crate::sim::SimLog;

/// Scanner-imposed actuation limits.
#[derive(Debug, Clone)]
pub struct SafetyLimits {
    /// Peak slew rate (T/m/s) any axis may sustain.
    pub s_max: f64,
    /// Peak gradient amplitude (T/m) per axis.
    pub g_max: f64,
    /// Gradient rise time (s): the interval over which a commanded step is
    /// ramped.
    pub t_r: f64,
    /// Isocenter reference radius (m) scaling gradient steps into field
    /// steps at the bore edge.
    pub r_iso: f64,
}

impl SafetyLimits {
    /// Validates that every limit is positive.
    pub fn new(s_max: f64, g_max: f64, t_r: f64, r_iso: f64) -> Result<Self> {
        for (name, v) in [
            ("s_max", s_max),
            ("g_max", g_max),
            ("t_r", t_r),
            ("r_iso", r_iso),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!(
                    "safety limit {name} must be > 0, got {v}"
                )));
            }
        }
        Ok(Self {
            s_max,
            g_max,
            t_r,
            r_iso,
        })
    }
}

/// Per-axis slew rate demanded by stepping from `g_prev` to `g_next`:
/// `|ΔG|/T_r · R_iso` (T/m/s), i.e. the field ramp rate at radius `R_iso`
/// when the step is ramped over the rise time.
pub fn slew_rate(
    g_prev: &Vector3<f64>,
    g_next: &Vector3<f64>,
    limits: &SafetyLimits,
) -> Vector3<f64> {
    (g_next - g_prev).map(|d| d.abs() / limits.t_r * limits.r_iso)
}

/// Result of auditing a full command sequence.
#[derive(Debug, Clone)]
pub struct WaveformAudit {
    /// Per-transition slew rates, one entry per consecutive command pair.
    pub slews: Vec<Vector3<f64>>,
    /// Componentwise maximum over all transitions.
    pub max_slew: Vector3<f64>,
    /// True when every transition stays at or below the limit on every
    /// axis.
    pub compliant: bool,
}

/// Audits consecutive command transitions against the slew-rate limit.
/// Zero or one command is trivially compliant. A transition exactly at the
/// limit complies.
pub fn audit_waveform(commands: &[GradientCommand], limits: &SafetyLimits) -> WaveformAudit {
    let slews: Vec<Vector3<f64>> = commands
        .windows(2)
        .map(|w| slew_rate(&w[0].g, &w[1].g, limits))
        .collect();
    let mut max_slew = Vector3::zeros();
    for s in &slews {
        max_slew = max_slew.zip_map(s, f64::max);
    }
    let compliant = slews.iter().all(|s| s.amax() <= limits.s_max);
    WaveformAudit {
        slews,
        max_slew,
        compliant,
    }
}

/// Aggregate verdict over one closed-loop run: actuator peaks, clamp and
/// corridor-violation counts, and the pass/fail line.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    /// Componentwise peak |G| over the emitted waveform (T/m).
    pub max_gradient_t_per_m: [f64; 3],
    /// Componentwise peak slew over the emitted waveform (T/m/s).
    pub max_slew_t_per_m_per_s: [f64; 3],
    /// Number of commands cut by the amplitude clamp.
    pub clamped_count: u64,
    /// Number of corridor checks that found the sphere outside.
    pub vf_violation_count: u64,
    /// Smallest corridor margin seen (m); negative means a violation.
    /// `None` when no checks ran.
    pub worst_vf_margin_m: Option<f64>,
    /// Largest radial distance from the centerline seen (m). `None` when
    /// no checks ran.
    pub max_tracking_error_m: Option<f64>,
    /// True iff the waveform is slew-compliant, nothing was clamped, and
    /// the corridor was never violated.
    pub pass: bool,
}

/// Builds the feasibility report for a finished run.
pub fn build_report(log: &SimLog, limits: &SafetyLimits) -> FeasibilityReport {
    let audit = audit_waveform(&log.commands, limits);
    let mut max_g = Vector3::zeros();
    for c in &log.commands {
        max_g = max_g.zip_map(&c.g.abs(), f64::max);
    }
    let clamped_count = log.commands.iter().filter(|c| c.clamped).count() as u64;
    let vf_violation_count = log.vf_checks.iter().filter(|c| c.violated).count() as u64;
    let worst_vf_margin_m = log
        .vf_checks
        .iter()
        .map(|c| c.margin)
        .min_by(|a, b| a.total_cmp(b));
    let max_tracking_error_m = log
        .vf_checks
        .iter()
        .map(|c| c.d_r)
        .max_by(|a, b| a.total_cmp(b));
    let pass = audit.compliant && clamped_count == 0 && vf_violation_count == 0;
    FeasibilityReport {
        max_gradient_t_per_m: [max_g.x, max_g.y, max_g.z],
        max_slew_t_per_m_per_s: [audit.max_slew.x, audit.max_slew.y, audit.max_slew.z],
        clamped_count,
        vf_violation_count,
        worst_vf_margin_m,
        max_tracking_error_m,
        pass,
    }
}
