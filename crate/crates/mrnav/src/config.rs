//! Run configuration: a TOML file with one section per subsystem. Every
//! field except the centerline path has a default, unknown keys are
//! rejected, and validation names the offending field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hemo::FlowKind;
use crate::sim::ViolationPolicy;

fn d_true() -> bool {
    true
}

/// Where the centerline comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    /// Centerline CSV, absolute or relative to the config file's
    /// directory.
    pub file: String,
    /// Vessel radius (m) applied at every waypoint when the CSV carries no
    /// `r` column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_radius_m: Option<f64>,
}

/// Sphere geometry and material.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphereSection {
    pub radius_m: f64,
    pub magnetization_a_per_m: f64,
    pub density_kg_per_m3: f64,
}

impl Default for SphereSection {
    fn default() -> Self {
        Self {
            radius_m: 3.0e-4,
            magnetization_a_per_m: 1.9496e6,
            density_kg_per_m3: 8120.0,
        }
    }
}

/// Hydrodynamic drag model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DragSection {
    pub cd: f64,
    pub blood_density_kg_per_m3: f64,
    /// Use the |Δv|·Δv (quadratic) law instead of the linear one.
    pub quadratic: bool,
}

impl Default for DragSection {
    fn default() -> Self {
        Self {
            cd: 0.47,
            blood_density_kg_per_m3: 1025.0,
            quadratic: false,
        }
    }
}

/// Blood-flow profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub kind: FlowKind,
    /// Mean volumetric flow (ml/s).
    pub q0_ml_s: f64,
    /// Pulsatility amplitude (dimensionless).
    pub alpha: f64,
    /// Heart rate (beats/min); defaults per kind when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hr_bpm: Option<f64>,
    /// Vessel cross-section (m²); defaults to the inlet cross-section when
    /// omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_m2: Option<f64>,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            kind: FlowKind::Constant,
            q0_ml_s: 1.0,
            alpha: 0.8,
            hr_bpm: None,
            area_m2: None,
        }
    }
}

/// Regulator gains and velocity plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    /// Disable to watch the sphere drift under flow alone.
    #[serde(default = "d_true")]
    pub enabled: bool,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub kr: f64,
    /// Integral/derivative scaling speed (m/s); defaults to
    /// `v0_m_per_s` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_m_per_s: Option<f64>,
    pub v0_m_per_s: f64,
    pub k0_per_m: f64,
    pub r0_m: f64,
    pub v_min_m_per_s: f64,
    /// Clamp the integral accumulator at the force the peak gradient can
    /// exert.
    pub pi_clamp: bool,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            enabled: true,
            kp: 2.7e-5,
            ki: 6.8e-4,
            kd: 0.0,
            kr: 2.0,
            delta_m_per_s: None,
            v0_m_per_s: 0.05,
            k0_per_m: 50.0,
            r0_m: 0.1,
            v_min_m_per_s: 0.0,
            pi_clamp: true,
        }
    }
}

impl ControllerSection {
    /// The integral/derivative scaling speed actually used.
    pub fn effective_delta(&self) -> f64 {
        self.delta_m_per_s.unwrap_or(self.v0_m_per_s)
    }
}

/// Virtual-fixture corridor sizing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureSection {
    /// Corridor radius as a fraction of the local vessel radius, in
    /// (0, 1].
    pub clearance_fraction: f64,
}

impl Default for FixtureSection {
    fn default() -> Self {
        Self {
            clearance_fraction: 0.8,
        }
    }
}

/// Scanner actuation limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetySection {
    pub g_max_t_per_m: f64,
    /// Peak slew rate (T/m/s).
    pub s_max: f64,
    pub t_r_s: f64,
    pub r_iso_m: f64,
    /// Limit each commanded gradient step to what the slew budget allows.
    pub rate_limit: bool,
}

impl Default for SafetySection {
    fn default() -> Self {
        Self {
            g_max_t_per_m: 0.04,
            s_max: 200.0,
            t_r_s: 1.0e-3,
            r_iso_m: 0.5,
            rate_limit: false,
        }
    }
}

/// Clocks, duration, and stop conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    /// Integration step (s).
    pub dt_s: f64,
    /// Sampling/corridor-check period (s); must be an integer multiple of
    /// `dt_s`.
    pub tp_s: f64,
    /// Gradient update period (s); must be an integer multiple of `dt_s`.
    pub gradient_interval_s: f64,
    pub duration_s: f64,
    /// Arc-length distance from the final waypoint that counts as arrival
    /// (m).
    pub end_tolerance_m: f64,
    pub violation_policy: ViolationPolicy,
    /// Starting arc length along the path (m).
    pub initial_path_distance_m: f64,
    /// Starting offset from the centerline point (m).
    pub initial_offset_m: [f64; 3],
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt_s: 1.0e-4,
            tp_s: 0.1,
            gradient_interval_s: 0.1,
            duration_s: 30.0,
            end_tolerance_m: 1.0e-4,
            violation_policy: ViolationPolicy::Abort,
            initial_path_distance_m: 0.0,
            initial_offset_m: [0.0; 3],
        }
    }
}

/// Where exports land.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".to_string(),
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub path: PathSection,
    #[serde(default)]
    pub sphere: SphereSection,
    #[serde(default)]
    pub drag: DragSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub fixture: FixtureSection,
    #[serde(default)]
    pub safety: SafetySection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory the config file was loaded from; relative paths resolve
    /// against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// True when `big` is a positive integer multiple of `small` to within a
/// 1e-6 relative tolerance.
fn is_integer_multiple(big: f64, small: f64) -> bool {
    if !small.is_finite() || small <= 0.0 || !big.is_finite() {
        return false;
    }
    let ratio = big / small;
    let rounded = ratio.round();
    rounded >= 1.0 && (ratio - rounded).abs() <= 1e-6 * ratio.max(1.0)
}

impl Config {
    /// Parses a TOML document and validates it. `base_dir` is left empty;
    /// use [`Config::load`] to resolve relative paths against the file's
    /// directory.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses, and validates a TOML config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Config = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    /// The centerline CSV path, resolved against the config directory when
    /// relative.
    pub fn resolved_path_file(&self) -> PathBuf {
        let p = Path::new(&self.path.file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks every field, naming the first offender as
    /// `section.field`.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
            Ok(())
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be ≥ 0, got {v}")));
            }
            Ok(())
        }

        if self.path.file.trim().is_empty() {
            return Err(Error::Config("path.file must not be empty".into()));
        }
        if let Some(r) = self.path.default_radius_m {
            positive("path.default_radius_m", r)?;
        }

        positive("sphere.radius_m", self.sphere.radius_m)?;
        positive("sphere.magnetization_a_per_m", self.sphere.magnetization_a_per_m)?;
        positive("sphere.density_kg_per_m3", self.sphere.density_kg_per_m3)?;

        positive("drag.cd", self.drag.cd)?;
        positive("drag.blood_density_kg_per_m3", self.drag.blood_density_kg_per_m3)?;

        positive("flow.q0_ml_s", self.flow.q0_ml_s)?;
        non_negative("flow.alpha", self.flow.alpha)?;
        if self.flow.alpha >= 1.0 {
            return Err(Error::Config(format!(
                "flow.alpha must be in [0, 1), got {}",
                self.flow.alpha
            )));
        }
        if let Some(hr) = self.flow.hr_bpm {
            positive("flow.hr_bpm", hr)?;
        }
        if let Some(a) = self.flow.area_m2 {
            positive("flow.area_m2", a)?;
        }

        non_negative("controller.kp", self.controller.kp)?;
        non_negative("controller.ki", self.controller.ki)?;
        non_negative("controller.kd", self.controller.kd)?;
        non_negative("controller.kr", self.controller.kr)?;
        if let Some(d) = self.controller.delta_m_per_s {
            positive("controller.delta_m_per_s", d)?;
        }
        positive("controller.v0_m_per_s", self.controller.v0_m_per_s)?;
        positive("controller.k0_per_m", self.controller.k0_per_m)?;
        positive("controller.r0_m", self.controller.r0_m)?;
        non_negative("controller.v_min_m_per_s", self.controller.v_min_m_per_s)?;

        let cf = self.fixture.clearance_fraction;
        if !(cf > 0.0 && cf <= 1.0) {
            return Err(Error::Config(format!(
                "fixture.clearance_fraction must be in (0, 1], got {cf}"
            )));
        }

        positive("safety.g_max_t_per_m", self.safety.g_max_t_per_m)?;
        positive("safety.s_max", self.safety.s_max)?;
        positive("safety.t_r_s", self.safety.t_r_s)?;
        positive("safety.r_iso_m", self.safety.r_iso_m)?;

        positive("sim.dt_s", self.sim.dt_s)?;
        positive("sim.tp_s", self.sim.tp_s)?;
        positive("sim.gradient_interval_s", self.sim.gradient_interval_s)?;
        positive("sim.duration_s", self.sim.duration_s)?;
        non_negative("sim.end_tolerance_m", self.sim.end_tolerance_m)?;
        non_negative("sim.initial_path_distance_m", self.sim.initial_path_distance_m)?;
        for (i, c) in self.sim.initial_offset_m.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Config(format!(
                    "sim.initial_offset_m[{i}] must be finite, got {c}"
                )));
            }
        }
        if !is_integer_multiple(self.sim.tp_s, self.sim.dt_s) {
            return Err(Error::Config(format!(
                "sim.tp_s ({}) must be an integer multiple of sim.dt_s ({})",
                self.sim.tp_s, self.sim.dt_s
            )));
        }
        if !is_integer_multiple(self.sim.gradient_interval_s, self.sim.dt_s) {
            return Err(Error::Config(format!(
                "sim.gradient_interval_s ({}) must be an integer multiple of sim.dt_s ({})",
                self.sim.gradient_interval_s, self.sim.dt_s
            )));
        }

        if self.output.dir.trim().is_empty() {
            return Err(Error::Config("output.dir must not be empty".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[path]\nfile = \"line.csv\"\ndefault_radius_m = 2e-3\n";

    #[test]
    fn minimal_config_gets_all_defaults() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.path.file, "line.csv");
        assert_eq!(c.sphere.radius_m, 3.0e-4);
        assert_eq!(c.sphere.magnetization_a_per_m, 1.9496e6);
        assert_eq!(c.sphere.density_kg_per_m3, 8120.0);
        assert_eq!(c.drag.cd, 0.47);
        assert_eq!(c.drag.blood_density_kg_per_m3, 1025.0);
        assert!(!c.drag.quadratic);
        assert_eq!(c.flow.kind, FlowKind::Constant);
        assert_eq!(c.flow.q0_ml_s, 1.0);
        assert_eq!(c.flow.alpha, 0.8);
        assert!(c.flow.hr_bpm.is_none());
        assert!(c.controller.enabled);
        assert_eq!(c.controller.kp, 2.7e-5);
        assert_eq!(c.controller.ki, 6.8e-4);
        assert_eq!(c.controller.kd, 0.0);
        assert_eq!(c.controller.kr, 2.0);
        assert_eq!(c.controller.effective_delta(), 0.05);
        assert_eq!(c.controller.v0_m_per_s, 0.05);
        assert_eq!(c.controller.k0_per_m, 50.0);
        assert_eq!(c.controller.r0_m, 0.1);
        assert_eq!(c.controller.v_min_m_per_s, 0.0);
        assert!(c.controller.pi_clamp);
        assert_eq!(c.fixture.clearance_fraction, 0.8);
        assert_eq!(c.safety.g_max_t_per_m, 0.04);
        assert_eq!(c.safety.s_max, 200.0);
        assert_eq!(c.safety.t_r_s, 1.0e-3);
        assert_eq!(c.safety.r_iso_m, 0.5);
        assert!(!c.safety.rate_limit);
        assert_eq!(c.sim.dt_s, 1.0e-4);
        assert_eq!(c.sim.tp_s, 0.1);
        assert_eq!(c.sim.gradient_interval_s, 0.1);
        assert_eq!(c.sim.duration_s, 30.0);
        assert_eq!(c.sim.end_tolerance_m, 1.0e-4);
        assert_eq!(c.sim.violation_policy, ViolationPolicy::Abort);
        assert_eq!(c.sim.initial_path_distance_m, 0.0);
        assert_eq!(c.sim.initial_offset_m, [0.0; 3]);
        assert_eq!(c.output.dir, "out");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = format!("{MINIMAL}\n[rocket]\nthrust = 1\n");
        assert!(Config::parse(&top).is_err());
        let nested = format!("{MINIMAL}\n[sphere]\nradius_mm = 0.3\n");
        let err = Config::parse(&nested).unwrap_err().to_string();
        assert!(err.contains("radius_mm"), "unhelpful error: {err}");
    }

    #[test]
    fn invalid_values_name_the_field() {
        let bad = format!("{MINIMAL}\n[sphere]\nradius_m = -1.0\n");
        let err = Config::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("sphere.radius_m"), "got: {err}");

        let bad = format!("{MINIMAL}\n[fixture]\nclearance_fraction = 0.0\n");
        let err = Config::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("fixture.clearance_fraction"), "got: {err}");

        let bad = format!("{MINIMAL}\n[flow]\nalpha = 1.5\n");
        let err = Config::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("flow.alpha"), "got: {err}");
    }

    #[test]
    fn violation_policy_parses_both_variants() {
        let c = Config::parse(&format!("{MINIMAL}\n[sim]\nviolation_policy = \"continue\"\n"))
            .unwrap();
        assert_eq!(c.sim.violation_policy, ViolationPolicy::Continue);
        let c = Config::parse(&format!("{MINIMAL}\n[sim]\nviolation_policy = \"abort\"\n"))
            .unwrap();
        assert_eq!(c.sim.violation_policy, ViolationPolicy::Abort);
        assert!(Config::parse(&format!("{MINIMAL}\n[sim]\nviolation_policy = \"explode\"\n"))
            .is_err());
    }

    #[test]
    fn clock_periods_must_divide_evenly() {
        let bad = format!("{MINIMAL}\n[sim]\ndt_s = 3e-4\n");
        let err = Config::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("tp_s"), "got: {err}");

        let bad = format!("{MINIMAL}\n[sim]\ngradient_interval_s = 0.10005\n");
        let err = Config::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("gradient_interval_s"), "got: {err}");

        // Coarser-but-commensurate clocks are fine.
        let ok = format!("{MINIMAL}\n[sim]\ntp_s = 0.2\ngradient_interval_s = 0.1\n");
        assert!(Config::parse(&ok).is_ok());
    }

    #[test]
    fn relative_centerline_resolves_against_config_dir() {
        let mut c = Config::parse(MINIMAL).unwrap();
        c.base_dir = PathBuf::from("/configs/run7");
        assert_eq!(
            c.resolved_path_file(),
            PathBuf::from("/configs/run7/line.csv")
        );
        c.path.file = "/abs/line.csv".to_string();
        assert_eq!(c.resolved_path_file(), PathBuf::from("/abs/line.csv"));
    }

    #[test]
    fn toml_round_trip_preserves_fields() {
        let mut c = Config::parse(MINIMAL).unwrap();
        c.flow.hr_bpm = Some(72.0);
        c.sim.tp_s = 0.2;
        let text = toml::to_string(&c).unwrap();
        let back = Config::parse(&text).unwrap();
        assert_eq!(back.flow.hr_bpm, Some(72.0));
        assert_eq!(back.sim.tp_s, 0.2);
        assert_eq!(back.sphere.radius_m, c.sphere.radius_m);
        assert_eq!(back.path.default_radius_m, Some(2e-3));
    }

    #[test]
    fn missing_path_section_is_an_error() {
        assert!(Config::parse("[sphere]\nradius_m = 3e-4\n").is_err());
    }
}
