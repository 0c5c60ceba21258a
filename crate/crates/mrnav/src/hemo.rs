//! Blood-flow profiles and the drag / feedforward force model.
//!
//! Three flow regimes are modeled: constant, normal heart rate, and fast
//! heart rate. Pulsatile velocity is a rectified-sine systolic surrogate,
//! normalized so its time average equals the constant-flow velocity
//! `V̄ = Q₀ / A_v` and stays positive for pulsatility amplitudes below 1.
//!
//! Drag is linear in the relative speed between blood and sphere,
//! `F = ½·C_d·ρ·A·(V_blood − V_sphere)`, signed so it pushes the sphere
//! toward the blood velocity; a quadratic variant is available behind the
//! `quadratic` flag. The feedforward force is the drag on a held sphere,
//! `FF = ½·C_d·ρ·A·V`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flow regime selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    /// Steady flow at `Q₀ / A_v`.
    Constant,
    /// Pulsatile at a resting heart rate (default 60 beats/min).
    Normal,
    /// Pulsatile at an elevated heart rate (default 120 beats/min).
    Fast,
}

impl FlowKind {
    /// Heart rate assumed when the configuration does not set one.
    pub fn default_heart_rate_bpm(self) -> f64 {
        match self {
            FlowKind::Constant | FlowKind::Normal => 60.0,
            FlowKind::Fast => 120.0,
        }
    }
}

/// Time-varying blood velocity model.
#[derive(Debug, Clone)]
pub struct FlowProfile {
    pub kind: FlowKind,
    /// Base volumetric flow (m³/s).
    pub q0: f64,
    /// Pulsatility amplitude fraction, `0 ≤ α < 1`.
    pub alpha: f64,
    /// Heart rate (beats/min); ignored by the constant regime.
    pub hr_bpm: f64,
    /// Vessel cross-section area (m²).
    pub area: f64,
}

/// Zero-mean cardiac pulse shape: a rectified-sine systolic burst scaled so
/// its average over a cycle vanishes (`⟨max(0, sin θ)²⟩ = ¼`). Range is
/// `[−1, 3]`, so `V̄·(1 + α·w)` keeps its time average at `V̄` and stays
/// positive for `α < 1`.
fn cardiac_waveform(theta: f64) -> f64 {
    let s = theta.sin().max(0.0);
    4.0 * s * s - 1.0
}

impl FlowProfile {
    /// Validates the invariants: `q0 > 0`, `0 ≤ alpha < 1`, `hr_bpm > 0`,
    /// `area > 0`.
    pub fn new(kind: FlowKind, q0: f64, alpha: f64, hr_bpm: f64, area: f64) -> Result<Self> {
        if q0 <= 0.0 || !q0.is_finite() {
            return Err(Error::Config(format!(
                "flow volumetric rate must be > 0, got {q0}"
            )));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Config(format!(
                "flow pulsatility amplitude must be in [0, 1), got {alpha}"
            )));
        }
        if hr_bpm <= 0.0 || !hr_bpm.is_finite() {
            return Err(Error::Config(format!(
                "heart rate must be > 0 beats/min, got {hr_bpm}"
            )));
        }
        if area <= 0.0 || !area.is_finite() {
            return Err(Error::Config(format!(
                "vessel cross-section area must be > 0, got {area}"
            )));
        }
        Ok(Self {
            kind,
            q0,
            alpha,
            hr_bpm,
            area,
        })
    }

    /// Time-averaged velocity `V̄ = Q₀ / A_v` (m/s).
    pub fn mean_velocity(&self) -> f64 {
        self.q0 / self.area
    }

    /// Cardiac period in seconds for pulsatile regimes, `None` for constant.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            FlowKind::Constant => None,
            FlowKind::Normal | FlowKind::Fast => Some(60.0 / self.hr_bpm),
        }
    }

    /// Signed blood speed along the local path tangent at time `t`.
    pub fn blood_velocity(&self, t: f64) -> f64 {
        let v_mean = self.mean_velocity();
        match self.kind {
            FlowKind::Constant => v_mean,
            FlowKind::Normal | FlowKind::Fast => {
                let theta = 2.0 * std::f64::consts::PI * self.hr_bpm * t / 60.0;
                v_mean * (1.0 + self.alpha * cardiac_waveform(theta))
            }
        }
    }

    /// Largest speed the profile attains: `V̄` for constant flow,
    /// `V̄·(1 + 3α)` at the systolic peak otherwise.
    pub fn peak_velocity(&self) -> f64 {
        match self.kind {
            FlowKind::Constant => self.mean_velocity(),
            FlowKind::Normal | FlowKind::Fast => self.mean_velocity() * (1.0 + 3.0 * self.alpha),
        }
    }
}

/// Constants of the linear drag law.
#[derive(Debug, Clone)]
pub struct DragParams {
    /// Drag coefficient (dimensionless).
    pub cd: f64,
    /// Blood density (kg/m³).
    pub density: f64,
    /// Sphere frontal (reference) area `π·Rs²` (m²).
    pub area_re: f64,
    /// Use the conventional quadratic law `½·C_d·ρ·A·ΔV·|ΔV|` instead of
    /// the linear-in-`ΔV` form.
    pub quadratic: bool,
}

impl DragParams {
    /// Validates that all physical constants are positive.
    pub fn new(cd: f64, density: f64, area_re: f64, quadratic: bool) -> Result<Self> {
        for (name, v) in [
            ("drag coefficient", cd),
            ("blood density", density),
            ("reference area", area_re),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            cd,
            density,
            area_re,
            quadratic,
        })
    }

    /// Linear drag gain `½·C_d·ρ·A` (N·s/m).
    pub fn k_drag(&self) -> f64 {
        0.5 * self.cd * self.density * self.area_re
    }

    /// Vector drag force on the sphere for given blood and sphere
    /// velocities; vanishes exactly when they are equal.
    pub fn force_vector(&self, v_blood: &Vector3<f64>, v_sphere: &Vector3<f64>) -> Vector3<f64> {
        let rel = v_blood - v_sphere;
        if self.quadratic {
            rel * (self.k_drag() * rel.norm())
        } else {
            rel * self.k_drag()
        }
    }
}

/// Signed scalar drag force along the flow axis: positive when the blood
/// moves faster than the sphere (the flow pushes it forward).
pub fn drag_force(d: &DragParams, v_blood: f64, v_sphere: f64) -> f64 {
    let rel = v_blood - v_sphere;
    if d.quadratic {
        d.k_drag() * rel * rel.abs()
    } else {
        d.k_drag() * rel
    }
}

/// Feedforward force magnitude compensating the drag a held sphere would
/// feel at blood speed `v`; identical to `drag_force(d, v, 0)` for the
/// linear law.
pub fn feedforward_force(d: &DragParams, v: f64) -> f64 {
    if d.quadratic {
        d.k_drag() * v * v.abs()
    } else {
        d.k_drag() * v
    }
}
