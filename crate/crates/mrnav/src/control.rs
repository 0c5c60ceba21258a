//! Velocity planning, PID + feedforward regulation, and force-to-gradient
//! conversion.
//!
//! The plan slows the velocity setpoint in bends
//! (`V = V₀/(1 + K/K₀) + (Rs − R_corridor)/R₀`, floored at `V_min`), the
//! regulator acts on the combined velocity/position error
//! `e = (V_c − V_s) + K_r·(P_c − P_s)`, and the commanded force converts to
//! a 3-axis gradient through the sphere's magnetic moment with a
//! per-component amplitude clamp.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Physical and magnetic constants of the driven sphere.
#[derive(Debug, Clone)]
pub struct SphereParams {
    /// Sphere radius `Rs` (m).
    pub radius: f64,
    /// Saturation magnetization `M` (A/m).
    pub magnetization: f64,
    /// Material density (kg/m³).
    pub density: f64,
}

impl SphereParams {
    /// Validates that radius, magnetization, and density are positive.
    pub fn new(radius: f64, magnetization: f64, density: f64) -> Result<Self> {
        for (name, v) in [
            ("sphere radius", radius),
            ("magnetization", magnetization),
            ("sphere density", density),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            radius,
            magnetization,
            density,
        })
    }

    /// Sphere volume `(4/3)·π·Rs³` (m³).
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }

    /// Magnetic moment `M·Vol` (A·m²); converts force to gradient demand.
    pub fn moment(&self) -> f64 {
        self.magnetization * self.volume()
    }

    /// Sphere mass `ρ·Vol` (kg).
    pub fn mass(&self) -> f64 {
        self.density * self.volume()
    }

    /// Sphere frontal area `π·Rs²` (m²), the drag reference area.
    pub fn frontal_area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// Constants of the curvature-scaled velocity plan.
#[derive(Debug, Clone)]
pub struct VelocityPlan {
    /// Base speed on a straight, unconstrained stretch (m/s).
    pub v0: f64,
    /// Curvature scale (1/m): the setpoint halves at `K = K₀`.
    pub k0: f64,
    /// Radius scale (m) weighting the clearance correction.
    pub r0: f64,
    /// Floor applied to the setpoint (m/s); never command retrograde motion.
    pub v_min: f64,
}

impl VelocityPlan {
    /// Validates `v0, k0, r0 > 0` and `v_min ≥ 0`.
    pub fn new(v0: f64, k0: f64, r0: f64, v_min: f64) -> Result<Self> {
        for (name, v) in [("v0", v0), ("k0", k0), ("r0", r0)] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!(
                    "velocity plan {name} must be > 0, got {v}"
                )));
            }
        }
        if v_min < 0.0 || !v_min.is_finite() {
            return Err(Error::Config(format!(
                "velocity plan v_min must be ≥ 0, got {v_min}"
            )));
        }
        Ok(Self { v0, k0, r0, v_min })
    }
}

/// Scalar speed setpoint at curvature `k` with sphere radius `rs` and local
/// corridor radius `r_gc`: `V₀/(1 + k/K₀) + (rs − r_gc)/R₀`, floored at
/// `v_min`. Strictly decreasing in `k` until the floor engages.
pub fn velocity_setpoint(plan: &VelocityPlan, k: f64, rs: f64, r_gc: f64) -> f64 {
    let v = plan.v0 / (1.0 + k / plan.k0) + (rs - r_gc) / plan.r0;
    v.max(plan.v_min)
}

/// Combined tracking error `(V_c − V_s) + K_r·(P_c − P_s)`: the velocity
/// mismatch plus a position term pulling the sphere back to the setpoint.
pub fn velocity_error(
    v_c: &Vector3<f64>,
    v_s: &Vector3<f64>,
    p_c: &Vector3<f64>,
    p_s: &Vector3<f64>,
    k_r: f64,
) -> Vector3<f64> {
    (v_c - v_s) + (p_c - p_s) * k_r
}

/// Mutable PID state: gains, integral accumulator, previous error.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Position-mixing gain used when forming the error fed to the PID.
    pub kr: f64,
    /// Scaling divisor/multiplier ("base velocity", m/s) in the integral
    /// and derivative terms.
    pub delta: f64,
    /// Integral accumulator (N, per axis).
    pub pi: Vector3<f64>,
    /// Previous error; `None` until the first step (the first derivative
    /// term is zero by initialization).
    pub error_p: Option<Vector3<f64>>,
    /// Per-component anti-windup clamp on the accumulator; `None` disables
    /// clamping.
    pub pi_max: Option<f64>,
}

impl ControllerState {
    /// Validates `kp, ki, kd ≥ 0`, `kr ≥ 0`, `delta > 0`, and a positive
    /// clamp when one is given. The accumulator starts at zero.
    pub fn new(
        kp: f64,
        ki: f64,
        kd: f64,
        kr: f64,
        delta: f64,
        pi_max: Option<f64>,
    ) -> Result<Self> {
        for (name, v) in [("kp", kp), ("ki", ki), ("kd", kd), ("kr", kr)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("gain {name} must be ≥ 0, got {v}")));
            }
        }
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::Config(format!(
                "controller delta must be > 0, got {delta}"
            )));
        }
        if let Some(m) = pi_max {
            if m <= 0.0 || !m.is_finite() {
                return Err(Error::Config(format!(
                    "integral clamp must be > 0, got {m}"
                )));
            }
        }
        Ok(Self {
            kp,
            ki,
            kd,
            kr,
            delta,
            pi: Vector3::zeros(),
            error_p: None,
            pi_max,
        })
    }

    /// One regulator update on the error vector. Returns the proportional,
    /// integral, and derivative force terms (N):
    ///
    /// - `PF = −kp·e`
    /// - `PI ← clamp(PI − e·δ·ki)` (the returned value is the updated
    ///   accumulator)
    /// - `PD = −kd·(e − e_prev)/δ`, with `e_prev` initialized to the first
    ///   error so the first derivative kick is zero.
    pub fn pid_step(&mut self, error_v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let pf = -error_v * self.kp;
        self.pi -= error_v * (self.delta * self.ki);
        if let Some(m) = self.pi_max {
            self.pi = self.pi.map(|c| c.clamp(-m, m));
        }
        let prev = self.error_p.unwrap_or(*error_v);
        let pd = -(error_v - prev) * (self.kd / self.delta);
        self.error_p = Some(*error_v);
        (pf, self.pi, pd)
    }
}

/// One timestamped 3-axis gradient command.
#[derive(Debug, Clone, Copy)]
pub struct GradientCommand {
    /// Emission time (s).
    pub t: f64,
    /// Gradient amplitudes (T/m); `‖G‖_∞ ≤ G_max` after clamping.
    pub g: Vector3<f64>,
    /// True when any component was cut by the amplitude clamp.
    pub clamped: bool,
}

/// Converts the summed force demand to a gradient command:
/// `G = (PF + PI + PD + FF) / Moment_s`, clamped per component to
/// `±g_max` with the `clamped` flag recording whether any cut happened.
pub fn gradient_command(
    sphere: &SphereParams,
    pf: &Vector3<f64>,
    pi: &Vector3<f64>,
    pd: &Vector3<f64>,
    ff: &Vector3<f64>,
    g_max: f64,
    t: f64,
) -> GradientCommand {
    let demand = (pf + pi + pd + ff) / sphere.moment();
    let mut clamped = false;
    let g = demand.map(|c| {
        if c.abs() > g_max {
            clamped = true;
            c.clamp(-g_max, g_max)
        } else {
            c
        }
    });
    GradientCommand { t, g, clamped }
}

/// Magnetic force on the sphere under gradient `g`: `F = Moment_s·G`
/// componentwise — the exact inverse of [`gradient_command`] when no
/// clamping occurred.
pub fn magnetic_force(sphere: &SphereParams, g: &Vector3<f64>) -> Vector3<f64> {
    g * sphere.moment()
}
