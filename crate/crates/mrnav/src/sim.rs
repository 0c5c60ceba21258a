//! Closed-loop simulation: a fixed-step semi-implicit Euler integration of
//! the sphere dynamics under two asynchronous clocks — a sampling clock
//! that measures the state and checks the corridor every `Tp`, and a
//! gradient clock that recomputes the command every `gradient_interval`
//! from the most recent sample. Commands are held (zero-order) between
//! updates.
//!
//! Time is an integer step count times `dt`; nothing accumulates floating
//! drift, so identical scenarios produce bit-identical logs.

use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::control::{
    gradient_command, magnetic_force, velocity_error, velocity_setpoint, ControllerState,
    GradientCommand, SphereParams, VelocityPlan,
};
use crate::error::{Error, Result};
use crate::hemo::{feedforward_force, DragParams, FlowProfile};
use crate::path::{build_spline, load_centerline, PathSpline};
use crate::safety::SafetyLimits;
use crate::vfix::{fit_corridor, nearest_on_path, VirtualFixture};

/// What to do when a corridor check finds the sphere outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationPolicy {
    /// Stop the run at the violating sample.
    #[default]
    Abort,
    /// Record the violation and keep going.
    Continue,
}

/// Clocks, duration, and stop conditions in resolved (SI) units.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Sampling/corridor-check period (s), an integer multiple of `dt`.
    pub tp: f64,
    /// Gradient update period (s), an integer multiple of `dt`.
    pub gradient_interval: f64,
    /// Wall duration of the run (s) unless the end is reached first.
    pub duration: f64,
    /// Arc-length distance from the final waypoint that counts as arrival
    /// (m).
    pub end_tolerance: f64,
    pub violation_policy: ViolationPolicy,
    /// Starting arc length (m).
    pub initial_path_distance: f64,
    /// Starting offset from the centerline point (m).
    pub initial_offset: Vector3<f64>,
}

/// Regulator configuration in resolved units.
#[derive(Debug, Clone)]
pub struct ControlSettings {
    /// When false the run emits zero gradients and the sphere drifts under
    /// flow alone.
    pub enabled: bool,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub kr: f64,
    /// Integral/derivative scaling speed (m/s).
    pub delta: f64,
    /// Clamp the integral accumulator at `Moment_s · G_max`.
    pub pi_clamp: bool,
}

/// Everything a run needs, assembled once from a [`Config`].
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spline: Arc<PathSpline>,
    pub vf: VirtualFixture,
    pub flow: FlowProfile,
    pub drag: DragParams,
    pub sphere: SphereParams,
    pub plan: VelocityPlan,
    pub limits: SafetyLimits,
    pub control: ControlSettings,
    pub sim: SimConfig,
    /// Limit each commanded gradient step to the slew budget
    /// `S_max·T_r/R_iso` per axis.
    pub rate_limit: bool,
}

impl Scenario {
    /// Loads the centerline, fits the corridor, and resolves every
    /// subsystem from a validated configuration.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let file = cfg.resolved_path_file();
        let reader = File::open(&file).map_err(|e| {
            Error::Config(format!("path.file: cannot open {}: {e}", file.display()))
        })?;
        let (centerline, radii) = load_centerline(BufReader::new(reader))?;
        let radii = match radii {
            Some(r) => r,
            None => {
                let r = cfg.path.default_radius_m.ok_or_else(|| {
                    Error::Config(
                        "path.default_radius_m is required when the centerline file has no r column"
                            .into(),
                    )
                })?;
                vec![r; centerline.len()]
            }
        };
        let spline = Arc::new(build_spline(&centerline));
        let vf = fit_corridor(Arc::clone(&spline), &radii, cfg.fixture.clearance_fraction)?;

        let area = cfg
            .flow
            .area_m2
            .unwrap_or_else(|| std::f64::consts::PI * radii[0] * radii[0]);
        let hr = cfg
            .flow
            .hr_bpm
            .unwrap_or_else(|| cfg.flow.kind.default_heart_rate_bpm());
        let flow = FlowProfile::new(
            cfg.flow.kind,
            cfg.flow.q0_ml_s * 1.0e-6,
            cfg.flow.alpha,
            hr,
            area,
        )?;

        let sphere = SphereParams::new(
            cfg.sphere.radius_m,
            cfg.sphere.magnetization_a_per_m,
            cfg.sphere.density_kg_per_m3,
        )?;
        let drag = DragParams::new(
            cfg.drag.cd,
            cfg.drag.blood_density_kg_per_m3,
            sphere.frontal_area(),
            cfg.drag.quadratic,
        )?;
        let plan = VelocityPlan::new(
            cfg.controller.v0_m_per_s,
            cfg.controller.k0_per_m,
            cfg.controller.r0_m,
            cfg.controller.v_min_m_per_s,
        )?;
        let limits = SafetyLimits::new(
            cfg.safety.s_max,
            cfg.safety.g_max_t_per_m,
            cfg.safety.t_r_s,
            cfg.safety.r_iso_m,
        )?;
        let control = ControlSettings {
            enabled: cfg.controller.enabled,
            kp: cfg.controller.kp,
            ki: cfg.controller.ki,
            kd: cfg.controller.kd,
            kr: cfg.controller.kr,
            delta: cfg.controller.effective_delta(),
            pi_clamp: cfg.controller.pi_clamp,
        };

        let (a, b) = spline.domain();
        let s0 = cfg.sim.initial_path_distance_m;
        if !(s0 >= a && s0 <= b) {
            return Err(Error::Config(format!(
                "sim.initial_path_distance_m ({s0}) is outside the path domain [{a}, {b}]"
            )));
        }
        let o = cfg.sim.initial_offset_m;
        let sim = SimConfig {
            dt: cfg.sim.dt_s,
            tp: cfg.sim.tp_s,
            gradient_interval: cfg.sim.gradient_interval_s,
            duration: cfg.sim.duration_s,
            end_tolerance: cfg.sim.end_tolerance_m,
            violation_policy: cfg.sim.violation_policy,
            initial_path_distance: s0,
            initial_offset: Vector3::new(o[0], o[1], o[2]),
        };

        Ok(Self {
            spline,
            vf,
            flow,
            drag,
            sphere,
            plan,
            limits,
            control,
            sim,
            rate_limit: cfg.safety.rate_limit,
        })
    }
}

/// Instantaneous integration state.
#[derive(Debug, Clone)]
pub struct SimState {
    /// Simulation time (s); always `step · dt`.
    pub t: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Most recent projection onto the path (m of arc length); doubles as
    /// the next projection's search hint.
    pub s_star: f64,
    /// Command currently held by the zero-order hold.
    pub last_command: Option<GradientCommand>,
}

/// One logged state sample (taken on the sampling clock and at the final
/// step).
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Arc length of the nearest centerline point (m).
    pub s: f64,
}

/// Everything a run produces. `samples` and `vf_checks` are in lockstep:
/// entry `i` of each describes the same instant.
#[derive(Debug, Clone, Default)]
pub struct SimLog {
    pub samples: Vec<Sample>,
    pub commands: Vec<GradientCommand>,
    pub vf_checks: Vec<crate::vfix::VfCheck>,
    /// Wall-clock cost (s) of each control/sampling step.
    pub control_step_times: Vec<f64>,
    /// True when the sphere reached the end of the path.
    pub completed: bool,
    /// True when the run stopped because a corridor check failed under the
    /// abort policy.
    pub aborted_on_violation: bool,
    /// Simulation time at the stop (s).
    pub end_time: f64,
    /// Arc length at the stop (m).
    pub end_path_distance: f64,
}

impl SimLog {
    /// Mean wall-clock cost of the control/sampling steps (s); zero when
    /// none ran.
    pub fn mean_control_step(&self) -> f64 {
        if self.control_step_times.is_empty() {
            return 0.0;
        }
        self.control_step_times.iter().sum::<f64>() / self.control_step_times.len() as f64
    }
}

/// Advances the state by one `dt` under a held magnetic force and the
/// local blood velocity: semi-implicit Euler (velocity first, then
/// position with the new velocity). Fails on a non-finite force or state.
pub fn step_dynamics(
    state: &mut SimState,
    f_mag: &Vector3<f64>,
    v_blood: &Vector3<f64>,
    drag: &DragParams,
    sphere: &SphereParams,
    dt: f64,
) -> Result<()> {
    let f_total = f_mag + drag.force_vector(v_blood, &state.velocity);
    if !f_total.iter().all(|c| c.is_finite()) {
        return Err(Error::NumericalBlowup {
            t: state.t,
            msg: "non-finite force".into(),
        });
    }
    state.velocity += f_total * (dt / sphere.mass());
    state.position += state.velocity * dt;
    state.t += dt;
    if !state.velocity.iter().all(|c| c.is_finite())
        || !state.position.iter().all(|c| c.is_finite())
    {
        return Err(Error::NumericalBlowup {
            t: state.t,
            msg: "non-finite state".into(),
        });
    }
    Ok(())
}

/// Where the sphere should be one sampling period from now, and how fast
/// it should be moving there.
///
/// The local speed plan is evaluated at the current projection `s_star`,
/// the setpoint is placed `v·Tp` further along the path, and the velocity
/// setpoint is the plan speed at that point directed along the path
/// tangent. Past the end of the path the position setpoint clamps to the
/// final waypoint and the velocity setpoint drops to zero so the sphere
/// decelerates into the target.
pub fn setpoint_advance(
    vf: &VirtualFixture,
    plan: &VelocityPlan,
    sphere_radius: f64,
    s_star: f64,
    tp: f64,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let spline = vf.spline();
    let (_, b) = spline.domain();
    let k_here = spline.curvature(s_star)?.k;
    let v_here = velocity_setpoint(plan, k_here, sphere_radius, vf.corridor_radius(s_star));
    let s_target = s_star + v_here * tp;
    if s_target >= b {
        Ok((spline.eval(b)?, Vector3::zeros()))
    } else {
        let k_there = spline.curvature(s_target)?.k;
        let v_there = velocity_setpoint(plan, k_there, sphere_radius, vf.corridor_radius(s_target));
        let tangent = spline.tangent(s_target)?;
        Ok((spline.eval(s_target)?, tangent * v_there))
    }
}

/// Runs the closed loop to arrival, abort, or the duration limit.
///
/// Per integration step: project the sphere onto the path (warm-started
/// from the previous projection), test the stop conditions, then fire
/// whichever clocks are due — the sampling clock logs the state, checks
/// the corridor, and latches the sample the controller sees; the gradient
/// clock turns the latched sample into the next held command. Finally the
/// dynamics advance by `dt`.
pub fn run(scenario: &Scenario) -> Result<SimLog> {
    let sim = &scenario.sim;
    let spline = &*scenario.spline;
    let (a, b) = spline.domain();
    let n_steps = (sim.duration / sim.dt).round() as u64;
    let n_tp = (sim.tp / sim.dt).round().max(1.0) as u64;
    let n_grad = (sim.gradient_interval / sim.dt).round().max(1.0) as u64;

    let s0 = sim.initial_path_distance.clamp(a, b);
    // The sphere starts carried by the flow: blood-speed velocity along
    // the local tangent.
    let mut state = SimState {
        t: 0.0,
        position: spline.eval(s0)? + sim.initial_offset,
        velocity: spline.tangent(s0)? * scenario.flow.blood_velocity(0.0),
        s_star: s0,
        last_command: None,
    };

    let pi_max = scenario
        .control
        .pi_clamp
        .then(|| scenario.sphere.moment() * scenario.limits.g_max);
    let mut controller = ControllerState::new(
        scenario.control.kp,
        scenario.control.ki,
        scenario.control.kd,
        scenario.control.kr,
        scenario.control.delta,
        pi_max,
    )?;

    let mut log = SimLog::default();
    // The sample the gradient clock acts on, latched by the sampling
    // clock (both clocks fire at step 0, so this is always initialized
    // before first use).
    let (mut held_p, mut held_v, mut held_s) = (state.position, state.velocity, s0);
    let mut force = Vector3::zeros();
    let max_step_g = scenario.limits.s_max * scenario.limits.t_r / scenario.limits.r_iso;

    let mut step: u64 = 0;
    loop {
        let t = step as f64 * sim.dt;
        state.t = t;
        let s_star = nearest_on_path(spline, &state.position, state.s_star);
        state.s_star = s_star;

        let arrived = s_star >= b - sim.end_tolerance;
        if arrived || step >= n_steps {
            let chk = scenario
                .vf
                .check(&state.position, scenario.sphere.radius, s_star);
            log.samples.push(Sample {
                t,
                position: state.position,
                velocity: state.velocity,
                s: chk.s_star,
            });
            log.vf_checks.push(chk);
            log.completed = arrived;
            log.end_time = t;
            log.end_path_distance = chk.s_star;
            break;
        }

        let tp_fire = step.is_multiple_of(n_tp);
        let grad_fire = step.is_multiple_of(n_grad);
        let mut abort_now = false;
        if tp_fire || grad_fire {
            let clock = Instant::now();
            if tp_fire {
                let chk = scenario
                    .vf
                    .check(&state.position, scenario.sphere.radius, s_star);
                log.samples.push(Sample {
                    t,
                    position: state.position,
                    velocity: state.velocity,
                    s: chk.s_star,
                });
                held_p = state.position;
                held_v = state.velocity;
                held_s = chk.s_star;
                let violated = chk.violated;
                log.vf_checks.push(chk);
                if violated && sim.violation_policy == ViolationPolicy::Abort {
                    abort_now = true;
                }
            }
            if grad_fire && !abort_now {
                let cmd = if scenario.control.enabled {
                    let (p_s, v_s) = setpoint_advance(
                        &scenario.vf,
                        &scenario.plan,
                        scenario.sphere.radius,
                        held_s,
                        sim.tp,
                    )?;
                    let err = velocity_error(&held_v, &v_s, &held_p, &p_s, scenario.control.kr);
                    let (pf, pi, pd) = controller.pid_step(&err);
                    let ff = spline.tangent(held_s)?
                        * feedforward_force(&scenario.drag, scenario.flow.blood_velocity(t));
                    let mut cmd = gradient_command(
                        &scenario.sphere,
                        &pf,
                        &pi,
                        &pd,
                        &ff,
                        scenario.limits.g_max,
                        t,
                    );
                    if scenario.rate_limit {
                        let prev = state.last_command.map_or_else(Vector3::zeros, |c| c.g);
                        cmd.g = prev + (cmd.g - prev).map(|d| d.clamp(-max_step_g, max_step_g));
                    }
                    cmd
                } else {
                    GradientCommand {
                        t,
                        g: Vector3::zeros(),
                        clamped: false,
                    }
                };
                log.commands.push(cmd);
                state.last_command = Some(cmd);
                force = magnetic_force(&scenario.sphere, &cmd.g);
            }
            log.control_step_times.push(clock.elapsed().as_secs_f64());
        }
        if abort_now {
            log.aborted_on_violation = true;
            log.end_time = t;
            log.end_path_distance = s_star;
            break;
        }

        let v_blood = spline.tangent(s_star)? * scenario.flow.blood_velocity(t);
        step_dynamics(
            &mut state,
            &force,
            &v_blood,
            &scenario.drag,
            &scenario.sphere,
            sim.dt,
        )?;
        step += 1;
    }
    Ok(log)
}
