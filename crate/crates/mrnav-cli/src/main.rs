//! `mrnav` — run the closed-loop navigation simulator, audit a path's
//! geometry, or sample a flow profile, all from a TOML configuration.
//!
//! Exit codes: 0 on success (for `simulate`, a clean feasibility verdict),
//! 1 when the simulation aborts or the verdict fails, 2 for configuration
//! errors.

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mrnav::config::{Config, FlowSection};
use mrnav::control::velocity_setpoint;
use mrnav::export::{export_run, write_flow};
use mrnav::hemo::{feedforward_force, FlowKind, FlowProfile};
use mrnav::sim::{run, Scenario};

#[derive(Parser)]
#[command(
    name = "mrnav",
    version,
    about = "Closed-loop simulator for MRI-gradient navigation of a microsphere along vessel centerlines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-loop simulation and write trajectory.csv,
    /// gradients.csv, and report.json.
    Simulate(RunArgs),
    /// Audit path geometry and actuation requirements without running
    /// the dynamics.
    CheckPath(RunArgs),
    /// Sample the selected flow profile into flow.csv (five cardiac
    /// periods at 1 kHz).
    Flows(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FlowArg {
    Constant,
    Normal,
    Fast,
}

impl From<FlowArg> for FlowKind {
    fn from(f: FlowArg) -> Self {
        match f {
            FlowArg::Constant => FlowKind::Constant,
            FlowArg::Normal => FlowKind::Normal,
            FlowArg::Fast => FlowKind::Fast,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (required for simulate and check-path).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override the sampling period sim.tp_s, given in milliseconds.
    #[arg(long, value_name = "MS")]
    tp_ms: Option<f64>,
    /// Override the flow regime flow.kind.
    #[arg(long, value_enum)]
    flow: Option<FlowArg>,
    /// Override the output directory output.dir.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::CheckPath(args) => cmd_check_path(&args),
        Command::Flows(args) => cmd_flows(&args),
    }
}

fn fail(code: u8, msg: impl Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

/// Loads the configuration and applies the command-line overrides,
/// re-validating the result.
fn load_config(args: &RunArgs) -> Result<Config, String> {
    let path = args
        .config
        .as_deref()
        .ok_or("--config <FILE> is required")?;
    let mut cfg = Config::load(path).map_err(|e| e.to_string())?;
    if let Some(ms) = args.tp_ms {
        cfg.sim.tp_s = ms / 1000.0;
    }
    if let Some(f) = args.flow {
        cfg.flow.kind = f.into();
    }
    if let Some(d) = &args.out_dir {
        cfg.output.dir = d.display().to_string();
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn cmd_simulate(args: &RunArgs) -> ExitCode {
    let cfg = match load_config(args) {
        Ok(c) => c,
        Err(e) => return fail(2, e),
    };
    let scenario = match Scenario::from_config(&cfg) {
        Ok(s) => s,
        Err(e) => return fail(2, e),
    };
    let log = match run(&scenario) {
        Ok(l) => l,
        Err(e) => return fail(1, e),
    };
    let out_dir = PathBuf::from(&cfg.output.dir);
    let report = match export_run(&log, &scenario.limits, &cfg, &out_dir) {
        Ok(r) => r,
        Err(e) => return fail(1, e),
    };

    let f = &report.feasibility;
    println!(
        "run: {} at t = {:.4} s, s = {:.6} m of {:.6} m",
        if log.completed {
            "arrived"
        } else if log.aborted_on_violation {
            "aborted"
        } else {
            "timed out"
        },
        log.end_time,
        log.end_path_distance,
        scenario.spline.length()
    );
    println!(
        "gradients: max |G| = [{:.4}, {:.4}, {:.4}] T/m, max slew = [{:.2}, {:.2}, {:.2}] T/m/s, clamped = {}",
        f.max_gradient_t_per_m[0],
        f.max_gradient_t_per_m[1],
        f.max_gradient_t_per_m[2],
        f.max_slew_t_per_m_per_s[0],
        f.max_slew_t_per_m_per_s[1],
        f.max_slew_t_per_m_per_s[2],
        f.clamped_count
    );
    println!(
        "corridor: {} violations, worst margin = {} m, max radial error = {} m",
        f.vf_violation_count,
        f.worst_vf_margin_m.map_or("n/a".into(), |m| format!("{m:.6}")),
        f.max_tracking_error_m.map_or("n/a".into(), |m| format!("{m:.6}"))
    );
    println!(
        "mean control step: {:.4} ms; artifacts in {}",
        report.mean_control_step_s * 1e3,
        out_dir.display()
    );
    println!("verdict: {}", if f.pass { "PASS" } else { "FAIL" });

    if log.aborted_on_violation {
        return fail(
            1,
            format!(
                "corridor violation at t = {:.4} s (s = {:.6} m); run aborted",
                log.end_time, log.end_path_distance
            ),
        );
    }
    if f.pass {
        ExitCode::SUCCESS
    } else {
        fail(1, "feasibility verdict failed")
    }
}

fn cmd_check_path(args: &RunArgs) -> ExitCode {
    let cfg = match load_config(args) {
        Ok(c) => c,
        Err(e) => return fail(2, e),
    };
    let scenario = match Scenario::from_config(&cfg) {
        Ok(s) => s,
        Err(e) => return fail(2, e),
    };
    let spline = &*scenario.spline;
    let vf = &scenario.vf;
    let plan = &scenario.plan;
    let rs = scenario.sphere.radius;
    let (a, b) = spline.domain();

    // Dense geometry sweep: ten probes per segment plus both ends.
    let n = spline.segment_count() * 10;
    let mut k_max = f64::NEG_INFINITY;
    let mut k_max_s = a;
    let mut v_lo = f64::INFINITY;
    let mut v_hi = f64::NEG_INFINITY;
    let mut floor_engaged_at: Option<f64> = None;
    let mut too_narrow_at: Option<f64> = None;
    for i in 0..=n {
        let s = a + (b - a) * i as f64 / n as f64;
        let k = match spline.curvature(s) {
            Ok(c) => c.k,
            Err(e) => return fail(1, format!("geometry failure at s = {s:.6}: {e}")),
        };
        if k > k_max {
            k_max = k;
            k_max_s = s;
        }
        let r_gc = vf.corridor_radius(s);
        if r_gc < rs && too_narrow_at.is_none() {
            too_narrow_at = Some(s);
        }
        let raw = plan.v0 / (1.0 + k / plan.k0) + (rs - r_gc) / plan.r0;
        if raw < plan.v_min && floor_engaged_at.is_none() {
            floor_engaged_at = Some(s);
        }
        let v = velocity_setpoint(plan, k, rs, r_gc);
        v_lo = v_lo.min(v);
        v_hi = v_hi.max(v);
    }

    let min_corridor = vf.min_corridor_radius();
    let required_g =
        feedforward_force(&scenario.drag, scenario.flow.peak_velocity()) / scenario.sphere.moment();
    let g_max = scenario.limits.g_max;

    println!("path: length = {:.6} m, {} segments", b - a, spline.segment_count());
    println!("max curvature: {k_max:.3} 1/m at s = {k_max_s:.6} m");
    println!(
        "corridor: min radius = {:.6} m vs sphere radius {:.6} m",
        min_corridor, rs
    );
    println!("velocity setpoint range: [{v_lo:.6}, {v_hi:.6}] m/s");
    if let Some(s) = floor_engaged_at {
        println!(
            "warning: velocity floor ({} m/s) engages at s = {s:.6} m",
            plan.v_min
        );
    }
    println!(
        "required gradient at peak flow: {:.6} T/m vs limit {:.6} T/m",
        required_g, g_max
    );

    if let Some(s) = too_narrow_at {
        let p = spline.eval(s).expect("in-domain");
        return fail(
            1,
            format!(
                "corridor narrower than the sphere at s = {s:.6} m (point [{:.6}, {:.6}, {:.6}])",
                p.x, p.y, p.z
            ),
        );
    }
    if required_g > g_max {
        return fail(
            1,
            format!("required gradient {required_g:.6} T/m exceeds the {g_max:.6} T/m limit"),
        );
    }
    println!("verdict: PASS");
    ExitCode::SUCCESS
}

fn cmd_flows(args: &RunArgs) -> ExitCode {
    // A config is optional here: without one the defaults describe a
    // 1 ml/s flow in a 2 mm vessel.
    let (flow_cfg, cfg_out_dir, default_radius) = match &args.config {
        Some(path) => match Config::load(path) {
            Ok(c) => (c.flow.clone(), c.output.dir.clone(), c.path.default_radius_m),
            Err(e) => return fail(2, e),
        },
        None => (FlowSection::default(), "out".to_string(), None),
    };
    let kind = args.flow.map_or(flow_cfg.kind, Into::into);
    let area = flow_cfg
        .area_m2
        .or(default_radius.map(|r| std::f64::consts::PI * r * r))
        .unwrap_or(std::f64::consts::PI * 4.0e-6);
    let hr = flow_cfg.hr_bpm.unwrap_or_else(|| kind.default_heart_rate_bpm());
    let flow = match FlowProfile::new(kind, flow_cfg.q0_ml_s * 1.0e-6, flow_cfg.alpha, hr, area) {
        Ok(f) => f,
        Err(e) => return fail(2, e),
    };

    let out_dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg_out_dir));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(1, format!("cannot create {}: {e}", out_dir.display()));
    }
    let path = out_dir.join("flow.csv");
    let duration = 5.0 * flow.period().unwrap_or(1.0);
    let file = match std::fs::File::create(&path) {
        Ok(f) => f,
        Err(e) => return fail(1, format!("cannot create {}: {e}", path.display())),
    };
    let mut w = std::io::BufWriter::new(file);
    if let Err(e) = write_flow(&mut w, &flow, duration, 1000.0) {
        return fail(1, e);
    }
    if let Err(e) = std::io::Write::flush(&mut w) {
        return fail(1, format!("cannot finish {}: {e}", path.display()));
    }
    println!(
        "wrote {} ({duration} s of {kind:?} flow at 1 kHz, mean velocity {:.6} m/s)",
        path.display(),
        flow.mean_velocity()
    );
    ExitCode::SUCCESS
}
