//! Virtual-fixture corridor and sphere containment checks.
//!
//! The corridor is a tube around the path whose radius at each node is a
//! clearance fraction of the local vessel radius, interpolated linearly in
//! path distance between nodes. A sphere of radius `Rs` centered at `p` is
//! inside the corridor when its surface stays inside the tube:
//! `margin = R_corridor(s*) − d_r − Rs ≥ 0`, where `s*` is the nearest point
//! on the path and `d_r` the radial distance to it.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::path::PathSpline;

/// Absolute tolerance (in meters of path distance) of the golden-section
/// nearest-point refinement.
const GOLDEN_TOL: f64 = 1e-10;

/// (√5 − 1)/2, the golden-section interval reduction ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Corridor tube around a path: per-node radii plus the shared spline.
#[derive(Debug, Clone)]
pub struct VirtualFixture {
    spline: Arc<PathSpline>,
    corridor: Vec<f64>,
}

/// Result of one containment check.
#[derive(Debug, Clone, Copy)]
pub struct VfCheck {
    /// Path distance of the nearest point on the centerline (m).
    pub s_star: f64,
    /// Radial distance from the sphere center to the centerline (m).
    pub d_r: f64,
    /// Clearance left between the sphere surface and the corridor wall (m).
    pub margin: f64,
    /// `margin < 0`: some part of the sphere is outside the corridor.
    pub violated: bool,
}

/// Builds the corridor: radius `clearance_fraction × radii[i]` at node `i`,
/// linear in path distance between nodes. Radii must be positive and match
/// the node count; the fraction must be in `(0, 1]` so the corridor stays
/// inside the vessel wall.
pub fn fit_corridor(
    spline: Arc<PathSpline>,
    radii: &[f64],
    clearance_fraction: f64,
) -> Result<VirtualFixture> {
    let nodes = spline.knots().len();
    if radii.len() != nodes {
        return Err(Error::Geometry(format!(
            "vessel radius count {} does not match node count {nodes}",
            radii.len()
        )));
    }
    if !(clearance_fraction > 0.0 && clearance_fraction <= 1.0) {
        return Err(Error::Geometry(format!(
            "clearance fraction must be in (0, 1], got {clearance_fraction}"
        )));
    }
    for (i, &r) in radii.iter().enumerate() {
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::Geometry(format!(
                "non-positive vessel radius {r} at node {i}"
            )));
        }
    }
    let corridor = radii.iter().map(|&r| clearance_fraction * r).collect();
    Ok(VirtualFixture { spline, corridor })
}

/// Golden-section minimization of `f` on `[lo, hi]`; assumes the minimizer
/// is unique in the interval (locally true for the projection objective).
fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while d - c > GOLDEN_TOL {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Nearest point on the path to `p`, as a path distance.
///
/// Golden-section refinement of `‖eval(s) − p‖²` inside the window
/// `[s_hint − w, s_hint + w]` with `w = 5 ×` mean node spacing, clamped to
/// the domain. When the minimizer lands on a window edge that is not a
/// domain boundary, the window is re-centered there and the search repeats
/// (window walk), so a stale hint still converges to the projection.
pub fn nearest_on_path(spline: &PathSpline, p: &Vector3<f64>, s_hint: f64) -> f64 {
    let (a, b) = spline.domain();
    let w = 5.0 * spline.mean_node_spacing();
    let dist_sq = |s: f64| (spline.eval_clamped(s) - p).norm_squared();
    let edge_band = 10.0 * GOLDEN_TOL;
    let max_walks = ((b - a) / w).ceil() as usize + 2;

    let mut center = s_hint.clamp(a, b);
    let mut best = center;
    for _ in 0..max_walks {
        let lo = (center - w).max(a);
        let hi = (center + w).min(b);
        best = golden_min(&dist_sq, lo, hi);
        if best <= lo + edge_band && lo > a {
            center = lo;
        } else if best >= hi - edge_band && hi < b {
            center = hi;
        } else {
            return best;
        }
    }
    best
}

impl VirtualFixture {
    /// The path this corridor wraps.
    pub fn spline(&self) -> &Arc<PathSpline> {
        &self.spline
    }

    /// Per-node corridor radii.
    pub fn corridor(&self) -> &[f64] {
        &self.corridor
    }

    /// Corridor radius at path distance `s` (linear between nodes; `s` is
    /// clamped into the domain).
    pub fn corridor_radius(&self, s: f64) -> f64 {
        let knots = self.spline.knots();
        let n = knots.len();
        let s = s.clamp(knots[0], knots[n - 1]);
        let seg = match knots.binary_search_by(|k| k.partial_cmp(&s).expect("finite knots")) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
        .min(n - 2);
        let t = (s - knots[seg]) / (knots[seg + 1] - knots[seg]);
        self.corridor[seg] + t * (self.corridor[seg + 1] - self.corridor[seg])
    }

    /// Narrowest corridor radius (attained at a node, since the profile is
    /// piecewise linear).
    pub fn min_corridor_radius(&self) -> f64 {
        self.corridor.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Containment check for a sphere of radius `rs` centered at `p`,
    /// using `s_hint` to seed the nearest-point search.
    pub fn check(&self, p: &Vector3<f64>, rs: f64, s_hint: f64) -> VfCheck {
        let s_star = nearest_on_path(&self.spline, p, s_hint);
        let d_r = (p - self.spline.eval_clamped(s_star)).norm();
        let margin = self.corridor_radius(s_star) - d_r - rs;
        VfCheck {
            s_star,
            d_r,
            margin,
            violated: margin < 0.0,
        }
    }
}
