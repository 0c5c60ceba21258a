//! Vessel centerline ingestion and the C¹ path spline.
//!
//! A centerline is an ordered list of 3D waypoints; the path parameter is
//! cumulative chord length ("path distance"). Each coordinate axis is
//! interpolated over that parameter by a piecewise cubic Hermite polynomial
//! with Fritsch–Carlson monotone slope limiting, which interpolates every
//! node exactly, is C¹ across interior nodes, and never overshoots monotone
//! data. Position, first/second derivatives, and space-curve curvature are
//! available anywhere in the domain; the spline never extrapolates.

use std::io::BufRead;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Tangent speeds at or below this threshold (per unit path distance) make
/// the curvature formula — which divides by speed cubed — meaningless, so
/// queries there return a singular-curvature error.
pub const EPS_SPEED: f64 = 1e-9;

/// An ordered polyline of vessel-centerline waypoints with its cumulative
/// chord-length parameterization.
#[derive(Debug, Clone)]
pub struct Centerline {
    /// Waypoints in meters, in traversal order.
    pub points: Vec<Vector3<f64>>,
    /// Cumulative chord length per waypoint; starts at 0, strictly increasing.
    pub path_distance: Vec<f64>,
}

impl Centerline {
    /// Builds a centerline from waypoints, computing the chord-length
    /// parameterization and enforcing the structural invariants: at least
    /// two points, all coordinates finite, no coincident consecutive points.
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Geometry(format!(
                "centerline needs at least 2 waypoints, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::Geometry(format!(
                    "non-finite coordinate in waypoint {i}"
                )));
            }
        }
        let mut path_distance = Vec::with_capacity(points.len());
        path_distance.push(0.0);
        for i in 1..points.len() {
            let chord = (points[i] - points[i - 1]).norm();
            if chord <= 0.0 {
                return Err(Error::Geometry(format!(
                    "coincident consecutive waypoints {} and {}",
                    i - 1,
                    i
                )));
            }
            path_distance.push(path_distance[i - 1] + chord);
        }
        Ok(Self {
            points,
            path_distance,
        })
    }

    /// Number of waypoints.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false for a constructed centerline (≥ 2 points).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total chord length.
    pub fn length(&self) -> f64 {
        *self.path_distance.last().unwrap()
    }
}

/// Parses a centerline from CSV text with header `x,y,z` or `x,y,z,r`
/// (meters; `r` is the local vessel radius). Returns the centerline and the
/// radius column when present. Accepts LF or CRLF line endings and skips
/// blank lines; any malformed row fails with its 1-based line number.
pub fn load_centerline<R: BufRead>(source: R) -> Result<(Centerline, Option<Vec<f64>>)> {
    let mut header: Option<bool> = None; // Some(has_radius)
    let mut points = Vec::new();
    let mut radii = Vec::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match header {
            None => {
                header = match fields.as_slice() {
                    ["x", "y", "z"] => Some(false),
                    ["x", "y", "z", "r"] => Some(true),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected header `x,y,z` or `x,y,z,r`, got `{line}`"),
                        })
                    }
                };
            }
            Some(has_radius) => {
                let expected = if has_radius { 4 } else { 3 };
                if fields.len() != expected {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected {expected} fields, got {}", fields.len()),
                    });
                }
                let mut values = [0.0f64; 4];
                for (j, field) in fields.iter().enumerate() {
                    values[j] = field.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("cannot parse `{field}` as a number"),
                    })?;
                    if !values[j].is_finite() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("non-finite value `{field}`"),
                        });
                    }
                }
                points.push(Vector3::new(values[0], values[1], values[2]));
                if has_radius {
                    radii.push(values[3]);
                }
            }
        }
    }

    if header.is_none() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty input: expected header `x,y,z` or `x,y,z,r`".into(),
        });
    }
    let centerline = Centerline::new(points)?;
    let radii = if radii.is_empty() { None } else { Some(radii) };
    Ok((centerline, radii))
}

/// Curvature together with the derivatives it was computed from.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureSample {
    /// Query path distance (m).
    pub s: f64,
    /// Space-curve curvature (1/m), always ≥ 0.
    pub k: f64,
    /// First derivative of position with respect to path distance.
    pub first: Vector3<f64>,
    /// Second derivative of position with respect to path distance.
    pub second: Vector3<f64>,
}

/// C¹ per-axis monotone cubic Hermite spline over the chord-length domain.
#[derive(Debug, Clone)]
pub struct PathSpline {
    knots: Vec<f64>,
    /// Per axis, per segment: value = c0 + u·(c1 + u·(c2 + u·c3)) with
    /// u = s − knots[segment].
    coeffs: [Vec<[f64; 4]>; 3],
    mean_spacing: f64,
}

/// Three-way sign used by the slope limiter; unlike `f64::signum`, zero maps
/// to its own class so flat secants suppress the tangent entirely.
fn sign3(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// One-sided three-point endpoint tangent, clamped to preserve the shape of
/// the terminal segment (the standard monotone-pchip endpoint rule).
/// `h0`/`delta0` belong to the terminal segment, `h1`/`delta1` to its
/// neighbor.
fn endpoint_tangent(h0: f64, h1: f64, delta0: f64, delta1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * delta0 - h0 * delta1) / (h0 + h1);
    if sign3(d) != sign3(delta0) {
        0.0
    } else if sign3(delta0) != sign3(delta1) && d.abs() > 3.0 * delta0.abs() {
        3.0 * delta0
    } else {
        d
    }
}

/// Fritsch–Carlson monotone tangents: the weighted harmonic mean of adjacent
/// secants at interior nodes (zero when the secants disagree in sign or
/// vanish), with one-sided three-point endpoint tangents.
fn fc_tangents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    debug_assert!(n >= 2);
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    if n == 2 {
        return vec![delta[0]; 2];
    }

    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (dl, dr) = (delta[i - 1], delta[i]);
        if dl == 0.0 || dr == 0.0 || sign3(dl) != sign3(dr) {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / dl + w2 / dr);
        }
    }
    d[0] = endpoint_tangent(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = endpoint_tangent(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Builds the per-axis monotone cubic Hermite spline over the centerline's
/// chord-length parameterization. Nodes are interpolated exactly and the
/// first derivative is single-valued across interior nodes by construction.
pub fn build_spline(c: &Centerline) -> PathSpline {
    let knots = c.path_distance.clone();
    let n = knots.len();
    let mut coeffs: [Vec<[f64; 4]>; 3] = [
        Vec::with_capacity(n - 1),
        Vec::with_capacity(n - 1),
        Vec::with_capacity(n - 1),
    ];

    for (axis, axis_coeffs) in coeffs.iter_mut().enumerate() {
        let values: Vec<f64> = c.points.iter().map(|p| p[axis]).collect();
        let tangents = fc_tangents(&knots, &values);
        for i in 0..n - 1 {
            let h = knots[i + 1] - knots[i];
            let delta = (values[i + 1] - values[i]) / h;
            let (d0, d1) = (tangents[i], tangents[i + 1]);
            axis_coeffs.push([
                values[i],
                d0,
                (3.0 * delta - 2.0 * d0 - d1) / h,
                (d0 + d1 - 2.0 * delta) / (h * h),
            ]);
        }
    }

    let mean_spacing = (knots[n - 1] - knots[0]) / (n - 1) as f64;
    PathSpline {
        knots,
        coeffs,
        mean_spacing,
    }
}

impl PathSpline {
    /// Domain `[a, b]` of the path-distance parameter.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Total path length `b − a` in the chord-length parameterization.
    pub fn length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// Node vector (path distances of the original waypoints).
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of polynomial segments.
    pub fn segment_count(&self) -> usize {
        self.knots.len() - 1
    }

    /// Average node spacing; the projection window in [`crate::vfix`] is
    /// sized from this.
    pub fn mean_node_spacing(&self) -> f64 {
        self.mean_spacing
    }

    fn segment_index(&self, s: f64) -> Result<usize> {
        let (a, b) = self.domain();
        if !(s >= a && s <= b) {
            return Err(Error::OutOfDomain { s, a, b });
        }
        let idx = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&s).expect("finite knots"))
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(idx.min(self.knots.len() - 2))
    }

    fn eval_segment(&self, seg: usize, s: f64) -> Vector3<f64> {
        let u = s - self.knots[seg];
        Vector3::from_fn(|axis, _| {
            let c = self.coeffs[axis][seg];
            c[0] + u * (c[1] + u * (c[2] + u * c[3]))
        })
    }

    fn derivatives_segment(&self, seg: usize, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        let u = s - self.knots[seg];
        let first = Vector3::from_fn(|axis, _| {
            let c = self.coeffs[axis][seg];
            c[1] + u * (2.0 * c[2] + 3.0 * c[3] * u)
        });
        let second = Vector3::from_fn(|axis, _| {
            let c = self.coeffs[axis][seg];
            2.0 * c[2] + 6.0 * c[3] * u
        });
        (first, second)
    }

    /// Interpolated position at path distance `s`. Node queries return the
    /// original waypoints; queries outside `[a, b]` fail (no extrapolation).
    pub fn eval(&self, s: f64) -> Result<Vector3<f64>> {
        Ok(self.eval_segment(self.segment_index(s)?, s))
    }

    /// Position with the query clamped into the domain. Only for internal
    /// callers that already guarantee near-domain arguments (e.g. the
    /// nearest-point search, whose window is clamped).
    pub(crate) fn eval_clamped(&self, s: f64) -> Vector3<f64> {
        let (a, b) = self.domain();
        let s = s.clamp(a, b);
        self.eval_segment(self.segment_index(s).expect("clamped into domain"), s)
    }

    /// Analytic first and second derivatives of position with respect to
    /// path distance at `s`.
    pub fn derivatives(&self, s: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        Ok(self.derivatives_segment(self.segment_index(s)?, s))
    }

    /// Derivatives evaluated with an explicitly chosen segment's polynomial
    /// (panics on a bad index). `derivatives` picks the segment by binary
    /// search; pinning it instead exposes the one-sided limits at a shared
    /// node, which is how first-derivative continuity is verified.
    pub fn derivatives_on_segment(&self, seg: usize, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        assert!(seg < self.segment_count(), "segment {seg} out of range");
        self.derivatives_segment(seg, s)
    }

    /// Space-curve curvature at `s`:
    /// `K = ‖r″ × r′‖ / ‖r′‖³`, expanded componentwise as
    /// `√((z″y′−y″z′)² + (x″z′−z″x′)² + (y″x′−x″y′)²) / (x′²+y′²+z′²)^(3/2)`.
    /// Degenerate tangents (speed ≤ [`EPS_SPEED`]) are an error.
    pub fn curvature(&self, s: f64) -> Result<CurvatureSample> {
        let (first, second) = self.derivatives(s)?;
        let speed_sq = first.norm_squared();
        let speed = speed_sq.sqrt();
        if speed <= EPS_SPEED {
            return Err(Error::SingularCurvature { s, speed });
        }
        let cx = second.z * first.y - second.y * first.z;
        let cy = second.x * first.z - second.z * first.x;
        let cz = second.y * first.x - second.x * first.y;
        let k = (cx * cx + cy * cy + cz * cz).sqrt() / (speed_sq * speed);
        Ok(CurvatureSample {
            s,
            k,
            first,
            second,
        })
    }

    /// Unit tangent at `s`; fails on a degenerate tangent like `curvature`.
    pub fn tangent(&self, s: f64) -> Result<Vector3<f64>> {
        let (first, _) = self.derivatives(s)?;
        let speed = first.norm();
        if speed <= EPS_SPEED {
            return Err(Error::SingularCurvature { s, speed });
        }
        Ok(first / speed)
    }
}

/// Node indices where the monotone slope limiter can distort local shape:
/// the two endpoint nodes (one-sided tangents) and every interior node where
/// some axis's adjacent secants change sign or vanish (the limiter zeroes
/// the tangent there). Curvature-accuracy probes should sample several
/// segments away from these nodes, because the limiter intentionally
/// flattens the interpolant around them.
pub fn limited_nodes(c: &Centerline) -> Vec<usize> {
    let n = c.points.len();
    let mut limited = vec![false; n];
    limited[0] = true;
    limited[n - 1] = true;
    for axis in 0..3 {
        let windows = c.points.windows(3).zip(c.path_distance.windows(3));
        for (i, (p, s)) in windows.enumerate() {
            let dl = (p[1][axis] - p[0][axis]) / (s[1] - s[0]);
            let dr = (p[2][axis] - p[1][axis]) / (s[2] - s[1]);
            // An extremum (sign change) or a one-sided plateau edge zeroes
            // the tangent. Two zero secants mean the axis is locally
            // constant — reproduced exactly, so not flagged.
            if sign3(dl) != sign3(dr) {
                limited[i + 1] = true;
            }
        }
    }
    (0..n).filter(|&i| limited[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Cursor;

    fn line_centerline(n: usize, length: f64) -> Centerline {
        let points = (0..n)
            .map(|i| Vector3::new(length * i as f64 / (n - 1) as f64, 0.0, 0.0))
            .collect();
        Centerline::new(points).unwrap()
    }

    fn helix_centerline(r: f64, c: f64, t_max: f64, n: usize) -> Centerline {
        let points = (0..n)
            .map(|i| {
                let t = t_max * i as f64 / (n - 1) as f64;
                Vector3::new(r * t.cos(), r * t.sin(), c * t)
            })
            .collect();
        Centerline::new(points).unwrap()
    }

    #[test]
    fn chord_length_unit_segment() {
        let c = Centerline::new(vec![Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)]).unwrap();
        assert_eq!(c.path_distance, vec![0.0, 1.0]);
    }

    #[test]
    fn chord_length_three_four_five() {
        let c = Centerline::new(vec![Vector3::zeros(), Vector3::new(3.0, 4.0, 0.0)]).unwrap();
        assert_eq!(c.path_distance, vec![0.0, 5.0]);
    }

    #[test]
    fn coincident_points_rejected() {
        let err = Centerline::new(vec![Vector3::zeros(), Vector3::zeros()]).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)), "got {err:?}");
    }

    #[test]
    fn single_point_rejected() {
        let err = Centerline::new(vec![Vector3::zeros()]).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn load_plain_and_radius_headers() {
        let (c, r) = load_centerline(Cursor::new("x,y,z\n0,0,0\n1,0,0\n")).unwrap();
        assert_eq!(c.len(), 2);
        assert!(r.is_none());

        let (c, r) =
            load_centerline(Cursor::new("x,y,z,r\r\n0,0,0,0.002\r\n0,3,4,0.003\r\n")).unwrap();
        assert_eq!(c.path_distance, vec![0.0, 5.0]);
        assert_eq!(r.unwrap(), vec![0.002, 0.003]);
    }

    #[test]
    fn parse_error_reports_line_number() {
        let err = load_centerline(Cursor::new("x,y,z\n0,0,0\n1,oops,0\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_field_count_reports_line_number() {
        let err = load_centerline(Cursor::new("x,y,z\n0,0\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_rejected() {
        let err = load_centerline(Cursor::new("a,b,c\n0,0,0\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input_rejected() {
        let err = load_centerline(Cursor::new("")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn linear_data_reproduced_exactly() {
        let c = line_centerline(7, 6.0);
        let spline = build_spline(&c);
        for i in 0..=600 {
            let s = 6.0 * i as f64 / 600.0;
            let p = spline.eval(s).unwrap();
            assert!((p - Vector3::new(s, 0.0, 0.0)).norm() <= 1e-12);
        }
        let (first, second) = spline.derivatives(2.5).unwrap();
        assert_relative_eq!(first.x, 1.0, max_relative = 1e-12);
        assert!(second.norm() <= 1e-12);
    }

    #[test]
    fn interpolates_quarter_circle_nodes_exactly() {
        let r = 0.02;
        let points: Vec<_> = (0..=25)
            .map(|i| {
                let th = std::f64::consts::FRAC_PI_2 * i as f64 / 25.0;
                Vector3::new(r * th.cos(), r * th.sin(), 0.0)
            })
            .collect();
        let c = Centerline::new(points.clone()).unwrap();
        let spline = build_spline(&c);
        for (i, p) in points.iter().enumerate() {
            let q = spline.eval(c.path_distance[i]).unwrap();
            assert!((q - p).norm() <= 1e-12, "node {i} off by {}", (q - p).norm());
        }
    }

    #[test]
    fn eval_endpoints_and_midpoint() {
        let c = Centerline::new(vec![Vector3::zeros(), Vector3::new(2.0, 0.0, 0.0)]).unwrap();
        let spline = build_spline(&c);
        assert_eq!(spline.eval(0.0).unwrap(), Vector3::zeros());
        assert!((spline.eval(2.0).unwrap() - Vector3::new(2.0, 0.0, 0.0)).norm() <= 1e-12);
        assert!((spline.eval(1.0).unwrap() - Vector3::new(1.0, 0.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let spline = build_spline(&line_centerline(5, 1.0));
        assert!(matches!(
            spline.eval(-1e-9),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            spline.eval(1.0 + 1e-9),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            spline.curvature(f64::NAN),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn monotone_data_stays_monotone() {
        // Nonuniform node spacing with monotone x: the interpolated x must
        // be monotone in path distance (no overshoot) on a dense sweep.
        let xs = [0.0_f64, 0.05, 0.07, 0.2, 0.21, 0.5, 0.9, 1.0];
        let points: Vec<_> = xs
            .iter()
            .map(|&x| Vector3::new(x, (3.0 * x).sin() * 0.01, 0.0))
            .collect();
        let c = Centerline::new(points).unwrap();
        let spline = build_spline(&c);
        let (a, b) = spline.domain();
        let mut prev = spline.eval(a).unwrap().x;
        for i in 1..=10_000 {
            let s = a + (b - a) * i as f64 / 10_000.0;
            let x = spline.eval(s).unwrap().x;
            assert!(
                x >= prev - 1e-12,
                "x not monotone at s = {s}: {x} < {prev}"
            );
            prev = x;
        }
    }

    #[test]
    fn first_derivative_matches_finite_difference() {
        let c = helix_centerline(0.01, 0.005, 4.0 * std::f64::consts::PI, 200);
        let spline = build_spline(&c);
        let (a, b) = spline.domain();
        let h = 1e-5 * (b - a);
        for i in 1..40 {
            let s = a + (b - a) * i as f64 / 40.0;
            let (first, _) = spline.derivatives(s).unwrap();
            let fd = (spline.eval(s + h).unwrap() - spline.eval(s - h).unwrap()) / (2.0 * h);
            assert!(
                (first - fd).norm() <= 1e-4 * first.norm(),
                "derivative mismatch at s = {s}: {:?} vs {:?}",
                first,
                fd
            );
        }
    }

    #[test]
    fn first_derivative_continuous_at_interior_nodes() {
        let c = helix_centerline(0.01, 0.005, 4.0 * std::f64::consts::PI, 80);
        let spline = build_spline(&c);
        let knots = spline.knots().to_vec();
        let interior = knots.iter().enumerate().skip(1).take(knots.len() - 2);
        for (i, &knot) in interior {
            let (left, _) = spline.derivatives_on_segment(i - 1, knot);
            let (right, _) = spline.derivatives_on_segment(i, knot);
            assert!(
                (left - right).norm() <= 1e-10,
                "C1 break at node {i}: {:?}",
                (left - right).norm()
            );
        }
    }

    #[test]
    fn curvature_zero_on_straight_line() {
        let spline = build_spline(&line_centerline(9, 0.06));
        for i in 0..=60 {
            let s = 0.06 * i as f64 / 60.0;
            assert!(spline.curvature(s).unwrap().k.abs() <= 1e-9);
        }
    }

    /// Segment midpoints at least `guard` segments away from every
    /// limiter-affected node — the fair places to probe curvature accuracy.
    fn interior_probe_midpoints(c: &Centerline, spline: &PathSpline, guard: usize) -> Vec<f64> {
        let limited = limited_nodes(c);
        let knots = spline.knots();
        (0..spline.segment_count())
            .filter(|&seg| {
                limited.iter().all(|&l| {
                    // both segment endpoints at least `guard` nodes away
                    let d0 = (seg as isize - l as isize).unsigned_abs();
                    let d1 = (seg as isize + 1 - l as isize).unsigned_abs();
                    d0 >= guard && d1 >= guard
                })
            })
            .map(|seg| 0.5 * (knots[seg] + knots[seg + 1]))
            .collect()
    }

    #[test]
    fn curvature_matches_circle() {
        // Full circle with the node count divisible by 4, so every
        // coordinate extremum falls exactly on a node.
        let r = 0.02;
        let n_seg = 64;
        let points: Vec<_> = (0..=n_seg)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n_seg as f64;
                Vector3::new(r * th.cos(), r * th.sin(), 0.0)
            })
            .collect();
        let c = Centerline::new(points).unwrap();
        let spline = build_spline(&c);
        let probes = interior_probe_midpoints(&c, &spline, 5);
        assert!(probes.len() >= 16, "only {} probes", probes.len());
        for s in probes {
            let k = spline.curvature(s).unwrap().k;
            assert_relative_eq!(k, 1.0 / r, max_relative = 0.01);
        }
    }

    #[test]
    fn curvature_matches_helix() {
        // K = R/(R² + c²) = 80 for R = 0.01, c = 0.005. Node grid aligned so
        // the per-axis extrema (multiples of π/2 in the angle) sit on nodes.
        let (r, c_pitch) = (0.01, 0.005);
        let n_seg = 160;
        let t_max = 4.0 * std::f64::consts::PI;
        let c = helix_centerline(r, c_pitch, t_max, n_seg + 1);
        let spline = build_spline(&c);
        let k_true = r / (r * r + c_pitch * c_pitch);
        let probes = interior_probe_midpoints(&c, &spline, 5);
        assert!(probes.len() >= 40, "only {} probes", probes.len());
        for s in probes {
            let k = spline.curvature(s).unwrap().k;
            assert_relative_eq!(k, k_true, max_relative = 0.02);
        }
    }

    #[test]
    fn degenerate_tangent_is_singular() {
        // A path that doubles back: at the turning node every axis tangent
        // is zero, so curvature there is undefined.
        let c = Centerline::new(vec![
            Vector3::zeros(),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::zeros(),
        ])
        .unwrap();
        let spline = build_spline(&c);
        assert!(matches!(
            spline.curvature(1.0),
            Err(Error::SingularCurvature { .. })
        ));
        assert!(matches!(
            spline.tangent(1.0),
            Err(Error::SingularCurvature { .. })
        ));
        // Away from the turning point the curve is a straight line.
        assert!(spline.curvature(0.5).unwrap().k <= 1e-9);
    }

    #[test]
    fn limited_nodes_flags_extrema_and_endpoints() {
        let points = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0), // y peaks here (node 1)
            Vector3::new(2.0, 0.5, 0.0),
            Vector3::new(3.0, 0.0, 0.0),
        ];
        let c = Centerline::new(points).unwrap();
        assert_eq!(limited_nodes(&c), vec![0, 1, 3]);
    }
}
