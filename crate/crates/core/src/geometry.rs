//! One spatial period of the cascade.
//!
//! The lower curve is a piecewise cubic Bézier curve from the inflow line
//! `x1 = 0` to the outflow line `x1 = d`; the upper curve is its exact
//! translate by `(0, tau)`, obtained by translating control points.

use std::f64::consts::PI;

use crate::{Error, Point, Result};

/// Boundary part of the period domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Inflow,
    Outflow,
    Lower,
    Upper,
    Profile,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Inflow,
        BoundaryTag::Outflow,
        BoundaryTag::Lower,
        BoundaryTag::Upper,
        BoundaryTag::Profile,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Inflow => "Inflow",
            BoundaryTag::Outflow => "Outflow",
            BoundaryTag::Lower => "Lower",
            BoundaryTag::Upper => "Upper",
            BoundaryTag::Profile => "Profile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(s))
    }

    pub(crate) fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl std::fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Smoothness class of a piecewise cubic curve, measured at segment joints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveSmoothness {
    /// A single cubic segment.
    Polynomial,
    C0,
    C1,
    C2,
}

/// Open piecewise cubic Bézier curve with `3k + 1` control points.
#[derive(Clone, Debug, PartialEq)]
pub struct BezierCurve {
    control: Vec<Point>,
}

impl BezierCurve {
    pub fn new(control: Vec<Point>) -> Result<Self> {
        if control.len() < 4 || (control.len() - 1) % 3 != 0 {
            return Err(Error::InvalidGeometry(format!(
                "a piecewise cubic curve needs 3k+1 control points, got {}",
                control.len()
            )));
        }
        if control.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite control point".into()));
        }
        Ok(Self { control })
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: Point, b: Point) -> Self {
        let lerp = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        Self { control: vec![a, lerp(1.0 / 3.0), lerp(2.0 / 3.0), b] }
    }

    /// Single cubic from `(0, 0)` to `(d, 0)` whose midpoint is raised by `lift`.
    pub fn arc(d: f64, lift: f64) -> Self {
        // B(1/2) = (P1 + P2) * 3/8 for flat end points.
        let c = lift / 0.75;
        Self { control: vec![[0.0, 0.0], [d / 3.0, c], [2.0 * d / 3.0, c], [d, 0.0]] }
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control
    }

    pub fn segments(&self) -> usize {
        (self.control.len() - 1) / 3
    }

    pub fn start(&self) -> Point {
        self.control[0]
    }

    pub fn end(&self) -> Point {
        *self.control.last().unwrap()
    }

    pub fn translated(&self, shift: Point) -> Self {
        Self {
            control: self.control.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect(),
        }
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.segments();
        let s = t.clamp(0.0, 1.0) * n as f64;
        let k = (s.floor() as usize).min(n - 1);
        (k, s - k as f64)
    }

    pub fn point(&self, t: f64) -> Point {
        if t <= 0.0 {
            return self.start();
        }
        if t >= 1.0 {
            return self.end();
        }
        let (k, u) = self.locate(t);
        let p = &self.control[3 * k..3 * k + 4];
        let v = 1.0 - u;
        let b = [v * v * v, 3.0 * v * v * u, 3.0 * v * u * u, u * u * u];
        let mut out = [0.0; 2];
        for (w, c) in b.iter().zip(p) {
            out[0] += w * c[0];
            out[1] += w * c[1];
        }
        out
    }

    /// Derivative with respect to the global parameter `t`.
    pub fn derivative(&self, t: f64) -> Point {
        let (k, u) = self.locate(t);
        let p = &self.control[3 * k..3 * k + 4];
        let v = 1.0 - u;
        let n = self.segments() as f64;
        let b = [3.0 * v * v, 6.0 * v * u, 3.0 * u * u];
        let mut out = [0.0; 2];
        for i in 0..3 {
            out[0] += b[i] * (p[i + 1][0] - p[i][0]);
            out[1] += b[i] * (p[i + 1][1] - p[i][1]);
        }
        [out[0] * n, out[1] * n]
    }

    fn second_derivative_at_joint(&self, k: usize, left: bool) -> Point {
        // Second derivative (in local parameter) at the end of segment k-1 or start of k.
        let p = if left { &self.control[3 * (k - 1)..3 * k + 1] } else { &self.control[3 * k..3 * k + 4] };
        if left {
            [6.0 * (p[3][0] - 2.0 * p[2][0] + p[1][0]), 6.0 * (p[3][1] - 2.0 * p[2][1] + p[1][1])]
        } else {
            [6.0 * (p[2][0] - 2.0 * p[1][0] + p[0][0]), 6.0 * (p[2][1] - 2.0 * p[1][1] + p[0][1])]
        }
    }

    pub fn smoothness(&self) -> CurveSmoothness {
        let n = self.segments();
        if n == 1 {
            return CurveSmoothness::Polynomial;
        }
        let scale = self
            .control
            .iter()
            .flatten()
            .fold(1.0_f64, |m, c| m.max(c.abs()));
        let tol = 1e-12 * scale;
        let mut c1 = true;
        let mut c2 = true;
        for k in 1..n {
            let j = 3 * k;
            let left = [self.control[j][0] - self.control[j - 1][0], self.control[j][1] - self.control[j - 1][1]];
            let right = [self.control[j + 1][0] - self.control[j][0], self.control[j + 1][1] - self.control[j][1]];
            if (left[0] - right[0]).abs() > tol || (left[1] - right[1]).abs() > tol {
                c1 = false;
            }
            let a = self.second_derivative_at_joint(k, true);
            let b = self.second_derivative_at_joint(k, false);
            if (a[0] - b[0]).abs() > tol || (a[1] - b[1]).abs() > tol {
                c2 = false;
            }
        }
        match (c1, c2) {
            (true, true) => CurveSmoothness::C2,
            (true, false) => CurveSmoothness::C1,
            _ => CurveSmoothness::C0,
        }
    }

    /// Dense polyline sample, `n + 1` points.
    pub fn sample(&self, n: usize) -> Vec<Point> {
        (0..=n).map(|i| self.point(i as f64 / n as f64)).collect()
    }
}

/// Blade profile description.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileSpec {
    Ellipse { center: Point, semi_axes: [f64; 2], angle: f64 },
    /// Closed piecewise cubic Bézier curve with `3k` control points; the last
    /// segment returns to the first point.
    Bezier(Vec<Point>),
}

impl ProfileSpec {
    /// Point on the closed curve for `t` in `[0, 1)`, counter-clockwise.
    pub fn point(&self, t: f64) -> Point {
        match self {
            ProfileSpec::Ellipse { center, semi_axes, angle } => {
                let th = 2.0 * PI * t;
                let (x, y) = (semi_axes[0] * th.cos(), semi_axes[1] * th.sin());
                let (s, c) = angle.sin_cos();
                [center[0] + c * x - s * y, center[1] + s * x + c * y]
            }
            ProfileSpec::Bezier(ctrl) => {
                let n = ctrl.len() / 3;
                let s = t.rem_euclid(1.0) * n as f64;
                let k = (s.floor() as usize).min(n - 1);
                let u = s - k as f64;
                let v = 1.0 - u;
                let p = [ctrl[3 * k], ctrl[3 * k + 1], ctrl[3 * k + 2], ctrl[(3 * k + 3) % ctrl.len()]];
                let b = [v * v * v, 3.0 * v * v * u, 3.0 * v * u * u, u * u * u];
                let mut out = [0.0; 2];
                for (w, c) in b.iter().zip(p.iter()) {
                    out[0] += w * c[0];
                    out[1] += w * c[1];
                }
                out
            }
        }
    }

    /// Closed polygon with `n` vertices (first vertex not repeated), counter-clockwise.
    pub fn polygon(&self, n: usize) -> Vec<Point> {
        let mut poly: Vec<Point> = (0..n).map(|i| self.point(i as f64 / n as f64)).collect();
        if signed_area(&poly) < 0.0 {
            poly.reverse();
        }
        poly
    }

    pub fn perimeter(&self) -> f64 {
        let poly = self.polygon(2048);
        (0..poly.len()).map(|i| dist(poly[i], poly[(i + 1) % poly.len()])).sum()
    }
}

/// Shape parameters accepted by [`build_geometry`].
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeParams {
    pub tau: f64,
    pub d: f64,
    pub lower_control: Vec<Point>,
    pub profile: Option<ProfileSpec>,
    pub delta_margin: Option<f64>,
}

impl ShapeParams {
    /// Rectangular strip `[0, d] x [0, tau]` without a blade.
    pub fn strip(tau: f64, d: f64) -> Self {
        Self {
            tau,
            d,
            lower_control: BezierCurve::segment([0.0, 0.0], [d, 0.0]).control,
            profile: None,
            delta_margin: None,
        }
    }

    pub fn with_profile(mut self, profile: ProfileSpec) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn with_lower_lift(mut self, lift: f64) -> Self {
        self.lower_control = BezierCurve::arc(self.d, lift).control;
        self
    }
}

/// One spatial period of the cascade. Immutable after construction.
#[derive(Clone, Debug)]
pub struct CascadeGeometry {
    tau: f64,
    d: f64,
    lower: BezierCurve,
    upper: BezierCurve,
    profile: Option<ProfileSpec>,
    delta_margin: f64,
    smoothness: CurveSmoothness,
    lower_x1: Vec<f64>,
}

const CURVE_SAMPLES: usize = 4096;

pub fn build_geometry(params: &ShapeParams) -> Result<CascadeGeometry> {
    let ShapeParams { tau, d, .. } = *params;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidGeometry(format!("period tau must be positive, got {tau}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidGeometry(format!("width d must be positive, got {d}")));
    }
    let mut control = params.lower_control.clone();
    let first = control.first().copied().unwrap_or([f64::NAN; 2]);
    let last = control.last().copied().unwrap_or([f64::NAN; 2]);
    let snap = 1e-12 * d;
    if first[0].abs() > snap || (last[0] - d).abs() > snap {
        return Err(Error::InvalidGeometry(format!(
            "lower curve must run from x1 = 0 to x1 = d = {d}, got x1 = {} .. {}",
            first[0], last[0]
        )));
    }
    control[0][0] = 0.0;
    let n = control.len();
    control[n - 1][0] = d;
    let lower = BezierCurve::new(control)?;
    let upper = lower.translated([0.0, tau]);

    let samples = lower.sample(CURVE_SAMPLES);
    let shifted: Vec<Point> = samples.iter().map(|p| [p[0], p[1] + tau]).collect();
    if polylines_intersect(&samples, &shifted) {
        return Err(Error::InvalidGeometry("lower curve crosses its translate by tau".into()));
    }
    if samples.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(Error::InvalidGeometry("lower curve must be strictly monotone in x1".into()));
    }

    let delta_margin = params.delta_margin.unwrap_or(d / 10.0);
    if !(delta_margin > 0.0 && delta_margin < d / 2.0) {
        return Err(Error::InvalidGeometry(format!("delta_margin must lie in (0, d/2), got {delta_margin}")));
    }

    let geom = CascadeGeometry {
        tau,
        d,
        smoothness: lower.smoothness(),
        lower_x1: samples.iter().map(|p| p[0]).collect(),
        lower,
        upper,
        profile: params.profile.clone(),
        delta_margin,
    };
    if let Some(profile) = &geom.profile {
        geom.check_profile(profile, &samples, &shifted)?;
    }
    Ok(geom)
}

impl CascadeGeometry {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn lower(&self) -> &BezierCurve {
        &self.lower
    }

    pub fn upper(&self) -> &BezierCurve {
        &self.upper
    }

    pub fn profile(&self) -> Option<&ProfileSpec> {
        self.profile.as_ref()
    }

    pub fn delta_margin(&self) -> f64 {
        self.delta_margin
    }

    /// Smoothness class of the lower (and upper) curve. The theory asks for
    /// smooth curves; piecewise cubics are at best C2.
    pub fn curve_smoothness(&self) -> CurveSmoothness {
        self.smoothness
    }

    /// Corner points `A-`, `A+`, `B-`, `B+`.
    pub fn corners(&self) -> [Point; 4] {
        [self.lower.start(), self.upper.start(), self.lower.end(), self.upper.end()]
    }

    /// Analytic area of the period domain: `tau * d` minus the blade area.
    pub fn area(&self) -> f64 {
        let blade = match &self.profile {
            None => 0.0,
            Some(ProfileSpec::Ellipse { semi_axes, .. }) => PI * semi_axes[0] * semi_axes[1],
            Some(p) => signed_area(&p.polygon(8192)),
        };
        self.tau * self.d - blade
    }

    /// Ordinate of the lower curve at abscissa `x1`.
    pub fn lower_at(&self, x1: f64) -> f64 {
        self.lower.point(self.parameter_at(x1))[1]
    }

    /// Curve parameter with `lower(t).x1 == x1`, found by bisection.
    pub fn parameter_at(&self, x1: f64) -> f64 {
        let n = self.lower_x1.len() - 1;
        let k = self.lower_x1.partition_point(|&x| x < x1).clamp(1, n);
        let (mut lo, mut hi) = ((k - 1) as f64 / n as f64, k as f64 / n as f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.lower.point(mid)[0] < x1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Upper end of the cutoff support `[0, delta]` used by tensor potentials:
    /// the blade's smallest abscissa (or `d - delta_margin` without a blade),
    /// reduced by one mesh cell `h`.
    pub fn cutoff_delta(&self, h: f64) -> Result<f64> {
        let start = match &self.profile {
            Some(p) => p.polygon(2048).iter().map(|q| q[0]).fold(f64::INFINITY, f64::min),
            None => self.d - self.delta_margin,
        };
        let delta = start - h;
        if delta <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "no room for the cutoff: blade starts at x1 = {start}, mesh size {h}"
            )));
        }
        Ok(delta)
    }

    /// Tags the boundary part a point belongs to. Inflow corners are tagged
    /// `Inflow`, outflow corners `Outflow`.
    pub fn classify_boundary(&self, p: Point, tol: f64) -> Result<BoundaryTag> {
        let [a_lo, a_hi, b_lo, b_hi] = self.corners();
        if p[0].abs() <= tol && p[1] >= a_lo[1] - tol && p[1] <= a_hi[1] + tol {
            return Ok(BoundaryTag::Inflow);
        }
        if (p[0] - self.d).abs() <= tol && p[1] >= b_lo[1] - tol && p[1] <= b_hi[1] + tol {
            return Ok(BoundaryTag::Outflow);
        }
        if p[0] > -tol && p[0] < self.d + tol {
            let y = self.lower_at(p[0].clamp(0.0, self.d));
            if (p[1] - y).abs() <= tol {
                return Ok(BoundaryTag::Lower);
            }
            if (p[1] - y - self.tau).abs() <= tol {
                return Ok(BoundaryTag::Upper);
            }
        }
        if let Some(profile) = &self.profile {
            let poly = profile.polygon(4096);
            let dmin = (0..poly.len())
                .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % poly.len()]))
                .fold(f64::INFINITY, f64::min);
            if dmin <= tol {
                return Ok(BoundaryTag::Profile);
            }
        }
        Err(Error::NotOnBoundary(p[0], p[1]))
    }

    fn check_profile(&self, profile: &ProfileSpec, lower: &[Point], upper: &[Point]) -> Result<()> {
        if let ProfileSpec::Ellipse { semi_axes, .. } = profile {
            if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) {
                return Err(Error::InvalidGeometry("ellipse semi-axes must be positive".into()));
            }
        }
        if let ProfileSpec::Bezier(ctrl) = profile {
            if ctrl.len() < 6 || ctrl.len() % 3 != 0 {
                return Err(Error::InvalidGeometry("closed profile needs 3k control points, k >= 2".into()));
            }
        }
        let poly = profile.polygon(512);
        if signed_area(&poly).abs() < 1e-14 {
            return Err(Error::InvalidGeometry("profile encloses no area".into()));
        }
        let m = self.delta_margin;
        for q in &poly {
            if q[0] <= m || q[0] >= self.d - m {
                return Err(Error::InvalidGeometry(format!(
                    "profile touches the strip boundary: point ({}, {}) is within {m} of x1 = 0 or x1 = d",
                    q[0], q[1]
                )));
            }
            let y = self.lower_at(q[0]);
            if q[1] <= y || q[1] >= y + self.tau {
                return Err(Error::InvalidGeometry("profile leaves the period domain".into()));
            }
        }
        let dist_to = |curve: &[Point]| {
            poly.iter()
                .flat_map(|q| curve.windows(2).map(move |w| point_segment_distance(*q, w[0], w[1])))
                .fold(f64::INFINITY, f64::min)
        };
        if dist_to(lower) < m || dist_to(upper) < m {
            return Err(Error::InvalidGeometry(format!(
                "profile is closer than delta_margin = {m} to the lower or upper curve"
            )));
        }
        let closed: Vec<Point> = poly.iter().copied().chain(std::iter::once(poly[0])).collect();
        for i in 0..poly.len() {
            for j in i + 2..poly.len() {
                if i == 0 && j == poly.len() - 1 {
                    continue;
                }
                if segments_intersect(closed[i], closed[i + 1], closed[j], closed[j + 1]) {
                    return Err(Error::InvalidGeometry("profile curve intersects itself".into()));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub(crate) fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn polylines_intersect(a: &[Point], b: &[Point]) -> bool {
    let bbox = |s: &[Point]| {
        s.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |m, p| [m[0].min(p[1]), m[1].max(p[1])])
    };
    let (ya, yb) = (bbox(a), bbox(b));
    if ya[1] < yb[0] || yb[1] < ya[0] {
        return false;
    }
    a.windows(2).any(|s| b.windows(2).any(|t| segments_intersect(s[0], s[1], t[0], t[1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_curve_is_exact_translate() {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0).with_lower_lift(0.2)).unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            let (lo, hi) = (g.lower().point(t), g.upper().point(t));
            assert_eq!(lo[0], hi[0]);
            assert!((hi[1] - lo[1] - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn arc_midpoint_is_lifted() {
        let c = BezierCurve::arc(2.0, 0.2);
        let m = c.point(0.5);
        assert!((m[0] - 1.0).abs() < 1e-15);
        assert!((m[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn classify_rectangle() {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap();
        let tol = 1e-9;
        assert_eq!(g.classify_boundary([0.0, 0.5], tol).unwrap(), BoundaryTag::Inflow);
        assert_eq!(g.classify_boundary([2.0, 0.5], tol).unwrap(), BoundaryTag::Outflow);
        assert_eq!(g.classify_boundary([0.0, 0.0], tol).unwrap(), BoundaryTag::Inflow);
        assert_eq!(g.classify_boundary([0.0, 1.0], tol).unwrap(), BoundaryTag::Inflow);
        assert_eq!(g.classify_boundary([2.0, 0.0], tol).unwrap(), BoundaryTag::Outflow);
        assert_eq!(g.classify_boundary([1.0, 0.0], tol).unwrap(), BoundaryTag::Lower);
        assert_eq!(g.classify_boundary([1.0, 1.0], tol).unwrap(), BoundaryTag::Upper);
        assert!(matches!(g.classify_boundary([1.0, 0.5], tol), Err(Error::NotOnBoundary(..))));
    }

    #[test]
    fn classify_profile() {
        let p = ShapeParams::strip(1.0, 2.0).with_profile(ProfileSpec::Ellipse {
            center: [1.0, 0.5],
            semi_axes: [0.3, 0.1],
            angle: 0.0,
        });
        let g = build_geometry(&p).unwrap();
        assert_eq!(g.classify_boundary([1.3, 0.5], 1e-6).unwrap(), BoundaryTag::Profile);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_geometry(&ShapeParams::strip(0.0, 2.0)).is_err());
        assert!(build_geometry(&ShapeParams::strip(1.0, -1.0)).is_err());
        let touching = ShapeParams::strip(1.0, 2.0).with_profile(ProfileSpec::Ellipse {
            center: [0.2, 0.5],
            semi_axes: [0.3, 0.1],
            angle: 0.0,
        });
        assert!(matches!(build_geometry(&touching), Err(Error::InvalidGeometry(_))));
        let near_lower = ShapeParams::strip(1.0, 2.0).with_profile(ProfileSpec::Ellipse {
            center: [1.0, 0.12],
            semi_axes: [0.3, 0.1],
            angle: 0.0,
        });
        assert!(build_geometry(&near_lower).is_err());
        let mut wiggly = ShapeParams::strip(1.0, 2.0);
        wiggly.lower_control = vec![[0.0, 0.0], [3.0, 0.0], [-1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(build_geometry(&wiggly), Err(Error::InvalidGeometry(_))));
        let mut steep = ShapeParams::strip(1.0, 2.0);
        steep.lower_control = vec![[0.0, 0.0], [0.7, 3.0], [1.3, -3.0], [2.0, 0.0]];
        assert!(build_geometry(&steep).is_ok());
    }

    #[test]
    fn smoothness_metadata() {
        let g = build_geometry(&ShapeParams::strip(1.0, 2.0)).unwrap();
        assert_eq!(g.curve_smoothness(), CurveSmoothness::Polynomial);
        let c = BezierCurve::new(vec![
            [0.0, 0.0],
            [0.3, 0.1],
            [0.6, 0.1],
            [1.0, 0.0],
            [1.3, -0.1],
            [1.7, 0.0],
            [2.0, 0.0],
        ])
        .unwrap();
        assert_eq!(c.smoothness(), CurveSmoothness::C0);
    }

    #[test]
    fn ellipse_area() {
        let p = ShapeParams::strip(1.0, 2.0).with_profile(ProfileSpec::Ellipse {
            center: [1.0, 0.5],
            semi_axes: [0.3, 0.1],
            angle: 0.0,
        });
        let g = build_geometry(&p).unwrap();
        assert!((g.area() - (2.0 - PI * 0.03)).abs() < 1e-14);
    }
}
