//! Geodesic-sphere measures: the scalar weight `phi(r)` giving the measure of
//! the sphere of radius `r` around the base point, either from the built-in
//! model geometries or from a tabulated profile curve of a surface of
//! revolution.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::interval::{Bound, EndSide, Interval};
use crate::quad::{self, QuadOptions};

/// Shared positive scalar map; measures and coefficients are immutable and
/// usable from several threads at once.
pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn scalar_map(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarMap {
    Arc::new(f)
}

/// Weight of the geodesic sphere of radius `r`, with its derivative, on an
/// open (possibly unbounded) interval. `phi > 0` in the interior; it may
/// vanish at finite endpoints.
#[derive(Clone)]
pub struct GeodesicMeasure {
    interval: Interval,
    eval: ScalarMap,
    deriv: ScalarMap,
    label: String,
    /// `phi` as a function of the distance to a finite endpoint; lets
    /// integrals resolve the blow-up of `1/phi` there without the
    /// floating-point jitter of forming `endpoint - d` explicitly.
    near_lower: Option<ScalarMap>,
    near_upper: Option<ScalarMap>,
}

impl fmt::Debug for GeodesicMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeodesicMeasure")
            .field("domain", &self.interval.describe())
            .field("label", &self.label)
            .finish()
    }
}

impl GeodesicMeasure {
    pub fn new(interval: Interval, eval: ScalarMap, deriv: ScalarMap, label: impl Into<String>) -> Self {
        GeodesicMeasure {
            interval,
            eval,
            deriv,
            label: label.into(),
            near_lower: None,
            near_upper: None,
        }
    }

    /// Attach exact distance-to-endpoint forms of `phi` (see the field docs).
    pub fn with_end_forms(mut self, lower: Option<ScalarMap>, upper: Option<ScalarMap>) -> Self {
        self.near_lower = lower;
        self.near_upper = upper;
        self
    }

    /// `phi` at distance `d` from the finite endpoint on `side`, preferring
    /// the exact distance form when one was provided.
    pub(crate) fn value_at_distance(&self, side: EndSide, d: f64) -> f64 {
        let form = match side {
            EndSide::Lower => &self.near_lower,
            EndSide::Upper => &self.near_upper,
        };
        if let Some(f) = form {
            return f(d);
        }
        match side {
            EndSide::Lower => match self.interval.lo {
                Bound::Finite(e) => (self.eval)(e + d),
                Bound::Unbounded => f64::NAN,
            },
            EndSide::Upper => match self.interval.hi {
                Bound::Finite(e) => (self.eval)(e - d),
                Bound::Unbounded => f64::NAN,
            },
        }
    }

    pub fn domain(&self) -> Interval {
        self.interval
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluate `(phi(r), phi'(r))`, rejecting points outside the open domain.
    pub fn eval_measure(&self, r: f64) -> Result<(f64, f64)> {
        if !self.interval.contains(r) {
            return Err(Error::Domain(format!(
                "r = {r} outside the measure domain {} of {}",
                self.interval.describe(),
                self.label
            )));
        }
        Ok(((self.eval)(r), (self.deriv)(r)))
    }

    pub(crate) fn value_unchecked(&self, r: f64) -> f64 {
        (self.eval)(r)
    }
}

/// The built-in model geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinMeasure {
    /// `phi = kappa r^(n-1)` on `(0, inf)`
    Euclidean,
    /// `phi = kappa sin(r)^(n-1)` on `(0, pi)`
    Sphere,
    /// `phi = kappa sinh(r)^(n-1)` on `(0, inf)`
    Hyperbolic,
    /// constant `phi = kappa` on the whole line (product of a line with a
    /// fixed compact orbit, e.g. a flat cylinder or torus)
    FlatCylinder,
}

impl BuiltinMeasure {
    pub const ALL: [BuiltinMeasure; 4] = [
        BuiltinMeasure::Euclidean,
        BuiltinMeasure::Sphere,
        BuiltinMeasure::Hyperbolic,
        BuiltinMeasure::FlatCylinder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinMeasure::Euclidean => "euclidean",
            BuiltinMeasure::Sphere => "sphere",
            BuiltinMeasure::Hyperbolic => "hyperbolic",
            BuiltinMeasure::FlatCylinder => "flat_cylinder",
        }
    }
}

impl FromStr for BuiltinMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(BuiltinMeasure::Euclidean),
            "sphere" => Ok(BuiltinMeasure::Sphere),
            "hyperbolic" => Ok(BuiltinMeasure::Hyperbolic),
            "flat_cylinder" => Ok(BuiltinMeasure::FlatCylinder),
            other => Err(Error::Format(format!(
                "unknown measure kind {other:?}; expected euclidean, sphere, hyperbolic or flat_cylinder"
            ))),
        }
    }
}

/// Surface measure of the unit sphere `S^(n-1)` in `R^n`.
fn unit_sphere_area(dim: u32) -> f64 {
    // 2 pi^(n/2) / Gamma(n/2) with Gamma evaluated by the recurrence from
    // Gamma(1) = 1 or Gamma(1/2) = sqrt(pi); dim is a small integer.
    let n = dim;
    let mut gamma = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut arg = if n % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * arg < n as f64 {
        gamma *= arg;
        arg += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// Construct one of the model measures in dimension `dim >= 2`.
///
/// With `normalize` off the weight is the bare profile (`kappa = 1`), the
/// convention used by the reduced coefficient `q = b phi^2`; turning it on
/// multiplies by the measure of the unit orbit sphere.
pub fn builtin_measure(kind: BuiltinMeasure, dim: u32, normalize: bool) -> Result<GeodesicMeasure> {
    if dim < 2 {
        return Err(Error::Domain(format!("builtin measures need dim >= 2, got {dim}")));
    }
    let kappa = if normalize { unit_sphere_area(dim) } else { 1.0 };
    let e = (dim - 1) as i32;
    let em1 = (dim - 2) as i32;
    let suffix = if normalize { ", normalized" } else { "" };
    let label = format!("{}(dim={dim}{suffix})", kind.name());
    let measure = match kind {
        BuiltinMeasure::Euclidean => GeodesicMeasure::new(
            Interval::above(0.0),
            scalar_map(move |r: f64| kappa * r.powi(e)),
            scalar_map(move |r: f64| kappa * e as f64 * r.powi(em1)),
            label,
        )
        .with_end_forms(Some(scalar_map(move |d: f64| kappa * d.powi(e))), None),
        BuiltinMeasure::Sphere => GeodesicMeasure::new(
            Interval::open(0.0, std::f64::consts::PI),
            scalar_map(move |r: f64| kappa * r.sin().powi(e)),
            scalar_map(move |r: f64| kappa * e as f64 * r.sin().powi(em1) * r.cos()),
            label,
        )
        .with_end_forms(
            // sin(pi - d) = sin(d): the same form serves both poles
            Some(scalar_map(move |d: f64| kappa * d.sin().powi(e))),
            Some(scalar_map(move |d: f64| kappa * d.sin().powi(e))),
        ),
        BuiltinMeasure::Hyperbolic => GeodesicMeasure::new(
            Interval::above(0.0),
            scalar_map(move |r: f64| kappa * r.sinh().powi(e)),
            scalar_map(move |r: f64| kappa * e as f64 * r.sinh().powi(em1) * r.cosh()),
            label,
        )
        .with_end_forms(Some(scalar_map(move |d: f64| kappa * d.sinh().powi(e))), None),
        BuiltinMeasure::FlatCylinder => GeodesicMeasure::new(
            Interval::real_line(),
            scalar_map(move |_| kappa),
            scalar_map(|_| 0.0),
            label,
        ),
    };
    Ok(measure)
}

/// A planar profile curve `t -> (x(t), z(t))` sampled at strictly increasing
/// parameters and interpolated by not-a-knot cubics. `x` is the distance to
/// the rotation axis, hence positive away from the poles.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    t: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
    x_spline: Arc<CubicSpline>,
    z_spline: Arc<CubicSpline>,
}

impl ProfileCurve {
    pub fn new(samples: &[(f64, f64, f64)]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::Format(format!(
                "profile curve needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        let mut t = Vec::with_capacity(samples.len());
        let mut x = Vec::with_capacity(samples.len());
        let mut z = Vec::with_capacity(samples.len());
        for (i, &(ti, xi, zi)) in samples.iter().enumerate() {
            if !(ti.is_finite() && xi.is_finite() && zi.is_finite()) {
                return Err(Error::Format(format!("non-finite profile sample at line {}", i + 1)));
            }
            if let Some(&prev) = t.last() {
                if ti == prev {
                    return Err(Error::Format(format!(
                        "duplicate parameter t = {ti} at sample {}",
                        i + 1
                    )));
                }
                if ti < prev {
                    return Err(Error::Format(format!(
                        "profile parameters must increase strictly; sample {} has t = {ti} after {prev}",
                        i + 1
                    )));
                }
            }
            if xi < 0.0 {
                return Err(Error::Domain(format!(
                    "profile distance to the axis is negative (x = {xi}) at sample {}",
                    i + 1
                )));
            }
            t.push(ti);
            x.push(xi);
            z.push(zi);
        }
        let x_spline = Arc::new(CubicSpline::new(t.clone(), x.clone())?);
        let z_spline = Arc::new(CubicSpline::new(t.clone(), z.clone())?);
        Ok(ProfileCurve { t, x, z, x_spline, z_spline })
    }

    /// Parse the plain-text profile format: one `t x z` triple per line,
    /// whitespace separated, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!(
                    "line {}: expected 3 fields `t x z`, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut vals = [0.0f64; 3];
            for (k, field) in fields.iter().enumerate() {
                vals[k] = field.parse::<f64>().map_err(|_| {
                    Error::Format(format!("line {}: cannot parse {field:?} as a number", lineno + 1))
                })?;
            }
            samples.push((vals[0], vals[1], vals[2]));
        }
        ProfileCurve::new(&samples)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.t.len()).map(move |i| (self.t[i], self.x[i], self.z[i]))
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().unwrap())
    }

    pub fn point(&self, t: f64) -> (f64, f64) {
        (self.x_spline.eval(t), self.z_spline.eval(t))
    }

    pub fn velocity(&self, t: f64) -> (f64, f64) {
        (self.x_spline.eval_deriv(t), self.z_spline.eval_deriv(t))
    }

    fn speed(&self, t: f64) -> f64 {
        let (vx, vz) = self.velocity(t);
        vx.hypot(vz)
    }

    /// Total arc length of the interpolated curve.
    pub fn arc_length(&self) -> Result<f64> {
        let opts = QuadOptions { abs_tol: 1e-13, ..QuadOptions::default() };
        let mut total = 0.0;
        for w in self.t.windows(2) {
            total += quad::integrate(|t| self.speed(t), w[0], w[1], &opts)?.value;
        }
        Ok(total)
    }
}

/// Re-parametrize a profile curve by arc length, keeping the sample points
/// and the parameter origin. A curve that is already unit speed is returned
/// unchanged up to quadrature error.
pub fn reparametrize_arc_length(curve: &ProfileCurve) -> Result<ProfileCurve> {
    let opts = QuadOptions { abs_tol: 1e-13, ..QuadOptions::default() };
    let mut samples = Vec::with_capacity(curve.len());
    let mut sigma = curve.t[0];
    samples.push((sigma, curve.x[0], curve.z[0]));
    for i in 1..curve.len() {
        let seg = quad::integrate(|t| curve.speed(t), curve.t[i - 1], curve.t[i], &opts)?.value;
        if seg <= 0.0 {
            return Err(Error::Domain(format!(
                "profile curve degenerates between t = {} and t = {} (zero arc length)",
                curve.t[i - 1],
                curve.t[i]
            )));
        }
        sigma += seg;
        samples.push((sigma, curve.x[i], curve.z[i]));
    }
    ProfileCurve::new(&samples)
}

/// Build the sphere-of-revolution measure `phi(t) = x(t)` from a unit-speed
/// profile curve, on the open parameter range.
pub fn measure_from_profile(curve: &ProfileCurve) -> Result<GeodesicMeasure> {
    for i in 1..curve.len() - 1 {
        if curve.x[i] <= 0.0 {
            return Err(Error::Domain(format!(
                "profile distance to the axis must be positive away from the endpoints; x = {} at t = {}",
                curve.x[i], curve.t[i]
            )));
        }
    }
    // light unit-speed sanity check at interior samples (full accuracy is the
    // caller's responsibility via reparametrize_arc_length)
    for i in 1..curve.len() - 1 {
        let v = curve.speed(curve.t[i]);
        if (v - 1.0).abs() > 1e-3 {
            return Err(Error::Domain(format!(
                "profile curve is not unit speed (|gamma'| = {v} at t = {}); re-parametrize by arc length first",
                curve.t[i]
            )));
        }
    }
    let (t0, t1) = curve.t_range();
    let xs = Arc::clone(&curve.x_spline);
    let xs_d = Arc::clone(&curve.x_spline);
    Ok(GeodesicMeasure::new(
        Interval::open(t0, t1),
        scalar_map(move |t: f64| xs.eval(t)),
        scalar_map(move |t: f64| xs_d.eval_deriv(t)),
        format!("profile({} samples on [{t0}, {t1}])", curve.len()),
    ))
}
