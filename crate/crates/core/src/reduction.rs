//! The change of variables at the heart of the reduction: with a base point
//! `r0` in the interior of the measure domain,
//!
//! ```text
//!     s = J(r) = int_{r0}^{r} dt / phi(t),
//! ```
//!
//! so that `u(r) = z(J(r))` turns the radial equation
//! `u'' + (phi'/phi) u' + b f(u) = 0` into `z'' + q(s) f(z) = 0` with
//! `q(s) = b(r(s)) phi(r(s))^2`.
//!
//! `J` is tabulated lazily in both directions from `r0` as knots
//! `(r, s, ds/dr)`; between knots both `J` and its inverse are read off a
//! cubic Hermite segment whose midpoint error is kept below the build
//! tolerance. The table only ever grows, so an instance can be shared across
//! threads behind an `Arc`.

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::interp::{hermite, hermite_deriv, CubicSpline};
use crate::interval::{Bound, EndSide};
use crate::measures::{scalar_map, GeodesicMeasure, ScalarMap};
use crate::quad::{self, QuadOptions};

const KNOT_CAP: usize = 1_000_000;
/// Accepted extension steps without progress in `s` before the target is
/// declared unreachable.
const STALL_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Knot {
    r: f64,
    s: f64,
    dsdr: f64,
}

#[derive(Debug)]
struct KnotTable {
    /// knots with r >= r0, ascending in r (first entry is the base knot)
    up: Vec<Knot>,
    /// knots with r <= r0, descending in r (first entry is the base knot)
    down: Vec<Knot>,
    /// current step-size hints
    h_up: f64,
    h_down: f64,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    R(f64),
    S(f64),
}

/// Thresholds for classifying the tail of the partial integrals of `1/phi`.
#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    /// sustained increment ratio below this => geometric tail, convergent
    pub ratio_convergent: f64,
    /// sustained increment ratio at or above this => divergent
    pub ratio_divergent: f64,
    /// growth of the partial integral over the window that counts as
    /// unambiguous divergence on its own
    pub growth_threshold: f64,
    /// window growth below `cauchy_tol * max(1, |partial|)` counts as
    /// numerically converged
    pub cauchy_tol: f64,
    /// number of trailing increments examined
    pub window: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            ratio_convergent: 0.95,
            ratio_divergent: 0.99,
            growth_threshold: 10.0,
            cauchy_tol: 1e-10,
            window: 12,
        }
    }
}

/// Result of marching partial integrals of `1/phi` towards one end of the
/// measure domain.
#[derive(Debug, Clone)]
pub struct ImageProbe {
    pub side: EndSide,
    /// `Some(true)`: the integral diverges, the image of `J` is unbounded on
    /// this side. `Some(false)`: it converges; `estimate` bounds the image.
    /// `None`: the tail behavior was not clear within the probe range.
    pub divergent: Option<bool>,
    /// signed bound (or last partial value) of `J` on this side
    pub estimate: f64,
    /// `(r_k, J(r_k))` partial integrals along the march
    pub samples: Vec<(f64, f64)>,
}

/// Classify a sequence of magnitudes of partial integrals; returns the
/// divergence verdict and an (unsigned) image-bound estimate.
pub fn classify_partials(partials: &[f64], opts: &ProbeOptions) -> (Option<bool>, f64) {
    let n = partials.len();
    let w = opts.window;
    if n < w + 2 {
        return (None, partials.last().copied().unwrap_or(f64::NAN));
    }
    let last = partials[n - 1];
    let window_growth = last - partials[n - 1 - w];
    if window_growth.abs() <= opts.cauchy_tol * last.abs().max(1.0) {
        return (Some(false), last);
    }
    let mut ratios = Vec::with_capacity(w);
    for k in (n - w)..n {
        let d1 = partials[k] - partials[k - 1];
        let d0 = partials[k - 1] - partials[k - 2];
        if d0 <= 0.0 || d1 < 0.0 {
            return (None, last);
        }
        ratios.push(d1 / d0);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_ratio <= opts.ratio_convergent {
        let d_last = partials[n - 1] - partials[n - 2];
        let tail = d_last * max_ratio / (1.0 - max_ratio);
        return (Some(false), last + tail);
    }
    if min_ratio >= opts.ratio_divergent || window_growth >= opts.growth_threshold {
        return (Some(true), f64::INFINITY);
    }
    (None, last)
}

/// Integral of `1/phi` over a segment, in either orientation.
///
/// Near a finite domain endpoint `E` the integration runs in the variable
/// `x = ln |t - E|`: floating-point jitter of quadrature nodes is then
/// relative to the distance from the endpoint, so the blow-up of `1/phi`
/// there stays resolvable. Away from finite ends plain `t` is used.
fn inv_phi_integral(m: &GeodesicMeasure, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    let dom = m.domain();
    let mid = 0.5 * (a + b);
    let mut nearest: Option<(f64, f64, bool)> = None; // (distance, endpoint, is_upper)
    if let Bound::Finite(e) = dom.hi {
        nearest = Some((e - mid, e, true));
    }
    if let Bound::Finite(e) = dom.lo {
        let d = mid - e;
        if nearest.map_or(true, |(nd, _, _)| d < nd) {
            nearest = Some((d, e, false));
        }
    }
    match nearest {
        Some((dist, e, upper)) if dist < 0.25 * e.abs().max(1.0) => {
            if upper {
                let (xa, xb) = ((e - a).ln(), (e - b).ln());
                let q = quad::integrate(
                    |x| {
                        let d = x.exp();
                        d / m.value_at_distance(EndSide::Upper, d)
                    },
                    xa,
                    xb,
                    opts,
                )?;
                Ok(-q.value)
            } else {
                let (xa, xb) = ((a - e).ln(), (b - e).ln());
                let q = quad::integrate(
                    |x| {
                        let d = x.exp();
                        d / m.value_at_distance(EndSide::Lower, d)
                    },
                    xa,
                    xb,
                    opts,
                )?;
                Ok(q.value)
            }
        }
        _ => Ok(quad::integrate(|t| 1.0 / m.value_unchecked(t), a, b, opts)?.value),
    }
}

/// March geometric sample points from `r0` towards one end of the domain of
/// `measure`, accumulating the partial integrals of `1/phi`, and classify
/// whether `J` stays bounded on that side.
pub fn probe_image(
    measure: &GeodesicMeasure,
    r0: f64,
    side: EndSide,
    steps: usize,
    opts: &ProbeOptions,
) -> Result<ImageProbe> {
    if !measure.domain().contains(r0) {
        return Err(Error::Domain(format!(
            "base point r0 = {r0} outside the measure domain {}",
            measure.domain().describe()
        )));
    }
    let steps = steps.max(opts.window + 4);
    let bound = match side {
        EndSide::Upper => measure.domain().hi,
        EndSide::Lower => measure.domain().lo,
    };
    let qopts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_panels: 20_000 };
    let mut samples = Vec::with_capacity(steps);
    let mut partials = Vec::with_capacity(steps);
    let mut acc = 0.0f64; // |J| marching outward

    match bound {
        Bound::Finite(e) => {
            // halve the distance to the endpoint each step; the distances are
            // exact floats, so the march is immune to cancellation against `e`
            let mut d_prev = (e - r0).abs();
            for _ in 1..=steps {
                let d = 0.5 * d_prev;
                let seg = quad::integrate(
                    |x| {
                        let t = x.exp();
                        t / measure.value_at_distance(side, t)
                    },
                    d.ln(),
                    d_prev.ln(),
                    &qopts,
                );
                let Ok(seg) = seg else { break };
                if !seg.value.is_finite() {
                    break;
                }
                acc += seg.value;
                partials.push(acc);
                let (rk, signed) = match side {
                    EndSide::Upper => (e - d, acc),
                    EndSide::Lower => (e + d, -acc),
                };
                samples.push((rk, signed));
                d_prev = d;
            }
        }
        Bound::Unbounded => {
            let scale = r0.abs().max(1.0);
            let mut prev = r0;
            for k in 1..=steps {
                let rk = match side {
                    EndSide::Upper => r0 + scale * (2f64.powi(k as i32) - 1.0),
                    EndSide::Lower => r0 - scale * (2f64.powi(k as i32) - 1.0),
                };
                let (a, b) = if side == EndSide::Upper { (prev, rk) } else { (rk, prev) };
                let Ok(seg) = inv_phi_integral(measure, a, b, &qopts) else { break };
                if !seg.is_finite() {
                    break;
                }
                acc += seg.abs();
                partials.push(acc);
                let signed = if side == EndSide::Upper { acc } else { -acc };
                samples.push((rk, signed));
                prev = rk;
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Numeric(format!(
            "image probe could not integrate 1/phi near the {side:?} end of {}",
            measure.domain().describe()
        )));
    }
    let (divergent, magnitude) = classify_partials(&partials, opts);
    let estimate = match side {
        EndSide::Upper => magnitude,
        EndSide::Lower => -magnitude,
    };
    Ok(ImageProbe { side, divergent, estimate, samples })
}

/// Lazily tabulated bidirectional map between the radial variable `r` and
/// the reduced variable `s = J(r)`.
pub struct ChangeOfVariables {
    measure: GeodesicMeasure,
    r0: f64,
    tol: f64,
    quad_opts: QuadOptions,
    table: RwLock<KnotTable>,
    probe_lower: ImageProbe,
    probe_upper: ImageProbe,
}

impl fmt::Debug for ChangeOfVariables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.table.read().unwrap();
        f.debug_struct("ChangeOfVariables")
            .field("measure", &self.measure)
            .field("r0", &self.r0)
            .field("tol", &self.tol)
            .field("knots", &(t.up.len() + t.down.len() - 1))
            .finish()
    }
}

/// Validate inputs and set up the (initially single-knot) table, probing both
/// ends of the domain to classify the image of `J`.
pub fn build_change_of_variables(
    measure: &GeodesicMeasure,
    r0: f64,
    tol: f64,
) -> Result<ChangeOfVariables> {
    if !(tol > 1e-14 && tol < 1e-2) {
        return Err(Error::Domain(format!(
            "change-of-variables tolerance must lie in (1e-14, 1e-2), got {tol}"
        )));
    }
    if !measure.domain().contains(r0) {
        return Err(Error::Domain(format!(
            "base point r0 = {r0} outside the measure domain {}",
            measure.domain().describe()
        )));
    }
    let (phi0, _) = measure.eval_measure(r0)?;
    if !phi0.is_finite() || phi0 <= 0.0 {
        return Err(Error::Domain(format!(
            "measure must be positive and finite at the base point; phi({r0}) = {phi0}"
        )));
    }
    let fallback = |side: EndSide| ImageProbe {
        side,
        divergent: None,
        estimate: f64::NAN,
        samples: Vec::new(),
    };
    let popts = ProbeOptions::default();
    let probe_lower = probe_image(measure, r0, EndSide::Lower, 48, &popts).unwrap_or_else(|_| fallback(EndSide::Lower));
    let probe_upper = probe_image(measure, r0, EndSide::Upper, 48, &popts).unwrap_or_else(|_| fallback(EndSide::Upper));
    let base = Knot { r: r0, s: 0.0, dsdr: 1.0 / phi0 };
    let h0 = 0.05 * r0.abs().max(1.0);
    Ok(ChangeOfVariables {
        measure: measure.clone(),
        r0,
        tol,
        quad_opts: QuadOptions { abs_tol: tol / 256.0, rel_tol: 1e-13, max_panels: 20_000 },
        table: RwLock::new(KnotTable { up: vec![base], down: vec![base], h_up: h0, h_down: h0 }),
        probe_lower,
        probe_upper,
    })
}

impl ChangeOfVariables {
    pub fn base_point(&self) -> f64 {
        self.r0
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn measure(&self) -> &GeodesicMeasure {
        &self.measure
    }

    pub fn probe(&self, side: EndSide) -> &ImageProbe {
        match side {
            EndSide::Lower => &self.probe_lower,
            EndSide::Upper => &self.probe_upper,
        }
    }

    /// Number of tabulated knots so far (the base knot counts once).
    pub fn knots(&self) -> usize {
        let t = self.table.read().unwrap();
        t.up.len() + t.down.len() - 1
    }

    /// `s`-range currently covered by the table without further extension.
    pub fn covered(&self) -> (f64, f64) {
        let t = self.table.read().unwrap();
        (t.down.last().unwrap().s, t.up.last().unwrap().s)
    }

    /// `s = J(r)`.
    pub fn forward(&self, r: f64) -> Result<f64> {
        if !self.measure.domain().contains(r) {
            return Err(Error::Domain(format!(
                "r = {r} outside the measure domain {}",
                self.measure.domain().describe()
            )));
        }
        if r == self.r0 {
            return Ok(0.0);
        }
        loop {
            {
                let t = self.table.read().unwrap();
                if let Some(seg) = t.locate_r(r) {
                    let (k0, k1) = seg;
                    return Ok(hermite(k0.r, k1.r, k0.s, k1.s, k0.dsdr, k1.dsdr, r));
                }
            }
            let mut t = self.table.write().unwrap();
            self.extend(&mut t, r >= self.r0, Target::R(r))?;
        }
    }

    /// `r = J^{-1}(s)`; errors when `s` is outside the image of `J`.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::Domain(format!("s = {s} is not a finite reduced coordinate")));
        }
        if s == 0.0 {
            return Ok(self.r0);
        }
        loop {
            {
                let t = self.table.read().unwrap();
                if let Some((k0, k1)) = t.locate_s(s) {
                    return Ok(invert_segment(&k0, &k1, s));
                }
            }
            let mut t = self.table.write().unwrap();
            self.extend(&mut t, s > 0.0, Target::S(s))?;
        }
    }

    /// `ds/dr = 1/phi(r)` of the map itself.
    pub fn forward_deriv(&self, r: f64) -> Result<f64> {
        let (phi, _) = self.measure.eval_measure(r)?;
        Ok(1.0 / phi)
    }

    /// Grow the table in one direction until the target is tabulated.
    fn extend(&self, t: &mut KnotTable, up: bool, target: Target) -> Result<()> {
        let domain = self.measure.domain();
        if let Target::R(r) = target {
            debug_assert!(domain.contains(r));
        }
        let mut stall = 0usize;
        loop {
            let last = if up { *t.up.last().unwrap() } else { *t.down.last().unwrap() };
            let reached = match target {
                Target::R(r) => {
                    if up {
                        last.r >= r
                    } else {
                        last.r <= r
                    }
                }
                Target::S(s) => {
                    if up {
                        last.s >= s
                    } else {
                        last.s <= s
                    }
                }
            };
            if reached {
                return Ok(());
            }
            if t.up.len() + t.down.len() >= KNOT_CAP {
                return Err(Error::Numeric(format!(
                    "change-of-variables table exceeded {KNOT_CAP} knots before reaching {target:?}"
                )));
            }

            let scale = last.r.abs().max(1.0);
            let cap = match (up, if up { domain.hi } else { domain.lo }) {
                (true, Bound::Finite(b)) => 0.5 * (b - last.r),
                (false, Bound::Finite(a)) => 0.5 * (last.r - a),
                (_, Bound::Unbounded) => 0.5 * scale,
            };
            let h_floor = 1e-13 * scale;
            let hint = if up { t.h_up } else { t.h_down };
            let mut h = hint.min(cap);

            let knot = loop {
                if h < h_floor {
                    return match target {
                        Target::S(s) => Err(self.image_error(s, last)),
                        Target::R(r) => Err(Error::Numeric(format!(
                            "cannot resolve the change of variables between r = {} and r = {r}; \
                             the measure is too close to singular there",
                            last.r
                        ))),
                    };
                }
                let r1 = if up { last.r + h } else { last.r - h };
                let rm = if up { last.r + 0.5 * h } else { last.r - 0.5 * h };
                let full = inv_phi_integral(&self.measure, last.r, r1, &self.quad_opts)?;
                let half = inv_phi_integral(&self.measure, last.r, rm, &self.quad_opts)?;
                let (phi1, _) = self.measure.eval_measure(r1)?;
                let d1 = 1.0 / phi1;
                if !d1.is_finite() || !full.is_finite() {
                    h *= 0.5;
                    continue;
                }
                let s1 = last.s + full;
                let sm = last.s + half;
                let sm_interp = hermite(last.r, r1, last.s, s1, last.dsdr, d1, rm);
                if (sm_interp - sm).abs() <= self.tol {
                    let grow = if (sm_interp - sm).abs() <= self.tol / 64.0 { 2.0 } else { 1.0 };
                    if up {
                        t.h_up = h * grow;
                    } else {
                        t.h_down = h * grow;
                    }
                    break Knot { r: r1, s: s1, dsdr: d1 };
                }
                h *= 0.5;
            };

            if matches!(target, Target::S(_)) {
                let progressed = if up { knot.s > last.s } else { knot.s < last.s };
                if progressed {
                    stall = 0;
                } else {
                    stall += 1;
                    if stall >= STALL_LIMIT {
                        if let Target::S(s) = target {
                            return Err(self.image_error(s, knot));
                        }
                    }
                }
            }
            if up {
                t.up.push(knot);
            } else {
                t.down.push(knot);
            }
        }
    }

    fn image_error(&self, s: f64, nearest: Knot) -> Error {
        let probe = if s > 0.0 { &self.probe_upper } else { &self.probe_lower };
        let hint = match probe.divergent {
            Some(false) => format!("; the image ends near s = {}", probe.estimate),
            _ => String::new(),
        };
        Error::Domain(format!(
            "s = {s} is outside the image of the change of variables (reached s = {} at r = {}{hint})",
            nearest.s, nearest.r
        ))
    }
}

impl KnotTable {
    /// Segment of the table covering `r`, if already tabulated.
    fn locate_r(&self, r: f64) -> Option<(Knot, Knot)> {
        if r >= self.up[0].r {
            let up = &self.up;
            if r > up.last().unwrap().r {
                return None;
            }
            let i = up.partition_point(|k| k.r < r).max(1);
            Some((up[i - 1], up[i]))
        } else {
            let down = &self.down;
            if r < down.last().unwrap().r {
                return None;
            }
            let i = down.partition_point(|k| k.r > r).max(1);
            Some((down[i - 1], down[i]))
        }
    }

    fn locate_s(&self, s: f64) -> Option<(Knot, Knot)> {
        if s >= 0.0 {
            let up = &self.up;
            if s > up.last().unwrap().s {
                return None;
            }
            let i = up.partition_point(|k| k.s < s).max(1);
            Some((up[i - 1], up[i]))
        } else {
            let down = &self.down;
            if s < down.last().unwrap().s {
                return None;
            }
            let i = down.partition_point(|k| k.s > s).max(1);
            Some((down[i - 1], down[i]))
        }
    }
}

/// Solve the Hermite segment for `J(r) = s` with a bracketed Newton
/// iteration; `ds/dr > 0` makes the root unique on a well-resolved segment.
fn invert_segment(k0: &Knot, k1: &Knot, s: f64) -> f64 {
    if k0.s == k1.s {
        // a flat band: J is constant to machine precision here
        return k0.r;
    }
    let (mut lo, mut hi) = if k0.r < k1.r { (k0.r, k1.r) } else { (k1.r, k0.r) };
    let mut r = k0.r + (k1.r - k0.r) * ((s - k0.s) / (k1.s - k0.s));
    if !(r >= lo && r <= hi) {
        r = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let val = hermite(k0.r, k1.r, k0.s, k1.s, k0.dsdr, k1.dsdr, r) - s;
        if val == 0.0 {
            break;
        }
        // J increases with r on the segment
        if val > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let d = hermite_deriv(k0.r, k1.r, k0.s, k1.s, k0.dsdr, k1.dsdr, r);
        let mut next = if d > 0.0 { r - val / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 4.0 * f64::EPSILON * r.abs().max(1.0) {
            r = next;
            break;
        }
        r = next;
    }
    r
}

/// Right-hand-side nonlinearity `f` with its derivative, shared and
/// immutable.
#[derive(Clone)]
pub struct Nonlinearity {
    f: ScalarMap,
    df: ScalarMap,
    label: String,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "Nonlinearity({})", self.label)
    }
}

impl Nonlinearity {
    /// `f(z) = z^p`
    pub fn power(p: f64) -> Self {
        Nonlinearity {
            f: scalar_map(move |z: f64| z.powf(p)),
            df: scalar_map(move |z: f64| if p == 0.0 { 0.0 } else { p * z.powf(p - 1.0) }),
            label: format!("power({p})"),
        }
    }

    /// `f(z) = z^p (1 + ln(1 + z^2)/2)`: a power dressed with a smooth,
    /// slowly varying logarithmic factor.
    pub fn log_power(p: f64) -> Self {
        Nonlinearity {
            f: scalar_map(move |z: f64| z.powf(p) * (1.0 + 0.5 * (1.0 + z * z).ln())),
            df: scalar_map(move |z: f64| {
                let dressed = 1.0 + 0.5 * (1.0 + z * z).ln();
                let dp = if p == 0.0 { 0.0 } else { p * z.powf(p - 1.0) * dressed };
                dp + z.powf(p) * z / (1.0 + z * z)
            }),
            label: format!("log_power({p})"),
        }
    }

    /// `f = 1`: the linear (Poisson-type) right-hand side.
    pub fn constant() -> Self {
        Nonlinearity {
            f: scalar_map(|_| 1.0),
            df: scalar_map(|_| 0.0),
            label: "constant".into(),
        }
    }

    pub fn from_fns(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        Nonlinearity { f: scalar_map(f), df: scalar_map(df), label: label.into() }
    }

    /// Cubic-spline interpolant through `(z_k, f(z_k))` samples with strictly
    /// increasing nonnegative abscissae; evaluation outside the sampled range
    /// continues the end cubics.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Format(format!(
                "tabulated nonlinearity needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let mut zs = Vec::with_capacity(samples.len());
        let mut fs = Vec::with_capacity(samples.len());
        for (i, &(z, f)) in samples.iter().enumerate() {
            if !z.is_finite() || !f.is_finite() {
                return Err(Error::Format(format!("non-finite nonlinearity sample at index {i}")));
            }
            if z < 0.0 {
                return Err(Error::Format(format!(
                    "nonlinearity samples must have z >= 0, got z = {z} at index {i}"
                )));
            }
            if let Some(&prev) = zs.last() {
                if z <= prev {
                    return Err(Error::Format(format!(
                        "nonlinearity samples must increase strictly in z; index {i} has z = {z} after {prev}"
                    )));
                }
            }
            zs.push(z);
            fs.push(f);
        }
        let n = samples.len();
        let spline = Arc::new(CubicSpline::new(zs, fs)?);
        let sp = Arc::clone(&spline);
        let sp_d = Arc::clone(&spline);
        Ok(Nonlinearity {
            f: scalar_map(move |z: f64| sp.eval(z)),
            df: scalar_map(move |z: f64| sp_d.eval_deriv(z)),
            label: format!("table({n} samples)"),
        })
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.f)(z)
    }

    pub fn deriv(&self, z: f64) -> f64 {
        (self.df)(z)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The coefficient `q` of the reduced equation, either assembled from a
/// geometry plus `b(r)`, or given directly as a function of `s`.
#[derive(Clone)]
pub enum Coefficient {
    Assembled { cv: Arc<ChangeOfVariables>, b: ScalarMap },
    Direct(ScalarMap),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Assembled { cv, .. } => f.debug_tuple("Assembled").field(cv).finish(),
            Coefficient::Direct(_) => f.write_str("Direct(..)"),
        }
    }
}

impl Coefficient {
    /// `q(s) = b(r(s)) phi(r(s))^2` in the assembled case.
    pub fn q(&self, s: f64) -> Result<f64> {
        match self {
            Coefficient::Assembled { cv, b } => {
                let r = cv.inverse(s)?;
                let (phi, _) = cv.measure().eval_measure(r)?;
                Ok(b(r) * phi * phi)
            }
            Coefficient::Direct(q) => Ok(q(s)),
        }
    }

    pub fn change_of_variables(&self) -> Option<&Arc<ChangeOfVariables>> {
        match self {
            Coefficient::Assembled { cv, .. } => Some(cv),
            Coefficient::Direct(_) => None,
        }
    }
}

/// The reduced one-dimensional problem `z'' + q(s) f(z) = 0`.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    coeff: Coefficient,
    f: Nonlinearity,
}

impl ReducedProblem {
    /// Wrap an explicit coefficient `q(s)`; no sign constraint is imposed
    /// here, which is what manufactured-solution tests need.
    pub fn from_coefficient(q: ScalarMap, f: Nonlinearity) -> Self {
        ReducedProblem { coeff: Coefficient::Direct(q), f }
    }

    pub fn q(&self, s: f64) -> Result<f64> {
        self.coeff.q(s)
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn coefficient(&self) -> &Coefficient {
        &self.coeff
    }
}

/// Assemble the reduced problem for `Delta u + b(r) f(u) = 0` over the given
/// geometry. `b` must be finite and positive at the base point so that the
/// reduced equation is genuinely semilinear near `s = 0`.
pub fn assemble_reduced(
    cv: Arc<ChangeOfVariables>,
    b: ScalarMap,
    f: Nonlinearity,
) -> Result<ReducedProblem> {
    let b0 = b(cv.base_point());
    if !b0.is_finite() || b0 <= 0.0 {
        return Err(Error::Domain(format!(
            "coefficient b must be finite and positive at the base point; b({}) = {b0}",
            cv.base_point()
        )));
    }
    Ok(ReducedProblem {
        coeff: Coefficient::Assembled { cv, b },
        f,
    })
}
