//! Piecewise-cubic interpolation: not-a-knot splines for sampled data and
//! Hermite segments for tables that carry derivatives.

use crate::error::{Error, Result};

/// Cubic spline with not-a-knot end conditions (single quadratic for three
/// points, chord for two). Stored in moment form.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the nodes
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Format(format!(
                "spline needs matching abscissae/ordinate lengths, got {} vs {}",
                n,
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::Format("spline needs at least two points".into()));
        }
        for i in 0..n {
            if !x[i].is_finite() || !y[i].is_finite() {
                return Err(Error::Format(format!("non-finite spline sample at index {i}")));
            }
            if i > 0 && x[i] <= x[i - 1] {
                return Err(Error::Format(format!(
                    "spline abscissae must increase strictly (index {i}: {} after {})",
                    x[i],
                    x[i - 1]
                )));
            }
        }
        let m = solve_moments(&x, &y);
        Ok(CubicSpline { x, y, m })
    }

    fn segment(&self, xq: f64) -> usize {
        // clamp to the end segments; extrapolation uses the boundary cubic
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= xq);
        k.clamp(1, n - 1) - 1
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = self.x[i + 1] - xq;
        let b = xq - self.x[i];
        self.m[i] * a * a * a / (6.0 * h)
            + self.m[i + 1] * b * b * b / (6.0 * h)
            + (self.y[i] - self.m[i] * h * h / 6.0) * a / h
            + (self.y[i + 1] - self.m[i + 1] * h * h / 6.0) * b / h
    }

    pub fn eval_deriv(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = self.x[i + 1] - xq;
        let b = xq - self.x[i];
        let slope = (self.y[i + 1] - self.y[i]) / h;
        -self.m[i] * a * a / (2.0 * h) + self.m[i + 1] * b * b / (2.0 * h) + slope
            - (self.m[i + 1] - self.m[i]) * h / 6.0
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

fn solve_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        return vec![0.0, 0.0];
    }
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 3 {
        // single quadratic through all three points
        let a2 = (d[1] - d[0]) / (x[2] - x[0]);
        return vec![2.0 * a2; 3];
    }

    // Tridiagonal system in the interior moments M_1..M_{n-2}; the end
    // moments follow from third-derivative continuity at x_1 and x_{n-2}.
    let k = n - 2;
    let mut lower = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for (row, i) in (1..n - 1).enumerate() {
        rhs[row] = d[i] - d[i - 1];
        if row == 0 {
            diag[row] = (h[0] + h[1]) * (h[0] + 2.0 * h[1]) / (6.0 * h[1]);
            upper[row] = (h[1] * h[1] - h[0] * h[0]) / (6.0 * h[1]);
        } else if row == k - 1 {
            let (ha, hb) = (h[n - 3], h[n - 2]);
            lower[row] = (ha * ha - hb * hb) / (6.0 * ha);
            diag[row] = (ha + hb) * (hb + 2.0 * ha) / (6.0 * ha);
        } else {
            lower[row] = h[i - 1] / 6.0;
            diag[row] = (h[i - 1] + h[i]) / 3.0;
            upper[row] = h[i] / 6.0;
        }
    }
    let interior = thomas(&lower, &diag, &upper, &rhs);

    let mut m = vec![0.0; n];
    m[1..n - 1].copy_from_slice(&interior);
    m[0] = m[1] + (h[0] / h[1]) * (m[1] - m[2]);
    m[n - 1] = m[n - 2] + (h[n - 2] / h[n - 3]) * (m[n - 2] - m[n - 3]);
    m
}

/// Thomas algorithm; `lower[0]` and `upper[last]` are ignored.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

/// Cubic Hermite value on `[x0, x1]` from endpoint values and derivatives.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, xq: f64) -> f64 {
    let h = x1 - x0;
    let t = (xq - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Derivative of the cubic Hermite segment at `xq`.
pub fn hermite_deriv(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, xq: f64) -> f64 {
    let h = x1 - x0;
    let t = (xq - x0) / h;
    let t2 = t * t;
    (6.0 * t2 - 6.0 * t) * (y0 - y1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (3.0 * t2 - 2.0 * t) * d1
}
