//! The radial Laplace-Beltrami operator and residual checks in the original
//! variable. This side of the library never sees the change of variables:
//! it applies `Delta u = u'' + (phi'/phi) u'` (equivalently
//! `(phi u')' / phi`) directly, which is what makes it an independent check
//! on solutions produced in the reduced variable.

use crate::error::{Error, Result};
use crate::measures::{GeodesicMeasure, ScalarMap};
use crate::output::csv_line;
use crate::reduction::Nonlinearity;

/// A radial function given by closures for `u`, `u'`, `u''`.
#[derive(Clone)]
pub struct SmoothRadial {
    u: ScalarMap,
    du: ScalarMap,
    d2u: ScalarMap,
}

impl SmoothRadial {
    pub fn new(
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothRadial {
            u: crate::measures::scalar_map(u),
            du: crate::measures::scalar_map(du),
            d2u: crate::measures::scalar_map(d2u),
        }
    }

    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        ((self.u)(r), (self.du)(r), (self.d2u)(r))
    }
}

/// `Delta u` at radius `r` for a smooth radial function.
pub fn radial_apply(measure: &GeodesicMeasure, fun: &SmoothRadial, r: f64) -> Result<f64> {
    let (phi, dphi) = measure.eval_measure(r)?;
    let (_, du, d2u) = fun.eval(r);
    Ok(d2u + (dphi / phi) * du)
}

/// A radial function sampled on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    r: Vec<f64>,
    u: Vec<f64>,
}

impl RadialFunction {
    pub fn new(r: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if r.len() != u.len() {
            return Err(Error::Format(format!(
                "grid and values have different lengths ({} vs {})",
                r.len(),
                u.len()
            )));
        }
        if r.len() < 5 {
            return Err(Error::Format(format!(
                "a sampled radial function needs at least 5 nodes, got {}",
                r.len()
            )));
        }
        for i in 0..r.len() {
            if !r[i].is_finite() || !u[i].is_finite() {
                return Err(Error::Format(format!("non-finite sample at node {i}")));
            }
            if i > 0 && r[i] <= r[i - 1] {
                return Err(Error::Format(format!(
                    "grid must increase strictly; node {i} has r = {} after {}",
                    r[i],
                    r[i - 1]
                )));
            }
        }
        Ok(RadialFunction { r, u })
    }

    pub fn grid(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualRow {
    pub r: f64,
    pub u: f64,
    pub residual: f64,
    /// set where the measure is too degenerate for the residual to mean
    /// anything (phi below 1e-12 of its max over the grid)
    pub excluded: bool,
}

#[derive(Debug, Clone)]
pub struct ResidualTable {
    pub rows: Vec<ResidualRow>,
    /// sup of |b phi f(u)| over the non-excluded nodes: the natural scale
    /// for the residual
    pub forcing_sup: f64,
}

impl ResidualTable {
    /// Sup of |residual| over the central `interior_fraction` of the rows
    /// (non-excluded), divided by the forcing scale. Rows near the ends use
    /// one-sided differences of lower quality, so verification reads the
    /// interior; the trim counts nodes, which keeps its meaning on
    /// non-uniform grids such as lifted geometric ones.
    pub fn scaled_sup(&self, interior_fraction: f64) -> f64 {
        let frac = interior_fraction.clamp(0.0, 1.0);
        let n = self.rows.len();
        let margin = ((1.0 - frac) * 0.5 * n as f64).floor() as usize;
        let sup = self.rows[margin..n - margin]
            .iter()
            .filter(|row| !row.excluded)
            .map(|row| row.residual.abs())
            .fold(0.0f64, f64::max);
        if self.forcing_sup > 0.0 {
            sup / self.forcing_sup
        } else {
            sup
        }
    }

    /// Unscaled sup over all non-excluded rows.
    pub fn sup(&self) -> f64 {
        self.rows
            .iter()
            .filter(|row| !row.excluded)
            .map(|row| row.residual.abs())
            .fold(0.0f64, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,residual,excluded_flag\n");
        for row in &self.rows {
            let cells = vec![
                crate::output::format_float(row.r),
                crate::output::format_float(row.u),
                crate::output::format_float(row.residual),
                (row.excluded as u8).to_string(),
            ];
            out.push_str(&csv_line(&cells));
            out.push('\n');
        }
        out
    }
}

/// First and second derivative of the parabola through three points,
/// evaluated at `at`.
fn parabola_derivs(x: [f64; 3], y: [f64; 3], at: f64) -> (f64, f64) {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let c2 = (d12 - d01) / (x[2] - x[0]); // half the second derivative
    let du = d01 + c2 * (2.0 * at - x[0] - x[1]);
    (du, 2.0 * c2)
}

/// Residual of `div(phi grad u) + b phi f(u) = 0` on the sampled grid, in
/// conservative (staggered-flux) form:
///
/// ```text
///   w_{i+1/2} = phi(r_{i+1/2}) (u_{i+1} - u_i) / (r_{i+1} - r_i)
///   res_i     = (w_{i+1/2} - w_{i-1/2}) / ((r_{i+1} - r_{i-1})/2)
///               + b(r_i) phi(r_i) f(u_i)
/// ```
///
/// Endpoints fall back to the non-conservative form with parabola
/// derivatives. Nodes where `f(u)` or `b` fail to evaluate produce an
/// `Evaluation` error carrying all offending node indices.
pub fn divergence_residual(
    measure: &GeodesicMeasure,
    b: &ScalarMap,
    f: &Nonlinearity,
    table: &RadialFunction,
) -> Result<ResidualTable> {
    let r = table.grid();
    let u = table.values();
    let n = r.len();
    for (i, &ri) in r.iter().enumerate() {
        if !measure.domain().contains(ri) {
            return Err(Error::Domain(format!(
                "grid node {i} (r = {ri}) lies outside the measure domain {}",
                measure.domain().describe()
            )));
        }
    }

    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    for &ri in r {
        let (p, dp) = measure.eval_measure(ri)?;
        phi.push(p);
        dphi.push(dp);
    }
    let phi_max = phi.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = 1e-12 * phi_max;

    let mut bad_nodes = Vec::new();
    let mut forcing = Vec::with_capacity(n);
    for i in 0..n {
        let bi = b(r[i]);
        let fi = f.eval(u[i]);
        let force = bi * phi[i] * fi;
        if !force.is_finite() {
            bad_nodes.push(i);
        }
        forcing.push(force);
    }
    if !bad_nodes.is_empty() {
        return Err(Error::Evaluation {
            message: "b phi f(u) is not finite on some grid nodes".into(),
            nodes: bad_nodes,
        });
    }

    // midpoint fluxes phi(r_{i+1/2}) * du
    let mut w = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let rm = 0.5 * (r[i] + r[i + 1]);
        let (pm, _) = measure.eval_measure(rm)?;
        w.push(pm * (u[i + 1] - u[i]) / (r[i + 1] - r[i]));
    }

    let mut rows = Vec::with_capacity(n);
    let mut forcing_sup = 0.0f64;
    for i in 0..n {
        let excluded = phi[i] < cutoff;
        let residual = if i == 0 || i == n - 1 {
            let j = if i == 0 { 0 } else { n - 3 };
            let (du, d2u) = parabola_derivs(
                [r[j], r[j + 1], r[j + 2]],
                [u[j], u[j + 1], u[j + 2]],
                r[i],
            );
            phi[i] * d2u + dphi[i] * du + forcing[i]
        } else {
            (w[i] - w[i - 1]) / (0.5 * (r[i + 1] - r[i - 1])) + forcing[i]
        };
        if !excluded {
            forcing_sup = forcing_sup.max(forcing[i].abs());
        }
        rows.push(ResidualRow { r: r[i], u: u[i], residual, excluded });
    }
    Ok(ResidualTable { rows, forcing_sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{builtin_measure, scalar_map, BuiltinMeasure};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn classic_euclidean_identities() {
        // Delta r^2 = 2n on R^n; 1/r is harmonic on R^3 away from 0
        let m = builtin_measure(BuiltinMeasure::Euclidean, 3, false).unwrap();
        let sq = SmoothRadial::new(|r| r * r, |r| 2.0 * r, |_| 2.0);
        let harm = SmoothRadial::new(|r| 1.0 / r, |r| -1.0 / (r * r), |r| 2.0 / (r * r * r));
        for r in [0.3, 1.0, 7.5] {
            assert_abs_diff_eq!(radial_apply(&m, &sq, r).unwrap(), 6.0, epsilon = 1e-12);
            assert_abs_diff_eq!(radial_apply(&m, &harm, r).unwrap(), 0.0, epsilon = 1e-12);
        }
        let m5 = builtin_measure(BuiltinMeasure::Euclidean, 5, true).unwrap();
        assert_abs_diff_eq!(radial_apply(&m5, &sq, 2.0).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_and_hyperbolic_eigenfunctions() {
        // on S^2: Delta cos r = -2 cos r; on H^2: Delta cosh r = 2 cosh r
        let s = builtin_measure(BuiltinMeasure::Sphere, 2, false).unwrap();
        let cosr = SmoothRadial::new(f64::cos, |r| -r.sin(), |r| -r.cos());
        for r in [0.4, 1.3, 2.8] {
            assert_relative_eq!(radial_apply(&s, &cosr, r).unwrap(), -2.0 * r.cos(), max_relative = 1e-12);
        }
        let h = builtin_measure(BuiltinMeasure::Hyperbolic, 2, false).unwrap();
        let coshr = SmoothRadial::new(f64::cosh, f64::sinh, f64::cosh);
        for r in [0.4, 1.3, 2.8] {
            assert_relative_eq!(radial_apply(&h, &coshr, r).unwrap(), 2.0 * r.cosh(), max_relative = 1e-12);
        }
    }

    fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn quadratic_on_cylinder_is_exact() {
        // phi = 1, u = 5 - r^2: div term is exactly -2 on a uniform grid,
        // and b f(u) = 2 cancels it at every node including the one-sided ends
        let m = builtin_measure(BuiltinMeasure::FlatCylinder, 2, false).unwrap();
        let r = uniform_grid(-1.0, 3.0, 41);
        let u: Vec<f64> = r.iter().map(|&x| 5.0 - x * x).collect();
        let table = RadialFunction::new(r, u).unwrap();
        let res = divergence_residual(&m, &scalar_map(|_| 2.0), &Nonlinearity::constant(), &table).unwrap();
        for row in &res.rows {
            assert!(!row.excluded);
            assert_abs_diff_eq!(row.residual, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(res.forcing_sup, 2.0, epsilon = 1e-15);
    }

    fn manufactured_residual(n: usize) -> f64 {
        // u = exp(-r^2) solves Delta u + b u = 0 on R^3 with b = 6 - 4 r^2
        let m = builtin_measure(BuiltinMeasure::Euclidean, 3, false).unwrap();
        let r = uniform_grid(0.1, 0.9, n);
        let u: Vec<f64> = r.iter().map(|&x| (-x * x).exp()).collect();
        let table = RadialFunction::new(r, u).unwrap();
        let res = divergence_residual(
            &m,
            &scalar_map(|x: f64| 6.0 - 4.0 * x * x),
            &Nonlinearity::power(1.0),
            &table,
        )
        .unwrap();
        res.scaled_sup(0.9)
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let coarse = manufactured_residual(200);
        let fine = manufactured_residual(400);
        assert!(coarse < 1e-4, "coarse residual too large: {coarse}");
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "expected ~4x decay, got {ratio}");
    }

    #[test]
    fn degenerate_measure_nodes_are_flagged() {
        let m = builtin_measure(BuiltinMeasure::Euclidean, 3, false).unwrap();
        let mut r = vec![1e-9, 2e-9, 3e-9];
        r.extend(uniform_grid(0.5, 1.0, 20));
        let u: Vec<f64> = r.iter().map(|&x| 1.0 + x).collect();
        let table = RadialFunction::new(r, u).unwrap();
        let res = divergence_residual(&m, &scalar_map(|_| 1.0), &Nonlinearity::constant(), &table).unwrap();
        assert!(res.rows[0].excluded && res.rows[1].excluded && res.rows[2].excluded);
        assert!(res.rows.iter().skip(3).all(|row| !row.excluded));
        assert!(res.scaled_sup(1.0).is_finite());
    }

    #[test]
    fn evaluation_failures_list_nodes() {
        let m = builtin_measure(BuiltinMeasure::FlatCylinder, 2, false).unwrap();
        let r = uniform_grid(0.0, 1.0, 6);
        let u = vec![1.0, 0.5, -0.25, 0.5, -1.0, 1.0];
        let table = RadialFunction::new(r, u).unwrap();
        let err = divergence_residual(&m, &scalar_map(|_| 1.0), &Nonlinearity::power(0.5), &table).unwrap_err();
        match err {
            Error::Evaluation { nodes, .. } => assert_eq!(nodes, vec![2, 4]),
            other => panic!("expected Evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_function_validation() {
        assert!(matches!(
            RadialFunction::new(vec![0.0, 1.0], vec![0.0, 1.0]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            RadialFunction::new(vec![0.0, 1.0, 1.0, 2.0, 3.0], vec![0.0; 5]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            RadialFunction::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.0, f64::NAN, 3.0, 4.0]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            RadialFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn grid_outside_domain_is_rejected() {
        let m = builtin_measure(BuiltinMeasure::Sphere, 2, false).unwrap();
        let r = uniform_grid(2.0, 4.0, 10); // crosses pi
        let u = vec![1.0; 10];
        let table = RadialFunction::new(r, u).unwrap();
        assert!(matches!(
            divergence_residual(&m, &scalar_map(|_| 1.0), &Nonlinearity::constant(), &table),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn csv_round_trip_shape() {
        let m = builtin_measure(BuiltinMeasure::FlatCylinder, 2, false).unwrap();
        let r = uniform_grid(0.0, 1.0, 5);
        let u: Vec<f64> = r.iter().map(|&x| 5.0 - x * x).collect();
        let table = RadialFunction::new(r, u).unwrap();
        let res = divergence_residual(&m, &scalar_map(|_| 2.0), &Nonlinearity::constant(), &table).unwrap();
        let csv = res.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "r,u,residual,excluded_flag");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].ends_with(",0"));
    }
}
