//! Solvers for the reduced two-point problem `z'' + q(s) f(z) = 0` on a
//! symmetric truncation `[-L, L]`, plus the lift back to the radial
//! variable. Three routes are kept deliberately independent of each other:
//! a Green-function quadrature for the linear problem, shooting with an
//! adaptive integrator, and finite-difference collocation with a damped
//! Newton iteration. Agreement between them is the main internal
//! consistency check.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interp::{thomas, CubicSpline};
use crate::laplacian::RadialFunction;
use crate::output::{csv_line, format_float};
use crate::quad::{integrate, QuadOptions};
use crate::reduction::{ChangeOfVariables, ReducedProblem};
use crate::rk::{advance, advance_plain, RkOptions, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    /// the reduced variable `s`
    Reduced,
    /// the original radial variable `r`
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LinearGreen,
    Shooting,
    SymmetricShooting,
    Collocation,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::LinearGreen => "green",
            Method::Shooting => "shooting",
            Method::SymmetricShooting => "symmetric-shooting",
            Method::Collocation => "collocation",
        }
    }
}

/// A symmetric truncation `[-L, L]` with a uniform grid and the Dirichlet
/// value imposed at both ends.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedDomain {
    pub half_length: f64,
    pub interior_nodes: usize,
    pub bc_value: f64,
}

impl TruncatedDomain {
    pub fn new(half_length: f64, interior_nodes: usize, bc_value: f64) -> Result<Self> {
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(Error::Format(format!(
                "half length must be finite and positive, got {half_length}"
            )));
        }
        if interior_nodes < 16 {
            return Err(Error::Format(format!(
                "need at least 16 interior nodes, got {interior_nodes}"
            )));
        }
        if !bc_value.is_finite() || bc_value < 0.0 {
            return Err(Error::Format(format!(
                "boundary value must be finite and nonnegative, got {bc_value}"
            )));
        }
        Ok(TruncatedDomain { half_length, interior_nodes, bc_value })
    }

    /// Uniform grid of `interior_nodes + 2` points, built mirror-symmetric
    /// so that `s_{n-1-i} = -s_i` exactly and `0` is a node whenever the
    /// count is odd.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.interior_nodes + 2;
        let l = self.half_length;
        let h = 2.0 * l / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if 2 * i + 1 == n {
                    0.0
                } else if 2 * i < n {
                    -l + i as f64 * h
                } else {
                    l - (n - 1 - i) as f64 * h
                }
            })
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.interior_nodes + 1) as f64
    }
}

/// A solution of the reduced (or lifted) problem sampled on a grid.
#[derive(Debug, Clone)]
pub struct SolutionProfile {
    pub variable: Variable,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub deriv: Vec<f64>,
    /// derivative at the base point (`s = 0`, or `r = r0` after lifting)
    pub slope_at_base: f64,
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    pub tolerance: f64,
    /// true when every interior value is strictly positive
    pub positive: bool,
    /// where the downward march hit zero, if it did
    pub stopped_below: Option<f64>,
    /// where the upward march hit zero, if it did
    pub stopped_above: Option<f64>,
}

impl SolutionProfile {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Value at the grid node closest to `s = 0` (meaningful for reduced
    /// profiles, whose grids straddle zero).
    pub fn value_at_base(&self) -> f64 {
        let mut best = 0;
        for (i, &x) in self.grid.iter().enumerate() {
            if x.abs() < self.grid[best].abs() {
                best = i;
            }
        }
        self.values[best]
    }

    pub fn to_csv(&self) -> String {
        let header = match self.variable {
            Variable::Reduced => "s,z,dz_ds",
            Variable::Radial => "r,u,du_dr",
        };
        let mut out = String::from(header);
        out.push('\n');
        for i in 0..self.grid.len() {
            let cells = vec![
                format_float(self.grid[i]),
                format_float(self.values[i]),
                format_float(self.deriv[i]),
            ];
            out.push_str(&csv_line(&cells));
            out.push('\n');
        }
        out
    }

    /// Repackage a lifted profile as a sampled radial function for the
    /// residual check.
    pub fn to_radial_function(&self) -> Result<RadialFunction> {
        if self.variable != Variable::Radial {
            return Err(Error::Domain(
                "profile is in the reduced variable; lift it first".into(),
            ));
        }
        RadialFunction::new(self.grid.clone(), self.values.clone())
    }
}

fn min_interior(grid: &[f64], values: &[f64]) -> f64 {
    values[1..grid.len() - 1]
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v))
}

/// Solve the *linear* problem `z'' + q(s) = 0`, `z(+-L) = bc` through the
/// Green function of `-d^2/ds^2`:
///
/// ```text
///   z(s) = bc + (L - s)/(2L) * I1(s) + (L + s)/(2L) * I2(s)
///   I1(s) = int_{-L}^{s} (L + t) q(t) dt,   I2(s) = int_{s}^{L} (L - t) q(t) dt
/// ```
///
/// `q` must be nonnegative on the truncation (checked on nodes and
/// midpoints); this keeps the output a genuine supersolution barrier with
/// `z >= bc`.
pub fn solve_linear(problem: &ReducedProblem, domain: &TruncatedDomain) -> Result<SolutionProfile> {
    let grid = domain.grid();
    let n = grid.len();
    let l = domain.half_length;
    let bc = domain.bc_value;

    let mut q_nodes = Vec::with_capacity(n);
    for (i, &s) in grid.iter().enumerate() {
        let qi = problem.q(s)?;
        if !qi.is_finite() {
            return Err(Error::Numeric(format!("q({s}) is not finite")));
        }
        if qi < 0.0 {
            return Err(Error::Domain(format!(
                "q({s}) = {qi} < 0: the Green-function solve requires q >= 0 on the truncation"
            )));
        }
        if i + 1 < n {
            let sm = 0.5 * (s + grid[i + 1]);
            let qm = problem.q(sm)?;
            if qm < 0.0 {
                return Err(Error::Domain(format!(
                    "q({sm}) = {qm} < 0: the Green-function solve requires q >= 0 on the truncation"
                )));
            }
        }
        q_nodes.push(qi);
    }

    let seg_opts = QuadOptions {
        abs_tol: (1e-9 / n as f64).max(1e-13),
        rel_tol: 1e-12,
        max_panels: 10_000,
    };
    // cumulative moments of q against the two Green factors
    let mut i1 = vec![0.0; n];
    for i in 1..n {
        let part = integrate(|t| (l + t) * problem.q(t).unwrap_or(f64::NAN), grid[i - 1], grid[i], &seg_opts)?;
        i1[i] = i1[i - 1] + part.value;
    }
    let mut i2 = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let part = integrate(|t| (l - t) * problem.q(t).unwrap_or(f64::NAN), grid[i], grid[i + 1], &seg_opts)?;
        i2[i] = i2[i + 1] + part.value;
    }

    let two_l = 2.0 * l;
    let values: Vec<f64> = (0..n)
        .map(|i| bc + ((l - grid[i]) * i1[i] + (l + grid[i]) * i2[i]) / two_l)
        .collect();
    let deriv: Vec<f64> = (0..n).map(|i| (-i1[i] + i2[i]) / two_l).collect();

    // derivative at s = 0 needs both moments up to 0, not up to a node
    let k = grid.partition_point(|&s| s < 0.0);
    let (i1_at0, i2_at0) = if grid[k] == 0.0 {
        (i1[k], i2[k])
    } else {
        let below = integrate(|t| (l + t) * problem.q(t).unwrap_or(f64::NAN), grid[k - 1], 0.0, &seg_opts)?;
        let above = integrate(|t| (l - t) * problem.q(t).unwrap_or(f64::NAN), 0.0, grid[k], &seg_opts)?;
        (i1[k - 1] + below.value, i2[k] + above.value)
    };
    let slope_at_base = (-i1_at0 + i2_at0) / two_l;

    let positive = min_interior(&grid, &values) > 0.0;
    Ok(SolutionProfile {
        variable: Variable::Reduced,
        grid,
        values,
        deriv,
        slope_at_base,
        method: Method::LinearGreen,
        converged: true,
        iterations: 1,
        tolerance: 1e-9,
        positive,
        stopped_below: None,
        stopped_above: None,
    })
}

/// Right-hand side of the first-order system, with `f` extended by
/// `f(max(z, 0))` so the integrator stays well defined while a zero
/// crossing is being located.
fn rhs(problem: &ReducedProblem) -> impl Fn(f64, State) -> State + '_ {
    move |s, y| {
        let q = problem.q(s).unwrap_or(f64::NAN);
        [y[1], -q * problem.nonlinearity().eval(y[0].max(0.0))]
    }
}

/// One directed march from `(0, [height, slope])` through the grid nodes
/// `targets` (all of one sign, ordered away from zero). Returns the sampled
/// `(s, z, z')` rows and the crossing location if `z` hit zero.
fn march(
    problem: &ReducedProblem,
    targets: &[f64],
    height: f64,
    slope: f64,
    opts: &RkOptions,
) -> Result<(Vec<(f64, f64, f64)>, Option<f64>)> {
    let f = rhs(problem);
    let mut rows = vec![(0.0, height, slope)];
    let mut t = 0.0;
    let mut y: State = [height, slope];
    for &target in targets {
        // bracket = (step start time, step start state, step end time)
        let mut bracket: Option<(f64, State, f64)> = None;
        let (t_end, y_end, stopped) = advance(&f, t, y, target, opts, &mut |st| {
            if st.y1[0] <= 0.0 {
                bracket = Some((st.t0, st.y0, st.t1));
                false
            } else {
                true
            }
        })?;
        if !stopped {
            t = t_end;
            y = y_end;
            rows.push((t, y[0], y[1]));
            continue;
        }
        // locate the crossing by bisection, reintegrating from the step
        // start each time so location error does not compound
        let (t0b, y0b, mut hi) = bracket.expect("stop without bracket");
        let mut lo = t0b;
        while (hi - lo).abs() > 1e-10 {
            let mid = 0.5 * (lo + hi);
            let (_, ym) = advance_plain(&f, t0b, y0b, mid, opts)?;
            if ym[0] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cross = 0.5 * (lo + hi);
        let (_, yc) = advance_plain(&f, t0b, y0b, cross, opts)?;
        rows.push((cross, yc[0], yc[1]));
        return Ok((rows, Some(cross)));
    }
    Ok((rows, None))
}

/// Integrate the reduced equation outward from `s = 0` with the given
/// height and slope, landing on the nodes of `domain`. If `z` reaches zero
/// the march stops there and the crossing is recorded; the equation does
/// not impose the boundary values, so `z(+-L)` lands wherever it lands.
pub fn solve_shooting(
    problem: &ReducedProblem,
    domain: &TruncatedDomain,
    height: f64,
    slope: f64,
    tol: f64,
) -> Result<SolutionProfile> {
    if !(height > 0.0) || !height.is_finite() {
        return Err(Error::Domain(format!(
            "shooting needs a positive finite height at the base, got {height}"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 || tol >= 1e-2 {
        return Err(Error::Format(format!("shooting tolerance out of range: {tol}")));
    }
    let opts = RkOptions { rel_tol: tol, abs_tol: tol * 1e-3, ..RkOptions::default() };
    let full = domain.grid();
    let right: Vec<f64> = full.iter().cloned().filter(|&s| s > 0.0).collect();
    let mut left: Vec<f64> = full.iter().cloned().filter(|&s| s < 0.0).collect();
    left.reverse(); // march away from zero

    let (rows_r, cross_r) = march(problem, &right, height, slope, &opts)?;
    let (rows_l, cross_l) = march(problem, &left, height, slope, &opts)?;

    let mut grid = Vec::with_capacity(rows_l.len() + rows_r.len() - 1);
    let mut values = Vec::new();
    let mut deriv = Vec::new();
    for &(s, z, dz) in rows_l.iter().skip(1).rev() {
        grid.push(s);
        values.push(z);
        deriv.push(dz);
    }
    for &(s, z, dz) in &rows_r {
        grid.push(s);
        values.push(z);
        deriv.push(dz);
    }
    let positive = cross_l.is_none()
        && cross_r.is_none()
        && values.iter().all(|&v| v > 0.0);
    Ok(SolutionProfile {
        variable: Variable::Reduced,
        grid,
        values,
        deriv,
        slope_at_base: slope,
        method: Method::Shooting,
        converged: true,
        iterations: 1,
        tolerance: tol,
        positive,
        stopped_below: cross_l,
        stopped_above: cross_r,
    })
}

/// Shooting adjusted to the boundary condition: find the height `d` with
/// `z(0) = d`, `z'(0) = 0` whose rightward shot lands on `z(L) = bc`. A
/// shot that dies at `s* < L` is scored `-(bc + (L - s*))`, which keeps the
/// miss function continuous and monotone through early crossings. The
/// height is bracketed by doubling/halving and then polished by a
/// bracketed secant iteration.
pub fn solve_shooting_symmetric(
    problem: &ReducedProblem,
    domain: &TruncatedDomain,
    tol: f64,
) -> Result<SolutionProfile> {
    let bc = domain.bc_value;
    let l = domain.half_length;
    let opts = RkOptions { rel_tol: tol, abs_tol: tol * 1e-3, ..RkOptions::default() };
    let miss = |d: f64| -> Result<f64> {
        let (rows, cross) = march(problem, &[l], d, 0.0, &opts)?;
        Ok(match cross {
            Some(s_star) => -(bc + (l - s_star)),
            None => rows.last().unwrap().1 - bc,
        })
    };

    let mut evals = 0usize;
    // bracket a sign change in d, doubling the offset from bc
    let d0 = bc + 1.0;
    let m0 = miss(d0)?;
    evals += 1;
    let (mut d_lo, mut m_lo, mut d_hi, mut m_hi);
    if m0 == 0.0 {
        (d_lo, m_lo, d_hi, m_hi) = (d0, m0, d0, m0);
    } else if m0 > 0.0 {
        // too high: shrink toward bc
        let (mut d, mut m) = (d0, m0);
        loop {
            let d_next = bc + (d - bc) / 2.0;
            let m_next = miss(d_next)?;
            evals += 1;
            if m_next <= 0.0 {
                (d_lo, m_lo, d_hi, m_hi) = (d_next, m_next, d, m);
                break;
            }
            d = d_next;
            m = m_next;
            if evals > 60 {
                return Err(Error::NoConvergence { iterations: evals, residual: m.abs() });
            }
        }
    } else {
        let (mut d, mut m) = (d0, m0);
        loop {
            let d_next = bc + (d - bc) * 2.0;
            let m_next = miss(d_next)?;
            evals += 1;
            if m_next >= 0.0 {
                (d_lo, m_lo, d_hi, m_hi) = (d, m, d_next, m_next);
                break;
            }
            d = d_next;
            m = m_next;
            if evals > 60 {
                return Err(Error::NoConvergence { iterations: evals, residual: m.abs() });
            }
        }
    }

    // bracketed secant with bisection fallback
    let mut d_best = d_lo;
    let mut m_best = m_lo;
    while m_best.abs() > 1e-10 && (d_hi - d_lo) > 1e-13 * d_hi.abs().max(1.0) {
        let mut d_new = if (m_hi - m_lo).abs() > 1e-300 {
            d_lo - m_lo * (d_hi - d_lo) / (m_hi - m_lo)
        } else {
            0.5 * (d_lo + d_hi)
        };
        if !(d_new > d_lo && d_new < d_hi) {
            d_new = 0.5 * (d_lo + d_hi);
        }
        let m_new = miss(d_new)?;
        evals += 1;
        if m_new.abs() < m_best.abs() {
            d_best = d_new;
            m_best = m_new;
        }
        if m_new == 0.0 {
            break;
        } else if m_new < 0.0 {
            d_lo = d_new;
            m_lo = m_new;
        } else {
            d_hi = d_new;
            m_hi = m_new;
        }
        if evals > 200 {
            // the bracket can stop improving at the resolution of the
            // initial height; accept whatever accuracy was reached if it
            // clears the final bar below
            break;
        }
    }
    if m_best.abs() > 1e-8 {
        return Err(Error::NoConvergence { iterations: evals, residual: m_best.abs() });
    }

    let mut profile = solve_shooting(problem, domain, d_best, 0.0, tol)?;
    profile.method = Method::SymmetricShooting;
    profile.iterations = evals;
    profile.converged = true;
    Ok(profile)
}

/// Initial guess for the collocation iteration.
#[derive(Debug, Clone)]
pub enum CollocationInit {
    /// the linear Green solution of `z'' + q = 0` with the same boundary
    /// values (requires `q >= 0`)
    Default,
    /// constant interior value
    Flat(f64),
    /// explicit values on the full grid (endpoints included; they are
    /// overwritten by the boundary condition)
    Profile(Vec<f64>),
}

/// Damped Newton iteration on the standard second-order collocation system
///
/// ```text
///   (z_{i-1} - 2 z_i + z_{i+1}) / h^2 + q_i f(z_i) = 0,   z_0 = z_{n-1} = bc
/// ```
///
/// The line search halves the step while the candidate has a nonpositive
/// interior value — positivity is checked *before* `f` is evaluated, so
/// fractional powers never see negative arguments — or while the residual
/// norm fails to decrease. Hitting the damping floor without an acceptable
/// candidate aborts without applying the step.
pub fn solve_collocation(
    problem: &ReducedProblem,
    domain: &TruncatedDomain,
    init: CollocationInit,
) -> Result<SolutionProfile> {
    let grid = domain.grid();
    let n = grid.len();
    let h = domain.spacing();
    let h2 = h * h;
    let bc = domain.bc_value;
    let newton_tol: f64 = 1e-10;
    let max_iter = 50;

    let mut q = Vec::with_capacity(n);
    for &s in &grid {
        let qi = problem.q(s)?;
        if !qi.is_finite() {
            return Err(Error::Numeric(format!("q({s}) is not finite")));
        }
        q.push(qi);
    }

    let mut z: Vec<f64> = match init {
        CollocationInit::Default => solve_linear(problem, domain)?.values,
        CollocationInit::Flat(c) => {
            let mut v = vec![c; n];
            v[0] = bc;
            v[n - 1] = bc;
            v
        }
        CollocationInit::Profile(v) => {
            if v.len() != n {
                return Err(Error::Format(format!(
                    "initial profile has {} values but the grid has {n} nodes",
                    v.len()
                )));
            }
            let mut v = v;
            v[0] = bc;
            v[n - 1] = bc;
            v
        }
    };
    if min_interior(&grid, &z) <= 0.0 {
        return Err(Error::Domain(
            "collocation needs a strictly positive initial guess on the interior".into(),
        ));
    }

    let fnl = problem.nonlinearity();
    let residual = |z: &[f64]| -> Vec<f64> {
        (1..n - 1)
            .map(|i| (z[i - 1] - 2.0 * z[i] + z[i + 1]) / h2 + q[i] * fnl.eval(z[i]))
            .collect()
    };
    let norm = |f: &[f64]| f.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    // round-off floor of the difference stencil: converged means the
    // residual is either below the tolerance or provably within noise
    let noise_ok = |z: &[f64], fv: &[f64]| -> bool {
        let eps = f64::EPSILON;
        fv.iter().enumerate().all(|(k, &r)| {
            let i = k + 1;
            let floor = eps * ((z[i - 1].abs() + 2.0 * z[i].abs() + z[i + 1].abs()) / h2
                + (q[i] * fnl.eval(z[i])).abs());
            r.abs() <= newton_tol.max(8.0 * floor)
        })
    };

    let mut fv = residual(&z);
    let mut iterations = 0;
    while norm(&fv) > newton_tol && !noise_ok(&z, &fv) {
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations, residual: norm(&fv) });
        }
        iterations += 1;
        let m = n - 2;
        let sub = vec![1.0 / h2; m];
        let sup = vec![1.0 / h2; m];
        let diag: Vec<f64> = (1..n - 1)
            .map(|i| -2.0 / h2 + q[i] * fnl.deriv(z[i]))
            .collect();
        let rhs: Vec<f64> = fv.iter().map(|&v| -v).collect();
        let step = thomas(&sub, &diag, &sup, &rhs);
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "singular collocation Jacobian at iteration {iterations}"
            )));
        }

        let f0 = norm(&fv);
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 2.0f64.powi(-20) {
            let cand: Vec<f64> = (0..n)
                .map(|i| {
                    if i == 0 || i == n - 1 {
                        bc
                    } else {
                        z[i] + lambda * step[i - 1]
                    }
                })
                .collect();
            if min_interior(&grid, &cand) <= 0.0 {
                lambda *= 0.5;
                continue;
            }
            let f_cand = residual(&cand);
            let fc = norm(&f_cand);
            if fc < f0 || noise_ok(&cand, &f_cand) {
                z = cand;
                fv = f_cand;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations, residual: f0 });
        }
    }

    let spline = CubicSpline::new(grid.clone(), z.clone())?;
    let deriv: Vec<f64> = grid.iter().map(|&s| spline.eval_deriv(s)).collect();
    let slope_at_base = spline.eval_deriv(0.0);
    let positive = min_interior(&grid, &z) > 0.0;
    Ok(SolutionProfile {
        variable: Variable::Reduced,
        grid,
        values: z,
        deriv,
        slope_at_base,
        method: Method::Collocation,
        converged: true,
        iterations,
        tolerance: newton_tol,
        positive,
        stopped_below: None,
        stopped_above: None,
    })
}

/// Carry a reduced-variable profile back to the radial variable:
/// `u(r) = z(J(r))` sampled at `r_i = J^{-1}(s_i)`, with
/// `u'(r) = z'(s) / phi(r)`.
pub fn lift_profile(profile: &SolutionProfile, cv: &ChangeOfVariables) -> Result<SolutionProfile> {
    if profile.variable == Variable::Radial {
        return Err(Error::Domain("profile is already in the radial variable".into()));
    }
    let mut grid = Vec::with_capacity(profile.grid.len());
    let mut deriv = Vec::with_capacity(profile.grid.len());
    for (i, &s) in profile.grid.iter().enumerate() {
        let r = cv.inverse(s)?;
        let (phi, _) = cv.measure().eval_measure(r)?;
        grid.push(r);
        deriv.push(profile.deriv[i] / phi);
    }
    let (phi0, _) = cv.measure().eval_measure(cv.base_point())?;
    Ok(SolutionProfile {
        variable: Variable::Radial,
        grid,
        values: profile.values.clone(),
        deriv,
        slope_at_base: profile.slope_at_base / phi0,
        method: profile.method,
        converged: profile.converged,
        iterations: profile.iterations,
        tolerance: profile.tolerance,
        positive: profile.positive,
        stopped_below: profile.stopped_below,
        stopped_above: profile.stopped_above,
    })
}

/// CSV rendering of a reduced profile with the radial variable alongside:
/// `s, r, z, dz_ds`.
pub fn csv_in_both_variables(profile: &SolutionProfile, cv: &Arc<ChangeOfVariables>) -> Result<String> {
    if profile.variable != Variable::Reduced {
        return Err(Error::Domain("expected a profile in the reduced variable".into()));
    }
    let mut out = String::from("s,r,z,dz_ds\n");
    for i in 0..profile.grid.len() {
        let r = cv.inverse(profile.grid[i])?;
        let cells = vec![
            format_float(profile.grid[i]),
            format_float(r),
            format_float(profile.values[i]),
            format_float(profile.deriv[i]),
        ];
        out.push_str(&csv_line(&cells));
        out.push('\n');
    }
    Ok(out)
}
