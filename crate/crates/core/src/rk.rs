//! Embedded Dormand-Prince 5(4) integrator for the two-dimensional first
//! order system behind `z'' = g(s, z)`, with PI step-size control.

use crate::error::{Error, Result};

pub type State = [f64; 2];

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard floor on |h|; going below it is a hard failure.
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            min_step: 1e-300,
            max_step: f64::INFINITY,
        }
    }
}

/// One accepted step, reported to the caller's observer.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: State,
    pub y1: State,
}

fn dp_step<F: Fn(f64, State) -> State>(f: &F, t: f64, y: State, h: f64) -> (State, State) {
    let mut k = [[0.0f64; 2]; 7];
    k[0] = f(t, y);
    for stage in 1..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                yi[0] += h * a * kj[0];
                yi[1] += h * a * kj[1];
            }
        }
        k[stage] = f(t + C[stage] * h, yi);
    }
    let mut y5 = y;
    let mut y4 = y;
    for (j, kj) in k.iter().enumerate() {
        y5[0] += h * B5[j] * kj[0];
        y5[1] += h * B5[j] * kj[1];
        y4[0] += h * B4[j] * kj[0];
        y4[1] += h * B4[j] * kj[1];
    }
    (y5, [y5[0] - y4[0], y5[1] - y4[1]])
}

/// Advance from `(t0, y0)` to `t_end` (either direction). The observer sees
/// every accepted step and may return `false` to stop early; the function
/// then returns at the step end where the stop was requested.
pub fn advance<F, W>(f: &F, t0: f64, y0: State, t_end: f64, opts: &RkOptions, watch: &mut W) -> Result<(f64, State, bool)>
where
    F: Fn(f64, State) -> State,
    W: FnMut(&Step) -> bool,
{
    if t_end == t0 {
        return Ok((t0, y0, false));
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = (span / 16.0).min(opts.max_step).max(opts.min_step) * dir;
    let mut err_prev: f64 = 1.0;
    let safety = 0.9;
    // PI controller exponents for a 5th-order pair
    let (alpha, beta) = (0.17, 0.04);

    loop {
        if (t_end - t) * dir <= 0.0 {
            return Ok((t, y, false));
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let (y_new, err_vec) = dp_step(f, t, y, h);
        if !y_new[0].is_finite() || !y_new[1].is_finite() {
            // retry with a smaller step before declaring failure
            h *= 0.25;
            if h.abs() < opts.min_step {
                return Err(Error::Numeric(format!(
                    "integration produced non-finite state near s = {t}"
                )));
            }
            continue;
        }
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((err_vec[i] / scale).abs());
        }
        if err <= 1.0 {
            let step = Step { t0: t, t1: t + h, y0: y, y1: y_new };
            t += h;
            y = y_new;
            let keep_going = watch(&step);
            let factor = (safety * err.max(1e-10).powf(-alpha) * err_prev.powf(beta)).clamp(0.2, 5.0);
            err_prev = err.max(1e-10);
            h = (h * factor).clamp(-opts.max_step, opts.max_step);
            if h == 0.0 {
                h = opts.min_step * dir;
            }
            if !keep_going {
                return Ok((t, y, true));
            }
        } else {
            let factor = (safety * err.powf(-alpha)).clamp(0.2, 1.0);
            h *= factor;
            if h.abs() < opts.min_step {
                return Err(Error::Numeric(format!(
                    "step size underflow at s = {t} (needed |h| < {:e})",
                    opts.min_step
                )));
            }
        }
    }
}

/// Convenience wrapper without step observation.
pub fn advance_plain<F: Fn(f64, State) -> State>(f: &F, t0: f64, y0: State, t_end: f64, opts: &RkOptions) -> Result<(f64, State)> {
    let (t, y, _) = advance(f, t0, y0, t_end, opts, &mut |_| true)?;
    Ok((t, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_roundtrip() {
        // z'' = -z from (1, 0): z = cos t
        let f = |_t: f64, y: State| [y[1], -y[0]];
        let opts = RkOptions::default();
        let (_, y) = advance_plain(&f, 0.0, [1.0, 0.0], std::f64::consts::PI, &opts).unwrap();
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn exponential_accuracy() {
        let f = |_t: f64, y: State| [y[0], y[1]];
        let opts = RkOptions::default();
        let (_, y) = advance_plain(&f, 0.0, [1.0, 1.0], 1.0, &opts).unwrap();
        assert_abs_diff_eq!(y[0], std::f64::consts::E, epsilon = 1e-8);
    }

    #[test]
    fn integrates_backwards() {
        let f = |_t: f64, y: State| [y[1], -y[0]];
        let opts = RkOptions::default();
        let (_, y) = advance_plain(&f, 0.0, [1.0, 0.0], -std::f64::consts::FRAC_PI_2, &opts).unwrap();
        assert_abs_diff_eq!(y[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn observer_can_stop() {
        let f = |_t: f64, y: State| [y[1], -y[0]];
        let opts = RkOptions::default();
        let mut crossed = None;
        let (t, _, stopped) = advance(&f, 0.0, [1.0, 0.0], 10.0, &opts, &mut |st: &Step| {
            if st.y1[0] <= 0.0 {
                crossed = Some(st.t1);
                false
            } else {
                true
            }
        })
        .unwrap();
        assert!(stopped);
        assert!(crossed.is_some());
        assert!(t > std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn min_step_failure_is_reported() {
        // blow-up at t = 1: y' = y^2 from y(0) = 1
        let f = |_t: f64, y: State| [y[0] * y[0], 0.0];
        let opts = RkOptions { min_step: 1e-13, ..RkOptions::default() };
        let err = advance_plain(&f, 0.0, [1.0, 0.0], 2.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "got {err:?}");
    }
}
