//! Adaptive Dormand–Prince 5(4) integrator for complex linear systems.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)` over complex amplitudes.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

/// Step-size control. The local error estimate is measured as a 2-norm and
/// compared against `atol + rtol·‖y‖₂`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub tol: Tolerance,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            h_init: None,
            h_max: None,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: Tolerance) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// States at the requested stop times plus step statistics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates `sys` from `t0` through every time in `stops` (ascending, each
/// `>= t0`), landing exactly on each stop. `observer` sees the initial state and
/// every accepted step.
pub fn integrate<S, O>(
    sys: &S,
    t0: f64,
    y0: &[C64],
    stops: &[f64],
    opts: &IntegratorOptions,
    mut observer: O,
) -> Result<Solution>
where
    S: OdeSystem + ?Sized,
    O: FnMut(f64, &[C64]),
{
    let dim = sys.dim();
    if y0.len() != dim {
        return Err(Error::domain(format!(
            "initial state has {} components, system expects {dim}",
            y0.len()
        )));
    }
    if stops.windows(2).any(|w| w[1] < w[0]) || stops.first().is_some_and(|&s| s < t0) {
        return Err(Error::domain("stop times must be ascending and not before t0"));
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::default(); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut y_new = k1.clone();
    let mut err_vec = k1.clone();

    let mut sol = Solution {
        times: Vec::with_capacity(stops.len()),
        states: Vec::with_capacity(stops.len()),
        accepted: 0,
        rejected: 0,
    };
    observer(t, &y);
    sys.rhs(t, &y, &mut k1);

    let span = stops.last().map_or(0.0, |&e| e - t0);
    let h_max = opts.h_max.unwrap_or(f64::INFINITY).min(span.max(f64::MIN_POSITIVE));
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let d0 = norm(&y).max(1e-300);
            let d1 = norm(&k1);
            if d1 > 0.0 {
                (0.01 * d0 / d1).min(h_max)
            } else {
                (1e-3 * span).max(f64::MIN_POSITIVE)
            }
        }
    };
    let tol = opts.tol;
    let mut steps = 0usize;

    for &stop in stops {
        while t < stop {
            if steps >= opts.max_steps {
                return Err(Error::Integrator {
                    t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let remaining = stop - t;
            let mut last = false;
            let mut hs = h.min(h_max);
            if hs >= remaining * (1.0 - 1e-12) {
                hs = remaining;
                last = true;
            }
            if hs <= 1e-15 * t.abs().max(span) {
                return Err(Error::Integrator {
                    t,
                    reason: format!("step-size underflow (h = {hs:e})"),
                });
            }

            for i in 0..dim {
                tmp[i] = y[i] + k1[i] * (hs * A21);
            }
            sys.rhs(t + C2 * hs, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * hs;
            }
            sys.rhs(t + C3 * hs, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * hs;
            }
            sys.rhs(t + C4 * hs, &tmp, &mut k4);
            for i in 0..dim {
                tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * hs;
            }
            sys.rhs(t + C5 * hs, &tmp, &mut k5);
            for i in 0..dim {
                tmp[i] = y[i]
                    + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * hs;
            }
            let t_next = if last { stop } else { t + hs };
            sys.rhs(t_next, &tmp, &mut k6);
            for i in 0..dim {
                y_new[i] = y[i]
                    + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * hs;
            }
            sys.rhs(t_next, &y_new, &mut k7);
            for i in 0..dim {
                err_vec[i] = (k1[i] * E1
                    + k3[i] * E3
                    + k4[i] * E4
                    + k5[i] * E5
                    + k6[i] * E6
                    + k7[i] * E7)
                    * hs;
            }
            steps += 1;

            let scale = tol.atol + tol.rtol * norm(&y).max(norm(&y_new));
            let err = norm(&err_vec) / scale;
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    reason: "non-finite derivative".into(),
                });
            }
            if err <= 1.0 {
                t = t_next;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                sol.accepted += 1;
                observer(t, &y);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // Do not let a short landing step shrink the next one.
                if !last || fac < 1.0 {
                    h = hs * fac;
                }
            } else {
                sol.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        sol.times.push(stop);
        sol.states.push(y.clone());
    }
    Ok(sol)
}
