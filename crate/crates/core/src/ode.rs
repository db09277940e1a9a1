//! Fixed-step classical Runge–Kutta integration with a terminal event.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSettings {
    /// Step size `h`.
    pub step: f64,
    /// Width of the final bisection bracket around an event.
    pub root_tolerance: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            step: 1e-4,
            root_tolerance: 1e-12,
        }
    }
}

impl OdeSettings {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid(format!("ODE step must be positive, got {}", self.step)));
        }
        if !(self.root_tolerance.is_finite() && self.root_tolerance > 0.0) {
            return Err(invalid("root tolerance must be positive"));
        }
        Ok(())
    }
}

pub fn rk4_step<const D: usize>(
    f: &impl Fn(f64, &[f64; D]) -> [f64; D],
    t: f64,
    y: &[f64; D],
    h: f64,
) -> [f64; D] {
    let shift = |base: &[f64; D], k: &[f64; D], s: f64| {
        let mut out = *base;
        for i in 0..D {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &shift(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &shift(y, &k2, 0.5 * h));
    let k4 = f(t + h, &shift(y, &k3, h));
    let mut out = *y;
    for i in 0..D {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Discrete solution; the last node is the event point when one was found.
#[derive(Debug, Clone)]
pub struct OdeSolution<const D: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; D]>,
    pub event_time: Option<f64>,
}

/// Integrates from `(t0, y0)` with fixed steps until `event(y)` changes sign
/// from negative to non-negative, `t_max` is passed, or `guard(t, y)` asks to
/// stop.
///
/// When a step crosses the event, the crossing is located by bisection on the
/// length of a single RK4 substep from the last accepted node, starting from
/// the linear-interpolation estimate, until the bracket is narrower than the
/// root tolerance.
pub fn integrate_until_event<const D: usize>(
    f: impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: [f64; D],
    settings: &OdeSettings,
    t_max: f64,
    event: impl Fn(&[f64; D]) -> f64,
    guard: impl Fn(f64, &[f64; D]) -> bool,
) -> Result<OdeSolution<D>> {
    settings.validate()?;
    let h = settings.step;
    let mut times = vec![t0];
    let mut states = vec![y0];
    let mut t = t0;
    let mut y = y0;
    let mut g = event(&y);
    if g >= 0.0 {
        return Ok(OdeSolution {
            times,
            states,
            event_time: Some(t0),
        });
    }
    while t < t_max {
        let next = rk4_step(&f, t, &y, h);
        let g_next = event(&next);
        if g_next >= 0.0 {
            let (s, y_event) = locate_event(&f, t, &y, g, h, g_next, &event, settings.root_tolerance);
            times.push(t + s);
            states.push(y_event);
            return Ok(OdeSolution {
                times,
                states,
                event_time: Some(t + s),
            });
        }
        // Step index times h keeps the grid free of accumulated rounding.
        t = t0 + times.len() as f64 * h;
        y = next;
        g = g_next;
        times.push(t);
        states.push(y);
        if guard(t, &y) {
            break;
        }
    }
    Ok(OdeSolution {
        times,
        states,
        event_time: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn locate_event<const D: usize>(
    f: &impl Fn(f64, &[f64; D]) -> [f64; D],
    t: f64,
    y: &[f64; D],
    g_lo: f64,
    h: f64,
    g_hi: f64,
    event: &impl Fn(&[f64; D]) -> f64,
    tol: f64,
) -> (f64, [f64; D]) {
    let mut lo = 0.0;
    let mut hi = h;
    let mut y_hi = rk4_step(f, t, y, h);
    // linear guess first
    let guess = (h * (-g_lo) / (g_hi - g_lo)).clamp(0.0, h);
    if guess > 0.0 && guess < h {
        let y_guess = rk4_step(f, t, y, guess);
        if event(&y_guess) >= 0.0 {
            hi = guess;
            y_hi = y_guess;
        } else {
            lo = guess;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = rk4_step(f, t, y, mid);
        if event(&y_mid) >= 0.0 {
            hi = mid;
            y_hi = y_mid;
        } else {
            lo = mid;
        }
    }
    (hi, y_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_is_fourth_order() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let err = |h: f64| {
            let s = integrate_until_event(f, 0.0, [1.0], &OdeSettings::with_step(h), 1.0 - 1e-12, |_| -1.0, |_, _| false)
                .unwrap();
            (s.states.last().unwrap()[0] - s.times.last().unwrap().exp()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn event_located_to_tolerance() {
        // y' = 2, event at y = 1 -> t = 0.5 exactly.
        let s = integrate_until_event(
            |_, _: &[f64; 1]| [2.0],
            0.0,
            [0.0],
            &OdeSettings::with_step(0.03),
            10.0,
            |y| y[0] - 1.0,
            |_, _| false,
        )
        .unwrap();
        assert!((s.event_time.unwrap() - 0.5).abs() < 1e-12);
        assert!((s.states.last().unwrap()[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn invalid_step_rejected() {
        let r = integrate_until_event(|_, y: &[f64; 1]| *y, 0.0, [1.0], &OdeSettings::with_step(0.0), 1.0, |_| -1.0, |_, _| false);
        assert!(r.is_err());
    }
}
