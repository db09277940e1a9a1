//! Deterministic limits of the homogeneous exploration process: the fluid
//! curve `z(t)`, the diffusion variance `m(t)`, Erdős–Rényi closed forms and
//! the explicit finite-`N` error bounds.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate_until_event, OdeSettings};

/// Solution of `z' = 1 + gamma(z)`, `z(0) = 0`, stopped at `z = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `z'(t)` at each node, used for Hermite interpolation.
    pub slopes: Vec<f64>,
    pub hitting_time: Option<f64>,
}

impl FluidCurve {
    /// Cubic Hermite interpolation; clamped at 1 after the hitting time.
    pub fn value_at(&self, t: f64) -> f64 {
        hermite(&self.grid, &self.values, &self.slopes, t)
    }
}

pub(crate) fn hermite(grid: &[f64], values: &[f64], slopes: &[f64], t: f64) -> f64 {
    if t <= grid[0] {
        return values[0];
    }
    let last = grid.len() - 1;
    if t >= grid[last] {
        return values[last];
    }
    let i = grid.partition_point(|&g| g <= t) - 1;
    let h = grid[i + 1] - grid[i];
    let s = (t - grid[i]) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1]
}

/// Integrates `z' = 1 + gamma(z)` until `z` reaches 1.
///
/// `gamma` must be non-negative on `[0, 1]`; it is checked on a uniform grid
/// up front and at every evaluation during the integration.
pub fn integrate_fluid(gamma: impl Fn(f64) -> f64, settings: &OdeSettings) -> Result<FluidCurve> {
    settings.validate()?;
    for i in 0..=1000 {
        let z = i as f64 / 1000.0;
        let g = gamma(z);
        if !(g >= 0.0) {
            return Err(Error::NegativeDrift { at: z, value: g });
        }
    }
    let bad: Cell<Option<(f64, f64)>> = Cell::new(None);
    let rhs = |_t: f64, y: &[f64; 1]| {
        let g = gamma(y[0].min(1.0));
        if !(g >= 0.0) && bad.get().is_none() {
            bad.set(Some((y[0], g)));
        }
        [1.0 + g]
    };
    // slope >= 1 guarantees the hit before t = 1
    let sol = integrate_until_event(rhs, 0.0, [0.0], settings, 1.0 + settings.step, |y| y[0] - 1.0, |_, _| false)?;
    if let Some((at, value)) = bad.get() {
        return Err(Error::NegativeDrift { at, value });
    }
    let values: Vec<f64> = sol.states.iter().map(|s| s[0].min(1.0)).collect();
    let slopes = values.iter().map(|&z| 1.0 + gamma(z)).collect();
    Ok(FluidCurve {
        grid: sol.times,
        values,
        slopes,
        hitting_time: sol.event_time,
    })
}

/// `z(t) = ((1 + c)/c)(1 - e^{-ct})`, capped at 1; `z(t) = t` for `c = 0`.
pub fn er_fluid_closed_form(c: f64, t: f64) -> f64 {
    let z = if c == 0.0 {
        t
    } else {
        (1.0 + c) / c * -(-c * t).exp_m1()
    };
    z.min(1.0)
}

/// `m(t) = e^{-2ct}(1 - e^{ct})(e^{ct} - 2c - 1) / (2c)`.
pub fn er_variance_closed_form(c: f64, t: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let e = (c * t).exp();
    (-2.0 * c * t).exp() * (1.0 - e) * (e - 2.0 * c - 1.0) / (2.0 * c)
}

/// `T* = ln(1+c)/c` and the variance of the limiting Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammingStats {
    pub t_star: f64,
    pub sigma2: f64,
}

pub fn er_jamming_stats(c: f64) -> Result<JammingStats> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(invalid(format!("c must be non-negative, got {c}")));
    }
    if c == 0.0 {
        return Ok(JammingStats { t_star: 1.0, sigma2: 0.0 });
    }
    Ok(JammingStats {
        t_star: c.ln_1p() / c,
        sigma2: c / (2.0 * (c + 1.0) * (c + 1.0)),
    })
}

/// `sigma^2 = m(T*) / (1 - gamma(1))^2`; the divisor is 1 for ER where
/// `gamma(1) = 0`.
pub fn hitting_time_variance(m_at_hit: f64, gamma_at_one: f64) -> f64 {
    m_at_hit / ((1.0 - gamma_at_one) * (1.0 - gamma_at_one))
}

/// `m(t) = E[W_t^2]` along the fluid path, with `beta(t) = int psi(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub grid: Vec<f64>,
    pub z_values: Vec<f64>,
    pub m_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub hitting_time: Option<f64>,
}

impl VarianceCurve {
    /// Linear interpolation of `m`.
    pub fn m_at(&self, t: f64) -> f64 {
        lerp(&self.grid, &self.m_values, t)
    }

    pub fn z_at(&self, t: f64) -> f64 {
        lerp(&self.grid, &self.z_values, t)
    }
}

fn lerp(grid: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= grid[0] {
        return values[0];
    }
    let last = grid.len() - 1;
    if t >= grid[last] {
        return values[last];
    }
    let i = grid.partition_point(|&g| g <= t) - 1;
    let s = (t - grid[i]) / (grid[i + 1] - grid[i]);
    values[i] + s * (values[i + 1] - values[i])
}

/// Integrates `(z, m, beta)` jointly:
/// `z' = 1 + gamma(z)`, `m' = 2 gamma'(z) m + psi(z)`, `beta' = psi(z)`.
///
/// The drift coefficient of `m` is the derivative of `gamma` with respect to
/// its argument (for ER, `-2c`), which is what reproduces the ER closed form.
pub fn integrate_variance_with(
    gamma: impl Fn(f64) -> f64,
    gamma_prime: impl Fn(f64) -> f64,
    psi: impl Fn(f64) -> f64,
    settings: &OdeSettings,
) -> Result<VarianceCurve> {
    let rhs = |_t: f64, y: &[f64; 3]| {
        let z = y[0].min(1.0);
        let p = psi(z);
        [1.0 + gamma(z), 2.0 * gamma_prime(z) * y[1] + p, p]
    };
    let sol = integrate_until_event(rhs, 0.0, [0.0; 3], settings, 1.0 + settings.step, |y| y[0] - 1.0, |_, _| false)?;
    Ok(VarianceCurve {
        grid: sol.times,
        z_values: sol.states.iter().map(|s| s[0].min(1.0)).collect(),
        m_values: sol.states.iter().map(|s| s[1]).collect(),
        beta_values: sol.states.iter().map(|s| s[2]).collect(),
        hitting_time: sol.event_time,
    })
}

/// ER instance: `gamma(z) = c(1 - z)`, `psi(z) = c(1 - z)`.
pub fn integrate_variance(c: f64, settings: &OdeSettings) -> Result<VarianceCurve> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("c must be > 0, got {c}")));
    }
    integrate_variance_with(|z| c * (1.0 - z), |_| -c, |z| c * (1.0 - z), settings)
}

/// Explicit `L^2` bound on `sup_{t <= T} |Z^N_t - z(t)|` and derived
/// hitting-time bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub n: usize,
    pub horizon: f64,
    pub delta_n: f64,
    pub gamma_bar_n: f64,
    pub psi_bar_n: f64,
    pub lipschitz: f64,
    pub omega_n: f64,
    /// Constant in `Omega_N = C omega_N`; unknown in closed form, default 1.
    pub omega_constant: f64,
    pub big_omega_n: f64,
}

impl ErrorBoundReport {
    pub fn new(
        n: usize,
        horizon: f64,
        delta_n: f64,
        gamma_bar_n: f64,
        psi_bar_n: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        if n == 0 || !(horizon > 0.0) {
            return Err(invalid("error bound needs N >= 1 and T > 0"));
        }
        if [delta_n, gamma_bar_n, psi_bar_n, lipschitz].iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("error bound constants must be non-negative"));
        }
        let nf = n as f64;
        let omega_n = (delta_n * horizon + (1.0 + gamma_bar_n) / nf + 2.0 * (psi_bar_n * horizon / nf).sqrt())
            * (lipschitz * horizon).exp();
        Ok(Self {
            n,
            horizon,
            delta_n,
            gamma_bar_n,
            psi_bar_n,
            lipschitz,
            omega_n,
            omega_constant: 1.0,
            big_omega_n: omega_n,
        })
    }

    pub fn with_omega_constant(mut self, constant: f64) -> Self {
        self.omega_constant = constant;
        self.big_omega_n = constant * self.omega_n;
        self
    }

    /// Bound on `P(|T*_N/N - T*| >= delta)`, i.e. `2 omega_N / delta`.
    pub fn deviation_bound(&self, delta: f64) -> f64 {
        2.0 * self.omega_n / delta
    }
}

/// ER constants: `delta_N = c/N`, `gamma_bar = psi_bar = C_L = c`.
pub fn er_error_bound(n: usize, c: f64, horizon: f64) -> Result<ErrorBoundReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("c must be > 0, got {c}")));
    }
    ErrorBoundReport::new(n, horizon, c / n as f64, c, c, c)
}

/// First-order expansion `(1 + c) t - c t^2 / 2` of the spatial fluid limit.
pub fn small_c_expansion(c: f64, t: f64) -> f64 {
    (1.0 + c) * t - 0.5 * c * t * t
}
