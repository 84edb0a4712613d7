//! Parameters, state, the vector field, the reset rule, and the closed-form
//! solutions of the continuous dynamics.
//!
//! Each individual carries a behavioral intention `x_i` in (-1, 1) and a nudge
//! `y_i` in [0, 1]. Intention evolves as
//!
//! ```text
//! dx_i/dt = [sigma_a*alpha_i + sigma_s*(gamma_i - mu_s)] * sigma_c*(gamma_i + mu_c) * (1 - x_i^2)
//! dy_i/dt = -r * y_i
//! ```
//!
//! where `gamma_i` is the mean nudge of everyone else. When `x_i` reaches the
//! threshold `tau` the individual acts: `x_i` resets to 0 and `y_i` jumps to 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs this close to +-1 are rejected before `atanh`; beyond it the closed
/// forms saturate in f64.
pub const ATANH_GUARD: f64 = 1e-12;

/// `atanh` with the saturation guard applied.
pub(crate) fn checked_atanh(u: f64) -> Result<f64> {
    if !u.is_finite() || 1.0 - u.abs() < ATANH_GUARD {
        return Err(Error::AtanhDomain { value: u });
    }
    Ok(u.atanh())
}

/// Population-independent constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    /// Strength of internal attitudes (>= 0).
    pub sigma_a: f64,
    /// Strength of social norms (>= 0).
    pub sigma_s: f64,
    /// Strength of perceived behavioral control (>= 0).
    pub sigma_c: f64,
    /// Social norm threshold (in [0, 1]).
    pub mu_s: f64,
    /// Baseline perceived control (>= 0).
    pub mu_c: f64,
    /// Immediacy parameter: nudge decay rate (>= 0).
    pub r: f64,
    /// Action-taking threshold (in (0, 1)).
    pub tau: f64,
    /// Population size (>= 1).
    pub n: usize,
}

impl GlobalParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sigma_a: f64,
        sigma_s: f64,
        sigma_c: f64,
        mu_s: f64,
        mu_c: f64,
        r: f64,
        tau: f64,
        n: usize,
    ) -> Result<Self> {
        let params = Self {
            sigma_a,
            sigma_s,
            sigma_c,
            mu_s,
            mu_c,
            r,
            tau,
            n,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks every table-of-parameters bound. Deserialized values must pass
    /// through here before use.
    pub fn validate(&self) -> Result<()> {
        let nonneg: [(&'static str, f64); 4] = [
            ("sigma_a", self.sigma_a),
            ("sigma_s", self.sigma_s),
            ("sigma_c", self.sigma_c),
            ("mu_c", self.mu_c),
        ];
        for (name, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::ParamOutOfRange {
                    name,
                    value,
                    constraint: ">= 0",
                });
            }
        }
        if !(self.mu_s.is_finite() && (0.0..=1.0).contains(&self.mu_s)) {
            return Err(Error::ParamOutOfRange {
                name: "mu_s",
                value: self.mu_s,
                constraint: "in [0, 1]",
            });
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "r",
                value: self.r,
                constraint: ">= 0",
            });
        }
        // The open-interval bound on tau also keeps atanh(tau) finite.
        if !(self.tau.is_finite() && self.tau > 0.0 && 1.0 - self.tau >= ATANH_GUARD) {
            return Err(Error::ParamOutOfRange {
                name: "tau",
                value: self.tau,
                constraint: "in (0, 1)",
            });
        }
        if self.n == 0 {
            return Err(Error::ParamOutOfRange {
                name: "n",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        Ok(())
    }

    /// Margin `sigma_a*alpha - sigma_s*mu_s`; its sign decides unaided growth.
    pub fn margin(&self, alpha: f64) -> f64 {
        self.sigma_a * alpha - self.sigma_s * self.mu_s
    }

    /// Unaided rate constant `A = margin * sigma_c * mu_c`.
    pub fn rate(&self, alpha: f64) -> f64 {
        self.margin(alpha) * self.sigma_c * self.mu_c
    }

    /// Unaided period `atanh(tau) / A` from a zero start, for `A > 0`.
    pub fn unaided_period(&self, alpha: f64) -> Result<f64> {
        first_action_time(self.rate(alpha), 0.0, self.tau)
    }
}

/// Per-individual inputs: attitude and initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndividualConfig {
    /// Internal attitude (in (-1, 1)).
    pub alpha: f64,
    /// Initial intention (in (-1, 1)). Values at or above `tau` are treated as
    /// an immediate action at t = 0 by the simulator.
    pub x0: f64,
    /// Initial nudge (in [0, 1]).
    pub y0: f64,
}

impl IndividualConfig {
    pub fn new(alpha: f64, x0: f64, y0: f64) -> Result<Self> {
        let cfg = Self { alpha, x0, y0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha.abs() < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "alpha",
                value: self.alpha,
                constraint: "in (-1, 1)",
            });
        }
        if !(self.x0.is_finite() && self.x0.abs() < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "x0",
                value: self.x0,
                constraint: "in (-1, 1)",
            });
        }
        if !(self.y0.is_finite() && (0.0..=1.0).contains(&self.y0)) {
            return Err(Error::ParamOutOfRange {
                name: "y0",
                value: self.y0,
                constraint: "in [0, 1]",
            });
        }
        Ok(())
    }
}

/// Time plus the intention and nudge vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SystemState {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let state = Self { t, x, y };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::PopulationMismatch {
                expected: self.x.len(),
                got: self.y.len(),
            });
        }
        for &xi in &self.x {
            if !(xi.is_finite() && xi.abs() < 1.0) {
                return Err(Error::ParamOutOfRange {
                    name: "x_i",
                    value: xi,
                    constraint: "in (-1, 1)",
                });
            }
        }
        for &yi in &self.y {
            if !(yi.is_finite() && (0.0..=1.0).contains(&yi)) {
                return Err(Error::ParamOutOfRange {
                    name: "y_i",
                    value: yi,
                    constraint: "in [0, 1]",
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Perceived social norm of individual `i`: the mean nudge of everyone else.
/// For a population of one there is nobody else; gamma is defined as 0.
pub fn gamma(i: usize, y: &[f64]) -> Result<f64> {
    let n = y.len();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let sum: f64 = y
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| (j != i).then_some(v))
        .sum();
    Ok(sum / (n - 1) as f64)
}

/// Writes dx for every individual into `out`. Shared by `vector_field` and the
/// integrator so the two cannot drift apart.
pub(crate) fn dx_into(params: &GlobalParams, alphas: &[f64], x: &[f64], y: &[f64], out: &mut [f64]) {
    let n = x.len();
    assert!(
        y.len() == n && alphas.len() == n && out.len() == n,
        "state vectors and alphas must all have length {n}"
    );
    for i in 0..n {
        let g = if n == 1 {
            0.0
        } else {
            let mut sum = 0.0;
            for (j, &yj) in y.iter().enumerate() {
                if j != i {
                    sum += yj;
                }
            }
            sum / (n - 1) as f64
        };
        let drive = params.sigma_a * alphas[i] + params.sigma_s * (g - params.mu_s);
        let control = params.sigma_c * (g + params.mu_c);
        out[i] = drive * control * (1.0 - x[i]) * (1.0 + x[i]);
    }
}

/// Right-hand side of the flow: returns (dx, dy).
pub fn vector_field(
    state: &SystemState,
    params: &GlobalParams,
    alphas: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; state.x.len()];
    dx_into(params, alphas, &state.x, &state.y, &mut dx);
    let dy = state.y.iter().map(|&yi| -params.r * yi).collect();
    (dx, dy)
}

/// Applies the reset rule to the given actors: x_i <- 0, y_i <- 1. Time and
/// all other coordinates are unchanged.
pub fn apply_reset(state: &SystemState, actors: &[usize]) -> Result<SystemState> {
    if actors.is_empty() {
        return Err(Error::EmptyActorSet);
    }
    let mut out = state.clone();
    for &i in actors {
        if i >= out.x.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: out.x.len(),
            });
        }
        out.x[i] = 0.0;
        out.y[i] = 1.0;
    }
    Ok(out)
}

/// Nudge-free solution x(t) = tanh(A*t + atanh(u0)).
pub fn tanh_solution(rate: f64, u0: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::TimeOutOfWindow {
            t,
            limit: f64::INFINITY,
        });
    }
    Ok((rate * t + checked_atanh(u0)?).tanh())
}

/// Time until the first unaided action: (atanh(tau) - atanh(u0)) / A.
///
/// Requires `A > 0` (otherwise the individual never acts unaided, a distinct
/// error from an out-of-domain starting position).
pub fn first_action_time(rate: f64, u0: f64, tau: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::RateNotPositive { rate });
    }
    let target = checked_atanh(tau)?;
    let start = checked_atanh(u0)?;
    if start > target {
        return Err(Error::ParamOutOfRange {
            name: "u0",
            value: u0,
            constraint: "<= tau",
        });
    }
    Ok((target - start) / rate)
}

/// Derived constants for the two-individual system after an action of
/// individual 1 (the one with positive margin).
///
/// Within one period of individual 1, and before individual 2 acts, x2 follows
/// `tanh(A2*t + B*e^{-rt} + C*e^{-2rt} + D(u0))` with
///
/// ```text
/// A_i = (sigma_a*alpha_i - sigma_s*mu_s) * sigma_c * mu_c
/// B   = -[(sigma_a*alpha2 - sigma_s*mu_s)*sigma_c + sigma_s*sigma_c*mu_c] / r
/// C   = -sigma_s*sigma_c / (2r)
/// D(u0) = atanh(u0) - B - C
/// ```
///
/// The invariant `M = A2*T + B*e^{-rT} + C*e^{-2rT} - B - C` is the net change
/// of atanh(x2) over one period `T = atanh(tau)/A1`; its sign is independent
/// of where x2 starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBodyConstants {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
    /// Period of individual 1 from a zero start: atanh(tau) / A1.
    pub period: f64,
    /// Net change of atanh(x2) over one period.
    pub invariant: f64,
}

impl TwoBodyConstants {
    /// Fails unless `r > 0` and `A1 > 0`.
    pub fn new(params: &GlobalParams, alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(a.is_finite() && a.abs() < 1.0) {
                return Err(Error::AlphaOutOfRange { name, value: a });
            }
        }
        if !(params.r > 0.0) {
            return Err(Error::DecayRequired);
        }
        let a1 = params.rate(alpha1);
        if !(a1 > 0.0) {
            return Err(Error::RateNotPositive { rate: a1 });
        }
        let a2 = params.rate(alpha2);
        let r = params.r;
        let b = -(params.margin(alpha2) * params.sigma_c + params.sigma_s * params.sigma_c * params.mu_c) / r;
        let c = -params.sigma_s * params.sigma_c / (2.0 * r);
        let period = checked_atanh(params.tau)? / a1;
        // exp_m1 keeps M accurate when r*T is small.
        let invariant = a2 * period + b * (-r * period).exp_m1() + c * (-2.0 * r * period).exp_m1();
        Ok(Self {
            a1,
            a2,
            b,
            c,
            r,
            period,
            invariant,
        })
    }

    /// Integration constant D(u0) = atanh(u0) - B - C.
    pub fn d_of(&self, u0: f64) -> Result<f64> {
        Ok(checked_atanh(u0)? - self.b - self.c)
    }
}

/// Position of x2 at local time `t` within one period, starting from `u0` at
/// an action of individual 1 (y1 = 1 at t = 0). Valid for `t` in [0, T].
pub fn two_body_solution(k: &TwoBodyConstants, u0: f64, t: f64) -> Result<f64> {
    let slack = 1e-9 * k.period.max(1.0);
    if !(t >= 0.0 && t <= k.period + slack) {
        return Err(Error::TimeOutOfWindow {
            t,
            limit: k.period,
        });
    }
    let arg = k.a2 * t + k.b * (-k.r * t).exp() + k.c * (-2.0 * k.r * t).exp() + k.d_of(u0)?;
    Ok(arg.tanh())
}
