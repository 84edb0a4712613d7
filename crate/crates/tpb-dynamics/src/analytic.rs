//! Two-individual analytic theory: the invariant M, the period map and its
//! semi-stable point, the within-period critical time, action-count bounds,
//! the full classification table, and the Lambert-W minimal-attitude special
//! case.
//!
//! Throughout, individual 1 is the one with the larger attitude; `h3` initial
//! data (x = y = 0 except x2's start) is assumed where the theory requires it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::{lambert_w, LambertBranch};
use crate::model::{checked_atanh, GlobalParams, TwoBodyConstants};

/// Floating-point M within this band of zero is classified as exactly zero
/// (the table groups "non-positive" together).
pub const M_ZERO_BAND: f64 = 1e-12;

/// Asymptotic regime of the hybrid system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    NoAction,
    PartialAction,
    FullAction,
    /// Only the empirical classifier produces this, for runs that end too
    /// close to the M = 0 boundary to call.
    Undetermined,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::NoAction => "NoAction",
            Regime::PartialAction => "PartialAction",
            Regime::FullAction => "FullAction",
            Regime::Undetermined => "Undetermined",
        };
        f.write_str(s)
    }
}

/// What the classifier looked at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    /// Invariant M, when the mixed-margin case required computing it.
    pub invariant: Option<f64>,
    /// Margin sigma_a*alpha_i - sigma_s*mu_s per individual, in input order.
    pub margins: Vec<f64>,
}

/// Classification verdict. `actors` is nonempty exactly for `PartialAction`,
/// where it lists the individuals (0-based, input order) that keep acting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub regime: Regime,
    pub actors: Vec<usize>,
    pub evidence: Evidence,
}

/// Net change of atanh(x2) over one period of individual 1, with
/// T = atanh(tau)/A1 (individual 1 starting from zero).
///
/// Requires a positive margin for individual 1 and r > 0.
pub fn invariant_m(params: &GlobalParams, alpha1: f64, alpha2: f64) -> Result<f64> {
    TwoBodyConstants::new(params, alpha1, alpha2).map(|k| k.invariant)
}

/// Period map f(x) = tanh(M + atanh(x)): advances x2 by one period of
/// individual 1 while ignoring the threshold.
pub fn map_f(m: f64, x: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::ParamOutOfRange {
            name: "M",
            value: m,
            constraint: "finite",
        });
    }
    Ok((m + checked_atanh(x)?).tanh())
}

/// The point where f' = 1: f expands below it and contracts above it.
///
/// Algebraically x* = -(1 - sqrt(1 - tanh^2 M)) / tanh M; evaluated here as
/// -tanh(M)/(1 + sech M), which is the same quantity without the cancellation
/// near M = 0.
pub fn fixed_point_xstar(m: f64) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "M",
            value: m,
            constraint: "> 0",
        });
    }
    Ok(-m.tanh() / (1.0 + 1.0 / m.cosh()))
}

/// Within-period time at which x2's derivative changes sign under a single
/// decaying nudge: t_crit = -(1/r) ln(mu_s - sigma_a*alpha2/sigma_s).
///
/// The two error regimes are meaningful in themselves: a log argument <= 0
/// means x2 is increasing for the entire nudge, >= 1 (strictly greater,
/// since the boundary gives t_crit = 0) means it never increases.
pub fn t_crit(params: &GlobalParams, alpha2: f64) -> Result<f64> {
    if !(params.r > 0.0) {
        return Err(Error::DecayRequired);
    }
    if params.sigma_s == 0.0 {
        // the sign factor sigma_a*alpha2 never moves
        return Err(if params.sigma_a * alpha2 > 0.0 {
            Error::AlwaysIncreasing {
                arg: f64::NEG_INFINITY,
            }
        } else {
            Error::NeverIncreasing { arg: f64::INFINITY }
        });
    }
    let arg = params.mu_s - params.sigma_a * alpha2 / params.sigma_s;
    if arg <= 0.0 {
        return Err(Error::AlwaysIncreasing { arg });
    }
    if arg > 1.0 {
        return Err(Error::NeverIncreasing { arg });
    }
    Ok(-arg.ln() / params.r)
}

/// Upper bounds on how many periods x2 needs to act when M > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionBounds {
    /// Periods until x2 is past the expansion/contraction split x*.
    pub m: u64,
    /// Further periods from there to the threshold.
    pub n_after: u64,
    /// (m + n_after) * T: an upper bound on x2's first action time.
    pub horizon: f64,
}

/// Ceiling-formula bounds on x2's first action, starting from x2(0) = 0 under
/// the h3 initial data. Requires M > 0.
///
/// x2 first coasts nudge-free over [0, T] to x2(T) = tanh(A2 T), then the
/// period map applies. Iterates of f are computed in atanh space, where each
/// period adds exactly M, so deep tanh saturation never forces an atanh of a
/// value at +-1.
pub fn action_bounds(params: &GlobalParams, alpha1: f64, alpha2: f64) -> Result<ActionBounds> {
    let k = TwoBodyConstants::new(params, alpha1, alpha2)?;
    let m_inv = k.invariant;
    if !(m_inv > 0.0) {
        return Err(Error::BoundsUndefined { invariant: m_inv });
    }
    let tau = params.tau;
    let xstar = fixed_point_xstar(m_inv)?;
    // atanh(x2) after the nudge-free stretch
    let w1 = k.a2 * k.period;
    let s1 = w1.tanh();
    let periods_past_xstar: u64 = if s1 > xstar {
        1
    } else {
        let gain = (w1 + m_inv).tanh() - s1;
        if gain > 0.0 {
            (((xstar - s1) / gain).ceil()).max(1.0) as u64
        } else {
            // tanh is flat to machine precision this deep; count in atanh
            // space instead, where the per-period gain is exactly M
            let wstar = checked_atanh(xstar)?;
            (((wstar - w1) / m_inv).ceil() + 1.0).max(1.0) as u64
        }
    };
    let x_m = (w1 + (periods_past_xstar - 1) as f64 * m_inv).tanh();
    let n_after: u64 = if x_m >= tau {
        0
    } else {
        let gain_tau = (checked_atanh(tau)? + m_inv).tanh() - tau;
        (((tau - x_m) / gain_tau).ceil()).max(0.0) as u64
    };
    let horizon = (periods_past_xstar + n_after) as f64 * k.period;
    Ok(ActionBounds {
        m: periods_past_xstar,
        n_after,
        horizon,
    })
}

/// Classifies the two-individual system from zero initial data (x2(0) < tau),
/// implementing the full summary table:
///
/// | sgn(margin_hi) | sgn(margin_lo) | sgn(M) | regime  |
/// |----------------|----------------|--------|---------|
/// | <= 0           | (forced <= 0)  |        | NoAction |
/// | > 0            | > 0            |        | FullAction |
/// | > 0            | <= 0           | > 0    | FullAction |
/// | > 0            | <= 0           | <= 0   | PartialAction (high-alpha individual) |
///
/// where "hi" is the individual with the larger alpha. The margin-zero row of
/// the table ("positive, zero" -> full action) falls out of the M route: with
/// an effective social channel M > 0 there, and with sigma_s = 0 the nudge
/// moves nothing and M = 0 yields partial action. A dead control channel
/// (sigma_c*mu_c = 0) freezes every intention, so nobody ever acts.
///
/// Callers may pass the alphas in either order; actors are reported in the
/// original indexing.
pub fn classify_two(params: &GlobalParams, alpha1: f64, alpha2: f64) -> Result<Classification> {
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !(a.is_finite() && a.abs() < 1.0) {
            return Err(Error::AlphaOutOfRange { name, value: a });
        }
    }
    let margins = vec![params.margin(alpha1), params.margin(alpha2)];
    let alphas = [alpha1, alpha2];
    let hi = if alpha1 >= alpha2 { 0 } else { 1 };
    let lo = 1 - hi;
    let margin_hi = params.margin(alphas[hi]);
    let margin_lo = params.margin(alphas[lo]);

    if margin_hi <= 0.0 || params.sigma_c * params.mu_c == 0.0 {
        return Ok(Classification {
            regime: Regime::NoAction,
            actors: vec![],
            evidence: Evidence {
                invariant: None,
                margins,
            },
        });
    }
    if margin_lo > 0.0 {
        return Ok(Classification {
            regime: Regime::FullAction,
            actors: vec![],
            evidence: Evidence {
                invariant: None,
                margins,
            },
        });
    }
    let m = invariant_m(params, alphas[hi], alphas[lo])?;
    if m > M_ZERO_BAND {
        Ok(Classification {
            regime: Regime::FullAction,
            actors: vec![],
            evidence: Evidence {
                invariant: Some(m),
                margins,
            },
        })
    } else {
        Ok(Classification {
            regime: Regime::PartialAction,
            actors: vec![hi],
            evidence: Evidence {
                invariant: Some(m),
                margins,
            },
        })
    }
}

/// The attitude alpha2 that zeroes the constant B: sigma_s(mu_s - mu_c)/sigma_a.
pub fn alpha2_for_b_zero(params: &GlobalParams) -> Result<f64> {
    if !(params.sigma_a > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "sigma_a",
            value: params.sigma_a,
            constraint: "> 0",
        });
    }
    let alpha2 = params.sigma_s * (params.mu_s - params.mu_c) / params.sigma_a;
    if !(alpha2.is_finite() && alpha2.abs() < 1.0) {
        return Err(Error::AlphaOutOfRange {
            name: "alpha2",
            value: alpha2,
        });
    }
    Ok(alpha2)
}

/// Closed-form minimal alpha1 for which x2 acts, in the B = 0 special case
/// (alpha2 = sigma_s(mu_s - mu_c)/sigma_a).
///
/// Setting M = 0 with B = 0 gives A2*T + C e^{-2rT} = C, whose nontrivial
/// root is T = 2*Theta with
///
/// ```text
/// Theta = C/(2 A2) + (1/(4r)) W(-(2rC/A2) e^{-2rC/A2})
/// ```
///
/// U = 1 (T = 0) always solves the equation; one W branch reproduces it and
/// is discarded, the other yields the positive period when one exists
/// (mu_c < 1; for mu_c >= 1 the invariant never turns positive and there is
/// no boundary to find). The period then pins A1 = atanh(tau)/T, hence
///
/// ```text
/// alpha1 = [atanh(tau)/(sigma_c*mu_c) + sigma_s*mu_s*2*Theta] / (sigma_a*2*Theta)
/// ```
///
/// An alpha1 outside (-1, 1) is reported as out of range.
pub fn min_alpha1_for_action_b0(params: &GlobalParams) -> Result<f64> {
    if !(params.r > 0.0) {
        return Err(Error::DecayRequired);
    }
    let alpha2 = alpha2_for_b_zero(params)?;
    let a2 = params.rate(alpha2);
    let c = -params.sigma_s * params.sigma_c / (2.0 * params.r);
    if a2 == 0.0 || c == 0.0 {
        // dead social or control channel: M never changes sign in alpha1
        return Err(Error::NoPositivePeriodRoot);
    }
    let q = 2.0 * params.r * c / a2;
    let z = -q * (-q).exp();
    let mut period: Option<f64> = None;
    for branch in [LambertBranch::Principal, LambertBranch::MinusOne] {
        let Ok(w) = lambert_w(branch, z) else {
            continue;
        };
        let theta = c / (2.0 * a2) + w / (4.0 * params.r);
        let t = 2.0 * theta;
        // discard the trivial root T = 0 and negative-period roots
        if t > 1e-9 * (c / a2).abs().max(1.0) {
            period = Some(t);
            break;
        }
    }
    let Some(t) = period else {
        return Err(Error::NoPositivePeriodRoot);
    };
    let a1_needed = checked_atanh(params.tau)? / t;
    let alpha1 =
        (a1_needed / (params.sigma_c * params.mu_c) + params.sigma_s * params.mu_s) / params.sigma_a;
    if !(alpha1.is_finite() && alpha1.abs() < 1.0) {
        return Err(Error::AlphaOutOfRange {
            name: "alpha1",
            value: alpha1,
        });
    }
    Ok(alpha1)
}

/// Bisection on sign(M(alpha1)) over the positive-margin interval; the
/// independent cross-check for the closed form above.
pub fn min_alpha1_bisect(params: &GlobalParams, alpha2: f64, tol: f64) -> Result<f64> {
    if !(params.sigma_a > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "sigma_a",
            value: params.sigma_a,
            constraint: "> 0",
        });
    }
    let alpha_c = params.sigma_s * params.mu_s / params.sigma_a;
    let mut lo = alpha_c + 1e-12 * alpha_c.abs().max(1.0);
    let mut hi = 1.0 - 1e-12;
    let f = |a: f64| invariant_m(params, a, alpha2);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoPositivePeriodRoot);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::two_body_solution;

    fn params_fig6() -> GlobalParams {
        GlobalParams::new(1.0, 0.5, 0.5, 0.5, 0.05, 0.86, 0.8, 2).unwrap()
    }

    #[test]
    fn invariant_vanishes_as_tau_shrinks() {
        let mut params = params_fig6();
        params.tau = 1e-8;
        let m = invariant_m(&params, 0.6, -0.2).unwrap();
        assert!(m.abs() < 1e-7, "M = {m}");
    }

    #[test]
    fn invariant_positive_at_zero_margin_for_individual_two() {
        // sigma_a*alpha2 = sigma_s*mu_s exactly
        let params = params_fig6();
        let m = invariant_m(&params, 0.6, 0.25).unwrap();
        assert!(m > 0.0, "any nudge nets an increase when the margin is zero, M = {m}");
    }

    #[test]
    fn invariant_requires_positive_rate_and_decay() {
        let params = params_fig6();
        assert!(matches!(
            invariant_m(&params, 0.2, -0.2),
            Err(Error::RateNotPositive { .. })
        ));
        let mut frozen = params;
        frozen.r = 0.0;
        assert!(matches!(
            invariant_m(&frozen, 0.6, -0.2),
            Err(Error::DecayRequired)
        ));
    }

    #[test]
    fn map_is_identity_at_zero_and_tanh_at_origin() {
        for &x in &[-0.95, -0.4, 0.0, 0.3, 0.9] {
            assert!((map_f(0.0, x).unwrap() - x).abs() < 1e-15);
        }
        for &m in &[0.1, 0.7, 2.0] {
            assert!((map_f(m, 0.0).unwrap() - m.tanh()).abs() < 1e-15);
        }
        assert!(map_f(0.5, 1.0).is_err());
        assert!(map_f(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn map_matches_rational_form() {
        for i in 0..20 {
            let m = -2.0 + 4.0 * i as f64 / 19.0;
            for j in 0..20 {
                let x = -0.95 + 1.9 * j as f64 / 19.0;
                let via_tanh = map_f(m, x).unwrap();
                let th = m.tanh();
                let rational = (x + th) / (1.0 + x * th);
                assert!(
                    (via_tanh - rational).abs() <= 1e-12,
                    "m={m} x={x}: {via_tanh} vs {rational}"
                );
            }
        }
    }

    #[test]
    fn map_preserves_order_and_the_open_interval() {
        for i in 0..15 {
            let m = -3.0 + 6.0 * i as f64 / 14.0;
            let mut prev = f64::NEG_INFINITY;
            for j in 0..40 {
                let x = -0.999 + 1.998 * j as f64 / 39.0;
                let fx = map_f(m, x).unwrap();
                assert!(fx > prev, "M={m}: f must be strictly increasing");
                assert!(fx.abs() < 1.0, "M={m} x={x}: f left the open interval");
                prev = fx;
            }
        }
    }

    #[test]
    fn map_extends_continuously_to_the_corners() {
        // |f(+-(1 - 1e-9))| > 1 - 1e-6 holds for M below ~3.4, where the shift
        // M does not eat the atanh(1 - 1e-9) headroom on the lower side
        for &m in &[0.3, 1.0, 3.0] {
            let hi = map_f(m, 1.0 - 1e-9).unwrap();
            let lo = map_f(m, -(1.0 - 1e-9)).unwrap();
            assert!(hi > 1.0 - 1e-6, "M={m}: f(1-1e-9) = {hi}");
            assert!(lo < -(1.0 - 1e-6), "M={m}: f(-(1-1e-9)) = {lo}");
            // still maps into (-1, 1)
            assert!(hi < 1.0 && lo > -1.0);
        }
    }

    #[test]
    fn xstar_matches_the_quadratic_root_form() {
        for i in 1..=60 {
            let m = 0.05 * i as f64;
            let stable = fixed_point_xstar(m).unwrap();
            let th = m.tanh();
            let quadratic_root = -(1.0 - (1.0 - th * th).sqrt()) / th;
            assert!(
                (stable - quadratic_root).abs() < 1e-12,
                "M={m}: {stable} vs {quadratic_root}"
            );
            assert!(stable > -1.0 && stable < 0.0);
        }
    }

    #[test]
    fn xstar_limits_and_monotonicity() {
        assert!(fixed_point_xstar(1e-8).unwrap().abs() < 1e-6);
        assert!((fixed_point_xstar(30.0).unwrap() + 1.0).abs() < 1e-6);
        assert!(fixed_point_xstar(0.0).is_err());
        assert!(fixed_point_xstar(-1.0).is_err());
        let mut prev = fixed_point_xstar(0.01).unwrap();
        for i in 2..=100 {
            let m = 0.05 * i as f64;
            let cur = fixed_point_xstar(m).unwrap();
            assert!(cur < prev, "x*(M) must decrease, M={m}");
            prev = cur;
        }
    }

    #[test]
    fn map_derivative_is_one_at_xstar() {
        let h = 1e-6;
        let fd = |m: f64, x: f64| {
            (map_f(m, x + h).unwrap() - map_f(m, x - h).unwrap()) / (2.0 * h)
        };
        for &m in &[0.05, 0.4, 1.3, 3.0] {
            let xs = fixed_point_xstar(m).unwrap();
            let d = fd(m, xs);
            assert!((d - 1.0).abs() < 1e-6, "M={m}: f'(x*) = {d}");
            // probes on each side, kept inside the open interval
            let below = (xs - 0.1).max(0.5 * (xs - 1.0));
            let above = xs + 0.1;
            assert!(fd(m, below) > 1.0, "M={m}: expansion below x*");
            assert!(fd(m, above) < 1.0, "M={m}: contraction above x*");
        }
    }

    #[test]
    fn t_crit_boundary_values() {
        // mu_s - sigma_a*alpha2/sigma_s = 1 exactly: alpha2 = sigma_s(mu_s-1)/sigma_a
        let params = params_fig6();
        let a_boundary = params.sigma_s * (params.mu_s - 1.0) / params.sigma_a;
        assert_eq!(t_crit(&params, a_boundary).unwrap(), 0.0);
        // argument e^{-r} by construction => t_crit = 1
        let arg = (-params.r).exp();
        let alpha2 = params.sigma_s * (params.mu_s - arg) / params.sigma_a;
        let t = t_crit(&params, alpha2).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        // regimes
        assert!(matches!(
            t_crit(&params, 0.3),
            Err(Error::AlwaysIncreasing { .. })
        ));
        assert!(matches!(
            t_crit(&params, -0.9),
            Err(Error::NeverIncreasing { .. })
        ));
    }

    #[test]
    fn t_crit_is_where_the_numeric_derivative_flips() {
        let params = params_fig6();
        let alpha1 = 0.3; // long period so t_crit < T
        let alpha2 = -0.1;
        let tc = t_crit(&params, alpha2).unwrap();
        let k = TwoBodyConstants::new(&params, alpha1, alpha2).unwrap();
        assert!(tc < k.period);
        let h = 1e-7;
        let deriv = |t: f64| {
            (two_body_solution(&k, 0.0, t + h).unwrap()
                - two_body_solution(&k, 0.0, t - h).unwrap())
                / (2.0 * h)
        };
        let (mut lo, mut hi) = (h, k.period - h);
        assert!(deriv(lo) > 0.0 && deriv(hi) < 0.0);
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if deriv(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let found = 0.5 * (lo + hi);
        assert!(
            (found - tc).abs() < 1e-8,
            "bisection found {found}, formula {tc}"
        );
    }

    #[test]
    fn bounds_when_x2_already_past_xstar() {
        // equal attitudes: x2(T) = tau up to a tanh/atanh round-trip, so x2 is
        // already past x* (m = 1) and at most one rounding-induced period remains
        let params = params_fig6();
        let b = action_bounds(&params, 0.6, 0.6).unwrap();
        assert_eq!(b.m, 1);
        assert!(b.n_after <= 1);
        let k = TwoBodyConstants::new(&params, 0.6, 0.6).unwrap();
        assert!(b.horizon <= 2.0 * k.period + 1e-12);
    }

    #[test]
    fn bounds_require_positive_invariant() {
        let params = params_fig6();
        assert!(matches!(
            action_bounds(&params, 0.6, -0.8),
            Err(Error::BoundsUndefined { .. })
        ));
    }

    #[test]
    fn bounds_cover_the_map_iteration() {
        let params = params_fig6();
        for &(a1, a2) in &[(0.5, 0.23), (0.4, 0.24), (0.8, 0.2), (0.5, 0.3), (0.3, 0.245)] {
            let k = TwoBodyConstants::new(&params, a1, a2).unwrap();
            if k.invariant <= 0.0 {
                continue;
            }
            let b = action_bounds(&params, a1, a2).unwrap();
            // iterate the exact per-period update; x2 must reach tau within
            // m + n_after periods
            let mut w = k.a2 * k.period;
            let mut hit = w.tanh() >= params.tau;
            let mut periods = 1u64;
            while !hit && periods < b.m + b.n_after {
                w += k.invariant;
                periods += 1;
                hit = w.tanh() >= params.tau;
            }
            assert!(
                hit,
                "(a1={a1}, a2={a2}): map did not reach tau within m+n = {} periods",
                b.m + b.n_after
            );
        }
    }

    #[test]
    fn classification_table_rows() {
        let params = params_fig6();
        // both margins negative
        let c = classify_two(&params, 0.1, -0.3).unwrap();
        assert_eq!(c.regime, Regime::NoAction);
        assert!(c.actors.is_empty());
        // larger margin exactly zero (alpha = 0.25 makes it exact here)
        let c = classify_two(&params, 0.25, -0.1).unwrap();
        assert_eq!(c.regime, Regime::NoAction);
        // both positive
        let c = classify_two(&params, 0.6, 0.3).unwrap();
        assert_eq!(c.regime, Regime::FullAction);
        assert!(c.actors.is_empty());
        assert!(c.evidence.invariant.is_none());
        // positive and zero
        let c = classify_two(&params, 0.6, 0.25).unwrap();
        assert_eq!(c.regime, Regime::FullAction);
        assert!(c.evidence.invariant.unwrap() > 0.0);
        // mixed with M > 0
        let c = classify_two(&params, 0.5, 0.23).unwrap();
        assert_eq!(c.regime, Regime::FullAction);
        assert!(c.evidence.invariant.unwrap() > 0.0);
        // mixed with M <= 0
        let c = classify_two(&params, 0.5, -0.5).unwrap();
        assert_eq!(c.regime, Regime::PartialAction);
        assert_eq!(c.actors, vec![0]);
        assert!(c.evidence.invariant.unwrap() <= 0.0);
    }

    #[test]
    fn classification_is_symmetric_up_to_relabeling() {
        let params = params_fig6();
        for &(a1, a2) in &[(0.5, -0.5), (0.6, 0.3), (0.1, -0.3), (0.5, 0.05)] {
            let fwd = classify_two(&params, a1, a2).unwrap();
            let rev = classify_two(&params, a2, a1).unwrap();
            assert_eq!(fwd.regime, rev.regime);
            let relabeled: Vec<usize> = rev.actors.iter().map(|&i| 1 - i).collect();
            assert_eq!(fwd.actors, relabeled);
            assert_eq!(fwd.evidence.margins[0], rev.evidence.margins[1]);
        }
    }

    #[test]
    fn degenerate_control_channel_never_acts() {
        let params = GlobalParams::new(1.0, 0.5, 0.0, 0.5, 0.05, 0.86, 0.8, 2).unwrap();
        let c = classify_two(&params, 0.9, 0.8).unwrap();
        assert_eq!(c.regime, Regime::NoAction);
        let zero_dynamics = GlobalParams::new(0.0, 0.0, 0.0, 0.5, 0.0, 0.86, 0.8, 2).unwrap();
        let c = classify_two(&zero_dynamics, 0.9, 0.8).unwrap();
        assert_eq!(c.regime, Regime::NoAction);
    }

    #[test]
    fn min_alpha1_closed_form_zeroes_the_invariant() {
        let params = params_fig6();
        let alpha2 = alpha2_for_b_zero(&params).unwrap();
        let alpha1 = min_alpha1_for_action_b0(&params).unwrap();
        assert!(alpha1.abs() < 1.0);
        let m = invariant_m(&params, alpha1, alpha2).unwrap();
        assert!(m.abs() <= 1e-9, "M(alpha1*) = {m}");
        // crossing the root flips the sign
        let eps = 1e-6;
        assert!(invariant_m(&params, alpha1 + eps, alpha2).unwrap() > 0.0);
        assert!(invariant_m(&params, alpha1 - eps, alpha2).unwrap() < 0.0);
    }

    #[test]
    fn min_alpha1_matches_bisection() {
        let params = params_fig6();
        let alpha2 = alpha2_for_b_zero(&params).unwrap();
        let closed = min_alpha1_for_action_b0(&params).unwrap();
        let bisected = min_alpha1_bisect(&params, alpha2, 1e-12).unwrap();
        assert!(
            (closed - bisected).abs() <= 1e-8,
            "closed {closed} vs bisected {bisected}"
        );
    }

    #[test]
    fn min_alpha1_rejects_degenerate_setups() {
        // mu_c >= 1: the invariant never turns positive, no boundary exists
        let params = GlobalParams::new(1.0, 0.5, 0.5, 0.5, 1.3, 0.86, 0.8, 2).unwrap();
        assert!(matches!(
            min_alpha1_for_action_b0(&params),
            Err(Error::NoPositivePeriodRoot)
        ));
        // dead social channel
        let dead = GlobalParams::new(1.0, 0.0, 0.5, 0.5, 0.05, 0.86, 0.8, 2).unwrap();
        assert!(min_alpha1_for_action_b0(&dead).is_err());
        // B = 0 needs |alpha2| < 1
        let wild = GlobalParams::new(0.1, 1.0, 0.5, 1.0, 0.0, 0.86, 0.8, 2).unwrap();
        assert!(matches!(
            min_alpha1_for_action_b0(&wild),
            Err(Error::AlphaOutOfRange { .. })
        ));
    }
}
