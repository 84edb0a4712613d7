//! Shared draw generators and reference oracles for the acceptance suite.
//!
//! Draws are rejection-sampled into the six rows of the classification table.
//! Mixed-margin rows keep |M| >= 1e-3 (well clear of the boundary band), keep
//! trajectories away from tanh saturation so sign checks stay resolvable, and
//! keep the action-bound horizon inside the 40-period classification window.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tpb_dynamics::{action_bounds, invariant_m, GlobalParams, TwoBodyConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRow {
    /// margin1 < 0 (margin2 forced negative)
    BothNegative,
    /// margin1 = 0 exactly
    LargerZero,
    /// both margins positive
    BothPositive,
    /// margin1 > 0, margin2 = 0 exactly
    SmallerZero,
    /// mixed margins, M > 0
    MixedGrowing,
    /// mixed margins, M < 0
    MixedShrinking,
}

#[derive(Debug, Clone, Copy)]
pub struct Draw {
    pub params: GlobalParams,
    /// larger attitude
    pub alpha1: f64,
    /// smaller attitude
    pub alpha2: f64,
    pub row: TableRow,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn in_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Margin-zero attitude sigma_s*mu_s/sigma_a.
pub fn alpha_crit(params: &GlobalParams) -> f64 {
    params.sigma_s * params.mu_s / params.sigma_a
}

/// Random globals with a margin boundary comfortably inside (0, 1) and live
/// social and control channels.
pub fn sample_globals(rng: &mut ChaCha8Rng) -> GlobalParams {
    loop {
        let params = GlobalParams {
            sigma_a: in_range(rng, 0.6, 1.6),
            sigma_s: in_range(rng, 0.25, 1.2),
            sigma_c: in_range(rng, 0.3, 1.2),
            mu_s: in_range(rng, 0.25, 0.85),
            mu_c: in_range(rng, 0.05, 0.7),
            r: in_range(rng, 0.3, 2.0),
            tau: in_range(rng, 0.55, 0.9),
            n: 2,
        };
        if params.validate().is_err() {
            continue;
        }
        let ac = alpha_crit(&params);
        if (0.08..=0.6).contains(&ac) {
            return params;
        }
    }
}

/// Globals engineered so that margin(alpha_zero) is exactly 0 in f64:
/// sigma_a = 1, sigma_s = 1/2, mu_s = 2*alpha_zero with alpha_zero dyadic.
pub fn sample_globals_exact_zero(rng: &mut ChaCha8Rng) -> (GlobalParams, f64) {
    let k = rng.gen_range(8..=30); // alpha_zero in [0.125, 0.46875]
    let alpha_zero = k as f64 / 64.0;
    let params = GlobalParams {
        sigma_a: 1.0,
        sigma_s: 0.5,
        sigma_c: in_range(rng, 0.3, 1.2),
        mu_s: 2.0 * alpha_zero,
        mu_c: in_range(rng, 0.05, 0.7),
        r: in_range(rng, 0.3, 2.0),
        tau: in_range(rng, 0.55, 0.9),
        n: 2,
    };
    assert_eq!(params.margin(alpha_zero), 0.0);
    (params, alpha_zero)
}

/// One draw for the requested table row. Mixed rows guarantee
/// 1e-3 <= |M| <= m_cap, |A2*T| <= 2, and (for the growing case) an action
/// bound of at most `max_bound_periods` periods.
pub fn sample_row(rng: &mut ChaCha8Rng, row: TableRow, max_bound_periods: u64) -> Draw {
    for _ in 0..20_000 {
        match row {
            TableRow::BothNegative => {
                let params = sample_globals(rng);
                let ac = alpha_crit(&params);
                let alpha1 = in_range(rng, -0.5f64.max(ac - 0.6), ac - 0.02);
                let alpha2 = in_range(rng, alpha1 - 0.3, alpha1).max(-0.95);
                if params.margin(alpha1) < 0.0 && alpha2 < alpha1 {
                    return Draw {
                        params,
                        alpha1,
                        alpha2,
                        row,
                    };
                }
            }
            TableRow::LargerZero => {
                let (params, alpha_zero) = sample_globals_exact_zero(rng);
                let alpha2 = in_range(rng, alpha_zero - 0.3, alpha_zero).max(-0.95);
                return Draw {
                    params,
                    alpha1: alpha_zero,
                    alpha2,
                    row,
                };
            }
            TableRow::BothPositive => {
                let params = sample_globals(rng);
                let ac = alpha_crit(&params);
                let m1 = in_range(rng, 0.05, 0.95 - ac) * params.sigma_a;
                let alpha1 = ac + m1 / params.sigma_a;
                // cap the period ratio so both act within the window
                let m2 = in_range(rng, m1 / 30.0, 0.9 * m1);
                let alpha2 = ac + m2 / params.sigma_a;
                if alpha1 < 0.95
                    && alpha2 < alpha1
                    && params.margin(alpha1) > 0.0
                    && params.margin(alpha2) > 0.0
                {
                    return Draw {
                        params,
                        alpha1,
                        alpha2,
                        row,
                    };
                }
            }
            TableRow::SmallerZero => {
                let (params, alpha_zero) = sample_globals_exact_zero(rng);
                let alpha1 = in_range(rng, alpha_zero + 0.03, (alpha_zero + 0.5).min(0.95));
                if params.margin(alpha1) <= 0.0 {
                    continue;
                }
                let Ok(bounds) = action_bounds(&params, alpha1, alpha_zero) else {
                    continue;
                };
                if bounds.m + bounds.n_after <= max_bound_periods {
                    return Draw {
                        params,
                        alpha1,
                        alpha2: alpha_zero,
                        row,
                    };
                }
            }
            TableRow::MixedGrowing | TableRow::MixedShrinking => {
                let params = sample_globals(rng);
                let ac = alpha_crit(&params);
                let alpha1 = in_range(rng, ac + 0.05, 0.95);
                if params.margin(alpha1) <= 0.0 {
                    continue;
                }
                let alpha2 = in_range(rng, (ac - 0.4).max(-0.9), ac - 1e-4);
                if params.margin(alpha2) >= 0.0 {
                    continue;
                }
                let Ok(k) = TwoBodyConstants::new(&params, alpha1, alpha2) else {
                    continue;
                };
                if (k.a2 * k.period).abs() > 2.0 {
                    continue;
                }
                let m = k.invariant;
                let wanted = if row == TableRow::MixedGrowing {
                    (1e-3..=0.35).contains(&m)
                } else {
                    (-0.35..=-1e-3).contains(&m)
                };
                if !wanted {
                    continue;
                }
                if row == TableRow::MixedGrowing {
                    let Ok(bounds) = action_bounds(&params, alpha1, alpha2) else {
                        continue;
                    };
                    if bounds.m + bounds.n_after > max_bound_periods {
                        continue;
                    }
                }
                return Draw {
                    params,
                    alpha1,
                    alpha2,
                    row,
                };
            }
        }
    }
    panic!("rejection sampling failed for {row:?}");
}

/// Globals admitting the B = 0 construction with a minimal alpha1 strictly
/// inside the positive-margin interval. Returns (params, alpha2_b0, alpha1*).
pub fn sample_b_zero(rng: &mut ChaCha8Rng) -> (GlobalParams, f64, f64) {
    use tpb_dynamics::{analytic, min_alpha1_for_action_b0};
    for _ in 0..20_000 {
        let mut params = sample_globals(rng);
        // the positive root needs mu_c < 1; keep it away from both endpoints
        params.mu_c = in_range(rng, 0.08, 0.8);
        if params.validate().is_err() {
            continue;
        }
        let Ok(alpha2) = analytic::alpha2_for_b_zero(&params) else {
            continue;
        };
        let Ok(alpha1) = min_alpha1_for_action_b0(&params) else {
            continue;
        };
        let ac = alpha_crit(&params);
        if alpha1 > ac + 1e-4 && alpha1 < 0.98 && alpha2 < alpha1 {
            return (params, alpha2, alpha1);
        }
    }
    panic!("rejection sampling failed for the B = 0 family");
}

/// Cor-3 lower bound on the gap between consecutive actions of the same
/// individual.
pub fn spacing_bound(params: &GlobalParams, alpha: f64) -> f64 {
    params.tau
        / ((params.sigma_a * alpha + params.sigma_s - params.sigma_s * params.mu_s)
            * params.sigma_c
            * (1.0 + params.mu_c))
}

/// Asserts every same-individual event gap in `events` respects the bound.
pub fn assert_spacing(
    params: &GlobalParams,
    alphas: &[f64],
    events: &[tpb_dynamics::ActionEvent],
    event_tol: f64,
    context: &str,
) {
    let n = alphas.len();
    let mut last: Vec<Option<f64>> = vec![None; n];
    for e in events {
        if let Some(prev) = last[e.individual] {
            let gap = e.t - prev;
            let bound = spacing_bound(params, alphas[e.individual]);
            assert!(
                gap >= bound - event_tol,
                "{context}: individual {} re-fired after {gap}, bound {bound}",
                e.individual
            );
        }
        last[e.individual] = Some(e.t);
    }
}

/// Every invariant_m(...) evaluation in the draw's mixed rows; None elsewhere.
pub fn draw_invariant(draw: &Draw) -> Option<f64> {
    invariant_m(&draw.params, draw.alpha1, draw.alpha2).ok()
}
