//! Real branches of the Lambert W function (the inverse of w*e^w), solved by
//! Halley iteration from branch-appropriate starting guesses.

use crate::error::{Error, Result};

/// Which real branch of W to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambertBranch {
    /// W_0: defined for z >= -1/e, with W_0(z) >= -1.
    Principal,
    /// W_{-1}: defined for -1/e <= z < 0, with W_{-1}(z) <= -1.
    MinusOne,
}

impl LambertBranch {
    fn name(self) -> &'static str {
        match self {
            LambertBranch::Principal => "principal",
            LambertBranch::MinusOne => "minus-one",
        }
    }
}

const NEG_INV_E: f64 = -0.36787944117144233;

/// Solves w*e^w = z on the requested branch. The residual |w*e^w - z| is kept
/// below 1e-12 * max(1, |z|).
pub fn lambert_w(branch: LambertBranch, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::LambertDomain {
            branch: branch.name(),
            z,
        });
    }
    // Branch point: both branches meet at W(-1/e) = -1. Near it the usual
    // iteration loses its footing (W' blows up), so answer directly.
    let off = z - NEG_INV_E;
    if off.abs() < 1e-15 {
        return Ok(-1.0);
    }
    if off < 0.0 {
        return Err(Error::LambertDomain {
            branch: branch.name(),
            z,
        });
    }
    let mut w = match branch {
        LambertBranch::Principal => {
            if z == 0.0 {
                return Ok(0.0);
            }
            if z < -0.25 {
                // series around the branch point
                let p = (2.0 * (std::f64::consts::E * z + 1.0)).sqrt();
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else if z < 2.0 {
                (1.0 + z).ln()
            } else {
                let l = z.ln();
                l - l.ln()
            }
        }
        LambertBranch::MinusOne => {
            if z >= 0.0 {
                return Err(Error::LambertDomain {
                    branch: branch.name(),
                    z,
                });
            }
            if z < -0.25 {
                let p = (2.0 * (std::f64::consts::E * z + 1.0)).sqrt();
                -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
            } else {
                // asymptotic form for z -> 0^-
                let l = (-z).ln();
                l - (-l).ln()
            }
        }
    };

    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        // Halley step; the second-order correction keeps convergence cubic.
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        if !dw.is_finite() {
            break;
        }
        w -= dw;
        if dw.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }

    let residual = (w * w.exp() - z).abs();
    if residual > 1e-12 * z.abs().max(1.0) {
        return Err(Error::LambertDomain {
            branch: branch.name(),
            z,
        });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_basics() {
        assert_eq!(lambert_w(LambertBranch::Principal, 0.0).unwrap(), 0.0);
        let w = lambert_w(LambertBranch::Principal, std::f64::consts::E).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn branch_point_maps_to_minus_one() {
        let z = -1.0 / std::f64::consts::E;
        let w0 = lambert_w(LambertBranch::Principal, z).unwrap();
        let wm = lambert_w(LambertBranch::MinusOne, z).unwrap();
        assert_eq!(w0, -1.0);
        assert_eq!(wm, -1.0);
    }

    #[test]
    fn domains_are_enforced() {
        assert!(lambert_w(LambertBranch::Principal, -0.4).is_err());
        assert!(lambert_w(LambertBranch::MinusOne, -0.4).is_err());
        assert!(lambert_w(LambertBranch::MinusOne, 0.0).is_err());
        assert!(lambert_w(LambertBranch::MinusOne, 0.5).is_err());
        assert!(lambert_w(LambertBranch::Principal, f64::NAN).is_err());
    }

    #[test]
    fn round_trips_w_exp_w() {
        // principal branch: w in [-1, 4]
        for i in 0..=100 {
            let w = -1.0 + 5.0 * i as f64 / 100.0;
            let z = w * w.exp();
            let back = lambert_w(LambertBranch::Principal, z).unwrap();
            let residual = (back * back.exp() - z).abs();
            assert!(residual <= 1e-12 * z.abs().max(1.0), "w={w} residual={residual}");
            assert!((back - w).abs() < 1e-8 * (1.0 + w.abs()), "w={w} back={back}");
        }
        // minus-one branch: w in [-25, -1]
        for i in 0..=100 {
            let w = -1.0 - 24.0 * i as f64 / 100.0;
            let z = w * w.exp();
            let back = lambert_w(LambertBranch::MinusOne, z).unwrap();
            let residual = (back * back.exp() - z).abs();
            assert!(residual <= 1e-12 * z.abs().max(1.0), "w={w} residual={residual}");
            assert!((back - w).abs() < 1e-8 * (1.0 + w.abs()), "w={w} back={back}");
        }
    }

    #[test]
    fn near_branch_point_stays_accurate() {
        for &eps in &[1e-14, 1e-12, 1e-9, 1e-6, 1e-3] {
            let z = NEG_INV_E + eps;
            for branch in [LambertBranch::Principal, LambertBranch::MinusOne] {
                let w = lambert_w(branch, z).unwrap();
                let residual = (w * w.exp() - z).abs();
                assert!(residual <= 1e-12, "eps={eps} {branch:?} residual={residual}");
            }
        }
    }
}
