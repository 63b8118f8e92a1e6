//! Bookkeeping for the outward-cusp constants `(epsilon0, rho, r)`.

use alloc::format;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::{Error, Result};

/// Constants of the polynomial outward-cusp condition: for `eps < epsilon0`
/// a ball of radius `rho * eps^r` fits in the set within distance `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspConstants {
    pub epsilon0: f64,
    pub rho: f64,
    pub r: f64,
}

impl CuspConstants {
    pub fn new(epsilon0: f64, rho: f64, r: f64) -> Result<Self> {
        if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
            return Err(Error::Argument(format!("epsilon0 must be positive, got {epsilon0}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Argument(format!("rho must be positive, got {rho}")));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::Argument(format!("r must be at least 1, got {r}")));
        }
        Ok(Self { epsilon0, rho, r })
    }

    /// Ball radius `rho * eps^r` at scale `eps`.
    pub fn radius(&self, eps: f64) -> f64 {
        self.rho * eps.powf(self.r)
    }

    pub fn is_normalized(&self) -> bool {
        self.rho == 1.0 && self.r >= 2.0
    }
}

/// Guard for the exponent searches below.
const MAX_EXPONENT: f64 = 1e6;

/// Smallest integer not below `x`, forgiving rounding just above an integer.
fn integer_ceil(x: f64) -> f64 {
    let c = x.ceil();
    if c - x > 1.0 - 1e-12 {
        c - 1.0
    } else {
        c
    }
}

/// Trades `rho` for a larger exponent: `(min{epsilon0, rho, 0.99}, 1, r')`
/// with `r'` the smallest integer `>= max(r + 1, 2)` such that
/// `eps^r' <= rho eps^r` for all `eps` in `(0, epsilon0']`.
pub fn normalize_constants(c: CuspConstants) -> CuspConstants {
    let epsilon0 = c.epsilon0.min(c.rho).min(0.99);
    let mut r = integer_ceil((c.r + 1.0).max(2.0));
    // eps^(r'-r) is increasing in eps, so the worst case is eps = epsilon0.
    while epsilon0.powf(r - c.r) > c.rho && r < MAX_EXPONENT {
        r += 1.0;
    }
    CuspConstants { epsilon0, rho: 1.0, r }
}

/// Constants for a second metric `d_2` with `d_1 <= C d_2^alpha` and
/// `d_2 <= C d_1^alpha`, starting from normalized constants for `d_1`:
///
/// * `epsilon0_2 = min{C epsilon0_1^alpha, 1/2}`
/// * `rho = 1 / C^(1 + r_1/alpha^2)`
/// * `r_2` the smallest integer `>= r_1/alpha^2` with
///   `rho epsilon0_2^r_2 <= epsilon0_1`.
pub fn transfer_cusp_constants(c: CuspConstants, holder_constant: f64, alpha: f64) -> Result<CuspConstants> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Argument(format!("Hoelder exponent must lie in (0, 1], got {alpha}")));
    }
    if !(holder_constant >= 1.0 && holder_constant.is_finite()) {
        return Err(Error::Argument(format!("Hoelder constant must be at least 1, got {holder_constant}")));
    }
    if !c.is_normalized() {
        return Err(Error::Argument(format!(
            "constants must be normalized (rho = 1, r >= 2), got rho = {}, r = {}",
            c.rho, c.r
        )));
    }
    let exponent = c.r / (alpha * alpha);
    let epsilon0 = (holder_constant * c.epsilon0.powf(alpha)).min(0.5);
    let rho = 1.0 / holder_constant.powf(1.0 + exponent);
    let mut r = integer_ceil(exponent);
    while rho * epsilon0.powf(r) > c.epsilon0 && r < MAX_EXPONENT {
        r += 1.0;
    }
    Ok(CuspConstants { epsilon0, rho, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(e: f64, rho: f64, r: f64) -> CuspConstants {
        CuspConstants::new(e, rho, r).unwrap()
    }

    #[test]
    fn normalize_hand_examples() {
        assert_eq!(normalize_constants(cc(0.5, 1.0, 2.0)), cc(0.5, 1.0, 3.0));
        assert_eq!(normalize_constants(cc(2.0, 2.0, 1.0)), cc(0.99, 1.0, 2.0));
        assert_eq!(normalize_constants(cc(0.1, 0.1, 1.0)), cc(0.1, 1.0, 2.0));
    }

    #[test]
    fn transfer_hand_examples() {
        let id = transfer_cusp_constants(cc(0.3, 1.0, 2.0), 1.0, 1.0).unwrap();
        assert_eq!(id, cc(0.3, 1.0, 2.0));
        let two = transfer_cusp_constants(cc(0.25, 1.0, 2.0), 2.0, 1.0).unwrap();
        assert_eq!(two, cc(0.5, 0.125, 2.0));
        let half = transfer_cusp_constants(cc(0.3, 1.0, 2.0), 1.0, 0.5).unwrap();
        assert_eq!(half, cc(0.5, 1.0, 8.0));
    }

    #[test]
    fn identity_transfer_caps_at_one_half() {
        let out = transfer_cusp_constants(cc(0.9, 1.0, 3.0), 1.0, 1.0).unwrap();
        assert_eq!(out, cc(0.5, 1.0, 3.0));
    }

    #[test]
    fn transfer_rejects_bad_arguments() {
        assert!(transfer_cusp_constants(cc(0.3, 1.0, 2.0), 0.5, 1.0).is_err());
        assert!(transfer_cusp_constants(cc(0.3, 1.0, 2.0), 1.0, 1.5).is_err());
        assert!(transfer_cusp_constants(cc(0.3, 1.0, 2.0), 1.0, 0.0).is_err());
        assert!(transfer_cusp_constants(cc(0.3, 0.5, 2.0), 1.0, 1.0).is_err());
        assert!(transfer_cusp_constants(cc(0.3, 1.0, 1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn integer_ceil_forgives_rounding() {
        assert_eq!(integer_ceil(8.0), 8.0);
        assert_eq!(integer_ceil(8.000000000000002), 8.0);
        assert_eq!(integer_ceil(7.2), 8.0);
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn normalized_constants_dominate(e in 0.001f64..3.0, rho in 0.001f64..3.0, r in 1.0f64..6.0) {
            let input = CuspConstants::new(e, rho, r).unwrap();
            let out = normalize_constants(input);
            prop_assert_eq!(out.rho, 1.0);
            prop_assert!(out.r >= 2.0 && out.r >= r + 1.0);
            prop_assert_eq!(out.r.fract(), 0.0);
            for k in 1..=100 {
                let eps = out.epsilon0 * k as f64 / 100.0;
                prop_assert!(eps.powf(out.r) <= rho * eps.powf(r) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn identity_metric_transfer(e in 0.001f64..2.0, r in 2.0f64..8.0) {
            let r = r.floor();
            let out = transfer_cusp_constants(CuspConstants::new(e, 1.0, r).unwrap(), 1.0, 1.0).unwrap();
            prop_assert_eq!(out, CuspConstants::new(e.min(0.5), 1.0, r).unwrap());
        }

        #[test]
        fn transferred_constants_meet_both_constraints(
            e in 0.01f64..0.99, r in 2u32..6, c in 1.0f64..4.0, alpha in 0.2f64..1.0,
        ) {
            let input = CuspConstants::new(e, 1.0, r as f64).unwrap();
            let out = transfer_cusp_constants(input, c, alpha).unwrap();
            prop_assert!(out.r >= r as f64 / (alpha * alpha) - 1e-9);
            prop_assert!(out.rho * out.epsilon0.powf(out.r) <= e);
            prop_assert!(out.epsilon0 <= 0.5);
            let below = out.r - 1.0;
            if below >= r as f64 / (alpha * alpha) {
                prop_assert!(out.rho * out.epsilon0.powf(below) > e);
            }
        }
    }
}
