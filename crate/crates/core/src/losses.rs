//! The four scalar losses, their regularized minimizers and the
//! expected-gap lower bound built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Absolute,
    Hinge,
    Squared,
    Linear,
}

impl Loss {
    pub const ALL: [Loss; 4] = [Loss::Absolute, Loss::Hinge, Loss::Squared, Loss::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Loss::Absolute => "absolute",
            Loss::Hinge => "hinge",
            Loss::Squared => "squared",
            Loss::Linear => "linear",
        }
    }

    /// Non-negative losses; the linear loss is excluded from the gap bound.
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, Loss::Linear)
    }

    pub fn check_label(self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::invalid(format!("label must be finite, got {y}")));
        }
        if self == Loss::Hinge && y != 1.0 && y != -1.0 {
            return Err(Error::invalid(format!("hinge labels must be ±1, got {y}")));
        }
        Ok(())
    }

    pub fn eval(self, u: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        Ok(self.eval_unchecked(u, y))
    }

    #[inline]
    pub fn eval_unchecked(self, u: f64, y: f64) -> f64 {
        match self {
            Loss::Absolute => (u - y).abs(),
            Loss::Hinge => (1.0 - u * y).max(0.0),
            Loss::Squared => (u - y) * (u - y),
            Loss::Linear => y * u,
        }
    }

    /// Unique minimizer of `ℓ(u, y) + a·u²` for `a > 0`.
    pub fn u_star(self, y: f64, a: f64) -> Result<f64> {
        self.check_label(y)?;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!("regularization weight must be positive and finite, got {a}")));
        }
        Ok(self.u_star_unchecked(y, a))
    }

    #[inline]
    pub fn u_star_unchecked(self, y: f64, a: f64) -> f64 {
        match self {
            Loss::Squared => y / (1.0 + a),
            // kink at |y| = 1/(2a): both branches give y
            Loss::Absolute => {
                if y.abs() <= 0.5 / a {
                    y
                } else {
                    y.signum() * 0.5 / a
                }
            }
            Loss::Hinge => {
                if a <= 0.5 {
                    y
                } else {
                    y / (2.0 * a)
                }
            }
            Loss::Linear => -y / (2.0 * a),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "absolute" => Ok(Loss::Absolute),
            "hinge" => Ok(Loss::Hinge),
            "squared" => Ok(Loss::Squared),
            "linear" => Ok(Loss::Linear),
            other => Err(Error::Config(format!(
                "unknown loss {other:?} (expected absolute, hinge, squared or linear)"
            ))),
        }
    }
}

/// Default resolution of the `p` grid over `[1/2, 2]`.
pub const DEFAULT_P_GRID: usize = 513;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBound {
    /// Minimum over the uniform `p` grid (an upper estimate of the true min).
    pub grid: f64,
    /// Exact value from the closed form of `(2u₁* − u₂*)²` at `p = 2`.
    pub analytic: f64,
}

/// `(2u₁* − u₂*)²` with `u₁* = u*(y, a)` and `u₂* = u*(y, a/2)`, computed
/// through the minimizers.
pub fn gap_factor(loss: Loss, y: f64, a: f64) -> f64 {
    let u1 = loss.u_star_unchecked(y, a);
    let u2 = loss.u_star_unchecked(y, a / 2.0);
    (2.0 * u1 - u2).powi(2)
}

/// Closed-form `(2u₁* − u₂*)²`, written out per loss without going through
/// the minimizers. Every branch is non-increasing in `a`.
pub fn gap_factor_closed_form(loss: Loss, y: f64, a: f64) -> f64 {
    match loss {
        Loss::Linear => 0.0,
        Loss::Squared => (y / ((1.0 + a) * (1.0 + a / 2.0))).powi(2),
        Loss::Hinge => {
            if a <= 0.5 {
                1.0
            } else if a <= 1.0 {
                (1.0 / a - 1.0).powi(2)
            } else {
                0.0
            }
        }
        Loss::Absolute => {
            let c = y.abs();
            if c <= 0.5 / a {
                c * c
            } else if c <= 1.0 / a {
                (1.0 / a - c).powi(2)
            } else {
                0.0
            }
        }
    }
}

/// `(1/60)·λd·min_{p∈[1/2,2]} max_{y∈Y} (2u₁* − u₂*)²` with the minimizers
/// taken at regularization `pλd` and `pλd/2`.
pub fn expected_gap_bound(loss: Loss, lambda: f64, d: usize, labels: &[f64], p_grid: usize) -> Result<GapBound> {
    if !(lambda > 0.0) || d == 0 {
        return Err(Error::invalid("lambda and d must be positive"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("label set must be nonempty"));
    }
    if p_grid < 2 {
        return Err(Error::invalid("p grid needs at least two points"));
    }
    for &y in labels {
        loss.check_label(y)?;
    }
    let ld = lambda * d as f64;
    let worst_label = |p: f64, factor: fn(Loss, f64, f64) -> f64| {
        labels
            .iter()
            .map(|&y| factor(loss, y, p * ld))
            .fold(0.0_f64, f64::max)
    };
    let grid_min = (0..p_grid)
        .map(|k| 0.5 + 1.5 * k as f64 / (p_grid - 1) as f64)
        .map(|p| worst_label(p, gap_factor))
        .fold(f64::INFINITY, f64::min);
    let analytic = worst_label(2.0, gap_factor_closed_form);
    Ok(GapBound {
        grid: ld / 60.0 * grid_min,
        analytic: ld / 60.0 * analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Loss::Absolute.eval(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(Loss::Hinge.eval(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(Loss::Squared.eval(-1.0, 1.0).unwrap(), 4.0);
        assert_eq!(Loss::Linear.eval(2.0, -1.0).unwrap(), -2.0);
    }

    #[test]
    fn hinge_rejects_non_sign_labels() {
        assert!(Loss::Hinge.eval(0.0, 0.5).is_err());
        assert!(Loss::Hinge.u_star(0.5, 1.0).is_err());
    }

    #[test]
    fn u_star_rejects_nonpositive_weight() {
        for loss in Loss::ALL {
            assert!(loss.u_star(1.0, 0.0).is_err());
            assert!(loss.u_star(1.0, -1.0).is_err());
        }
    }

    #[test]
    fn u_star_anchor_values() {
        assert_eq!(Loss::Squared.u_star(1.0, 1.0).unwrap(), 0.5);
        let a = 0.8;
        let y = 1.0 / (2.0 * a);
        assert_eq!(Loss::Absolute.u_star(y, a).unwrap(), y);
        assert_eq!(Loss::Hinge.u_star(1.0, 0.4).unwrap(), 1.0);
        assert_eq!(Loss::Hinge.u_star(1.0, 0.5).unwrap(), 1.0);
        // λm/n = 2 ⇒ -ny/(2λm) = -1/4
        assert_eq!(Loss::Linear.u_star(1.0, 2.0).unwrap(), -0.25);
    }

    #[test]
    fn linear_scaling_cancels_exactly() {
        for &(y, a) in &[(1.0, 2.0), (-0.3, 0.7), (5.0, 1e-3)] {
            let u1 = Loss::Linear.u_star(y, a).unwrap();
            let u2 = Loss::Linear.u_star(y, a / 2.0).unwrap();
            assert_eq!(2.0 * u1 - u2, 0.0);
        }
    }

    #[test]
    fn loss_names_round_trip() {
        for loss in Loss::ALL {
            assert_eq!(loss.name().parse::<Loss>().unwrap(), loss);
        }
        assert!("logistic".parse::<Loss>().is_err());
    }

    #[test]
    fn gap_bound_linear_is_zero() {
        let b = expected_gap_bound(Loss::Linear, 0.3, 7, &[-1.0, 0.5, 1.0], DEFAULT_P_GRID).unwrap();
        assert_eq!(b.grid, 0.0);
        assert_eq!(b.analytic, 0.0);
    }

    #[test]
    fn gap_bound_absolute_at_kink_label() {
        let (lambda, d) = (0.05, 10);
        let y = 1.0 / (4.0 * lambda * d as f64);
        let b = expected_gap_bound(Loss::Absolute, lambda, d, &[y], DEFAULT_P_GRID).unwrap();
        let expected = 1.0 / (960.0 * lambda * d as f64);
        assert!((b.analytic - expected).abs() < 1e-15);
        assert!((b.grid - expected).abs() < 1e-15);
    }

    #[test]
    fn gap_bound_hinge_small_lambda_d() {
        // u₁* = u₂* = 1 needs pλd ≤ 1/2 for every p ≤ 2, i.e. λd ≤ 1/4
        let (lambda, d) = (0.01, 25);
        let b = expected_gap_bound(Loss::Hinge, lambda, d, &[1.0], DEFAULT_P_GRID).unwrap();
        assert!((b.analytic - lambda * d as f64 / 60.0).abs() < 1e-15);
        assert!((b.grid - b.analytic).abs() < 1e-15);
    }

    #[test]
    fn gap_bound_hinge_at_half_vanishes() {
        // at λd = 1/2 the p = 2 end gives u₁* = 1/2, u₂* = 1
        let b = expected_gap_bound(Loss::Hinge, 0.05, 10, &[1.0], DEFAULT_P_GRID).unwrap();
        assert_eq!(b.analytic, 0.0);
    }

    #[test]
    fn gap_bound_squared_dominates_quartic_form() {
        for &(lambda, d) in &[(0.1, 3usize), (1.0, 1), (0.01, 50)] {
            let ld = lambda * d as f64;
            let b = expected_gap_bound(Loss::Squared, lambda, d, &[1.0], DEFAULT_P_GRID).unwrap();
            assert!(b.analytic >= ld / 60.0 / (1.0 + 2.0 * ld).powi(4));
            assert!((b.grid - b.analytic).abs() < 1e-15);
        }
    }

    #[test]
    fn gap_bound_validates_inputs() {
        assert!(expected_gap_bound(Loss::Squared, 0.0, 3, &[1.0], 10).is_err());
        assert!(expected_gap_bound(Loss::Squared, 1.0, 3, &[], 10).is_err());
        assert!(expected_gap_bound(Loss::Hinge, 1.0, 3, &[0.5], 10).is_err());
    }
}
