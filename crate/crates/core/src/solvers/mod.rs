//! Exact optimization on block-structured kernels.
//!
//! Everything here reduces an m-dimensional problem to per-class scalar
//! problems (for hard instances) or to a 2d×2d system (for block-constant
//! ridge regression). Dense O(m²) paths exist only as verification oracles.

mod block;
mod classes;
mod lowrank;

pub use block::{
    delta_gap, kernel_quadratic_form, linear_loss_solution, objective_value, objective_value_blocks, objective_value_dense,
    reduce_coefficients, solve_block_erm, solve_norm_constrained_abs, solve_objective, spread_block_coefficients, norm_certificate,
    BlockSolution,
};
pub use classes::ClassProblem;
pub use lowrank::{
    lowrank_delta_gap, reduce_gram, reduced_ridge_objective, ridge_dense, ridge_reduced, PartitionedMatrix,
    ReducedRidge,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::Loss;

/// Negative gaps above this are float noise and are clamped to zero.
pub const GAP_CLAMP: f64 = 1e-12;

/// Coefficient vector `α` of a kernel predictor `Σ_j α_j k(x_j, ·)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients(pub Vec<f64>);

impl Coefficients {
    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Sub-block sums `(β_{i,1}, β_{i,2})` of a coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCoefficients {
    pub beta: Vec<[f64; 2]>,
}

impl BlockCoefficients {
    pub fn zeros(d: usize) -> Self {
        Self { beta: vec![[0.0; 2]; d] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum Regime {
    /// `min avg-loss` subject to `αᵀKα ≤ radius_sq`, no penalty.
    Norm { radius_sq: f64 },
    /// `min avg-loss + (λ/2) αᵀKα`, unconstrained.
    Soft { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    loss: Loss,
    #[serde(flatten)]
    regime: Regime,
}

impl Objective {
    pub fn soft(loss: Loss, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self {
            loss,
            regime: Regime::Soft { lambda },
        })
    }

    /// The norm-constrained regime is defined for the absolute loss only.
    pub fn norm_bound(radius_sq: f64) -> Result<Self> {
        if !(radius_sq >= 0.0) || !radius_sq.is_finite() {
            return Err(Error::invalid(format!("norm bound must be non-negative, got {radius_sq}")));
        }
        Ok(Self {
            loss: Loss::Absolute,
            regime: Regime::Norm { radius_sq },
        })
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.regime {
            Regime::Soft { lambda } => Some(lambda),
            Regime::Norm { .. } => None,
        }
    }

    /// Weight on `αᵀKα` in the objective value.
    pub(crate) fn penalty_weight(&self) -> f64 {
        match self.regime {
            Regime::Soft { lambda } => lambda / 2.0,
            Regime::Norm { .. } => 0.0,
        }
    }
}

/// Suboptimality `Δ = objective(α) − min objective`, with float noise
/// within [`GAP_CLAMP`] below zero clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub value: f64,
    pub clamped: bool,
}

impl Gap {
    pub(crate) fn from_difference(diff: f64) -> Self {
        if (-GAP_CLAMP..0.0).contains(&diff) {
            Gap {
                value: 0.0,
                clamped: true,
            }
        } else {
            Gap {
                value: diff,
                clamped: false,
            }
        }
    }
}
