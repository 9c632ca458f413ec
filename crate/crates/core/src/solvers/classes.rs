use crate::error::{Error, Result};
use crate::losses::Loss;
use crate::solvers::{Objective, Regime};

/// Lagrange multiplier bracket for the norm-constrained solve.
const MU_BRACKET: (f64, f64) = (1e-12, 1e6);
const BISECTION_STEPS: usize = 200;
const CONSTRAINT_TOL: f64 = 1e-9;

/// A kernel that is 1 between points of the same class and 0 otherwise,
/// seen through its class sums `s_C = Σ_{t∈C} α_t`. With a constant target
/// `y` the objective is
///
/// `Σ_C w_C ℓ(s_C, y) + w_rest ℓ(0, y) + penalty · Σ_C s_C²`
///
/// where `w_C` is the share of loss terms in class `C` and `w_rest` the
/// share of points whose kernel row is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProblem {
    weights: Vec<f64>,
    rest_weight: f64,
}

impl ClassProblem {
    pub fn new(weights: Vec<f64>, rest_weight: f64) -> Result<Self> {
        if weights.iter().chain(std::iter::once(&rest_weight)).any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("class weights must be finite and non-negative"));
        }
        Ok(Self { weights, rest_weight })
    }

    /// Classes given by point counts, each point weighing `1/total`.
    pub fn from_counts(counts: &[usize], rest: usize, total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::invalid("class problem needs at least one point"));
        }
        let n = total as f64;
        Self::new(counts.iter().map(|&c| c as f64 / n).collect(), rest as f64 / n)
    }

    pub fn classes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn value(&self, objective: &Objective, sums: &[f64], y: f64) -> f64 {
        let loss = objective.loss();
        let data: f64 = self
            .weights
            .iter()
            .zip(sums)
            .map(|(w, &s)| if *w > 0.0 { w * loss.eval_unchecked(s, y) } else { 0.0 })
            .sum::<f64>()
            + self.rest_weight * loss.eval_unchecked(0.0, y);
        data + objective.penalty_weight() * sums.iter().map(|s| s * s).sum::<f64>()
    }

    pub fn solve(&self, objective: &Objective, y: f64) -> Result<Vec<f64>> {
        objective.loss().check_label(y)?;
        match objective.regime() {
            Regime::Soft { lambda } => Ok(self.solve_soft(objective.loss(), lambda, y)),
            Regime::Norm { radius_sq } => Ok(self.solve_norm_absolute(radius_sq, y)),
        }
    }

    /// Per class: `min_s w ℓ(s, y) + (λ/2) s²`, i.e. `u*(y, λ/(2w))`.
    pub fn solve_soft(&self, loss: Loss, lambda: f64, y: f64) -> Vec<f64> {
        self.weights
            .iter()
            .map(|&w| if w > 0.0 { loss.u_star_unchecked(y, lambda / (2.0 * w)) } else { 0.0 })
            .collect()
    }

    /// `min Σ w_C |s_C − y|` subject to `Σ s_C² ≤ radius_sq`, by bisection
    /// on the multiplier of the soft problem followed by an exact solve for
    /// the final active set.
    pub fn solve_norm_absolute(&self, radius_sq: f64, y: f64) -> Vec<f64> {
        if radius_sq <= 0.0 || y == 0.0 {
            return vec![0.0; self.weights.len()];
        }
        let free = self.solve_soft(Loss::Absolute, f64::MIN_POSITIVE, y);
        let norm = |s: &[f64]| s.iter().map(|v| v * v).sum::<f64>();
        if norm(&free) <= radius_sq {
            return free;
        }
        let at = |mu: f64| self.solve_soft(Loss::Absolute, mu, y);
        let (mut lo, mut hi) = MU_BRACKET;
        while norm(&at(hi)) > radius_sq {
            hi *= 10.0;
        }
        for _ in 0..BISECTION_STEPS {
            let mid = (lo * hi).sqrt();
            if norm(&at(mid)) > radius_sq {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 < 1e-15 {
                break;
            }
        }
        // Classes with |y| ≤ w/μ sit at y; the rest at sign(y)·w/μ. Solve the
        // constraint exactly on that split.
        let c2 = y * y;
        let mut saturated = 0.0;
        let mut free_sq = 0.0;
        for &w in &self.weights {
            if w <= 0.0 {
                continue;
            }
            if y.abs() <= w / hi {
                saturated += c2;
            } else {
                free_sq += w * w;
            }
        }
        let slack = radius_sq - saturated;
        if slack > 0.0 && free_sq > 0.0 {
            let mu = (free_sq / slack).sqrt();
            let exact = at(mu);
            if (norm(&exact) - radius_sq).abs() <= CONSTRAINT_TOL {
                return exact;
            }
        }
        at(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_solution_uses_weighted_regularizer() {
        let p = ClassProblem::new(vec![0.25, 0.5, 0.0], 0.25).unwrap();
        let s = p.solve_soft(Loss::Squared, 1.0, 1.0);
        // a = λ/(2w): 2 and 1
        assert!((s[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s[1] - 0.5).abs() < 1e-15);
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn norm_solution_unconstrained_when_feasible() {
        let p = ClassProblem::new(vec![0.5, 0.5], 0.0).unwrap();
        assert_eq!(p.solve_norm_absolute(2.0, 1.0), vec![1.0, 1.0]);
    }

    #[test]
    fn norm_solution_hits_constraint() {
        let p = ClassProblem::new(vec![0.1, 0.2, 0.3, 0.4], 0.0).unwrap();
        let s = p.solve_norm_absolute(0.5, 1.0);
        let n: f64 = s.iter().map(|v| v * v).sum();
        assert!((n - 0.5).abs() <= 1e-9);
        // heavier classes get at least as much mass
        assert!(s.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }

    #[test]
    fn zero_radius_gives_zero() {
        let p = ClassProblem::new(vec![1.0], 0.0).unwrap();
        assert_eq!(p.solve_norm_absolute(0.0, 0.7), vec![0.0]);
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(ClassProblem::new(vec![-0.1], 0.0).is_err());
    }
}
