//! Lower-bound curves with their explicit constants, and the parameter
//! recipes that put an experiment inside a bound's regime.

/// Largest admissible budget is strictly below `(3/50)·d²`.
pub fn budget_limit(d: usize) -> f64 {
    3.0 * (d * d) as f64 / 50.0
}

pub fn budget_in_regime(budget: usize, d: usize) -> bool {
    (budget as f64) < budget_limit(d)
}

/// Smallest sample size the gap bounds are stated for: `m ≥ 2⁷·d`.
pub fn min_sample_size(d: usize) -> usize {
    128 * d
}

/// Norm-constrained absolute loss: `1/(70√d)`.
pub fn norm_absolute_bound(d: usize) -> f64 {
    1.0 / (70.0 * (d as f64).sqrt())
}

/// Soft-regularized absolute loss with the kink label: `1/(960λd)`.
pub fn absolute_kink_bound(lambda: f64, d: usize) -> f64 {
    1.0 / (960.0 * lambda * d as f64)
}

/// Constant floor claimed for the hinge loss below the `1/λ²` budget.
pub const HINGE_FLOOR: f64 = 1.0 / 240.0;

/// `c' = 2⁻¹⁸` for the squared loss.
pub const SQUARED_CONSTANT: f64 = 1.0 / 262_144.0;

/// Squared-loss floor: `c'` when `λ√B ≤ 1`, else `c'(λ√B)⁻³`.
pub fn squared_bound(lambda: f64, budget: usize) -> f64 {
    let scale = lambda * (budget as f64).sqrt();
    if scale <= 1.0 {
        SQUARED_CONSTANT
    } else {
        SQUARED_CONSTANT / scale.powi(3)
    }
}

/// Low-rank ridge regression gap: `1/(2(λd)²(1+λd))`.
pub fn lowrank_ridge_bound(lambda: f64, d: usize) -> f64 {
    let ld = lambda * d as f64;
    1.0 / (2.0 * ld * ld * (1.0 + ld))
}

/// `d = ⌈√(100B/3)⌉`, the smallest `d` with `B < (3/50)d²` up to the
/// boundary case. Computed in integers.
pub fn d_for_budget(budget: usize) -> usize {
    let target = 100 * budget as u128;
    let mut d = ((target as f64 / 3.0).sqrt().ceil() as u128).max(1);
    while 3 * d * d < target {
        d += 1;
    }
    while d > 1 && 3 * (d - 1) * (d - 1) >= target {
        d -= 1;
    }
    d as usize
}

/// `d = ⌈√(100/(3λ²))⌉`.
pub fn d_for_lambda(lambda: f64) -> usize {
    ((100.0 / (3.0 * lambda * lambda)).sqrt().ceil() as usize).max(1)
}

/// `d = ⌊1/(2λ)⌋`.
pub fn d_for_hinge(lambda: f64) -> usize {
    ((0.5 / lambda).floor() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_for_budget_matches_real_ceiling() {
        for b in 1..5000usize {
            let d = d_for_budget(b);
            let exact = (100.0 * b as f64 / 3.0).sqrt();
            assert!(d as f64 >= exact - 1e-9);
            assert!((d as f64) < exact + 1.0);
            assert!(budget_limit(d) >= b as f64);
        }
    }

    #[test]
    fn regime_examples() {
        assert!(budget_in_regime(95, 40));
        assert!(!budget_in_regime(96, 40));
        assert!(budget_in_regime(245, 64));
        assert_eq!(min_sample_size(64), 8192);
    }

    #[test]
    fn explicit_constants() {
        assert!((norm_absolute_bound(64) - 1.0 / 560.0).abs() < 1e-18);
        assert_eq!(SQUARED_CONSTANT, 2f64.powi(-18));
        assert_eq!(squared_bound(0.5, 4), SQUARED_CONSTANT);
        assert!((squared_bound(0.5, 64) - SQUARED_CONSTANT / 64.0).abs() < 1e-20);
        assert!((lowrank_ridge_bound(1.0, 1) - 0.25).abs() < 1e-15);
    }
}
