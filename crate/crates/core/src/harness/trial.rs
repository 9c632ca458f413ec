use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::PointConfig;
use crate::instance::BlockKernel;
use crate::learners::{full_info_queries, LearnerSpec};
use crate::oracle::BudgetedOracle;
use crate::solvers::delta_gap;

/// Gaps below this are solver bugs, not float noise.
pub const GAP_FAILURE: f64 = -1e-9;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream per `(master, sweep point, trial)`.
pub fn derive_seed(master: u64, point: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point as u64) ^ trial as u64)
}

/// One trial. Column order here is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub seed: u64,
    pub loss: String,
    pub learner: String,
    pub lambda: Option<f64>,
    pub radius_sq: Option<f64>,
    pub budget: usize,
    pub d: usize,
    pub m: usize,
    pub sigma_popcount: usize,
    pub y: f64,
    pub queries: usize,
    pub gap: f64,
    pub gap_clamped: bool,
    pub missed_blocks: usize,
    /// Kept out of the CSV so output is reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

pub const CSV_COLUMNS: &[&str] = &[
    "point",
    "trial",
    "seed",
    "loss",
    "learner",
    "lambda",
    "radius_sq",
    "budget",
    "d",
    "m",
    "sigma_popcount",
    "y",
    "queries",
    "gap",
    "gap_clamped",
    "missed_blocks",
];

/// Samples a hard kernel, runs the learner through a budgeted oracle and
/// measures its gap and block coverage.
pub fn run_trial(point: &PointConfig, seed: u64, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let context = |e: Error| Error::invalid(format!("point {} trial {trial} (seed {seed}): {e}", point.index));
    let kernel = BlockKernel::sample(point.d, point.m, seed).map_err(context)?;
    let full = matches!(point.learner, LearnerSpec::FullInfo);
    let budget = if full { full_info_queries(point.m) } else { point.budget };
    let mut oracle = BudgetedOracle::new(&kernel, budget);
    let alpha = point
        .learner
        .learn(&mut oracle, &point.objective, point.y, splitmix64(seed ^ 0x006C_6561_726E_6572))
        .map_err(context)?;
    let gap = delta_gap(&kernel, &point.objective, &alpha, point.y).map_err(context)?;
    if gap.value < GAP_FAILURE {
        return Err(context(Error::invalid(format!("negative gap {:e}", gap.value))));
    }
    let (queries, missed) = if full { (budget, 0) } else { (oracle.used(), oracle.missed_count()) };
    if queries > budget {
        return Err(context(Error::invalid("learner exceeded its budget")));
    }
    Ok(TrialRecord {
        point: point.index,
        trial,
        seed,
        loss: point.loss.to_string(),
        learner: point.learner.to_string(),
        lambda: point.lambda,
        radius_sq: point.radius_sq,
        budget,
        d: point.d,
        m: point.m,
        sigma_popcount: kernel.sigma_popcount(),
        y: point.y,
        queries,
        gap: gap.value,
        gap_clamped: gap.clamped,
        missed_blocks: missed,
        wall_time: start.elapsed(),
    })
}

/// All trials of one point, in parallel; records come back in trial order.
pub fn run_point(point: &PointConfig, trials: usize, master_seed: u64) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(point, derive_seed(master_seed, point.index, t), t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    #[test]
    fn seeds_differ_across_points_and_trials() {
        let a = derive_seed(1, 0, 0);
        assert_ne!(a, derive_seed(1, 0, 1));
        assert_ne!(a, derive_seed(1, 1, 0));
        assert_ne!(a, derive_seed(2, 0, 0));
    }

    #[test]
    fn trial_is_reproducible() {
        let cfg: ExperimentConfig = "budget = 64\nd = 20\nm = 400".parse().unwrap();
        let p = &cfg.points().unwrap()[0];
        let a = run_trial(p, 5, 0).unwrap();
        let b = run_trial(p, 5, 0).unwrap();
        assert_eq!(a.gap, b.gap);
        assert_eq!(a.queries, b.queries);
        assert!(a.queries <= 64);
    }

    #[test]
    fn full_info_trial_has_no_gap() {
        let cfg: ExperimentConfig = "loss = squared\nregime = soft\nlambda = 0.2\nbudget = full\nd = 5\nm = 100\ny = 1\nlearner = full_info"
            .parse()
            .unwrap();
        let r = run_trial(&cfg.points().unwrap()[0], 3, 0).unwrap();
        assert!(r.gap <= 1e-10);
        assert_eq!(r.queries, 4950);
    }
}
