//! Experiment configuration: a flat `key = value` file, overridable key by
//! key from the command line.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::learners::{full_info_queries, LearnerSpec};
use crate::losses::Loss;
use crate::solvers::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Norm,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DPolicy {
    Fixed(usize),
    /// `⌈√(100B/3)⌉`
    Budget,
    /// `⌈√(100/(3λ²))⌉`
    Lambda,
    /// `⌊1/(2λ)⌋`
    Hinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MPolicy {
    Fixed(usize),
    /// `128·d`
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YPolicy {
    Fixed(f64),
    /// `1/√d`
    InvSqrtD,
    /// `1/(2λd)`
    Kink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetSpec {
    Fixed(usize),
    /// `⌊1/λ²⌋`
    InvLambdaSq,
    /// Every off-diagonal pair, `m(m−1)/2`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Budget,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub loss: Loss,
    pub regime: RegimeKind,
    pub radius_sq: f64,
    pub lambdas: Vec<f64>,
    pub budgets: Vec<BudgetSpec>,
    pub d: DPolicy,
    pub m: MPolicy,
    pub y: YPolicy,
    pub learner: LearnerSpec,
    pub trials: usize,
    pub seed: u64,
    pub sweep: SweepAxis,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            loss: Loss::Absolute,
            regime: RegimeKind::Norm,
            radius_sq: 2.0,
            lambdas: vec![0.1],
            budgets: vec![BudgetSpec::Fixed(64)],
            d: DPolicy::Budget,
            m: MPolicy::Auto,
            y: YPolicy::InvSqrtD,
            learner: LearnerSpec::Subsample { size: None },
            trials: 1000,
            seed: 1,
            sweep: SweepAxis::Budget,
        }
    }
}

/// Keys accepted in config files and `--set` overrides.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("loss", "absolute | hinge | squared | linear"),
    ("regime", "norm (constrained, absolute loss only) | soft"),
    ("radius_sq", "norm bound on αᵀKα in the norm regime (default 2)"),
    ("lambda", "regularization, or a comma-separated sweep list"),
    ("budget", "integers, inv_lambda_sq or full; comma-separated for a sweep"),
    ("d", "integer | budget | lambda | hinge"),
    ("m", "even integer | auto (128·d)"),
    ("y", "number | inv_sqrt_d | kink (1/(2λd))"),
    ("learner", "subsample[:k] | nystrom[:k] | uniform_random_queries | full_info | zero | linear_closed_form"),
    ("trials", "Monte Carlo trials per sweep point"),
    ("seed", "master seed"),
    ("sweep", "budget | lambda"),
];

fn config_err(key: &str, value: &str) -> Error {
    Error::Config(format!("bad value {value:?} for key {key:?}"))
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let out = value
        .split(',')
        .map(|s| item(s.trim()).ok_or_else(|| config_err(key, value)))
        .collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        return Err(config_err(key, value));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = || config_err(key, value);
        match key.trim() {
            "loss" => self.loss = value.parse()?,
            "regime" => {
                self.regime = match value {
                    "norm" => RegimeKind::Norm,
                    "soft" => RegimeKind::Soft,
                    _ => return Err(bad()),
                }
            }
            "radius_sq" => self.radius_sq = value.parse().map_err(|_| bad())?,
            "lambda" => self.lambdas = parse_list(key, value, |s| s.parse().ok())?,
            "budget" => {
                self.budgets = parse_list(key, value, |s| match s {
                    "inv_lambda_sq" => Some(BudgetSpec::InvLambdaSq),
                    "full" => Some(BudgetSpec::Full),
                    n => n.parse().ok().map(BudgetSpec::Fixed),
                })?
            }
            "d" => {
                self.d = match value {
                    "budget" => DPolicy::Budget,
                    "lambda" => DPolicy::Lambda,
                    "hinge" => DPolicy::Hinge,
                    n => DPolicy::Fixed(n.parse().map_err(|_| bad())?),
                }
            }
            "m" => {
                self.m = match value {
                    "auto" => MPolicy::Auto,
                    n => MPolicy::Fixed(n.parse().map_err(|_| bad())?),
                }
            }
            "y" => {
                self.y = match value {
                    "inv_sqrt_d" => YPolicy::InvSqrtD,
                    "kink" => YPolicy::Kink,
                    v => YPolicy::Fixed(v.parse().map_err(|_| bad())?),
                }
            }
            "learner" => self.learner = value.parse()?,
            "trials" => self.trials = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "sweep" => {
                self.sweep = match value {
                    "budget" => SweepAxis::Budget,
                    "lambda" => SweepAxis::Lambda,
                    _ => return Err(bad()),
                }
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.regime == RegimeKind::Norm && self.loss != Loss::Absolute {
            return Err(Error::Config("the norm regime is defined for the absolute loss only".into()));
        }
        if self.regime == RegimeKind::Norm && (self.y == YPolicy::Kink || self.d == DPolicy::Lambda || self.d == DPolicy::Hinge) {
            return Err(Error::Config("lambda-based policies need the soft regime".into()));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("lambda values must be positive".into()));
        }
        if !self.learner.supports(&self.objective(self.lambdas[0])?) {
            return Err(Error::Config(format!("learner {} does not support loss {}", self.learner, self.loss)));
        }
        self.points().map(|_| ())
    }

    fn objective(&self, lambda: f64) -> Result<Objective> {
        match self.regime {
            RegimeKind::Norm => Objective::norm_bound(self.radius_sq),
            RegimeKind::Soft => Objective::soft(self.loss, lambda),
        }
    }

    /// Resolves every sweep point.
    pub fn points(&self) -> Result<Vec<PointConfig>> {
        let pairs: Vec<(BudgetSpec, f64)> = match self.sweep {
            SweepAxis::Budget => self.budgets.iter().map(|&b| (b, self.lambdas[0])).collect(),
            SweepAxis::Lambda => self.lambdas.iter().map(|&l| (self.budgets[0], l)).collect(),
        };
        pairs
            .into_iter()
            .enumerate()
            .map(|(index, (budget, lambda))| self.resolve(index, budget, lambda))
            .collect()
    }

    fn resolve(&self, index: usize, budget: BudgetSpec, lambda: f64) -> Result<PointConfig> {
        let soft = self.regime == RegimeKind::Soft;
        let provisional_budget = match budget {
            BudgetSpec::Fixed(b) => Some(b),
            BudgetSpec::InvLambdaSq => Some((1.0 / (lambda * lambda)).floor() as usize),
            BudgetSpec::Full => None,
        };
        let d = match self.d {
            DPolicy::Fixed(d) => d,
            DPolicy::Budget => bounds::d_for_budget(
                provisional_budget.ok_or_else(|| Error::Config("d = budget needs a finite budget".into()))?,
            ),
            DPolicy::Lambda => bounds::d_for_lambda(lambda),
            DPolicy::Hinge => bounds::d_for_hinge(lambda),
        };
        if d == 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        let m = match self.m {
            MPolicy::Fixed(m) => m,
            MPolicy::Auto => bounds::min_sample_size(d),
        };
        if m == 0 || m % 2 != 0 {
            return Err(Error::Config(format!("m must be a positive even number, got {m}")));
        }
        let budget = provisional_budget.unwrap_or_else(|| full_info_queries(m));
        let y = match self.y {
            YPolicy::Fixed(y) => y,
            YPolicy::InvSqrtD => 1.0 / (d as f64).sqrt(),
            YPolicy::Kink => 1.0 / (2.0 * lambda * d as f64),
        };
        self.loss.check_label(y).map_err(|e| Error::Config(e.to_string()))?;
        Ok(PointConfig {
            index,
            loss: self.loss,
            objective: self.objective(lambda)?,
            lambda: soft.then_some(lambda),
            radius_sq: (!soft).then_some(self.radius_sq),
            budget,
            d,
            m,
            y,
            y_policy: self.y,
            learner: self.learner,
        })
    }

    /// Key-value text that parses back to the same configuration.
    pub fn to_text(&self) -> String {
        let list = |v: Vec<String>| v.join(",");
        let budgets = list(
            self.budgets
                .iter()
                .map(|b| match b {
                    BudgetSpec::Fixed(n) => n.to_string(),
                    BudgetSpec::InvLambdaSq => "inv_lambda_sq".into(),
                    BudgetSpec::Full => "full".into(),
                })
                .collect(),
        );
        let d = match self.d {
            DPolicy::Fixed(n) => n.to_string(),
            DPolicy::Budget => "budget".into(),
            DPolicy::Lambda => "lambda".into(),
            DPolicy::Hinge => "hinge".into(),
        };
        let m = match self.m {
            MPolicy::Fixed(n) => n.to_string(),
            MPolicy::Auto => "auto".into(),
        };
        let y = match self.y {
            YPolicy::Fixed(v) => v.to_string(),
            YPolicy::InvSqrtD => "inv_sqrt_d".into(),
            YPolicy::Kink => "kink".into(),
        };
        let regime = match self.regime {
            RegimeKind::Norm => "norm",
            RegimeKind::Soft => "soft",
        };
        let sweep = match self.sweep {
            SweepAxis::Budget => "budget",
            SweepAxis::Lambda => "lambda",
        };
        format!(
            "loss = {}\nregime = {regime}\nradius_sq = {}\nlambda = {}\nbudget = {budgets}\nd = {d}\nm = {m}\ny = {y}\nlearner = {}\ntrials = {}\nseed = {}\nsweep = {sweep}\n",
            self.loss,
            self.radius_sq,
            list(self.lambdas.iter().map(|l| l.to_string()).collect()),
            self.learner,
            self.trials,
            self.seed,
        )
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_str(s)
    }
}

/// One fully resolved sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub index: usize,
    pub loss: Loss,
    pub objective: Objective,
    pub lambda: Option<f64>,
    pub radius_sq: Option<f64>,
    pub budget: usize,
    pub d: usize,
    pub m: usize,
    pub y: f64,
    pub y_policy: YPolicy,
    pub learner: LearnerSpec,
}

impl PointConfig {
    /// The applicable lower bound at this point, or `None` outside the
    /// bound's regime (`B < (3/50)d²`, `m ≥ 128d`).
    pub fn bound(&self) -> Option<f64> {
        if !bounds::budget_in_regime(self.budget, self.d) || self.m < bounds::min_sample_size(self.d) {
            return None;
        }
        match (self.loss, self.lambda) {
            (_, None) => Some(bounds::norm_absolute_bound(self.d)),
            (Loss::Absolute, Some(lambda)) if self.y_policy == YPolicy::Kink => {
                Some(bounds::absolute_kink_bound(lambda, self.d))
            }
            (Loss::Absolute, Some(lambda)) => {
                crate::losses::expected_gap_bound(Loss::Absolute, lambda, self.d, &[self.y], 2)
                    .ok()
                    .map(|b| b.analytic)
            }
            (Loss::Hinge, Some(_)) => Some(bounds::HINGE_FLOOR),
            (Loss::Squared, Some(lambda)) => Some(bounds::squared_bound(lambda, self.budget)),
            (Loss::Linear, Some(_)) => Some(0.0),
        }
    }

    /// The sweep coordinate used for slope fits.
    pub fn axis_value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::Budget => self.budget as f64,
            SweepAxis::Lambda => self.lambda.unwrap_or(f64::NAN),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let cfg: ExperimentConfig = "# criterion\nloss = squared\nregime = soft\nlambda = 0.5, 1.0\nbudget = inv_lambda_sq\nd = lambda\ny = 1\nsweep = lambda\ntrials = 7 # few\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.loss, Loss::Squared);
        assert_eq!(cfg.lambdas, vec![0.5, 1.0]);
        assert_eq!(cfg.trials, 7);
        let points = cfg.points().unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].budget, 4);
        assert_eq!(points[1].budget, 1);
        assert_eq!(points[1].d, bounds::d_for_lambda(1.0));
        assert_eq!(points[1].m, 128 * points[1].d);
        cfg.validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("budget", "64,128,full").unwrap();
        cfg.set("learner", "nystrom:3").unwrap();
        cfg.set("y", "0.25").unwrap();
        let back: ExperimentConfig = cfg.to_text().parse().unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_combinations() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("loss", "squared").unwrap();
        assert!(cfg.validate().is_err());
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("d", "many").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("m", "101").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn bound_only_inside_regime() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("budget", "245").unwrap();
        cfg.set("d", "64").unwrap();
        let p = &cfg.points().unwrap()[0];
        assert!((p.bound().unwrap() - 1.0 / 560.0).abs() < 1e-15);
        cfg.set("budget", "246").unwrap();
        assert!(cfg.points().unwrap()[0].bound().is_none());
    }
}
