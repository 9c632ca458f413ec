use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::{ExperimentConfig, PointConfig, SweepAxis};
use crate::harness::stats::{fit_loglog_slope, SlopeFit, Summary, MIN_FIT_POINTS};
use crate::harness::trial::{run_point, TrialRecord};

/// Version tag written into every JSON report.
pub const REPORT_SCHEMA: &str = "hardkernel.scaling/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub index: usize,
    pub budget: usize,
    pub lambda: Option<f64>,
    pub d: usize,
    pub m: usize,
    pub y: f64,
    pub trials: usize,
    pub gap: Summary,
    pub missed_blocks: Summary,
    pub mean_queries: f64,
    pub clamped: usize,
    /// Lower bound at this point from the explicit constants, if in regime.
    pub bound: Option<f64>,
    /// `mean − 3·stderr ≥ bound`.
    pub bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub axis: SweepAxis,
    pub points: Vec<PointSummary>,
    /// Slope of `ln mean-gap` against `ln axis`, when there are enough
    /// points with positive mean gap.
    pub slope: Option<SlopeFit>,
    pub wall_time_seconds: f64,
}

pub fn summarize_point(point: &PointConfig, records: &[TrialRecord]) -> PointSummary {
    let gaps: Vec<f64> = records.iter().map(|r| r.gap).collect();
    let missed: Vec<f64> = records.iter().map(|r| r.missed_blocks as f64).collect();
    let queries: Vec<f64> = records.iter().map(|r| r.queries as f64).collect();
    let gap = Summary::of(&gaps);
    let bound = point.bound();
    PointSummary {
        index: point.index,
        budget: point.budget,
        lambda: point.lambda,
        d: point.d,
        m: point.m,
        y: point.y,
        trials: records.len(),
        gap,
        missed_blocks: Summary::of(&missed),
        mean_queries: Summary::of(&queries).mean,
        clamped: records.iter().filter(|r| r.gap_clamped).count(),
        bound,
        bound_holds: bound.map(|b| gap.lower(3.0) >= b),
    }
}

/// Runs every sweep point and aggregates. Trials are parallel; the
/// records and the report do not depend on the worker count.
pub fn run_scaling_experiment(cfg: &ExperimentConfig) -> Result<(ScalingReport, Vec<TrialRecord>)> {
    cfg.validate()?;
    let start = Instant::now();
    let mut all = Vec::new();
    let mut points = Vec::new();
    for point in cfg.points()? {
        log::info!(
            "point {}: B = {}, d = {}, m = {}, lambda = {:?}",
            point.index,
            point.budget,
            point.d,
            point.m,
            point.lambda
        );
        let records = run_point(&point, cfg.trials, cfg.seed)?;
        points.push((point.axis_value(cfg.sweep), summarize_point(&point, &records)));
        all.extend(records);
    }
    let fit_points: Vec<(f64, f64)> = points.iter().map(|(x, s)| (*x, s.gap.mean)).collect();
    let slope = if fit_points.len() >= MIN_FIT_POINTS {
        fit_loglog_slope(&fit_points).ok()
    } else {
        None
    };
    let report = ScalingReport {
        schema: REPORT_SCHEMA.to_string(),
        config: cfg.clone(),
        axis: cfg.sweep,
        points: points.into_iter().map(|(_, s)| s).collect(),
        slope,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, all))
}
