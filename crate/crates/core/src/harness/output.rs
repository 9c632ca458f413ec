use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::sweep::{ScalingReport, REPORT_SCHEMA};
use crate::harness::trial::{TrialRecord, CSV_COLUMNS};

/// Writes trial records as CSV with the fixed [`CSV_COLUMNS`] header. An
/// empty slice produces the header alone.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

pub fn emit_json(report: &ScalingReport, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, report)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<ScalingReport> {
    let report: ScalingReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if report.schema != REPORT_SCHEMA {
        return Err(Error::Config(format!(
            "unsupported report schema {:?} (expected {REPORT_SCHEMA:?})",
            report.schema
        )));
    }
    Ok(report)
}

/// Plain-text table of a report.
pub fn render_report(report: &ScalingReport) -> String {
    let cfg = &report.config;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "loss {} | learner {} | trials {} | seed {} | sweep over {:?}",
        cfg.loss, cfg.learner, cfg.trials, cfg.seed, report.axis
    );
    let _ = writeln!(
        s,
        "{:>8} {:>10} {:>6} {:>8} {:>12} {:>12} {:>12} {:>10} {:>6}",
        "budget", "lambda", "d", "m", "mean gap", "stderr", "bound", "missed", "holds"
    );
    for p in &report.points {
        let lambda = p.lambda.map_or("-".to_string(), |l| format!("{l}"));
        let bound = p.bound.map_or("-".to_string(), |b| format!("{b:.4e}"));
        let holds = match p.bound_holds {
            Some(true) => "yes",
            Some(false) => "NO",
            None => "-",
        };
        let _ = writeln!(
            s,
            "{:>8} {:>10} {:>6} {:>8} {:>12.4e} {:>12.4e} {:>12} {:>10.2} {:>6}",
            p.budget, lambda, p.d, p.m, p.gap.mean, p.gap.stderr, bound, p.missed_blocks.mean, holds
        );
    }
    match &report.slope {
        Some(f) => {
            let _ = writeln!(
                s,
                "log-log slope {:.4} (95% CI [{:.4}, {:.4}], {} points)",
                f.slope, f.ci_low, f.ci_high, f.points
            );
        }
        None => {
            let _ = writeln!(s, "log-log slope: not fitted");
        }
    }
    let _ = writeln!(s, "wall time {:.2} s", report.wall_time_seconds);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_records_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }
}
