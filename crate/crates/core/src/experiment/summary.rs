use std::fmt;
use std::path::Path;

use super::run::{SolverStatus, SolverTrace};
use crate::error::{Error, Result};
use crate::metrics::rate_slope;
use crate::solvers::StopReason;

/// Written in the residual column when `||F(x1)|| = 0` left the ratio undefined.
pub const REJECTED_INPUT: &str = "rejected_input";

/// Checkpoints below this are left out of the slope fit.
pub const SLOPE_MIN_ITERATION: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub solver: String,
    pub status: SolverStatus,
    pub final_residual: Option<f64>,
    pub final_gap: Option<f64>,
    pub rate_slope: Option<f64>,
    pub stop_reason: Option<StopReason>,
    pub index_sets: Option<(usize, usize)>,
}

impl SummaryRow {
    // Full precision for the CSV, `digits` significant decimals for display.
    fn cells(&self, digits: Option<usize>) -> [String; 9] {
        let fmt = |x: f64| match digits {
            Some(d) => format!("{x:.d$e}"),
            None => format!("{x:e}"),
        };
        let num = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let ok = self.status == SolverStatus::Ok;
        let residual = match self.final_residual {
            Some(v) => fmt(v),
            None if ok => REJECTED_INPUT.to_owned(),
            None => String::new(),
        };
        [
            self.label.clone(),
            self.solver.clone(),
            if ok { "ok" } else { "failed" }.to_owned(),
            residual,
            num(self.final_gap),
            num(self.rate_slope),
            self.stop_reason.map(|s| s.as_str().to_owned()).unwrap_or_default(),
            self.index_sets.map(|(i, _)| i.to_string()).unwrap_or_default(),
            self.index_sets.map(|(_, j)| j.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub const HEADER: [&'static str; 9] = [
        "label",
        "solver",
        "status",
        "final_residual",
        "final_gap",
        "rate_slope",
        "stop_reason",
        "productive",
        "nonproductive",
    ];

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(Self::HEADER)?;
        for row in &self.rows {
            w.write_record(row.cells(None))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<[String; 9]> = self.rows.iter().map(|r| r.cells(Some(4))).collect();
        let mut widths = Self::HEADER.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, row: &[String]| {
            let padded: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(f, "{}", padded.join("  ").trim_end())
        };
        line(f, &Self::HEADER.map(str::to_owned))?;
        for row in &cells {
            line(f, row)?;
        }
        Ok(())
    }
}

/// Per solver: final residual, final sampled gap, slope of the gap over the
/// log-spaced checkpoints, stop reason and `|I|`/`|J|` where applicable.
pub fn emit_summary(traces: &[SolverTrace]) -> SummaryTable {
    let rows = traces
        .iter()
        .map(|t| {
            let last = t.rows.last();
            let (ns, gaps): (Vec<usize>, Vec<f64>) = t
                .rows
                .iter()
                .filter(|r| r.k >= SLOPE_MIN_ITERATION)
                .filter_map(|r| r.gap_sampled.filter(|g| *g > 0.0).map(|g| (r.k, g)))
                .unzip();
            SummaryRow {
                label: t.label.clone(),
                solver: t.solver.clone(),
                status: t.status,
                final_residual: last.and_then(|r| r.residual),
                final_gap: last.and_then(|r| r.gap_sampled),
                rate_slope: rate_slope(&ns, &gaps).ok(),
                stop_reason: t.stop_reason,
                index_sets: t.index_sets,
            }
        })
        .collect();
    SummaryTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::run::TraceRow;
    use crate::solvers::Branch;

    fn trace(label: &str, residual: Option<f64>) -> SolverTrace {
        let rows = [10usize, 32, 100, 316, 1000]
            .iter()
            .map(|&k| TraceRow {
                k,
                branch: Branch::Unconstrained,
                gamma: 0.1,
                residual,
                gap_sampled: Some(2.0 / (k as f64).sqrt()),
                bound_rhs: None,
            })
            .collect();
        SolverTrace {
            label: label.into(),
            solver: "algorithm1".into(),
            status: SolverStatus::Ok,
            error: None,
            rows,
            stop_reason: Some(StopReason::BudgetExhausted),
            index_sets: None,
        }
    }

    #[test]
    fn zero_operator_run_gets_marker() {
        let table = emit_summary(&[trace("zero", None)]);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].cells(None)[3], REJECTED_INPUT);
        assert!(table.to_string().contains(REJECTED_INPUT));
    }

    #[test]
    fn two_runs_two_rows_and_slope() {
        let table = emit_summary(&[trace("a", Some(0.5)), trace("b", Some(0.25))]);
        assert_eq!(table.rows.len(), 2);
        assert!((table.rows[0].rate_slope.unwrap() + 0.5).abs() < 1e-12);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        table.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("label,solver,status,final_residual"));
    }

    #[test]
    fn failed_runs_leave_metrics_empty() {
        let failed = SolverTrace {
            label: "x".into(),
            solver: "algorithm2".into(),
            status: SolverStatus::Failed,
            error: Some("boom".into()),
            rows: Vec::new(),
            stop_reason: None,
            index_sets: None,
        };
        let cells = emit_summary(&[failed]).rows[0].cells(None);
        assert_eq!(cells[2], "failed");
        assert!(cells[3..].iter().all(String::is_empty));
    }
}
