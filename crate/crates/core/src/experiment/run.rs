use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, InstanceInfo, ResolvedExperiment, ResolvedSolver, SolverSpec};
use super::summary::{emit_summary, SummaryTable};
use crate::error::{Error, Result};
use crate::metrics::{gap_sampled, log_spaced_checkpoints};
use crate::problems::VIInstance;
use crate::solvers::{
    algorithm1_run_observed, algorithm2_run_observed, metric_stride, mpm_baseline_run_observed, Branch, IterationEvent,
    IterationObserver, RunResult, SolverConfig, StopReason,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 6] = ["k", "branch", "gamma", "residual", "gap_sampled", "bound_rhs"];
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

const GAP_CHECKPOINTS_PER_DECADE: usize = 4;

/// One CSV data row; `None` fields are written empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub branch: Branch,
    pub gamma: f64,
    pub residual: Option<f64>,
    pub gap_sampled: Option<f64>,
    pub bound_rhs: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverStatus {
    Ok,
    Failed,
}

/// Recorded outcome of one solver entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverTrace {
    pub label: String,
    pub solver: String,
    pub status: SolverStatus,
    pub error: Option<String>,
    pub rows: Vec<TraceRow>,
    pub stop_reason: Option<StopReason>,
    /// `|I|` and `|J|`, for the switching method only.
    pub index_sets: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub label: String,
    pub solver: String,
    pub status: SolverStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    pub config: SolverConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<StopReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub productive: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonproductive: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem_hypotheses_met: Option<bool>,
    pub wall_clock_seconds: f64,
}

/// `manifest.json`: everything needed to reproduce a run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub csv_columns: Vec<String>,
    pub library: String,
    pub library_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_file: Option<String>,
    pub config: ExperimentSpec,
    pub instance: InstanceInfo,
    pub x1: Vec<f64>,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub solvers: Vec<SolverRecord>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub traces: Vec<SolverTrace>,
    pub summary: SummaryTable,
}

impl ExperimentReport {
    pub fn any_failed(&self) -> bool {
        self.traces.iter().any(|t| t.status == SolverStatus::Failed)
    }
}

// Computes the sampled gap of the running estimate at selected iterations.
struct GapProbe<'a> {
    instance: &'a VIInstance,
    x1: &'a [f64],
    samples: usize,
    seed: u64,
    checkpoints: Vec<usize>,
    next: usize,
    gaps: BTreeMap<usize, f64>,
    error: Option<Error>,
}

impl IterationObserver for GapProbe<'_> {
    fn on_iteration(&mut self, event: &IterationEvent<'_>) {
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] < event.k {
            self.next += 1;
        }
        if self.checkpoints.get(self.next) != Some(&event.k) || self.error.is_some() {
            return;
        }
        self.next += 1;
        if let Some(estimate) = event.estimate {
            match gap_sampled(estimate, self.instance, self.x1, self.samples, self.seed) {
                Ok(g) => {
                    self.gaps.insert(event.k, g.value);
                }
                Err(e) => self.error = Some(e),
            }
        }
    }
}

/// Log-spaced iterations, aligned with the metric stride so that every
/// checkpoint lands on a recorded CSV row.
pub fn gap_checkpoints(iterations: usize) -> Vec<usize> {
    let stride = metric_stride(iterations);
    let mut out: Vec<usize> = log_spaced_checkpoints(iterations, GAP_CHECKPOINTS_PER_DECADE)
        .into_iter()
        .map(|c| {
            if c == 1 || c == iterations {
                c
            } else {
                (c / stride).max(1) * stride
            }
        })
        .collect();
    out.dedup();
    out
}

fn execute(exp: &ResolvedExperiment, solver: &ResolvedSolver, probe: &mut GapProbe<'_>) -> Result<RunResult> {
    let (inst, geom) = (&exp.instance, &exp.geometry);
    match &solver.spec {
        SolverSpec::Algorithm1 { .. } => algorithm1_run_observed(inst, geom, &solver.config, probe),
        SolverSpec::Algorithm2 { .. } => {
            let stack = solver.constraints.as_ref().expect("resolved with constraints");
            algorithm2_run_observed(inst, stack, geom, &solver.config, probe)
        }
        SolverSpec::Mpm { .. } => mpm_baseline_run_observed(inst, geom, &solver.config, probe),
    }
}

fn rows_from_run(run: &RunResult, gaps: &BTreeMap<usize, f64>, final_gap: f64) -> Vec<TraceRow> {
    let mut rows: Vec<TraceRow> = run
        .metrics
        .iter()
        .map(|m| TraceRow {
            k: m.k,
            branch: m.branch,
            gamma: m.gamma,
            residual: m.residual,
            gap_sampled: gaps.get(&m.k).copied(),
            bound_rhs: m.bound_rhs,
        })
        .collect();
    if let Some(last) = rows.last_mut() {
        last.gap_sampled = Some(final_gap);
    }
    rows
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::invalid(format!(
            "{}: unexpected CSV header {header:?}",
            path.display()
        )));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Runs every solver entry in order, writing `<label>.csv` for each
/// successful run, then `summary.csv` and `manifest.json`.
///
/// A failing solver is recorded in the manifest and the remaining entries
/// still run. Only I/O problems abort the experiment.
pub fn run_experiment(exp: &ResolvedExperiment, out_dir: &Path, spec_file: Option<&Path>) -> Result<ExperimentReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let started_unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let mut traces = Vec::new();
    let mut records = Vec::new();

    for solver in &exp.solvers {
        let timer = Instant::now();
        let mut probe = GapProbe {
            instance: &exp.instance,
            x1: &exp.x1,
            samples: exp.spec.gap_samples,
            seed: exp.spec.seed,
            checkpoints: gap_checkpoints(solver.config.iterations),
            next: 0,
            gaps: BTreeMap::new(),
            error: None,
        };
        let outcome = execute(exp, solver, &mut probe).and_then(|run| {
            if let Some(e) = probe.error.take() {
                return Err(e);
            }
            let final_gap = gap_sampled(
                &run.output.weighted,
                &exp.instance,
                &exp.x1,
                exp.spec.gap_samples,
                exp.spec.seed,
            )?;
            let rows = rows_from_run(&run, &probe.gaps, final_gap.value);
            Ok((run, rows))
        });
        let is_switching = matches!(solver.spec, SolverSpec::Algorithm2 { .. });
        let mut record = SolverRecord {
            label: solver.label.clone(),
            solver: solver.spec.kind_name().to_owned(),
            status: SolverStatus::Ok,
            error: None,
            csv: None,
            config: solver.config.clone(),
            stop_reason: None,
            iterations: None,
            productive: None,
            nonproductive: None,
            theorem_hypotheses_met: None,
            wall_clock_seconds: 0.0,
        };
        let trace = match outcome {
            Ok((run, rows)) => {
                let file = format!("{}.csv", solver.label);
                write_trace_csv(&out_dir.join(&file), &rows)?;
                record.csv = Some(file);
                record.stop_reason = Some(run.stop_reason);
                record.iterations = Some(run.iterations());
                record.theorem_hypotheses_met = Some(run.theorem_hypotheses_met);
                if is_switching {
                    record.productive = Some(run.productive.len());
                    record.nonproductive = Some(run.nonproductive.len());
                }
                SolverTrace {
                    label: solver.label.clone(),
                    solver: record.solver.clone(),
                    status: SolverStatus::Ok,
                    error: None,
                    rows,
                    stop_reason: Some(run.stop_reason),
                    index_sets: is_switching.then_some((run.productive.len(), run.nonproductive.len())),
                }
            }
            Err(e @ Error::Io { .. }) => return Err(e),
            Err(e) => {
                record.status = SolverStatus::Failed;
                record.error = Some(e.to_string());
                SolverTrace {
                    label: solver.label.clone(),
                    solver: record.solver.clone(),
                    status: SolverStatus::Failed,
                    error: Some(e.to_string()),
                    rows: Vec::new(),
                    stop_reason: None,
                    index_sets: None,
                }
            }
        };
        record.wall_clock_seconds = timer.elapsed().as_secs_f64();
        records.push(record);
        traces.push(trace);
    }

    let summary = emit_summary(&traces);
    summary.write_csv(&out_dir.join(SUMMARY_FILE))?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        csv_columns: CSV_COLUMNS.iter().map(|c| c.to_string()).collect(),
        library: env!("CARGO_PKG_NAME").to_owned(),
        library_version: env!("CARGO_PKG_VERSION").to_owned(),
        spec_file: spec_file.map(|p| p.display().to_string()),
        config: exp.spec.clone(),
        instance: exp.info.clone(),
        x1: exp.x1.clone(),
        started_unix_seconds,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        solvers: records,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(ExperimentReport {
        out_dir: out_dir.to_path_buf(),
        manifest,
        traces,
        summary,
    })
}

/// Rebuilds the summary of a finished run directory from its manifest and CSVs.
pub fn summarize_run_dir(dir: &Path) -> Result<SummaryTable> {
    let manifest = Manifest::load(dir)?;
    let mut traces = Vec::new();
    for rec in &manifest.solvers {
        let rows = match &rec.csv {
            Some(file) => read_trace_csv(&dir.join(file))?,
            None => Vec::new(),
        };
        traces.push(SolverTrace {
            label: rec.label.clone(),
            solver: rec.solver.clone(),
            status: rec.status,
            error: rec.error.clone(),
            rows,
            stop_reason: rec.stop_reason,
            index_sets: rec.productive.zip(rec.nonproductive),
        });
    }
    Ok(emit_summary(&traces))
}
