//! Spec-file driven benchmark runs.
//!
//! An [`ExperimentSpec`] names one problem and a list of solver entries.
//! Every entry is validated before anything runs; then each solver runs from
//! the shared start `(1/sqrt n, ..., 1/sqrt n)` and its per-iteration trace
//! goes to `<label>.csv` with the columns
//! `k,branch,gamma,residual,gap_sampled,bound_rhs`. `manifest.json` records
//! the resolved configuration, versions, seed and timings, and `summary.csv`
//! one line per solver. Only the manifest contains timestamps, so repeated
//! runs of a spec produce identical CSV files.

mod run;
mod spec;
mod summary;

pub use run::{
    gap_checkpoints, read_trace_csv, run_experiment, summarize_run_dir, write_trace_csv, ExperimentReport, Manifest,
    SolverRecord, SolverStatus, SolverTrace, TraceRow, CSV_COLUMNS, MANIFEST_FILE, SCHEMA_VERSION, SUMMARY_FILE,
};
pub use spec::{
    initial_point, ConstraintSpec, ExperimentSpec, GeometryKind, InstanceInfo, Overrides, ProblemSpec, QMode,
    ResolvedExperiment, ResolvedSolver, SolverSpec, ValidationIssue, ValidationReport, DEFAULT_GAP_SAMPLES,
    DEFAULT_ITERATIONS,
};
pub use summary::{emit_summary, SummaryRow, SummaryTable, REJECTED_INPUT};
