use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{FeasibleSet, ProxGeometry};
use crate::problems::{
    example1_2d, example2_3d, random_affine_term, Constraint, ConstraintStack, HpHardProblem, VIInstance,
};
use crate::solvers::{Schedule, SolverConfig};

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_GAP_SAMPLES: usize = 1000;

/// Experiment description, read from a TOML file.
///
/// ```toml
/// iterations = 1000
/// seed = 0
///
/// [problem]
/// kind = "hphard"
/// n = 100
/// q_mode = "zero"
///
/// [[solver]]
/// kind = "algorithm1"
/// m = 50
///
/// [[solver]]
/// kind = "mpm"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub problem: ProblemSpec,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Seeds gap sampling, and HpHard generation unless the problem sets its own.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub geometry: GeometryKind,
    #[serde(default = "default_gap_samples")]
    pub gap_samples: usize,
    #[serde(rename = "solver", default)]
    pub solvers: Vec<SolverSpec>,
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_gap_samples() -> usize {
    DEFAULT_GAP_SAMPLES
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSpec {
    Example1 {},
    Example2 {
        #[serde(default = "one")]
        r: f64,
        #[serde(default = "one")]
        s: f64,
        #[serde(default = "one")]
        t: f64,
    },
    Hphard {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default)]
        q_mode: QMode,
    },
    /// HpHard problem file written by `generate hphard`.
    Custom {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QMode {
    #[default]
    Zero,
    /// Entries uniform in `[-1, 1)`, see [`random_affine_term`].
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    #[default]
    Euclidean,
    Entropy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SolverSpec {
    Algorithm1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        m: f64,
        #[serde(default = "non_adaptive")]
        schedule: Schedule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Algorithm2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        m: f64,
        epsilon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(rename = "constraint", default)]
        constraints: Vec<ConstraintSpec>,
    },
    Mpm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

fn non_adaptive() -> Schedule {
    Schedule::NonAdaptive
}

impl SolverSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SolverSpec::Algorithm1 { .. } => "algorithm1",
            SolverSpec::Algorithm2 { .. } => "algorithm2",
            SolverSpec::Mpm { .. } => "mpm",
        }
    }

    fn label(&self) -> Option<&str> {
        match self {
            SolverSpec::Algorithm1 { label, .. } | SolverSpec::Algorithm2 { label, .. } | SolverSpec::Mpm { label } => {
                label.as_deref()
            }
        }
    }

    fn default_label(&self, index: usize) -> String {
        let base = format!("{:02}-{}", index + 1, self.kind_name());
        match self {
            SolverSpec::Algorithm1 { m, .. } | SolverSpec::Algorithm2 { m, .. } => format!("{base}-m{m}"),
            SolverSpec::Mpm { .. } => base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// `||x - center||_2 - radius <= 0`; the center defaults to the origin.
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    /// `<normal, x> - offset <= 0`.
    Halfspace { normal: Vec<f64>, offset: f64 },
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

/// Every problem found while resolving a spec.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    fn push(&mut self, field: impl Into<String>, message: impl fmt::Display) {
        self.issues.push(ValidationIssue {
            field: field.into(),
            message: message.to_string(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// `{"status": "invalid", "issues": [...]}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "status": "invalid", "issues": self.issues }).to_string()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{}: {}", issue.field, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Instance metadata echoed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub name: String,
    pub dimension: usize,
    pub lipschitz_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<[f64; 3]>,
    pub known_solution: bool,
}

#[derive(Clone, Debug)]
pub struct ResolvedSolver {
    pub label: String,
    pub spec: SolverSpec,
    pub config: SolverConfig,
    pub constraints: Option<ConstraintStack>,
}

/// A spec whose every entry has been checked and turned into solver input.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub spec: ExperimentSpec,
    pub instance: VIInstance,
    pub geometry: ProxGeometry,
    pub info: InstanceInfo,
    /// `(1/sqrt n, ..., 1/sqrt n)`.
    pub x1: Vec<f64>,
    pub solvers: Vec<ResolvedSolver>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ValidationReport> {
        toml::from_str(text).map_err(|e| {
            let mut report = ValidationReport::default();
            report.push("spec", e.to_string().trim_end());
            report
        })
    }

    pub fn apply_overrides(&mut self, overrides: &Overrides) {
        if let Some(n) = overrides.iterations {
            self.iterations = n;
        }
        if let Some(seed) = overrides.seed {
            self.seed = seed;
            if let ProblemSpec::Hphard { seed: s, .. } = &mut self.problem {
                *s = Some(seed);
            }
        }
    }

    /// Checks every entry and builds the solver inputs, collecting all
    /// issues instead of stopping at the first. Relative problem-file paths
    /// are taken relative to `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedExperiment, ValidationReport> {
        let mut report = ValidationReport::default();
        if self.iterations == 0 {
            report.push("iterations", "must be at least 1");
        }
        if self.solvers.is_empty() {
            report.push("solver", "at least one [[solver]] entry is required");
        }
        let built = self.build_instance(base_dir, &mut report);
        let geometry = built.as_ref().and_then(|(inst, _)| {
            let geom = match self.geometry {
                GeometryKind::Euclidean => ProxGeometry::euclidean(inst.set().clone()),
                GeometryKind::Entropy => match inst.set() {
                    FeasibleSet::Simplex { dimension } => ProxGeometry::entropic_simplex(*dimension),
                    _ => Err(crate::Error::Config("entropy geometry needs a simplex".into())),
                },
            };
            geom.map_err(|e| report.push("geometry", e)).ok()
        });

        let mut labels = HashSet::new();
        let mut solvers = Vec::new();
        for (i, s) in self.solvers.iter().enumerate() {
            let field = format!("solver[{i}]");
            let label = s.label().map(str::to_owned).unwrap_or_else(|| s.default_label(i));
            if label.is_empty()
                || !label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
                || label.starts_with('.')
            {
                report.push(format!("{field}.label"), format!("'{label}' is not a safe file name"));
            } else if label == "summary" || label == "manifest" {
                report.push(format!("{field}.label"), format!("'{label}' is reserved"));
            } else if !labels.insert(label.clone()) {
                report.push(format!("{field}.label"), format!("duplicate label '{label}'"));
            }
            if let (Some((inst, _)), Some(geom)) = (&built, &geometry) {
                if let Some(r) = resolve_solver(s, &field, label, inst, geom, self.iterations, &mut report) {
                    solvers.push(r);
                }
            }
        }

        match (built, geometry) {
            (Some((instance, info)), Some(geometry)) if report.is_empty() => {
                let x1 = initial_point(instance.dimension());
                Ok(ResolvedExperiment {
                    spec: self.clone(),
                    instance,
                    geometry,
                    info,
                    x1,
                    solvers,
                })
            }
            _ => Err(report),
        }
    }

    fn build_instance(&self, base_dir: &Path, report: &mut ValidationReport) -> Option<(VIInstance, InstanceInfo)> {
        let info = |inst: &VIInstance, seed, parameters| InstanceInfo {
            name: inst.name().to_owned(),
            dimension: inst.dimension(),
            lipschitz_bound: inst.bound(),
            seed,
            parameters,
            known_solution: inst.known_solution().is_some(),
        };
        match &self.problem {
            ProblemSpec::Example1 {} => {
                let inst = example1_2d();
                let i = info(&inst, None, None);
                Some((inst, i))
            }
            ProblemSpec::Example2 { r, s, t } => match example2_3d(*r, *s, *t) {
                Ok(inst) => {
                    let i = info(&inst, None, Some([*r, *s, *t]));
                    Some((inst, i))
                }
                Err(e) => {
                    report.push("problem", e);
                    None
                }
            },
            ProblemSpec::Hphard { n, seed, q_mode } => {
                if *n == 0 {
                    report.push("problem.n", "must be at least 1");
                    return None;
                }
                let seed = seed.unwrap_or(self.seed);
                let q = match q_mode {
                    QMode::Zero => vec![0.0; *n],
                    QMode::Random => random_affine_term(*n, seed),
                };
                match HpHardProblem::generate(*n, seed, q).and_then(|p| p.to_instance()) {
                    Ok(inst) => {
                        let i = info(&inst, Some(seed), None);
                        Some((inst, i))
                    }
                    Err(e) => {
                        report.push("problem", e);
                        None
                    }
                }
            }
            ProblemSpec::Custom { path } => {
                let full = base_dir.join(path);
                match HpHardProblem::load(&full).and_then(|p| {
                    let seed = p.seed;
                    p.to_instance().map(|inst| (inst, seed))
                }) {
                    Ok((inst, seed)) => {
                        let i = info(&inst, Some(seed), None);
                        Some((inst, i))
                    }
                    Err(e) => {
                        report.push("problem.path", e);
                        None
                    }
                }
            }
        }
    }
}

/// `(1/sqrt n, ..., 1/sqrt n)`, the shared starting point.
pub fn initial_point(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

fn resolve_solver(
    spec: &SolverSpec,
    field: &str,
    label: String,
    inst: &VIInstance,
    geom: &ProxGeometry,
    iterations: usize,
    report: &mut ValidationReport,
) -> Option<ResolvedSolver> {
    let x1 = initial_point(inst.dimension());
    let base = SolverConfig::new(geom, x1, iterations.max(1));
    let before = report.issues.len();
    let (config, constraints) = match spec {
        SolverSpec::Algorithm1 {
            m, schedule, radius, ..
        } => {
            if *schedule == Schedule::ConstraintSplit {
                report.push(
                    format!("{field}.schedule"),
                    "algorithm1 accepts non-adaptive or adaptive",
                );
            }
            let mut c = base.with_m(*m).with_schedule(*schedule);
            if let Some(r) = radius {
                c.radius = *r;
            }
            (c, None)
        }
        SolverSpec::Algorithm2 {
            m,
            epsilon,
            radius,
            constraints,
            ..
        } => {
            let mut c = base
                .with_m(*m)
                .with_epsilon(*epsilon)
                .with_schedule(Schedule::ConstraintSplit);
            if let Some(r) = radius {
                c.radius = *r;
            }
            (c, build_constraints(constraints, field, inst.dimension(), report))
        }
        SolverSpec::Mpm { .. } => {
            if geom.psi() != crate::geometry::ProxFunction::HalfSquaredEuclidean {
                report.push(field.to_owned(), "mpm needs the euclidean geometry");
            }
            (base, None)
        }
    };
    if let Err(e) = config.validate(geom) {
        report.push(field.to_owned(), e);
    }
    (report.issues.len() == before).then_some(ResolvedSolver {
        label,
        spec: spec.clone(),
        config,
        constraints,
    })
}

fn build_constraints(
    specs: &[ConstraintSpec],
    field: &str,
    n: usize,
    report: &mut ValidationReport,
) -> Option<ConstraintStack> {
    if specs.is_empty() {
        report.push(
            format!("{field}.constraint"),
            "algorithm2 needs at least one [[solver.constraint]]",
        );
        return None;
    }
    let mut out = Vec::new();
    for (j, c) in specs.iter().enumerate() {
        let cfield = format!("{field}.constraint[{j}]");
        let built = match c {
            ConstraintSpec::Ball { center, radius } => {
                let center = center.clone().unwrap_or_else(|| vec![0.0; n]);
                if center.len() != n {
                    report.push(cfield, format!("center has length {}, expected {n}", center.len()));
                    continue;
                }
                Constraint::ball(center, *radius)
            }
            ConstraintSpec::Halfspace { normal, offset } => {
                if normal.len() != n {
                    report.push(cfield, format!("normal has length {}, expected {n}", normal.len()));
                    continue;
                }
                Constraint::halfspace(normal.clone(), *offset)
            }
        };
        match built {
            Ok(c) => out.push(c),
            Err(e) => report.push(cfield, e),
        }
    }
    if out.len() != specs.len() {
        return None;
    }
    ConstraintStack::new(out)
        .map_err(|e| report.push(field.to_owned(), e))
        .ok()
}
