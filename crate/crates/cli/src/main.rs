//! `vi-mirror`: run solver benchmarks from a TOML spec, generate HpHard
//! problem files and summarize finished runs.
//!
//! Exit codes: 0 success, 1 I/O or other runtime error, 2 invalid spec or
//! arguments (report as JSON on stderr), 3 at least one solver failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vi_mirror::experiment::{run_experiment, summarize_run_dir, ExperimentSpec, Overrides};
use vi_mirror::problems::{random_affine_term, HpHardProblem};

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "vi-mirror",
    version,
    about = "Mirror-descent benchmarks for variational inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver in a spec file.
    Run {
        spec: PathBuf,
        /// Output directory [default: runs/<spec file stem>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iteration budget, overriding `iterations` in the spec.
        #[arg(long = "n", value_name = "N")]
        iterations: Option<usize>,
        /// Experiment seed, overriding `seed` (and the HpHard instance seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a problem file.
    Generate {
        #[command(subcommand)]
        problem: GenerateCommand,
    },
    /// Print the summary table of a finished run directory.
    Summary { run_dir: PathBuf },
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// HpHard affine problem `F(x) = K x + q` on the unit ball.
    Hphard {
        #[arg(long = "n", value_name = "N")]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = QModeArg::Zero)]
        q_mode: QModeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum QModeArg {
    Zero,
    Random,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            spec,
            out,
            iterations,
            seed,
        } => run(&spec, out, Overrides { iterations, seed }),
        Command::Generate {
            problem: GenerateCommand::Hphard { n, seed, out, q_mode },
        } => generate(n, seed, &out, q_mode),
        Command::Summary { run_dir } => match summarize_run_dir(&run_dir) {
            Ok(table) => {
                print!("{table}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_RUNTIME, e),
        },
    }
}

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn run(spec_path: &Path, out: Option<PathBuf>, overrides: Overrides) -> ExitCode {
    let text = match fs::read_to_string(spec_path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_RUNTIME, format_args!("{}: {e}", spec_path.display())),
    };
    let resolved = ExperimentSpec::from_toml(&text).and_then(|mut spec| {
        spec.apply_overrides(&overrides);
        let base = spec_path.parent().unwrap_or(Path::new("."));
        spec.resolve(base)
    });
    let exp = match resolved {
        Ok(exp) => exp,
        Err(report) => {
            eprintln!("{}", report.to_json());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let out_dir = out.unwrap_or_else(|| {
        let stem = spec_path.file_stem().unwrap_or_default();
        Path::new("runs").join(stem)
    });
    match run_experiment(&exp, &out_dir, Some(spec_path)) {
        Ok(report) => {
            print!("{}", report.summary);
            for t in report.traces.iter().filter(|t| t.error.is_some()) {
                eprintln!("solver {} failed: {}", t.label, t.error.as_deref().unwrap_or_default());
            }
            if report.any_failed() {
                ExitCode::from(EXIT_SOLVER)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

fn generate(n: usize, seed: u64, out: &Path, q_mode: QModeArg) -> ExitCode {
    if n == 0 {
        eprintln!(r#"{{"status":"invalid","issues":[{{"field":"n","message":"must be at least 1"}}]}}"#);
        return ExitCode::from(EXIT_VALIDATION);
    }
    let q = match q_mode {
        QModeArg::Zero => vec![0.0; n],
        QModeArg::Random => random_affine_term(n, seed),
    };
    match HpHardProblem::generate(n, seed, q).and_then(|p| p.save(out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}
