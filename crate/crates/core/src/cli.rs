//! Command-line surface. Exit codes: 0 pass or report-only, 1 fail,
//! 2 invalid configuration or any other error (JSON on stderr).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::curves::{discretize, find_transmission_eigenvalues, sweep};
use crate::experiments::{
    counting_experiment, hypothesis_scan, packing_bound_check, scaling_check, truncation_stability,
    ExperimentResult, GalerkinSettings, TruncationSetup, Verdict, DEFAULT_SLOPE_TOL,
};
use crate::model::{validate_problem, PotentialSpec, ProblemKind, ProblemSpec, ShrinkingChain};
use crate::output;
use crate::radial::{te_list_up_to, RadialProblem};

#[derive(Debug, Parser)]
#[command(
    name = "transeig",
    version,
    about = "Interior transmission eigenvalues by eigenvalue-curve sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the eigenvalue curves of a problem file and write them as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_curves: PathBuf,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Locate the transmission eigenvalues of a problem file.
    Find {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle transmission eigenvalues of a ball with constant potential.
    Radial {
        #[arg(long)]
        problem: ProblemKind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-eigenvalue ratio under dilation of a Helmholtz ball.
    Scaling {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        radius: f64,
        #[arg(long, default_value_t = 0.75)]
        v0: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        eps: Vec<f64>,
        /// Repeat the check with the Galerkin pipeline on (-R, R).
        #[arg(long)]
        galerkin: bool,
        #[command(flatten)]
        disc: DiscArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth of the eigenvalue count N(x) of a Helmholtz ball.
    Count {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        radius: f64,
        #[arg(long, default_value_t = 0.75)]
        v0: f64,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        x: Vec<f64>,
        /// Highest angular order; chosen per x when omitted.
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SLOPE_TOL)]
        slope_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Galerkin count on (0, L) against the packing prediction.
    Packing {
        #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
        length: f64,
        #[arg(long, default_value_t = 0.75)]
        v0: f64,
        #[arg(long, default_value_t = 16.0)]
        x: f64,
        #[command(flatten)]
        disc: DiscArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// TE drift between truncations of a shrinking chain.
    Truncation {
        #[arg(long, default_value = "helmholtz")]
        problem: ProblemKind,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        #[arg(long, default_value_t = -std::f64::consts::PI, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        first_length: f64,
        #[arg(long, default_value_t = 0.5)]
        decay_ratio: f64,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        lambda_lo: f64,
        #[arg(long, default_value_t = 30.0)]
        lambda_hi: f64,
        #[arg(long, default_value_t = 32)]
        cells: usize,
        #[arg(long, default_value_t = 12)]
        curves: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sign changes of the Schrödinger ball determinant.
    Hypothesis {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        v0: f64,
        #[arg(long, default_value_t = 100.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        lmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DiscArgs {
    #[arg(long, default_value_t = 64)]
    cells: usize,
    #[arg(long, default_value_t = 12)]
    curves: usize,
    #[arg(long, default_value_t = 400)]
    steps: usize,
}

impl DiscArgs {
    fn settings(&self) -> GalerkinSettings {
        GalerkinSettings {
            cells: self.cells,
            num_curves: self.curves,
            steps: self.steps,
            ..GalerkinSettings::default()
        }
    }
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        CliError {
            kind,
            message: message.to_string(),
        }
    }
}

fn load_config(path: &Path) -> Result<crate::model::ValidatedProblem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
    let spec: ProblemSpec = serde_json::from_str(&text).map_err(|e| CliError::new("config", e))?;
    validate_problem(&spec).map_err(|e| CliError::new("config", e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn experiment(
    result: Result<ExperimentResult, impl ToString>,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let result = result.map_err(|e| CliError::new("runtime", e))?;
    emit(out, &output::to_json(&result))?;
    Ok(if result.verdict == Verdict::Fail {
        1
    } else {
        0
    })
}

fn runtime(e: impl ToString) -> CliError {
    CliError::new("runtime", e)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Sweep {
            config,
            out_curves,
            out_report,
        } => {
            let problem = load_config(&config)?;
            if let Some(report_path) = out_report {
                let result = find_transmission_eigenvalues(&problem).map_err(runtime)?;
                emit(Some(&out_curves), &result.table.to_csv())?;
                emit(Some(&report_path), &output::to_json(&result.report))?;
            } else {
                let matrices = discretize(&problem).map_err(runtime)?;
                let table = sweep(
                    problem.kind,
                    &matrices,
                    &problem.sweep,
                    problem.discretization.num_curves,
                )
                .map_err(runtime)?;
                emit(Some(&out_curves), &table.to_csv())?;
            }
            Ok(0)
        }
        Command::Find { config, out } => {
            let problem = load_config(&config)?;
            let result = find_transmission_eigenvalues(&problem).map_err(runtime)?;
            emit(out.as_deref(), &output::to_json(&result.report))?;
            Ok(0)
        }
        Command::Radial {
            problem,
            dim,
            radius,
            v0,
            lmax,
            lambda_max,
            out,
        } => {
            let p = RadialProblem {
                kind: problem,
                dim,
                radius,
                v0,
                ell: 0,
            };
            p.validate().map_err(|e| CliError::new("config", e))?;
            let list = te_list_up_to(&p, lambda_max, lmax).map_err(runtime)?;
            let body = json!({
                "problem": problem,
                "dim": dim,
                "radius": radius,
                "v0": v0,
                "lmax": lmax,
                "lambda_max": lambda_max,
                "weighted_count": list.weighted_count(),
                "transmission_eigenvalues": list.entries,
            });
            emit(out.as_deref(), &output::to_json(&body))?;
            Ok(0)
        }
        Command::Scaling {
            dim,
            radius,
            v0,
            eps,
            galerkin,
            disc,
            out,
        } => {
            let g = galerkin.then(|| disc.settings());
            experiment(scaling_check(dim, radius, v0, &eps, g), out.as_deref())
        }
        Command::Count {
            dim,
            radius,
            v0,
            x,
            lmax,
            slope_tol,
            out,
        } => experiment(
            counting_experiment(dim, radius, v0, &x, lmax, slope_tol),
            out.as_deref(),
        ),
        Command::Packing {
            length,
            v0,
            x,
            disc,
            out,
        } => experiment(
            packing_bound_check(length, v0, x, disc.settings()),
            out.as_deref(),
        ),
        Command::Truncation {
            problem,
            c,
            alpha,
            start,
            gap,
            first_length,
            decay_ratio,
            counts,
            lambda_lo,
            lambda_hi,
            cells,
            curves,
            steps,
            out,
        } => {
            let setup = TruncationSetup {
                kind: problem,
                chain: ShrinkingChain {
                    count: 1,
                    start,
                    gap,
                    first_length,
                    decay_ratio,
                },
                potential: PotentialSpec::PowerDecay { c, alpha },
                window: (lambda_lo, lambda_hi),
                galerkin: GalerkinSettings {
                    cells,
                    num_curves: curves,
                    steps,
                    ..GalerkinSettings::default()
                },
            };
            experiment(truncation_stability(&setup, &counts), out.as_deref())
        }
        Command::Hypothesis {
            dim,
            radius,
            v0,
            lambda_max,
            steps,
            lmax,
            out,
        } => experiment(
            hypothesis_scan(dim, radius, v0, lambda_max, steps, lmax),
            out.as_deref(),
        ),
    }
}

fn report_error(e: &CliError) {
    let body = json!({"error": {"kind": e.kind, "message": e.message}});
    eprint!("{}", output::to_json(&body));
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report_error(&CliError::new("usage", e.render().to_string().trim()));
            return 2;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            2
        }
    }
}
