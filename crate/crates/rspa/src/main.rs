//! Command-line interface: extraction, evaluation, benchmark sweeps and
//! synthetic instance generation.

use clap::{Parser, Subcommand};
use rspa::error::Error;
use rspa::extraction::{extract, ExtractionRequest, ExtractionResult, Strategy};
use rspa::io::{
    load_indices, load_matrix, save_indices, save_matrix, MatrixFormat, parse_sweep_config,
};
use rspa::nnls::{default_max_iter, nnls_solve};
use rspa::selection::RspaParams;
use rspa::synth::{generate_instance, run_sweep};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_DATA_ERROR: u8 = 3;
const EXIT_NUMERICAL_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rspa",
    about = "Column subset selection for separable nonnegative matrix factorization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract r column indices from a matrix.
    Extract {
        /// Input matrix file.
        #[arg(long)]
        input: PathBuf,
        /// Input format.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Number of indices to extract.
        #[arg(long)]
        r: usize,
        /// Selection algorithm: spa or rspa.
        #[arg(long)]
        algo: String,
        /// Candidate count for rspa.
        #[arg(long, default_value_t = 20)]
        d: usize,
        /// Residual norm exponent for rspa.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Diversification factor for rspa.
        #[arg(long, default_value_t = 4.0)]
        beta: f64,
        /// Divide each column by its l1 norm before extraction.
        #[arg(long)]
        normalize_l1: bool,
        /// Output file for the extracted indices, one per line.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an index set by its relative reconstruction error.
    Evaluate {
        /// Input matrix file.
        #[arg(long)]
        input: PathBuf,
        /// Input format.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Index file, one 0-based index per line.
        #[arg(long)]
        indices: PathBuf,
        /// Solver tolerance.
        #[arg(long, default_value_t = rspa::nnls::DEFAULT_TOL)]
        tol: f64,
    },
    /// Run a recovery sweep described by a configuration file.
    Sweep {
        /// Flat key = value configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic instance with planted outliers.
    Synth {
        /// Ambient dimension (rows).
        #[arg(long)]
        m: usize,
        /// Number of basis columns.
        #[arg(long)]
        r: usize,
        /// Number of separable columns (including the basis).
        #[arg(long)]
        n: usize,
        /// Number of outlier columns.
        #[arg(long)]
        outliers: usize,
        /// Generator seed.
        #[arg(long)]
        seed: u64,
        /// Output rawbin path; ground-truth index files are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct ExtractSummary<'a> {
    indices: &'a [usize],
    per_step_residual_fro: &'a [f64],
    steps_completed: usize,
    early_stop_reason: Option<&'static str>,
    wall_time_s: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA_ERROR)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Extract {
            input,
            format,
            r,
            algo,
            d,
            p,
            beta,
            normalize_l1,
            out,
        } => {
            let format: MatrixFormat = format.parse()?;
            let strategy = match algo.as_str() {
                "spa" => Strategy::Spa,
                "rspa" => Strategy::Rspa(RspaParams::new(d, p, beta)?),
                other => {
                    return Err(Error::ContractViolation(format!(
                        "unknown algorithm '{other}' (expected spa or rspa)"
                    )))
                }
            };
            let x = load_matrix(&input, format)?;
            let request = ExtractionRequest::new(x, r, strategy, normalize_l1)?;
            let started = Instant::now();
            let result = extract(&request)?;
            let wall_time_s = started.elapsed().as_secs_f64();
            save_indices(&out, &result.indices)?;
            print_summary(&result, wall_time_s);
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            input,
            format,
            indices,
            tol,
        } => {
            let format: MatrixFormat = format.parse()?;
            let x = load_matrix(&input, format)?;
            let k = load_indices(&indices)?;
            if k.is_empty() {
                return Err(Error::ContractViolation(
                    "index file contains no indices".to_string(),
                ));
            }
            let mut seen = std::collections::HashSet::new();
            for &idx in &k {
                if idx >= x.cols() {
                    return Err(Error::ContractViolation(format!(
                        "index {idx} out of range for {} columns",
                        x.cols()
                    )));
                }
                if !seen.insert(idx) {
                    return Err(Error::ContractViolation(format!("duplicate index {idx}")));
                }
            }
            let x_fro = x.frobenius_norm();
            if x_fro <= 0.0 {
                return Err(Error::ContractViolation("matrix is zero".to_string()));
            }
            let w = x.select_columns(&k)?;
            let solution = nnls_solve(&w, &x, tol, default_max_iter(k.len()))?;
            let error = solution.objective / x_fro;
            println!("{error}");
            println!("{}%", error * 100.0);
            if !solution.converged {
                eprintln!(
                    "warning: solver did not converge (kkt residual {})",
                    solution.kkt_residual
                );
                return Ok(ExitCode::from(EXIT_NUMERICAL_FAILURE));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Io {
                    path: config.display().to_string(),
                    source: e,
                })?;
            let sweep_config = parse_sweep_config(&text, &config.display().to_string())?;
            let result = run_sweep(&sweep_config)?;
            std::fs::write(&out, result.to_csv()).map_err(|e| Error::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            println!("wrote {} rows to {}", result.rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            m,
            r,
            n,
            outliers,
            seed,
            out,
        } => {
            let instance = generate_instance(m, r, n, outliers, seed)?;
            save_matrix(&out, MatrixFormat::RawBin, &instance.x)?;
            let vertices_path = suffixed(&out, ".vertices.txt");
            let outliers_path = suffixed(&out, ".outliers.txt");
            save_indices(&vertices_path, &instance.true_vertex_indices)?;
            save_indices(&outliers_path, &instance.outlier_indices)?;
            println!(
                "wrote {}x{} matrix to {} (ground truth: {}, {})",
                instance.x.rows(),
                instance.x.cols(),
                out.display(),
                vertices_path.display(),
                outliers_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_summary(result: &ExtractionResult, wall_time_s: f64) {
    let summary = ExtractSummary {
        indices: &result.indices,
        per_step_residual_fro: &result.per_step_residual_fro,
        steps_completed: result.steps_completed,
        early_stop_reason: result.early_stop_reason.map(|_| "residual-exhausted"),
        wall_time_s,
    };
    println!(
        "{}",
        serde_json::to_string(&summary).expect("summary serialization cannot fail")
    );
}

fn suffixed(path: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}
