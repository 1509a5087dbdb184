use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fsa_core::{
    eig_curves_with, finite_spectrum_approximate, verify_report, FsaError, InstanceSpec, MatPath,
    PipelineConfig, Report, DEFAULT_EIG_TOL, DEFAULT_MERGE_TOL,
};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "fsa", version, about = "Finite-spectrum approximation of matrix paths")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an element file for a named or random instance.
    Gen {
        /// scalar-line | avoided-crossing(g) | constant-diag(v,...) | random
        spec: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        m: usize,
        /// Trigonometric degree of random instances.
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the approximation pipeline on an element file.
    Approx {
        element: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave the spectral projections out of the report.
        #[arg(long)]
        no_matrices: bool,
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        tol_eig: f64,
        #[arg(long, default_value_t = DEFAULT_MERGE_TOL)]
        merge_tol: f64,
    },
    /// Recheck every certificate in a report against its element.
    Verify { element: PathBuf, report: PathBuf },
    /// Eigenvalue curves as CSV.
    Bands {
        element: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        tol_eig: f64,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Precondition(String),
    #[error("obstruction at level {0}")]
    Obstruction(usize),
    #[error("{0}")]
    CertificationFailed(String),
    #[error("verification failed")]
    VerifyFailed,
    #[error("{0}")]
    DigestMismatch(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Other(_) => 1,
            Self::Precondition(_) => 2,
            Self::Obstruction(_) => 3,
            Self::CertificationFailed(_) => 4,
            Self::VerifyFailed => 5,
            Self::DigestMismatch(_) => 6,
        }
    }
}

impl From<FsaError> for CliError {
    fn from(e: FsaError) -> Self {
        let msg = e.to_string();
        match e {
            FsaError::CertificationFailed(_) | FsaError::InconclusiveGrid { .. } => {
                Self::CertificationFailed(msg)
            }
            FsaError::Obstructed(r) => Self::Obstruction(r.obstruction.level_index),
            FsaError::DigestMismatch { .. } => Self::DigestMismatch(msg),
            FsaError::NoConvergence { .. } => Self::Other(msg),
            _ => Self::Precondition(msg),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

/// Writes via a temp file in the target directory, then renames.
fn write_atomic(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::Other(e.to_string()));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn load_element(path: &Path) -> Result<MatPath, CliError> {
    MatPath::from_json(&read(path)?)
        .map_err(|e| CliError::Precondition(format!("{}: {e}", path.display())))
}

fn gen(spec: &str, n: usize, m: usize, q: usize, seed: u64) -> Result<MatPath, CliError> {
    let spec = if spec.trim() == "random" {
        InstanceSpec::Random { n, q, seed }
    } else {
        spec.parse()?
    };
    if m == 0 {
        return Err(CliError::Precondition("m must be at least 1".into()));
    }
    Ok(spec.build(m)?)
}

fn approx(element: &Path, eps: f64, out: Option<&Path>, cfg: PipelineConfig) -> Result<(), CliError> {
    let x = load_element(element)?;
    match finite_spectrum_approximate(&x, eps, &cfg) {
        Ok(r) => {
            log::info!(
                "approximant with {} spectral values, ||x - b|| <= {:e}",
                r.spectrum_size,
                r.error_chain.total
            );
            write_atomic(out, &Report::Approximant(r).to_json())
        }
        Err(FsaError::Obstructed(r)) => {
            let index = r.obstruction.level_index;
            log::warn!(
                "level {} = {} obstructed with budget {:e}",
                index,
                r.obstruction.level,
                r.obstruction.budget
            );
            write_atomic(out, &Report::Obstruction(*r).to_json())?;
            Err(CliError::Obstruction(index))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(element: &Path, report: &Path) -> Result<(), CliError> {
    let x = load_element(element)?;
    let r = Report::from_json(&read(report)?)
        .map_err(|e| CliError::Precondition(format!("{}: {e}", report.display())))?;
    let verdict = verify_report(&x, &r)?;
    if verdict.passed() {
        println!("ok: {} checks passed", verdict.checks.len());
        return Ok(());
    }
    for c in verdict.failures() {
        println!("FAILED {}: {}", c.name, c.detail);
    }
    Err(CliError::VerifyFailed)
}

fn bands(element: &Path, out: Option<&Path>, tol: f64) -> Result<(), CliError> {
    let x = load_element(element)?;
    let curves = eig_curves_with(&x, tol)?;
    let mut csv = String::from("s");
    for k in 1..=x.n() {
        csv.push_str(&format!(",lambda_{k}"));
    }
    csv.push('\n');
    for j in 0..=x.m() {
        csv.push_str(&format!("{:.16e}", x.s(j)));
        for v in curves.node_values(j) {
            csv.push_str(&format!(",{v:.16e}"));
        }
        csv.push('\n');
    }
    write_atomic(out, &csv)
}

fn configure_threads() {
    let n = std::env::var("FSA_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if n > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("FSA_THREADS ignored: {e}");
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::Gen { spec, n, m, q, seed, out } => {
            let x = gen(&spec, n, m, q, seed)?;
            write_atomic(out.as_deref(), &x.to_json())
        }
        Command::Approx { element, eps, out, no_matrices, tol_eig, merge_tol } => {
            let cfg = PipelineConfig {
                eig_tol: tol_eig,
                merge_tol,
                keep_projections: !no_matrices,
            };
            approx(&element, eps, out.as_deref(), cfg)
        }
        Command::Verify { element, report } => verify(&element, &report),
        Command::Bands { element, out, tol_eig } => bands(&element, out.as_deref(), tol_eig),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsa: {e}");
            ExitCode::from(e.code())
        }
    }
}
