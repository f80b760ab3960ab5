use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qmcmc::experiment::{
    parse_config_text, run_figure_a, run_figure_b, run_sample, run_scan, write_csv, ConfigError,
    ExperimentConfig, ExperimentKind,
};
use qmcmc::validate::{run_all, write_outcomes, ValidateOptions, Verdict};

/// Spectral-gap experiments for quantum-proposal Metropolis-Hastings chains.
///
/// Every option can also be given as `key=value` in a config file; flags win.
#[derive(Debug, Parser)]
#[command(name = "qmcmc", version)]
struct Cli {
    /// figure-a, figure-b, scan, sample or validate
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    n_min: Option<String>,
    #[arg(long)]
    n_max: Option<String>,
    /// Strength of the marked-state well (positive)
    #[arg(long)]
    alpha: Option<String>,
    /// Inverse temperature
    #[arg(long)]
    beta: Option<String>,
    /// grover, transverse, uniform or local
    #[arg(long)]
    mixer: Option<String>,
    /// Field: a value, a range lo:hi, or `resonance`
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// Evolution time: a value or a range lo:hi
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Samples per averaged kernel
    #[arg(long)]
    avg_samples: Option<String>,
    /// grid or mc
    #[arg(long)]
    avg_mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV path; stdout when absent
    #[arg(long)]
    out: Option<String>,
    /// Largest N for which the exact gap is computed
    #[arg(long)]
    max_dense_n: Option<String>,
    /// Chain length for `sample`
    #[arg(long)]
    steps: Option<String>,
    /// Mixing-time threshold
    #[arg(long)]
    epsilon: Option<String>,
    /// Eigensolve tolerance for `validate`
    #[arg(long)]
    eigen_tol: Option<String>,
    /// key=value config file, read before the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn pairs(&self) -> Result<Vec<(String, String)>, ConfigError> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        let flags = [
            ("experiment", &self.experiment),
            ("n_min", &self.n_min),
            ("n_max", &self.n_max),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("mixer", &self.mixer),
            ("h", &self.h),
            ("t", &self.t),
            ("avg_samples", &self.avg_samples),
            ("avg_mode", &self.avg_mode),
            ("seed", &self.seed),
            ("out", &self.out),
            ("max_dense_n", &self.max_dense_n),
            ("steps", &self.steps),
            ("epsilon", &self.epsilon),
            ("eigen_tol", &self.eigen_tol),
        ];
        pairs.extend(
            flags
                .into_iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))),
        );
        Ok(pairs)
    }
}

fn sink(cfg: &ExperimentConfig) -> io::Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cfg: &ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>> {
    if cfg.experiment == ExperimentKind::Validate {
        let opts = ValidateOptions {
            max_n: cfg.n_max,
            seed: cfg.seed,
            eigen_tolerance: cfg.eigen_tol,
        };
        let outcomes = run_all(&opts);
        for o in &outcomes {
            eprintln!("{o}");
        }
        write_outcomes(&outcomes, sink(cfg)?)?;
        return Ok(outcomes.iter().all(|o| o.verdict != Verdict::Fail));
    }
    let rows = match cfg.experiment {
        ExperimentKind::FigureA => run_figure_a(cfg),
        ExperimentKind::FigureB => run_figure_b(cfg),
        ExperimentKind::Scan => run_scan(cfg),
        ExperimentKind::Sample => run_sample(cfg),
        ExperimentKind::Validate => unreachable!(),
    };
    write_csv(&rows, sink(cfg)?)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.pairs().and_then(|p| ExperimentConfig::from_pairs(&p)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("qmcmc: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("qmcmc: validation failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qmcmc: {e}");
            ExitCode::from(1)
        }
    }
}
