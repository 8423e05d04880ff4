use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qcomm::suites::{run_suite, Suite, SuiteConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Metrics,
    Info,
    Encoding,
    Transition,
    Rac,
    Reduction,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Metrics => Suite::Metrics,
            SuiteArg::Info => Suite::Info,
            SuiteArg::Encoding => Suite::Encoding,
            SuiteArg::Transition => Suite::Transition,
            SuiteArg::Rac => Suite::Rac,
            SuiteArg::Reduction => Suite::Reduction,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Seeded checks of trace-distance, information and communication bounds.
#[derive(Debug, Parser)]
#[command(name = "qcomm", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per randomized check; each suite has its own default.
    #[arg(long)]
    trials: Option<usize>,
    /// Dimension range such as `2-8`, or a single dimension.
    #[arg(long, value_parser = parse_dims, default_value = "2-8")]
    dims: (usize, usize),
    /// Largest cube size for the encoding suite.
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Input size for the rac suite (2-5); the reduction suite only accepts 2.
    #[arg(long)]
    n: Option<usize>,
    /// Replaces every check's tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Writes the canonical JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad dimension {t:?}: {e}"))
    };
    match s.split_once('-') {
        Some((lo, hi)) => Ok((parse(lo)?, parse(hi)?)),
        None => parse(s).map(|d| (d, d)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = SuiteConfig {
        suite: cli.suite.into(),
        seed: cli.seed,
        trials: cli.trials,
        dims: cli.dims,
        m: cli.m,
        n: cli.n,
        tol: cli.tol,
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let json = match report.to_canonical_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match cli.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{json}"),
    }
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "{} violation(s) in: {}",
            report.violations(),
            failed.join(", ")
        );
        ExitCode::from(1)
    }
}
