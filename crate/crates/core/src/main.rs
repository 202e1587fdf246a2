use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use spinbath::cli::{run, ExperimentConfig, RunError, COMMANDS};

/// Central-spin decoherence experiments.
///
/// Settings come from built-in defaults, then `--config`, then flags.
#[derive(Parser, Debug)]
#[command(name = "spinbath", version, after_help = "commands: simulate-r, simulate-obs, sweep-n, oracle-check, recurrence, timescale, fluctuation")]
struct Cli {
    /// Command to run; may instead come from the config file.
    command: Option<String>,
    /// Flat JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated environment sizes for sweep-n.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds per N in sweep-n.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    coeff_dist: Option<String>,
    #[arg(long)]
    g_dist: Option<String>,
    /// System amplitude a as `re,im`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    a: Option<Vec<f64>>,
    /// System amplitude b as `re,im`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    b: Option<Vec<f64>>,
    /// Trajectory length in units of 1/mean coupling.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Decoherence threshold on |r|.
    #[arg(long)]
    theta: Option<f64>,
    /// Hold window in units of 1/mean coupling.
    #[arg(long)]
    window: Option<f64>,
    /// Observable: eid:s00,s01re,s01im,s11 | single-site:<j>[:<eps>] | random:<seed>
    #[arg(long)]
    obs: Option<String>,
    /// Site operator for single-site observables (id, sx, sy, sz or 4 numbers).
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    g_base: Option<f64>,
    /// Interaction strength V1 in eV.
    #[arg(long)]
    v1: Option<f64>,
    /// Interaction strength V2 in eV.
    #[arg(long)]
    v2: Option<f64>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Override the dense-oracle site cap.
    #[arg(long)]
    site_cap: Option<usize>,
    /// Output directory (default: $SPINBATH_OUT_DIR or ./out).
    #[arg(long)]
    out: Option<String>,
}

macro_rules! overlay {
    ($cfg:ident, $cli:ident, $($field:ident),*) => {
        $(if let Some(v) = $cli.$field { $cfg.$field = v; })*
    };
}

fn resolve(cli: Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    overlay!(cfg, cli, command, n, n_list, seed, seeds, trials, coeff_dist, g_dist, t_max, points, theta, window,
        obs, eps, g_base, v1, v2, t_start, t_end, samples, site_cap);
    if let Some(a) = cli.a {
        cfg.a = [a[0], a[1]];
    }
    if let Some(b) = cli.b {
        cfg.b = [b[0], b[1]];
    }
    if cli.out.is_some() {
        cfg.output = cli.out;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let outcome = resolve(cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinbath: {e}");
            if e.exit_code() == 1 {
                eprintln!("usage: spinbath <{}> [--config FILE] [flags]", COMMANDS.join("|"));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
