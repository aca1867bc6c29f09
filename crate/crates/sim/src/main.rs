use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polaritrans_sim::config::{load_config, parse_config, Format};
use polaritrans_sim::scenario::{run_and_report, write_error_report};

/// Molecular-polariton pump-probe transport simulator.
#[derive(Debug, Parser)]
#[command(name = "polaritrans", version)]
struct Cli {
    /// TOML scenario file; omitted keys take the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set model.gammaPhi=0.005`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// dispersion, pump-only, pump-probe, sweep-momentum, sweep-dephasing or beer-lambert.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.set.clone();
    if let Some(s) = &cli.scenario {
        overrides.push(format!("scenario=\"{s}\""));
    }
    let loaded = match &cli.config {
        Some(p) => load_config(p, &overrides),
        None => parse_config("", &overrides),
    };
    let mut cfg = match loaded {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let _ = write_error_report(&dir, &e, None);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(run_and_report(&cfg) as u8)
}
