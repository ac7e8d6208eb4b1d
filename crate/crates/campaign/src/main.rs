use std::path::PathBuf;
use std::process::ExitCode;

use boussinesq_campaign::{
    config::DEFAULT_OUT, load_config, report_from_disk, run_campaign, CampaignError, ExperimentKind, RunOptions,
    ENV_OUT,
};
use clap::{Args, Parser, Subcommand};

/// Simulation and verification campaigns for the sixth-order Boussinesq equation.
///
/// Exit status: 0 when every run passes, 1 when any run fails or an I/O error
/// occurs, 2 on a config or usage error.
#[derive(Debug, Parser)]
#[command(name = "boussinesq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML campaign config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; overrides `output_dir` and the BOUSSINESQ_OUT variable.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed applied to every data family and ensemble.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the equation and record energies and norms.
    Simulate,
    /// Fit the decay in N of the modified-energy increment.
    ScanAlmostConservation,
    /// Check the space-time estimates on a random ensemble under refinement.
    VerifyEstimates,
    /// Check the polynomial growth bound of the H^s norm.
    GrowthCheck,
    /// Rebuild index, report and summary from the runs under the output root.
    Report,
}

impl Command {
    fn experiment(&self) -> Option<ExperimentKind> {
        match self {
            Command::Simulate => Some(ExperimentKind::Simulate),
            Command::ScanAlmostConservation => Some(ExperimentKind::AlmostConservationScan),
            Command::VerifyEstimates => Some(ExperimentKind::EstimateSuite),
            Command::GrowthCheck => Some(ExperimentKind::GrowthCheck),
            Command::Report => None,
        }
    }
}

fn fail(err: &CampaignError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_config_error() { 2 } else { 1 })
}

fn default_out() -> PathBuf {
    match std::env::var_os(ENV_OUT) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if c.quiet { "error" } else { "info" }))
        .format_timestamp(None)
        .init();

    let Some(kind) = cli.command.experiment() else {
        let out = match &c.config {
            Some(path) => match load_config(path, None) {
                Ok(cfg) => cfg.output_root(c.out.as_deref()),
                Err(e) => return fail(&e),
            },
            None => c.out.clone().unwrap_or_else(default_out),
        };
        return match report_from_disk(&out) {
            Ok(report) => {
                if !c.quiet {
                    println!("{}", report.markdown);
                }
                ExitCode::from(if report.summary.all_passed { 0 } else { 1 })
            }
            Err(e) => fail(&e),
        };
    };

    let Some(path) = &c.config else {
        eprintln!("error: --config <path> is required for this subcommand");
        return ExitCode::from(2);
    };
    let cfg = match load_config(path, Some(kind)) {
        Ok(cfg) => cfg.with_seed(c.seed),
        Err(e) => return fail(&e),
    };
    let out = cfg.output_root(c.out.as_deref());
    match run_campaign(&cfg, &RunOptions { out: out.clone(), workers: c.workers }) {
        Ok(outcome) => {
            if !c.quiet {
                for p in &outcome.quarantined {
                    println!("quarantined {}", p.display());
                }
                for r in &outcome.records {
                    println!(
                        "{} {:<40} {:<12} {}",
                        &r.config_hash[..12],
                        r.label,
                        if r.summary.passed { "PASS" } else { "FAIL" },
                        r.status
                    );
                }
                println!("{} runs; output in {}", outcome.records.len(), out.display());
            }
            ExitCode::from(if outcome.all_passed() { 0 } else { 1 })
        }
        Err(e) => fail(&e),
    }
}
