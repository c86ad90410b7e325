use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use damsim::Scheme;
use damsim_cli::{run_convergence_trace, run_sweep, run_validate, ExperimentConfig, SweepSpec};

#[derive(Parser)]
#[command(
    name = "damsim",
    version,
    about = "Delay-alignment modulation sum-rate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean sum rate versus transmit power.
    SweepPower(SweepArgs),
    /// Mean sum rate versus paths per UE.
    SweepPaths(SweepArgs),
    /// SCA objective per iteration for DAM-RZF and SP-RZF on one channel.
    Convergence(Common),
    /// Check model invariants on random instances; exits nonzero on failure.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid point (instances for `validate`).
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated scheme names, e.g. DAM-ZF,SP-ZF.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Also write per-trial seeds and sum rates to this CSV.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

/// Instances checked by `validate` unless `--trials` says otherwise.
const DEFAULT_VALIDATE_INSTANCES: usize = 20;

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(s) = &c.schemes {
        cfg.schemes = s.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn sweep(args: &SweepArgs, paths: bool) -> Result<()> {
    let cfg = load(&args.common)?;
    let spec = if paths {
        SweepSpec::paths(&cfg)?
    } else {
        SweepSpec::power(&cfg)?
    };
    let workers = if args.workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        args.workers
    };
    let res = run_sweep(&spec, workers)?;
    res.write_csv(output(&args.common.out)?)?;
    if let Some(p) = &args.trials_out {
        res.write_trials_csv(&spec.schemes, create(p)?)?;
    }
    let failures = res.total_failures();
    if failures > 0 {
        eprintln!("warning: {failures} scheme evaluations failed and were excluded");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::SweepPower(a) => sweep(&a, false)?,
        Command::SweepPaths(a) => sweep(&a, true)?,
        Command::Convergence(c) => {
            let cfg = load(&c)?;
            let schemes: Vec<Scheme> = if c.schemes.is_some() {
                cfg.parsed_schemes()?
            } else {
                Vec::new()
            };
            let report = run_convergence_trace(&cfg, &schemes)?;
            for t in &report.traces {
                eprintln!(
                    "{}: {} iterations, converged: {}",
                    t.scheme,
                    t.objective.len().saturating_sub(1),
                    t.converged
                );
            }
            report.write_csv(output(&c.out)?)?;
        }
        Command::Validate(c) => {
            let cfg = load(&c)?;
            let instances = c.trials.unwrap_or(DEFAULT_VALIDATE_INSTANCES);
            let report = run_validate(&cfg, instances)?;
            let mut out = output(&c.out)?;
            match &report.failure {
                None => writeln!(
                    out,
                    "ok: {} checks on {} instances",
                    report.checks_run, report.instances
                )?,
                Some(f) => {
                    writeln!(out, "FAILED: {f}")?;
                    out.flush()?;
                    return Ok(ExitCode::FAILURE);
                }
            }
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
