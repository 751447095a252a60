use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use hcube_cli::{metadata, parse_config, run, CliResult, Command, Engine, ExperimentConfig, Overrides, Suite, SEED_ENV};

/// Exact counts, samplers, asymptotic windows and verification suites for
/// the hard-core model on the hypercube.
#[derive(Parser, Debug)]
#[command(name = "hcube", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Write the bivariate independent-set profile of Q_d (d <= 6).
    Profile,
    /// Exact min-side law, windows and Poisson comparison per lambda (d <= 5).
    ThresholdScan,
    /// Run a verification suite; exit status 1 if any check fails.
    Verify,
    /// Draw independent sets with the exact sampler or Glauber dynamics.
    Sample,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Cube dimension.
    #[arg(long, global = true)]
    d: Option<u32>,
    /// Fugacity, decimal or a/b; repeat for a grid.
    #[arg(long = "lambda", global = true)]
    lambdas: Vec<String>,
    /// RNG seed (default from HCUBE_SEED, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Verification suite.
    #[arg(long, global = true, value_enum)]
    suite: Option<Suite>,
    /// Sampling engine.
    #[arg(long, global = true, value_enum)]
    engine: Option<Engine>,
    /// Number of samples (sample, sampler suite) or random source sets
    /// (containers suite at d > 4).
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Glauber burn-in in single-site updates.
    #[arg(long = "burn-in", global = true)]
    burn_in: Option<u64>,
    /// Glauber updates between recorded samples.
    #[arg(long, global = true)]
    thin: Option<u64>,
    /// Window slack in the concentrated regime.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// File of key=value lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn execute(cli: Cli) -> CliResult<bool> {
    let command = match cli.command {
        Cmd::Profile => Command::Profile,
        Cmd::ThresholdScan => Command::ThresholdScan,
        Cmd::Verify => Command::Verify,
        Cmd::Sample => Command::Sample,
    };
    let file = match &cli.opts.config {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => Overrides::default(),
    };
    let o = cli.opts;
    let flags = Overrides {
        d: o.d,
        lambdas: o.lambdas,
        seed: o.seed,
        out: o.out,
        suite: o.suite,
        engine: o.engine,
        n: o.n,
        burn_in: o.burn_in,
        thin: o.thin,
        epsilon: o.epsilon,
        ..Default::default()
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = ExperimentConfig::merge(command, file, flags, env_seed.as_deref())?;
    eprintln!("config: {}", serde_json::to_string(&cfg).expect("config serializes"));
    let output = run(&cfg)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &output.primary)?;
            if let Some(summary) = &output.summary {
                let text = serde_json::to_string_pretty(summary).expect("summary serializes");
                std::fs::write(sidecar(path, ".summary.json"), text + "\n")?;
            }
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            let meta = serde_json::to_string_pretty(&metadata(&cfg, now)).expect("metadata serializes");
            std::fs::write(sidecar(path, ".meta.json"), meta + "\n")?;
            eprintln!("wrote {}", path.display());
        }
        None => match (&output.summary, cfg.command) {
            (Some(summary), Command::Sample) => println!("{}", serde_json::to_string_pretty(summary).unwrap()),
            _ => print!("{}", output.primary),
        },
    }
    if let (Some(summary), Command::Verify) = (&output.summary, cfg.command) {
        eprintln!("{summary}");
    }
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
