use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gazerun_core::engine::{parse_trace, AttentionMode};
use gazerun_core::SimConfig;
use gazerun_sim::runner::{digest_mismatches, parse_digests, summary_line, write_outputs};
use gazerun_sim::{GazePolicy, RunSpec, DEFAULT_SIGMA};

#[derive(Parser)]
#[command(name = "gazerun-sim", version, about = "Run headless gaze-runner sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play sessions with a synthetic or recorded player.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Perfect,
    Jitter,
    Blind,
    Trace,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tracked,
    Auto,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "perfect")]
    policy: PolicyArg,
    /// Gaze noise for the jitter policy, in screen units.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    /// Input trace CSV for the trace policy.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    sessions: u32,
    /// Overrides the config seed. Session n uses seed + n - 1.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// digest.txt from an earlier run; exits with status 2 on any mismatch.
    #[arg(long)]
    replay: Option<PathBuf>,
}

fn build_spec(args: &RunArgs) -> Result<RunSpec> {
    let mut config = match &args.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = args.mode {
        config.attention_mode = match mode {
            ModeArg::Tracked => AttentionMode::Tracked,
            ModeArg::Auto => AttentionMode::AutoNoticed,
        };
    }
    let policy = match args.policy {
        PolicyArg::Perfect => GazePolicy::Perfect,
        PolicyArg::Jitter => {
            anyhow::ensure!(args.sigma.is_finite() && args.sigma >= 0.0, "sigma must be a non-negative number");
            GazePolicy::jittered_perfect(args.sigma)
        }
        PolicyArg::Blind => GazePolicy::blind(),
        PolicyArg::Trace => {
            let path = args.trace.as_ref().context("--policy trace needs --trace <file>")?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            GazePolicy::Scripted(parse_trace(&text)?)
        }
    };
    Ok(RunSpec {
        config,
        policy,
        sessions: args.sessions,
    })
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let spec = build_spec(&args)?;
    let expected = match &args.replay {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(parse_digests(&text)?)
        }
        None => None,
    };
    let played = spec.run()?;
    let report = write_outputs(&args.out, &spec, &played)?;
    println!("{}", summary_line(spec.policy.name(), &report));
    if let Some(expected) = expected {
        let bad = digest_mismatches(&expected, &played);
        if !bad.is_empty() {
            for line in &bad {
                eprintln!("digest mismatch: {line}");
            }
            return Ok(ExitCode::from(2));
        }
        println!("replay ok: {} session digests match", played.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
