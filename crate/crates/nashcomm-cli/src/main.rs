//! Command-line surface: sweep runner, instance generator, regret
//! evaluator, and transcript replayer.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nashcomm::engine::run_protocol;
use nashcomm::game::regret_report;
use nashcomm::generators::{
    column_indicator, identity_indicator_game, random_game, SubsetMatrix,
};
use nashcomm::harness::{
    instance_seed, load_game, load_profile, load_run_record, player_seeds, records_to_csv,
    records_to_json, run_sweep, save_game, save_run_record, summarize, summary_table,
    FamilySpec, OutputFormat, RunRecord, SweepConfig,
};
use nashcomm::protocols::{lookup, natural_policy};

#[derive(Parser)]
#[command(
    name = "nashcomm",
    about = "Communication-bounded protocols for approximate Nash equilibria of bimatrix games",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol x family sweep and report achieved epsilons and exact
    /// bit counts. Exits nonzero if any run errors or breaks its protocol's
    /// declared guarantee.
    Run(RunArgs),
    /// Emit a generator instance to a game file (or a matrix file for the
    /// rectangular `mn` family).
    Gen(GenArgs),
    /// Evaluate the regret report of a game file plus a profile file.
    Eval(EvalArgs),
    /// Re-execute a recorded run and verify its transcript bit-for-bit.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Sweep configuration file (JSON). Overrides the individual flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Protocol identifiers (repeatable). Default: all registered.
    #[arg(long = "protocol")]
    protocols: Vec<String>,
    /// Family names (repeatable): random, mn, indicator, wsne-oneway,
    /// padded-mn. Default: random.
    #[arg(long = "family")]
    families: Vec<String>,
    /// Strategy counts (repeatable). Default: 8.
    #[arg(long = "n")]
    n_values: Vec<usize>,
    /// Base seed; per-instance seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances per (family, n) cell.
    #[arg(long, default_value_t = 10)]
    runs: u32,
    /// Sampling slack of the polylog protocols.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Override the case threshold alpha (default: per-protocol constant).
    #[arg(long)]
    alpha: Option<f64>,
    /// Resampling attempts before a run is abandoned.
    #[arg(long, default_value_t = 100)]
    resample_cap: u32,
    /// Write records to this file (default: stdout, or the config file's
    /// `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record format: csv or json (default: csv, or the config file's
    /// `format`).
    #[arg(long)]
    format: Option<String>,
    /// Also write one replayable run-record JSON per instance to this
    /// directory.
    #[arg(long)]
    records_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Family name: random, mn, indicator, wsne-oneway, padded-mn.
    #[arg(long)]
    family: String,
    /// Strategy count.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Indicator column (indicator / wsne-oneway pairing); defaults to a
    /// seed-derived column.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Game file (JSON with n, R, C).
    #[arg(long)]
    game: PathBuf,
    /// Profile file (JSON with row and col weight vectors).
    #[arg(long)]
    profile: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    /// Run-record file produced by `run --records-dir`.
    record: PathBuf,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Gen(args) => cmd_gen(args).map(|()| ExitCode::SUCCESS),
        Command::Eval(args) => cmd_eval(args).map(|()| ExitCode::SUCCESS),
        Command::Replay(args) => cmd_replay(args),
    }
}

fn build_config(args: &RunArgs) -> Result<SweepConfig> {
    if let Some(path) = &args.config {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let config: SweepConfig = serde_json::from_str(&body)
            .with_context(|| format!("parsing {}", path.display()))?;
        return Ok(config);
    }
    let protocols = if args.protocols.is_empty() {
        nashcomm::protocols::registry()
            .iter()
            .map(|p| p.id().to_string())
            .collect()
    } else {
        args.protocols.clone()
    };
    let families = if args.families.is_empty() {
        vec![FamilySpec::Random]
    } else {
        args.families
            .iter()
            .map(|f| FamilySpec::parse(f))
            .collect::<Result<Vec<_>, _>>()?
    };
    let n_values = if args.n_values.is_empty() {
        vec![8]
    } else {
        args.n_values.clone()
    };
    Ok(SweepConfig {
        protocols,
        families,
        n_values,
        base_seed: args.seed,
        runs: args.runs,
        delta: args.delta,
        alpha: args.alpha,
        resample_cap: args.resample_cap,
        out: None,
        format: None,
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let config = build_config(&args)?;
    let format = match &args.format {
        Some(f) => OutputFormat::parse(f)?,
        None => config.format.unwrap_or(OutputFormat::Csv),
    };
    let out = args.out.clone().or_else(|| config.out.clone());
    let records = run_sweep(&config)?;

    if let Some(dir) = &args.records_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        write_run_records(&config, dir)?;
    }

    let body = match format {
        OutputFormat::Csv => records_to_csv(&records),
        OutputFormat::Json => records_to_json(&records),
    };
    match &out {
        Some(path) => std::fs::write(path, body)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }

    let summaries = summarize(&records, &config);
    eprint!("{}", summary_table(&summaries));

    let violations: usize = summaries.iter().map(|s| s.violations).sum();
    let errors: usize = summaries.iter().map(|s| s.errors).sum();
    if violations + errors > 0 {
        eprintln!("{violations} guarantee violation(s), {errors} error(s)");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

/// Re-runs every sweep instance and stores a self-contained replayable
/// record for it.
fn write_run_records(config: &SweepConfig, dir: &std::path::Path) -> Result<()> {
    for protocol_id in &config.protocols {
        let protocol = lookup(protocol_id).context("protocol disappeared from registry")?;
        let policy = natural_policy(protocol);
        let params = config.params_for(protocol_id);
        for &family in &config.families {
            for &n in &config.n_values {
                for rep in 0..config.runs {
                    let seed = instance_seed(config.base_seed, family, n, rep);
                    let Some(game) = family.instantiate(n, seed)? else {
                        continue;
                    };
                    let seeds = player_seeds(seed);
                    let Ok(outcome) = run_protocol(&game, protocol, &policy, seeds, &params)
                    else {
                        continue;
                    };
                    let record = RunRecord::from_run(
                        protocol_id.clone(),
                        policy,
                        params,
                        seeds,
                        game,
                        outcome,
                    );
                    let name = format!("{protocol_id}-{}-n{n}-s{seed}.json", family.id());
                    save_run_record(&record, &dir.join(name))?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let n = args.n;
    if n == 0 {
        bail!("n must be at least 1");
    }
    let column = |n: usize| args.ell.unwrap_or((args.seed % n as u64) as usize);
    match args.family.as_str() {
        "random" => save_game(&random_game(n, args.seed), &args.out)?,
        "indicator" => {
            let game = nashcomm::game::BimatrixGame::new(
                nashcomm::game::Matrix::identity(n),
                column_indicator(n, column(n))?,
            )?;
            save_game(&game, &args.out)?;
        }
        "wsne-oneway" => {
            let game = identity_indicator_game(2, column(2))?;
            save_game(&game, &args.out)?;
        }
        "padded-mn" => {
            let game = FamilySpec::PaddedMn
                .instantiate(n, args.seed)?
                .context("padded-mn needs n >= 4")?;
            save_game(&game, &args.out)?;
        }
        // The subset matrix is rectangular for n > 3, so it gets a matrix
        // file instead of a game file.
        "mn" => {
            let gadget = SubsetMatrix::new(n)?;
            let body = serde_json::json!({
                "n": gadget.n(),
                "ones_per_row": gadget.ones_per_row(),
                "rows": gadget.row_count(),
                "M": gadget.matrix().to_rows(),
            });
            std::fs::write(&args.out, serde_json::to_string_pretty(&body)?)
                .with_context(|| format!("writing {}", args.out.display()))?;
        }
        other => bail!("unknown family `{other}`"),
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let profile = load_profile(&args.profile)?;
    let report = regret_report(&game, &profile)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<ExitCode> {
    let record = load_run_record(&args.record)?;
    if record.replay()? {
        println!("replay ok: transcript is bit-identical");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("replay mismatch: transcript differs");
        Ok(ExitCode::FAILURE)
    }
}
