//! `coevo` command-line runner.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use coevo::managers::{load_checkpoint, CheckpointState, PairId};
use coevo::maze::{run_episode, DEFAULT_HORIZON};
use coevo::runtime::config::ExperimentConfig;
use coevo::runtime::experiment::{resume_experiment, run_experiment};
use coevo::runtime::replay::{render_comparison, render_summary, replay, rows_csv};
use coevo::runtime::seed::Seed;
use coevo::{Error, Level, PolicyParams};

#[derive(Parser)]
#[command(name = "coevo", version, about = "Open-ended coevolution of agents and gridworld mazes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config.
    Run(RunArgs),
    /// Roll out an agent from a checkpoint on a level; prints one JSON episode result per line.
    Evaluate(EvaluateArgs),
    /// Print a level file, or every level in a checkpoint's archive.
    Render(RenderArgs),
    /// Summarize a run log.
    Replay(ReplayArgs),
    /// Compare two run logs side by side.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Continue from this checkpoint instead of starting over.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker count; overrides `workers` in the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    Antagonist,
    Protagonist,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Checkpoint (or final.json) holding the agent.
    #[arg(long)]
    agent: PathBuf,
    #[arg(long)]
    level: PathBuf,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    /// Archive pair to take the agent from; defaults to the first pair.
    #[arg(long)]
    pair: Option<u64>,
    /// Which paired-checkpoint agent to use.
    #[arg(long, value_enum, default_value = "protagonist")]
    role: Role,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RenderArgs {
    #[arg(long)]
    level: Option<PathBuf>,
    #[arg(long)]
    archive: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    log: PathBuf,
    /// Write per-loop rows as CSV to this file, or `-` for stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the summary as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Exactly two logs.
    #[arg(long, num_args = 1, required = true)]
    log: Vec<PathBuf>,
}

fn read_text(path: &Path) -> coevo::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn cmd_run(args: RunArgs) -> coevo::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory: set output_dir or pass --out".into()))?;
    let outcome = match &args.resume {
        Some(ckpt) => resume_experiment(&cfg, ckpt, &out)?,
        None => run_experiment(&cfg, &out)?,
    };
    println!(
        "{}",
        json!({
            "log": outcome.log_path,
            "final": outcome.final_path,
            "loops": outcome.loops,
            "records": outcome.records,
        })
    );
    Ok(())
}

fn pick_agent(state: &CheckpointState, pair: Option<u64>, role: Role) -> coevo::Result<PolicyParams> {
    match state {
        CheckpointState::Poet(s) => {
            let found = match pair {
                Some(id) => s.archive.iter().find(|p| p.id == PairId(id)),
                None => s.archive.first(),
            };
            found
                .map(|p| p.agent.clone())
                .ok_or_else(|| Error::Config(format!("no pair {} in the archive", pair.map_or("at all".into(), |i| i.to_string()))))
        }
        CheckpointState::Paired(s) => {
            if pair.is_some() {
                return Err(Error::Config("--pair applies to archive checkpoints only".into()));
            }
            Ok(match role {
                Role::Antagonist => s.antagonist.clone(),
                Role::Protagonist => s.protagonist.clone(),
            })
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> coevo::Result<()> {
    if args.episodes == 0 {
        return Err(Error::Config("--episodes must be at least 1".into()));
    }
    let ckpt = load_checkpoint(&args.agent, None)?;
    let agent = pick_agent(&ckpt.state, args.pair, args.role)?;
    let level = Level::parse(&read_text(&args.level)?)?;
    let seed = Seed(args.seed);
    let mut stdout = std::io::stdout().lock();
    for e in 0..args.episodes {
        let result = run_episode(&level, &agent, args.horizon, seed.derive("episode", &[e as u64]).0)?;
        writeln!(stdout, "{}", serde_json::to_string(&result)?).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

fn cmd_render(args: RenderArgs) -> coevo::Result<()> {
    if let Some(path) = args.level {
        print!("{}", Level::parse_canvas(&read_text(&path)?)?.render());
        return Ok(());
    }
    let path = args.archive.expect("clap enforces one of --level/--archive");
    match load_checkpoint(&path, None)?.state {
        CheckpointState::Poet(s) => {
            for (i, pair) in s.archive.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                println!("pair {} (born loop {}, {} optimizer steps)", pair.id.0, pair.birth_loop, pair.steps_optimized);
                print!("{}", pair.genome.level().render());
            }
            Ok(())
        }
        CheckpointState::Paired(_) => Err(Error::Config("paired checkpoints hold no level archive".into())),
    }
}

fn cmd_replay(args: ReplayArgs) -> coevo::Result<()> {
    let summary = replay(&args.log)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print!("{}", render_summary(&summary));
    }
    match args.csv {
        Some(p) if p.as_os_str() == "-" => print!("{}", rows_csv(&summary.rows)),
        Some(p) => fs::write(&p, rows_csv(&summary.rows)).map_err(|e| Error::io(&p, e))?,
        None => {}
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> coevo::Result<()> {
    let [a, b] = args.log.as_slice() else {
        return Err(Error::Config(format!("compare needs exactly two --log arguments, got {}", args.log.len())));
    };
    let name = |p: &Path| p.display().to_string();
    print!("{}", render_comparison(&replay(a)?, &replay(b)?, (&name(a), &name(b))));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Render(a) => cmd_render(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.root().kind(), "message": e.to_string() } }));
            ExitCode::FAILURE
        }
    }
}
