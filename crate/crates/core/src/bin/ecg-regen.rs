use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};
use ecg_regen::runner::{self, FixtureSpec, Provider, RunConfig};
use ecg_regen::{Error, Result};

#[derive(Parser)]
#[command(name = "ecg-regen", version, about = "Retrieval-based ECG report generation and QA")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides paths.out_dir.
    #[arg(long)]
    out: Option<PathBuf>,

    /// LLM provider (none, mock, http); overrides llm.provider.
    #[arg(long)]
    provider: Option<Provider>,
}

#[derive(Subcommand)]
enum Command {
    /// Featurize the signal manifests into embedding files.
    Embed(Common),
    /// Build and save the vector index.
    Index(Common),
    /// Generate reports by retrieval and score them with the baselines.
    Generate(Common),
    /// Answer QA items with retrieved context and score exact match.
    Qa(Common),
    /// Render eval.json as a table.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic corpus with a ready-to-run config.json.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        classes: usize,
        #[arg(long, default_value_t = 25)]
        per_class: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.paths.out_dir = Some(absolute(out)?);
    }
    if let Some(p) = common.provider {
        cfg.llm.provider = p;
    }
    Ok(cfg)
}

fn with_log(cfg: &RunConfig, command: &str, f: impl FnOnce(&RunConfig) -> Result<()>) -> Result<()> {
    let started = SystemTime::now();
    let result = f(cfg);
    if let Ok(out) = cfg.out_dir() {
        if out.exists() {
            runner::log_run(&out, command, &cfg.hash(), started)?;
        }
    }
    result
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed(c) => with_log(&load(&c)?, "embed", |cfg| {
            let n = runner::cmd_embed(cfg)?;
            println!("embedded {n} records");
            Ok(())
        }),
        Command::Index(c) => with_log(&load(&c)?, "index", |cfg| {
            let index = runner::cmd_index(cfg)?;
            println!("indexed {} vectors ({:?})", ecg_regen::vindex::VectorIndex::len(&index), index.kind());
            Ok(())
        }),
        Command::Generate(c) => with_log(&load(&c)?, "generate", |cfg| {
            let report = runner::cmd_generate(cfg)?;
            print!("{}", runner::render_table(&report));
            Ok(())
        }),
        Command::Qa(c) => with_log(&load(&c)?, "qa", |cfg| {
            let report = runner::cmd_qa(cfg)?;
            print!("{}", runner::render_table(&report));
            Ok(())
        }),
        Command::Report { config, out } => {
            let dir = match (out, config) {
                (Some(out), _) => out,
                (None, Some(config)) => RunConfig::load(config)?.out_dir()?,
                (None, None) => return Err(Error::Config("report needs --out or --config".into())),
            };
            print!("{}", runner::cmd_report(&dir)?);
            Ok(())
        }
        Command::Synth { out, classes, per_class, seed } => {
            let spec = FixtureSpec { classes, per_class, seed, ..FixtureSpec::default() };
            let fixture = runner::synth_fixture(&spec)?;
            let config = runner::write_fixture(&fixture, &out, seed)?;
            println!("wrote {} records; config at {}", fixture.records.len(), config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
