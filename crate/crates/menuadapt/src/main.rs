use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use menuadapt::commands::{self, to_json, BenchOptions, Inputs};
use menuadapt::config::{parse_styles, ConfigFile};
use menuadapt::core::{PolicyConfig, PolicyName, StyleConfig, TopN};
use menuadapt::{write_atomic, CliError, RunClock, STYLESHEET};

#[derive(Parser)]
#[command(name = "menuadapt", version, about = "Self-adapting menus for HTML documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Adapt a document's menus from an interaction log.
    Adapt(AdaptArgs),
    /// Replay a log event by event and report how the ranking evolves.
    Replay(ReplayArgs),
    /// Run all 24 policy and style combinations.
    Matrix(MatrixArgs),
    /// Time the pipeline on a synthetic menu.
    Bench(BenchArgs),
    /// Print the stylesheet for the marker classes.
    Stylesheet,
}

#[derive(Args)]
struct Source {
    /// HTML document.
    #[arg(long)]
    html: PathBuf,
    /// JSON config with the menu selectors.
    #[arg(long)]
    selectors: PathBuf,
    /// Interaction log, store envelope or JSON Lines. Defaults to the
    /// config's store, if any.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Path of the page the document is served at.
    #[arg(long)]
    page: Option<String>,
    /// Freeze the clock at this epoch time in milliseconds.
    #[arg(long)]
    now: Option<u64>,
}

#[derive(Args)]
struct StyleArgs {
    /// Number of adapted elements, or `size` for the size function.
    #[arg(long = "top-n")]
    top_n: Option<String>,
    /// Items kept visible per group when folding.
    #[arg(long = "min-visible")]
    min_visible: Option<u32>,
}

#[derive(Args)]
struct AdaptArgs {
    #[command(flatten)]
    source: Source,
    /// click-frequency, visit-duration, visit-frequency, visit-recency,
    /// serial-position or access-rank.
    #[arg(long)]
    policy: Option<String>,
    /// Style, or several joined by `+`.
    #[arg(long)]
    style: Option<String>,
    #[command(flatten)]
    style_args: StyleArgs,
    /// Adapted HTML. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    source: Source,
    /// click-frequency, visit-duration, visit-frequency, visit-recency,
    /// serial-position or access-rank.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long = "snapshot-every")]
    snapshot_every: usize,
    /// Defaults to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    style_args: StyleArgs,
    /// Defaults to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 50)]
    groups: usize,
    #[arg(long, default_value_t = 10)]
    items: usize,
    #[arg(long, default_value_t = 5000)]
    events: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    style: Option<String>,
    #[command(flatten)]
    style_args: StyleArgs,
    /// Defaults to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn policy_config(flag: Option<&str>, config: Option<&ConfigFile>) -> Result<PolicyConfig, CliError> {
    match flag {
        Some(name) => {
            let name: PolicyName = name.parse().map_err(|e: menuadapt::core::policy::PolicyError| CliError::Config(e.to_string()))?;
            // Keep tuned parameters from the config file.
            let base = config.and_then(|c| c.policy).unwrap_or_default();
            Ok(PolicyConfig { policy_name: name, ..base })
        }
        None => Ok(config.and_then(|c| c.policy).unwrap_or_default()),
    }
}

fn style_config(flag: Option<&str>, args: &StyleArgs, config: Option<&ConfigFile>) -> Result<StyleConfig, CliError> {
    let mut style = config.and_then(|c| c.style.clone()).unwrap_or_default();
    if let Some(s) = flag {
        style.styles = parse_styles(s)?;
    }
    if let Some(n) = &args.top_n {
        style.top_n = n.parse::<TopN>().map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(k) = args.min_visible {
        style.min_visible_on_fold = k;
    }
    style.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(style)
}

fn load(source: &Source) -> Result<(ConfigFile, Inputs), CliError> {
    let config = ConfigFile::load(&source.selectors)?;
    let inputs = Inputs::load(&source.html, &config, source.log.as_deref(), source.page.as_deref())?;
    Ok((config, inputs))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Adapt(a) => {
            let (config, inputs) = load(&a.source)?;
            let policy = policy_config(a.policy.as_deref(), Some(&config))?;
            let style = style_config(a.style.as_deref(), &a.style_args, Some(&config))?;
            let out = commands::adapt(&inputs, &policy, &style, RunClock::new(a.source.now))?;
            // Nothing is written until the whole run has succeeded.
            let report = to_json(&out.report);
            if let Some(path) = &a.report {
                write_file(path, &report)?;
            }
            emit(a.out.as_deref(), &out.html)
        }
        Command::Replay(r) => {
            let (config, inputs) = load(&r.source)?;
            let policy = policy_config(r.policy.as_deref(), Some(&config))?;
            let report = commands::replay(&inputs, &policy, r.snapshot_every, r.source.now)?;
            emit(r.report.as_deref(), &to_json(&report))
        }
        Command::Matrix(m) => {
            let (config, inputs) = load(&m.source)?;
            let style = style_config(None, &m.style_args, Some(&config))?;
            let report = commands::matrix(&inputs, &style, m.source.now)?;
            emit(m.report.as_deref(), &to_json(&report))?;
            if report.successes < report.total {
                return Err(CliError::Data(format!("{}/{} combinations succeeded", report.successes, report.total)));
            }
            Ok(())
        }
        Command::Bench(b) => {
            let style = style_config(b.style.as_deref(), &b.style_args, None)?;
            let opts = BenchOptions { groups: b.groups, items: b.items, events: b.events, reps: b.reps, seed: b.seed, style };
            let report = commands::bench(&opts)?;
            emit(b.report.as_deref(), &to_json(&report))
        }
        Command::Stylesheet => emit(None, STYLESHEET),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("menuadapt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
