//! Batch command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::charts::emit_charts;
use crate::delegation::ManagerAgent;
use crate::experiments::{aggregate_records, build_grid_suite, improvement_summary, run_sweep, RunConfig};
use crate::gridworld::Board;
use crate::io::{
    load_config, load_grid, load_manager, load_nav_agent, parse_results_csv, read_text, render_aggregates_csv,
    save_config, save_grid, save_manager, save_nav_agent, write_results_csv, write_text, EpisodeTrace, Provenance,
    ResultsTable,
};
use crate::nav::{AgentKind, Mode, NavAgent};
use crate::rng::derive_rng;
use crate::simulation::{evaluate_solo, evaluate_team, train_manager, train_nav_agent, EpisodeConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ibl-delegate", version, about = "Gridworld delegation simulator and experiment harness")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run-config file; replaces the profile defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Parameter profile.
    #[arg(long, global = true, value_parser = ["desk", "paper"])]
    pub profile: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the grid suite with every error level.
    GenGrids,
    /// Train one navigating agent on an error-free grid.
    TrainNav(TrainNavArgs),
    /// Train an IBL manager over a team of saved agents.
    TrainManager(TrainManagerArgs),
    /// Evaluate a solo agent or a team with frozen policies.
    Evaluate(EvaluateArgs),
    /// Run the full experiment sweep and write results, summary and charts.
    Sweep,
    /// Rebuild aggregates, summary and charts from a results CSV.
    Report(ReportArgs),
    /// Print an ASCII animation of a saved episode trace.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct TrainNavArgs {
    #[arg(long, value_name = "PATH")]
    pub grid: PathBuf,
    #[arg(long, value_name = "q|ibl")]
    pub kind: AgentKind,
    /// 1-based team slot the agent will occupy.
    #[arg(long, default_value_t = 1)]
    pub slot: usize,
    /// Overrides the configured episode count.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Snapshot path (default `<out>/nav_<kind>_<slot>.json`).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TeamArgs {
    #[arg(long, value_name = "PATH")]
    pub grid: PathBuf,
    /// Agent snapshots in slot order.
    #[arg(long = "agent", value_name = "PATH", required = true)]
    pub agents: Vec<PathBuf>,
    /// Error probabilities in slot order; defaults to the snapshot values.
    #[arg(long = "error-prob", value_name = "P")]
    pub error_probs: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TrainManagerArgs {
    #[command(flatten)]
    pub team: TeamArgs,
    #[arg(long)]
    pub games: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub team: TeamArgs,
    /// Manager snapshot; without it a single agent plays solo.
    #[arg(long, value_name = "PATH", conflicts_with = "random_manager")]
    pub manager: Option<PathBuf>,
    #[arg(long)]
    pub random_manager: bool,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Write the first evaluation episode as a trace file.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "PATH")]
    pub results: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub trace: PathBuf,
    /// Pause between frames.
    #[arg(long, default_value_t = 0)]
    pub delay_ms: u64,
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn resolve_config(g: &GlobalArgs) -> CliResult<RunConfig> {
    let mut cfg = match (&g.config, &g.profile) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--profile cannot be combined with --config".into())),
        (Some(path), None) => load_config(&read_text(path)?).with_context(|| format!("loading {}", path.display()))?,
        (None, profile) => RunConfig::profile(profile.as_deref().unwrap_or("desk")).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    if let Some(seed) = g.seed {
        cfg.sweep.master_seed = seed;
    }
    if let Some(w) = g.workers {
        cfg.workers = w as usize;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

impl From<crate::io::IoError> for CliError {
    fn from(e: crate::io::IoError) -> Self {
        CliError::Runtime(e.into())
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve_config(&cli.global)?;
    let out = PathBuf::from(&cfg.out_dir);
    match cli.command {
        Command::GenGrids => gen_grids(&cfg, &out),
        Command::TrainNav(a) => train_nav(&cfg, &out, a),
        Command::TrainManager(a) => train_manager_cmd(&cfg, &out, a),
        Command::Evaluate(a) => evaluate(&cfg, a),
        Command::Sweep => sweep(&cfg, &out),
        Command::Report(a) => report(&out, a),
        Command::Replay(a) => replay(a),
    }
}

fn gen_grids(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let suite = build_grid_suite(&cfg.sweep, cfg.team_size()).map_err(anyhow::Error::from)?;
    let dir = out.join("grids");
    let mut manifest = Vec::new();
    for e in &suite.entries {
        write_text(&dir.join(format!("grid_{}_base.json", e.grid_id)), &save_grid(&e.base.grid))?;
        for v in &e.variants {
            let name = format!("grid_{}_level_{}.json", e.grid_id, v.level);
            write_text(&dir.join(&name), &save_grid(&v.board.grid))?;
            manifest.push(serde_json::json!({
                "grid_id": e.grid_id, "level": v.level, "file": name, "error_ratio": v.error_ratio(),
            }));
        }
    }
    let doc = serde_json::json!({
        "format_version": crate::experiments::FORMAT_VERSION,
        "master_seed": cfg.sweep.master_seed,
        "profile": cfg.profile,
        "grids": manifest,
        "warnings": suite.warnings,
    });
    write_text(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
    println!("wrote {} grids to {}", suite.entries.len(), dir.display());
    Ok(())
}

fn load_board(path: &Path) -> CliResult<Board> {
    let grid = load_grid(&read_text(path)?).with_context(|| format!("loading grid {}", path.display()))?;
    Ok(Board::new(grid))
}

fn train_nav(cfg: &RunConfig, out: &Path, a: TrainNavArgs) -> CliResult<()> {
    if a.slot == 0 {
        return Err(CliError::Usage("--slot must be >= 1".into()));
    }
    let board = load_board(&a.grid)?;
    let mut agent = match a.kind {
        AgentKind::Q => NavAgent::q_learner(a.slot, cfg.q),
        AgentKind::Ibl => NavAgent::ibl_learner(a.slot, cfg.ibl),
    };
    let episodes = a.episodes.unwrap_or(cfg.sweep.nav_episodes);
    let mut rng = derive_rng(cfg.sweep.master_seed, &format!("cli/train-nav/{}/{}", a.kind.label(), a.slot));
    train_nav_agent(&board, &mut agent, episodes, &EpisodeConfig::new(cfg.sweep.l_max, Mode::Train), &mut rng);
    let path = a.output.unwrap_or_else(|| out.join(format!("nav_{}_{}.json", a.kind.label(), a.slot)));
    write_text(&path, &save_nav_agent(&agent))?;
    println!("trained {} agent for {episodes} episodes; snapshot {}", a.kind.label(), path.display());
    Ok(())
}

fn load_team(t: &TeamArgs) -> CliResult<(Board, Vec<NavAgent>)> {
    let board = load_board(&t.grid)?;
    if !t.error_probs.is_empty() && t.error_probs.len() != t.agents.len() {
        return Err(CliError::Usage(format!(
            "--error-prob given {} times but --agent given {} times",
            t.error_probs.len(),
            t.agents.len()
        )));
    }
    if let Some(p) = t.error_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Usage(format!("--error-prob {p} outside [0,1]")));
    }
    let mut team = Vec::new();
    for (i, path) in t.agents.iter().enumerate() {
        let mut agent = load_nav_agent(&read_text(path)?).with_context(|| format!("loading {}", path.display()))?;
        agent.id = i + 1;
        if let Some(p) = t.error_probs.get(i) {
            agent.error_prob = *p;
        }
        team.push(agent);
    }
    Ok((board, team))
}

fn train_manager_cmd(cfg: &RunConfig, out: &Path, a: TrainManagerArgs) -> CliResult<()> {
    let (board, team) = load_team(&a.team)?;
    let games = a.games.unwrap_or(cfg.sweep.manager_games);
    let mut mgr = ManagerAgent::ibl(team.len(), cfg.ibl);
    let mut rng = derive_rng(cfg.sweep.master_seed, "cli/train-manager");
    train_manager(&board, &team, &mut mgr, games, &EpisodeConfig::new(cfg.sweep.l_max, Mode::Train), &mut rng);
    mgr.reset_log();
    let path = a.output.unwrap_or_else(|| out.join("manager.json"));
    write_text(&path, &save_manager(&mgr))?;
    println!("trained manager for {games} games; snapshot {}", path.display());
    Ok(())
}

fn evaluate(cfg: &RunConfig, a: EvaluateArgs) -> CliResult<()> {
    let (board, team) = load_team(&a.team)?;
    let episodes = a.episodes.unwrap_or(cfg.sweep.eval_episodes);
    let ecfg = EpisodeConfig::new(cfg.sweep.l_max, Mode::Frozen);
    let mut rng = derive_rng(cfg.sweep.master_seed, "cli/evaluate");
    let mut manager = match (&a.manager, a.random_manager) {
        (Some(path), _) => {
            let m = load_manager(&read_text(path)?).with_context(|| format!("loading {}", path.display()))?;
            if m.team_size != team.len() {
                return Err(CliError::Usage(format!(
                    "--manager was trained for {} agents but --agent given {} times",
                    m.team_size,
                    team.len()
                )));
            }
            Some(m)
        }
        (None, true) => Some(ManagerAgent::random(team.len())),
        (None, false) if team.len() == 1 => None,
        (None, false) => return Err(CliError::Usage("several --agent values need --manager or --random-manager".into())),
    };
    let results = match &mut manager {
        Some(m) => evaluate_team(&board, &team, m, episodes, &ecfg, &mut rng),
        None => evaluate_solo(&board, &team[0], episodes, &ecfg, &mut rng),
    };
    let (mean, var, success) = crate::experiments::length_stats(&results);
    println!("episodes {episodes}");
    println!("mean_length {}", crate::io::format_sig6(mean));
    println!("length_variance {}", crate::io::format_sig6(var));
    println!("success_rate {}", crate::io::format_sig6(success));
    if let Some(m) = &manager {
        for (bucket, agent, _) in m.selection_log.iter() {
            let f = m.selection_log.frequency(bucket, agent).unwrap();
            println!("selection {bucket} agent {agent} {}", crate::io::format_sig6(f));
        }
    }
    if let (Some(path), Some(first)) = (&a.trace, results.first()) {
        write_text(path, &EpisodeTrace::from_episode(&board, first).render())?;
        println!("trace {}", path.display());
    }
    Ok(())
}

fn write_report(out: &Path, table: &ResultsTable) -> CliResult<()> {
    if table.rows.is_empty() {
        return Err(CliError::Runtime(anyhow!("no result rows to report")));
    }
    let aggregates = aggregate_records(&table.rows).map_err(anyhow::Error::from)?;
    let summary = improvement_summary(&aggregates);
    write_text(&out.join("aggregates.csv"), &render_aggregates_csv(&aggregates, table.team_size, &table.provenance))?;
    let doc = serde_json::json!({
        "format_version": crate::experiments::FORMAT_VERSION,
        "master_seed": table.provenance.master_seed,
        "profile": table.provenance.profile,
        "improvement": summary,
    });
    write_text(&out.join("summary.json"), &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
    emit_charts(&out.join("charts"), &aggregates, table.team_size, &table.provenance)?;
    Ok(())
}

fn sweep(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = run_sweep(cfg).map_err(anyhow::Error::from)?;
    let provenance = Provenance::new(cfg.sweep.master_seed, &cfg.profile);
    let table = ResultsTable { provenance, team_size: cfg.team_size(), rows: result.records };
    write_results_csv(&out.join("results.csv"), &table)?;
    // the worker count does not affect results and the config sits in the
    // output directory, so both are normalized to keep output directories
    // byte-comparable
    let saved = RunConfig { workers: 1, out_dir: ".".into(), ..cfg.clone() };
    write_text(&out.join("config.json"), &save_config(&saved))?;
    let ratios: Vec<_> = result
        .error_ratios
        .iter()
        .map(|((g, l), r)| serde_json::json!({"grid_id": g, "level": l, "error_ratio": r}))
        .collect();
    let doc = serde_json::json!({"warnings": result.warnings, "error_ratios": ratios});
    write_text(&out.join("suite.json"), &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
    write_report(out, &table)?;
    println!("wrote {} rows to {}", table.rows.len(), out.join("results.csv").display());
    Ok(())
}

fn report(out: &Path, a: ReportArgs) -> CliResult<()> {
    let table = parse_results_csv(&read_text(&a.results)?).with_context(|| format!("reading {}", a.results.display()))?;
    write_report(out, &table)?;
    println!("report written to {}", out.display());
    Ok(())
}

fn replay(a: ReplayArgs) -> CliResult<()> {
    let trace = EpisodeTrace::parse(&read_text(&a.trace)?).with_context(|| format!("reading {}", a.trace.display()))?;
    let frames = trace.replay_frames()?;
    let total = frames.len();
    for (i, frame) in frames.iter().enumerate() {
        let step = if i == 0 {
            "start".to_string()
        } else {
            let s = &trace.steps[i - 1];
            let who = s.agent.map_or_else(|| "solo".to_string(), |a| format!("agent {a}"));
            let err = if s.error_injected { " (error)" } else { "" };
            format!("tick {} {who} {}{err}", s.tick, s.action)
        };
        println!("frame {}/{total}: {step}", i + 1);
        print!("{frame}");
        println!();
        if a.delay_ms > 0 {
            std::thread::sleep(std::time::Duration::from_millis(a.delay_ms));
        }
    }
    println!("{}", if trace.success { "reached goal" } else { "did not reach goal" });
    Ok(())
}
