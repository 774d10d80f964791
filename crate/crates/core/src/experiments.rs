//! Sweep harness: grid suites, the scenario matrix over error-density
//! levels, and aggregation of game lengths and manager preferences.
//!
//! Every stochastic piece draws from a stream derived from the master seed
//! and a textual key naming the grid, level, scenario, condition and
//! replication, so results do not depend on the worker count or on the
//! order in which cells finish.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delegation::{ManagerAgent, SelectionLog, PLAIN_BUCKET};
use crate::gridworld::{add_error_states, generate_grid, Board, ErrorTag, GridError, Position};
use crate::ibl::IblParams;
use crate::nav::{AgentKind, Mode, NavAgent, QParams};
use crate::rng::{derive_rng, derive_seed};
use crate::simulation::{evaluate_solo, evaluate_team, train_manager, train_nav_agent, EpisodeConfig, EpisodeResult};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("aggregation group is empty")]
    EmptyGroup,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("failed to build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeamSlot {
    pub kind: AgentKind,
    pub error_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub label: String,
    pub team: Vec<TeamSlot>,
}

impl ScenarioSpec {
    pub fn new(label: &str, team: &[(AgentKind, f64)]) -> Self {
        Self {
            label: label.to_string(),
            team: team.iter().map(|&(kind, error_prob)| TeamSlot { kind, error_prob }).collect(),
        }
    }

    /// A Q-learning agent (slot 1) teamed with an IBL agent (slot 2) under
    /// three error-probability profiles.
    pub fn standard_set() -> Vec<ScenarioSpec> {
        use AgentKind::{Ibl, Q};
        vec![
            ScenarioSpec::new("balanced", &[(Q, 0.25), (Ibl, 0.25)]),
            ScenarioSpec::new("imbalanced", &[(Q, 0.25), (Ibl, 0.75)]),
            ScenarioSpec::new("divergent", &[(Q, 1.0), (Ibl, 0.0)]),
        ]
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.team.is_empty() {
            return Err(ExperimentError::InvalidConfig(format!("scenario '{}' has no agents", self.label)));
        }
        if let Some(s) = self.team.iter().find(|s| !(0.0..=1.0).contains(&s.error_prob)) {
            return Err(ExperimentError::InvalidConfig(format!(
                "scenario '{}': error probability {} outside [0,1]",
                self.label, s.error_prob
            )));
        }
        if self.label.is_empty() || self.label.contains([',', '"', '\n']) {
            return Err(ExperimentError::InvalidConfig(format!("bad scenario label '{}'", self.label)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grids: usize,
    pub rows: usize,
    pub cols: usize,
    pub wall_ratio: f64,
    /// Error cells per tag at each level, strictly increasing.
    pub level_counts: Vec<usize>,
    pub nav_episodes: usize,
    pub manager_games: usize,
    pub eval_episodes: usize,
    pub l_max: usize,
    pub replications: usize,
    pub master_seed: u64,
}

impl SweepConfig {
    /// Scaled-down profile that runs in minutes.
    pub fn desk() -> Self {
        Self {
            grids: 3,
            rows: 6,
            cols: 8,
            wall_ratio: 0.4,
            level_counts: (1..=5).collect(),
            nav_episodes: 20_000,
            manager_games: 5_000,
            eval_episodes: 500,
            l_max: 150,
            replications: 1,
            master_seed: 42,
        }
    }

    /// Full-size profile: 25 grids of 10x15 at 60% walls, 2..14 error cells
    /// per type, 150,000 navigation episodes and 20,000 manager games.
    pub fn paper() -> Self {
        Self {
            grids: 25,
            rows: 10,
            cols: 15,
            wall_ratio: 0.6,
            level_counts: (2..=14).collect(),
            nav_episodes: 150_000,
            manager_games: 20_000,
            eval_episodes: 500,
            l_max: 150,
            replications: 1,
            master_seed: 42,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_string()));
        if self.grids == 0 {
            return bad("grids must be >= 1");
        }
        if self.rows < 2 || self.cols < 2 {
            return bad("grids must be at least 2x2");
        }
        if !(0.0..1.0).contains(&self.wall_ratio) {
            return bad("wall_ratio must lie in [0,1)");
        }
        if self.level_counts.is_empty() || self.level_counts.contains(&0) {
            return bad("level_counts must be non-empty and >= 1");
        }
        if self.level_counts.windows(2).any(|w| w[0] >= w[1]) {
            return bad("level_counts must be strictly increasing");
        }
        if self.eval_episodes == 0 || self.replications == 0 || self.l_max == 0 {
            return bad("eval_episodes, replications and l_max must be >= 1");
        }
        Ok(())
    }

    pub fn start(&self) -> Position {
        Position::new(0, 0)
    }

    pub fn goal(&self) -> Position {
        Position::new(self.rows - 1, self.cols - 1)
    }

    fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig::new(self.l_max, Mode::Train)
    }
}

/// Everything a sweep needs, as stored in a run-config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub profile: String,
    pub sweep: SweepConfig,
    pub ibl: IblParams,
    pub q: QParams,
    pub scenarios: Vec<ScenarioSpec>,
    pub out_dir: String,
    pub workers: usize,
}

impl RunConfig {
    pub fn profile(name: &str) -> Result<Self, ExperimentError> {
        let sweep = match name {
            "desk" => SweepConfig::desk(),
            "paper" => SweepConfig::paper(),
            other => {
                return Err(ExperimentError::InvalidConfig(format!(
                    "unknown profile '{other}' (expected desk or paper)"
                )))
            }
        };
        Ok(Self {
            format_version: FORMAT_VERSION,
            profile: name.to_string(),
            sweep,
            ibl: IblParams::standard(),
            q: QParams::standard(),
            scenarios: ScenarioSpec::standard_set(),
            out_dir: "results".to_string(),
            workers: 1,
        })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.sweep.validate()?;
        self.ibl.validate().map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        self.q.validate().map_err(ExperimentError::InvalidConfig)?;
        if self.scenarios.is_empty() {
            return Err(ExperimentError::InvalidConfig("no scenarios".into()));
        }
        let mut labels = BTreeSet::new();
        for s in &self.scenarios {
            s.validate()?;
            if !labels.insert(&s.label) {
                return Err(ExperimentError::InvalidConfig(format!("duplicate scenario '{}'", s.label)));
            }
        }
        if self.workers == 0 {
            return Err(ExperimentError::InvalidConfig("workers must be >= 1".into()));
        }
        Ok(())
    }

    pub fn team_size(&self) -> usize {
        self.scenarios.iter().map(|s| s.team.len()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    /// The agent in this 1-based slot playing alone.
    Solo(usize),
    RandomManager,
    IblManager,
}

impl Condition {
    pub fn label(&self) -> String {
        match self {
            Condition::Solo(i) => format!("solo-{i}"),
            Condition::RandomManager => "random-mgr".to_string(),
            Condition::IblManager => "ibl-mgr".to_string(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random-mgr" => Some(Condition::RandomManager),
            "ibl-mgr" => Some(Condition::IblManager),
            _ => s.strip_prefix("solo-")?.parse().ok().filter(|i| *i >= 1).map(Condition::Solo),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Selection frequency keyed by `(cell bucket, agent)`.
pub type SelectionFreq = BTreeMap<(String, usize), f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub grid_id: usize,
    pub level: usize,
    pub scenario: String,
    pub condition: Condition,
    pub mean_length: f64,
    pub length_variance: f64,
    pub success_rate: f64,
    #[serde(with = "freq_serde")]
    pub selection_freq: SelectionFreq,
}

impl LevelRecord {
    pub fn sort_key(&self) -> (usize, usize, &str, Condition) {
        (self.grid_id, self.level, self.scenario.as_str(), self.condition)
    }
}

mod freq_serde {
    use super::SelectionFreq;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &SelectionFreq, s: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<(&str, usize, f64)> = m.iter().map(|((b, a), f)| (b.as_str(), *a, *f)).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SelectionFreq, D::Error> {
        let flat: Vec<(String, usize, f64)> = Vec::deserialize(d)?;
        Ok(flat.into_iter().map(|(b, a, f)| ((b, a), f)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub scenario: String,
    pub level: usize,
    pub condition: Condition,
    pub grids: usize,
    pub mean: f64,
    /// Sample variance of the per-grid means (0 for a single grid).
    pub variance: f64,
    /// Per-grid selection frequencies averaged over grids that visited the bucket.
    #[serde(with = "freq_serde")]
    pub selection_freq: SelectionFreq,
}

/// A grid truncated before reaching every configured level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteWarning {
    pub grid_id: usize,
    pub level: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct GridVariant {
    pub level: usize,
    pub board: Board,
}

impl GridVariant {
    /// Error cells as a fraction of open, non-terminal cells.
    pub fn error_ratio(&self) -> f64 {
        let g = &self.board.grid;
        let open = g.open_cells().filter(|p| *p != g.start && *p != g.goal).count();
        if open == 0 {
            0.0
        } else {
            g.error_cells.len() as f64 / open as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub grid_id: usize,
    pub base: Board,
    pub variants: Vec<GridVariant>,
}

#[derive(Debug, Clone)]
pub struct GridSuite {
    pub entries: Vec<SuiteEntry>,
    pub warnings: Vec<SuiteWarning>,
}

/// Base grids plus one incrementally-nested error variant per level.
pub fn build_grid_suite(cfg: &SweepConfig, team_size: usize) -> Result<GridSuite, ExperimentError> {
    cfg.validate()?;
    let types = ErrorTag::universe(team_size.max(1));
    let mut entries = Vec::with_capacity(cfg.grids);
    let mut warnings = Vec::new();
    for grid_id in 0..cfg.grids {
        let seed = derive_seed(cfg.master_seed, &format!("grid={grid_id}"));
        let base = generate_grid(cfg.rows, cfg.cols, cfg.wall_ratio, cfg.start(), cfg.goal(), seed)?;
        let error_seed = derive_seed(cfg.master_seed, &format!("errors/grid={grid_id}"));
        let mut variants = Vec::new();
        for &level in &cfg.level_counts {
            match add_error_states(&base, level, &types, error_seed) {
                Ok(grid) => variants.push(GridVariant { level, board: Board::new(grid) }),
                Err(e @ GridError::InsufficientOpenCells { .. }) => {
                    log::warn!("grid {grid_id}: levels from {level} dropped: {e}");
                    warnings.push(SuiteWarning { grid_id, level, message: e.to_string() });
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        entries.push(SuiteEntry { grid_id, base: Board::new(base), variants });
    }
    Ok(GridSuite { entries, warnings })
}

/// Trained navigating agents keyed by `(grid, slot, kind)`.
pub type AgentPool = BTreeMap<(usize, usize, AgentKind), NavAgent>;

fn nav_key(cfg: &SweepConfig, grid_id: usize, slot: usize, kind: AgentKind) -> String {
    format!("nav/grid={grid_id}/slot={slot}/kind={}/seed={}", kind.label(), cfg.master_seed)
}

pub fn train_agent_for(run: &RunConfig, board: &Board, grid_id: usize, slot: usize, kind: AgentKind) -> NavAgent {
    let mut agent = match kind {
        AgentKind::Q => NavAgent::q_learner(slot, run.q),
        AgentKind::Ibl => NavAgent::ibl_learner(slot, run.ibl),
    };
    let mut rng = derive_rng(run.sweep.master_seed, &nav_key(&run.sweep, grid_id, slot, kind));
    train_nav_agent(board, &mut agent, run.sweep.nav_episodes, &run.sweep.episode_config(), &mut rng);
    agent
}

fn team_for(pool: &AgentPool, grid_id: usize, scenario: &ScenarioSpec) -> Vec<NavAgent> {
    scenario
        .team
        .iter()
        .enumerate()
        .map(|(i, slot)| {
            pool[&(grid_id, i + 1, slot.kind)].clone().with_error_prob(slot.error_prob)
        })
        .collect()
}

fn cell_key(master: u64, grid_id: usize, level: usize, scenario: &str, condition: Condition, rep: usize) -> String {
    format!("cell/master={master}/grid={grid_id}/level={level}/scenario={scenario}/condition={condition}/rep={rep}")
}

/// Mean, sample variance and success rate of a batch of games.
pub fn length_stats(results: &[EpisodeResult]) -> (f64, f64, f64) {
    let n = results.len() as f64;
    if results.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mean = results.iter().map(|r| r.length as f64).sum::<f64>() / n;
    let var = if results.len() > 1 {
        results.iter().map(|r| (r.length as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let success = results.iter().filter(|r| r.success).count() as f64 / n;
    (mean, var, success)
}

/// Frequencies for every agent in every visited bucket, zeros included.
fn selection_frequencies(log: &SelectionLog, team_size: usize) -> SelectionFreq {
    let buckets: BTreeSet<&str> = log.iter().map(|(b, _, _)| b).collect();
    buckets
        .into_iter()
        .flat_map(|b| (1..=team_size).map(move |a| ((b.to_string(), a), log.frequency(b, a).unwrap())))
        .collect()
}

/// One `(grid, level, scenario)` cell: every solo agent, the random manager
/// and the IBL manager, pooled over replications.
pub fn run_cell(
    run: &RunConfig,
    pool: &AgentPool,
    grid_id: usize,
    variant: &GridVariant,
    scenario: &ScenarioSpec,
) -> Vec<LevelRecord> {
    let sweep = &run.sweep;
    let team = team_for(pool, grid_id, scenario);
    let eval_cfg = sweep.episode_config().frozen();
    let board = &variant.board;
    let key = |c: Condition, rep: usize| cell_key(sweep.master_seed, grid_id, variant.level, &scenario.label, c, rep);

    let mut conditions: Vec<Condition> = (1..=team.len()).map(Condition::Solo).collect();
    conditions.push(Condition::RandomManager);
    conditions.push(Condition::IblManager);

    conditions
        .into_iter()
        .map(|condition| {
            let mut results = Vec::new();
            let mut log = SelectionLog::default();
            for rep in 0..sweep.replications {
                let mut rng = derive_rng(sweep.master_seed, &key(condition, rep));
                match condition {
                    Condition::Solo(i) => {
                        results.extend(evaluate_solo(board, &team[i - 1], sweep.eval_episodes, &eval_cfg, &mut rng));
                    }
                    Condition::RandomManager | Condition::IblManager => {
                        let mut mgr = if condition == Condition::IblManager {
                            let mut m = ManagerAgent::ibl(team.len(), run.ibl);
                            train_manager(board, &team, &mut m, sweep.manager_games, &sweep.episode_config(), &mut rng);
                            m.reset_log();
                            m
                        } else {
                            ManagerAgent::random(team.len())
                        };
                        results.extend(evaluate_team(board, &team, &mut mgr, sweep.eval_episodes, &eval_cfg, &mut rng));
                        log.merge(&mgr.selection_log);
                    }
                }
            }
            let (mean_length, length_variance, success_rate) = length_stats(&results);
            LevelRecord {
                grid_id,
                level: variant.level,
                scenario: scenario.label.clone(),
                condition,
                mean_length,
                length_variance,
                success_rate,
                selection_freq: selection_frequencies(&log, team.len()),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<LevelRecord>,
    pub warnings: Vec<SuiteWarning>,
    /// Realized error-cell ratio per `(grid, level)`.
    pub error_ratios: BTreeMap<(usize, usize), f64>,
}

/// Trains navigating agents on every base grid, then runs every
/// `(grid, level, scenario)` cell on `run.workers` threads. Output rows are
/// sorted by `(grid_id, level, scenario, condition)`.
pub fn run_sweep(run: &RunConfig) -> Result<SweepOutput, ExperimentError> {
    run.validate()?;
    let suite = build_grid_suite(&run.sweep, run.team_size())?;
    let workers = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;

    let slots: BTreeSet<(usize, AgentKind)> = run
        .scenarios
        .iter()
        .flat_map(|s| s.team.iter().enumerate().map(|(i, t)| (i + 1, t.kind)))
        .collect();
    let nav_jobs: Vec<(usize, usize, AgentKind)> = suite
        .entries
        .iter()
        .flat_map(|e| slots.iter().map(move |&(slot, kind)| (e.grid_id, slot, kind)))
        .collect();

    let pool: AgentPool = workers.install(|| {
        nav_jobs
            .par_iter()
            .map(|&(grid_id, slot, kind)| {
                log::info!("training {} agent for slot {slot} on grid {grid_id}", kind.label());
                let agent = train_agent_for(run, &suite.entries[grid_id].base, grid_id, slot, kind);
                ((grid_id, slot, kind), agent)
            })
            .collect()
    });

    let cells: Vec<(usize, &GridVariant, &ScenarioSpec)> = suite
        .entries
        .iter()
        .flat_map(|e| e.variants.iter().map(move |v| (e.grid_id, v)))
        .flat_map(|(g, v)| run.scenarios.iter().map(move |s| (g, v, s)))
        .collect();

    let mut records: Vec<LevelRecord> = workers.install(|| {
        cells
            .par_iter()
            .flat_map_iter(|&(grid_id, variant, scenario)| {
                log::info!("grid {grid_id} level {} scenario {}", variant.level, scenario.label);
                run_cell(run, &pool, grid_id, variant, scenario)
            })
            .collect()
    });
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let error_ratios = suite
        .entries
        .iter()
        .flat_map(|e| e.variants.iter().map(move |v| ((e.grid_id, v.level), v.error_ratio())))
        .collect();
    Ok(SweepOutput { records, warnings: suite.warnings, error_ratios })
}

/// Mean and sample variance of `mean_length` over grids, per
/// `(scenario, level, condition)`.
pub fn aggregate_records(records: &[LevelRecord]) -> Result<Vec<AggregateRecord>, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::EmptyGroup);
    }
    let mut groups: BTreeMap<(String, usize, Condition), Vec<&LevelRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.scenario.clone(), r.level, r.condition)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((scenario, level, condition), mut rows)| {
            if rows.is_empty() {
                return Err(ExperimentError::EmptyGroup);
            }
            rows.sort_by_key(|r| r.grid_id);
            let means: Vec<f64> = rows.iter().map(|r| r.mean_length).collect();
            let (mean, variance) = mean_and_sample_variance(&means);
            let mut sums: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
            for r in &rows {
                for (k, f) in &r.selection_freq {
                    let e = sums.entry(k.clone()).or_default();
                    e.0 += f;
                    e.1 += 1;
                }
            }
            let selection_freq = sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
            Ok(AggregateRecord { scenario, level, condition, grids: rows.len(), mean, variance, selection_freq })
        })
        .collect()
}

pub fn mean_and_sample_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, variance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelImprovement {
    pub scenario: String,
    pub level: usize,
    pub worst_solo_mean: f64,
    pub random_mean: f64,
    pub ibl_mean: f64,
    /// `(worst solo - ibl) / worst solo`; `None` when the denominator is 0.
    pub team_vs_solo: Option<f64>,
    /// `(random - ibl) / random`; `None` when the denominator is 0.
    pub manager_vs_random: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementSummary {
    pub levels: Vec<LevelImprovement>,
    pub max_team_vs_solo: Option<f64>,
    pub max_manager_vs_random: Option<f64>,
}

pub fn relative_improvement(baseline: f64, candidate: f64) -> Option<f64> {
    (baseline != 0.0).then(|| (baseline - candidate) / baseline)
}

pub fn improvement_summary(aggregates: &[AggregateRecord]) -> ImprovementSummary {
    let mut by_level: BTreeMap<(String, usize), Vec<&AggregateRecord>> = BTreeMap::new();
    for a in aggregates {
        by_level.entry((a.scenario.clone(), a.level)).or_default().push(a);
    }
    let levels: Vec<LevelImprovement> = by_level
        .into_iter()
        .filter_map(|((scenario, level), rows)| {
            let find = |c: Condition| rows.iter().find(|r| r.condition == c).map(|r| r.mean);
            let worst_solo_mean = rows
                .iter()
                .filter(|r| matches!(r.condition, Condition::Solo(_)))
                .map(|r| r.mean)
                .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))))?;
            let random_mean = find(Condition::RandomManager)?;
            let ibl_mean = find(Condition::IblManager)?;
            Some(LevelImprovement {
                scenario,
                level,
                worst_solo_mean,
                random_mean,
                ibl_mean,
                team_vs_solo: relative_improvement(worst_solo_mean, ibl_mean),
                manager_vs_random: relative_improvement(random_mean, ibl_mean),
            })
        })
        .collect();
    let max_of = |f: fn(&LevelImprovement) -> Option<f64>| {
        levels.iter().filter_map(f).fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    ImprovementSummary {
        max_team_vs_solo: max_of(|l| l.team_vs_solo),
        max_manager_vs_random: max_of(|l| l.manager_vs_random),
        levels,
    }
}

/// Column buckets for selection statistics: plain cells then each error tag.
pub fn selection_buckets(team_size: usize) -> Vec<String> {
    std::iter::once(PLAIN_BUCKET.to_string())
        .chain(ErrorTag::universe(team_size).iter().map(ErrorTag::label))
        .collect()
}
