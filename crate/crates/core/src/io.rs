//! File formats: grids, policy snapshots, run configs, results tables and
//! episode traces. Every document carries a `format_version`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delegation::{ManagerAgent, ManagerPolicy};
use crate::experiments::{selection_buckets, AggregateRecord, Condition, LevelRecord, RunConfig, FORMAT_VERSION};
use crate::gridworld::{Board, ErrorTag, GameAction, GridSpec, Position};
use crate::ibl::{IblMemory, IblParams, InstanceRecord};
use crate::nav::{NavAgent, NavPolicy, QParams, QTable};
use crate::simulation::EpisodeResult;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
}

fn parse_err(e: impl std::fmt::Display) -> IoError {
    IoError::Parse(e.to_string())
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_text(path: &Path, contents: &str) -> Result<(), IoError> {
    let io = |source| IoError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(parse_err)
}

fn check_version(found: u32) -> Result<(), IoError> {
    if found != FORMAT_VERSION {
        return Err(IoError::Parse(format!(
            "unsupported format_version {found} (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

// ---- grids ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    format_version: u32,
    rows: usize,
    cols: usize,
    start: Position,
    goal: Position,
    walls: Vec<Position>,
    error_cells: Vec<ErrorCellDoc>,
    wall_ratio: f64,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ErrorCellDoc {
    pos: Position,
    agents: Vec<usize>,
}

impl GridDoc {
    fn from_grid(grid: &GridSpec) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            rows: grid.rows,
            cols: grid.cols,
            start: grid.start,
            goal: grid.goal,
            walls: grid.walls.iter().copied().collect(),
            error_cells: grid
                .error_cells
                .iter()
                .map(|(pos, tag)| ErrorCellDoc { pos: *pos, agents: tag.agents().collect() })
                .collect(),
            wall_ratio: grid.wall_ratio,
            seed: grid.seed,
        }
    }

    fn into_grid(self) -> Result<GridSpec, IoError> {
        check_version(self.format_version)?;
        let mut error_cells = BTreeMap::new();
        for cell in self.error_cells {
            let tag = ErrorTag::new(cell.agents)
                .map_err(|e| IoError::InvariantViolation(format!("error cell {}: {e}", cell.pos)))?;
            if error_cells.insert(cell.pos, tag).is_some() {
                return Err(IoError::InvariantViolation(format!("error cell {} listed twice", cell.pos)));
            }
        }
        let grid = GridSpec {
            rows: self.rows,
            cols: self.cols,
            walls: self.walls.into_iter().collect(),
            start: self.start,
            goal: self.goal,
            error_cells,
            wall_ratio: self.wall_ratio,
            seed: self.seed,
        };
        grid.validate().map_err(|e| IoError::InvariantViolation(e.to_string()))?;
        Ok(grid)
    }
}

pub fn save_grid(grid: &GridSpec) -> String {
    to_json(&GridDoc::from_grid(grid))
}

/// Loads a grid document, or an ASCII board as produced by `render_ascii`.
pub fn load_grid(text: &str) -> Result<GridSpec, IoError> {
    if text.trim_start().starts_with('{') {
        from_json::<GridDoc>(text)?.into_grid()
    } else {
        GridSpec::parse_ascii(text).map_err(parse_err)
    }
}

// ---- policy snapshots ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QEntryDoc {
    row: usize,
    col: usize,
    action: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc<A> {
    state: Position,
    action: A,
    outcome: f64,
    first_time: u64,
    recent_times: Vec<u64>,
    total_count: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemoryDoc<A> {
    params: IblParams,
    clock: u64,
    instances: Vec<InstanceDoc<A>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PolicyBody {
    QNav { id: usize, error_prob: f64, params: QParams, entries: Vec<QEntryDoc> },
    IblNav { id: usize, error_prob: f64, memory: MemoryDoc<String> },
    RandomManager { team_size: usize },
    IblManager { team_size: usize, memory: MemoryDoc<usize> },
}

impl PolicyBody {
    fn kind(&self) -> &'static str {
        match self {
            PolicyBody::QNav { .. } => "q_nav",
            PolicyBody::IblNav { .. } => "ibl_nav",
            PolicyBody::RandomManager { .. } => "random_manager",
            PolicyBody::IblManager { .. } => "ibl_manager",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PolicyDoc {
    format_version: u32,
    #[serde(flatten)]
    body: PolicyBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Nav(NavAgent),
    Manager(ManagerAgent),
}

fn memory_doc<A: Clone + Eq + std::hash::Hash + Ord, B>(
    memory: &IblMemory<Position, A>,
    encode: impl Fn(&A) -> B,
) -> MemoryDoc<B> {
    MemoryDoc {
        params: *memory.params(),
        clock: memory.clock(),
        instances: memory
            .iter_sorted()
            .into_iter()
            .map(|(key, r)| InstanceDoc {
                state: key.state,
                action: encode(&key.action),
                outcome: r.outcome,
                first_time: r.first_time,
                recent_times: r.recent_times.iter().copied().collect(),
                total_count: r.total_count,
            })
            .collect(),
    }
}

fn memory_from_doc<A: Clone + Eq + std::hash::Hash + Ord, B>(
    doc: MemoryDoc<B>,
    decode: impl Fn(B) -> Result<A, IoError>,
) -> Result<IblMemory<Position, A>, IoError> {
    doc.params.validate().map_err(parse_err)?;
    let k = doc.params.recent_window;
    let mut memory = IblMemory::new(doc.params);
    let mut seen = BTreeSet::new();
    for (i, inst) in doc.instances.into_iter().enumerate() {
        let bad = |m: &str| Err(IoError::Parse(format!("instance {i}: {m}")));
        let times = &inst.recent_times;
        if times.is_empty() {
            return bad("recent_times is empty");
        }
        if times.len() > k {
            return bad(&format!("recent_times holds {} ticks, more than k = {k}", times.len()));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return bad("recent_times is not ascending");
        }
        if inst.first_time > times[0] || times[times.len() - 1] > doc.clock {
            return bad("ticks are inconsistent with first_time or clock");
        }
        if inst.total_count < times.len() as u64 || (inst.total_count as usize <= k && inst.total_count != times.len() as u64) {
            return bad("total_count is inconsistent with recent_times");
        }
        if !inst.outcome.is_finite() {
            return bad("outcome is not finite");
        }
        let action = decode(inst.action)?;
        if !seen.insert((inst.state, action.clone(), inst.outcome.to_bits())) {
            return bad("duplicate instance");
        }
        let record = InstanceRecord {
            outcome: inst.outcome,
            first_time: inst.first_time,
            recent_times: VecDeque::from(inst.recent_times),
            total_count: inst.total_count,
        };
        memory.insert_record(inst.state, action, record);
    }
    memory.set_clock(doc.clock);
    Ok(memory)
}

pub fn save_nav_agent(agent: &NavAgent) -> String {
    let body = match &agent.policy {
        NavPolicy::Q { table, params } => PolicyBody::QNav {
            id: agent.id,
            error_prob: agent.error_prob,
            params: *params,
            entries: table
                .entries()
                .into_iter()
                .map(|(p, a, value)| QEntryDoc { row: p.row, col: p.col, action: a.name().to_string(), value })
                .collect(),
        },
        NavPolicy::Ibl(memory) => PolicyBody::IblNav {
            id: agent.id,
            error_prob: agent.error_prob,
            memory: memory_doc(memory, |a: &GameAction| a.name().to_string()),
        },
    };
    to_json(&PolicyDoc { format_version: FORMAT_VERSION, body })
}

pub fn save_manager(manager: &ManagerAgent) -> String {
    let body = match &manager.policy {
        ManagerPolicy::Random => PolicyBody::RandomManager { team_size: manager.team_size },
        ManagerPolicy::Ibl(memory) => PolicyBody::IblManager {
            team_size: manager.team_size,
            memory: memory_doc(memory, |a: &usize| *a),
        },
    };
    to_json(&PolicyDoc { format_version: FORMAT_VERSION, body })
}

fn parse_action(name: String) -> Result<GameAction, IoError> {
    GameAction::parse(&name).ok_or_else(|| IoError::Parse(format!("unknown action '{name}'")))
}

fn check_agent(id: usize, error_prob: f64) -> Result<(), IoError> {
    if id == 0 {
        return Err(IoError::Parse("agent id must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&error_prob) {
        return Err(IoError::Parse(format!("error_prob {error_prob} outside [0,1]")));
    }
    Ok(())
}

fn check_team(team_size: usize) -> Result<(), IoError> {
    if team_size == 0 {
        return Err(IoError::Parse("team_size must be >= 1".into()));
    }
    Ok(())
}

pub fn load_policy(text: &str) -> Result<Policy, IoError> {
    let doc: PolicyDoc = from_json(text)?;
    check_version(doc.format_version)?;
    Ok(match doc.body {
        PolicyBody::QNav { id, error_prob, params, entries } => {
            check_agent(id, error_prob)?;
            params.validate().map_err(IoError::Parse)?;
            let mut table = QTable::new();
            for e in entries {
                table.set(Position::new(e.row, e.col), parse_action(e.action)?, e.value);
            }
            Policy::Nav(NavAgent { id, error_prob, policy: NavPolicy::Q { table, params } })
        }
        PolicyBody::IblNav { id, error_prob, memory } => {
            check_agent(id, error_prob)?;
            let memory = memory_from_doc(memory, parse_action)?;
            Policy::Nav(NavAgent { id, error_prob, policy: NavPolicy::Ibl(memory) })
        }
        PolicyBody::RandomManager { team_size } => {
            check_team(team_size)?;
            Policy::Manager(ManagerAgent::random(team_size))
        }
        PolicyBody::IblManager { team_size, memory } => {
            check_team(team_size)?;
            let memory = memory_from_doc(memory, |a: usize| {
                if (1..=team_size).contains(&a) {
                    Ok(a)
                } else {
                    Err(IoError::Parse(format!("agent {a} outside team of {team_size}")))
                }
            })?;
            Policy::Manager(ManagerAgent::with_policy(team_size, ManagerPolicy::Ibl(memory)))
        }
    })
}

fn policy_kind(p: &Policy) -> &'static str {
    match p {
        Policy::Nav(_) => "navigating agent",
        Policy::Manager(_) => "manager",
    }
}

pub fn load_nav_agent(text: &str) -> Result<NavAgent, IoError> {
    match load_policy(text)? {
        Policy::Nav(a) => Ok(a),
        other => Err(IoError::KindMismatch { expected: "navigating agent".into(), found: policy_kind(&other).into() }),
    }
}

pub fn load_manager(text: &str) -> Result<ManagerAgent, IoError> {
    match load_policy(text)? {
        Policy::Manager(m) => Ok(m),
        other => Err(IoError::KindMismatch { expected: "manager".into(), found: policy_kind(&other).into() }),
    }
}

/// Kind tag of a snapshot without fully validating it.
pub fn snapshot_kind(text: &str) -> Result<String, IoError> {
    let doc: PolicyDoc = from_json(text)?;
    Ok(doc.body.kind().to_string())
}

// ---- run configs ----

pub fn save_config(cfg: &RunConfig) -> String {
    to_json(cfg)
}

pub fn load_config(text: &str) -> Result<RunConfig, IoError> {
    let cfg: RunConfig = from_json(text)?;
    check_version(cfg.format_version)?;
    cfg.validate().map_err(|e| IoError::InvariantViolation(e.to_string()))?;
    Ok(cfg)
}

// ---- results tables ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub artifact_version: String,
    pub master_seed: u64,
    pub profile: String,
}

impl Provenance {
    pub fn new(master_seed: u64, profile: &str) -> Self {
        Self { artifact_version: env!("CARGO_PKG_VERSION").to_string(), master_seed, profile: profile.to_string() }
    }

    fn lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("artifact", format!("ibl-delegate {}", self.artifact_version)),
            ("format_version", FORMAT_VERSION.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("profile", self.profile.clone()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub provenance: Provenance,
    pub team_size: usize,
    pub rows: Vec<LevelRecord>,
}

pub const FIXED_COLUMNS: [&str; 7] =
    ["grid_id", "level", "scenario", "condition", "mean_length", "length_variance", "success_rate"];

/// Six significant digits, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exponent) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exponent).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    // rounding may carry into a new leading digit, e.g. 9.999996 -> 10.00000
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|c| *c == '0').count();
    if digits > 6 && decimals > 0 {
        s = format!("{x:.prec$}", prec = decimals - 1);
    }
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn selection_columns(team_size: usize) -> Vec<(String, usize)> {
    selection_buckets(team_size)
        .into_iter()
        .flat_map(|b| (1..=team_size).map(move |a| (b.clone(), a)))
        .collect()
}

pub fn render_results_csv(table: &ResultsTable) -> String {
    let mut out = String::new();
    for (k, v) in table.provenance.lines() {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    let sel = selection_columns(table.team_size);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<String> = FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(sel.iter().map(|(b, a)| format!("sel_{b}_a{a}")))
        .collect();
    w.write_record(&header).unwrap();
    let mut rows: Vec<&LevelRecord> = table.rows.iter().collect();
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    for r in rows {
        let mut fields = vec![
            r.grid_id.to_string(),
            r.level.to_string(),
            r.scenario.clone(),
            r.condition.label(),
            format_sig6(r.mean_length),
            format_sig6(r.length_variance),
            format_sig6(r.success_rate),
        ];
        fields.extend(sel.iter().map(|k| r.selection_freq.get(k).map_or_else(String::new, |f| format_sig6(*f))));
        w.write_record(&fields).unwrap();
    }
    out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
    out
}

pub fn write_results_csv(path: &Path, table: &ResultsTable) -> Result<(), IoError> {
    write_text(path, &render_results_csv(table))
}

/// Inverse of [`render_results_csv`] up to the 6-digit rounding.
pub fn parse_results_csv(text: &str) -> Result<ResultsTable, IoError> {
    let mut meta = BTreeMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').trim().split_once(':') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |k: &str| meta.get(k).cloned().ok_or_else(|| IoError::Parse(format!("missing provenance field '{k}'")));
    check_version(get("format_version")?.parse().map_err(parse_err)?)?;
    let artifact_version = get("artifact")?.rsplit(' ').next().unwrap_or_default().to_string();
    let provenance = Provenance {
        artifact_version,
        master_seed: get("master_seed")?.parse().map_err(parse_err)?,
        profile: get("profile")?,
    };

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(parse_err)?.iter().map(String::from).collect();
    if header.len() < FIXED_COLUMNS.len() || header[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
        return Err(IoError::Parse("results header does not start with the fixed columns".into()));
    }
    let sel: Vec<(String, usize)> = header[FIXED_COLUMNS.len()..]
        .iter()
        .map(|h| {
            let rest = h.strip_prefix("sel_").ok_or_else(|| IoError::Parse(format!("unexpected column '{h}'")))?;
            let (bucket, agent) =
                rest.rsplit_once("_a").ok_or_else(|| IoError::Parse(format!("unexpected column '{h}'")))?;
            Ok((bucket.to_string(), agent.parse::<usize>().map_err(parse_err)?))
        })
        .collect::<Result<_, IoError>>()?;
    let team_size = sel.iter().map(|(_, a)| *a).max().unwrap_or(0);

    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(parse_err)?;
        let field = |j: usize| rec.get(j).ok_or_else(|| IoError::Parse(format!("row {}: missing column {j}", i + 1)));
        let num = |j: usize| -> Result<f64, IoError> {
            field(j)?.parse().map_err(|e| IoError::Parse(format!("row {}, column {}: {e}", i + 1, header[j])))
        };
        let condition = Condition::parse(field(3)?)
            .ok_or_else(|| IoError::Parse(format!("row {}: unknown condition '{}'", i + 1, field(3).unwrap())))?;
        let mut selection_freq = BTreeMap::new();
        for (j, key) in sel.iter().enumerate() {
            let col = FIXED_COLUMNS.len() + j;
            if !field(col)?.is_empty() {
                selection_freq.insert(key.clone(), num(col)?);
            }
        }
        rows.push(LevelRecord {
            grid_id: field(0)?.parse().map_err(parse_err)?,
            level: field(1)?.parse().map_err(parse_err)?,
            scenario: field(2)?.to_string(),
            condition,
            mean_length: num(4)?,
            length_variance: num(5)?,
            success_rate: num(6)?,
            selection_freq,
        });
    }
    Ok(ResultsTable { provenance, team_size, rows })
}

/// Per-`(scenario, level, condition)` means across grids; the values the
/// charts plot.
pub fn render_aggregates_csv(aggregates: &[AggregateRecord], team_size: usize, provenance: &Provenance) -> String {
    let mut out = String::new();
    for (k, v) in provenance.lines() {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    let sel = selection_columns(team_size);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<String> = ["scenario", "level", "condition", "grids", "mean_length", "length_variance"]
        .iter()
        .map(|s| s.to_string())
        .chain(sel.iter().map(|(b, a)| format!("sel_{b}_a{a}")))
        .collect();
    w.write_record(&header).unwrap();
    let mut rows: Vec<&AggregateRecord> = aggregates.iter().collect();
    rows.sort_by(|a, b| (&a.scenario, a.level, a.condition).cmp(&(&b.scenario, b.level, b.condition)));
    for r in rows {
        let mut fields = vec![
            r.scenario.clone(),
            r.level.to_string(),
            r.condition.label(),
            r.grids.to_string(),
            format_sig6(r.mean),
            format_sig6(r.variance),
        ];
        fields.extend(sel.iter().map(|k| r.selection_freq.get(k).map_or_else(String::new, |f| format_sig6(*f))));
        w.write_record(&fields).unwrap();
    }
    out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
    out
}

// ---- episode traces ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub tick: u64,
    pub pos: Position,
    /// Chosen agent in a team game; `None` for solo play.
    pub agent: Option<usize>,
    pub action: GameAction,
    pub error_injected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub grid: GridSpec,
    pub success: bool,
    pub steps: Vec<TraceStep>,
}

const TRACE_COLUMNS: &str = "tick row col agent action error_injected";

impl EpisodeTrace {
    /// Team games use the manager's selection ticks; solo games number steps from 1.
    pub fn from_episode(board: &Board, result: &EpisodeResult) -> Self {
        let steps = result
            .trajectory
            .iter()
            .enumerate()
            .map(|(i, s)| TraceStep {
                tick: result.selections.get(i).map_or(i as u64 + 1, |sel| sel.time),
                pos: s.pos,
                agent: s.agent,
                action: s.action,
                error_injected: s.error_injected,
            })
            .collect();
        Self { grid: board.grid.clone(), success: result.success, steps }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let grid_line = serde_json::to_string(&GridDoc::from_grid(&self.grid)).unwrap();
        writeln!(out, "# episode trace").unwrap();
        writeln!(out, "format_version {FORMAT_VERSION}").unwrap();
        writeln!(out, "grid {grid_line}").unwrap();
        writeln!(out, "success {}", self.success).unwrap();
        writeln!(out, "steps {}", self.steps.len()).unwrap();
        writeln!(out, "{TRACE_COLUMNS}").unwrap();
        for s in &self.steps {
            let agent = s.agent.map_or_else(|| "-".to_string(), |a| a.to_string());
            writeln!(out, "{} {} {} {agent} {} {}", s.tick, s.pos.row, s.pos.col, s.action, u8::from(s.error_injected))
                .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let mut header = |name: &str| -> Result<String, IoError> {
            let (n, line) = lines.next().ok_or_else(|| IoError::Parse(format!("missing '{name}' line")))?;
            line.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| IoError::Parse(format!("line {}: expected '{name}'", n + 1)))
        };
        check_version(header("format_version")?.trim().parse().map_err(parse_err)?)?;
        let grid = from_json::<GridDoc>(&header("grid")?)?.into_grid()?;
        let success = header("success")?.trim().parse::<bool>().map_err(parse_err)?;
        let count: usize = header("steps")?.trim().parse().map_err(parse_err)?;
        match lines.next() {
            Some((_, l)) if l.trim() == TRACE_COLUMNS => {}
            _ => return Err(IoError::Parse("missing step column header".into())),
        }
        let mut steps = Vec::with_capacity(count);
        for (n, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| IoError::Parse(format!("line {}: {m}", n + 1));
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|e| bad(&e.to_string()));
            steps.push(TraceStep {
                tick: int(f[0])?,
                pos: Position::new(int(f[1])? as usize, int(f[2])? as usize),
                agent: if f[3] == "-" { None } else { Some(int(f[3])? as usize) },
                action: GameAction::parse(f[4]).ok_or_else(|| bad("unknown action"))?,
                error_injected: match f[5] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("error_injected must be 0 or 1")),
                },
            });
        }
        if steps.len() != count {
            return Err(IoError::Parse(format!("expected {count} steps, found {}", steps.len())));
        }
        Ok(Self { grid, success, steps })
    }

    /// Board snapshots before the first move and after every move, with the
    /// team token drawn as `@`.
    pub fn replay_frames(&self) -> Result<Vec<String>, IoError> {
        let mut positions = vec![self.grid.start];
        for (i, s) in self.steps.iter().enumerate() {
            let current = *positions.last().unwrap();
            if s.pos != current {
                return Err(IoError::InvariantViolation(format!(
                    "step {} starts at {} but the token is at {current}",
                    i + 1,
                    s.pos
                )));
            }
            positions.push(self.grid.step(current, s.action).new_pos);
        }
        Ok(positions.into_iter().map(|p| self.frame(p)).collect())
    }

    fn frame(&self, token: Position) -> String {
        let mut out = String::new();
        for r in 0..self.grid.rows {
            for c in 0..self.grid.cols {
                let p = Position::new(r, c);
                out.push(if p == token { '@' } else { self.grid.glyph_at(p) });
            }
            out.push('\n');
        }
        out
    }
}
