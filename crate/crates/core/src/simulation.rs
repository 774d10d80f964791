//! Episode engines: navigating-agent training, solo evaluation, and team
//! games run under a manager, with error injection in error cells.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::delegation::{ManagerAgent, SelectionRecord};
use crate::gridworld::{Board, GameAction, Position};
use crate::nav::{nav_policy_action, q_step_reward, q_update, Mode, NavAgent, NavPolicy};

pub const SUCCESS_BASE: f64 = 100.0;
pub const FAILURE_BASE: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Maximum number of moves per game.
    pub l_max: usize,
    pub mode: Mode,
}

impl EpisodeConfig {
    pub fn new(l_max: usize, mode: Mode) -> Self {
        assert!(l_max >= 1, "l_max must be at least 1");
        Self { l_max, mode }
    }

    pub fn frozen(self) -> Self {
        Self { mode: Mode::Frozen, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    /// Cell the move was made from.
    pub pos: Position,
    /// Acting agent in team games; `None` for solo play.
    pub agent: Option<usize>,
    pub action: GameAction,
    pub error_injected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    pub length: usize,
    pub trajectory: Vec<TrajectoryStep>,
    pub selections: Vec<SelectionRecord>,
}

impl EpisodeResult {
    pub fn final_position(&self, board: &Board) -> Position {
        match self.trajectory.last() {
            Some(last) => board.grid.step(last.pos, last.action).new_pos,
            None => board.grid.start,
        }
    }
}

/// Game result credited to every instance of a trajectory: `100 - L` on
/// success, `-100 - L` otherwise.
pub fn trajectory_reward(success: bool, length: usize) -> f64 {
    let base = if success { SUCCESS_BASE } else { FAILURE_BASE };
    base - length as f64
}

/// Actions that do not bring `s` closer to the goal, by BFS distance.
/// Moves into walls count (the distance is unchanged).
pub fn error_actions(board: &Board, s: Position) -> Vec<GameAction> {
    let here = board.distances.get(s);
    let off_path: Vec<GameAction> = GameAction::ALL
        .into_iter()
        .filter(|a| {
            let next = board.grid.step(s, *a).new_pos;
            match (board.distances.get(next), here) {
                (None, _) => true,
                (Some(_), None) => true,
                (Some(d), Some(h)) => d >= h,
            }
        })
        .collect();
    if off_path.is_empty() {
        GameAction::ALL.to_vec()
    } else {
        off_path
    }
}

pub fn error_action<R: Rng + ?Sized>(board: &Board, s: Position, rng: &mut R) -> GameAction {
    let options = error_actions(board, s);
    options[rng.gen_range(0..options.len())]
}

/// The move an agent makes in `s`: an error action with probability
/// `error_prob` when `s` is one of its own error cells, its policy otherwise.
pub fn resolve_action<R: Rng + ?Sized>(
    agent: &NavAgent,
    board: &Board,
    s: Position,
    mode: Mode,
    now: u64,
    rng: &mut R,
) -> (GameAction, bool) {
    let own_error_cell = board.grid.error_tag(s).is_some_and(|t| t.contains(agent.id));
    if own_error_cell && rng.gen::<f64>() < agent.error_prob {
        (error_action(board, s, rng), true)
    } else {
        (nav_policy_action(agent, s, mode, now, rng), false)
    }
}

/// One training game for a navigating agent on an error-free board.
///
/// Q agents learn online from the per-move rewards; IBL agents buffer their
/// decisions and commit them with the game result once the game ends. The
/// agent's clock ticks once per move.
pub fn run_nav_training_episode<R: Rng + ?Sized>(
    board: &Board,
    agent: &mut NavAgent,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> EpisodeResult {
    let grid = &board.grid;
    let mut pos = grid.start;
    let mut trajectory = Vec::new();
    let mut decisions: Vec<(Position, GameAction, u64)> = Vec::new();
    let mut success = false;

    for move_no in 1..=cfg.l_max {
        let now = match &mut agent.policy {
            NavPolicy::Ibl(memory) => memory.advance_clock(),
            NavPolicy::Q { .. } => move_no as u64,
        };
        let action = nav_policy_action(agent, pos, cfg.mode, now, rng);
        let outcome = grid.step(pos, action);
        let timed_out = !outcome.reached_goal && move_no == cfg.l_max;
        match &mut agent.policy {
            NavPolicy::Q { table, params } => {
                let reward = q_step_reward(&outcome, timed_out);
                let terminal = outcome.reached_goal || timed_out;
                q_update(table, pos, action, reward, outcome.new_pos, terminal, params);
            }
            NavPolicy::Ibl(_) => decisions.push((pos, action, now)),
        }
        trajectory.push(TrajectoryStep { pos, agent: None, action, error_injected: false });
        pos = outcome.new_pos;
        if outcome.reached_goal {
            success = true;
            break;
        }
    }

    let length = trajectory.len();
    if let NavPolicy::Ibl(memory) = &mut agent.policy {
        memory
            .commit_trajectory(&decisions, trajectory_reward(success, length))
            .expect("decision ticks are increasing and within the clock");
    }
    EpisodeResult { success, length, trajectory, selections: Vec::new() }
}

/// Runs `episodes` training games, decaying Q-learning rates after each.
pub fn train_nav_agent<R: Rng + ?Sized>(
    board: &Board,
    agent: &mut NavAgent,
    episodes: usize,
    cfg: &EpisodeConfig,
    rng: &mut R,
) {
    let cfg = EpisodeConfig { mode: Mode::Train, ..*cfg };
    for _ in 0..episodes {
        run_nav_training_episode(board, agent, &cfg, rng);
        agent.decay_schedule();
    }
}

/// One frozen solo game with error injection in the agent's error cells.
pub fn run_solo_episode<R: Rng + ?Sized>(
    board: &Board,
    agent: &NavAgent,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> EpisodeResult {
    let now = agent.frozen_tick();
    let mut pos = board.grid.start;
    let mut trajectory = Vec::new();
    let mut success = false;
    for _ in 0..cfg.l_max {
        let (action, error_injected) = resolve_action(agent, board, pos, Mode::Frozen, now, rng);
        let outcome = board.grid.step(pos, action);
        trajectory.push(TrajectoryStep { pos, agent: None, action, error_injected });
        pos = outcome.new_pos;
        if outcome.reached_goal {
            success = true;
            break;
        }
    }
    EpisodeResult { success, length: trajectory.len(), trajectory, selections: Vec::new() }
}

pub fn evaluate_solo<R: Rng + ?Sized>(
    board: &Board,
    agent: &NavAgent,
    episodes: usize,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Vec<EpisodeResult> {
    (0..episodes).map(|_| run_solo_episode(board, agent, cfg, rng)).collect()
}

/// One team game. Each move the manager picks an agent, which then acts
/// (possibly erring). Navigating agents are read-only. In `Train` mode the
/// manager's clock ticks once per selection and the game result is
/// committed at the end; in `Frozen` mode the manager only reads.
pub fn run_team_episode<R: Rng + ?Sized>(
    board: &Board,
    agents: &[NavAgent],
    mgr: &mut ManagerAgent,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> EpisodeResult {
    assert_eq!(agents.len(), mgr.team_size, "team size mismatch");
    debug_assert!(agents.iter().enumerate().all(|(i, a)| a.id == i + 1));
    let ticks: Vec<u64> = agents.iter().map(NavAgent::frozen_tick).collect();
    let mut pos = board.grid.start;
    let mut trajectory = Vec::new();
    let mut selections = Vec::new();
    let mut success = false;

    for _ in 0..cfg.l_max {
        let now = match (cfg.mode, mgr.memory_mut()) {
            (Mode::Train, Some(memory)) => memory.advance_clock(),
            _ => mgr.read_tick(),
        };
        let chosen = mgr
            .select(pos, board.grid.error_tag(pos), now, rng)
            .expect("manager reads happen after its clock advanced");
        let agent = &agents[chosen - 1];
        let (action, error_injected) =
            resolve_action(agent, board, pos, Mode::Frozen, ticks[chosen - 1], rng);
        let outcome = board.grid.step(pos, action);
        trajectory.push(TrajectoryStep { pos, agent: Some(chosen), action, error_injected });
        selections.push(SelectionRecord { state: pos, chosen, time: now });
        pos = outcome.new_pos;
        if outcome.reached_goal {
            success = true;
            break;
        }
    }

    let length = trajectory.len();
    if cfg.mode == Mode::Train {
        mgr.commit(&selections, trajectory_reward(success, length))
            .expect("selection ticks are increasing and within the clock");
    }
    EpisodeResult { success, length, trajectory, selections }
}

pub fn train_manager<R: Rng + ?Sized>(
    board: &Board,
    agents: &[NavAgent],
    mgr: &mut ManagerAgent,
    games: usize,
    cfg: &EpisodeConfig,
    rng: &mut R,
) {
    let cfg = EpisodeConfig { mode: Mode::Train, ..*cfg };
    for _ in 0..games {
        run_team_episode(board, agents, mgr, &cfg, rng);
    }
}

pub fn evaluate_team<R: Rng + ?Sized>(
    board: &Board,
    agents: &[NavAgent],
    mgr: &mut ManagerAgent,
    episodes: usize,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Vec<EpisodeResult> {
    let cfg = cfg.frozen();
    (0..episodes).map(|_| run_team_episode(board, agents, mgr, &cfg, rng)).collect()
}
