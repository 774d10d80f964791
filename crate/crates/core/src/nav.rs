//! Navigating agents: tabular Q-learning and IBL movers behind one acting
//! interface.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::{GameAction, Position, StepOutcome};
use crate::ibl::{IblMemory, IblParams};

pub const GOAL_REWARD: f64 = 100.0;
pub const MOVE_REWARD: f64 = -1.0;
pub const COLLISION_REWARD: f64 = -10.0;
pub const TIMEOUT_REWARD: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub alpha: f64,
    pub alpha_decay: f64,
    pub epsilon: f64,
    pub epsilon_decay: f64,
    pub gamma: f64,
}

impl QParams {
    /// `alpha = epsilon = 0.9999`, both decaying by `0.9999` per episode,
    /// `gamma = 0.9`.
    pub fn standard() -> Self {
        Self {
            alpha: 0.9999,
            alpha_decay: 0.9999,
            epsilon: 0.9999,
            epsilon_decay: 0.9999,
            gamma: 0.9,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(format!("{name} = {v} must lie in (0, 1]"))
            }
        };
        unit("alpha", self.alpha)?;
        unit("alpha_decay", self.alpha_decay)?;
        unit("epsilon", self.epsilon)?;
        unit("epsilon_decay", self.epsilon_decay)?;
        unit("gamma", self.gamma)?;
        if self.gamma >= 1.0 {
            return Err("gamma must be < 1".into());
        }
        Ok(())
    }

    /// End-of-episode annealing of the learning and exploration rates.
    pub fn decayed(self) -> Self {
        Self {
            alpha: self.alpha * self.alpha_decay,
            epsilon: self.epsilon * self.epsilon_decay,
            ..self
        }
    }
}

impl Default for QParams {
    fn default() -> Self {
        Self::standard()
    }
}

/// Sparse Q table; absent entries read as zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTable {
    values: HashMap<(Position, GameAction), f64>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: Position, a: GameAction) -> f64 {
        self.values.get(&(s, a)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, s: Position, a: GameAction, value: f64) {
        self.values.insert((s, a), value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self, s: Position) -> f64 {
        GameAction::ALL
            .iter()
            .map(|a| self.get(s, *a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Stored entries sorted by `(position, action)`.
    pub fn entries(&self) -> Vec<(Position, GameAction, f64)> {
        let mut out: Vec<_> = self.values.iter().map(|((p, a), v)| (*p, *a, *v)).collect();
        out.sort_by_key(|x| (x.0, x.1));
        out
    }

    pub fn greedy_action<R: Rng + ?Sized>(&self, s: Position, rng: &mut R) -> GameAction {
        let values = GameAction::ALL.map(|a| self.get(s, a));
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<GameAction> = GameAction::ALL
            .into_iter()
            .zip(values)
            .filter(|(_, v)| *v == best)
            .map(|(a, _)| a)
            .collect();
        if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.gen_range(0..tied.len())]
        }
    }
}

/// Per-move reward for Q-learning movers. A timed-out step takes the
/// terminal penalty even if it also collided.
pub fn q_step_reward(outcome: &StepOutcome, timed_out: bool) -> f64 {
    if outcome.reached_goal {
        GOAL_REWARD
    } else if timed_out {
        TIMEOUT_REWARD
    } else if outcome.collided {
        COLLISION_REWARD
    } else {
        MOVE_REWARD
    }
}

/// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`, with
/// no bootstrap on terminal transitions.
pub fn q_update(
    table: &mut QTable,
    s: Position,
    a: GameAction,
    reward: f64,
    s_next: Position,
    terminal: bool,
    params: &QParams,
) {
    let future = if terminal { 0.0 } else { table.max_value(s_next) };
    let target = reward + params.gamma * future;
    let old = table.get(s, a);
    table.set(s, a, (1.0 - params.alpha) * old + params.alpha * target);
}

pub fn epsilon_greedy_action<R: Rng + ?Sized>(
    table: &QTable,
    s: Position,
    epsilon: f64,
    rng: &mut R,
) -> GameAction {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return GameAction::ALL[rng.gen_range(0..GameAction::ALL.len())];
    }
    table.greedy_action(s, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentKind {
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "ibl")]
    Ibl,
}

impl AgentKind {
    pub fn label(self) -> &'static str {
        match self {
            AgentKind::Q => "q",
            AgentKind::Ibl => "ibl",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "q" => Ok(AgentKind::Q),
            "ibl" => Ok(AgentKind::Ibl),
            other => Err(format!("unknown agent kind '{other}' (expected q or ibl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NavPolicy {
    Q { table: QTable, params: QParams },
    Ibl(IblMemory<Position, GameAction>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavAgent {
    /// 1-based team slot.
    pub id: usize,
    pub error_prob: f64,
    pub policy: NavPolicy,
}

impl NavAgent {
    pub fn q_learner(id: usize, params: QParams) -> Self {
        Self {
            id,
            error_prob: 0.0,
            policy: NavPolicy::Q { table: QTable::new(), params },
        }
    }

    pub fn ibl_learner(id: usize, params: IblParams) -> Self {
        Self {
            id,
            error_prob: 0.0,
            policy: NavPolicy::Ibl(IblMemory::new(params)),
        }
    }

    pub fn with_error_prob(mut self, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "error probability {p} outside [0,1]");
        self.error_prob = p;
        self
    }

    pub fn kind(&self) -> AgentKind {
        match self.policy {
            NavPolicy::Q { .. } => AgentKind::Q,
            NavPolicy::Ibl(_) => AgentKind::Ibl,
        }
    }

    /// Tick at which a frozen agent reads its memory.
    pub fn frozen_tick(&self) -> u64 {
        match &self.policy {
            NavPolicy::Q { .. } => 0,
            NavPolicy::Ibl(m) => m.read_tick(),
        }
    }

    /// Applies the per-episode decay to a Q learner; no-op for IBL agents.
    pub fn decay_schedule(&mut self) {
        if let NavPolicy::Q { params, .. } = &mut self.policy {
            *params = params.decayed();
        }
    }
}

/// Picks the agent's move in `s` without mutating the agent.
///
/// Q agents explore with their current epsilon when training and act
/// greedily when frozen. IBL agents always take the argmax blended value,
/// with activation noise on in both modes.
pub fn nav_policy_action<R: Rng + ?Sized>(
    agent: &NavAgent,
    s: Position,
    mode: Mode,
    now: u64,
    rng: &mut R,
) -> GameAction {
    match &agent.policy {
        NavPolicy::Q { table, params } => {
            let eps = match mode {
                Mode::Train => params.epsilon,
                Mode::Frozen => 0.0,
            };
            epsilon_greedy_action(table, s, eps, rng)
        }
        NavPolicy::Ibl(memory) => memory
            .choose_best(&s, &GameAction::ALL, now, rng)
            .expect("reads happen after the clock advanced past every stored tick"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibl::InstanceKey;
    use crate::rng::rng_from_seed;

    const S: Position = Position::new(1, 1);
    const NEXT: Position = Position::new(1, 2);

    #[test]
    fn step_rewards() {
        let moved = StepOutcome { new_pos: NEXT, collided: false, reached_goal: false };
        let hit = StepOutcome { new_pos: S, collided: true, reached_goal: false };
        let goal = StepOutcome { new_pos: NEXT, collided: false, reached_goal: true };
        assert_eq!(q_step_reward(&goal, false), 100.0);
        assert_eq!(q_step_reward(&hit, false), -10.0);
        assert_eq!(q_step_reward(&moved, false), -1.0);
        assert_eq!(q_step_reward(&moved, true), -100.0);
        assert_eq!(q_step_reward(&hit, true), -100.0);
    }

    #[test]
    fn update_examples() {
        let full = QParams { alpha: 1.0, ..QParams::standard() };
        let mut t = QTable::new();
        t.set(S, GameAction::Right, -37.0);
        t.set(NEXT, GameAction::Up, 55.0);
        q_update(&mut t, S, GameAction::Right, 100.0, NEXT, true, &full);
        assert_eq!(t.get(S, GameAction::Right), 100.0);

        let half = QParams { alpha: 0.5, gamma: 0.9, ..QParams::standard() };
        let mut t = QTable::new();
        t.set(S, GameAction::Right, 4.0);
        t.set(NEXT, GameAction::Down, 10.0);
        t.set(NEXT, GameAction::Left, 3.0);
        q_update(&mut t, S, GameAction::Right, -1.0, NEXT, false, &half);
        assert!((t.get(S, GameAction::Right) - 6.0).abs() < 1e-12);

        let frozen = QParams { alpha: 0.0, ..QParams::standard() };
        let before = t.clone();
        q_update(&mut t, S, GameAction::Right, 1000.0, NEXT, false, &frozen);
        assert_eq!(t, before);
    }

    #[test]
    fn decay_examples() {
        let p = QParams::standard().decayed();
        assert!((p.alpha - 0.99980001).abs() < 1e-15);
        assert_eq!(p.gamma, 0.9);
        assert_eq!(p.alpha_decay, 0.9999);
        let still = QParams { alpha_decay: 1.0, epsilon_decay: 1.0, ..QParams::standard() };
        assert_eq!(still.decayed(), still);
    }

    #[test]
    fn decay_over_full_training() {
        let mut p = QParams::standard();
        for _ in 0..150_000 {
            p = p.decayed();
        }
        let expected = 0.9999f64.powi(150_001);
        assert!((p.alpha - expected).abs() / expected < 1e-9);
        assert!((p.alpha - 3.06e-7).abs() < 0.01e-7);
    }

    #[test]
    fn greedy_and_exploring_distributions() {
        let mut rng = rng_from_seed(4);
        let mut t = QTable::new();
        t.set(S, GameAction::Left, 1.0);
        for _ in 0..100 {
            assert_eq!(epsilon_greedy_action(&t, S, 0.0, &mut rng), GameAction::Left);
        }
        for (table, eps) in [(t.clone(), 1.0), (QTable::new(), 0.0)] {
            let mut counts = [0usize; 4];
            for _ in 0..10_000 {
                let a = epsilon_greedy_action(&table, S, eps, &mut rng);
                counts[GameAction::ALL.iter().position(|x| *x == a).unwrap()] += 1;
            }
            for c in counts {
                assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.02, "{counts:?}");
            }
        }
    }

    #[test]
    fn policy_modes() {
        let mut rng = rng_from_seed(5);
        let mut q = NavAgent::q_learner(1, QParams { epsilon: 1.0, ..QParams::standard() });
        if let NavPolicy::Q { table, .. } = &mut q.policy {
            table.set(S, GameAction::Down, 5.0);
        }
        for _ in 0..50 {
            assert_eq!(nav_policy_action(&q, S, Mode::Frozen, 0, &mut rng), GameAction::Down);
        }
        let explored = (0..400)
            .map(|_| nav_policy_action(&q, S, Mode::Train, 0, &mut rng))
            .filter(|a| *a != GameAction::Down)
            .count();
        assert!(explored > 200);

        let mut ibl = NavAgent::ibl_learner(2, IblParams { noise: 0.0, ..IblParams::standard() });
        if let NavPolicy::Ibl(m) = &mut ibl.policy {
            let t = m.advance_clock();
            m.record_observation(InstanceKey { state: S, action: GameAction::Up, outcome: 90.0 }, t)
                .unwrap();
        }
        let snapshot = ibl.clone();
        let now = ibl.frozen_tick();
        for _ in 0..20 {
            assert_eq!(nav_policy_action(&ibl, S, Mode::Frozen, now, &mut rng), GameAction::Up);
        }
        assert_eq!(ibl, snapshot);
    }
}
