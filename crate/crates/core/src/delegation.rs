//! The manager that decides, cell by cell, which navigating agent moves.
//!
//! An IBL manager stores `(cell, agent, game result)` instances only; it
//! never sees the move the delegated agent made.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::{ErrorTag, Position};
use crate::ibl::{IblError, IblMemory, IblParams};

/// Bucket name used in selection statistics for cells without an error tag.
pub const PLAIN_BUCKET: &str = "plain";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ManagerKind {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "ibl")]
    Ibl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ManagerPolicy {
    Random,
    Ibl(IblMemory<Position, usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub state: Position,
    /// 1-based agent index.
    pub chosen: usize,
    pub time: u64,
}

/// Selection counts per `(cell bucket, agent)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectionLog {
    counts: BTreeMap<(String, usize), u64>,
}

impl SelectionLog {
    pub fn bucket(tag: Option<&ErrorTag>) -> String {
        tag.map_or_else(|| PLAIN_BUCKET.to_string(), ErrorTag::label)
    }

    pub fn add(&mut self, bucket: String, agent: usize) {
        *self.counts.entry((bucket, agent)).or_default() += 1;
    }

    pub fn count(&self, bucket: &str, agent: usize) -> u64 {
        self.counts.get(&(bucket.to_string(), agent)).copied().unwrap_or(0)
    }

    pub fn visits(&self, bucket: &str) -> u64 {
        self.counts.iter().filter(|((b, _), _)| b == bucket).map(|(_, c)| *c).sum()
    }

    /// Fraction of visits to `bucket` in which `agent` was chosen.
    pub fn frequency(&self, bucket: &str, agent: usize) -> Option<f64> {
        let visits = self.visits(bucket);
        (visits > 0).then(|| self.count(bucket, agent) as f64 / visits as f64)
    }

    pub fn merge(&mut self, other: &SelectionLog) {
        for ((b, a), c) in &other.counts {
            *self.counts.entry((b.clone(), *a)).or_default() += c;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, u64)> {
        self.counts.iter().map(|((b, a), c)| (b.as_str(), *a, *c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManagerAgent {
    pub team_size: usize,
    pub policy: ManagerPolicy,
    pub selection_log: SelectionLog,
    agents: Vec<usize>,
}

impl ManagerAgent {
    pub fn random(team_size: usize) -> Self {
        Self::with_policy(team_size, ManagerPolicy::Random)
    }

    pub fn ibl(team_size: usize, params: IblParams) -> Self {
        Self::with_policy(team_size, ManagerPolicy::Ibl(IblMemory::new(params)))
    }

    pub fn with_policy(team_size: usize, policy: ManagerPolicy) -> Self {
        assert!(team_size >= 1, "a team needs at least one agent");
        Self {
            team_size,
            policy,
            selection_log: SelectionLog::default(),
            agents: (1..=team_size).collect(),
        }
    }

    pub fn kind(&self) -> ManagerKind {
        match self.policy {
            ManagerPolicy::Random => ManagerKind::Random,
            ManagerPolicy::Ibl(_) => ManagerKind::Ibl,
        }
    }

    pub fn memory(&self) -> Option<&IblMemory<Position, usize>> {
        match &self.policy {
            ManagerPolicy::Ibl(m) => Some(m),
            ManagerPolicy::Random => None,
        }
    }

    pub fn memory_mut(&mut self) -> Option<&mut IblMemory<Position, usize>> {
        match &mut self.policy {
            ManagerPolicy::Ibl(m) => Some(m),
            ManagerPolicy::Random => None,
        }
    }

    /// Tick a frozen manager reads at.
    pub fn read_tick(&self) -> u64 {
        self.memory().map_or(0, IblMemory::read_tick)
    }

    pub fn reset_log(&mut self) {
        self.selection_log = SelectionLog::default();
    }

    /// Chooses the agent that decides the next move from cell `s` and logs
    /// the choice under the cell's error tag. A one-agent team never draws
    /// from `rng`.
    pub fn select<R: Rng + ?Sized>(
        &mut self,
        s: Position,
        tag: Option<&ErrorTag>,
        now: u64,
        rng: &mut R,
    ) -> Result<usize, IblError> {
        let chosen = match &self.policy {
            _ if self.team_size == 1 => 1,
            ManagerPolicy::Random => rng.gen_range(1..=self.team_size),
            ManagerPolicy::Ibl(memory) => memory.choose_best(&s, &self.agents, now, rng)?,
        };
        self.selection_log.add(SelectionLog::bucket(tag), chosen);
        Ok(chosen)
    }

    /// Credits every selection of a finished game with the game result.
    pub fn commit(&mut self, selections: &[SelectionRecord], outcome: f64) -> Result<(), IblError> {
        if let ManagerPolicy::Ibl(memory) = &mut self.policy {
            let steps: Vec<(Position, usize, u64)> =
                selections.iter().map(|r| (r.state, r.chosen, r.time)).collect();
            memory.commit_trajectory(&steps, outcome)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibl::InstanceKey;
    use crate::rng::rng_from_seed;

    const CELL: Position = Position::new(2, 3);

    fn noiseless() -> IblParams {
        IblParams { noise: 0.0, ..IblParams::standard() }
    }

    fn share_of_agent_one(mgr: &mut ManagerAgent, seed: u64) -> f64 {
        let mut rng = rng_from_seed(seed);
        let now = mgr.read_tick();
        let ones = (0..10_000).filter(|_| mgr.select(CELL, None, now, &mut rng).unwrap() == 1).count();
        ones as f64 / 10_000.0
    }

    #[test]
    fn random_manager_is_uniform_and_stateless() {
        let mut mgr = ManagerAgent::random(2);
        let before = mgr.clone();
        let f = share_of_agent_one(&mut mgr, 1);
        assert!((f - 0.5).abs() <= 0.02, "{f}");
        mgr.reset_log();
        assert_eq!(mgr, before);
    }

    #[test]
    fn empty_ibl_manager_ties() {
        let mut mgr = ManagerAgent::ibl(2, noiseless());
        let f = share_of_agent_one(&mut mgr, 2);
        assert!((f - 0.5).abs() <= 0.02, "{f}");
    }

    #[test]
    fn ibl_manager_follows_dominant_outcome() {
        let mut mgr = ManagerAgent::ibl(2, noiseless());
        let m = mgr.memory_mut().unwrap();
        let t = m.advance_clock();
        m.record_observation(InstanceKey { state: CELL, action: 1, outcome: 80.0 }, t).unwrap();
        let t = m.advance_clock();
        m.record_observation(InstanceKey { state: CELL, action: 2, outcome: -250.0 }, t).unwrap();
        assert_eq!(share_of_agent_one(&mut mgr, 3), 1.0);
    }

    #[test]
    fn commit_credits_all_selections() {
        let mut random = ManagerAgent::random(2);
        let before = random.clone();
        random.commit(&[SelectionRecord { state: CELL, chosen: 1, time: 1 }], 5.0).unwrap();
        assert_eq!(random, before);

        let mut mgr = ManagerAgent::ibl(2, noiseless());
        let m = mgr.memory_mut().unwrap();
        let times: Vec<u64> = (0..3).map(|_| m.advance_clock()).collect();
        let sel = [
            SelectionRecord { state: CELL, chosen: 1, time: times[0] },
            SelectionRecord { state: Position::new(0, 0), chosen: 2, time: times[1] },
            SelectionRecord { state: CELL, chosen: 1, time: times[2] },
        ];
        mgr.commit(&sel, -250.0).unwrap();
        let m = mgr.memory().unwrap();
        assert_eq!(m.instance_count(), 2);
        let rec = m.record(&InstanceKey { state: CELL, action: 1, outcome: -250.0 }).unwrap();
        assert_eq!(rec.total_count, 2);
        assert!(m.iter_sorted().iter().all(|(k, _)| k.outcome == -250.0));
    }

    #[test]
    fn log_buckets_by_tag() {
        let mut mgr = ManagerAgent::random(2);
        let mut rng = rng_from_seed(9);
        let e1 = ErrorTag::single(1);
        for _ in 0..100 {
            mgr.select(CELL, Some(&e1), 0, &mut rng).unwrap();
        }
        mgr.select(CELL, None, 0, &mut rng).unwrap();
        assert_eq!(mgr.selection_log.visits("E1"), 100);
        assert_eq!(mgr.selection_log.visits(PLAIN_BUCKET), 1);
        let f1 = mgr.selection_log.frequency("E1", 1).unwrap();
        let f2 = mgr.selection_log.frequency("E1", 2).unwrap();
        assert!((f1 + f2 - 1.0).abs() < 1e-12);
        assert_eq!(mgr.selection_log.frequency("EJ", 1), None);
    }
}
