//! Instance-based learning memory.
//!
//! Instances are `(state, action, outcome)` triples stamped with the ticks at
//! which they were observed. The value of an action in a state is the blend
//! of the outcomes of all matching instances, weighted by a Boltzmann
//! distribution over their activations:
//!
//! ```text
//! A_i = ln( sum_j (now - t_j)^(-d) ) + sigma * ln((1 - xi) / xi)
//! p_i = exp(A_i / tau) / sum_k exp(A_k / tau)
//! V   = sum_i p_i * x_i
//! ```
//!
//! Only the first tick and the `k` most recent ticks of an instance are
//! kept. When an instance has been seen more than `k` times, the decay terms
//! of the forgotten middle observations are approximated analytically,
//! assuming they were spread evenly between the first tick and the oldest
//! retained one.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IblError {
    #[error("observation at tick {time} precedes an earlier observation at tick {latest}")]
    NonMonotoneTime { time: u64, latest: u64 },
    #[error("activation read at tick {now} is not after stored tick {stored}")]
    TimeParadox { now: u64, stored: u64 },
    #[error("retrieval probabilities need at least one activation")]
    EmptyActivations,
    #[error("no candidate actions to choose from")]
    EmptyCandidates,
    #[error("invalid IBL parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IblParams {
    /// Power-law decay exponent `d`.
    pub decay: f64,
    /// Logistic activation noise scale `sigma`.
    pub noise: f64,
    /// Boltzmann temperature `tau`.
    pub temperature: f64,
    /// Number of most recent ticks retained per instance (`k`).
    pub recent_window: usize,
    /// Value of an action with no matching instance.
    pub default_utility: f64,
}

impl IblParams {
    /// `d = 0.5, sigma = 0.25, tau = sigma * sqrt(2), k = 5`.
    pub fn standard() -> Self {
        let noise = 0.25;
        Self {
            decay: 0.5,
            noise,
            temperature: noise * std::f64::consts::SQRT_2,
            recent_window: 5,
            default_utility: 0.0,
        }
    }

    pub fn with_default_utility(mut self, value: f64) -> Self {
        self.default_utility = value;
        self
    }

    pub fn validate(&self) -> Result<(), IblError> {
        let bad = |m: &str| Err(IblError::InvalidParams(m.to_string()));
        if !(self.decay > 0.0 && self.decay.is_finite()) {
            return bad("decay must be > 0");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be >= 0");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be > 0");
        }
        if self.recent_window == 0 {
            return bad("recent_window must be >= 1");
        }
        if !self.default_utility.is_finite() {
            return bad("default_utility must be finite");
        }
        Ok(())
    }
}

impl Default for IblParams {
    fn default() -> Self {
        Self::standard()
    }
}

/// Structural identity of an instance. Outcomes compare by bit pattern.
#[derive(Debug, Clone)]
pub struct InstanceKey<S, A> {
    pub state: S,
    pub action: A,
    pub outcome: f64,
}

impl<S: PartialEq, A: PartialEq> PartialEq for InstanceKey<S, A> {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state
            && self.action == other.action
            && self.outcome.to_bits() == other.outcome.to_bits()
    }
}

impl<S: Eq, A: Eq> Eq for InstanceKey<S, A> {}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRecord {
    pub outcome: f64,
    pub first_time: u64,
    /// Most recent observation ticks, ascending, at most `k` long.
    pub recent_times: VecDeque<u64>,
    pub total_count: u64,
}

impl InstanceRecord {
    fn new(outcome: f64, time: u64) -> Self {
        Self {
            outcome,
            first_time: time,
            recent_times: VecDeque::from([time]),
            total_count: 1,
        }
    }

    fn latest(&self) -> u64 {
        *self.recent_times.back().expect("records hold at least one tick")
    }

    fn observe(&mut self, time: u64, window: usize) -> Result<(), IblError> {
        let latest = self.latest();
        if time < latest {
            return Err(IblError::NonMonotoneTime { time, latest });
        }
        self.recent_times.push_back(time);
        while self.recent_times.len() > window {
            self.recent_times.pop_front();
        }
        self.total_count += 1;
        Ok(())
    }
}

/// Noise-free base-level term `ln(S)` with the bounded-storage approximation.
pub fn base_level(record: &InstanceRecord, now: u64, decay: f64) -> Result<f64, IblError> {
    let latest = record.latest();
    if now <= latest {
        return Err(IblError::TimeParadox { now, stored: latest });
    }
    let mut sum = 0.0;
    for &t in &record.recent_times {
        sum += ((now - t) as f64).powf(-decay);
    }
    let retained = record.recent_times.len() as u64;
    if record.total_count > retained {
        let missing = (record.total_count - retained) as f64;
        let age_first = (now - record.first_time) as f64;
        let age_oldest = (now - record.recent_times[0]) as f64;
        sum += missing * tail_density(age_first, age_oldest, decay);
    }
    Ok(sum.ln())
}

/// Mean of `t^(-d)` over `t` in `[age_oldest, age_first]`.
fn tail_density(age_first: f64, age_oldest: f64, decay: f64) -> f64 {
    let span = age_first - age_oldest;
    if span <= 0.0 {
        return age_first.powf(-decay);
    }
    if decay == 1.0 {
        return (age_first.ln() - age_oldest.ln()) / span;
    }
    let e = 1.0 - decay;
    (age_first.powf(e) - age_oldest.powf(e)) / (e * span)
}

/// Logistic noise `sigma * ln((1 - xi) / xi)`, `xi ~ U(0,1)`. Exactly zero
/// (and no draw) when `sigma == 0`.
pub fn activation_noise<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let xi: f64 = rng.sample(Open01);
    sigma * ((1.0 - xi) / xi).ln()
}

pub fn base_activation<R: Rng + ?Sized>(
    record: &InstanceRecord,
    now: u64,
    params: &IblParams,
    rng: &mut R,
) -> Result<f64, IblError> {
    Ok(base_level(record, now, params.decay)? + activation_noise(params.noise, rng))
}

/// Boltzmann distribution over activations, shifted by the maximum.
pub fn retrieval_probabilities(activations: &[f64], tau: f64) -> Result<Vec<f64>, IblError> {
    if activations.is_empty() {
        return Err(IblError::EmptyActivations);
    }
    let max = activations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = activations.iter().map(|a| ((a - max) / tau).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Instance memory over state tokens `S` and action tokens `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct IblMemory<S: Eq + Hash, A: Eq + Hash> {
    params: IblParams,
    instances: HashMap<(S, A), Vec<InstanceRecord>>,
    clock: u64,
}

impl<S, A> IblMemory<S, A>
where
    S: Clone + Eq + Hash + Ord,
    A: Clone + Eq + Hash + Ord,
{
    pub fn new(params: IblParams) -> Self {
        Self {
            params,
            instances: HashMap::new(),
            clock: 0,
        }
    }

    pub fn params(&self) -> &IblParams {
        &self.params
    }

    /// Current decision tick. Every stored tick is `<=` this value.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Starts a new decision event and returns its tick.
    pub fn advance_clock(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Tick for reads that must not mutate the memory: one past the clock.
    pub fn read_tick(&self) -> u64 {
        self.clock + 1
    }

    pub fn instance_count(&self) -> usize {
        self.instances.values().map(Vec::len).sum()
    }

    pub fn records(&self, state: &S, action: &A) -> &[InstanceRecord] {
        // HashMap::get with a tuple key needs an owned tuple
        self.instances
            .get(&(state.clone(), action.clone()))
            .map_or(&[], Vec::as_slice)
    }

    pub fn record(&self, key: &InstanceKey<S, A>) -> Option<&InstanceRecord> {
        self.records(&key.state, &key.action)
            .iter()
            .find(|r| r.outcome.to_bits() == key.outcome.to_bits())
    }

    /// All instances, ordered by `(state, action)` then insertion order.
    pub fn iter_sorted(&self) -> Vec<(InstanceKey<S, A>, &InstanceRecord)> {
        let mut groups: Vec<_> = self.instances.iter().collect();
        groups.sort_by(|a, b| a.0.cmp(b.0));
        groups
            .into_iter()
            .flat_map(|((s, a), records)| {
                records.iter().map(move |r| {
                    (
                        InstanceKey { state: s.clone(), action: a.clone(), outcome: r.outcome },
                        r,
                    )
                })
            })
            .collect()
    }

    pub fn record_observation(&mut self, key: InstanceKey<S, A>, time: u64) -> Result<(), IblError> {
        let window = self.params.recent_window;
        let records = self.instances.entry((key.state, key.action)).or_default();
        match records.iter_mut().find(|r| r.outcome.to_bits() == key.outcome.to_bits()) {
            Some(r) => r.observe(time, window)?,
            None => records.push(InstanceRecord::new(key.outcome, time)),
        }
        Ok(())
    }

    /// Reinserts a stored record verbatim (snapshot loading).
    pub(crate) fn insert_record(&mut self, state: S, action: A, record: InstanceRecord) {
        self.instances.entry((state, action)).or_default().push(record);
    }

    pub(crate) fn set_clock(&mut self, clock: u64) {
        self.clock = clock;
    }

    /// Blended value of `action` in `state`; `default_utility` when no
    /// instance matches. Draws one noise sample per matching instance.
    pub fn blended_value<R: Rng + ?Sized>(
        &self,
        state: &S,
        action: &A,
        now: u64,
        rng: &mut R,
    ) -> Result<f64, IblError> {
        let records = self.records(state, action);
        if records.is_empty() {
            return Ok(self.params.default_utility);
        }
        if records.len() == 1 {
            // lone softmax weight is exactly one; still validate the tick
            base_level(&records[0], now, self.params.decay)?;
            activation_noise(self.params.noise, rng);
            return Ok(records[0].outcome);
        }
        let activations = records
            .iter()
            .map(|r| base_activation(r, now, &self.params, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let probs = retrieval_probabilities(&activations, self.params.temperature)?;
        Ok(probs.iter().zip(records).map(|(p, r)| p * r.outcome).sum())
    }

    /// Argmax of the blended value over `candidates`, ties broken uniformly.
    /// Values are computed in candidate order from the same stream.
    pub fn choose_best<R: Rng + ?Sized>(
        &self,
        state: &S,
        candidates: &[A],
        now: u64,
        rng: &mut R,
    ) -> Result<A, IblError> {
        match candidates {
            [] => return Err(IblError::EmptyCandidates),
            [only] => return Ok(only.clone()),
            _ => {}
        }
        let values = candidates
            .iter()
            .map(|a| self.blended_value(state, a, now, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
        let pick = if tied.len() == 1 { tied[0] } else { tied[rng.gen_range(0..tied.len())] };
        Ok(candidates[pick].clone())
    }

    /// Credits every step of a finished trajectory with the same outcome, at
    /// the tick the step was decided. The clock is left untouched.
    pub fn commit_trajectory(&mut self, steps: &[(S, A, u64)], outcome: f64) -> Result<(), IblError> {
        for (state, action, time) in steps {
            if *time > self.clock {
                return Err(IblError::NonMonotoneTime { time: *time, latest: self.clock });
            }
            self.record_observation(
                InstanceKey { state: state.clone(), action: action.clone(), outcome },
                *time,
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    type Mem = IblMemory<u32, u32>;

    fn noiseless() -> IblParams {
        IblParams { noise: 0.0, ..IblParams::standard() }
    }

    fn key(s: u32, a: u32, x: f64) -> InstanceKey<u32, u32> {
        InstanceKey { state: s, action: a, outcome: x }
    }

    #[test]
    fn fresh_record() {
        let mut m = Mem::new(noiseless());
        m.record_observation(key(0, 0, 1.0), 5).unwrap();
        let r = m.record(&key(0, 0, 1.0)).unwrap();
        assert_eq!(r.first_time, 5);
        assert_eq!(r.recent_times, VecDeque::from([5]));
        assert_eq!(r.total_count, 1);
    }

    #[test]
    fn eviction_keeps_most_recent() {
        let mut m = Mem::new(noiseless());
        for t in 5..=10 {
            m.record_observation(key(0, 0, 1.0), t).unwrap();
        }
        let r = m.record(&key(0, 0, 1.0)).unwrap();
        assert_eq!(r.total_count, 6);
        assert_eq!(r.recent_times, VecDeque::from([6, 7, 8, 9, 10]));
        assert_eq!(r.first_time, 5);
    }

    #[test]
    fn outcome_is_part_of_identity() {
        let mut m = Mem::new(noiseless());
        m.record_observation(key(0, 0, 1.0), 1).unwrap();
        m.record_observation(key(0, 0, 2.0), 2).unwrap();
        assert_eq!(m.records(&0, &0).len(), 2);
        assert_eq!(m.instance_count(), 2);
    }

    #[test]
    fn non_monotone_time_rejected() {
        let mut m = Mem::new(noiseless());
        m.record_observation(key(0, 0, 1.0), 5).unwrap();
        let err = m.record_observation(key(0, 0, 1.0), 4).unwrap_err();
        assert_eq!(err, IblError::NonMonotoneTime { time: 4, latest: 5 });
    }

    #[test]
    fn activation_single_observation() {
        let mut rng = rng_from_seed(0);
        let r = InstanceRecord::new(0.0, 9);
        let a = base_activation(&r, 10, &noiseless(), &mut rng).unwrap();
        assert_eq!(a, 0.0);
        let r = InstanceRecord::new(0.0, 6);
        let a = base_activation(&r, 10, &noiseless(), &mut rng).unwrap();
        assert!((a + std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn activation_time_paradox() {
        let mut rng = rng_from_seed(0);
        let r = InstanceRecord::new(0.0, 10);
        assert_eq!(
            base_activation(&r, 10, &noiseless(), &mut rng),
            Err(IblError::TimeParadox { now: 10, stored: 10 })
        );
    }

    #[test]
    fn tail_handles_unit_decay_and_equal_ticks() {
        let mut m = Mem::new(IblParams { decay: 1.0, recent_window: 1, ..noiseless() });
        for t in [1, 5, 9] {
            m.record_observation(key(0, 0, 0.0), t).unwrap();
        }
        let r = m.record(&key(0, 0, 0.0)).unwrap();
        let a = base_level(r, 10, 1.0).unwrap();
        // retained tick 9 plus two missing ones spread over ages [1, 9]
        let expected = (1.0 + 2.0 * (9f64.ln() - 1f64.ln()) / 8.0f64).ln();
        assert!((a - expected).abs() < 1e-12);

        let mut m = Mem::new(IblParams { recent_window: 1, ..noiseless() });
        for _ in 0..3 {
            m.record_observation(key(0, 0, 0.0), 4).unwrap();
        }
        let r = m.record(&key(0, 0, 0.0)).unwrap();
        let a = base_level(r, 8, 0.5).unwrap();
        assert!((a - (3.0 * 4f64.powf(-0.5)).ln()).abs() < 1e-12);
    }

    #[test]
    fn probabilities() {
        assert_eq!(retrieval_probabilities(&[], 1.0), Err(IblError::EmptyActivations));
        let p = retrieval_probabilities(&[0.3, 0.3, 0.3], 0.5).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = retrieval_probabilities(&[0.0, 1.0], 0.01).unwrap();
        assert!(p[1] >= 1.0 - 1e-9);
        let p = retrieval_probabilities(&[1e6, -1e6], 0.1).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));

        // two-term logistic: p1 = 1 / (1 + exp(-0.346574 / 0.353553))
        let p = retrieval_probabilities(&[-0.346574, 0.0], 0.353553).unwrap();
        let p1 = 1.0 / (1.0 + (-0.346574f64 / 0.353553).exp());
        assert!((p[1] - p1).abs() < 1e-12 && (p[1] - 0.727160).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn blended_two_instances_at_different_ages() {
        let mut m = Mem::new(noiseless());
        m.record_observation(key(0, 0, 0.0), 1).unwrap();
        m.record_observation(key(0, 0, 10.0), 2).unwrap();
        let tau = 0.25 * 2f64.sqrt();
        let w_old = (0.5f64.sqrt().ln() / tau).exp();
        let expected = 10.0 / (1.0 + w_old);
        let v = m.blended_value(&0, &0, 3, &mut rng_from_seed(0)).unwrap();
        assert!((v - expected).abs() < 1e-12 && (v - 7.271594).abs() < 1e-6, "{v}");
    }

    #[test]
    fn blended_single_and_symmetric() {
        let mut rng = rng_from_seed(1);
        let mut m = Mem::new(IblParams::standard());
        m.record_observation(key(0, 0, 5.0), 1).unwrap();
        m.advance_clock();
        m.advance_clock();
        assert_eq!(m.blended_value(&0, &0, 3, &mut rng).unwrap(), 5.0);

        let mut m = Mem::new(noiseless());
        m.record_observation(key(0, 0, 0.0), 3).unwrap();
        m.record_observation(key(0, 0, 10.0), 3).unwrap();
        assert!((m.blended_value(&0, &0, 7, &mut rng).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(m.blended_value(&0, &1, 7, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn choose_best_cases() {
        let mut rng = rng_from_seed(2);
        let mut m = Mem::new(noiseless());
        assert_eq!(m.choose_best(&0, &[], 1, &mut rng), Err(IblError::EmptyCandidates));
        assert_eq!(m.choose_best(&0, &[7], 1, &mut rng), Ok(7));
        m.record_observation(key(0, 1, 80.0), 1).unwrap();
        m.record_observation(key(0, 2, -250.0), 2).unwrap();
        for _ in 0..20 {
            assert_eq!(m.choose_best(&0, &[1, 2], 3, &mut rng), Ok(1));
        }
    }

    #[test]
    fn empty_memory_tie_break_is_uniform() {
        let mut rng = rng_from_seed(3);
        let m = Mem::new(noiseless());
        let picks = (0..10_000).filter(|_| m.choose_best(&0, &[1, 2], 1, &mut rng).unwrap() == 1).count();
        let freq = picks as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "freq {freq}");
    }

    #[test]
    fn commit_trajectory_credits_uniformly() {
        let mut m = Mem::new(noiseless());
        m.commit_trajectory(&[], 1.0).unwrap();
        assert_eq!(m.instance_count(), 0);
        let steps: Vec<_> = (0..3).map(|i| (i, 0, m.advance_clock())).collect();
        m.commit_trajectory(&steps, 77.0).unwrap();
        assert_eq!(m.instance_count(), 3);
        assert!(m.iter_sorted().iter().all(|(k, _)| k.outcome == 77.0));
        assert_eq!(m.clock(), 3);

        let mut m = Mem::new(noiseless());
        let t1 = m.advance_clock();
        let t2 = m.advance_clock();
        m.commit_trajectory(&[(4, 1, t1), (4, 1, t2)], -250.0).unwrap();
        let r = m.record(&key(4, 1, -250.0)).unwrap();
        assert_eq!(r.total_count, 2);
        assert_eq!(r.recent_times, VecDeque::from([1, 2]));
    }

    #[test]
    fn commit_rejects_future_ticks() {
        let mut m = Mem::new(noiseless());
        assert!(m.commit_trajectory(&[(0, 0, 1)], 1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(IblParams::standard().validate().is_ok());
        assert!(IblParams { decay: 0.0, ..IblParams::standard() }.validate().is_err());
        assert!(IblParams { recent_window: 0, ..IblParams::standard() }.validate().is_err());
        assert!(IblParams { temperature: 0.0, ..IblParams::standard() }.validate().is_err());
        assert!(IblParams { noise: -1.0, ..IblParams::standard() }.validate().is_err());
    }
}
