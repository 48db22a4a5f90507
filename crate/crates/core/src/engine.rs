//! Runs realizations: pair scheduling, the refusal protocol, payoffs and
//! memory updates, all driven from one seeded random stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    draw_action, record_outcome, willing_to_play, Action, AgentId, AgentSpec, AgentState,
    PayoffMatrix, Score,
};

/// Random stream used by every realization.
pub type SimRng = ChaCha8Rng;

/// Everything needed to reproduce one realization bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    /// Memory ratio `M / N`.
    pub mu: f64,
    pub payoffs: PayoffMatrix,
    /// Average number of games per pair; the run lasts `C(N, 2) * tau` rounds.
    pub tau: u32,
    /// Agent `k` must have id `k`.
    pub roster: Vec<AgentSpec>,
    pub seed: u64,
}

impl EnvironmentConfig {
    pub fn new(roster: Vec<AgentSpec>, mu: f64, tau: u32, payoffs: PayoffMatrix, seed: u64) -> Result<Self> {
        let config = EnvironmentConfig {
            mu,
            payoffs,
            tau,
            roster,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.payoffs.validate()?;
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidMu(self.mu));
        }
        if self.tau == 0 {
            return Err(Error::InvalidEnvironment("tau must be positive".into()));
        }
        if self.roster.len() < 2 {
            return Err(Error::InvalidEnvironment(format!(
                "need at least 2 agents, got {}",
                self.roster.len()
            )));
        }
        for (k, spec) in self.roster.iter().enumerate() {
            if spec.id != k {
                return Err(Error::InvalidEnvironment(format!(
                    "roster position {k} holds agent id {}",
                    spec.id
                )));
            }
            if !(0.0..=1.0).contains(&spec.rho) {
                return Err(Error::InvalidRho(spec.rho));
            }
        }
        Ok(())
    }

    pub fn n_agents(&self) -> usize {
        self.roster.len()
    }

    /// `round(mu * N)`, halves rounded up.
    pub fn memory_capacity(&self) -> usize {
        memory_capacity(self.mu, self.n_agents())
    }

    pub fn pair_count(&self) -> u64 {
        let n = self.n_agents() as u64;
        n * (n - 1) / 2
    }

    pub fn total_rounds(&self) -> u64 {
        self.pair_count() * u64::from(self.tau)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        EnvironmentConfig {
            seed,
            ..self.clone()
        }
    }
}

pub fn memory_capacity(mu: f64, n_agents: usize) -> usize {
    (mu * n_agents as f64).round() as usize
}

/// Per-agent accumulators at the end of a realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentOutcome {
    pub spec: AgentSpec,
    pub total_payoff: Score,
    pub games_played: u64,
    pub rounds_refused: u64,
    pub evictions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub config: EnvironmentConfig,
    pub agents: Vec<AgentOutcome>,
    pub rounds: u64,
    pub played_rounds: u64,
    pub refused_rounds: u64,
}

impl RealizationResult {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn payoffs(&self) -> Vec<Score> {
        self.agents.iter().map(|a| a.total_payoff).collect()
    }

    pub fn total_evictions(&self) -> u64 {
        self.agents.iter().map(|a| a.evictions).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoundOutcome {
    /// Actions and payoffs, lower agent index first.
    Played {
        actions: (Action, Action),
        payoffs: (Score, Score),
    },
    Refused,
}

/// Plays one round between `i` and `j`.
///
/// The lower index checks willingness first (short-circuiting), draws its
/// action first and updates its memory first.
///
/// # Panics
///
/// If `i == j`.
pub fn play_round(
    agents: &mut [AgentState],
    i: AgentId,
    j: AgentId,
    payoffs: &PayoffMatrix,
    rng: &mut dyn RngCore,
) -> RoundOutcome {
    assert_ne!(i, j, "an agent cannot play itself");
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let (head, tail) = agents.split_at_mut(hi);
    let a = &mut head[lo];
    let b = &mut tail[0];

    if !willing_to_play(a, hi) || !willing_to_play(b, lo) {
        a.rounds_refused += 1;
        b.rounds_refused += 1;
        return RoundOutcome::Refused;
    }

    let act_a = draw_action(a.spec.rho, rng);
    let act_b = draw_action(b.spec.rho, rng);
    let (pay_a, pay_b) = payoffs.outcome(act_a, act_b);
    a.total_payoff += pay_a;
    b.total_payoff += pay_b;
    a.games_played += 1;
    b.games_played += 1;

    let ev_a = a.spec.strategy.evictor();
    record_outcome(a, hi, act_b, ev_a, rng);
    let ev_b = b.spec.strategy.evictor();
    record_outcome(b, lo, act_a, ev_b, rng);

    RoundOutcome::Played {
        actions: (act_a, act_b),
        payoffs: (pay_a, pay_b),
    }
}

/// Unordered pairs `(i, j)`, `i < j`, in lexicographic order.
fn pair_table(n: usize) -> Vec<(u32, u32)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i as u32, j as u32));
        }
    }
    pairs
}

pub fn run_realization(config: &EnvironmentConfig) -> Result<RealizationResult> {
    run_realization_observed(config, |_, _, _, _| {})
}

/// Like [`run_realization`], calling `observe(i, j, outcome, agents)` after every round.
pub fn run_realization_observed(
    config: &EnvironmentConfig,
    mut observe: impl FnMut(AgentId, AgentId, &RoundOutcome, &[AgentState]),
) -> Result<RealizationResult> {
    config.validate()?;
    let capacity = config.memory_capacity();
    let mut agents: Vec<AgentState> = config
        .roster
        .iter()
        .map(|spec| AgentState::new(*spec, capacity))
        .collect();
    let pairs = pair_table(agents.len());
    let mut rng = SimRng::seed_from_u64(config.seed);

    let rounds = config.total_rounds();
    let mut played = 0u64;
    for _ in 0..rounds {
        let (i, j) = pairs[rand::Rng::gen_range(&mut rng, 0..pairs.len())];
        let (i, j) = (i as usize, j as usize);
        let outcome = play_round(&mut agents, i, j, &config.payoffs, &mut rng);
        if matches!(outcome, RoundOutcome::Played { .. }) {
            played += 1;
        }
        observe(i, j, &outcome, &agents);
    }

    Ok(RealizationResult {
        config: config.clone(),
        agents: agents
            .into_iter()
            .map(|a| AgentOutcome {
                spec: a.spec,
                total_payoff: a.total_payoff,
                games_played: a.games_played,
                rounds_refused: a.rounds_refused,
                evictions: a.evictions,
            })
            .collect(),
        rounds,
        played_rounds: played,
        refused_rounds: rounds - played,
    })
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `stream` from `master`.
///
/// `splitmix64(splitmix64(master) ^ stream)`. The SplitMix64 finalizer is a
/// bijection, so distinct streams of one master never collide. Nested keys
/// are derived by chaining: `split_seed(split_seed(m, a), b)`.
pub fn split_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ stream)
}

/// Realization `k` runs under `split_seed(master_seed, k)`; results are in `k` order.
pub fn run_batch(config: &EnvironmentConfig, realizations: usize, master_seed: u64) -> Result<Vec<RealizationResult>> {
    batch_check(realizations)?;
    (0..realizations)
        .into_par_iter()
        .map(|k| run_realization(&config.with_seed(split_seed(master_seed, k as u64))))
        .collect()
}

/// Single-threaded [`run_batch`]; produces identical output.
pub fn run_batch_sequential(
    config: &EnvironmentConfig,
    realizations: usize,
    master_seed: u64,
) -> Result<Vec<RealizationResult>> {
    batch_check(realizations)?;
    (0..realizations)
        .map(|k| run_realization(&config.with_seed(split_seed(master_seed, k as u64))))
        .collect()
}

fn batch_check(realizations: usize) -> Result<()> {
    if realizations == 0 {
        return Err(Error::InvalidEnvironment("need at least one realization".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forgetting::Strategy;
    use crate::model::{MemoryRecord, MemoryStore};

    fn specs(rhos: &[f64]) -> Vec<AgentSpec> {
        rhos.iter()
            .enumerate()
            .map(|(id, &rho)| AgentSpec::new(id, rho, Strategy::FR).unwrap())
            .collect()
    }

    fn states(rhos: &[f64], capacity: usize) -> Vec<AgentState> {
        specs(rhos)
            .into_iter()
            .map(|s| AgentState::new(s, capacity))
            .collect()
    }

    #[test]
    fn two_cooperators_reward_each_other() {
        let mut agents = states(&[1.0, 1.0], 2);
        let mut rng = SimRng::seed_from_u64(0);
        let out = play_round(&mut agents, 0, 1, &PayoffMatrix::default(), &mut rng);
        assert_eq!(
            out,
            RoundOutcome::Played {
                actions: (Action::Cooperate, Action::Cooperate),
                payoffs: (3.0, 3.0)
            }
        );
        for (me, other) in [(0, 1), (1, 0)] {
            assert_eq!(agents[me].total_payoff, 3.0);
            assert_eq!(
                agents[me].memory.get(other),
                Some(&MemoryRecord::first_observation(other, Action::Cooperate))
            );
        }
    }

    #[test]
    fn sucker_and_temptation() {
        let mut agents = states(&[1.0, 0.0], 2);
        let mut rng = SimRng::seed_from_u64(0);
        // Argument order does not matter; lower index acts first.
        play_round(&mut agents, 1, 0, &PayoffMatrix::default(), &mut rng);
        assert_eq!(agents[0].total_payoff, 0.0);
        assert_eq!(agents[1].total_payoff, 5.0);
        let r0 = agents[0].memory.get(1).unwrap();
        assert_eq!((r0.coop_count, r0.defect_count), (0, 1));
        let r1 = agents[1].memory.get(0).unwrap();
        assert_eq!((r1.coop_count, r1.defect_count), (1, 0));
    }

    #[test]
    fn known_defector_is_refused() {
        let mut agents = states(&[1.0, 1.0], 2);
        agents[0].memory = MemoryStore::from_records(
            2,
            [MemoryRecord {
                opponent: 1,
                coop_count: 0,
                defect_count: 1,
            }],
        );
        let before = agents[0].memory.clone();
        let mut rng = SimRng::seed_from_u64(0);
        let untouched = rng.clone();
        let out = play_round(&mut agents, 0, 1, &PayoffMatrix::default(), &mut rng);
        assert_eq!(out, RoundOutcome::Refused);
        assert_eq!(agents[0].memory, before);
        assert!(agents[1].memory.is_empty());
        assert_eq!(agents[0].total_payoff + agents[1].total_payoff, 0.0);
        assert_eq!((agents[0].rounds_refused, agents[1].rounds_refused), (1, 1));
        assert_eq!(rng, untouched, "willingness checks draw nothing");
    }

    #[test]
    #[should_panic(expected = "cannot play itself")]
    fn self_play_panics() {
        let mut agents = states(&[1.0, 1.0], 2);
        let mut rng = SimRng::seed_from_u64(0);
        play_round(&mut agents, 1, 1, &PayoffMatrix::default(), &mut rng);
    }

    #[test]
    fn capacity_rounding() {
        assert_eq!(memory_capacity(0.0, 126), 0);
        assert_eq!(memory_capacity(1.0, 126), 126);
        assert_eq!(memory_capacity(1.0 / 20.0, 126), 6);
        assert_eq!(memory_capacity(5.0 / 20.0, 126), 32); // 31.5 rounds up
        assert_eq!(memory_capacity(15.0 / 20.0, 126), 95); // 94.5
        assert_eq!(memory_capacity(10.0 / 20.0, 21), 11); // 10.5
        assert_eq!(memory_capacity(19.0 / 20.0, 126), 120);
    }

    #[test]
    fn round_counts() {
        let cfg = EnvironmentConfig::new(specs(&[0.5, 0.5]), 0.5, 1, PayoffMatrix::default(), 1).unwrap();
        let res = run_realization(&cfg).unwrap();
        assert_eq!(res.rounds, 1);
        let roster = (0..126).map(|id| AgentSpec::new(id, 0.5, Strategy::FR).unwrap()).collect();
        let cfg = EnvironmentConfig::new(roster, 0.5, 30, PayoffMatrix::default(), 1).unwrap();
        assert_eq!(cfg.total_rounds(), 236_250);
    }

    #[test]
    fn config_validation() {
        let ok = specs(&[0.2, 0.8]);
        let p = PayoffMatrix::default();
        assert!(EnvironmentConfig::new(ok.clone(), 1.5, 1, p, 0).is_err());
        assert!(EnvironmentConfig::new(ok.clone(), 0.5, 0, p, 0).is_err());
        assert!(EnvironmentConfig::new(ok[..1].to_vec(), 0.5, 1, p, 0).is_err());
        let mut shuffled = ok.clone();
        shuffled.swap(0, 1);
        assert!(EnvironmentConfig::new(shuffled, 0.5, 1, p, 0).is_err());
    }

    #[test]
    fn split_seed_is_injective_per_master() {
        let seeds: std::collections::HashSet<_> = (0..10_000).map(|k| split_seed(42, k)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(split_seed(1, 0), split_seed(2, 0));
    }

    #[test]
    fn batch_is_ordered_and_reproducible() {
        let rhos: Vec<f64> = (0..12).map(|k| k as f64 / 11.0).collect();
        let cfg = EnvironmentConfig::new(specs(&rhos), 0.25, 5, PayoffMatrix::default(), 0).unwrap();
        let par = run_batch(&cfg, 6, 99).unwrap();
        let seq = run_batch_sequential(&cfg, 6, 99).unwrap();
        assert_eq!(par, seq);
        for (k, r) in par.iter().enumerate() {
            assert_eq!(r.seed(), split_seed(99, k as u64));
        }
        let single = run_batch(&cfg, 1, 99).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0], par[0]);
        let other = run_batch(&cfg, 6, 100).unwrap();
        assert_ne!(
            par.iter().map(|r| r.payoffs()).collect::<Vec<_>>(),
            other.iter().map(|r| r.payoffs()).collect::<Vec<_>>()
        );
        assert!(run_batch(&cfg, 0, 1).is_err());
    }
}
