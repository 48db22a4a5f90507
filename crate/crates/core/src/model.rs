//! Domain types and the pure perception/decision rules agents use.
//!
//! An agent remembers, per opponent, how often that opponent cooperated and
//! defected against it. From those two counters it derives a smoothed
//! cooperation ratio, and refuses to play anyone it perceives as a defector.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forgetting::{Evictor, Strategy};

/// Index of an agent within its environment (`0..N`).
pub type AgentId = usize;

/// Dimensionless payoff units.
pub type Score = f64;

/// The four prisoner's dilemma payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub temptation: Score,
    pub reward: Score,
    pub punishment: Score,
    pub sucker: Score,
}

impl Default for PayoffMatrix {
    /// T=5, R=3, P=1, S=0.
    fn default() -> Self {
        PayoffMatrix {
            temptation: 5.0,
            reward: 3.0,
            punishment: 1.0,
            sucker: 0.0,
        }
    }
}

impl PayoffMatrix {
    /// Builds a matrix, rejecting anything that is not a prisoner's dilemma.
    pub fn new(temptation: Score, reward: Score, punishment: Score, sucker: Score) -> Result<Self> {
        let m = PayoffMatrix {
            temptation,
            reward,
            punishment,
            sucker,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks `S < P < R < T` and `S + T < 2R`.
    pub fn validate(&self) -> Result<()> {
        let PayoffMatrix {
            temptation: t,
            reward: r,
            punishment: p,
            sucker: s,
        } = *self;
        if ![t, r, p, s].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPayoffs("payoffs must be finite".into()));
        }
        if s >= p {
            return Err(Error::InvalidPayoffs("S < P violated".into()));
        }
        if p >= r {
            return Err(Error::InvalidPayoffs("P < R violated".into()));
        }
        if r >= t {
            return Err(Error::InvalidPayoffs("R < T violated".into()));
        }
        if s + t >= 2.0 * r {
            return Err(Error::InvalidPayoffs("S + T < 2R violated".into()));
        }
        Ok(())
    }

    /// Payoffs `(first, second)` for one game.
    pub fn outcome(&self, first: Action, second: Action) -> (Score, Score) {
        use Action::*;
        match (first, second) {
            (Cooperate, Cooperate) => (self.reward, self.reward),
            (Cooperate, Defect) => (self.sucker, self.temptation),
            (Defect, Cooperate) => (self.temptation, self.sucker),
            (Defect, Defect) => (self.punishment, self.punishment),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Cooperate,
    Defect,
}

/// How an agent sees an opponent it remembers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Perception {
    Cooperator,
    Defector,
}

/// Fixed identity of an agent for the length of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: AgentId,
    pub rho: f64,
    pub strategy: Strategy,
}

impl AgentSpec {
    pub fn new(id: AgentId, rho: f64, strategy: Strategy) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidRho(rho));
        }
        Ok(AgentSpec { id, rho, strategy })
    }

    /// Strictly above one half; an agent with `rho == 0.5` is not a cooperator.
    pub fn is_cooperator(&self) -> bool {
        self.rho > 0.5
    }
}

/// What an agent remembers about one opponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoryRecord {
    pub opponent: AgentId,
    /// Times the opponent cooperated against the owner.
    pub coop_count: u32,
    /// Times the opponent defected against the owner.
    pub defect_count: u32,
}

impl MemoryRecord {
    /// A record holding exactly one observation.
    pub fn first_observation(opponent: AgentId, action: Action) -> Self {
        let mut rec = MemoryRecord {
            opponent,
            coop_count: 0,
            defect_count: 0,
        };
        rec.observe(action);
        rec
    }

    pub fn observe(&mut self, action: Action) {
        match action {
            Action::Cooperate => self.coop_count += 1,
            Action::Defect => self.defect_count += 1,
        }
    }

    pub fn games(&self) -> u64 {
        u64::from(self.coop_count) + u64::from(self.defect_count)
    }

    pub fn perceived_ratio(&self) -> f64 {
        perceived_ratio(self.coop_count, self.defect_count)
    }

    pub fn perception(&self) -> Perception {
        classify(self.perceived_ratio())
    }
}

/// Per-opponent records under a hard capacity.
///
/// Records are kept sorted by opponent index, so iteration order (and
/// therefore any tie-breaking that depends on it) is platform independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryStore {
    capacity: usize,
    records: Vec<MemoryRecord>,
}

impl MemoryStore {
    pub fn new(capacity: usize) -> Self {
        MemoryStore {
            capacity,
            records: Vec::with_capacity(capacity.min(1024)),
        }
    }

    /// Builds a store from explicit records.
    ///
    /// # Panics
    ///
    /// If there are more records than `capacity`, two records share an
    /// opponent, or a record holds no observations.
    pub fn from_records(capacity: usize, records: impl IntoIterator<Item = MemoryRecord>) -> Self {
        let mut store = MemoryStore::new(capacity);
        for rec in records {
            assert!(rec.games() > 0, "record for {} holds no games", rec.opponent);
            assert!(!store.is_full(), "more records than capacity {capacity}");
            match store.position(rec.opponent) {
                Ok(_) => panic!("duplicate record for opponent {}", rec.opponent),
                Err(at) => store.records.insert(at, rec),
            }
        }
        store
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.records.len() >= self.capacity
    }

    /// Records in ascending opponent order.
    pub fn records(&self) -> &[MemoryRecord] {
        &self.records
    }

    pub fn get(&self, opponent: AgentId) -> Option<&MemoryRecord> {
        self.position(opponent).ok().map(|i| &self.records[i])
    }

    pub fn contains(&self, opponent: AgentId) -> bool {
        self.position(opponent).is_ok()
    }

    pub fn remove(&mut self, opponent: AgentId) -> Option<MemoryRecord> {
        self.position(opponent).ok().map(|i| self.records.remove(i))
    }

    fn position(&self, opponent: AgentId) -> std::result::Result<usize, usize> {
        self.records.binary_search_by_key(&opponent, |r| r.opponent)
    }
}

/// Mutable per-realization state of one agent.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub spec: AgentSpec,
    pub memory: MemoryStore,
    pub total_payoff: Score,
    pub games_played: u64,
    pub rounds_refused: u64,
    /// Number of times this agent's forgetting strategy was invoked.
    pub evictions: u64,
}

impl AgentState {
    pub fn new(spec: AgentSpec, capacity: usize) -> Self {
        AgentState {
            spec,
            memory: MemoryStore::new(capacity),
            total_payoff: 0.0,
            games_played: 0,
            rounds_refused: 0,
            evictions: 0,
        }
    }

    pub fn id(&self) -> AgentId {
        self.spec.id
    }
}

/// Laplace-smoothed cooperation ratio `(c + 1) / (c + d + 2)`.
pub fn perceived_ratio(coop_count: u32, defect_count: u32) -> f64 {
    let c = f64::from(coop_count);
    let d = f64::from(defect_count);
    (c + 1.0) / (c + d + 2.0)
}

/// Cooperator iff `t > 0.5`.
pub fn classify(t: f64) -> Perception {
    if t > 0.5 {
        Perception::Cooperator
    } else {
        Perception::Defector
    }
}

/// One uniform draw `u` in `[0, 1)`; cooperate iff `u < rho`.
pub fn draw_action<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Action {
    let u: f64 = rng.gen();
    if u < rho {
        Action::Cooperate
    } else {
        Action::Defect
    }
}

/// Unknown opponents are always played; known ones only if perceived as cooperators.
pub fn willing_to_play(agent: &AgentState, opponent: AgentId) -> bool {
    debug_assert_ne!(agent.id(), opponent, "agent cannot face itself");
    match agent.memory.get(opponent) {
        None => true,
        Some(rec) => rec.perception() == Perception::Cooperator,
    }
}

/// Stores what `opponent` did in a game just played.
///
/// Returns the opponent that was forgotten to make room, if any. With zero
/// capacity nothing is ever stored.
///
/// # Panics
///
/// If `evictor` names an opponent that is not in memory.
pub fn record_outcome(
    agent: &mut AgentState,
    opponent: AgentId,
    opponent_action: Action,
    evictor: Evictor,
    rng: &mut dyn RngCore,
) -> Option<AgentId> {
    assert_ne!(agent.id(), opponent, "agent cannot remember itself");
    let memory = &mut agent.memory;
    match memory.position(opponent) {
        Ok(i) => {
            memory.records[i].observe(opponent_action);
            None
        }
        Err(_) if memory.capacity == 0 => None,
        Err(mut at) => {
            let mut evicted = None;
            if memory.is_full() {
                let victim = evictor(memory, rng);
                let removed = memory.remove(victim);
                assert!(
                    removed.is_some(),
                    "evictor chose opponent {victim}, which is not in memory"
                );
                agent.evictions += 1;
                evicted = Some(victim);
                if victim < opponent {
                    at -= 1;
                }
            }
            agent
                .memory
                .records
                .insert(at, MemoryRecord::first_observation(opponent, opponent_action));
            evicted
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Cooperate => "C",
            Action::Defect => "D",
        })
    }
}
