//! Forgetting strategies: which remembered opponent to drop when a full
//! memory has to make room for a new one.
//!
//! Every policy except `FR` picks an extremum over the records. Keys are
//! compared as exact rationals, so two records with the same smoothed ratio
//! (say `(1, 0)` and `(3, 1)`) are genuinely tied. Ties are broken uniformly
//! at random with a single draw, taken only when more than one record ties.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{AgentId, MemoryRecord, MemoryStore};

/// Chooses the opponent to forget from a non-empty store.
pub type Evictor = fn(&MemoryStore, &mut dyn RngCore) -> AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Forget randomly.
    FR,
    /// Forget most cooperator first.
    FMC,
    /// Forget most defector first.
    FMD,
    /// Forget most unpredictable first.
    FMU,
    /// Forget least played first.
    FLP,
    /// Forget most played first.
    FMP,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::FR,
        Strategy::FMC,
        Strategy::FMD,
        Strategy::FMU,
        Strategy::FLP,
        Strategy::FMP,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Strategy::FR => "FR",
            Strategy::FMC => "FMC",
            Strategy::FMD => "FMD",
            Strategy::FMU => "FMU",
            Strategy::FLP => "FLP",
            Strategy::FMP => "FMP",
        }
    }

    /// Position in [`Strategy::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn evictor(self) -> Evictor {
        evictor_for(self)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.token() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

pub fn evictor_for(strategy: Strategy) -> Evictor {
    match strategy {
        Strategy::FR => evict_fr,
        Strategy::FMC => evict_fmc,
        Strategy::FMD => evict_fmd,
        Strategy::FMU => evict_fmu,
        Strategy::FLP => evict_flp,
        Strategy::FMP => evict_fmp,
    }
}

pub fn evict_fr(memory: &MemoryStore, rng: &mut dyn RngCore) -> AgentId {
    let records = non_empty(memory);
    records[rng.gen_range(0..records.len())].opponent
}

/// Highest perceived cooperation ratio.
pub fn evict_fmc(memory: &MemoryStore, rng: &mut dyn RngCore) -> AgentId {
    select(memory, rng, Extreme::Max, smoothed_ratio)
}

/// Lowest perceived cooperation ratio.
pub fn evict_fmd(memory: &MemoryStore, rng: &mut dyn RngCore) -> AgentId {
    select(memory, rng, Extreme::Min, smoothed_ratio)
}

/// Perceived ratio closest to one half.
pub fn evict_fmu(memory: &MemoryStore, rng: &mut dyn RngCore) -> AgentId {
    select(memory, rng, Extreme::Min, distance_from_half)
}

/// Fewest games played.
pub fn evict_flp(memory: &MemoryStore, rng: &mut dyn RngCore) -> AgentId {
    select(memory, rng, Extreme::Min, MemoryRecord::games)
}

/// Most games played.
pub fn evict_fmp(memory: &MemoryStore, rng: &mut dyn RngCore) -> AgentId {
    select(memory, rng, Extreme::Max, MemoryRecord::games)
}

/// Non-negative rational `num / den` with exact ordering.
#[derive(Debug, Clone, Copy)]
struct Fraction {
    num: u64,
    den: u64,
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

/// `(c + 1) / (c + d + 2)`
fn smoothed_ratio(r: &MemoryRecord) -> Fraction {
    Fraction {
        num: u64::from(r.coop_count) + 1,
        den: r.games() + 2,
    }
}

/// `|t - 1/2|`, which reduces to `|c - d| / (2 (c + d + 2))`.
fn distance_from_half(r: &MemoryRecord) -> Fraction {
    Fraction {
        num: u64::from(r.coop_count.abs_diff(r.defect_count)),
        den: 2 * (r.games() + 2),
    }
}

#[derive(Clone, Copy)]
enum Extreme {
    Min,
    Max,
}

fn non_empty(memory: &MemoryStore) -> &[MemoryRecord] {
    let records = memory.records();
    assert!(!records.is_empty(), "cannot evict from an empty memory");
    records
}

/// Uniform choice among the records attaining the extremal key.
///
/// Two passes over the index-sorted records: find the extremum and count
/// ties, then walk to the drawn tie. No allocation on the hot path.
fn select<K: Ord>(
    memory: &MemoryStore,
    rng: &mut dyn RngCore,
    extreme: Extreme,
    key: impl Fn(&MemoryRecord) -> K,
) -> AgentId {
    let records = non_empty(memory);
    let mut best = key(&records[0]);
    let mut ties = 1usize;
    for rec in &records[1..] {
        let k = key(rec);
        let ord = match extreme {
            Extreme::Max => k.cmp(&best),
            Extreme::Min => best.cmp(&k),
        };
        match ord {
            Ordering::Greater => {
                best = k;
                ties = 1;
            }
            Ordering::Equal => ties += 1,
            Ordering::Less => {}
        }
    }
    let pick = if ties > 1 { rng.gen_range(0..ties) } else { 0 };
    records
        .iter()
        .filter(|r| key(r) == best)
        .nth(pick)
        .expect("tie count is consistent")
        .opponent
}
