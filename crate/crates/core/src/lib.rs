//! Iterated prisoner's dilemma with bounded memory.
//!
//! Agents with fixed cooperation probabilities meet at random, refuse to play
//! opponents they remember as defectors, and, when their memory is full,
//! forget someone according to one of six forgetting strategies.
//!
//! [`engine::run_realization`] runs one environment; the sweeps in
//! [`experiments`] repeat it over the memory-ratio grid and report payoff
//! ratios, which [`io`] writes as CSV.

pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod forgetting;
pub mod io;
pub mod model;

pub use engine::{
    play_round, run_batch, run_batch_sequential, run_realization, run_realization_observed,
    split_seed, EnvironmentConfig,
    RealizationResult, RoundOutcome,
};
pub use error::{Error, Result};
pub use experiments::{
    build_heterogeneous, build_homogeneous, build_single, heatmap_sweep, heterogeneous_sweep,
    homogeneous_sweep, payoff_ratio, verify_endpoints, GroupSelector, MuGrid, RhoGrid, SweepResult,
    SweepSettings,
};
pub use forgetting::{evictor_for, Evictor, Strategy};
pub use io::{parse_config, read_results, write_results, ResultsTable, RunConfigFile, RunMode};
pub use model::{
    classify, draw_action, perceived_ratio, record_outcome, willing_to_play, Action, AgentId,
    AgentSpec, AgentState, MemoryRecord, MemoryStore, PayoffMatrix, Perception,
};
