//! Environment builders, payoff ratios and the three sweeps (homogeneous
//! curves, heterogeneous curves, per-agent heatmap).

use std::fmt;

use rayon::prelude::*;

use crate::engine::{run_batch, split_seed, EnvironmentConfig, RealizationResult};
use crate::error::{Error, Result};
use crate::forgetting::Strategy;
use crate::model::{AgentId, AgentSpec, PayoffMatrix};

/// Number of points on the cooperation-probability and memory-ratio grids.
pub const GRID_POINTS: usize = 21;

/// Cooperation probabilities `0.05 k`, `k = 0..=20`.
pub struct RhoGrid;

impl RhoGrid {
    pub fn value(k: usize) -> f64 {
        assert!(k < GRID_POINTS, "rho grid index {k} out of range");
        k as f64 / 20.0
    }

    pub fn values() -> Vec<f64> {
        (0..GRID_POINTS).map(Self::value).collect()
    }
}

/// Memory ratios `0.05 m`, `m = 0..=20`.
pub struct MuGrid;

impl MuGrid {
    pub fn value(m: usize) -> f64 {
        assert!(m < GRID_POINTS, "mu grid index {m} out of range");
        m as f64 / 20.0
    }

    pub fn values() -> Vec<f64> {
        (0..GRID_POINTS).map(Self::value).collect()
    }
}

/// A subset of the roster whose payoff ratio is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupSelector {
    All,
    /// Agents with `rho > 0.5`.
    Cooperators,
    /// Agents with `rho > 0.5` using the given strategy.
    CooperatorsOf(Strategy),
    Agent(AgentId),
}

impl GroupSelector {
    pub fn selects(&self, spec: &AgentSpec) -> bool {
        match *self {
            GroupSelector::All => true,
            GroupSelector::Cooperators => spec.is_cooperator(),
            GroupSelector::CooperatorsOf(s) => spec.is_cooperator() && spec.strategy == s,
            GroupSelector::Agent(id) => spec.id == id,
        }
    }
}

/// Group mean payoff over population mean payoff.
pub fn payoff_ratio(result: &RealizationResult, group: GroupSelector) -> Result<f64> {
    let (sum, count) = result
        .agents
        .iter()
        .filter(|a| group.selects(&a.spec))
        .fold((0.0, 0usize), |(s, n), a| (s + a.total_payoff, n + 1));
    if count == 0 {
        return Err(Error::EmptyGroup);
    }
    let population: f64 = result.agents.iter().map(|a| a.total_payoff).sum();
    if population == 0.0 {
        return Err(Error::DegenerateRatio);
    }
    let group_mean = sum / count as f64;
    let population_mean = population / result.agents.len() as f64;
    Ok(group_mean / population_mean)
}

/// Every agent uses `strategy`; each grid `rho` appears `agents_per_rho` times.
pub fn build_homogeneous(strategy: Strategy, agents_per_rho: usize) -> Vec<AgentSpec> {
    assert!(agents_per_rho >= 1, "agents_per_rho must be positive");
    (0..agents_per_rho)
        .flat_map(|_| 0..GRID_POINTS)
        .enumerate()
        .map(|(id, k)| AgentSpec {
            id,
            rho: RhoGrid::value(k),
            strategy,
        })
        .collect()
}

/// One agent per (strategy, rho): 126 agents, strategy-major order.
pub fn build_heterogeneous() -> Vec<AgentSpec> {
    Strategy::ALL
        .into_iter()
        .flat_map(|s| (0..GRID_POINTS).map(move |k| (s, k)))
        .enumerate()
        .map(|(id, (strategy, k))| AgentSpec {
            id,
            rho: RhoGrid::value(k),
            strategy,
        })
        .collect()
}

/// `n` agents cycling through the rho grid; strategies cycle every 21 agents
/// unless `strategy` fixes them. `n = 126` without a strategy is the
/// heterogeneous roster; with one, the homogeneous roster.
pub fn build_single(n: usize, strategy: Option<Strategy>) -> Vec<AgentSpec> {
    (0..n)
        .map(|id| AgentSpec {
            id,
            rho: RhoGrid::value(id % GRID_POINTS),
            strategy: strategy.unwrap_or(Strategy::ALL[(id / GRID_POINTS) % Strategy::ALL.len()]),
        })
        .collect()
}

/// Mean, sample standard deviation and count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        assert!(n > 0, "cannot summarize nothing");
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, sd, count: n }
    }

    pub fn std_error(&self) -> f64 {
        self.sd / (self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepMode {
    Homogeneous,
    Heterogeneous,
    Heatmap,
}

impl SweepMode {
    pub fn token(self) -> &'static str {
        match self {
            SweepMode::Homogeneous => "homogeneous",
            SweepMode::Heterogeneous => "heterogeneous",
            SweepMode::Heatmap => "heatmap",
        }
    }
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// What a sweep cell measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellGroup {
    /// Cooperators (`rho > 0.5`) of the cell's strategy.
    Cooperators,
    /// The single agent with this `rho` and the cell's strategy.
    Rho(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub strategy: Strategy,
    pub mu: f64,
    pub group: CellGroup,
    pub phi: Summary,
    /// Master seed handed to `run_batch` for this cell.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub realizations: usize,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Cooperator cell for `(strategy, mu)`.
    pub fn curve_point(&self, strategy: Strategy, mu: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.mu == mu && c.group == CellGroup::Cooperators)
    }

    pub fn heatmap_cell(&self, strategy: Strategy, mu: f64, rho: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.mu == mu && c.group == CellGroup::Rho(rho))
    }

    /// Distinct memory ratios in first-seen order.
    pub fn mus(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.mu) {
                out.push(c.mu);
            }
        }
        out
    }
}

/// Shared knobs of every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub realizations: usize,
    pub master_seed: u64,
    pub payoffs: PayoffMatrix,
    pub tau: u32,
    pub mu_list: Vec<f64>,
    /// Homogeneous sweeps only.
    pub agents_per_rho: usize,
    /// Homogeneous sweeps only.
    pub strategies: Vec<Strategy>,
    /// Print one line per finished cell to stderr.
    pub progress: bool,
}

impl SweepSettings {
    pub fn new(realizations: usize, master_seed: u64) -> Self {
        SweepSettings {
            realizations,
            master_seed,
            payoffs: PayoffMatrix::default(),
            tau: 30,
            mu_list: MuGrid::values(),
            agents_per_rho: 6,
            strategies: Strategy::ALL.to_vec(),
            progress: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidEnvironment("need at least one realization".into()));
        }
        if let Some(&mu) = self.mu_list.iter().find(|mu| !(0.0..=1.0).contains(*mu)) {
            return Err(Error::InvalidMu(mu));
        }
        self.payoffs.validate()
    }
}

/// Batch seed of a homogeneous cell.
pub fn homogeneous_cell_seed(master: u64, strategy: Strategy, mu: f64) -> u64 {
    split_seed(split_seed(master, strategy.index() as u64), mu.to_bits())
}

/// Batch seed of a heterogeneous environment at `mu`; heterogeneous and
/// heatmap sweeps with the same master seed share realizations.
pub fn heterogeneous_cell_seed(master: u64, mu: f64) -> u64 {
    split_seed(master, mu.to_bits())
}

fn phi_summary(batch: &[RealizationResult], group: GroupSelector) -> Result<Summary> {
    let phis = batch
        .iter()
        .map(|r| payoff_ratio(r, group))
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary::of(&phis))
}

pub fn homogeneous_sweep(settings: &SweepSettings) -> Result<SweepResult> {
    settings.validate()?;
    let jobs: Vec<(Strategy, f64)> = settings
        .strategies
        .iter()
        .flat_map(|&s| settings.mu_list.iter().map(move |&mu| (s, mu)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(strategy, mu)| {
            let seed = homogeneous_cell_seed(settings.master_seed, strategy, mu);
            let roster = build_homogeneous(strategy, settings.agents_per_rho);
            let config = EnvironmentConfig::new(roster, mu, settings.tau, settings.payoffs, seed)?;
            let batch = run_batch(&config, settings.realizations, seed)?;
            let phi = phi_summary(&batch, GroupSelector::Cooperators)?;
            if settings.progress {
                eprintln!("homogeneous {strategy} mu={mu} phi={:.4}", phi.mean);
            }
            Ok(SweepCell {
                strategy,
                mu,
                group: CellGroup::Cooperators,
                phi,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode: SweepMode::Homogeneous,
        realizations: settings.realizations,
        cells,
    })
}

fn heterogeneous_batches(settings: &SweepSettings) -> Result<Vec<(f64, u64, Vec<RealizationResult>)>> {
    settings.validate()?;
    settings
        .mu_list
        .par_iter()
        .map(|&mu| {
            let seed = heterogeneous_cell_seed(settings.master_seed, mu);
            let config = EnvironmentConfig::new(build_heterogeneous(), mu, settings.tau, settings.payoffs, seed)?;
            let batch = run_batch(&config, settings.realizations, seed)?;
            if settings.progress {
                eprintln!("heterogeneous mu={mu} done");
            }
            Ok((mu, seed, batch))
        })
        .collect()
}

/// Cooperator payoff ratio of each strategy against the whole mixed population.
pub fn heterogeneous_sweep(settings: &SweepSettings) -> Result<SweepResult> {
    let mut cells = Vec::new();
    for (mu, seed, batch) in heterogeneous_batches(settings)? {
        for strategy in Strategy::ALL {
            cells.push(SweepCell {
                strategy,
                mu,
                group: CellGroup::Cooperators,
                phi: phi_summary(&batch, GroupSelector::CooperatorsOf(strategy))?,
                seed,
            });
        }
    }
    Ok(SweepResult {
        mode: SweepMode::Heterogeneous,
        realizations: settings.realizations,
        cells,
    })
}

/// Singleton payoff ratio of every agent of the mixed population.
pub fn heatmap_sweep(settings: &SweepSettings) -> Result<SweepResult> {
    let roster = build_heterogeneous();
    let mut cells = Vec::new();
    for (mu, seed, batch) in heterogeneous_batches(settings)? {
        for spec in &roster {
            cells.push(SweepCell {
                strategy: spec.strategy,
                mu,
                group: CellGroup::Rho(spec.rho),
                phi: phi_summary(&batch, GroupSelector::Agent(spec.id))?,
                seed,
            });
        }
    }
    Ok(SweepResult {
        mode: SweepMode::Heatmap,
        realizations: settings.realizations,
        cells,
    })
}

/// One endpoint comparison: a relabelled roster against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointCheck {
    pub mu: f64,
    pub labeling: String,
    /// Per-agent payoff vectors equal the reference in every realization.
    pub identical: bool,
    pub evictions: u64,
}

impl EndpointCheck {
    pub fn passed(&self) -> bool {
        self.identical && self.evictions == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointReport {
    pub checks: Vec<EndpointCheck>,
}

impl EndpointReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(EndpointCheck::passed)
    }
}

/// At `mu = 0` and `mu = 1` nothing is ever forgotten, so strategy labels
/// must not matter. Runs the heterogeneous roster and several relabelings
/// under identical seeds and compares full payoff vectors exactly.
pub fn verify_endpoints(realizations: usize, master_seed: u64, tau: u32, payoffs: PayoffMatrix) -> Result<EndpointReport> {
    let base = build_heterogeneous();
    let mut labelings: Vec<(String, Vec<AgentSpec>)> = vec![("heterogeneous".into(), base.clone())];
    for s in Strategy::ALL {
        let relabeled = base.iter().map(|a| AgentSpec { strategy: s, ..*a }).collect();
        labelings.push((format!("all-{s}"), relabeled));
    }
    let rotated = base
        .iter()
        .map(|a| AgentSpec {
            strategy: Strategy::ALL[(a.strategy.index() + 1) % Strategy::ALL.len()],
            ..*a
        })
        .collect();
    labelings.push(("rotated".into(), rotated));

    let mut checks = Vec::new();
    for mu in [0.0, 1.0] {
        let runs = labelings
            .par_iter()
            .map(|(name, roster)| {
                let config = EnvironmentConfig::new(roster.clone(), mu, tau, payoffs, master_seed)?;
                Ok((name.clone(), run_batch(&config, realizations, master_seed)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference: Vec<Vec<u64>> = runs[0].1.iter().map(payoff_bits).collect();
        for (name, batch) in &runs {
            let bits: Vec<Vec<u64>> = batch.iter().map(payoff_bits).collect();
            checks.push(EndpointCheck {
                mu,
                labeling: name.clone(),
                identical: bits == reference,
                evictions: batch.iter().map(RealizationResult::total_evictions).sum(),
            });
        }
    }
    Ok(EndpointReport { checks })
}

fn payoff_bits(r: &RealizationResult) -> Vec<u64> {
    r.agents.iter().map(|a| a.total_payoff.to_bits()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_realization;

    #[test]
    fn grids() {
        let rho = RhoGrid::values();
        assert_eq!(rho.len(), 21);
        assert_eq!((rho[0], rho[20], rho[10]), (0.0, 1.0, 0.5));
        for w in rho.windows(2) {
            assert!((w[1] - w[0] - 0.05).abs() < 1e-12);
        }
        assert_eq!(MuGrid::values(), rho);
        assert_eq!(rho.iter().filter(|&&r| r > 0.5).count(), 10);
    }

    #[test]
    fn homogeneous_rosters() {
        let r = build_homogeneous(Strategy::FMC, 6);
        assert_eq!(r.len(), 126);
        assert!(r.iter().all(|a| a.strategy == Strategy::FMC));
        for rho in RhoGrid::values() {
            assert_eq!(r.iter().filter(|a| a.rho == rho).count(), 6);
        }
        assert!(r.iter().enumerate().all(|(k, a)| a.id == k));
        assert_eq!(r.iter().filter(|a| a.is_cooperator()).count(), 60);
        assert_eq!(build_homogeneous(Strategy::FR, 1).len(), 21);
    }

    #[test]
    fn single_rosters_cycle() {
        assert_eq!(build_single(126, None), build_heterogeneous());
        assert_eq!(build_single(126, Some(Strategy::FMP)), build_homogeneous(Strategy::FMP, 6));
        let two = build_single(2, None);
        assert_eq!((two[0].rho, two[1].rho), (0.0, 0.05));
    }

    #[test]
    fn heterogeneous_roster() {
        let r = build_heterogeneous();
        assert_eq!(r.len(), 126);
        assert_eq!(r.iter().filter(|a| a.strategy == Strategy::FMD).count(), 21);
        assert_eq!(r.iter().filter(|a| a.rho == 0.5).count(), 6);
        for s in Strategy::ALL {
            let n = r.iter().filter(|a| GroupSelector::CooperatorsOf(s).selects(a)).count();
            assert_eq!(n, 10);
        }
    }

    fn result_with_payoffs(payoffs: &[f64]) -> RealizationResult {
        let roster: Vec<_> = (0..payoffs.len())
            .map(|id| AgentSpec::new(id, id as f64 / payoffs.len() as f64, Strategy::FR).unwrap())
            .collect();
        let cfg = EnvironmentConfig::new(roster, 0.0, 1, PayoffMatrix::default(), 0).unwrap();
        let mut r = run_realization(&cfg).unwrap();
        for (a, &p) in r.agents.iter_mut().zip(payoffs) {
            a.total_payoff = p;
        }
        r
    }

    #[test]
    fn payoff_ratio_examples() {
        let r = result_with_payoffs(&[10.0, 30.0]);
        assert_eq!(payoff_ratio(&r, GroupSelector::All).unwrap(), 1.0);
        assert_eq!(payoff_ratio(&r, GroupSelector::Agent(1)).unwrap(), 1.5);
        assert_eq!(payoff_ratio(&r, GroupSelector::Agent(0)).unwrap(), 0.5);
        assert!(matches!(payoff_ratio(&r, GroupSelector::Agent(7)), Err(Error::EmptyGroup)));
        let zero = result_with_payoffs(&[0.0, 0.0]);
        assert!(matches!(payoff_ratio(&zero, GroupSelector::All), Err(Error::DegenerateRatio)));
    }

    #[test]
    fn partition_ratios_average_to_one() {
        let cfg = EnvironmentConfig::new(build_heterogeneous(), 0.3, 1, PayoffMatrix::default(), 5).unwrap();
        let r = run_realization(&cfg).unwrap();
        let weighted: f64 = Strategy::ALL
            .into_iter()
            .map(|s| {
                let size = r.agents.iter().filter(|a| a.spec.strategy == s).count() as f64;
                let sum: f64 = r
                    .agents
                    .iter()
                    .filter(|a| a.spec.strategy == s)
                    .map(|a| a.total_payoff)
                    .sum();
                let total: f64 = r.payoffs().iter().sum();
                (sum / size) / (total / 126.0) * size
            })
            .sum();
        assert!((weighted / 126.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_stats() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[7.0]).sd, 0.0);
    }

    #[test]
    fn small_sweeps_have_expected_shape() {
        let mut settings = SweepSettings::new(2, 3);
        settings.tau = 1;
        settings.mu_list = vec![0.0, 0.5];
        let homo = homogeneous_sweep(&settings).unwrap();
        assert_eq!(homo.cells.len(), 12);
        let het = heterogeneous_sweep(&settings).unwrap();
        assert_eq!(het.cells.len(), 12);
        let heat = heatmap_sweep(&settings).unwrap();
        assert_eq!(heat.cells.len(), 2 * 126);
        assert!(heat.heatmap_cell(Strategy::FMU, 0.5, 0.95).is_some());
        assert_eq!(homo.mus(), vec![0.0, 0.5]);
        // Shared realizations: the heterogeneous cell seed matches the heatmap's.
        assert_eq!(
            het.curve_point(Strategy::FR, 0.5).unwrap().seed,
            heat.heatmap_cell(Strategy::FR, 0.5, 1.0).unwrap().seed
        );
        settings.mu_list = vec![1.2];
        assert!(homogeneous_sweep(&settings).is_err());
    }
}
