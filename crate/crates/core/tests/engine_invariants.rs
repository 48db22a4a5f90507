use ipd_core::engine::memory_capacity;
use ipd_core::*;

fn observed_run(config: &EnvironmentConfig) -> RealizationResult {
    let capacity = config.memory_capacity();
    let p = config.payoffs;
    let allowed = [2.0 * p.reward, p.sucker + p.temptation, 2.0 * p.punishment];
    let mut played = 0u64;
    let mut refused = 0u64;
    let result = run_realization_observed(config, |i, j, outcome, agents| {
        assert_ne!(i, j);
        match outcome {
            RoundOutcome::Played { payoffs, .. } => {
                played += 1;
                assert!(allowed.contains(&(payoffs.0 + payoffs.1)), "{payoffs:?}");
            }
            RoundOutcome::Refused => refused += 1,
        }
        for k in [i, j] {
            let mem = &agents[k].memory;
            assert!(mem.len() <= capacity);
            assert!(!mem.contains(k));
        }
    })
    .unwrap();
    assert_eq!(played + refused, config.total_rounds());
    assert_eq!(result.played_rounds, played);
    assert_eq!(result.refused_rounds, refused);
    result
}

#[test]
fn heterogeneous_run_respects_invariants() {
    let config = EnvironmentConfig::new(build_heterogeneous(), 0.3, 5, PayoffMatrix::default(), 77).unwrap();
    let r = observed_run(&config);
    let games: u64 = r.agents.iter().map(|a| a.games_played).sum();
    assert_eq!(games % 2, 0);
    assert_eq!(games / 2, r.played_rounds);
    assert!(r.total_evictions() > 0);
    assert!(r.refused_rounds > 0);
}

#[test]
fn custom_payoffs_still_conserve_pair_sums() {
    let payoffs = PayoffMatrix::new(4.0, 3.0, 0.5, -1.0).unwrap();
    let config = EnvironmentConfig::new(build_homogeneous(Strategy::FMU, 1), 0.4, 20, payoffs, 3).unwrap();
    observed_run(&config);
}

#[test]
fn full_cooperators_with_full_memory_never_refuse() {
    let roster: Vec<_> = (0..30).map(|id| AgentSpec::new(id, 1.0, Strategy::FMD).unwrap()).collect();
    let config = EnvironmentConfig::new(roster, 1.0, 10, PayoffMatrix::default(), 5).unwrap();
    let r = observed_run(&config);
    assert_eq!(r.refused_rounds, 0);
    assert_eq!(r.total_evictions(), 0);
    for a in &r.agents {
        assert_eq!(a.total_payoff, 3.0 * a.games_played as f64);
    }
}

#[test]
fn endpoints_never_evict() {
    for mu in [0.0, 1.0] {
        for n in [21, 126] {
            assert!(memory_capacity(mu, n) == 0 || memory_capacity(mu, n) >= n - 1);
        }
        let config = EnvironmentConfig::new(build_heterogeneous(), mu, 5, PayoffMatrix::default(), 9).unwrap();
        assert_eq!(observed_run(&config).total_evictions(), 0);
    }
}

#[test]
fn reruns_are_identical() {
    let config = EnvironmentConfig::new(build_heterogeneous(), 0.55, 5, PayoffMatrix::default(), 1234).unwrap();
    let a = run_realization(&config).unwrap();
    let b = run_realization(&config).unwrap();
    assert_eq!(a, b);
    let bits = |r: &RealizationResult| r.payoffs().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let c = run_realization(&config.with_seed(1235)).unwrap();
    assert_ne!(a.payoffs(), c.payoffs());
}

#[test]
fn sweep_cells_reproduce_from_recorded_seed() {
    let mut s = SweepSettings::new(3, 8);
    s.tau = 3;
    s.mu_list = vec![0.25, 0.8];
    let sweep = homogeneous_sweep(&s).unwrap();
    let table = ResultsTable::from(&sweep);
    for row in &table.rows {
        let config = EnvironmentConfig::new(build_homogeneous(row.strategy, 6), row.mu, s.tau, s.payoffs, row.seed).unwrap();
        let batch = run_batch(&config, row.realizations, row.seed).unwrap();
        let phis: Vec<f64> = batch.iter().map(|r| payoff_ratio(r, GroupSelector::Cooperators).unwrap()).collect();
        let mean = phis.iter().sum::<f64>() / phis.len() as f64;
        assert_eq!(mean.to_bits(), row.phi_mean.to_bits());
    }
}
