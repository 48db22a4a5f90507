//! The `ipd` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engine::{run_realization, EnvironmentConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    build_heterogeneous, build_homogeneous, build_single, heatmap_sweep, heterogeneous_sweep,
    homogeneous_sweep, verify_endpoints, SweepSettings,
};
use crate::forgetting::Strategy;
use crate::io::{load_config, write_results, ResultsTable, RunConfigFile, RunMode};
use crate::model::PayoffMatrix;

/// Directory used for sweep output when `-o` is not given.
pub const OUTPUT_DIR_ENV: &str = "IPD_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ipd", version, about = "Iterated prisoner's dilemma with bounded memory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Average games per pair.
    #[arg(long)]
    tau: Option<u32>,
    /// Payoffs as T,R,P,S.
    #[arg(long, value_parser = parse_payoffs)]
    payoffs: Option<PayoffMatrix>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated memory ratios.
    #[arg(long, value_delimiter = ',')]
    mu_list: Option<Vec<f64>>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// No per-cell progress lines.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single realization and print per-agent payoffs.
    Run {
        #[command(flatten)]
        common: Common,
        /// single, homogeneous or heterogeneous.
        #[arg(long)]
        mode: Option<RunMode>,
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Population size in single mode.
        #[arg(long)]
        n: Option<usize>,
        /// Memory ratio (default 0.5).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        agents_per_rho: Option<usize>,
    },
    /// Sweep the memory ratio and report cooperator payoff ratios.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// homogeneous or heterogeneous.
        #[arg(long)]
        mode: Option<RunMode>,
        /// Homogeneous only: restrict to one strategy.
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        agents_per_rho: Option<usize>,
    },
    /// Per-agent payoff ratios over the heterogeneous memory-ratio sweep.
    Heatmap {
        #[command(flatten)]
        common: Common,
    },
    /// Check that strategy labels are irrelevant at mu = 0 and mu = 1.
    VerifyEndpoints {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_payoffs(s: &str) -> std::result::Result<PayoffMatrix, String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let [t, r, p, s] = v[..] else {
        return Err(format!("expected T,R,P,S, got {} values", v.len()));
    };
    PayoffMatrix::new(t, r, p, s).map_err(|e| e.to_string())
}

fn base_config(common: &Common) -> Result<RunConfigFile> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfigFile::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = Some(seed);
    }
    if let Some(tau) = common.tau {
        cfg.tau = tau;
    }
    if let Some(p) = common.payoffs {
        cfg.payoffs = p;
    }
    if let Some(r) = common.realizations {
        cfg.realizations = r;
    }
    if let Some(list) = &common.mu_list {
        cfg.mu_list = list.clone();
    }
    if let Some(o) = &common.output {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

fn require_seed(cfg: &RunConfigFile) -> Result<u64> {
    cfg.master_seed
        .ok_or_else(|| Error::config("master_seed", "--seed is required (or set master_seed in the config)"))
}

fn settings(cfg: &RunConfigFile, quiet: bool) -> Result<SweepSettings> {
    Ok(SweepSettings {
        realizations: cfg.realizations,
        master_seed: require_seed(cfg)?,
        payoffs: cfg.payoffs,
        tau: cfg.tau,
        mu_list: cfg.mu_list.clone(),
        agents_per_rho: cfg.agents_per_rho,
        strategies: cfg.strategy.map_or_else(|| Strategy::ALL.to_vec(), |s| vec![s]),
        progress: !quiet,
    })
}

/// Explicit path, then `$IPD_OUTPUT_DIR/<mode>.csv`, then stdout.
fn emit(table: &ResultsTable, cfg: &RunConfigFile, out: &mut dyn Write) -> Result<Option<PathBuf>> {
    let path = cfg.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|dir| Path::new(&dir).join(format!("{}.csv", cfg.mode)))
    });
    match path {
        Some(p) => {
            write_results(table, &p)?;
            Ok(Some(p))
        }
        None => {
            table.write_to(&mut *out).map_err(|source| Error::Csv {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            Ok(None)
        }
    }
}

fn stdout_err(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<bool> {
    match command {
        Command::Run {
            common,
            mode,
            strategy,
            n,
            mu,
            agents_per_rho,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.mode = mode.unwrap_or(cfg.mode);
            cfg.strategy = strategy.or(cfg.strategy);
            cfg.n_agents = n.or(cfg.n_agents);
            cfg.mu = mu.or(cfg.mu);
            cfg.agents_per_rho = agents_per_rho.unwrap_or(cfg.agents_per_rho);
            cfg.validate()?;
            let roster = match cfg.mode {
                RunMode::Single => build_single(cfg.n_agents(), cfg.strategy),
                RunMode::Homogeneous => build_homogeneous(cfg.strategy.unwrap_or(Strategy::FR), cfg.agents_per_rho),
                RunMode::Heterogeneous | RunMode::Heatmap => build_heterogeneous(),
            };
            let seed = cfg.master_seed.unwrap_or(0);
            let env = EnvironmentConfig::new(roster, cfg.mu.unwrap_or(0.5), cfg.tau, cfg.payoffs, seed)?;
            let result = run_realization(&env)?;
            writeln!(
                out,
                "rounds: {} (played {}, refused {}); N={} M={} mu={} seed={}",
                result.rounds,
                result.played_rounds,
                result.refused_rounds,
                env.n_agents(),
                env.memory_capacity(),
                env.mu,
                seed
            )
            .map_err(stdout_err)?;
            writeln!(out, "id,rho,strategy,payoff,games_played,rounds_refused,evictions").map_err(stdout_err)?;
            for a in &result.agents {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    a.spec.id, a.spec.rho, a.spec.strategy, a.total_payoff, a.games_played, a.rounds_refused, a.evictions
                )
                .map_err(stdout_err)?;
            }
            if let Some(path) = &cfg.output {
                write_results(&ResultsTable::from_realization(&result)?, path)?;
            }
            Ok(true)
        }
        Command::Sweep {
            common,
            mode,
            strategy,
            agents_per_rho,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.mode = mode.unwrap_or(cfg.mode);
            cfg.strategy = strategy.or(cfg.strategy);
            cfg.agents_per_rho = agents_per_rho.unwrap_or(cfg.agents_per_rho);
            cfg.validate()?;
            let s = settings(&cfg, common.quiet)?;
            let sweep = match cfg.mode {
                RunMode::Homogeneous => homogeneous_sweep(&s)?,
                RunMode::Heterogeneous => heterogeneous_sweep(&s)?,
                RunMode::Heatmap => heatmap_sweep(&s)?,
                RunMode::Single => return Err(Error::config("mode", "sweep needs homogeneous or heterogeneous")),
            };
            if let Some(p) = emit(&ResultsTable::from(&sweep), &cfg, out)? {
                eprintln!("wrote {} rows to {}", sweep.cells.len(), p.display());
            }
            Ok(true)
        }
        Command::Heatmap { common } => {
            let mut cfg = base_config(&common)?;
            cfg.mode = RunMode::Heatmap;
            cfg.validate()?;
            let sweep = heatmap_sweep(&settings(&cfg, common.quiet)?)?;
            if let Some(p) = emit(&ResultsTable::from(&sweep), &cfg, out)? {
                eprintln!("wrote {} rows to {}", sweep.cells.len(), p.display());
            }
            Ok(true)
        }
        Command::VerifyEndpoints { common } => {
            let cfg = base_config(&common)?;
            cfg.validate()?;
            let seed = require_seed(&cfg)?;
            let realizations = common.realizations.unwrap_or(3);
            let report = verify_endpoints(realizations, seed, cfg.tau, cfg.payoffs)?;
            for c in &report.checks {
                writeln!(
                    out,
                    "mu={} labeling={} identical={} evictions={} {}",
                    c.mu,
                    c.labeling,
                    c.identical,
                    c.evictions,
                    if c.passed() { "ok" } else { "MISMATCH" }
                )
                .map_err(stdout_err)?;
            }
            let passed = report.passed();
            writeln!(out, "{}", if passed { "PASS" } else { "FAIL" }).map_err(stdout_err)?;
            Ok(passed)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
