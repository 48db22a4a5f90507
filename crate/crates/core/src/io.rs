//! Run configuration files and the CSV results table.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::engine::RealizationResult;
use crate::error::{Error, Result};
use crate::experiments::{payoff_ratio, CellGroup, GroupSelector, MuGrid, SweepResult, GRID_POINTS};
use crate::forgetting::Strategy;
use crate::model::PayoffMatrix;

/// Column names of every results file, in order.
pub const RESULTS_HEADER: [&str; 8] = [
    "mode",
    "strategy",
    "mu",
    "group",
    "phi_mean",
    "phi_sd",
    "realizations",
    "seed",
];

/// Bumped whenever [`RESULTS_HEADER`] or the meaning of a column changes.
pub const RESULTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Homogeneous,
    Heterogeneous,
    Heatmap,
    Single,
}

impl RunMode {
    pub fn token(self) -> &'static str {
        match self {
            RunMode::Homogeneous => "homogeneous",
            RunMode::Heterogeneous => "heterogeneous",
            RunMode::Heatmap => "heatmap",
            RunMode::Single => "single",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "homogeneous" => Ok(RunMode::Homogeneous),
            "heterogeneous" => Ok(RunMode::Heterogeneous),
            "heatmap" => Ok(RunMode::Heatmap),
            "single" => Ok(RunMode::Single),
            other => Err(format!(
                "unknown mode {other:?} (expected homogeneous, heterogeneous, heatmap or single)"
            )),
        }
    }
}

/// A validated run configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfigFile {
    pub mode: RunMode,
    /// Homogeneous strategy; `None` sweeps all six. In single mode, labels every agent.
    pub strategy: Option<Strategy>,
    pub agents_per_rho: usize,
    pub payoffs: PayoffMatrix,
    pub tau: u32,
    pub realizations: usize,
    pub master_seed: Option<u64>,
    pub mu_list: Vec<f64>,
    /// Memory ratio of a single realization.
    pub mu: Option<f64>,
    /// Population size in single mode.
    pub n_agents: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        RunConfigFile {
            mode: RunMode::Heterogeneous,
            strategy: None,
            agents_per_rho: 6,
            payoffs: PayoffMatrix::default(),
            tau: 30,
            realizations: 50,
            master_seed: None,
            mu_list: MuGrid::values(),
            mu: None,
            n_agents: None,
            output: None,
        }
    }
}

impl RunConfigFile {
    /// Population size implied by the mode.
    pub fn n_agents(&self) -> usize {
        match self.mode {
            RunMode::Homogeneous => GRID_POINTS * self.agents_per_rho,
            RunMode::Heterogeneous | RunMode::Heatmap => GRID_POINTS * Strategy::ALL.len(),
            RunMode::Single => self.n_agents.unwrap_or(GRID_POINTS * Strategy::ALL.len()),
        }
    }

    /// Re-checks every invariant; used after command-line overrides.
    pub fn validate(&self) -> Result<()> {
        self.payoffs
            .validate()
            .map_err(|e| Error::config("payoffs", strip_prefix(&e)))?;
        if self.tau == 0 {
            return Err(Error::config("tau", "must be positive"));
        }
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if self.agents_per_rho == 0 {
            return Err(Error::config("agents_per_rho", "must be at least 1"));
        }
        if self.mu_list.is_empty() {
            return Err(Error::config("mu_list", "must not be empty"));
        }
        if let Some(mu) = self.mu_list.iter().find(|mu| !(0.0..=1.0).contains(*mu)) {
            return Err(Error::config("mu_list", format!("{mu} is outside [0, 1]")));
        }
        if let Some(mu) = self.mu.filter(|mu| !(0.0..=1.0).contains(mu)) {
            return Err(Error::config("mu", format!("{mu} is outside [0, 1]")));
        }
        if let Some(n) = self.n_agents.filter(|&n| n < 2) {
            return Err(Error::config("n", format!("need at least 2 agents, got {n}")));
        }
        Ok(())
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidPayoffs(msg) => msg.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    strategy: Option<String>,
    agents_per_rho: Option<i64>,
    /// `[T, R, P, S]`
    payoffs: Option<Vec<f64>>,
    tau: Option<i64>,
    realizations: Option<i64>,
    master_seed: Option<u64>,
    mu_list: Option<Vec<f64>>,
    mu: Option<f64>,
    n: Option<i64>,
    output: Option<PathBuf>,
}

fn positive(key: &str, v: i64) -> Result<u64> {
    u64::try_from(v)
        .ok()
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::config(key, format!("must be a positive integer, got {v}")))
}

/// Parses a TOML run configuration.
///
/// ```toml
/// mode = "homogeneous"
/// strategy = "FMD"
/// payoffs = [5, 3, 1, 0]   # T, R, P, S
/// realizations = 10
/// master_seed = 42
/// ```
pub fn parse_config(text: &str) -> Result<RunConfigFile> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.message().to_string()))?;
    let mut cfg = RunConfigFile::default();
    if let Some(mode) = raw.mode {
        cfg.mode = mode.parse().map_err(|msg: String| Error::config("mode", msg))?;
    }
    if let Some(s) = raw.strategy {
        cfg.strategy = Some(s.parse().map_err(|e: Error| Error::config("strategy", e.to_string()))?);
    }
    if let Some(v) = raw.agents_per_rho {
        cfg.agents_per_rho = positive("agents_per_rho", v)? as usize;
    }
    if let Some(p) = raw.payoffs {
        let [t, r, pp, s] = p[..] else {
            return Err(Error::config("payoffs", format!("expected 4 numbers [T, R, P, S], got {}", p.len())));
        };
        cfg.payoffs = PayoffMatrix {
            temptation: t,
            reward: r,
            punishment: pp,
            sucker: s,
        };
    }
    if let Some(v) = raw.tau {
        cfg.tau = u32::try_from(positive("tau", v)?).map_err(|_| Error::config("tau", "too large"))?;
    }
    if let Some(v) = raw.realizations {
        cfg.realizations = positive("realizations", v)? as usize;
    }
    cfg.master_seed = raw.master_seed;
    if let Some(list) = raw.mu_list {
        cfg.mu_list = list;
    }
    cfg.mu = raw.mu;
    if let Some(n) = raw.n {
        cfg.n_agents = Some(usize::try_from(n).map_err(|_| Error::config("n", format!("invalid agent count {n}")))?);
    }
    cfg.output = raw.output;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfigFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// One sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub mode: String,
    pub strategy: Strategy,
    pub mu: f64,
    /// `cooperators`, a cooperation probability, or `agent:<id>`.
    pub group: String,
    pub phi_mean: f64,
    pub phi_sd: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

impl From<&SweepResult> for ResultsTable {
    fn from(sweep: &SweepResult) -> Self {
        let rows = sweep
            .cells
            .iter()
            .map(|c| ResultRow {
                mode: sweep.mode.token().to_string(),
                strategy: c.strategy,
                mu: c.mu,
                group: match c.group {
                    CellGroup::Cooperators => "cooperators".to_string(),
                    CellGroup::Rho(rho) => rho.to_string(),
                },
                phi_mean: c.phi.mean,
                phi_sd: c.phi.sd,
                realizations: c.phi.count,
                seed: c.seed,
            })
            .collect();
        ResultsTable { rows }
    }
}

impl ResultsTable {
    /// Per-agent payoff ratios of one realization.
    pub fn from_realization(result: &RealizationResult) -> Result<Self> {
        let rows = result
            .agents
            .iter()
            .map(|a| {
                Ok(ResultRow {
                    mode: RunMode::Single.token().to_string(),
                    strategy: a.spec.strategy,
                    mu: result.config.mu,
                    group: format!("agent:{}", a.spec.id),
                    phi_mean: payoff_ratio(result, GroupSelector::Agent(a.spec.id))?,
                    phi_sd: 0.0,
                    realizations: 1,
                    seed: result.seed(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResultsTable { rows })
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RESULTS_HEADER)?;
        for r in &self.rows {
            // `Display` for f64 is the shortest representation that parses back exactly.
            w.write_record([
                r.mode.clone(),
                r.strategy.token().to_string(),
                r.mu.to_string(),
                r.group.clone(),
                r.phi_mean.to_string(),
                r.phi_sd.to_string(),
                r.realizations.to_string(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `table` as CSV, header first.
pub fn write_results(table: &ResultsTable, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    table.write_to(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_results(path: &Path) -> Result<ResultsTable> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |line: usize, msg: String| Error::Csv {
        path: path.to_path_buf(),
        source: csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("row {line}: {msg}"),
        )),
    };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(bad(0, format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 1;
        let num = |k: usize| rec[k].parse::<f64>().map_err(|e| bad(line, format!("{}: {e}", RESULTS_HEADER[k])));
        rows.push(ResultRow {
            mode: rec[0].to_string(),
            strategy: rec[1].parse().map_err(|e: Error| bad(line, e.to_string()))?,
            mu: num(2)?,
            group: rec[3].to_string(),
            phi_mean: num(4)?,
            phi_sd: num(5)?,
            realizations: rec[6].parse().map_err(|e| bad(line, format!("realizations: {e}")))?,
            seed: rec[7].parse().map_err(|e| bad(line, format!("seed: {e}")))?,
        });
    }
    Ok(ResultsTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_for_heterogeneous() {
        let cfg = parse_config("mode = \"heterogeneous\"").unwrap();
        assert_eq!(cfg.n_agents(), 126);
        assert_eq!(cfg.tau, 30);
        assert_eq!(cfg.realizations, 50);
        assert_eq!(cfg.mu_list, MuGrid::values());
        assert_eq!(cfg.payoffs, PayoffMatrix::default());
        assert_eq!(parse_config("").unwrap().mode, RunMode::Heterogeneous);
    }

    #[test]
    fn full_config() {
        let cfg = parse_config(
            r#"
            mode = "homogeneous"
            strategy = "FMU"
            agents_per_rho = 1
            payoffs = [4, 3, 1, 0]
            tau = 10
            realizations = 3
            master_seed = 9
            mu_list = [0.0, 0.5]
            output = "out.csv"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.strategy, Some(Strategy::FMU));
        assert_eq!(cfg.n_agents(), 21);
        assert_eq!(cfg.payoffs.temptation, 4.0);
        assert_eq!(cfg.master_seed, Some(9));
        assert_eq!(cfg.output.as_deref(), Some(Path::new("out.csv")));
    }

    fn err_of(text: &str) -> String {
        parse_config(text).unwrap_err().to_string()
    }

    #[test]
    fn errors_name_the_key() {
        let e = err_of("payoffs = [5, 3, 1, 4]");
        assert!(e.contains("payoffs") && e.contains("S < P violated"), "{e}");
        let e = err_of("strategy = \"FMX\"");
        assert!(e.contains("strategy") && e.contains("unknown strategy"), "{e}");
        let e = err_of("mu_list = [0.5, 1.5]");
        assert!(e.contains("mu_list"), "{e}");
        let e = err_of("mode = \"weird\"");
        assert!(e.contains("mode"), "{e}");
        let e = err_of("realizations = 0");
        assert!(e.contains("realizations"), "{e}");
        let e = err_of("payoffs = [5, 3]");
        assert!(e.contains("payoffs"), "{e}");
        let e = err_of("colour = 3");
        assert!(e.contains("colour"), "{e}");
    }

    #[test]
    fn csv_round_trip() {
        let table = ResultsTable {
            rows: vec![ResultRow {
                mode: "heatmap".into(),
                strategy: Strategy::FLP,
                mu: 0.15,
                group: "0.55".into(),
                phi_mean: 1.0 / 3.0,
                phi_sd: 0.1 + 0.2,
                realizations: 25,
                seed: u64::MAX,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_results(&table, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("mode,strategy,mu,group,phi_mean,phi_sd,realizations,seed\n"));
        assert_eq!(read_results(&path).unwrap(), table);
    }

    #[test]
    fn unwritable_path_reports_it() {
        let e = write_results(&ResultsTable::default(), Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/dir/x.csv"), "{e}");
    }
}
