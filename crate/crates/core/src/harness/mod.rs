//! Configuration-driven experiment runner.
//!
//! Every sample gets its own seed derived from `(seed, n, k, sample)`, so the
//! output does not depend on thread scheduling and identical configs give
//! byte-identical files.

pub mod cli;
pub mod output;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    derive_seed, haar_random_state, random_linear_chain, random_physical_circuit, random_symmetric_state,
    RngStream, Topology,
};
use crate::error::{Error, Result};
use crate::extremal::{eta_bound, min_eta, xi_geometric_analytic, xi_macroscopicity_analytic, BoundMode};
use crate::geometric::{geometric_entanglement, geometric_entanglement_symmetric, GeomConfig, GeomResult};
use crate::limits::check_dense;
use crate::macroscopicity::{
    macroscopicity_bracket, macroscopicity_exact, macroscopicity_symmetric, MacroResult, OptimizerConfig,
};
use crate::states::{PureState, SymmetricState};

pub use output::{BoundRow, Format, SampleRow, StatRecord, XiRow};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_EXACT_MAX_N: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NamedState,
    XiScan,
    EtaBounds,
    PhysicalScan,
    ChainScan,
    HaarScan,
    SymmetricScan,
}

impl ExperimentKind {
    fn label(self) -> &'static str {
        match self {
            ExperimentKind::NamedState => "named",
            ExperimentKind::XiScan => "xi",
            ExperimentKind::EtaBounds => "bounds",
            ExperimentKind::PhysicalScan => "physical",
            ExperimentKind::ChainScan => "chain",
            ExperimentKind::HaarScan => "haar",
            ExperimentKind::SymmetricScan => "symmetric",
        }
    }
}

/// Gate counts: an explicit list or powers of `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSchedule {
    List(Vec<usize>),
    PowersOfN { powers_of_n: Vec<u32> },
}

impl Default for KSchedule {
    fn default() -> Self {
        KSchedule::List(vec![0])
    }
}

impl KSchedule {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            KSchedule::List(ks) => Ok(ks.clone()),
            KSchedule::PowersOfN { powers_of_n } => powers_of_n
                .iter()
                .map(|&p| {
                    n.checked_pow(p)
                        .ok_or_else(|| Error::config("k_values", format!("{n}^{p} overflows")))
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    #[default]
    Ring,
    AllToAll,
}

impl From<TopologyName> for Topology {
    fn from(t: TopologyName) -> Self {
        match t {
            TopologyName::Ring => Topology::Ring,
            TopologyName::AllToAll => Topology::AllToAll,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Ghz,
    W,
    Dicke,
    BellProduct,
    Xi,
    GhzOnes,
    Product,
}

impl StateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Ghz => "ghz",
            StateKind::W => "w",
            StateKind::Dicke => "dicke",
            StateKind::BellProduct => "bell-product",
            StateKind::Xi => "xi",
            StateKind::GhzOnes => "ghz-ones",
            StateKind::Product => "product",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedStateSpec {
    pub kind: StateKind,
    pub n: usize,
    /// Number of trailing `|1⟩` sites for `ghz-ones`.
    #[serde(default)]
    pub n2: Option<usize>,
    /// Excitation number for `dicke`.
    #[serde(default)]
    pub j: Option<usize>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

/// A named state in whichever representation its measures use.
pub enum Named {
    Dense(PureState),
    Symmetric(SymmetricState),
}

impl NamedStateSpec {
    pub fn build(&self) -> Result<Named> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::config(format!("state.{name}"), format!("required for kind {}", self.kind.as_str())))
        };
        let n = self.n;
        Ok(match self.kind {
            StateKind::Ghz => Named::Symmetric(SymmetricState::ghz(n)?),
            StateKind::W => Named::Symmetric(SymmetricState::dicke(n, 1)?),
            StateKind::Dicke => {
                let j = self.j.ok_or_else(|| Error::config("state.j", "required for kind dicke"))?;
                Named::Symmetric(SymmetricState::dicke(n, j)?)
            }
            StateKind::Xi => Named::Symmetric(SymmetricState::xi_state(
                n,
                need(self.theta, "theta")?,
                need(self.epsilon, "epsilon")?,
            )?),
            StateKind::Product => Named::Symmetric(SymmetricState::dicke(n, 0)?),
            StateKind::BellProduct => Named::Dense(PureState::bell_product(n)?),
            StateKind::GhzOnes => {
                let n2 = self.n2.ok_or_else(|| Error::config("state.n2", "required for kind ghz-ones"))?;
                Named::Dense(PureState::ghz_with_ones(n, n2)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    /// Random starts for the macroscopicity optimizer; `None` uses its default.
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Random starts for the closest-product search; `None` uses its default.
    #[serde(default)]
    pub geom_restarts: Option<usize>,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: None,
            tol: default_tol(),
            geom_restarts: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub k_values: KSchedule,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    /// Dense states up to this size get the exact optimizer; larger ones only the bracket.
    #[serde(default = "default_exact_max_n")]
    pub exact_max_n: usize,
    #[serde(default = "default_true")]
    pub compute_e_g: bool,
    #[serde(default)]
    pub topology: TopologyName,
    /// Required for `named-state`.
    #[serde(default)]
    pub state: Option<NamedStateSpec>,
    /// Points per axis for `xi-scan`, points per curve for `eta-bounds`.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Modes for `eta-bounds`; empty means both.
    #[serde(default)]
    pub modes: Vec<BoundMode>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

fn default_samples() -> usize {
    1
}

fn default_exact_max_n() -> usize {
    DEFAULT_EXACT_MAX_N
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            n_values: Vec::new(),
            k_values: KSchedule::default(),
            samples: 1,
            seed: 0,
            optimizer: OptimizerSettings::default(),
            exact_max_n: DEFAULT_EXACT_MAX_N,
            compute_e_g: true,
            topology: TopologyName::Ring,
            state: None,
            grid: None,
            modes: Vec::new(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names the offending field between backticks
            let field = msg.split('`').nth(1).unwrap_or("<document>").to_string();
            Error::config(field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if !(self.optimizer.tol > 0.0) {
            return Err(Error::config("optimizer.tol", "must be positive"));
        }
        use ExperimentKind::*;
        match self.experiment {
            NamedState => {
                let s = self.state.as_ref().ok_or_else(|| Error::config("state", "required for named-state"))?;
                s.build()?;
                return Ok(());
            }
            XiScan | EtaBounds => {
                if self.grid.is_some_and(|g| g < 2) {
                    return Err(Error::config("grid", "needs at least 2 points"));
                }
            }
            _ => {}
        }
        if self.n_values.is_empty() {
            return Err(Error::config("n_values", "must not be empty"));
        }
        for &n in &self.n_values {
            if n < 2 {
                return Err(Error::config("n_values", format!("n = {n} is below 2")));
            }
            if matches!(self.experiment, PhysicalScan | ChainScan | HaarScan) {
                check_dense(n)?;
            }
            if self.experiment == ChainScan {
                for k in self.k_values.resolve(n)? {
                    if k > n - 1 {
                        return Err(Error::config(
                            "k_values",
                            format!("k = {k} exceeds the {} pairs of a chain with n = {n}", n - 1),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn optimizer_config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            random_starts: self.optimizer.restarts,
            tol: self.optimizer.tol,
            seed,
            ..OptimizerConfig::default()
        }
    }

    fn geom_config(&self, seed: u64) -> GeomConfig {
        GeomConfig {
            random_starts: self.optimizer.geom_restarts,
            seed,
            ..GeomConfig::default()
        }
    }
}

/// Per-sample seed for cell `(n, k)` and sample index.
pub fn sample_seed(seed: u64, n: usize, k: usize, sample: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(seed, n as u64), k as u64), sample as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentOutput {
    Samples { rows: Vec<SampleRow>, summary: Vec<StatRecord> },
    Xi(Vec<XiRow>),
    Bounds(Vec<BoundRow>),
}

impl ExperimentOutput {
    /// Writes the rows to `path`; sample experiments also write
    /// `<stem>_summary.<ext>` next to it.
    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        match self {
            ExperimentOutput::Samples { rows, summary } => {
                output::emit(rows, format, path)?;
                output::emit(summary, format, &summary_path(path))
            }
            ExperimentOutput::Xi(rows) => output::emit(rows, format, path),
            ExperimentOutput::Bounds(rows) => output::emit(rows, format, path),
        }
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        match self {
            ExperimentOutput::Samples { rows, .. } => output::to_string(rows, format),
            ExperimentOutput::Xi(rows) => output::to_string(rows, format),
            ExperimentOutput::Bounds(rows) => output::to_string(rows, format),
        }
    }
}

pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_summary.{ext}"),
        None => format!("{stem}_summary"),
    };
    path.with_file_name(name)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    use ExperimentKind::*;
    match cfg.experiment {
        XiScan => xi_scan(cfg).map(ExperimentOutput::Xi),
        EtaBounds => eta_bounds(cfg).map(ExperimentOutput::Bounds),
        NamedState => {
            let spec = cfg.state.as_ref().expect("validated");
            let row = named_row(spec, cfg)?;
            let summary = summarize(std::slice::from_ref(&row));
            Ok(ExperimentOutput::Samples { rows: vec![row], summary })
        }
        PhysicalScan | ChainScan | HaarScan | SymmetricScan => {
            let mut cells = Vec::new();
            for &n in &cfg.n_values {
                let ks = match cfg.experiment {
                    HaarScan | SymmetricScan => vec![0],
                    _ => cfg.k_values.resolve(n)?,
                };
                for k in ks {
                    for s in 0..cfg.samples {
                        cells.push((n, k, s));
                    }
                }
            }
            let mut rows = cells
                .into_par_iter()
                .map(|(n, k, s)| ensemble_row(cfg, n, k, s))
                .collect::<Result<Vec<_>>>()?;
            rows.sort_by_key(|r| (r.n, r.k, r.sample));
            let summary = summarize(&rows);
            Ok(ExperimentOutput::Samples { rows, summary })
        }
    }
}

fn make_row(
    ensemble: &str,
    (n, k, sample, seed): (usize, usize, usize, u64),
    m: &MacroResult,
    g: Option<&GeomResult>,
) -> SampleRow {
    SampleRow {
        ensemble: ensemble.to_string(),
        n,
        k,
        sample,
        seed,
        m_tilde_lower: m.lower_bound,
        m_tilde_upper: m.upper_bound,
        m_tilde: m.m_tilde,
        m_norm: m.m_norm,
        n_m_norm: n as f64 * m.m_norm,
        e_g: g.map(|g| g.e_g),
        opt_converged: m.optimizer_stats.converged,
        eg_converged: g.is_some_and(|g| g.converged),
    }
}

fn dense_measures(cfg: &ExperimentConfig, state: &PureState, seed: u64) -> Result<(MacroResult, Option<GeomResult>)> {
    let m = if state.n_qubits() <= cfg.exact_max_n {
        macroscopicity_exact(state, &cfg.optimizer_config(derive_seed(seed, 1)))?
    } else {
        macroscopicity_bracket(state)?
    };
    let g = if cfg.compute_e_g {
        Some(geometric_entanglement(state, &cfg.geom_config(derive_seed(seed, 2)))?)
    } else {
        None
    };
    Ok((m, g))
}

fn symmetric_measures(
    cfg: &ExperimentConfig,
    state: &SymmetricState,
    seed: u64,
) -> Result<(MacroResult, Option<GeomResult>)> {
    let m = macroscopicity_symmetric(state)?;
    let g = if cfg.compute_e_g {
        Some(geometric_entanglement_symmetric(state, &cfg.geom_config(derive_seed(seed, 2)))?)
    } else {
        None
    };
    Ok((m, g))
}

fn ensemble_row(cfg: &ExperimentConfig, n: usize, k: usize, sample: usize) -> Result<SampleRow> {
    let seed = sample_seed(cfg.seed, n, k, sample);
    let mut rng = RngStream::new(seed);
    let (m, g) = match cfg.experiment {
        ExperimentKind::PhysicalScan => {
            let (state, _) = random_physical_circuit(n, k, &mut rng, cfg.topology.into())?;
            dense_measures(cfg, &state, seed)?
        }
        ExperimentKind::ChainScan => dense_measures(cfg, &random_linear_chain(n, k, &mut rng)?, seed)?,
        ExperimentKind::HaarScan => dense_measures(cfg, &haar_random_state(n, &mut rng)?, seed)?,
        ExperimentKind::SymmetricScan => symmetric_measures(cfg, &random_symmetric_state(n, &mut rng)?, seed)?,
        other => unreachable!("{other:?} is not a sampled ensemble"),
    };
    Ok(make_row(cfg.experiment.label(), (n, k, sample, seed), &m, g.as_ref()))
}

fn named_row(spec: &NamedStateSpec, cfg: &ExperimentConfig) -> Result<SampleRow> {
    let seed = sample_seed(cfg.seed, spec.n, 0, 0);
    let (m, g) = match spec.build()? {
        Named::Dense(s) => dense_measures(cfg, &s, seed)?,
        Named::Symmetric(s) => symmetric_measures(cfg, &s, seed)?,
    };
    Ok(make_row(spec.kind.as_str(), (spec.n, 0, 0, seed), &m, g.as_ref()))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Per-`(ensemble, n, k)` means and sample standard deviations.
pub fn summarize(rows: &[SampleRow]) -> Vec<StatRecord> {
    let mut cells: BTreeMap<(usize, usize, &str), Vec<&SampleRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.n, r.k, r.ensemble.as_str())).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((n, k, ensemble), rs)| {
            let m: Vec<f64> = rs.iter().map(|r| r.m_norm).collect();
            let (mean_m_norm, std_m_norm) = mean_std(&m);
            let eg: Vec<f64> = rs.iter().filter_map(|r| r.e_g).collect();
            let (mean_e_g, std_e_g) = if eg.is_empty() {
                (None, None)
            } else {
                let (a, b) = mean_std(&eg);
                (Some(a), Some(b))
            };
            let width: Vec<f64> = rs.iter().map(|r| r.m_tilde_upper - r.m_tilde_lower).collect();
            let lambda: Vec<f64> = rs.iter().map(|r| r.m_tilde_upper / n as f64).collect();
            StatRecord {
                ensemble: ensemble.to_string(),
                n,
                k,
                count: rs.len(),
                mean_m_norm,
                std_m_norm,
                mean_e_g,
                std_e_g,
                mean_bracket_width: mean_std(&width).0,
                mean_lambda1: mean_std(&lambda).0,
            }
        })
        .collect()
}

/// `θ ∈ [0, π/4]` × `ε ∈ [0, π/2]`, `grid` points per axis.
fn xi_scan(cfg: &ExperimentConfig) -> Result<Vec<XiRow>> {
    let g = cfg.grid.unwrap_or(32);
    let mut points = Vec::new();
    for &n in &cfg.n_values {
        for i in 0..g {
            for j in 0..g {
                let theta = if i == g - 1 { FRAC_PI_4 } else { FRAC_PI_4 * i as f64 / (g - 1) as f64 };
                let epsilon = if j == g - 1 { FRAC_PI_2 } else { FRAC_PI_2 * j as f64 / (g - 1) as f64 };
                points.push((n, theta, epsilon, j == g - 1));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(n, theta, epsilon, on_line)| {
            let state = SymmetricState::xi_state(n, theta, epsilon)?;
            let m = macroscopicity_symmetric(&state)?;
            let e_g = if cfg.compute_e_g {
                Some(geometric_entanglement_symmetric(&state, &cfg.geom_config(cfg.seed))?.e_g)
            } else {
                None
            };
            Ok(XiRow {
                n,
                theta,
                epsilon,
                m_norm: m.m_norm,
                m_norm_analytic: xi_macroscopicity_analytic(n, theta, epsilon)?,
                e_g,
                e_g_analytic: on_line.then(|| xi_geometric_analytic(theta)),
            })
        })
        .collect()
}

/// Points uniform in `E_G = −log2 η` from 1 up to the feasibility limit.
pub fn bound_curve(n: usize, mode: BoundMode, points: usize) -> Result<Vec<BoundRow>> {
    if points == 0 {
        return Err(Error::invalid("need at least one grid point"));
    }
    let eta_min = min_eta(n, mode);
    let e_max = -eta_min.log2();
    (0..points)
        .map(|i| {
            let eta = if points == 1 {
                0.5
            } else if i == points - 1 {
                eta_min
            } else {
                let e = 1.0 + (e_max - 1.0) * i as f64 / (points - 1) as f64;
                2f64.powf(-e)
            };
            bound_row(n, eta, mode)
        })
        .collect()
}

pub fn bound_row(n: usize, eta: f64, mode: BoundMode) -> Result<BoundRow> {
    let (m_tilde, m_norm) = eta_bound(n, eta, mode)?;
    Ok(BoundRow {
        mode: mode.as_str().to_string(),
        n,
        eta,
        e_g: -eta.log2(),
        m_tilde,
        m_norm,
    })
}

fn eta_bounds(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let modes = if cfg.modes.is_empty() {
        vec![BoundMode::General, BoundMode::Symmetric]
    } else {
        cfg.modes.clone()
    };
    let mut rows = Vec::new();
    for &mode in &modes {
        for &n in &cfg.n_values {
            rows.extend(bound_curve(n, mode, cfg.grid.unwrap_or(64))?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let text = r#"{"schema_version": 1, "experiment": "physical-scan", "n_values": [4],
                      "k_values": {"powers_of_n": [0, 1, 2]}, "samples": 2, "seed": 7}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.k_values.resolve(4).unwrap(), vec![1, 4, 16]);
        assert_eq!(cfg.exact_max_n, DEFAULT_EXACT_MAX_N);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_name_the_field() {
        let cases = [
            (r#"{"schema_version": 2, "experiment": "haar-scan", "n_values": [4]}"#, "schema_version"),
            (r#"{"schema_version": 1, "experiment": "haar-scan", "n_values": [4], "samples": 0}"#, "samples"),
            (r#"{"schema_version": 1, "experiment": "haar-scan"}"#, "n_values"),
            (r#"{"schema_version": 1, "experiment": "haar-scan", "n_values": [4], "bogus": 1}"#, "bogus"),
            (r#"{"experiment": "haar-scan", "n_values": [4]}"#, "schema_version"),
            (r#"{"schema_version": 1, "experiment": "chain-scan", "n_values": [4], "k_values": [4]}"#, "k_values"),
        ];
        for (text, field) in cases {
            match ExperimentConfig::from_json(text) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn resource_cap_names_n() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::HaarScan);
        cfg.n_values = vec![4, 40];
        match cfg.validate() {
            Err(Error::ResourceLimit { n, .. }) => assert_eq!(n, 40),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn named_state_ghz() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::NamedState);
        cfg.state = Some(NamedStateSpec {
            kind: StateKind::Ghz,
            n: 8,
            n2: None,
            j: None,
            theta: None,
            epsilon: None,
        });
        let ExperimentOutput::Samples { rows, .. } = run_experiment(&cfg).unwrap() else {
            panic!()
        };
        assert!((rows[0].m_tilde - 64.0).abs() < 1e-9);
        assert!((rows[0].e_g.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn small_scan_is_deterministic_and_sorted() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::PhysicalScan);
        cfg.n_values = vec![3, 4];
        cfg.k_values = KSchedule::List(vec![0, 5]);
        cfg.samples = 3;
        cfg.seed = 99;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_string(Format::Csv).unwrap(), b.to_string(Format::Csv).unwrap());
        let ExperimentOutput::Samples { rows, summary } = a else { panic!() };
        assert_eq!(rows.len(), 12);
        assert_eq!(summary.len(), 4);
        assert!(rows.windows(2).all(|w| (w[0].n, w[0].k, w[0].sample) < (w[1].n, w[1].k, w[1].sample)));
        for r in &rows {
            assert!(r.m_tilde_lower <= r.m_tilde + 1e-9 && r.m_tilde <= r.m_tilde_upper + 1e-9);
        }
        // k = 0 leaves the product state
        assert!(rows.iter().filter(|r| r.k == 0).all(|r| r.m_norm < 1e-6));
    }

    #[test]
    fn bound_curve_endpoints() {
        let rows = bound_curve(20, BoundMode::Symmetric, 64).unwrap();
        assert_eq!(rows.len(), 64);
        assert!((rows[0].e_g - 1.0).abs() < 1e-12 && (rows[0].m_norm - 1.0).abs() < 1e-12);
        assert!((rows[63].eta - 1.0 / 21.0).abs() < 1e-15);
        assert!(rows.windows(2).all(|w| w[1].m_norm <= w[0].m_norm + 1e-12));
    }

    #[test]
    fn summary_path_naming() {
        assert_eq!(summary_path(Path::new("/tmp/a/run.csv")), Path::new("/tmp/a/run_summary.csv"));
        assert_eq!(summary_path(Path::new("run")), Path::new("run_summary"));
    }
}
