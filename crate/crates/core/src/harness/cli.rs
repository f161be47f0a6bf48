//! Command-line front end. Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::output::Format;
use super::{
    bound_curve, bound_row, run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput, KSchedule, NamedStateSpec,
    StateKind, TopologyName,
};
use crate::error::Error;
use crate::extremal::BoundMode;
use crate::limits::set_dense_cap;

#[derive(Parser, Debug)]
#[command(name = "macrolab", about = "Macroscopicity and geometric entanglement of multi-qubit states")]
struct Cli {
    /// Largest qubit count for dense state vectors (overrides MACROLAB_DENSE_CAP).
    #[arg(long, global = true)]
    dense_cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute M̃, M and E_G for a named state.
    State(StateArgs),
    /// Run an experiment from a config file or flags.
    Scan(ScanArgs),
    /// Maximal macroscopicity against product-state overlap.
    Bounds(BoundsArgs),
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Ghz,
    W,
    Dicke,
    BellProduct,
    Xi,
    GhzOnes,
    Product,
}

impl From<KindArg> for StateKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ghz => StateKind::Ghz,
            KindArg::W => StateKind::W,
            KindArg::Dicke => StateKind::Dicke,
            KindArg::BellProduct => StateKind::BellProduct,
            KindArg::Xi => StateKind::Xi,
            KindArg::GhzOnes => StateKind::GhzOnes,
            KindArg::Product => StateKind::Product,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    XiScan,
    EtaBounds,
    PhysicalScan,
    ChainScan,
    HaarScan,
    SymmetricScan,
}

impl From<ExperimentArg> for ExperimentKind {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::XiScan => ExperimentKind::XiScan,
            ExperimentArg::EtaBounds => ExperimentKind::EtaBounds,
            ExperimentArg::PhysicalScan => ExperimentKind::PhysicalScan,
            ExperimentArg::ChainScan => ExperimentKind::ChainScan,
            ExperimentArg::HaarScan => ExperimentKind::HaarScan,
            ExperimentArg::SymmetricScan => ExperimentKind::SymmetricScan,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    General,
    Symmetric,
    Both,
}

#[derive(Args, Debug)]
struct StateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    /// Trailing |1⟩ sites for ghz-ones.
    #[arg(long)]
    n2: Option<usize>,
    /// Excitation number for dicke.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentArg>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// k schedule as powers of n, e.g. `0,1,2,3`.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    k_powers: Vec<u32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    exact_max_n: Option<usize>,
    /// Skip the geometric-entanglement search.
    #[arg(long)]
    no_e_g: bool,
    #[arg(long)]
    all_to_all: bool,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// A single overlap value instead of a grid.
    #[arg(long, conflicts_with = "eta_grid")]
    eta: Option<f64>,
    /// Points per curve, uniform in E_G from 1 to the feasibility limit.
    #[arg(long, default_value_t = 64)]
    eta_grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `macrolab --help` for usage.");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(cap) = cli.dense_cap {
        set_dense_cap(cap).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Version => {
            println!("macrolab {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        Command::State(a) => state(a),
        Command::Scan(a) => scan(a),
        Command::Bounds(a) => bounds(a),
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn state(a: StateArgs) -> Result<(), Failure> {
    let kind: StateKind = a.kind.into();
    let missing = |flag: &str| Failure::Usage(format!("--kind {} requires --{flag}", kind.as_str()));
    match kind {
        StateKind::Dicke if a.j.is_none() => return Err(missing("j")),
        StateKind::GhzOnes if a.n2.is_none() => return Err(missing("n2")),
        StateKind::Xi if a.theta.is_none() => return Err(missing("theta")),
        StateKind::Xi if a.epsilon.is_none() => return Err(missing("epsilon")),
        _ => {}
    }
    let mut cfg = ExperimentConfig::new(ExperimentKind::NamedState);
    cfg.seed = a.seed;
    cfg.optimizer.restarts = a.restarts;
    if let Some(t) = a.tol {
        cfg.optimizer.tol = t;
    }
    cfg.state = Some(NamedStateSpec {
        kind,
        n: a.n,
        n2: a.n2,
        j: a.j,
        theta: a.theta,
        epsilon: a.epsilon,
    });
    let ExperimentOutput::Samples { rows, .. } = run_experiment(&cfg)? else {
        unreachable!("named-state yields sample rows")
    };
    let r = &rows[0];
    let mut out = std::io::stdout().lock();
    let lines = [
        format!("kind={}", r.ensemble),
        format!("n={}", r.n),
        format!("m_tilde={}", fmt_num(r.m_tilde)),
        format!("m_norm={}", fmt_num(r.m_norm)),
        format!("m_tilde_lower={}", fmt_num(r.m_tilde_lower)),
        format!("m_tilde_upper={}", fmt_num(r.m_tilde_upper)),
        format!("e_g={}", r.e_g.map_or_else(|| "nan".to_string(), fmt_num)),
    ];
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    Ok(())
}

fn scan(a: ScanArgs) -> Result<(), Failure> {
    let mut cfg = match (&a.config, a.experiment) {
        (Some(path), _) => ExperimentConfig::from_file(path)?,
        (None, Some(e)) => ExperimentConfig::new(e.into()),
        (None, None) => return Err(Failure::Usage("scan needs --config or --experiment".into())),
    };
    if let (Some(_), Some(e)) = (&a.config, a.experiment) {
        cfg.experiment = e.into();
    }
    if !a.n.is_empty() {
        cfg.n_values = a.n.clone();
    }
    if !a.k.is_empty() {
        cfg.k_values = KSchedule::List(a.k.clone());
    }
    if !a.k_powers.is_empty() {
        cfg.k_values = KSchedule::PowersOfN {
            powers_of_n: a.k_powers.clone(),
        };
    }
    if let Some(s) = a.samples {
        cfg.samples = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.restarts.is_some() {
        cfg.optimizer.restarts = a.restarts;
    }
    if let Some(t) = a.tol {
        cfg.optimizer.tol = t;
    }
    if let Some(m) = a.exact_max_n {
        cfg.exact_max_n = m;
    }
    if a.no_e_g {
        cfg.compute_e_g = false;
    }
    if a.all_to_all {
        cfg.topology = TopologyName::AllToAll;
    }
    if a.grid.is_some() {
        cfg.grid = a.grid;
    }
    let format = a
        .format
        .map(Format::from)
        .or(cfg.output.as_ref().map(|o| o.format))
        .unwrap_or_default();
    let out = a.out.clone().or(cfg.output.as_ref().map(|o| o.path.clone()));

    let result = run_experiment(&cfg)?;
    match out {
        Some(path) => result.write(&path, format)?,
        None => print!("{}", result.to_string(format)?),
    }
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<(), Failure> {
    let modes = match a.mode {
        ModeArg::General => vec![BoundMode::General],
        ModeArg::Symmetric => vec![BoundMode::Symmetric],
        ModeArg::Both => vec![BoundMode::General, BoundMode::Symmetric],
    };
    if a.eta_grid == 0 {
        return Err(Failure::Usage("--eta-grid must be positive".into()));
    }
    let mut rows = Vec::new();
    for mode in modes {
        for &n in &a.n {
            match a.eta {
                Some(eta) => rows.push(bound_row(n, eta, mode)?),
                None => rows.extend(bound_curve(n, mode, a.eta_grid)?),
            }
        }
    }
    let format = a.format.into();
    match a.out {
        Some(path) => super::output::emit(&rows, format, &path)?,
        None => print!("{}", super::output::to_string(&rows, format)?),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(64.0), "64");
        assert_eq!(fmt_num(64.000000000001), "64");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(-1e-13), "0");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["macrolab", "frobnicate"]), 2);
        assert_eq!(run(["macrolab", "state", "--kind", "ghz"]), 2);
        assert_eq!(run(["macrolab", "state", "--kind", "xi", "--n", "4"]), 2);
        assert_eq!(run(["macrolab", "scan"]), 2);
    }

    #[test]
    fn runtime_errors_exit_1() {
        assert_eq!(run(["macrolab", "scan", "--config", "/nonexistent/missing.json"]), 1);
        assert_eq!(run(["macrolab", "bounds", "--n", "4", "--eta", "0.7"]), 1);
    }

    #[test]
    fn version_exits_0() {
        assert_eq!(run(["macrolab", "version"]), 0);
    }
}
