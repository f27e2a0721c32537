//! Config-driven experiment runner behind the `qbm` binary: landscape scans,
//! gradient checks, estimator benchmarks, training runs, and complexity
//! tables, emitting plot-ready CSV or JSON-lines.
//!
//! Settings come from an optional JSON config file plus command-line flags;
//! flags take precedence. Every output starts with a header that echoes the
//! fully resolved configuration, and fixed seeds give byte-identical files.

use crate::circuit::{qbge, EstimatorConfig};
use crate::error::{Error, Result};
use crate::pauli::WeightedPauliSum;
use crate::sampling::{HighPeakTentSampler, DEFAULT_GRID_SIZE, DEFAULT_T_MAX};
use crate::sgd::{self, qbm_gse, sample_complexity, ShotMode, TrainConfig};
use crate::thermal::{
    analytic_gradient, objective, smoothness_constant, thermal_state, Ansatz,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Tolerance the `grad-check` command enforces (exit code 4 above it).
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

/// One axis of a landscape grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Fully resolved experiment configuration; echoed into output headers and
/// required to re-parse to an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub hamiltonian_path: String,
    pub ansatz_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<GridAxis>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// "auto" or a positive Δ bound.
    pub delta: String,
    pub seed: u64,
    /// "auto", "exact", or a per-sub-estimator shot count.
    pub shots: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
    /// "-" writes to stdout.
    pub output_path: String,
    pub format: OutputFormat,
}

#[derive(Parser, Debug)]
#[command(
    name = "qbm",
    about = "Quantum Boltzmann machine trainer and exact-simulation toolbox",
    long_about = "Settings resolve in two layers: a JSON config file passed via --config \
                  supplies defaults, and command-line flags override individual fields. \
                  Exit codes: 0 success, 2 config error, 3 numerical fault, \
                  4 grad-check tolerance failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Scan f(θ) and ‖∇f(θ)‖ over a 1- or 2-dimensional parameter grid.
    Landscape(CommandArgs),
    /// Compare the analytic gradient against central finite differences.
    GradCheck(CommandArgs),
    /// One fully seeded run of the shot-based gradient estimator.
    Estimate(CommandArgs),
    /// Run the SGD trainer, streaming one record per iteration.
    Train(CommandArgs),
    /// Tabulate the total thermal-state sample count over a list of ε.
    Complexity(CommandArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Landscape(_) => "landscape",
            Command::GradCheck(_) => "grad-check",
            Command::Estimate(_) => "estimate",
            Command::Train(_) => "train",
            Command::Complexity(_) => "complexity",
        }
    }

    fn args(&self) -> &CommandArgs {
        match self {
            Command::Landscape(a)
            | Command::GradCheck(a)
            | Command::Estimate(a)
            | Command::Train(a)
            | Command::Complexity(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommandArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Hamiltonian file: one "<coefficient> <pauli-word>" per line.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Ansatz file: one Pauli word per line (line index = parameter index).
    #[arg(long)]
    pub ansatz: Option<PathBuf>,
    /// Comma-separated parameter vector, e.g. "0.3,-0.1".
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Comma-separated initial point for training.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<String>,
    /// Grid spec "min:max:points[,min:max:points]".
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Target stationarity ε in (0, 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated ε list for the complexity table.
    #[arg(long)]
    pub epsilons: Option<String>,
    /// Δ bound: "auto" or a positive number.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shot budget: "auto" (Hoeffding), "exact" (analytic), or a count.
    #[arg(long)]
    pub shots: Option<String>,
    /// Iteration cap; below the formula's M the guarantee is void.
    #[arg(long = "max-iters")]
    pub max_iters: Option<u64>,
    /// Output path; "-" (default) writes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

/// Config-file mirror of the flags; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    hamiltonian: Option<String>,
    ansatz: Option<String>,
    theta: Option<Vec<f64>>,
    theta0: Option<Vec<f64>>,
    grid: Option<Vec<GridAxis>>,
    epsilon: Option<f64>,
    epsilons: Option<Vec<f64>>,
    delta: Option<serde_json::Value>,
    seed: Option<u64>,
    shots: Option<serde_json::Value>,
    max_iterations: Option<u64>,
    out: Option<String>,
    format: Option<OutputFormat>,
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad {what} entry '{p}'")))
        })
        .collect()
}

fn parse_grid_spec(text: &str) -> Result<Vec<GridAxis>> {
    text.split(',')
        .map(|axis| {
            let parts: Vec<&str> = axis.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "grid axis '{axis}' is not of the form min:max:points"
                )));
            }
            Ok(GridAxis {
                min: parts[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad grid min '{}'", parts[0])))?,
                max: parts[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad grid max '{}'", parts[1])))?,
                points: parts[2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad grid points '{}'", parts[2])))?,
            })
        })
        .collect()
}

fn json_scalar_to_string(v: &serde_json::Value, what: &str) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse(format!("bad {what} value {other} in config"))),
    }
}

struct Resolved {
    config: ExperimentConfig,
    out: PathBuf,
}

fn resolve(command: &Command) -> Result<Resolved> {
    let args = command.args();
    let file: ConfigFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("config file {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let hamiltonian_path = args
        .hamiltonian
        .as_ref()
        .map(|p| p.to_string_lossy().into_owned())
        .or(file.hamiltonian)
        .ok_or_else(|| Error::InvalidArgument("missing --hamiltonian".into()))?;
    let ansatz_path = args
        .ansatz
        .as_ref()
        .map(|p| p.to_string_lossy().into_owned())
        .or(file.ansatz)
        .ok_or_else(|| Error::InvalidArgument("missing --ansatz".into()))?;

    let theta = match &args.theta {
        Some(t) => Some(parse_f64_list(t, "theta")?),
        None => file.theta,
    };
    let theta0 = match &args.theta0 {
        Some(t) => Some(parse_f64_list(t, "theta0")?),
        None => file.theta0,
    };
    let grid = match &args.grid {
        Some(g) => Some(parse_grid_spec(g)?),
        None => file.grid,
    };
    let epsilons = match &args.epsilons {
        Some(e) => Some(parse_f64_list(e, "epsilons")?),
        None => file.epsilons,
    };
    let delta = match &args.delta {
        Some(d) => d.clone(),
        None => match &file.delta {
            Some(v) => json_scalar_to_string(v, "delta")?,
            None => "auto".to_string(),
        },
    };
    let shots = match &args.shots {
        Some(s) => s.clone(),
        None => match &file.shots {
            Some(v) => json_scalar_to_string(v, "shots")?,
            None => "auto".to_string(),
        },
    };

    let output_path = args
        .out
        .as_ref()
        .map(|p| p.to_string_lossy().into_owned())
        .or(file.out)
        .unwrap_or_else(|| "-".to_string());
    let config = ExperimentConfig {
        command: command.name().to_string(),
        hamiltonian_path,
        ansatz_path,
        theta,
        theta0,
        grid,
        epsilon: args.epsilon.or(file.epsilon).or(Some(0.1)),
        epsilons,
        delta,
        seed: args.seed.or(file.seed).unwrap_or(0),
        shots,
        max_iterations: args.max_iters.or(file.max_iterations),
        output_path: output_path.clone(),
        format: args.format.or(file.format).unwrap_or(OutputFormat::Csv),
    };
    Ok(Resolved {
        config,
        out: PathBuf::from(output_path),
    })
}

fn parse_shot_mode(spec: &str) -> Result<ShotMode> {
    match spec {
        "auto" => Ok(ShotMode::HoeffdingExact),
        "exact" => Ok(ShotMode::Analytic),
        n => n
            .parse::<u64>()
            .map(ShotMode::Fixed)
            .map_err(|_| Error::Parse(format!("bad shots spec '{n}' (auto|exact|count)"))),
    }
}

fn parse_delta(spec: &str) -> Result<Option<f64>> {
    if spec == "auto" {
        return Ok(None);
    }
    let d: f64 = spec
        .parse()
        .map_err(|_| Error::Parse(format!("bad delta spec '{spec}' (auto|number)")))?;
    if d.is_nan() || d <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta bound must be positive, got {d}"
        )));
    }
    Ok(Some(d))
}

/// 17 significant digits; losslessly round-trips every f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

enum Cell {
    U64(u64),
    U128(u128),
    F64(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::U64(v) => v.to_string(),
            Cell::U128(v) => v.to_string(),
            Cell::F64(v) => fmt_f64(*v),
        }
    }

    fn json(&self) -> String {
        self.csv()
    }
}

/// Builds the whole output in memory: comment/header lines, one row per
/// record, optional trailing summary. Byte-stable for fixed inputs.
struct TableWriter {
    format: OutputFormat,
    columns: Vec<String>,
    buf: String,
}

impl TableWriter {
    fn new(format: OutputFormat, command: &str, config: &ExperimentConfig, columns: Vec<String>) -> Result<Self> {
        Self::with_preamble(format, command, config, columns, &[])
    }

    /// Like `new`, with structured run-header records (key, json) emitted
    /// between the config echo and the first row.
    fn with_preamble(
        format: OutputFormat,
        command: &str,
        config: &ExperimentConfig,
        columns: Vec<String>,
        preamble: &[(&str, String)],
    ) -> Result<Self> {
        let config_json = serde_json::to_string(config)
            .map_err(|e| Error::Numerical(format!("config serialization failed: {e}")))?;
        let mut buf = String::new();
        match format {
            OutputFormat::Csv => {
                buf.push_str(&format!("# qbm {command}\n"));
                buf.push_str(&format!("# config: {config_json}\n"));
                for (key, json) in preamble {
                    buf.push_str(&format!("# {key}: {json}\n"));
                }
                buf.push_str(&columns.join(","));
                buf.push('\n');
            }
            OutputFormat::Jsonl => {
                buf.push_str(&format!(
                    "{{\"record\":\"header\",\"command\":\"{command}\",\"config\":{config_json}}}\n"
                ));
                for (key, json) in preamble {
                    buf.push_str(&format!("{{\"record\":\"{key}\",\"{key}\":{json}}}\n"));
                }
            }
        }
        Ok(TableWriter {
            format,
            columns,
            buf,
        })
    }

    fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        match self.format {
            OutputFormat::Csv => {
                let line: Vec<String> = cells.iter().map(Cell::csv).collect();
                self.buf.push_str(&line.join(","));
                self.buf.push('\n');
            }
            OutputFormat::Jsonl => {
                self.buf.push_str("{\"record\":\"row\"");
                for (name, cell) in self.columns.iter().zip(cells.iter()) {
                    self.buf.push_str(&format!(",\"{name}\":{}", cell.json()));
                }
                self.buf.push_str("}\n");
            }
        }
    }

    fn summary(&mut self, json: &str) {
        match self.format {
            OutputFormat::Csv => self.buf.push_str(&format!("# summary: {json}\n")),
            OutputFormat::Jsonl => self
                .buf
                .push_str(&format!("{{\"record\":\"summary\",\"summary\":{json}}}\n")),
        }
    }

    fn finish(self) -> String {
        self.buf
    }
}

fn load_inputs(cfg: &ExperimentConfig) -> Result<(WeightedPauliSum, Ansatz)> {
    let h_text = std::fs::read_to_string(Path::new(&cfg.hamiltonian_path)).map_err(|e| {
        Error::InvalidArgument(format!("cannot read {}: {e}", cfg.hamiltonian_path))
    })?;
    let a_text = std::fs::read_to_string(Path::new(&cfg.ansatz_path))
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", cfg.ansatz_path)))?;
    let h = WeightedPauliSum::parse(&h_text)?;
    let a = Ansatz::parse(&a_text)?;
    if h.n_qubits() != a.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian acts on {} qubits, ansatz on {}",
            h.n_qubits(),
            a.n_qubits()
        )));
    }
    Ok((h, a))
}

/// Grid table of (θ, f, ‖∇f‖) rows, suitable for contour plotting.
pub fn run_landscape(cfg: &ExperimentConfig) -> Result<String> {
    let (h, a) = load_inputs(cfg)?;
    let axes = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("landscape requires --grid".into()))?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::InvalidArgument(
            "grid must have 1 or 2 axes".into(),
        ));
    }
    if axes.len() != a.num_parameters() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes but the ansatz has {} parameters",
            axes.len(),
            a.num_parameters()
        )));
    }
    if axes.iter().any(|ax| ax.points < 2) {
        return Err(Error::InvalidArgument(
            "each grid axis needs at least 2 points".into(),
        ));
    }
    let total: usize = axes.iter().map(|ax| ax.points).product();
    if total > MAX_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid has {total} points, maximum is {MAX_GRID_POINTS}"
        )));
    }

    let mut columns: Vec<String> = (0..axes.len()).map(|j| format!("theta_{j}")).collect();
    columns.push("f".into());
    columns.push("grad_norm".into());
    let mut w = TableWriter::new(cfg.format, "landscape", cfg, columns)?;

    let coord = |ax: &GridAxis, i: usize| {
        ax.min + (ax.max - ax.min) * i as f64 / (ax.points - 1) as f64
    };
    let mut emit = |theta: &[f64]| -> Result<()> {
        let state = thermal_state(&a, theta)?;
        let f = objective(&h, &state)?;
        let grad = analytic_gradient(&h, &a, &state)?;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut cells: Vec<Cell> = theta.iter().map(|&t| Cell::F64(t)).collect();
        cells.push(Cell::F64(f));
        cells.push(Cell::F64(norm));
        w.row(&cells);
        Ok(())
    };
    if axes.len() == 1 {
        for i in 0..axes[0].points {
            emit(&[coord(&axes[0], i)])?;
        }
    } else {
        for i in 0..axes[0].points {
            for jj in 0..axes[1].points {
                emit(&[coord(&axes[0], i), coord(&axes[1], jj)])?;
            }
        }
    }
    Ok(w.finish())
}

/// Per-component analytic-vs-finite-difference report; the returned flag is
/// the maximum absolute gap (exit code 4 above `GRAD_CHECK_TOLERANCE`).
pub fn run_grad_check(cfg: &ExperimentConfig) -> Result<(String, f64)> {
    let (h, a) = load_inputs(cfg)?;
    let theta = cfg
        .theta
        .clone()
        .ok_or_else(|| Error::InvalidArgument("grad-check requires --theta".into()))?;
    let state = thermal_state(&a, &theta)?;
    let analytic = analytic_gradient(&h, &a, &state)?;

    let mut w = TableWriter::new(
        cfg.format,
        "grad-check",
        cfg,
        vec![
            "component".into(),
            "analytic".into(),
            "finite_difference".into(),
            "abs_diff".into(),
        ],
    )?;
    let mut max_diff = 0.0f64;
    for j in 0..theta.len() {
        let mut plus = theta.clone();
        plus[j] += FD_STEP;
        let mut minus = theta.clone();
        minus[j] -= FD_STEP;
        let fp = objective(&h, &thermal_state(&a, &plus)?)?;
        let fm = objective(&h, &thermal_state(&a, &minus)?)?;
        let fd = (fp - fm) / (2.0 * FD_STEP);
        let diff = (analytic[j] - fd).abs();
        max_diff = max_diff.max(diff);
        w.row(&[
            Cell::U64(j as u64),
            Cell::F64(analytic[j]),
            Cell::F64(fd),
            Cell::F64(diff),
        ]);
    }
    w.summary(&format!(
        "{{\"max_abs_diff\":{},\"tolerance\":{}}}",
        fmt_f64(max_diff),
        fmt_f64(GRAD_CHECK_TOLERANCE)
    ));
    Ok((w.finish(), max_diff))
}

/// One seeded invocation of the full gradient estimator with its
/// preparation ledger and the analytic truth per component.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<String> {
    let (h, a) = load_inputs(cfg)?;
    let theta = cfg
        .theta
        .clone()
        .ok_or_else(|| Error::InvalidArgument("estimate requires --theta".into()))?;
    let epsilon = cfg.epsilon.unwrap_or(0.1);
    let (eps_i, delta_i) =
        sgd::sub_estimator_targets(epsilon, a.num_parameters(), h.one_norm())?;
    let mut est_cfg = EstimatorConfig::new(eps_i, eps_i, delta_i, delta_i, cfg.seed)?;
    match parse_shot_mode(&cfg.shots)? {
        ShotMode::HoeffdingExact => {}
        ShotMode::Fixed(c) => est_cfg.fixed_shots = Some(c),
        ShotMode::Analytic => {
            return Err(Error::InvalidArgument(
                "estimate needs a shot budget; use --shots auto or a count".into(),
            ))
        }
    }

    let state = thermal_state(&a, &theta)?;
    let truth = analytic_gradient(&h, &a, &state)?;
    let sampler = HighPeakTentSampler::build(DEFAULT_T_MAX, DEFAULT_GRID_SIZE)?;
    let est = qbge(&h, &a, &state, &est_cfg, &sampler, 0)?;

    let mut w = TableWriter::new(
        cfg.format,
        "estimate",
        cfg,
        vec![
            "component".into(),
            "estimate".into(),
            "analytic".into(),
            "std_error".into(),
            "shots_first".into(),
            "shots_second".into(),
            "preparations".into(),
        ],
    )?;
    let mut ledger = 0u64;
    for (j, &truth_j) in truth.iter().enumerate() {
        ledger += est.shots_first[j] + 2 * est.shots_second[j];
        w.row(&[
            Cell::U64(j as u64),
            Cell::F64(est.components[j]),
            Cell::F64(truth_j),
            Cell::F64(est.standard_error(j)),
            Cell::U64(est.shots_first[j]),
            Cell::U64(est.shots_second[j]),
            Cell::U64(ledger),
        ]);
    }
    w.summary(&format!("{{\"total_preparations\":{}}}", est.preparations));
    Ok(w.finish())
}

/// Training run: one record per iteration plus a summary echoing the derived
/// hyperparameters and both final-energy conventions.
pub fn run_train(cfg: &ExperimentConfig) -> Result<String> {
    let (h, a) = load_inputs(cfg)?;
    let train_cfg = TrainConfig {
        epsilon: cfg.epsilon.unwrap_or(0.1),
        delta_bound: parse_delta(&cfg.delta)?,
        max_iterations_override: cfg.max_iterations,
        seed: cfg.seed,
        shot_mode: parse_shot_mode(&cfg.shots)?,
        theta0: cfg.theta0.clone(),
    };
    let out = qbm_gse(&h, &a, &train_cfg)?;

    let jn = a.num_parameters();
    let mut columns: Vec<String> = vec!["iteration".into()];
    columns.extend((0..jn).map(|j| format!("theta_{j}")));
    columns.push("f_analytic".into());
    columns.push("grad_norm".into());
    columns.extend((0..jn).map(|j| format!("g_{j}")));
    columns.push("preparations_used".into());
    let hyper_json = serde_json::to_string(&out.summary.hyper)
        .map_err(|e| Error::Numerical(format!("hyperparameter serialization failed: {e}")))?;
    let delta_json = format!(
        "{{\"delta_used\":{},\"delta_is_default\":{}}}",
        fmt_f64(out.summary.delta_used),
        out.summary.delta_is_default
    );
    let mut w = TableWriter::with_preamble(
        cfg.format,
        "train",
        cfg,
        columns,
        &[("hyperparameters", hyper_json), ("delta", delta_json)],
    )?;
    for rec in &out.records {
        let mut cells = vec![Cell::U64(rec.iteration)];
        cells.extend(rec.theta.iter().map(|&t| Cell::F64(t)));
        cells.push(Cell::F64(rec.f_analytic));
        cells.push(Cell::F64(rec.grad_analytic_norm));
        cells.extend(rec.grad_estimate.iter().map(|&g| Cell::F64(g)));
        cells.push(Cell::U64(rec.preparations_used));
        w.row(&cells);
    }
    let summary_json = serde_json::to_string(&out.summary)
        .map_err(|e| Error::Numerical(format!("summary serialization failed: {e}")))?;
    w.summary(&summary_json);
    Ok(w.finish())
}

/// Sample-complexity table: exact-integer N per ε plus the M and N₁ = N₂
/// factors of the product formula.
pub fn run_complexity(cfg: &ExperimentConfig) -> Result<String> {
    let (h, a) = load_inputs(cfg)?;
    let epsilons = match (&cfg.epsilons, cfg.epsilon) {
        (Some(list), _) => list.clone(),
        (None, Some(e)) => vec![e],
        (None, None) => {
            return Err(Error::InvalidArgument(
                "complexity requires --epsilons or --epsilon".into(),
            ))
        }
    };
    let delta = parse_delta(&cfg.delta)?.ok_or_else(|| {
        Error::InvalidArgument("complexity requires an explicit --delta bound".into())
    })?;
    let norm = h.one_norm();
    let jn = a.num_parameters() as u64;
    let ell = smoothness_constant(&a, norm);

    let mut w = TableWriter::new(
        cfg.format,
        "complexity",
        cfg,
        vec![
            "epsilon".into(),
            "ell".into(),
            "iterations".into(),
            "n1".into(),
            "n2".into(),
            "total_preparations".into(),
        ],
    )?;
    for &eps in &epsilons {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {eps}"
            )));
        }
        let m = (12.0 * ell * delta / (eps * eps)).ceil() as u128;
        let a2 = norm * norm;
        let shot =
            (8.0 * jn as f64 * a2 * (16.0 * jn as f64 * a2 / (eps * eps)).ln() / (eps * eps))
                .ceil() as u128;
        let total = sample_complexity(eps, jn, norm, ell, delta)?;
        debug_assert_eq!(total, 2 * jn as u128 * m * shot);
        w.row(&[
            Cell::F64(eps),
            Cell::F64(ell),
            Cell::U128(m),
            Cell::U128(shot),
            Cell::U128(shot),
            Cell::U128(total),
        ]);
    }
    Ok(w.finish())
}

fn write_output(out: &Path, content: &str) -> Result<()> {
    if out == Path::new("-") {
        use std::io::Write;
        std::io::stdout().write_all(content.as_bytes())?;
    } else {
        std::fs::write(out, content)?;
    }
    Ok(())
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let resolved = resolve(&cli.command)?;
    let (content, code) = match &cli.command {
        Command::Landscape(_) => (run_landscape(&resolved.config)?, 0),
        Command::GradCheck(_) => {
            let (content, max_diff) = run_grad_check(&resolved.config)?;
            (content, if max_diff > GRAD_CHECK_TOLERANCE { 4 } else { 0 })
        }
        Command::Estimate(_) => (run_estimate(&resolved.config)?, 0),
        Command::Train(_) => (run_train(&resolved.config)?, 0),
        Command::Complexity(_) => (run_complexity(&resolved.config)?, 0),
    };
    write_output(&resolved.out, &content)?;
    Ok(code)
}
