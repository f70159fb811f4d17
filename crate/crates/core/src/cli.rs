//! Batch driver behind the `ultradiffusion` binary.
//!
//! Every subcommand is deterministic for fixed inputs and seed. Outputs are
//! computed in full before anything is written, and each file is written
//! atomically.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{integrate_master_equation, ProbabilityVector};
use crate::error::{Error, Result};
use crate::fitting::{
    fit_exponential, fit_linear, infer_params, r_squared, sample_events, simulate_curve,
    simulate_values, ExponentialFit, MappingMode, Prefactor, UltradiffusionParams,
};
use crate::generator::build_generator;
use crate::oracle_suite::{self, SuiteConfig};
use crate::trace::{
    aggregate_mean, empirical_curve, parse_trace_csv, traces_to_csv, uniform_grid, EventTrace,
    PopularityCurve, DEFAULT_GRID_POINTS,
};
use crate::tsv;
use crate::ultrametric::build_from_trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

/// Stories with fewer events are skipped by default.
pub const DEFAULT_MIN_EVENTS: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "ultradiffusion", version, about = "Fit and simulate ultradiffusive relaxation of response traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit every story, infer chain parameters and compare with the model curve.
    Fit(CommonArgs),
    /// Fit the mean curve across stories.
    Aggregate(CommonArgs),
    /// Generate model curves and synthetic traces, or integrate the master
    /// equation on each input story's own state space.
    Simulate(SimulateArgs),
    /// Compare the exponential fit with a linear (Poisson) fit per story.
    Compare(CommonArgs),
    /// Run the numerical acceptance checks.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// CSV with header `story_id,timestamp`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory for TSV/JSON outputs; JSON goes to stdout when omitted.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Fit the offset `h3` as well.
    #[arg(long)]
    pub offset: bool,
    #[arg(long, default_value = "roundtrip", value_parser = parse_mapping)]
    pub mapping: MappingMode,
    #[arg(long, default_value_t = DEFAULT_MIN_EVENTS)]
    pub min_events: usize,
    /// Divide trace distances by their maximum before building rates.
    #[arg(long)]
    pub rescale_distances: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the `1/t_N` prefactor for the model curve.
    #[arg(long)]
    pub paper_prefactor: bool,
    /// Observation horizon applied to every story, in seconds.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Chain length.
    #[arg(long)]
    pub t_n: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Saturation count (events per synthetic story).
    #[arg(long)]
    pub m: Option<u64>,
    /// Number of synthetic stories to sample.
    #[arg(long, default_value_t = 1)]
    pub stories: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Multiplies every tolerance; used to check that failures are reported.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}

fn parse_mapping(s: &str) -> std::result::Result<MappingMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Validated settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub grid_points: usize,
    pub offset: bool,
    pub mapping: MappingMode,
    pub min_events: usize,
    pub rescale_distances: bool,
    pub seed: u64,
    pub prefactor: Prefactor,
    pub horizon: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            out_dir: None,
            grid_points: DEFAULT_GRID_POINTS,
            offset: false,
            mapping: MappingMode::Roundtrip,
            min_events: DEFAULT_MIN_EVENTS,
            rescale_distances: false,
            seed: 0,
            prefactor: Prefactor::Consistent,
            horizon: None,
        }
    }
}

impl TryFrom<&CommonArgs> for RunConfig {
    type Error = Error;

    fn try_from(a: &CommonArgs) -> Result<Self> {
        if a.grid_points < 2 {
            return Err(Error::InvalidArgument("--grid-points must be at least 2".into()));
        }
        if let Some(p) = &a.input {
            if p.as_os_str().is_empty() {
                return Err(Error::InvalidArgument("--input must not be empty".into()));
            }
        }
        Ok(Self {
            input: a.input.clone(),
            out_dir: a.out_dir.clone(),
            grid_points: a.grid_points,
            offset: a.offset,
            mapping: a.mapping,
            min_events: a.min_events,
            rescale_distances: a.rescale_distances,
            seed: a.seed,
            prefactor: if a.paper_prefactor {
                Prefactor::Printed
            } else {
                Prefactor::Consistent
            },
            horizon: a.horizon,
        })
    }
}

impl RunConfig {
    fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--input is required".into()))
    }
}

/// One line of the fit summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub story_id: String,
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub h3: Option<f64>,
    pub r2: Option<f64>,
    #[serde(rename = "t_N")]
    pub t_n: Option<usize>,
    pub mu: Option<f64>,
    #[serde(rename = "M")]
    pub m: u64,
    pub mode: MappingMode,
    /// R² of the model curve against the observed curve.
    pub r2_simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fit, inference and model curve for one popularity curve.
#[derive(Debug, Clone)]
pub struct CurveAnalysis {
    pub record: FitRecord,
    pub curve: PopularityCurve,
    pub fit: Option<ExponentialFit>,
    pub params: Option<UltradiffusionParams>,
    pub fitted: Vec<f64>,
    pub simulated: Vec<f64>,
}

impl CurveAnalysis {
    /// `t\tobserved\tfitted\tsimulated`; missing columns are written as `nan`.
    pub fn to_tsv(&self) -> String {
        let n = self.curve.len();
        let col = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(f64::NAN);
        tsv::render(
            &["t", "observed", "fitted", "simulated"],
            (0..n).map(|k| {
                vec![
                    self.curve.grid()[k],
                    self.curve.values()[k],
                    col(&self.fitted, k),
                    col(&self.simulated, k),
                ]
            }),
        )
    }

    pub fn is_ok(&self) -> bool {
        self.record.error.is_none()
    }
}

/// Runs fit, inference and simulation on a curve. Failures after the curve
/// is built are recorded in the result, not returned as errors.
pub fn analyze_curve(story_id: &str, curve: PopularityCurve, config: &RunConfig) -> CurveAnalysis {
    let mut record = FitRecord {
        story_id: story_id.to_string(),
        h1: None,
        h2: None,
        h3: None,
        r2: None,
        t_n: None,
        mu: None,
        m: curve.saturation_count(),
        mode: config.mapping,
        r2_simulated: None,
        error: None,
    };
    let mut out = CurveAnalysis {
        record: record.clone(),
        curve,
        fit: None,
        params: None,
        fitted: Vec::new(),
        simulated: Vec::new(),
    };

    let fit = match fit_exponential(&out.curve, config.offset) {
        Ok(f) => f,
        Err(e) => {
            record.error = Some(e.to_string());
            out.record = record;
            return out;
        }
    };
    record.h1 = Some(fit.h1);
    record.h2 = Some(fit.h2);
    record.h3 = Some(fit.h3);
    record.r2 = Some(fit.r2);
    out.fit = Some(fit);
    out.fitted = out.curve.grid().iter().map(|&t| fit.eval(t)).collect();

    let result = infer_params(&fit, record.m, config.mapping).and_then(|params| {
        let simulated = simulate_values(&params, out.curve.grid(), config.prefactor);
        let r2 = r_squared(out.curve.values(), &simulated)?;
        Ok((params, simulated, r2))
    });
    match result {
        Ok((params, simulated, r2)) => {
            record.t_n = Some(params.t_n);
            record.mu = Some(params.mu);
            record.r2_simulated = Some(r2);
            out.params = Some(params);
            out.simulated = simulated;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    out.record = record;
    out
}

/// Builds the empirical curve of a trace and analyzes it.
pub fn analyze_trace(trace: &EventTrace, config: &RunConfig) -> Result<CurveAnalysis> {
    let curve = empirical_curve(trace, config.grid_points)?;
    Ok(analyze_curve(trace.story_id(), curve, config))
}

/// Traces from the input file, split into those that pass the minimum-event
/// filter and the ids of those that do not.
pub fn load_traces(config: &RunConfig) -> Result<(Vec<EventTrace>, Vec<String>)> {
    let traces = parse_trace_csv(config.input()?, config.horizon)?;
    let (kept, skipped): (Vec<_>, Vec<_>) = traces
        .into_iter()
        .partition(|t| t.len() >= config.min_events);
    Ok((kept, skipped.into_iter().map(|t| t.story_id().to_string()).collect()))
}

#[derive(Debug)]
pub struct FitReport {
    pub analyses: Vec<CurveAnalysis>,
    pub skipped: Vec<String>,
}

impl FitReport {
    pub fn records(&self) -> Vec<&FitRecord> {
        self.analyses.iter().map(|a| &a.record).collect()
    }
}

/// Per-story fits over the traces in `config.input`.
pub fn cmd_fit(config: &RunConfig) -> Result<FitReport> {
    let (traces, skipped) = load_traces(config)?;
    let analyses = traces
        .par_iter()
        .map(|t| analyze_trace(t, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(FitReport { analyses, skipped })
}

/// Fits a list of traces directly, with the same per-story pipeline as
/// [`cmd_fit`].
pub fn fit_traces(traces: &[EventTrace], config: &RunConfig) -> Result<Vec<CurveAnalysis>> {
    traces
        .par_iter()
        .filter(|t| t.len() >= config.min_events)
        .map(|t| analyze_trace(t, config))
        .collect()
}

/// Fit of the mean curve across qualifying stories.
pub fn cmd_aggregate(config: &RunConfig) -> Result<(CurveAnalysis, Vec<String>)> {
    let (traces, skipped) = load_traces(config)?;
    Ok((aggregate_traces(&traces, config)?, skipped))
}

pub fn aggregate_traces(traces: &[EventTrace], config: &RunConfig) -> Result<CurveAnalysis> {
    if traces.is_empty() {
        return Err(Error::EmptyInput("no stories pass the minimum-event filter".into()));
    }
    let curves = traces
        .par_iter()
        .map(|t| empirical_curve(t, config.grid_points))
        .collect::<Result<Vec<_>>>()?;
    let mean = aggregate_mean(&curves, config.grid_points)?;
    Ok(analyze_curve("aggregate", mean, config))
}

/// Exponential versus linear fit of one story.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub story_id: String,
    pub r2_exponential: Option<f64>,
    pub r2_linear: f64,
    /// `ultradiffusion` when the exponential fits better, else `poisson`.
    pub preferred: &'static str,
    #[serde(skip)]
    pub table: String,
}

pub fn compare_trace(trace: &EventTrace, config: &RunConfig) -> Result<Comparison> {
    let curve = empirical_curve(trace, config.grid_points)?;
    let (a, b, r2_linear) = fit_linear(curve.grid(), curve.values())?;
    let exp = fit_exponential(&curve, config.offset).ok();
    let r2_exponential = exp.map(|f| f.r2);
    let preferred = match r2_exponential {
        Some(r) if r > r2_linear => "ultradiffusion",
        _ => "poisson",
    };
    let table = tsv::render(
        &["t", "observed", "exponential", "linear"],
        curve.grid().iter().zip(curve.values()).map(|(&t, &p)| {
            vec![t, p, exp.map_or(f64::NAN, |f| f.eval(t)), a + b * t]
        }),
    );
    Ok(Comparison {
        story_id: trace.story_id().to_string(),
        r2_exponential,
        r2_linear,
        preferred,
        table,
    })
}

pub fn cmd_compare(config: &RunConfig) -> Result<(Vec<Comparison>, Vec<String>)> {
    let (traces, skipped) = load_traces(config)?;
    let rows = traces
        .par_iter()
        .map(|t| compare_trace(t, config))
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, skipped))
}

/// Seed for the `k`-th story derived from a base seed.
pub fn story_seed(base: u64, k: u64) -> u64 {
    // SplitMix64 finalizer.
    let mut z = base.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Synthetic stories drawn from the model.
pub fn synthetic_traces(
    params: &UltradiffusionParams,
    stories: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<EventTrace>> {
    (0..stories)
        .into_par_iter()
        .map(|k| sample_events(params, &format!("synthetic-{k}"), horizon, story_seed(seed, k as u64)))
        .collect()
}

/// `1 - P_quiescent(t)` from integrating the master equation on the trace's
/// own ultrametric space.
pub fn simulate_trace_space(trace: &EventTrace, mu: f64, config: &RunConfig) -> Result<PopularityCurve> {
    let mut space = build_from_trace(trace);
    if config.rescale_distances {
        space = space.rescaled();
    }
    let g = build_generator(&space, mu)?;
    let start = ProbabilityVector::characteristic(space.len(), space.quiescent_state())?;
    let grid = uniform_grid(trace.horizon(), config.grid_points);
    let traj = integrate_master_equation(&g, &start, &grid)?;
    let q = space.quiescent_state();
    let mut values: Vec<f64> = traj.iter().map(|p| (1.0 - p.get(q)).clamp(0.0, 1.0)).collect();
    for k in 1..values.len() {
        values[k] = values[k].max(values[k - 1]);
    }
    PopularityCurve::new(grid, values, trace.len() as u64)
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, contents) in files {
        tsv::write_atomic(&dir.join(name), contents.as_bytes())?;
    }
    Ok(())
}

/// File-name-safe version of a story id.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn emit_json(config: &RunConfig, name: &str, value: &impl Serialize, mut files: Vec<(String, String)>) -> Result<()> {
    let json = serde_json::to_string_pretty(value)? + "\n";
    match &config.out_dir {
        Some(dir) => {
            files.push((name.to_string(), json));
            write_outputs(dir, &files)
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn notice_skipped(skipped: &[String], min_events: usize) {
    for id in skipped {
        eprintln!("skipping story {id}: fewer than {min_events} events");
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Fit(a) => RunConfig::try_from(a).and_then(|c| run_fit(&c)),
        Command::Aggregate(a) => RunConfig::try_from(a).and_then(|c| run_aggregate(&c)),
        Command::Compare(a) => RunConfig::try_from(a).and_then(|c| run_compare(&c)),
        Command::Simulate(a) => run_simulate(a),
        Command::OracleCheck(a) => return run_oracle_check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_fit(config: &RunConfig) -> Result<i32> {
    let report = cmd_fit(config)?;
    notice_skipped(&report.skipped, config.min_events);
    if report.analyses.is_empty() {
        return Err(Error::EmptyInput("no stories pass the minimum-event filter".into()));
    }
    let mut files = Vec::new();
    for a in &report.analyses {
        if let Some(e) = &a.record.error {
            eprintln!("story {}: {e}", a.record.story_id);
        }
        files.push((format!("{}.tsv", sanitize(&a.record.story_id)), a.to_tsv()));
    }
    emit_json(config, "fits.json", &report.records(), files)?;
    Ok(if report.analyses.iter().any(CurveAnalysis::is_ok) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

fn run_aggregate(config: &RunConfig) -> Result<i32> {
    let (analysis, skipped) = cmd_aggregate(config)?;
    notice_skipped(&skipped, config.min_events);
    if let Some(e) = &analysis.record.error {
        eprintln!("aggregate: {e}");
    }
    let files = vec![("aggregate.tsv".to_string(), analysis.to_tsv())];
    emit_json(config, "aggregate.json", &analysis.record, files)?;
    Ok(if analysis.is_ok() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn run_compare(config: &RunConfig) -> Result<i32> {
    let (rows, skipped) = cmd_compare(config)?;
    notice_skipped(&skipped, config.min_events);
    if rows.is_empty() {
        return Err(Error::EmptyInput("no stories pass the minimum-event filter".into()));
    }
    let files = rows
        .iter()
        .map(|r| (format!("{}.compare.tsv", sanitize(&r.story_id)), r.table.clone()))
        .collect();
    emit_json(config, "compare.json", &rows, files)?;
    Ok(EXIT_OK)
}

fn run_simulate(args: &SimulateArgs) -> Result<i32> {
    let config = RunConfig::try_from(&args.common)?;
    if config.input.is_some() {
        let mu = args
            .mu
            .ok_or_else(|| Error::InvalidArgument("--mu is required with --input".into()))?;
        let (traces, skipped) = load_traces(&config)?;
        notice_skipped(&skipped, config.min_events);
        let curves = traces
            .par_iter()
            .map(|t| simulate_trace_space(t, mu, &config).map(|c| (t.story_id().to_string(), c)))
            .collect::<Result<Vec<_>>>()?;
        let files: Vec<(String, String)> = curves
            .iter()
            .map(|(id, c)| (format!("{}.simulated.tsv", sanitize(id)), c.to_tsv()))
            .collect();
        let summary: Vec<_> = curves
            .iter()
            .map(|(id, c)| serde_json::json!({ "story_id": id, "states": c.saturation_count() + 1, "final": c.values().last() }))
            .collect();
        emit_json(&config, "simulate.json", &summary, files)?;
        return Ok(EXIT_OK);
    }

    let (Some(t_n), Some(mu)) = (args.t_n, args.mu) else {
        return Err(Error::InvalidArgument("--t-n and --mu are required without --input".into()));
    };
    let params = UltradiffusionParams::new(t_n, mu, args.m.unwrap_or(1))?;
    let horizon = config.horizon.unwrap_or_else(|| params.default_horizon());
    let grid = uniform_grid(horizon, config.grid_points);
    let curve = simulate_curve(&params, &grid, config.prefactor)?;
    let mut files = vec![("simulated.tsv".to_string(), curve.to_tsv())];
    if args.m.is_some() {
        let traces = synthetic_traces(&params, args.stories, horizon, config.seed)?;
        files.push(("events.csv".to_string(), traces_to_csv(&traces)));
    }
    let summary = serde_json::json!({
        "t_N": params.t_n,
        "mu": params.mu,
        "M": params.m,
        "decay_rate": params.decay_rate(),
        "horizon": horizon,
        "seed": config.seed,
    });
    emit_json(&config, "simulate.json", &summary, files)?;
    Ok(EXIT_OK)
}

fn run_oracle_check(args: &OracleArgs) -> i32 {
    let results = oracle_suite::run_all(&SuiteConfig {
        tolerance_scale: args.tolerance_scale,
    });
    print!("{}", oracle_suite::render_table(&results));
    if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_ORACLE
    }
}
