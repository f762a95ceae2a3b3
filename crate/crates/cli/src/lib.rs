//! Commands behind the `trigger-sim` binary: simulate one policy, sweep
//! thresholds, compare indicators at an objective, and look up a saved
//! curve.
//!
//! Exit codes: 0 success, 2 configuration error, 3 engine error,
//! 4 infeasible objective.

pub mod chart;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::ThreadPool;
use thiserror::Error;
use trigger_sim_core::scenario::{
    default_domain, DomainBlock, NamedIndicator, CHILE_SCENARIO, CHINA_SCENARIO,
};
use trigger_sim_core::tradeoff::{read_curve_csv, run_policy, write_curve_csv, outcomes_of};
use trigger_sim_core::{
    dominance, evaluate_policy, objective_lookup, sweep, AnalysisError, ClosedLoopRun,
    ComparisonReport, ConfigError, Lookup, OutcomeVec, RunManifest, Scenario, ScenarioConfig,
    ThresholdDomain, TradeOffCurve,
};

pub const THREADS_ENV: &str = "TRIGGER_SIM_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Engine(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Engine(_) | CliError::Io { .. } => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            e => CliError::Engine(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "trigger-sim", version, about = "Event-triggered lockdown policy simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one policy and write its daily trajectory and switch log.
    Simulate(SimulateArgs),
    /// Evaluate a threshold grid and write the trade-off curve.
    Sweep(SweepArgs),
    /// Compare indicators at an objective bound.
    Compare(CompareArgs),
    /// Look up a saved curve at an objective bound.
    Lookup(LookupArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file, or `bundled:chile` / `bundled:china`.
    #[arg(long)]
    pub scenario: String,
    /// Output directory; nothing is written without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepOptions {
    /// Points per threshold grid (overrides the scenario's grids).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Worker threads; the TRIGGER_SIM_THREADS variable takes precedence.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Also write an SVG chart of the curves.
    #[arg(long)]
    pub chart: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Indicator id from the scenario.
    #[arg(long)]
    pub indicator: String,
    /// Threshold; `inf` and `-inf` are accepted.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Indicator ids; all indicators of the scenario when omitted.
    #[arg(long)]
    pub indicator: Vec<String>,
    #[command(flatten)]
    pub sweep: SweepOptions,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Indicator ids; all indicators of the scenario when omitted.
    #[arg(long)]
    pub indicator: Vec<String>,
    /// Upper bound on the first outcome.
    #[arg(long, allow_hyphen_values = true)]
    pub target: f64,
    #[command(flatten)]
    pub sweep: SweepOptions,
    /// Skip bisection refinement and use grid points only.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LookupArgs {
    /// Curve CSV written by `sweep`.
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub target: f64,
}

/// Reads a scenario from a path or the bundled copies.
pub fn resolve_scenario(source: &str) -> Result<(ScenarioConfig, Scenario), CliError> {
    let text = match source {
        "bundled:chile" => CHILE_SCENARIO,
        "bundled:china" => CHINA_SCENARIO,
        path => return Ok(trigger_sim_core::scenario::load_config(path)?),
    };
    let config = ScenarioConfig::parse(text).map_err(ConfigError::from)?;
    let scenario = config.build()?;
    Ok((config, scenario))
}

/// Thread count: the environment variable wins over the flag.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(flag),
    }
}

fn pool(flag: Option<usize>) -> Result<ThreadPool, CliError> {
    let n = thread_count(flag)?.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Engine(e.to_string()))
}

fn select<'a>(scenario: &'a Scenario, ids: &[String]) -> Result<Vec<&'a NamedIndicator>, CliError> {
    if ids.is_empty() {
        return Ok(scenario.indicators.iter().collect());
    }
    ids.iter()
        .map(|id| {
            scenario.indicator(id).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown indicator \"{id}\" (scenario has {})",
                    scenario.indicator_ids().join(", ")
                ))
            })
        })
        .collect()
}

/// Threshold grid of an indicator, resampled to `points` if given.
/// Explicit grids are kept as they are.
pub fn grid_for(
    config: &ScenarioConfig,
    scenario: &Scenario,
    indicator: &NamedIndicator,
    points: Option<usize>,
) -> Result<ThresholdDomain, CliError> {
    let Some(n) = points else { return Ok(indicator.domain.clone()) };
    let block = config.indicator(&indicator.id).and_then(|b| b.domain.clone());
    let domain = match block {
        Some(DomainBlock::Log { min, max, .. }) => ThresholdDomain::log(min, max, n),
        Some(DomainBlock::Linear { min, max, .. }) => ThresholdDomain::linear(min, max, n),
        Some(DomainBlock::Explicit { .. }) => Ok(indicator.domain.clone()),
        None => default_domain(
            indicator.spec.aggregator,
            scenario.population(),
            indicator.spec.scale,
            n,
        ),
    };
    domain.map_err(|e| CliError::Usage(format!("--grid {n}: {e}")))
}

fn write_manifest(config: &ScenarioConfig, dir: &Path, files: &[PathBuf]) -> Result<PathBuf, CliError> {
    let manifest = RunManifest::new(config, files.to_vec());
    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Engine(e.to_string()))?;
    output::write_atomic(&path, &json)?;
    Ok(path)
}

pub struct SimulateReport {
    pub outcomes: OutcomeVec,
    pub run: ClosedLoopRun,
    pub files: Vec<PathBuf>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateReport, CliError> {
    let (config, scenario) = resolve_scenario(&args.scenario.scenario)?;
    let ind = select(&scenario, std::slice::from_ref(&args.indicator))?[0];
    let run = run_policy(&scenario, &ind.spec, args.theta)?;
    let outcomes = outcomes_of(&scenario, &run)?;
    let mut files = Vec::new();
    if let Some(dir) = &args.scenario.out {
        let traj = dir.join(format!("trajectory_{}.csv", ind.id));
        output::write_atomic(&traj, &output::trajectory_csv(&scenario, &run)?)?;
        let log = dir.join(format!("switches_{}.csv", ind.id));
        output::write_atomic(&log, &output::switches_csv(&scenario, &run)?)?;
        files.extend([traj, log]);
        files.push(write_manifest(&config, dir, &files)?);
    }
    Ok(SimulateReport { outcomes, run, files })
}

pub struct SweepReport {
    pub curves: Vec<TradeOffCurve>,
    pub files: Vec<PathBuf>,
}

fn curve_bytes(curve: &TradeOffCurve) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_curve_csv(curve, &mut buf)?;
    Ok(buf)
}

fn sweep_all(
    config: &ScenarioConfig,
    scenario: &Scenario,
    ids: &[String],
    opts: &SweepOptions,
) -> Result<Vec<TradeOffCurve>, CliError> {
    let indicators = select(scenario, ids)?;
    let pool = pool(opts.parallel)?;
    indicators
        .into_iter()
        .map(|ind| {
            let domain = grid_for(config, scenario, ind, opts.grid)?;
            Ok(pool.install(|| sweep(scenario, &ind.id, &ind.spec, &domain)))
        })
        .collect()
}

fn write_curves(
    config: &ScenarioConfig,
    dir: &Path,
    curves: &[TradeOffCurve],
    chart: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for c in curves {
        let path = dir.join(format!("curve_{}.csv", c.indicator_id));
        output::write_atomic(&path, &curve_bytes(c)?)?;
        files.push(path);
    }
    if chart {
        let path = dir.join("tradeoff.svg");
        let refs: Vec<&TradeOffCurve> = curves.iter().collect();
        output::write_atomic(&path, chart::tradeoff_svg(&refs).as_bytes())?;
        files.push(path);
    }
    files.push(write_manifest(config, dir, &files)?);
    Ok(files)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepReport, CliError> {
    let (config, scenario) = resolve_scenario(&args.scenario.scenario)?;
    let curves = sweep_all(&config, &scenario, &args.indicator, &args.sweep)?;
    let files = match &args.scenario.out {
        Some(dir) => write_curves(&config, dir, &curves, args.sweep.chart)?,
        None => Vec::new(),
    };
    Ok(SweepReport { curves, files })
}

pub struct CompareRow {
    pub indicator: String,
    pub lookup: Result<Lookup, String>,
}

pub struct CompareReport {
    pub target: f64,
    pub objective_label: String,
    pub compared_label: String,
    pub rows: Vec<CompareRow>,
    pub pairs: Vec<ComparisonReport>,
    pub curves: Vec<TradeOffCurve>,
    pub files: Vec<PathBuf>,
}

impl CompareReport {
    pub fn row(&self, indicator: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.indicator == indicator)
    }

    pub fn any_infeasible(&self) -> bool {
        self.rows.iter().any(|r| r.lookup.is_err())
    }
}

/// Objective bounds shared by every curve: up to 16 values spanning the
/// first outcome range common to all curves, plus the requested target.
fn objective_grid(curves: &[TradeOffCurve], target: f64) -> Vec<[f64; 1]> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for c in curves {
        let p1: Vec<f64> = c.ok_points().map(|(_, v)| v[0]).collect();
        if p1.is_empty() {
            continue;
        }
        lo = lo.max(p1.iter().cloned().fold(f64::INFINITY, f64::min));
        hi = hi.min(p1.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    let mut grid = vec![target];
    if lo.is_finite() && hi.is_finite() && hi > lo {
        grid.extend((0..16).map(|k| lo + (hi - lo) * k as f64 / 15.0));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.into_iter().map(|v| [v]).collect()
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CompareReport, CliError> {
    let (config, scenario) = resolve_scenario(&args.scenario.scenario)?;
    let curves = sweep_all(&config, &scenario, &args.indicator, &args.sweep)?;
    let pool = pool(args.sweep.parallel)?;
    let rows = curves
        .iter()
        .map(|c| {
            let spec = &scenario.indicator(&c.indicator_id).expect("swept indicator").spec;
            let eval = |theta: f64| evaluate_policy(&scenario, spec, theta).map(|o| o.values);
            let lookup = if args.no_refine {
                objective_lookup(c, &[args.target], None::<fn(f64) -> _>)
            } else {
                pool.install(|| objective_lookup(c, &[args.target], Some(eval)))
            };
            CompareRow { indicator: c.indicator_id.clone(), lookup: lookup.map_err(|e| e.to_string()) }
        })
        .collect();
    let objectives = objective_grid(&curves, args.target);
    let mut pairs = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            pairs.push(dominance(&curves[i], &curves[j], &objectives));
        }
    }
    let files = match &args.scenario.out {
        Some(dir) => write_curves(&config, dir, &curves, args.sweep.chart)?,
        None => Vec::new(),
    };
    let labels = scenario.outcome_labels();
    Ok(CompareReport {
        target: args.target,
        objective_label: labels[0].clone(),
        compared_label: labels[labels.len() - 1].clone(),
        rows,
        pairs,
        curves,
        files,
    })
}

pub struct LookupReport {
    pub indicator: String,
    pub lookup: Lookup,
}

pub fn cmd_lookup(args: &LookupArgs) -> Result<LookupReport, CliError> {
    let file = std::fs::File::open(&args.curve).map_err(|e| CliError::io(&args.curve, e))?;
    let curve = read_curve_csv(file).map_err(|e| CliError::Usage(e.to_string()))?;
    let indicator = args
        .curve
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.strip_prefix("curve_").unwrap_or(s).to_string())
        .unwrap_or_default();
    let lookup = objective_lookup(&curve, &[args.target], None::<fn(f64) -> _>)?;
    Ok(LookupReport { indicator, lookup })
}

/// Compact number formatting for tables.
pub fn fmt_threshold(v: f64) -> String {
    let a = v.abs();
    if !v.is_finite() || a >= 1e7 || (a > 0.0 && a < 1e-3) {
        format!("{v:.4e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

/// The comparison table: indicator, threshold, compared outcome.
pub fn render_compare(report: &CompareReport) -> String {
    let mut rows = vec![[
        "Indicator".to_string(),
        "Threshold".to_string(),
        "% in lockdown".to_string(),
    ]];
    for r in &report.rows {
        match &r.lookup {
            Ok(l) => rows.push([
                r.indicator.clone(),
                fmt_threshold(l.theta),
                format!("{:.1}%", l.compared()),
            ]),
            Err(_) => rows.push([r.indicator.clone(), "-".into(), "infeasible".into()]),
        }
    }
    let widths: Vec<usize> =
        (0..3).map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0)).collect();
    let mut out = format!(
        "objective: {} <= {}; compared: {}\n",
        report.objective_label,
        fmt_threshold(report.target),
        report.compared_label
    );
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{:<w0$} | {:>w1$} | {:>w2$}\n",
            r[0],
            r[1],
            r[2],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        ));
        if i == 0 {
            out.push_str(&format!(
                "{}-+-{}-+-{}\n",
                "-".repeat(widths[0]),
                "-".repeat(widths[1]),
                "-".repeat(widths[2])
            ));
        }
    }
    for r in &report.rows {
        match &r.lookup {
            Ok(l) if l.non_monotone => {
                out.push_str(&format!("note: {}: non-monotone neighborhood, grid point kept\n", r.indicator))
            }
            Err(e) => out.push_str(&format!("{}: {e}\n", r.indicator)),
            _ => {}
        }
    }
    for p in &report.pairs {
        out.push_str(&format!("{} vs {}: {}\n", p.a_id, p.b_id, p.verdict));
    }
    out
}

/// Runs a parsed command line, printing results; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a).map(|r| {
            println!("{}", r.outcomes);
            println!(
                "switches: {} (initial regime: {})",
                r.run.log.switches(),
                r.run.log.initial_regime.as_str()
            );
            print_files(&r.files);
            0
        }),
        Command::Sweep(a) => cmd_sweep(a).map(|r| {
            for c in &r.curves {
                println!(
                    "{}: {} points, {} failed",
                    c.indicator_id,
                    c.points.len(),
                    c.failures()
                );
            }
            print_files(&r.files);
            0
        }),
        Command::Compare(a) => cmd_compare(a).map(|r| {
            print!("{}", render_compare(&r));
            print_files(&r.files);
            if r.any_infeasible() {
                4
            } else {
                0
            }
        }),
        Command::Lookup(a) => cmd_lookup(a).map(|r| {
            println!("indicator,theta,lockdown_pct");
            println!("{},{},{}", r.indicator, r.lookup.theta, r.lookup.compared());
            0
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}
