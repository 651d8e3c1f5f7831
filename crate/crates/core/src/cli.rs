//! `dispatchkit` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::battery::BatterySpec;
use crate::cost::{compare_cases, cost_of_trace, CaseComparison, CostReport};
use crate::dispatch::{read_trace, run_scenario, write_trace, DispatchTrace, ScenarioCase};
use crate::forecast::model_io::read_model;
use crate::forecast::train::{history_csv, split_days};
use crate::forecast::window::{FIRST_TARGET_DAY, WINDOWS_PER_YEAR};
use crate::forecast::{train, write_model, SplitMode, TrainingConfig};
use crate::predictive::{
    evaluate_predictive, DayAheadForecaster, OracleForecaster, ZeroForecaster,
};
use crate::series::{
    load_history, load_series, write_series, SeriesKind, YearSeries, DAYS_PER_YEAR,
};
use crate::synth::{daily_sinusoid, generate_synthetic, GeneratorParams};
use crate::tariff::TariffSchedule;

#[derive(Debug, Parser)]
#[command(
    name = "dispatchkit",
    version,
    about = "Household PV + battery dispatch, tariff costing and LSTM day-ahead forecasting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic year of half-hourly load or PV.
    Generate(GenerateArgs),
    /// Run dispatch cases and write traces plus the cost comparison.
    Simulate(SimulateArgs),
    /// Train a day-ahead forecaster per given series.
    Train(TrainArgs),
    /// Forecast the day after a history file.
    Predict(PredictArgs),
    /// Schedule the battery on forecasts and price the result against actuals.
    EvaluatePredictive(EvaluateArgs),
    /// Rebuild the cost comparison from trace files written by `simulate`.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Load,
    Pv,
}

impl From<KindArg> for SeriesKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Load => SeriesKind::Load,
            KindArg::Pv => SeriesKind::Pv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    /// Seeded household-like year.
    Household,
    /// Noiseless repeating daily sinusoid.
    Sinusoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Grid,
    Pv,
    PvBatt,
    All,
}

impl CaseArg {
    fn cases(self) -> Vec<ScenarioCase> {
        match self {
            CaseArg::Grid => vec![ScenarioCase::GridOnly],
            CaseArg::Pv => vec![ScenarioCase::PvGrid],
            CaseArg::PvBatt => vec![ScenarioCase::PvGridBattery],
            CaseArg::All => ScenarioCase::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Chrono,
    Random,
}

impl From<SplitArg> for SplitMode {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Chrono => SplitMode::Chronological,
            SplitArg::Random => SplitMode::Random,
        }
    }
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// RNG seed; falls back to DISPATCHKIT_SEED, then 42.
    #[arg(long, env = "DISPATCHKIT_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "household")]
    pub profile: ProfileArg,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Load CSV; a synthetic year from --seed when omitted.
    #[arg(long)]
    pub load: Option<PathBuf>,
    /// PV CSV; a synthetic year from --seed when omitted.
    #[arg(long)]
    pub pv: Option<PathBuf>,
    /// Tariff key=value file; Economy 7 defaults when omitted.
    #[arg(long)]
    pub tariff: Option<PathBuf>,
    /// Battery key=value file; 4 kWh defaults when omitted.
    #[arg(long)]
    pub battery: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub case: CaseArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Run the selected cases on separate threads.
    #[arg(long)]
    pub parallel_cases: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub load: Option<PathBuf>,
    #[arg(long)]
    pub pv: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, value_enum, default_value = "chrono")]
    pub split: SplitArg,
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `day,slot,kw` CSV of whole consecutive days; the last 29 are used.
    #[arg(long)]
    pub history: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Model file, or `oracle` / `zero`.
    #[arg(long, default_value = "oracle")]
    pub load_forecaster: String,
    /// Model file, or `oracle` / `zero`.
    #[arg(long, default_value = "oracle")]
    pub pv_forecaster: String,
    /// Defaults to the first validation day of the chronological split.
    #[arg(long)]
    pub first_day: Option<u16>,
    #[arg(long, default_value_t = DAYS_PER_YEAR as u16)]
    pub last_day: u16,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub tariff: Option<PathBuf>,
    /// Directory holding `trace_<case>.csv` files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::EvaluatePredictive(a) => cmd_evaluate_predictive(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn synthetic(seed: u64, kind: SeriesKind) -> Result<YearSeries> {
    Ok(generate_synthetic(seed, kind, &GeneratorParams::default())?)
}

fn series_or_synthetic(path: Option<&Path>, kind: SeriesKind, seed: u64) -> Result<YearSeries> {
    match path {
        Some(p) => {
            load_series(p, kind).with_context(|| format!("reading {kind} series {}", p.display()))
        }
        None => synthetic(seed, kind),
    }
}

fn tariff_from(path: Option<&Path>) -> Result<TariffSchedule> {
    match path {
        Some(p) => {
            TariffSchedule::read(p).with_context(|| format!("reading tariff {}", p.display()))
        }
        None => Ok(TariffSchedule::default()),
    }
}

fn battery_from(path: Option<&Path>) -> Result<BatterySpec> {
    match path {
        Some(p) => BatterySpec::read(p).with_context(|| format!("reading battery {}", p.display())),
        None => Ok(BatterySpec::default()),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn trace_path(dir: &Path, case: ScenarioCase) -> PathBuf {
    dir.join(format!("trace_{}.csv", case.key()))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let kind = SeriesKind::from(a.kind);
    let series = match a.profile {
        ProfileArg::Household => synthetic(a.seed.seed, kind)?,
        ProfileArg::Sinusoid => match kind {
            SeriesKind::Load => daily_sinusoid(kind, 0.5, 0.3),
            SeriesKind::Pv => daily_sinusoid(kind, 1.0, 1.0),
        },
    };
    write_series(&series, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!(
        "wrote {} ({} samples)",
        a.out.display(),
        series.samples().len()
    );
    Ok(())
}

fn simulate_case(
    case: ScenarioCase,
    tariff: &TariffSchedule,
    spec: &BatterySpec,
    load: &YearSeries,
    pv: &YearSeries,
) -> Result<(DispatchTrace, CostReport)> {
    let trace = run_scenario(case, tariff, spec, load, pv)?;
    trace
        .verify(spec, load.samples(), pv.samples())
        .with_context(|| format!("{} trace failed its invariants", case.key()))?;
    let report = cost_of_trace(&trace, tariff);
    ensure!(
        report.identity_gap().abs() <= 1e-9,
        "{} cost identity off by {}",
        case.key(),
        report.identity_gap()
    );
    Ok((trace, report))
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let s = &a.system;
    let cases = a.case.cases();
    let tariff = tariff_from(s.tariff.as_deref())?;
    let spec = battery_from(s.battery.as_deref())?;
    let load = series_or_synthetic(s.load.as_deref(), SeriesKind::Load, s.seed.seed)?;
    let pv = if cases.iter().any(|c| c.uses_pv()) {
        series_or_synthetic(s.pv.as_deref(), SeriesKind::Pv, s.seed.seed)?
    } else {
        YearSeries::new(SeriesKind::Pv, vec![0.0; load.samples().len()])?
    };
    ensure_dir(&a.out_dir)?;

    let results: Vec<Result<(DispatchTrace, CostReport)>> = if a.parallel_cases {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cases
                .iter()
                .map(|&c| {
                    let (tariff, spec, load, pv) = (&tariff, &spec, &load, &pv);
                    scope.spawn(move || simulate_case(c, tariff, spec, load, pv))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("case thread panicked"))
                .collect()
        })
    } else {
        cases
            .iter()
            .map(|&c| simulate_case(c, &tariff, &spec, &load, &pv))
            .collect()
    };

    let mut reports = Vec::new();
    for (case, result) in cases.iter().zip(results) {
        let (trace, report) = result?;
        write_trace(&trace, trace_path(&a.out_dir, *case))?;
        reports.push((*case, report));
    }
    finish_report(&compare_cases(&reports), &a.out_dir)
}

fn finish_report(cmp: &CaseComparison, dir: &Path) -> Result<()> {
    let path = dir.join("report.csv");
    cmp.write_csv(&path)
        .with_context(|| format!("writing {}", path.display()))?;
    print!("{}", cmp.to_table());
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<()> {
    let tariff = tariff_from(a.tariff.as_deref())?;
    let mut reports = Vec::new();
    for case in ScenarioCase::ALL {
        let path = trace_path(&a.out_dir, case);
        if path.exists() {
            let trace = read_trace(case, &path)?;
            reports.push((case, cost_of_trace(&trace, &tariff)));
        }
    }
    if reports.is_empty() {
        bail!("no trace_<case>.csv files in {}", a.out_dir.display());
    }
    finish_report(&compare_cases(&reports), &a.out_dir)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut jobs = Vec::new();
    if let Some(p) = &a.load {
        jobs.push((SeriesKind::Load, p));
    }
    if let Some(p) = &a.pv {
        jobs.push((SeriesKind::Pv, p));
    }
    if jobs.is_empty() {
        bail!("give at least one of --load / --pv");
    }
    let config = TrainingConfig {
        epochs: a.epochs,
        hidden_dim: a.hidden,
        split: a.split.into(),
        learning_rate: a.learning_rate,
        dropout: a.dropout,
        seed: a.seed.seed,
        ..TrainingConfig::default()
    };
    ensure_dir(&a.out_dir)?;
    for (kind, path) in jobs {
        let series =
            load_series(path, kind).with_context(|| format!("reading {}", path.display()))?;
        let outcome = train(&series, &config)?;
        let model_path = a.out_dir.join(format!("model_{kind}.txt"));
        let loss_path = a.out_dir.join(format!("loss_{kind}.csv"));
        write_model(&outcome.model, &model_path)?;
        fs::write(&loss_path, history_csv(&outcome.history))
            .with_context(|| format!("writing {}", loss_path.display()))?;
        let (first, last) = (
            outcome.history[0],
            outcome.history[outcome.history.len() - 1],
        );
        println!(
            "{kind}: {} train / {} validation days, train mse {:.6e} -> {:.6e}, val mse {:.6e}",
            outcome.train_days.len(),
            outcome.val_days.len(),
            first.train_mse,
            last.train_mse,
            last.val_mse
        );
    }
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let model =
        read_model(&a.model).with_context(|| format!("reading model {}", a.model.display()))?;
    let history = load_history(&a.history)
        .with_context(|| format!("reading history {}", a.history.display()))?;
    let day = model.predict_day(&history)?;
    let mut s = String::from("slot,kw\n");
    for (slot, kw) in day.iter().enumerate() {
        s.push_str(&format!("{slot},{kw:.6}\n"));
    }
    fs::write(&a.out, s).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn forecaster(spec: &str) -> Result<Box<dyn DayAheadForecaster>> {
    Ok(match spec {
        "oracle" => Box::new(OracleForecaster),
        "zero" => Box::new(ZeroForecaster),
        path => Box::new(read_model(path).with_context(|| format!("reading model {path}"))?),
    })
}

/// First target day of the default chronological validation set.
pub fn default_validation_start() -> u16 {
    let targets: Vec<u16> = (0..WINDOWS_PER_YEAR as u16)
        .map(|i| FIRST_TARGET_DAY + i)
        .collect();
    let (_, val) = split_days(
        &targets,
        TrainingConfig::default().train_fraction,
        SplitMode::Chronological,
        0,
    );
    val[0]
}

pub fn cmd_evaluate_predictive(a: &EvaluateArgs) -> Result<()> {
    let s = &a.system;
    let tariff = tariff_from(s.tariff.as_deref())?;
    let spec = battery_from(s.battery.as_deref())?;
    let load = series_or_synthetic(s.load.as_deref(), SeriesKind::Load, s.seed.seed)?;
    let pv = series_or_synthetic(s.pv.as_deref(), SeriesKind::Pv, s.seed.seed)?;
    let load_fc = forecaster(&a.load_forecaster)?;
    let pv_fc = forecaster(&a.pv_forecaster)?;
    let first = a.first_day.unwrap_or_else(default_validation_start);
    let report = evaluate_predictive(
        first,
        a.last_day,
        &load,
        &pv,
        &tariff,
        &spec,
        load_fc.as_ref(),
        pv_fc.as_ref(),
    )?;
    report
        .forecast_trace
        .verify(
            &spec,
            load.days(first, a.last_day),
            pv.days(first, a.last_day),
        )
        .context("realized trace failed its invariants")?;

    ensure_dir(&a.out_dir)?;
    let path = a.out_dir.join("predictive.csv");
    fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    write_trace(
        &report.forecast_trace,
        a.out_dir.join("trace_predictive.csv"),
    )?;
    println!(
        "days {first}..={}: forecast-scheduled net £{:.2}, perfect-information net £{:.2}, gap £{:.2}",
        a.last_day,
        report.forecast_cost.net_cost,
        report.perfect_cost.net_cost,
        report.gap()
    );
    Ok(())
}
