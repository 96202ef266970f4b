//! Command-line workflows. Every subcommand reads and writes plain files;
//! failures print one JSON line `{"error":{"kind":..,"message":..}}` on
//! stderr and exit with status 1.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bundle::{fingerprint, Bundle, PredictRequest};
use crate::city_cluster::{assign_class, kmeans_fit, load_cities, ClusterFeatureSet, KMeansParams};
use crate::data_model::{concert_schema, read_csv, RawTable, Task, CLASS, INCOME_PER_CAPITA, POPULATION_DENSITY};
use crate::error::{invalid, Error, Result};
use crate::evaluation::{accuracy, confusion, generate_synthetic, ConfusionMatrix, SyntheticSpec};
use crate::linear_models::rmspe;
use crate::pipeline::{benchmark, fit_city_classes, train, tune, Dataset, ModelFamily, PipelineConfig, SearchStrategy, TrainReport, TrainedPredictor};

#[derive(Debug, Parser)]
#[command(name = "concert-planner", version, about = "Concert price and location models: train, tune, benchmark, serve")]
pub struct Cli {
    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

static QUIET: AtomicBool = AtomicBool::new(false);

macro_rules! say {
    ($($t:tt)*) => {
        if !QUIET.load(Ordering::Relaxed) {
            println!($($t)*);
        }
    };
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic concerts.csv and cities.csv.
    Synthesize(SynthesizeArgs),
    /// Check a concert CSV against the schema, impute gaps, write a clean copy and summary.
    Ingest(IngestArgs),
    /// Fit k-means city classes; optionally relabel a concert file's Class column.
    ClusterCities(ClusterArgs),
    /// Fit one model per task and write a bundle.
    Train(TrainArgs),
    /// Search hyperparameters, refit the best and write a bundle.
    Tune(TuneArgs),
    /// Score a bundle on a labelled concert file.
    Evaluate(EvaluateArgs),
    /// Compare model families against the constant / random-guess / over-fit bounds.
    Benchmark(BenchmarkArgs),
    /// Predict from a CSV of concerts or a JSON request file.
    Predict(PredictArgs),
    /// Serve a bundle over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long, default_value_t = 2000)]
    pub rows: usize,
    #[arg(long, default_value_t = 50)]
    pub cities: usize,
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.0)]
    pub price_signal: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Imputed copy of the input.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-column statistics as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub cities: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Cluster on population as well as income and density.
    #[arg(long)]
    pub with_population: bool,
    /// Fitted model as JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// `city,class` table.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// Concert file whose Class column is recomputed from its city features.
    #[arg(long, requires = "labeled_out")]
    pub concerts: Option<PathBuf>,
    #[arg(long)]
    pub labeled_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CommonTrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// City table for the bundled k-means model; derived from the concerts when absent.
    #[arg(long)]
    pub cities: Option<PathBuf>,
    /// location, price or both.
    #[arg(long, default_value = "both")]
    pub task: String,
    /// Comma-separated families, matched to tasks (default: forest for location, sgd for price).
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bundle path.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-epoch MLP history as CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonTrainArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub common: CommonTrainArgs,
    /// grid or random.
    #[arg(long, default_value = "random")]
    pub strategy: String,
    /// Random-search budget (overrides the config).
    #[arg(long)]
    pub trials: Option<usize>,
    /// One row per trial.
    #[arg(long)]
    pub trials_csv: Option<PathBuf>,
    /// Add wall-clock durations to the trial log (makes it non-reproducible).
    #[arg(long)]
    pub log_durations: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub task: String,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub confusion_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub task: String,
    /// Comma-separated families (default: every family of the task).
    #[arg(long)]
    pub families: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Plain-text table.
    #[arg(long)]
    pub text: Option<PathBuf>,
    #[arg(long)]
    pub confusion_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// `.csv` concert rows, or `.json` holding one request object or an array.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub task: String,
    /// Output JSON (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Listen address; the port can be overridden by CONCERT_PLANNER_PORT.
    #[arg(long, default_value = crate::service::DEFAULT_ADDRESS)]
    pub address: String,
    /// Do not watch the bundle file for changes.
    #[arg(long)]
    pub no_reload: bool,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::File::create(path)?)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(std::fs::read(path)?)
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_tasks(task: &str) -> Result<Vec<Task>> {
    match task {
        "both" => Ok(vec![Task::Location, Task::Price]),
        other => Ok(vec![other.parse()?]),
    }
}

fn parse_families(list: &str) -> Result<Vec<ModelFamily>> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

/// Pairs each task with the family named for it, or its default.
fn plan(tasks: &[Task], models: Option<&str>) -> Result<Vec<(Task, ModelFamily)>> {
    let named = models.map(parse_families).transpose()?.unwrap_or_default();
    if let Some(f) = named.iter().find(|f| !tasks.contains(&f.task())) {
        return Err(Error::UnsupportedFamily(format!("{} does not fit the requested task(s)", f.name())));
    }
    Ok(tasks
        .iter()
        .map(|&t| {
            let default = if t == Task::Location { ModelFamily::Forest } else { ModelFamily::Sgd };
            (t, named.iter().copied().find(|f| f.task() == t).unwrap_or(default))
        })
        .collect())
}

fn load_training_data(path: &Path) -> Result<(Dataset, String)> {
    let bytes = read_bytes(path)?;
    let table = read_csv(bytes.as_slice(), &concert_schema())?;
    Ok((Dataset::from_table(&table)?, fingerprint(&bytes)))
}

fn summary_line(r: &TrainReport) -> String {
    let price = r.scores.test_price_rmspe.map(|p| format!(" (price scale {p:.4})")).unwrap_or_default();
    let base = if r.task == Task::Price { "constant-mean" } else { "random-guess" };
    format!(
        "{:<8} {:<8} train {} {:.4}  test {:.4}{price}  {base} {:.4}",
        r.task.name(),
        r.family.name(),
        r.scores.metric,
        r.scores.train,
        r.scores.test,
        r.baseline_test
    )
}

fn suffixed(path: &Path, suffix: &str, many: bool) -> PathBuf {
    if !many {
        return path.to_path_buf();
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).map(|e| format!(".{e}")).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}{ext}"))
}

fn finish_bundle(
    common: &CommonTrainArgs,
    cfg: &PipelineConfig,
    dataset: &Dataset,
    fp: String,
    fitted: Vec<(TrainedPredictor, TrainReport)>,
    preset: &str,
) -> Result<Vec<TrainReport>> {
    let cities = common.cities.as_deref().map(load_cities).transpose()?;
    let kmeans = fit_city_classes(dataset, cities.as_deref(), cfg)?;
    let mut location = None;
    let mut price = None;
    let mut reports = Vec::new();
    for (p, r) in fitted {
        if let (Some(path), Some(h)) = (&common.history, &r.history) {
            h.write_csv(create(path)?)?;
        }
        match p.task {
            Task::Location => location = Some(p),
            Task::Price => price = Some(p),
        }
        reports.push(r);
    }
    let bundle = Bundle::new(dataset, kmeans, location, price, cfg.seed, fp, preset)?;
    if let Some(dir) = common.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    bundle.save(&common.out)?;
    Ok(reports)
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let c = &args.common;
    let cfg = load_config(c.config.as_deref(), c.seed)?;
    let (dataset, fp) = load_training_data(&c.data)?;
    let mut fitted = Vec::new();
    for (task, family) in plan(&parse_tasks(&c.task)?, c.model.as_deref())? {
        fitted.push(train(&dataset, task, family, &cfg)?);
    }
    let reports = finish_bundle(c, &cfg, &dataset, fp, fitted, "default")?;
    for r in &reports {
        say!("{}", summary_line(r));
    }
    if let Some(path) = &c.report {
        write_json(path, &serde_json::json!({ "command": "train", "reports": reports }))?;
    }
    Ok(())
}

fn cmd_tune(args: &TuneArgs) -> Result<()> {
    let c = &args.common;
    let mut cfg = load_config(c.config.as_deref(), c.seed)?;
    if let Some(n) = args.trials {
        cfg.trials = n;
    }
    let strategy: SearchStrategy = args.strategy.parse()?;
    let (dataset, fp) = load_training_data(&c.data)?;
    let jobs = plan(&parse_tasks(&c.task)?, c.model.as_deref())?;
    let many = jobs.len() > 1;
    let mut fitted = Vec::new();
    let mut searches = Vec::new();
    for (task, family) in jobs {
        let out = tune(&dataset, task, family, strategy, &cfg)?;
        if let Some(path) = &args.trials_csv {
            out.search.write_csv(create(&suffixed(path, task.name(), many))?, args.log_durations)?;
        }
        let best = out.search.best();
        say!(
            "{:<8} {:<8} best of {} trials: validation {:.4} with {}",
            task.name(),
            family.name(),
            out.search.trials.len(),
            best.score.unwrap_or(f64::NAN),
            serde_json::to_string(&best.params)?
        );
        searches.push(serde_json::json!({
            "task": task,
            "family": family,
            "strategy": strategy,
            "n_trials": out.search.trials.len(),
            "failed_trials": out.search.trials.iter().filter(|t| t.score.is_none()).count(),
            "best_trial": best.index,
            "best_params": best.params,
            "best_validation_score": best.score,
        }));
        fitted.push((out.predictor, out.report));
    }
    let preset = match strategy {
        SearchStrategy::Grid => "tuned-grid",
        SearchStrategy::Random => "tuned-random",
    };
    let reports = finish_bundle(c, &cfg, &dataset, fp, fitted, preset)?;
    for r in &reports {
        say!("{}", summary_line(r));
    }
    if let Some(path) = &c.report {
        write_json(path, &serde_json::json!({ "command": "tune", "searches": searches, "reports": reports }))?;
    }
    Ok(())
}

fn write_confusion(dir: &Path, prefix: &str, m: &ConfusionMatrix) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    m.write_counts_csv(create(&dir.join(format!("{prefix}_counts.csv")))?)?;
    m.write_normalized_csv(create(&dir.join(format!("{prefix}_normalized.csv")))?)?;
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let bundle = Bundle::load(&args.bundle)?;
    let task: Task = args.task.parse()?;
    let bytes = read_bytes(&args.data)?;
    let table = read_csv(bytes.as_slice(), &concert_schema())?;
    let dataset = Dataset::from_table(&table)?;
    let (_, y) = dataset.task_data(task)?;
    let raw = bundle.rows_from_table(&table)?;
    let predictor = bundle.predictor(task)?;
    let report = match y {
        crate::pipeline::Targets::Class(y) => {
            let predicted = predictor.predict_classes(&raw)?;
            let m = confusion(&y, &predicted)?;
            if let Some(dir) = &args.confusion_dir {
                write_confusion(dir, predictor.family().name(), &m)?;
            }
            let acc = accuracy(&y, &predicted)?;
            say!("location {} accuracy {acc:.4} on {} rows", predictor.family().name(), y.len());
            serde_json::json!({ "task": task, "family": predictor.family(), "rows": y.len(), "accuracy": acc, "confusion": m })
        }
        crate::pipeline::Targets::LogPrice(y) => {
            let predicted = predictor.predict_log_price(&raw)?;
            let log_scale = rmspe(&y, &predicted)?;
            let exp = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
            let price_scale = rmspe(&exp(&y), &exp(&predicted))?;
            say!("price {} rmspe {log_scale:.4} (price scale {price_scale:.4}) on {} rows", predictor.family().name(), y.len());
            serde_json::json!({ "task": task, "family": predictor.family(), "rows": y.len(), "rmspe": log_scale, "rmspe_price": price_scale })
        }
    };
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), args.seed)?;
    let task: Task = args.task.parse()?;
    let families = match &args.families {
        Some(list) => parse_families(list)?,
        None => ModelFamily::for_task(task),
    };
    let (dataset, _) = load_training_data(&args.data)?;
    let out = benchmark(&dataset, task, &families, &cfg)?;
    let table = out.text_table();
    if !QUIET.load(Ordering::Relaxed) {
        print!("{table}");
    }
    if let Some(path) = &args.text {
        std::fs::write(path, &table)?;
    }
    if let Some(path) = &args.report {
        write_json(path, &out)?;
    }
    if let Some(dir) = &args.confusion_dir {
        for (family, m) in &out.confusion {
            write_confusion(dir, family, m)?;
        }
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let bundle = Bundle::load(&args.bundle)?;
    let task: Task = args.task.parse()?;
    let bytes = read_bytes(&args.input)?;
    let is_json = args.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let raw = if is_json {
        let value: serde_json::Value = serde_json::from_slice(&bytes)?;
        let requests: Vec<PredictRequest> = match value {
            serde_json::Value::Array(items) => items.into_iter().map(serde_json::from_value).collect::<std::result::Result<_, _>>()?,
            other => vec![serde_json::from_value(other)?],
        };
        bundle.rows_from_requests(&requests).map_err(|e| invalid(e.to_string()))?
    } else {
        let table = read_csv(bytes.as_slice(), &concert_schema().without_required_targets())?;
        bundle.rows_from_table(&table)?
    };
    let text = match task {
        Task::Location => serde_json::to_string_pretty(&bundle.predict_location(&raw)?)?,
        Task::Price => serde_json::to_string_pretty(&bundle.predict_price(&raw)?)?,
    };
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => match writeln!(std::io::stdout(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let bytes = read_bytes(&args.input)?;
    let table = read_csv(bytes.as_slice(), &concert_schema())?;
    let dataset = Dataset::from_table(&table)?;
    let mut filled = table.clone();
    for (idx, name) in table.columns.iter().enumerate() {
        if let Some(v) = dataset.modes.get(name) {
            filled = crate::data_model::fill_missing(&filled, idx, &crate::data_model::format_number(*v));
        }
    }
    filled.write_csv(create(&args.out)?)?;
    let mut columns = serde_json::Map::new();
    for (j, name) in dataset.features.column_names.iter().enumerate() {
        let mut v: Vec<f64> = dataset.features.values.column(j).to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        let q = |p: f64| {
            let pos = p * (n - 1.0);
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        columns.insert(
            name.clone(),
            serde_json::json!({
                "missing": table.missing_count(name)?,
                "mode": dataset.modes.get(name),
                "count": v.len(), "mean": mean, "std": sd,
                "min": v[0], "25%": q(0.25), "50%": q(0.5), "75%": q(0.75), "max": v[v.len() - 1],
            }),
        );
    }
    let summary = serde_json::json!({ "rows": table.n_rows(), "fingerprint": fingerprint(&bytes), "columns": columns });
    if let Some(path) = &args.summary {
        write_json(path, &summary)?;
    }
    let missing: usize = table.columns.iter().map(|c| table.missing_count(c).unwrap_or(0)).sum();
    say!("{} rows, {} columns, {missing} missing cells imputed", table.n_rows(), table.columns.len());
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let cities = load_cities(&args.cities)?;
    let params = KMeansParams {
        k: args.k,
        seed: args.seed,
        n_restarts: args.restarts,
        feature_set: if args.with_population { ClusterFeatureSet::WithPopulation } else { ClusterFeatureSet::IncomeDensity },
    };
    let fit = kmeans_fit(&cities, params)?;
    write_json(&args.out, &fit.model)?;
    if let Some(path) = &args.assignments {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["city", "class"])?;
        for (c, a) in cities.iter().zip(&fit.assignments) {
            w.write_record([c.city.clone(), a.to_string()])?;
        }
        w.flush()?;
    }
    if let (Some(input), Some(output)) = (&args.concerts, &args.labeled_out) {
        if args.with_population {
            return Err(invalid("relabelling concerts needs the income/density clustering"));
        }
        let bytes = read_bytes(input)?;
        let mut table: RawTable = read_csv(bytes.as_slice(), &concert_schema().without_required_targets())?;
        let (inc, den) = (table.column_index(INCOME_PER_CAPITA)?, table.column_index(POPULATION_DENSITY)?);
        if table.column_index(CLASS).is_err() {
            table.columns.push(CLASS.to_string());
            for row in &mut table.cells {
                row.push(None);
            }
        }
        let cls = table.column_index(CLASS)?;
        for (r, row) in table.cells.iter_mut().enumerate() {
            let num = |i: usize| -> Result<f64> {
                row[i].as_deref().and_then(|s| s.parse().ok()).ok_or_else(|| invalid(format!("row {r}: missing city feature")))
            };
            let city = crate::city_cluster::CityFeatures::new("row", num(inc)?, num(den)?);
            row[cls] = Some(assign_class(&city, &fit.model)?.to_string());
        }
        table.write_csv(create(output)?)?;
    }
    let centroids = fit.model.raw_centroids();
    for (k, c) in centroids.iter().enumerate() {
        say!("class {k}: income {:.0}, density {:.1}", c[0], c[1]);
    }
    say!("inertia {:.6}", fit.model.inertia);
    Ok(())
}

fn cmd_synthesize(args: &SynthesizeArgs) -> Result<()> {
    let spec = SyntheticSpec {
        n_rows: args.rows,
        n_cities: args.cities,
        noise: args.noise,
        price_signal: args.price_signal,
        seed: args.seed,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec)?;
    std::fs::create_dir_all(&args.out_dir)?;
    data.table().write_csv(create(&args.out_dir.join("concerts.csv"))?)?;
    data.write_cities_csv(create(&args.out_dir.join("cities.csv"))?)?;
    say!("wrote {} concerts and {} cities to {}", data.concerts.len(), data.cities.len(), args.out_dir.display());
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> Result<()> {
    let bundle = Bundle::load(&args.bundle)?;
    let addr = crate::service::resolve_address(&args.address)?;
    let state = crate::service::ServiceState::new(bundle);
    let watch = (!args.no_reload).then(|| args.bundle.clone());
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(crate::service::serve(state, addr, watch))
}

pub fn run(cli: &Cli) -> Result<()> {
    QUIET.store(cli.quiet, Ordering::Relaxed);
    match &cli.command {
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::ClusterCities(a) => cmd_cluster(a),
        Command::Train(a) => cmd_train(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

/// One-line JSON error record.
pub fn error_line(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

/// Parses `std::env::args`, runs, and maps failures to exit status 1.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(|l| l.trim().trim_start_matches("error: "))
                .filter(|l| !l.is_empty())
                .collect();
            let line = serde_json::json!({ "error": { "kind": "usage", "message": message.join(" ") } });
            let _ = writeln!(std::io::stderr(), "{line}");
            return ExitCode::FAILURE;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
