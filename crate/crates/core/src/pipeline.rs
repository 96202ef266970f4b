//! End-to-end workflows: impute → encode → split → log → min-max → (PCA)
//! → (oversample) → fit, plus tuning and the benchmark protocol.

use std::collections::BTreeMap;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::city_cluster::{kmeans_fit, CityFeatures, KMeansModel, KMeansParams};
use crate::data_model::{
    column_mode, concert_schema, encode_dummies, fill_missing, FeatureMatrix, RawTable, SplitSpec, Task,
    AVERAGE_PRICE, CLASS, INCOME_PER_CAPITA, NUM_CLASSES, POPULATION_DENSITY, POPULATION_ESTIMATE,
};
use crate::error::{invalid, Error, Result};
use crate::evaluation::{
    accuracy, confusion, constant_baseline, overfit_upper_bound, random_guess_baseline, BenchmarkReport,
    ConfusionMatrix, RegressionScore,
};
use crate::forest::{forest_fit, ForestParams, RandomForest};
use crate::kernel_machines::{svc_fit, svc_predict, svr_fit, SvcConfig, SvcModel, SvrConfig, SvrModel};
use crate::linear_models::{
    argmax_rows, logistic_fit, rmspe, sgd_fit, LogisticConfig, LogisticModel, SgdConfig, SgdRegressor,
};
use crate::mlp::{mlp_train_with_validation, MlpModel, TrainConfig, TrainHistory};
use crate::preprocess::{apply_minmax, fit_minmax, fit_pca, log_transform, oversample, pca_project, LogSpec, PcaState, ScalerState, DEFAULT_LOG_COLUMNS};
use crate::rng::derive_seed;
use crate::tuning::{grid_search, random_search, Assignment, Dimension, Evaluation, Objective, ParamSpace, ParamValue, SearchResult, DEFAULT_TRIALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// Training-mean predictor, the regression benchmark.
    Constant,
    Sgd,
    Svr,
    Logistic,
    Svc,
    Forest,
    Mlp,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 7] = [
        ModelFamily::Constant,
        ModelFamily::Sgd,
        ModelFamily::Svr,
        ModelFamily::Logistic,
        ModelFamily::Svc,
        ModelFamily::Forest,
        ModelFamily::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Constant => "constant",
            ModelFamily::Sgd => "sgd",
            ModelFamily::Svr => "svr",
            ModelFamily::Logistic => "logistic",
            ModelFamily::Svc => "svc",
            ModelFamily::Forest => "forest",
            ModelFamily::Mlp => "mlp",
        }
    }

    pub fn task(self) -> Task {
        match self {
            ModelFamily::Constant | ModelFamily::Sgd | ModelFamily::Svr => Task::Price,
            _ => Task::Location,
        }
    }

    pub fn for_task(task: Task) -> Vec<ModelFamily> {
        Self::ALL.into_iter().filter(|f| f.task() == task).collect()
    }

    fn check_task(self, task: Task) -> Result<()> {
        if self.task() != task {
            return Err(Error::UnsupportedFamily(format!("{} cannot be used for the {} task", self.name(), task.name())));
        }
        Ok(())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "constant" | "mean" => ModelFamily::Constant,
            "sgd" | "linear" => ModelFamily::Sgd,
            "svr" => ModelFamily::Svr,
            "logistic" => ModelFamily::Logistic,
            "svc" | "svm" => ModelFamily::Svc,
            "forest" | "rf" | "random-forest" => ModelFamily::Forest,
            "mlp" | "nn" => ModelFamily::Mlp,
            other => return Err(Error::UnsupportedFamily(other.to_string())),
        })
    }
}

/// Declarative run configuration. Every section is optional in the TOML file.
///
/// The top-level `seed` drives the split and every model; seeds inside the
/// model sections are overwritten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub test_fraction: f64,
    /// Columns replaced by `ln(x + offset)` before scaling.
    pub log_columns: Vec<String>,
    /// Duplicate minority classes in the training split.
    pub oversample: bool,
    /// Principal components fed to the logistic model; 0 disables PCA.
    pub pca_components: usize,
    pub trials: usize,
    pub sgd: SgdConfig,
    pub svr: SvrConfig,
    pub logistic: LogisticConfig,
    pub svc: SvcConfig,
    pub forest: ForestParams,
    pub mlp: TrainConfig,
    pub kmeans_restarts: usize,
    /// Search spaces by family name, replacing the built-in presets.
    pub search: BTreeMap<String, ParamSpace>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            test_fraction: 0.2,
            log_columns: DEFAULT_LOG_COLUMNS.iter().filter(|c| **c != AVERAGE_PRICE).map(|c| c.to_string()).collect(),
            oversample: true,
            pca_components: 0,
            trials: DEFAULT_TRIALS,
            sgd: SgdConfig::default(),
            svr: SvrConfig::default(),
            logistic: LogisticConfig::default(),
            svc: SvcConfig::default(),
            forest: ForestParams::default(),
            mlp: TrainConfig::default(),
            kmeans_restarts: crate::city_cluster::DEFAULT_RESTARTS,
            search: BTreeMap::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn split(&self) -> SplitSpec {
        SplitSpec { test_fraction: self.test_fraction, seed: self.seed }
    }

    /// Search space for `family`: the configured one, else the preset.
    pub fn search_space(&self, family: ModelFamily) -> Result<ParamSpace> {
        match self.search.get(family.name()) {
            Some(space) => Ok(space.clone()),
            None => preset_space(family),
        }
    }

    /// Copy with the assignment's values written into `family`'s section.
    pub fn with_params(&self, family: ModelFamily, params: &Assignment) -> Result<Self> {
        let mut out = self.clone();
        let mut section = match family {
            ModelFamily::Sgd => serde_json::to_value(self.sgd)?,
            ModelFamily::Svr => serde_json::to_value(self.svr)?,
            ModelFamily::Logistic => serde_json::to_value(self.logistic)?,
            ModelFamily::Svc => serde_json::to_value(self.svc)?,
            ModelFamily::Forest => serde_json::to_value(self.forest)?,
            ModelFamily::Mlp => serde_json::to_value(&self.mlp)?,
            ModelFamily::Constant => {
                return if params.is_empty() { Ok(out) } else { Err(Error::Config("constant has no hyperparameters".into())) }
            }
        };
        let obj = section.as_object_mut().expect("config sections are structs");
        for (name, value) in params {
            let json = match (family, name.as_str(), value) {
                (ModelFamily::Logistic, "pca", v) => {
                    out.pca_components = match v {
                        ParamValue::Bool(false) => 0,
                        ParamValue::Bool(true) => 10,
                        other => other.as_usize().ok_or_else(|| Error::Config(format!("pca: expected a count, got {other}")))?,
                    };
                    continue;
                }
                (ModelFamily::Forest, "max_depth", v) if v.as_usize() == Some(0) => serde_json::Value::Null,
                (ModelFamily::Mlp, "dropout", v) => {
                    let p = v.as_f64().ok_or_else(|| Error::Config(format!("dropout: expected a rate, got {v}")))?;
                    serde_json::json!(vec![p; self.mlp.hidden.len()])
                }
                (_, _, ParamValue::Float(f)) if obj.get(name).is_some_and(|cur| cur.is_u64() || cur.is_null()) && f.fract() == 0.0 => {
                    serde_json::json!(*f as u64)
                }
                (_, _, v) => serde_json::to_value(v)?,
            };
            if !obj.contains_key(name) {
                return Err(Error::Config(format!("unknown hyperparameter `{name}` for {}", family.name())));
            }
            obj.insert(name.clone(), json);
        }
        let bad = |e: serde_json::Error| Error::Config(format!("{}: {e}", family.name()));
        match family {
            ModelFamily::Sgd => out.sgd = serde_json::from_value(section).map_err(bad)?,
            ModelFamily::Svr => out.svr = serde_json::from_value(section).map_err(bad)?,
            ModelFamily::Logistic => out.logistic = serde_json::from_value(section).map_err(bad)?,
            ModelFamily::Svc => out.svc = serde_json::from_value(section).map_err(bad)?,
            ModelFamily::Forest => out.forest = serde_json::from_value(section).map_err(bad)?,
            ModelFamily::Mlp => out.mlp = serde_json::from_value(section).map_err(bad)?,
            ModelFamily::Constant => unreachable!(),
        }
        Ok(out)
    }
}

/// Built-in search spaces around the default hyperparameters.
pub fn preset_space(family: ModelFamily) -> Result<ParamSpace> {
    let space = ParamSpace::new();
    Ok(match family {
        ModelFamily::Sgd => space
            .with("penalty", Dimension::values(["l1", "l2"]))
            .with("alpha", Dimension::values([1e-4, 1e-3, 1e-2, 0.1, 1.0]))
            .with("degree", Dimension::values([0i64, 1, 2])),
        ModelFamily::Svr => space
            .with("c", Dimension::values([0.1, 0.5, 2.0]))
            .with("gamma", Dimension::values([0.001, 0.01, 0.1]))
            .with("epsilon", Dimension::values([0.1, 0.5, 2.0])),
        ModelFamily::Logistic => space
            .with("c", Dimension::values([0.01, 0.1, 1.0, 10.0]))
            .with("penalty", Dimension::values(["l1", "l2"]))
            .with("mode", Dimension::values(["one_vs_rest", "multinomial"]))
            .with("pca", Dimension::values([false, true])),
        ModelFamily::Svc => space
            .with("c", Dimension::values([0.1, 1.0, 10.0, 100.0]))
            .with("gamma", Dimension::values([0.001, 0.01, 0.1, 1.0])),
        ModelFamily::Forest => space
            .with("n_trees", Dimension::values([35i64, 70, 105]))
            .with("max_depth", Dimension::values([10i64, 47]))
            .with("min_samples_leaf", Dimension::values([1i64, 5, 10])),
        ModelFamily::Mlp => space
            .with("learning_rate", Dimension::values([0.003, 0.01, 0.03]))
            .with("dropout", Dimension::values([0.0, 0.2, 0.5]))
            .with("epochs", Dimension::values([50i64, 100, 200])),
        ModelFamily::Constant => return Err(Error::UnsupportedFamily("constant has nothing to tune".into())),
    })
}

/// Targets of one task.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Natural log of the ticket price.
    LogPrice(Vec<f64>),
    Class(Vec<usize>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::LogPrice(v) => v.len(),
            Targets::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Targets {
        match self {
            Targets::LogPrice(v) => Targets::LogPrice(rows.iter().map(|&i| v[i]).collect()),
            Targets::Class(v) => Targets::Class(rows.iter().map(|&i| v[i]).collect()),
        }
    }

    fn log_price(&self) -> Result<&[f64]> {
        match self {
            Targets::LogPrice(v) => Ok(v),
            Targets::Class(_) => Err(invalid("expected price targets")),
        }
    }

    fn classes(&self) -> Result<&[usize]> {
        match self {
            Targets::Class(v) => Ok(v),
            Targets::LogPrice(_) => Err(invalid("expected class targets")),
        }
    }
}

/// An imputed, numerically encoded concert table.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Every numeric column, including the targets.
    pub features: FeatureMatrix,
    /// Mode of every column, used to fill gaps here and at predict time.
    pub modes: BTreeMap<String, f64>,
}

impl Dataset {
    /// Fills missing cells with column modes and encodes the table.
    pub fn from_table(table: &RawTable) -> Result<Self> {
        let schema = concert_schema();
        let mut filled = table.clone();
        let mut modes = BTreeMap::new();
        for (idx, name) in table.columns.iter().enumerate() {
            if schema.column(name).is_none() {
                continue;
            }
            let mode = column_mode(table, name)?;
            let value: f64 = mode.parse().map_err(|_| invalid(format!("column `{name}` has non-numeric mode `{mode}`")))?;
            modes.insert(name.clone(), value);
            if table.cells.iter().any(|r| r[idx].is_none()) {
                filled = fill_missing(&filled, idx, &mode);
            }
        }
        let keep: Vec<usize> = (0..filled.columns.len()).filter(|&i| schema.column(&filled.columns[i]).is_some()).collect();
        let projected = RawTable {
            columns: keep.iter().map(|&i| filled.columns[i].clone()).collect(),
            cells: filled.cells.iter().map(|r| keep.iter().map(|&i| r[i].clone()).collect()).collect(),
        };
        let features = encode_dummies(&projected, &[], &schema)?;
        Ok(Dataset { features, modes })
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    /// Covariates and targets for `task`.
    pub fn task_data(&self, task: Task) -> Result<(FeatureMatrix, Targets)> {
        let columns = crate::data_model::task_feature_columns(task);
        let x = self.features.select_columns(&columns)?;
        let y = match task {
            Task::Price => {
                let j = self.features.column_index(AVERAGE_PRICE)?;
                let prices = self.features.values.column(j);
                let mut out = Vec::with_capacity(prices.len());
                for (row, &p) in prices.iter().enumerate() {
                    if !(p > 0.0) {
                        return Err(Error::NonPositiveLog { row, column: AVERAGE_PRICE.into(), value: p });
                    }
                    out.push(p.ln());
                }
                Targets::LogPrice(out)
            }
            Task::Location => {
                let j = self.features.column_index(CLASS)?;
                let mut out = Vec::with_capacity(x.n_rows());
                for (row, &c) in self.features.values.column(j).iter().enumerate() {
                    if !(c >= 0.0 && c.fract() == 0.0 && (c as usize) < NUM_CLASSES) {
                        return Err(invalid(format!("row {row}: Class must be an integer in 0..{NUM_CLASSES}, got {c}")));
                    }
                    out.push(c as usize);
                }
                Targets::Class(out)
            }
        };
        Ok((x, y))
    }

    /// Distinct `(income, density)` pairs, one pseudo-city each.
    pub fn cities(&self) -> Result<Vec<CityFeatures>> {
        let inc = self.features.column_index(INCOME_PER_CAPITA)?;
        let den = self.features.column_index(POPULATION_DENSITY)?;
        let pop = self.features.column_index(POPULATION_ESTIMATE)?;
        let mut seen = BTreeMap::new();
        for row in self.features.values.rows() {
            let key = (row[inc].to_bits(), row[den].to_bits());
            seen.entry(key).or_insert(row[pop]);
        }
        Ok(seen
            .into_iter()
            .enumerate()
            .map(|(i, ((a, b), p))| {
                let mut c = CityFeatures::new(format!("city-{i}"), f64::from_bits(a), f64::from_bits(b));
                c.population_estimate = Some(p);
                c
            })
            .collect())
    }
}

/// Fit-time feature transforms, replayed verbatim at predict time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    /// Raw input columns, in order.
    pub columns: Vec<String>,
    pub log_spec: LogSpec,
    pub scaler: ScalerState,
    pub pca: Option<PcaState>,
}

impl Preprocessor {
    pub fn fit(x_train: &FeatureMatrix, log_columns: &[String], pca_components: usize) -> Result<Self> {
        let names: Vec<&str> = log_columns.iter().map(String::as_str).collect();
        let log_spec = LogSpec::fit(x_train, &names)?;
        let logged = log_transform(x_train, &log_spec)?;
        let scaler = fit_minmax(&logged)?;
        let pca = if pca_components > 0 {
            let scaled = apply_minmax(&logged, &scaler)?;
            Some(fit_pca(&scaled, pca_components.min(scaled.n_cols()))?)
        } else {
            None
        };
        Ok(Preprocessor { columns: x_train.column_names.clone(), log_spec, scaler, pca })
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let x = x.select_columns(&self.columns)?;
        let x = apply_minmax(&log_transform(&x, &self.log_spec)?, &self.scaler)?;
        match &self.pca {
            Some(p) => pca_project(&x, p),
            None => Ok(x),
        }
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Constant { value: f64 },
    Sgd(SgdRegressor),
    Svr(SvrModel),
    Logistic(LogisticModel),
    Svc(SvcModel),
    Forest(RandomForest),
    Mlp(MlpModel),
}

impl FittedModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            FittedModel::Constant { .. } => ModelFamily::Constant,
            FittedModel::Sgd(_) => ModelFamily::Sgd,
            FittedModel::Svr(_) => ModelFamily::Svr,
            FittedModel::Logistic(_) => ModelFamily::Logistic,
            FittedModel::Svc(_) => ModelFamily::Svc,
            FittedModel::Forest(_) => ModelFamily::Forest,
            FittedModel::Mlp(_) => ModelFamily::Mlp,
        }
    }

    /// Regression output on the log-price scale.
    pub fn predict_values(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            FittedModel::Constant { value } => Ok(vec![*value; x.n_rows()]),
            FittedModel::Sgd(m) => m.predict(x),
            FittedModel::Svr(m) => m.predict(x),
            other => Err(Error::UnsupportedFamily(format!("{} does not predict prices", other.family().name()))),
        }
    }

    /// `M × 5` class distribution. SVC has no calibrated probabilities and
    /// returns the one-hot vote of its decision values.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Array2<f64>> {
        match self {
            FittedModel::Logistic(m) => m.predict_proba(x),
            FittedModel::Forest(m) => m.predict_proba(x),
            FittedModel::Mlp(m) => m.forward(x),
            FittedModel::Svc(m) => {
                let labels = svc_predict(m, x)?;
                let mut p = Array2::zeros((labels.len(), NUM_CLASSES));
                for (i, c) in labels.into_iter().enumerate() {
                    p[[i, c]] = 1.0;
                }
                Ok(p)
            }
            other => Err(Error::UnsupportedFamily(format!("{} does not predict classes", other.family().name()))),
        }
    }

    pub fn predict_classes(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        match self {
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Svc(m) => svc_predict(m, x),
            _ => Ok(argmax_rows(&self.predict_proba(x)?)),
        }
    }
}

/// Fits `family` on already transformed features. Classification targets
/// are oversampled first when the config asks for it.
pub fn fit_model(
    family: ModelFamily,
    x: &FeatureMatrix,
    y: &Targets,
    config: &PipelineConfig,
    seed: u64,
) -> Result<(FittedModel, Option<TrainHistory>)> {
    if family.task() == Task::Price {
        let y = y.log_price()?;
        return Ok((
            match family {
                ModelFamily::Constant => FittedModel::Constant { value: constant_baseline(y, true)?.value },
                ModelFamily::Sgd => FittedModel::Sgd(sgd_fit(x, y, &SgdConfig { seed, ..config.sgd })?),
                ModelFamily::Svr => FittedModel::Svr(svr_fit(x, y, &config.svr)?),
                _ => unreachable!(),
            },
            None,
        ));
    }
    let y = y.classes()?;
    let (x, y) = if config.oversample {
        let (xo, yo, _) = oversample(x, y, derive_seed(seed, 1))?;
        (xo, yo)
    } else {
        (x.clone(), y.to_vec())
    };
    let model = match family {
        ModelFamily::Logistic => FittedModel::Logistic(logistic_fit(&x, &y, &LogisticConfig { seed, ..config.logistic })?),
        ModelFamily::Svc => FittedModel::Svc(svc_fit(&x, &y, &config.svc)?),
        ModelFamily::Forest => FittedModel::Forest(forest_fit(&x, &y, &ForestParams { seed, ..config.forest })?),
        ModelFamily::Mlp => {
            let cfg = TrainConfig { seed, ..config.mlp.clone() };
            let (model, history) = mlp_train_with_validation(&x, &y, None, &cfg)?;
            return Ok((FittedModel::Mlp(model), Some(history)));
        }
        _ => unreachable!(),
    };
    Ok((model, None))
}

/// Train/test scores of one fitted predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    /// `rmspe` on log price, or `accuracy`.
    pub metric: String,
    pub train: f64,
    pub test: f64,
    /// Price-scale RMSPE on the test split (price task only).
    pub test_price_rmspe: Option<f64>,
}

/// Preprocessing plus model for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPredictor {
    pub task: Task,
    pub preprocessor: Preprocessor,
    pub model: FittedModel,
    pub scores: Scores,
}

impl TrainedPredictor {
    pub fn family(&self) -> ModelFamily {
        self.model.family()
    }

    /// Log-price predictions from raw features.
    pub fn predict_log_price(&self, raw: &FeatureMatrix) -> Result<Vec<f64>> {
        self.model.predict_values(&self.preprocessor.transform(raw)?)
    }

    pub fn predict_proba(&self, raw: &FeatureMatrix) -> Result<Array2<f64>> {
        self.model.predict_proba(&self.preprocessor.transform(raw)?)
    }

    pub fn predict_classes(&self, raw: &FeatureMatrix) -> Result<Vec<usize>> {
        self.model.predict_classes(&self.preprocessor.transform(raw)?)
    }
}

/// Everything `train` reports besides the predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub task: Task,
    pub family: ModelFamily,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub scores: Scores,
    pub confusion: Option<ConfusionMatrix>,
    /// Constant-mean RMSPE (price) or random-guess accuracy (location) on the same split.
    pub baseline_test: f64,
    #[serde(skip)]
    pub history: Option<TrainHistory>,
}

struct Prepared {
    pre: Preprocessor,
    x_train: FeatureMatrix,
    x_test: FeatureMatrix,
    y_train: Targets,
    y_test: Targets,
}

fn prepare(x: &FeatureMatrix, y: &Targets, train: &[usize], test: &[usize], family: ModelFamily, config: &PipelineConfig) -> Result<Prepared> {
    let pca = if family == ModelFamily::Logistic { config.pca_components } else { 0 };
    let raw_train = x.select_rows(train);
    let pre = Preprocessor::fit(&raw_train, &config.log_columns, pca)?;
    Ok(Prepared {
        x_train: pre.transform(&raw_train)?,
        x_test: pre.transform(&x.select_rows(test))?,
        y_train: y.select(train),
        y_test: y.select(test),
        pre,
    })
}

fn score_split(model: &FittedModel, p: &Prepared) -> Result<Scores> {
    match (&p.y_train, &p.y_test) {
        (Targets::LogPrice(ytr), Targets::LogPrice(yte)) => {
            let s = RegressionScore::from_log_predictions(
                model.family().name(),
                ytr,
                &model.predict_values(&p.x_train)?,
                yte,
                &model.predict_values(&p.x_test)?,
            )?;
            Ok(Scores { metric: "rmspe".into(), train: s.train_rmspe, test: s.test_rmspe, test_price_rmspe: Some(s.test_rmspe_price) })
        }
        (Targets::Class(ytr), Targets::Class(yte)) => Ok(Scores {
            metric: "accuracy".into(),
            train: accuracy(ytr, &model.predict_classes(&p.x_train)?)?,
            test: accuracy(yte, &model.predict_classes(&p.x_test)?)?,
            test_price_rmspe: None,
        }),
        _ => Err(invalid("train and test targets differ in kind")),
    }
}

/// Fits one family on the seeded train split and scores both halves.
pub fn train(dataset: &Dataset, task: Task, family: ModelFamily, config: &PipelineConfig) -> Result<(TrainedPredictor, TrainReport)> {
    family.check_task(task)?;
    let (x, y) = dataset.task_data(task)?;
    let (train_idx, test_idx) = config.split().indices(y.len())?;
    let p = prepare(&x, &y, &train_idx, &test_idx, family, config)?;
    let (model, history) = fit_model(family, &p.x_train, &p.y_train, config, config.seed)?;
    let scores = score_split(&model, &p)?;
    let (confusion_matrix, baseline_test) = match &p.y_test {
        Targets::Class(yte) => {
            let predicted = model.predict_classes(&p.x_test)?;
            let guess = random_guess_baseline(NUM_CLASSES, derive_seed(config.seed, 3))?.predict(yte.len());
            (Some(confusion(yte, &predicted)?), accuracy(yte, &guess)?)
        }
        Targets::LogPrice(yte) => {
            let c = constant_baseline(p.y_train.log_price()?, true)?;
            (None, rmspe(yte, &c.predict(yte.len()))?)
        }
    };
    let report = TrainReport {
        task,
        family,
        seed: config.seed,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        scores: scores.clone(),
        confusion: confusion_matrix,
        baseline_test,
        history,
    };
    Ok((TrainedPredictor { task, preprocessor: p.pre, model, scores }, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    Grid,
    Random,
}

impl FromStr for SearchStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(SearchStrategy::Grid),
            "random" => Ok(SearchStrategy::Random),
            other => Err(invalid(format!("unknown search strategy `{other}` (expected grid|random)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub search: SearchResult,
    pub best_config: PipelineConfig,
    pub predictor: TrainedPredictor,
    pub report: TrainReport,
}

/// Searches `family`'s space scoring each trial on a seeded 80/20 split of
/// the training rows, then refits the best assignment through [`train`].
pub fn tune(
    dataset: &Dataset,
    task: Task,
    family: ModelFamily,
    strategy: SearchStrategy,
    config: &PipelineConfig,
) -> Result<TuneOutcome> {
    family.check_task(task)?;
    let space = config.search_space(family)?;
    let (x, y) = dataset.task_data(task)?;
    let (train_idx, _) = config.split().indices(y.len())?;
    let inner = SplitSpec { test_fraction: 0.2, seed: derive_seed(config.seed, 7) };
    let (fit_pos, val_pos) = inner.indices(train_idx.len())?;
    let fit_rows: Vec<usize> = fit_pos.iter().map(|&i| train_idx[i]).collect();
    let val_rows: Vec<usize> = val_pos.iter().map(|&i| train_idx[i]).collect();
    let objective = if task == Task::Price { Objective::Minimize } else { Objective::Maximize };
    let evaluate = |params: &Assignment, trial_seed: u64| -> Result<Evaluation> {
        let cfg = config.with_params(family, params)?;
        let p = prepare(&x, &y, &fit_rows, &val_rows, family, &cfg)?;
        let (model, _) = fit_model(family, &p.x_train, &p.y_train, &cfg, trial_seed)?;
        let s = score_split(&model, &p)?;
        let mut e = Evaluation::from(s.test);
        e.diagnostics.insert("train_score".into(), s.train);
        Ok(e)
    };
    let search = match strategy {
        SearchStrategy::Grid => grid_search(&space, config.seed, objective, evaluate)?,
        SearchStrategy::Random => random_search(&space, config.trials, config.seed, objective, evaluate)?,
    };
    let best_config = config.with_params(family, &search.best().params)?;
    let (predictor, report) = train(dataset, task, family, &best_config)?;
    Ok(TuneOutcome { search, best_config, predictor, report })
}

/// Benchmark rows for one task on a single shared split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub task: Task,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub regression: Vec<RegressionScore>,
    /// `exp` of the mean log price over the training split and over all rows.
    pub price_constant_train: Option<f64>,
    pub price_constant_full: Option<f64>,
    pub classification: Vec<BenchmarkReport>,
    pub confusion: BTreeMap<String, ConfusionMatrix>,
}

impl BenchmarkOutcome {
    pub fn text_table(&self) -> String {
        let mut out = format!("task: {}  seed: {}  train rows: {}  test rows: {}\n\n", self.task.name(), self.seed, self.n_train, self.n_test);
        match self.task {
            Task::Price => {
                out.push_str(&crate::evaluation::regression_table(&self.regression));
                if let (Some(a), Some(b)) = (self.price_constant_train, self.price_constant_full) {
                    out.push_str(&format!("\nconstant price: {a:.3} (train split), {b:.3} (all rows)\n"));
                }
            }
            Task::Location => out.push_str(&crate::evaluation::classification_table(&self.classification)),
        }
        out
    }
}

/// Scores each family at its configured settings against the task's
/// benchmarks. Price rows always start with the constant model.
pub fn benchmark(dataset: &Dataset, task: Task, families: &[ModelFamily], config: &PipelineConfig) -> Result<BenchmarkOutcome> {
    let (x, y) = dataset.task_data(task)?;
    let (train_idx, test_idx) = config.split().indices(y.len())?;
    let mut out = BenchmarkOutcome {
        task,
        seed: config.seed,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        regression: Vec::new(),
        price_constant_train: None,
        price_constant_full: None,
        classification: Vec::new(),
        confusion: BTreeMap::new(),
    };
    let mut families: Vec<ModelFamily> = families.to_vec();
    if task == Task::Price && !families.contains(&ModelFamily::Constant) {
        families.insert(0, ModelFamily::Constant);
    }
    for family in families {
        family.check_task(task)?;
        let p = prepare(&x, &y, &train_idx, &test_idx, family, config)?;
        let (model, _) = fit_model(family, &p.x_train, &p.y_train, config, config.seed)?;
        match (&p.y_train, &p.y_test) {
            (Targets::LogPrice(ytr), Targets::LogPrice(yte)) => {
                out.regression.push(RegressionScore::from_log_predictions(
                    family.name(),
                    ytr,
                    &model.predict_values(&p.x_train)?,
                    yte,
                    &model.predict_values(&p.x_test)?,
                )?);
            }
            (Targets::Class(ytr), Targets::Class(yte)) => {
                let train_pred = model.predict_classes(&p.x_train)?;
                let test_pred = model.predict_classes(&p.x_test)?;
                let guess = random_guess_baseline(NUM_CLASSES, derive_seed(config.seed, 3))?;
                let upper = overfit_upper_bound(family, &p.x_train, ytr, config.seed)?;
                out.classification.push(BenchmarkReport::new(
                    family.name(),
                    accuracy(ytr, &train_pred)?,
                    accuracy(yte, &test_pred)?,
                    guess.expected_accuracy(),
                    accuracy(yte, &guess.predict(yte.len()))?,
                    Some(upper),
                ));
                out.confusion.insert(family.name().to_string(), confusion(yte, &test_pred)?);
            }
            _ => unreachable!(),
        }
    }
    if task == Task::Price {
        let all = y.log_price()?;
        let train_y: Vec<f64> = train_idx.iter().map(|&i| all[i]).collect();
        out.price_constant_train = constant_baseline(&train_y, true)?.price_constant;
        out.price_constant_full = constant_baseline(all, true)?.price_constant;
    }
    Ok(out)
}

/// k-means city classes for a data set, from explicit cities if given.
pub fn fit_city_classes(dataset: &Dataset, cities: Option<&[CityFeatures]>, config: &PipelineConfig) -> Result<KMeansModel> {
    let derived;
    let cities = match cities {
        Some(c) => c,
        None => {
            derived = dataset.cities()?;
            &derived
        }
    };
    let params = KMeansParams { seed: config.seed, n_restarts: config.kmeans_restarts.max(1), ..KMeansParams::default() };
    Ok(kmeans_fit(cities, params)?.model)
}
