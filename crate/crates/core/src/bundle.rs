//! Versioned JSON model bundle: schema, imputation defaults, city classes
//! and one fitted predictor per task, plus request handling for inference.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::city_cluster::{assign_class, CityFeatures, KMeansModel};
use crate::data_model::{
    concert_schema, task_feature_columns, ColumnKind, FeatureMatrix, RawTable, TableSchema, Task, CLASS, CONCERT_POPULARITY,
    DAYS, GENRES, GENRES_NUM, INCOME_PER_CAPITA, LATITUDE, LONGITUDE, MARKET_HEAT, NUM_CLASSES, PLAYCOUNT,
    POPULATION_DENSITY, POPULATION_ESTIMATE, VENUE_CONCERT_COUNT, VENUE_TYPE,
};
use crate::error::{Error, Result};
use crate::pipeline::{Dataset, TrainedPredictor};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMetadata {
    pub seed: u64,
    /// FNV-1a hash of the training file bytes, hex.
    pub data_fingerprint: String,
    pub n_rows: usize,
    /// `default`, `tuned-grid` or `tuned-random`.
    pub preset: String,
    pub tool_version: String,
    /// Fitted model hyperparameters by task name.
    pub hyperparameters: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub format_version: u32,
    pub schema: TableSchema,
    /// Training-data mode of every column; fills gaps at predict time.
    pub defaults: BTreeMap<String, f64>,
    /// Most frequent performance day in the training data.
    pub default_day: String,
    pub city_classes: KMeansModel,
    pub location: Option<TrainedPredictor>,
    pub price: Option<TrainedPredictor>,
    pub metadata: BundleMetadata,
}

/// 64-bit FNV-1a, printed as 16 hex digits.
pub fn fingerprint(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn hyperparameters_of(p: &TrainedPredictor) -> serde_json::Value {
    use crate::pipeline::FittedModel::*;
    let mut v = match &p.model {
        Constant { value } => serde_json::json!({ "value": value }),
        Sgd(m) => serde_json::to_value(m.config).unwrap_or_default(),
        Svr(m) => serde_json::to_value(m.config).unwrap_or_default(),
        Logistic(m) => serde_json::to_value(m.config).unwrap_or_default(),
        Svc(m) => serde_json::to_value(m.config).unwrap_or_default(),
        Forest(m) => serde_json::to_value(m.params).unwrap_or_default(),
        Mlp(m) => serde_json::json!({ "layer_sizes": m.layer_sizes, "dropout": m.dropout }),
    };
    if let Some(obj) = v.as_object_mut() {
        obj.insert("family".into(), serde_json::json!(p.family().name()));
        obj.insert("pca_components".into(), serde_json::json!(p.preprocessor.pca.as_ref().map_or(0, |s| s.components.nrows())));
    }
    v
}

impl Bundle {
    pub fn new(
        dataset: &Dataset,
        city_classes: KMeansModel,
        location: Option<TrainedPredictor>,
        price: Option<TrainedPredictor>,
        seed: u64,
        data_fingerprint: String,
        preset: &str,
    ) -> Result<Self> {
        let mut hyperparameters = BTreeMap::new();
        for p in location.iter().chain(price.iter()) {
            hyperparameters.insert(p.task.name().to_string(), hyperparameters_of(p));
        }
        let day_counts: Vec<f64> = DAYS
            .iter()
            .map(|d| dataset.features.column_index(d).map(|j| dataset.features.values.column(j).sum()).unwrap_or(0.0))
            .collect();
        let mut best = 0;
        for (i, c) in day_counts.iter().enumerate() {
            if *c > day_counts[best] {
                best = i;
            }
        }
        let bundle = Bundle {
            format_version: BUNDLE_FORMAT_VERSION,
            schema: concert_schema(),
            defaults: dataset.modes.clone(),
            default_day: DAYS[best].to_string(),
            city_classes,
            location,
            price,
            metadata: BundleMetadata {
                seed,
                data_fingerprint,
                n_rows: dataset.n_rows(),
                preset: preset.to_string(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                hyperparameters,
            },
        };
        bundle.validate()?;
        Ok(bundle)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::Bundle(format!(
                "unsupported format version {} (expected {BUNDLE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        for (task, p) in [(Task::Location, &self.location), (Task::Price, &self.price)] {
            let Some(p) = p else { continue };
            if p.task != task {
                return Err(Error::Bundle(format!("{} slot holds a {} predictor", task.name(), p.task.name())));
            }
            if p.family().task() != task {
                return Err(Error::Bundle(format!("{} cannot serve the {} task", p.family().name(), task.name())));
            }
            for c in &p.preprocessor.columns {
                if self.schema.column(c).is_none() {
                    return Err(Error::Bundle(format!("predictor column `{c}` is not in the bundled schema")));
                }
                if !self.defaults.contains_key(c) {
                    return Err(Error::Bundle(format!("no default recorded for column `{c}`")));
                }
            }
        }
        if self.location.is_none() && self.price.is_none() {
            return Err(Error::Bundle("bundle holds no predictor".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: Bundle = serde_json::from_str(text).map_err(|e| Error::Bundle(format!("corrupt bundle: {e}")))?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn predictor(&self, task: Task) -> Result<&TrainedPredictor> {
        match task {
            Task::Location => self.location.as_ref(),
            Task::Price => self.price.as_ref(),
        }
        .ok_or_else(|| Error::Bundle(format!("bundle has no {} model", task.name())))
    }

    fn default_of(&self, column: &str) -> f64 {
        self.defaults.get(column).copied().unwrap_or(0.0)
    }

    /// Raw covariates (all 39 price columns) for a table of concerts. Missing
    /// cells and absent columns take the bundle defaults, except `Class`,
    /// which is derived from the city features when absent.
    pub fn rows_from_table(&self, table: &RawTable) -> Result<FeatureMatrix> {
        let columns = task_feature_columns(Task::Price);
        let m = table.n_rows();
        let mut values = Array2::zeros((m, columns.len()));
        for (j, name) in columns.iter().enumerate() {
            let idx = table.column_index(name).ok();
            for r in 0..m {
                let cell = idx.and_then(|i| table.cells[r][i].as_deref());
                values[[r, j]] = match cell {
                    Some(text) => text
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| crate::error::invalid(format!("row {r}: non-numeric `{text}` in `{name}`")))?,
                    None => self.default_of(name),
                };
            }
        }
        let has_class = table.column_index(CLASS).is_ok();
        let mut x = self.matrix(values, &columns);
        if !has_class {
            self.fill_class_from_city(&mut x, &vec![true; m])?;
        }
        Ok(x)
    }

    fn matrix(&self, values: Array2<f64>, columns: &[String]) -> FeatureMatrix {
        let kinds: Vec<ColumnKind> = columns.iter().map(|c| self.schema.kind_of(c)).collect();
        FeatureMatrix { values, column_names: columns.to_vec(), column_kinds: kinds }
    }

    fn fill_class_from_city(&self, x: &mut FeatureMatrix, which: &[bool]) -> Result<()> {
        let (c, inc, den) = (x.column_index(CLASS)?, x.column_index(INCOME_PER_CAPITA)?, x.column_index(POPULATION_DENSITY)?);
        for (r, flag) in which.iter().enumerate() {
            if *flag {
                let city = CityFeatures::new("request", x.values[[r, inc]], x.values[[r, den]]);
                x.values[[r, c]] = assign_class(&city, &self.city_classes)? as f64;
            }
        }
        Ok(())
    }

    /// Raw covariates for JSON requests; failures name the offending field.
    pub fn rows_from_requests(&self, requests: &[PredictRequest]) -> std::result::Result<FeatureMatrix, FieldError> {
        let columns = task_feature_columns(Task::Price);
        let mut values = Array2::zeros((requests.len(), columns.len()));
        let mut derive_class = Vec::with_capacity(requests.len());
        for (r, req) in requests.iter().enumerate() {
            let row = req.to_columns(self)?;
            for (j, name) in columns.iter().enumerate() {
                values[[r, j]] = row.get(name.as_str()).copied().unwrap_or_else(|| self.default_of(name));
            }
            derive_class.push(req.class.is_none() && req.city.is_some());
        }
        let mut x = self.matrix(values, &columns);
        self.fill_class_from_city(&mut x, &derive_class)
            .map_err(|e| FieldError::new("city", e.to_string()))?;
        Ok(x)
    }

    pub fn predict_location(&self, raw: &FeatureMatrix) -> Result<Vec<LocationPrediction>> {
        let p = self.predictor(Task::Location)?;
        let probs = p.predict_proba(raw)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|row| {
                let total: f64 = row.sum();
                let mut probabilities = [0.0; NUM_CLASSES];
                for (slot, v) in probabilities.iter_mut().zip(row.iter()) {
                    *slot = v / total;
                }
                // argmax of the returned distribution, ties to the lowest class
                let class = (0..NUM_CLASSES).fold(0, |best, k| if probabilities[k] > probabilities[best] { k } else { best });
                LocationPrediction { probabilities, class, family: p.family().name().to_string() }
            })
            .collect())
    }

    pub fn predict_price(&self, raw: &FeatureMatrix) -> Result<Vec<PricePrediction>> {
        let p = self.predictor(Task::Price)?;
        Ok(p.predict_log_price(raw)?
            .into_iter()
            .map(|log_price| PricePrediction {
                price: log_price.exp(),
                log_price,
                family: p.family().name().to_string(),
                train_rmspe: p.scores.train,
                test_rmspe: p.scores.test,
                test_rmspe_price: p.scores.test_price_rmspe,
            })
            .collect())
    }

    /// Raw-unit centroid income and density per class.
    pub fn class_centroids(&self) -> Vec<ClassCentroid> {
        self.city_classes
            .raw_centroids()
            .into_iter()
            .enumerate()
            .map(|(class, c)| ClassCentroid { class, income_per_capita: c[0], population_density: c[1] })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCentroid {
    pub class: usize,
    pub income_per_capita: f64,
    pub population_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationPrediction {
    pub probabilities: [f64; NUM_CLASSES],
    /// Argmax of `probabilities`; for a forest this can differ from the
    /// majority vote used by `predict_classes`.
    pub class: usize,
    pub family: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePrediction {
    pub price: f64,
    pub log_price: f64,
    pub family: String,
    /// Log-scale RMSPE of the model on its training and test splits.
    pub train_rmspe: f64,
    pub test_rmspe: f64,
    pub test_rmspe_price: Option<f64>,
}

/// A validation failure tied to one request field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError { field: field.to_string(), message: message.into() }
    }
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CityInput {
    pub income_per_capita: f64,
    pub population_density: f64,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub population_estimate_2017: Option<f64>,
}

/// One what-if concert. Every field is optional; omitted ones take the
/// bundle defaults (training-data modes, most frequent day, no genres).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    #[serde(default)]
    pub genres: Vec<String>,
    pub day: Option<String>,
    pub venue_type: Option<u8>,
    pub concert_popularity: Option<f64>,
    pub playcount: Option<f64>,
    pub genres_num: Option<f64>,
    pub venue_concert_count: Option<f64>,
    pub market_heat: Option<f64>,
    pub population_estimate_2017: Option<f64>,
    /// City attributes; used by the price model and to derive `class`.
    pub city: Option<CityInput>,
    /// City class for the price model; derived from `city` when omitted.
    pub class: Option<usize>,
}

fn non_negative(field: &str, v: Option<f64>) -> std::result::Result<Option<f64>, FieldError> {
    match v {
        Some(x) if !x.is_finite() || x < 0.0 => Err(FieldError::new(field, format!("must be finite and non-negative, got {x}"))),
        other => Ok(other),
    }
}

impl PredictRequest {
    /// Column values this request sets explicitly.
    fn to_columns(&self, bundle: &Bundle) -> std::result::Result<BTreeMap<&'static str, f64>, FieldError> {
        let mut out = BTreeMap::new();
        for g in GENRES {
            out.insert(g, 0.0);
        }
        for g in &self.genres {
            let key = GENRES
                .iter()
                .find(|k| **k == g.as_str())
                .ok_or_else(|| FieldError::new("genres", format!("unknown genre `{g}`; expected one of {}", GENRES.join(", "))))?;
            out.insert(*key, 1.0);
        }
        let day = self.day.clone().unwrap_or_else(|| bundle.default_day.clone());
        if !DAYS.contains(&day.as_str()) {
            return Err(FieldError::new("day", format!("unknown day `{day}`; expected one of {}", DAYS.join(", "))));
        }
        for d in DAYS {
            out.insert(d, if d == day { 1.0 } else { 0.0 });
        }
        if let Some(v) = self.venue_type {
            if !(1..=3).contains(&v) {
                return Err(FieldError::new("venue_type", format!("must be 1, 2 or 3, got {v}")));
            }
            out.insert(VENUE_TYPE, v as f64);
        }
        if let Some(p) = self.concert_popularity {
            if !(0.0..=1.0).contains(&p) {
                return Err(FieldError::new("concert_popularity", format!("must lie in [0, 1], got {p}")));
            }
            out.insert(CONCERT_POPULARITY, p);
        }
        for (field, column, v) in [
            ("playcount", PLAYCOUNT, self.playcount),
            ("venue_concert_count", VENUE_CONCERT_COUNT, self.venue_concert_count),
            ("market_heat", MARKET_HEAT, self.market_heat),
            ("population_estimate_2017", POPULATION_ESTIMATE, self.population_estimate_2017),
        ] {
            if let Some(x) = non_negative(field, v)? {
                out.insert(column, x);
            }
        }
        match non_negative("genres_num", self.genres_num)? {
            Some(x) => {
                out.insert(GENRES_NUM, x);
            }
            None if !self.genres.is_empty() => {
                out.insert(GENRES_NUM, self.genres.len() as f64);
            }
            None => {}
        }
        if let Some(city) = &self.city {
            for (field, column, v) in [
                ("city.income_per_capita", INCOME_PER_CAPITA, Some(city.income_per_capita)),
                ("city.population_density", POPULATION_DENSITY, Some(city.population_density)),
                ("city.population_estimate_2017", POPULATION_ESTIMATE, city.population_estimate_2017),
            ] {
                if let Some(x) = non_negative(field, v)? {
                    out.insert(column, x);
                }
            }
            for (field, column, v, bound) in
                [("city.latitude", LATITUDE, city.latitude, 90.0), ("city.longitude", LONGITUDE, city.longitude, 180.0)]
            {
                if let Some(x) = v {
                    if !x.is_finite() || x.abs() > bound {
                        return Err(FieldError::new(field, format!("must lie in [-{bound}, {bound}], got {x}")));
                    }
                    out.insert(column, x);
                }
            }
        }
        if let Some(c) = self.class {
            if c >= NUM_CLASSES {
                return Err(FieldError::new("class", format!("must be in 0..{NUM_CLASSES}, got {c}")));
            }
            out.insert(CLASS, c as f64);
        }
        Ok(out)
    }
}
