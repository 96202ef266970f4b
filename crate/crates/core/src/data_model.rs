//! Concert schema, CSV ingestion, imputation, dummy encoding and splitting.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const AVERAGE_PRICE: &str = "average_price";
pub const LATITUDE: &str = "latitude";
pub const LONGITUDE: &str = "longitude";
pub const CONCERT_POPULARITY: &str = "concert_popularity";
pub const PLAYCOUNT: &str = "playcount";
pub const POPULATION_ESTIMATE: &str = "Population_Estimate_2017";
pub const MARKET_HEAT: &str = "market_heat";
pub const INCOME_PER_CAPITA: &str = "Estimated_per_capita_income";
pub const POPULATION_DENSITY: &str = "Population_density";
pub const CLASS: &str = "Class";
pub const GENRES_NUM: &str = "genres_num";
pub const VENUE_CONCERT_COUNT: &str = "venue_concert_count";
pub const VENUE_TYPE: &str = "venue_type";

/// Music-type dummies in schema order.
pub const GENRES: [&str; 20] = [
    "alternative",
    "blues",
    "classic-rock",
    "classical",
    "country",
    "electronic",
    "folk",
    "hip-hop",
    "hard-rock",
    "indie",
    "jazz",
    "latin",
    "punk",
    "pop",
    "rap",
    "reggae",
    "rnb",
    "rock",
    "soul",
    "techno",
];

/// Performance-day dummies in schema order.
pub const DAYS: [&str; 7] = ["Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"];

/// Number of city classes.
pub const NUM_CLASSES: usize = 5;

/// Values treated as missing in a CSV cell.
pub const MISSING_MARKERS: [&str; 2] = ["", "NA"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Dummy,
    Ordinal,
}

/// Which learning problem a feature matrix is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Ticket price regression.
    Price,
    /// City-class classification.
    Location,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Price => "price",
            Task::Location => "location",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "price" => Ok(Task::Price),
            "location" => Ok(Task::Location),
            other => Err(invalid(format!("unknown task `{other}` (expected price|location)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub numeric: bool,
    pub required: bool,
}

/// Column layout a CSV file is checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<ColumnSpec>,
}

impl TableSchema {
    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn kind_of(&self, name: &str) -> ColumnKind {
        self.column(name).map(|c| c.kind).unwrap_or(ColumnKind::Continuous)
    }

    pub fn is_numeric(&self, name: &str) -> bool {
        self.column(name).map(|c| c.numeric).unwrap_or(false)
    }

    /// Same columns with the targets (`average_price`, `Class`) made optional.
    pub fn without_required_targets(&self) -> TableSchema {
        let columns = self
            .columns
            .iter()
            .cloned()
            .map(|mut c| {
                if c.name == AVERAGE_PRICE || c.name == CLASS {
                    c.required = false;
                }
                c
            })
            .collect();
        TableSchema { columns }
    }
}

fn spec(name: &str, kind: ColumnKind) -> ColumnSpec {
    ColumnSpec { name: name.to_string(), kind, numeric: true, required: true }
}

/// The 40-column concert layout (39 covariates plus the price target).
pub fn concert_schema() -> TableSchema {
    use ColumnKind::*;
    let mut columns = vec![
        spec(AVERAGE_PRICE, Continuous),
        spec(LATITUDE, Continuous),
        spec(LONGITUDE, Continuous),
        spec(CONCERT_POPULARITY, Continuous),
        spec(PLAYCOUNT, Continuous),
        spec(POPULATION_ESTIMATE, Continuous),
        spec(MARKET_HEAT, Continuous),
        spec(INCOME_PER_CAPITA, Continuous),
        spec(POPULATION_DENSITY, Continuous),
        spec(CLASS, Ordinal),
    ];
    columns.extend(GENRES.iter().map(|g| spec(g, Dummy)));
    columns.push(spec(GENRES_NUM, Continuous));
    columns.push(spec(VENUE_CONCERT_COUNT, Continuous));
    columns.push(spec(VENUE_TYPE, Ordinal));
    columns.extend(DAYS.iter().map(|d| spec(d, Dummy)));
    TableSchema { columns }
}

/// Covariate columns used for a task, in schema order.
///
/// Price uses every column except the target (39). Location drops the
/// class label itself, the coordinates and the two clustering features (34).
pub fn task_feature_columns(task: Task) -> Vec<String> {
    let schema = concert_schema();
    let excluded: &[&str] = match task {
        Task::Price => &[AVERAGE_PRICE],
        Task::Location => &[
            AVERAGE_PRICE,
            CLASS,
            LATITUDE,
            LONGITUDE,
            INCOME_PER_CAPITA,
            POPULATION_DENSITY,
        ],
    };
    schema
        .columns
        .iter()
        .filter(|c| !excluded.contains(&c.name.as_str()))
        .map(|c| c.name.clone())
        .collect()
}

/// One concert row in typed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcertRecord {
    pub average_price: Option<f64>,
    pub latitude: f64,
    pub longitude: f64,
    pub concert_popularity: f64,
    pub playcount: f64,
    pub population_estimate_2017: f64,
    pub market_heat: f64,
    pub estimated_per_capita_income: f64,
    pub population_density: f64,
    pub class_label: Option<usize>,
    pub genres: [bool; 20],
    pub genres_num: f64,
    pub venue_concert_count: f64,
    pub venue_type: u8,
    /// Index into [`DAYS`].
    pub day: usize,
}

impl ConcertRecord {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.average_price {
            if !(p > 0.0) {
                return Err(invalid(format!("average_price must be positive, got {p}")));
            }
        }
        if !(0.0..=1.0).contains(&self.concert_popularity) {
            return Err(invalid("concert_popularity must lie in [0, 1]"));
        }
        for (name, v) in [
            (PLAYCOUNT, self.playcount),
            (POPULATION_ESTIMATE, self.population_estimate_2017),
            (MARKET_HEAT, self.market_heat),
            (INCOME_PER_CAPITA, self.estimated_per_capita_income),
            (POPULATION_DENSITY, self.population_density),
            (GENRES_NUM, self.genres_num),
            (VENUE_CONCERT_COUNT, self.venue_concert_count),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if let Some(c) = self.class_label {
            if c >= NUM_CLASSES {
                return Err(invalid(format!("Class must be in 0..=4, got {c}")));
            }
        }
        if !(1..=3).contains(&self.venue_type) {
            return Err(invalid(format!("venue_type must be 1, 2 or 3, got {}", self.venue_type)));
        }
        if self.day >= DAYS.len() {
            return Err(invalid(format!("day index {} out of range", self.day)));
        }
        Ok(())
    }

    /// Cells in [`concert_schema`] order.
    pub fn to_cells(&self) -> Vec<Option<String>> {
        let num = |v: f64| Some(format_number(v));
        let flag = |b: bool| Some(if b { "1".to_string() } else { "0".to_string() });
        let mut cells = vec![
            self.average_price.map(format_number),
            num(self.latitude),
            num(self.longitude),
            num(self.concert_popularity),
            num(self.playcount),
            num(self.population_estimate_2017),
            num(self.market_heat),
            num(self.estimated_per_capita_income),
            num(self.population_density),
            self.class_label.map(|c| c.to_string()),
        ];
        cells.extend(self.genres.iter().map(|&g| flag(g)));
        cells.push(num(self.genres_num));
        cells.push(num(self.venue_concert_count));
        cells.push(Some(self.venue_type.to_string()));
        cells.extend((0..DAYS.len()).map(|d| flag(d == self.day)));
        cells
    }

    /// Reads row `row` of a table laid out with the concert columns.
    pub fn from_table_row(table: &RawTable, row: usize) -> Result<Self> {
        let get = |name: &str| -> Result<Option<f64>> {
            let idx = table.column_index(name)?;
            Ok(table.cells[row][idx].as_deref().and_then(|s| s.trim().parse::<f64>().ok()))
        };
        let need = |name: &str| -> Result<f64> {
            get(name)?.ok_or_else(|| invalid(format!("row {row}: missing value for `{name}`")))
        };
        let flag = |name: &str| -> Result<bool> {
            let v = need(name)?;
            if v == 0.0 || v == 1.0 {
                Ok(v == 1.0)
            } else {
                Err(invalid(format!("row {row}: `{name}` must be 0 or 1, got {v}")))
            }
        };
        let mut genres = [false; 20];
        for (slot, g) in genres.iter_mut().zip(GENRES) {
            *slot = flag(g)?;
        }
        let mut day = None;
        for (i, d) in DAYS.iter().enumerate() {
            if flag(d)? {
                if day.is_some() {
                    return Err(invalid(format!("row {row}: more than one day flag set")));
                }
                day = Some(i);
            }
        }
        let day = day.ok_or_else(|| invalid(format!("row {row}: no day flag set")))?;
        let class_label = match get(CLASS)? {
            Some(v) if v >= 0.0 && v.fract() == 0.0 => Some(v as usize),
            Some(v) => return Err(invalid(format!("row {row}: invalid Class {v}"))),
            None => None,
        };
        let record = ConcertRecord {
            average_price: get(AVERAGE_PRICE)?,
            latitude: need(LATITUDE)?,
            longitude: need(LONGITUDE)?,
            concert_popularity: need(CONCERT_POPULARITY)?,
            playcount: need(PLAYCOUNT)?,
            population_estimate_2017: need(POPULATION_ESTIMATE)?,
            market_heat: need(MARKET_HEAT)?,
            estimated_per_capita_income: need(INCOME_PER_CAPITA)?,
            population_density: need(POPULATION_DENSITY)?,
            class_label,
            genres,
            genres_num: need(GENRES_NUM)?,
            venue_concert_count: need(VENUE_CONCERT_COUNT)?,
            venue_type: need(VENUE_TYPE)? as u8,
            day,
        };
        record.validate()?;
        Ok(record)
    }
}

/// Shortest round-trip decimal form; integers print without a fraction.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Header plus a grid of optional text cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn new(columns: Vec<String>, cells: Vec<Vec<Option<String>>>) -> Result<Self> {
        if let Some((i, row)) = cells.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(invalid(format!(
                "row {i} has {} cells, header has {}",
                row.len(),
                columns.len()
            )));
        }
        Ok(RawTable { columns, cells })
    }

    pub fn from_records(records: &[ConcertRecord]) -> Self {
        let columns = concert_schema().columns.into_iter().map(|c| c.name).collect();
        let cells = records.iter().map(ConcertRecord::to_cells).collect();
        RawTable { columns, cells }
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<&str>>> {
        let idx = self.column_index(name)?;
        Ok(self.cells.iter().map(|r| r[idx].as_deref()).collect())
    }

    pub fn missing_count(&self, name: &str) -> Result<usize> {
        Ok(self.column(name)?.iter().filter(|c| c.is_none()).count())
    }

    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        RawTable {
            columns: self.columns.clone(),
            cells: rows.iter().map(|&r| self.cells[r].clone()).collect(),
        }
    }

    /// Writes the table as CSV, missing cells as empty fields.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in &self.cells {
            w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn records(&self) -> Result<Vec<ConcertRecord>> {
        (0..self.n_rows()).map(|r| ConcertRecord::from_table_row(self, r)).collect()
    }
}

fn is_missing(cell: &str) -> bool {
    MISSING_MARKERS.contains(&cell.trim())
}

/// Loads a CSV snapshot, checking the header against `schema`.
///
/// Columns outside the schema are kept as-is. Numeric schema columns whose
/// cells fail to parse are turned into missing values.
pub fn load_csv(path: impl AsRef<Path>, schema: &TableSchema) -> Result<RawTable> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_csv(file, schema)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(reader: R, schema: &TableSchema) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let missing: Vec<String> = schema
        .columns
        .iter()
        .filter(|c| c.required && !columns.contains(&c.name))
        .map(|c| c.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::SchemaMismatch { missing });
    }
    let numeric: Vec<bool> = columns.iter().map(|c| schema.is_numeric(c)).collect();
    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record
            .iter()
            .zip(&numeric)
            .map(|(cell, &is_num)| {
                if is_missing(cell) || (is_num && cell.trim().parse::<f64>().is_err()) {
                    None
                } else {
                    Some(cell.to_string())
                }
            })
            .collect();
        cells.push(row);
    }
    RawTable::new(columns, cells)
}

/// Most frequent non-missing value of a column.
///
/// Ties go to the smallest value when every observed cell is numeric,
/// otherwise to the lexicographically first one.
pub fn column_mode(table: &RawTable, column: &str) -> Result<String> {
    let values: Vec<&str> = table.column(column)?.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(Error::EmptyColumn(column.to_string()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &values {
        *counts.entry(v).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    let tied: Vec<&str> = counts.iter().filter(|(_, &c)| c == best).map(|(v, _)| *v).collect();
    let parsed: Option<Vec<f64>> = tied.iter().map(|v| v.parse::<f64>().ok()).collect();
    let all_numeric = values.iter().all(|v| v.parse::<f64>().is_ok());
    let mode = match parsed {
        Some(nums) if all_numeric => {
            let (i, _) = nums
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("at least one tied value");
            tied[i]
        }
        _ => tied[0],
    };
    Ok(mode.to_string())
}

/// Fills missing cells of `column` with its mode; other cells are untouched.
pub fn impute_most_frequent(table: &RawTable, column: &str) -> Result<RawTable> {
    let idx = table.column_index(column)?;
    if !table.cells.iter().any(|r| r[idx].is_none()) {
        return Ok(table.clone());
    }
    let mode = column_mode(table, column)?;
    Ok(fill_missing(table, idx, &mode))
}

pub(crate) fn fill_missing(table: &RawTable, idx: usize, value: &str) -> RawTable {
    let mut out = table.clone();
    for row in &mut out.cells {
        if row[idx].is_none() {
            row[idx] = Some(value.to_string());
        }
    }
    out
}

/// Numeric design matrix with column metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub column_names: Vec<String>,
    pub column_kinds: Vec<ColumnKind>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, column_names: Vec<String>, column_kinds: Vec<ColumnKind>) -> Result<Self> {
        if values.ncols() != column_names.len() || column_names.len() != column_kinds.len() {
            return Err(Error::DimensionMismatch { expected: values.ncols(), found: column_names.len() });
        }
        Ok(FeatureMatrix { values, column_names, column_kinds })
    }

    /// All-continuous matrix with generated column names `x0, x1, ...`.
    pub fn from_array(values: Array2<f64>) -> Self {
        let d = values.ncols();
        FeatureMatrix {
            values,
            column_names: (0..d).map(|j| format!("x{j}")).collect(),
            column_kinds: vec![ColumnKind::Continuous; d],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(0), rows),
            column_names: self.column_names.clone(),
            column_kinds: self.column_kinds.clone(),
        }
    }

    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx: Vec<usize> = names.iter().map(|n| self.column_index(n)).collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            values: self.values.select(Axis(1), &idx),
            column_names: names.to_vec(),
            column_kinds: idx.iter().map(|&i| self.column_kinds[i]).collect(),
        })
    }

    pub fn dummy_count(&self) -> usize {
        self.column_kinds.iter().filter(|&&k| k == ColumnKind::Dummy).count()
    }
}

pub type TargetVector = Array1<f64>;

/// Sorted vocabularies of the categorical columns seen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummyEncoder {
    pub vocabularies: Vec<(String, Vec<String>)>,
}

impl DummyEncoder {
    pub fn fit(table: &RawTable, categorical_columns: &[&str]) -> Result<Self> {
        let mut vocabularies = Vec::new();
        for &col in categorical_columns {
            let vocab: BTreeSet<String> = table.column(col)?.into_iter().flatten().map(str::to_string).collect();
            if vocab.is_empty() {
                return Err(Error::EmptyColumn(col.to_string()));
            }
            vocabularies.push((col.to_string(), vocab.into_iter().collect()));
        }
        Ok(DummyEncoder { vocabularies })
    }

    /// Expands categorical columns into 0/1 indicators in place of the source
    /// column; every other column must be numeric and passes through with the
    /// kind given by `schema`.
    pub fn transform(&self, table: &RawTable, schema: &TableSchema) -> Result<FeatureMatrix> {
        let m = table.n_rows();
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for (j, col) in table.columns.iter().enumerate() {
            if let Some((_, vocab)) = self.vocabularies.iter().find(|(c, _)| c == col) {
                let mut block = vec![vec![0.0; m]; vocab.len()];
                for (r, row) in table.cells.iter().enumerate() {
                    let Some(value) = row[j].as_deref() else {
                        return Err(invalid(format!("row {r}: missing value in categorical column `{col}`")));
                    };
                    let k = vocab.iter().position(|v| v == value).ok_or_else(|| Error::UnseenCategory {
                        column: col.clone(),
                        value: value.to_string(),
                    })?;
                    block[k][r] = 1.0;
                }
                for (value, values) in vocab.iter().zip(block) {
                    names.push(format!("{col}={value}"));
                    kinds.push(ColumnKind::Dummy);
                    columns.push(values);
                }
            } else {
                let mut values = Vec::with_capacity(m);
                for (r, row) in table.cells.iter().enumerate() {
                    let cell = row[j]
                        .as_deref()
                        .ok_or_else(|| invalid(format!("row {r}: missing value in column `{col}`")))?;
                    let v = cell
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| invalid(format!("row {r}: non-numeric value `{cell}` in column `{col}`")))?;
                    values.push(v);
                }
                names.push(col.clone());
                kinds.push(schema.kind_of(col));
                columns.push(values);
            }
        }
        let d = columns.len();
        let values = Array2::from_shape_fn((m, d), |(r, c)| columns[c][r]);
        FeatureMatrix::new(values, names, kinds)
    }
}

/// Fits vocabularies and encodes in one step.
pub fn encode_dummies(table: &RawTable, categorical_columns: &[&str], schema: &TableSchema) -> Result<FeatureMatrix> {
    DummyEncoder::fit(table, categorical_columns)?.transform(table, schema)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { test_fraction: 0.2, seed: 0 }
    }
}

impl SplitSpec {
    /// `(train, test)` sizes: train gets `floor(M·(1−f))`, test the rest.
    pub fn sizes(&self, m: usize) -> (usize, usize) {
        let train = ((m as f64) * (1.0 - self.test_fraction) + 1e-9).floor() as usize;
        let train = train.min(m);
        (train, m - train)
    }

    /// Seeded permutation cut into train and test index sets.
    pub fn indices(&self, m: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if m < 2 {
            return Err(invalid(format!("need at least 2 rows to split, got {m}")));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(invalid(format!("test_fraction must be in (0, 1), got {}", self.test_fraction)));
        }
        let mut idx: Vec<usize> = (0..m).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        idx.shuffle(&mut rng);
        let (n_train, _) = self.sizes(m);
        let test = idx.split_off(n_train);
        Ok((idx, test))
    }
}

/// Train/test halves of a design matrix and its targets.
#[derive(Debug, Clone)]
pub struct Split<T> {
    pub x_train: FeatureMatrix,
    pub y_train: Vec<T>,
    pub x_test: FeatureMatrix,
    pub y_test: Vec<T>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

pub fn train_test_split<T: Clone>(x: &FeatureMatrix, y: &[T], spec: &SplitSpec) -> Result<Split<T>> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    let (train, test) = spec.indices(y.len())?;
    Ok(Split {
        x_train: x.select_rows(&train),
        y_train: train.iter().map(|&i| y[i].clone()).collect(),
        x_test: x.select_rows(&test),
        y_test: test.iter().map(|&i| y[i].clone()).collect(),
        train_indices: train,
        test_indices: test,
    })
}
