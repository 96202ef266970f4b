//! Metrics, the random-guess / over-fit benchmark bounds, confusion
//! matrices and a seeded synthetic concert generator with a planted class
//! rule.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::city_cluster::CityFeatures;
use crate::data_model::{ConcertRecord, FeatureMatrix, RawTable, DAYS, GENRES, NUM_CLASSES};
use crate::error::{invalid, Error, Result};
use crate::forest::{forest_fit, ForestParams};
use crate::kernel_machines::{svc_fit, svc_predict, SvcConfig};
use crate::linear_models::{logistic_fit, rmspe, LogisticConfig, MultiClassMode, Penalty};
use crate::mlp::{mlp_train, TrainConfig};
use crate::pipeline::ModelFamily;
use crate::rng::{derive_seed, seeded};

/// Fraction of exact matches.
pub fn accuracy(y: &[usize], y_hat: &[usize]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: y_hat.len() });
    }
    if y.is_empty() {
        return Err(invalid("accuracy of an empty label vector"));
    }
    Ok(y.iter().zip(y_hat).filter(|(a, b)| a == b).count() as f64 / y.len() as f64)
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
    /// Each row divided by its sum; rows without support stay zero.
    pub normalized: [[f64; NUM_CLASSES]; NUM_CLASSES],
    pub unsupported_rows: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|k| self.counts[k][k]).sum()
    }

    pub fn write_counts_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        self.write_grid(writer, |i, j| self.counts[i][j].to_string())
    }

    pub fn write_normalized_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        self.write_grid(writer, |i, j| format!("{:.6}", self.normalized[i][j]))
    }

    fn write_grid<W: std::io::Write>(&self, writer: W, cell: impl Fn(usize, usize) -> String) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["true\\predicted".to_string()];
        header.extend((0..NUM_CLASSES).map(|k| k.to_string()));
        w.write_record(&header)?;
        for i in 0..NUM_CLASSES {
            let mut row = vec![i.to_string()];
            row.extend((0..NUM_CLASSES).map(|j| cell(i, j)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn confusion(y: &[usize], y_hat: &[usize]) -> Result<ConfusionMatrix> {
    if y.len() != y_hat.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: y_hat.len() });
    }
    let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (&t, &p) in y.iter().zip(y_hat) {
        if t >= NUM_CLASSES || p >= NUM_CLASSES {
            return Err(invalid(format!("label {} outside 0..{NUM_CLASSES}", t.max(p))));
        }
        counts[t][p] += 1;
    }
    let mut normalized = [[0.0; NUM_CLASSES]; NUM_CLASSES];
    let mut unsupported_rows = Vec::new();
    for i in 0..NUM_CLASSES {
        let support: u64 = counts[i].iter().sum();
        if support == 0 {
            unsupported_rows.push(i);
            continue;
        }
        for j in 0..NUM_CLASSES {
            normalized[i][j] = counts[i][j] as f64 / support as f64;
        }
    }
    Ok(ConfusionMatrix { counts, normalized, unsupported_rows })
}

/// Predicts the training mean on the modeling scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantBaseline {
    pub value: f64,
    /// `exp(value)` when the modeling scale is log price.
    pub price_constant: Option<f64>,
}

impl ConstantBaseline {
    pub fn predict(&self, n: usize) -> Vec<f64> {
        vec![self.value; n]
    }
}

pub fn constant_baseline(y_train: &[f64], log_scale: bool) -> Result<ConstantBaseline> {
    if y_train.is_empty() {
        return Err(invalid("constant baseline needs at least one target"));
    }
    let value = y_train.iter().sum::<f64>() / y_train.len() as f64;
    Ok(ConstantBaseline { value, price_constant: log_scale.then(|| value.exp()) })
}

/// Uniform seeded labels over `n_classes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomGuess {
    pub n_classes: usize,
    pub seed: u64,
}

impl RandomGuess {
    pub fn predict(&self, n: usize) -> Vec<usize> {
        let mut rng = seeded(self.seed);
        (0..n).map(|_| rng.random_range(0..self.n_classes)).collect()
    }

    /// Expected accuracy of uniform guessing.
    pub fn expected_accuracy(&self) -> f64 {
        1.0 / self.n_classes as f64
    }
}

pub fn random_guess_baseline(n_classes: usize, seed: u64) -> Result<RandomGuess> {
    if n_classes < 2 {
        return Err(invalid(format!("random guessing needs at least 2 classes, got {n_classes}")));
    }
    Ok(RandomGuess { n_classes, seed })
}

/// Regularization strength used for the kernel and logistic memorization runs.
pub const MEMORIZATION_C: f64 = 1e3;
pub const MEMORIZATION_EPOCHS: usize = 1000;

/// Training accuracy of `family` fitted at its memorization settings.
pub fn overfit_upper_bound(family: ModelFamily, x_train: &FeatureMatrix, y_train: &[usize], seed: u64) -> Result<f64> {
    let predicted = match family {
        ModelFamily::Forest => forest_fit(x_train, y_train, &ForestParams::memorize(seed))?.predict(x_train)?,
        ModelFamily::Mlp => {
            let cfg = TrainConfig { epochs: MEMORIZATION_EPOCHS, patience: None, seed, ..TrainConfig::default() };
            mlp_train(x_train, y_train, &cfg)?.0.predict(x_train)?
        }
        ModelFamily::Svc => {
            let model = svc_fit(x_train, y_train, &SvcConfig { c: MEMORIZATION_C, ..SvcConfig::default() })?;
            svc_predict(&model, x_train)?
        }
        ModelFamily::Logistic => {
            let cfg = LogisticConfig {
                c: MEMORIZATION_C,
                penalty: Penalty::L2,
                mode: MultiClassMode::Multinomial,
                iterations: 2000,
                seed,
                ..LogisticConfig::default()
            };
            logistic_fit(x_train, y_train, &cfg)?.predict(x_train)?
        }
        other => return Err(Error::UnsupportedFamily(format!("{} has no memorization preset", other.name()))),
    };
    accuracy(y_train, &predicted)
}

/// One classifier row of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub family: String,
    pub train_score: f64,
    pub test_score: f64,
    /// `1 / n_classes`.
    pub lower_bound: f64,
    /// Accuracy of seeded uniform guesses on the same test labels.
    pub lower_bound_empirical: f64,
    pub upper_bound: Option<f64>,
    /// `test_score / lower_bound`.
    pub improvement_ratio: f64,
}

impl BenchmarkReport {
    pub fn new(family: &str, train_score: f64, test_score: f64, lower_bound: f64, lower_bound_empirical: f64, upper_bound: Option<f64>) -> Self {
        BenchmarkReport {
            family: family.to_string(),
            train_score,
            test_score,
            lower_bound,
            lower_bound_empirical,
            upper_bound,
            improvement_ratio: test_score / lower_bound,
        }
    }
}

/// One regressor row; RMSPE on the log-price target and on raw prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionScore {
    pub family: String,
    pub train_rmspe: f64,
    pub test_rmspe: f64,
    pub test_rmspe_price: f64,
}

impl RegressionScore {
    /// Scores log-scale predictions; price-scale RMSPE uses `exp` of both.
    pub fn from_log_predictions(family: &str, y_train: &[f64], p_train: &[f64], y_test: &[f64], p_test: &[f64]) -> Result<Self> {
        let exp = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        Ok(RegressionScore {
            family: family.to_string(),
            train_rmspe: rmspe(y_train, p_train)?,
            test_rmspe: rmspe(y_test, p_test)?,
            test_rmspe_price: rmspe(&exp(y_test), &exp(p_test))?,
        })
    }
}

/// Text table with regressors as columns, mirroring the paper's layout.
pub fn regression_table(rows: &[RegressionScore]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<24}", "");
    for r in rows {
        let _ = write!(out, "{:>14}", r.family);
    }
    out.push('\n');
    for (label, f) in [
        ("Train RMSPE (log)", (|r: &RegressionScore| r.train_rmspe) as fn(&RegressionScore) -> f64),
        ("Test RMSPE (log)", |r| r.test_rmspe),
        ("Test RMSPE (price)", |r| r.test_rmspe_price),
    ] {
        let _ = write!(out, "{label:<24}");
        for r in rows {
            let _ = write!(out, "{:>14.4}", f(r));
        }
        out.push('\n');
    }
    out
}

/// Text table with classifiers as columns, accuracies in percent.
pub fn classification_table(rows: &[BenchmarkReport]) -> String {
    let pct = |v: f64| format!("{:.1}%", 100.0 * v);
    let mut out = String::new();
    let _ = write!(out, "{:<24}", "");
    for r in rows {
        let _ = write!(out, "{:>12}", r.family);
    }
    out.push('\n');
    let lines: [(&str, Box<dyn Fn(&BenchmarkReport) -> String>); 6] = [
        ("Benchmark (Low)", Box::new(|r| pct(r.lower_bound))),
        ("Random guess (observed)", Box::new(|r| pct(r.lower_bound_empirical))),
        ("Benchmark (High)", Box::new(|r| r.upper_bound.map(pct).unwrap_or_else(|| "-".into()))),
        ("Training Accuracy", Box::new(|r| pct(r.train_score))),
        ("Testing Accuracy", Box::new(|r| pct(r.test_score))),
        ("Improvement", Box::new(|r| format!("{:.0}%", 100.0 * r.improvement_ratio))),
    ];
    for (label, f) in lines.iter() {
        let _ = write!(out, "{label:<24}");
        for r in rows {
            let _ = write!(out, "{:>12}", f(r));
        }
        out.push('\n');
    }
    out
}

/// Parameters of the synthetic concert generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub n_cities: usize,
    /// Probability that a concert is moved to a city of another class.
    pub noise: f64,
    /// Scale of feature effects on log price; 0 makes price pure noise.
    pub price_signal: f64,
    pub class_weights: [f64; NUM_CLASSES],
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_rows: 2000,
            n_cities: 50,
            noise: 0.2,
            price_signal: 0.0,
            class_weights: [0.15, 0.3, 0.3, 0.15, 0.1],
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(invalid("n_rows must be at least 1"));
        }
        if self.n_cities < NUM_CLASSES {
            return Err(invalid(format!("n_cities must be at least {NUM_CLASSES}")));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(invalid("noise must lie in [0, 1]"));
        }
        if !self.price_signal.is_finite() || self.price_signal < 0.0 {
            return Err(invalid("price_signal must be finite and non-negative"));
        }
        if self.class_weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(invalid("class weights must be positive"));
        }
        Ok(())
    }
}

/// Mean and spread of log ticket price in the generator.
pub const LOG_PRICE_MEAN: f64 = 5.09;
pub const LOG_PRICE_SD: f64 = 0.655;

/// A city row as written to `cities.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCity {
    pub features: CityFeatures,
    pub latitude: f64,
    pub longitude: f64,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub concerts: Vec<ConcertRecord>,
    pub cities: Vec<SyntheticCity>,
    /// Class implied by each concert's features before label noise.
    pub planted_class: Vec<usize>,
}

impl SyntheticData {
    pub fn table(&self) -> RawTable {
        RawTable::from_records(&self.concerts)
    }

    pub fn class_labels(&self) -> Vec<usize> {
        self.concerts.iter().map(|c| c.class_label.unwrap_or(0)).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.concerts.iter().map(|c| c.average_price.unwrap_or(f64::NAN)).collect()
    }

    pub fn write_cities_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["city", "income_per_capita", "population_density", "population_estimate", "latitude", "longitude"])?;
        for c in &self.cities {
            w.write_record([
                c.features.city.clone(),
                crate::data_model::format_number(c.features.income_per_capita),
                crate::data_model::format_number(c.features.population_density),
                c.features.population_estimate.map(crate::data_model::format_number).unwrap_or_default(),
                crate::data_model::format_number(c.latitude),
                crate::data_model::format_number(c.longitude),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

/// Lower edge of the popularity band for class `c`; bands are 0.08 wide
/// with 0.02 gaps.
pub fn popularity_band(c: usize) -> f64 {
    0.25 + 0.1 * c as f64
}

/// The generator's own labelling rule: reads the class off the popularity
/// band. Exact on noise-free data.
pub fn planted_rule(record: &ConcertRecord) -> usize {
    let raw = ((record.concert_popularity - popularity_band(0) - 0.04) / 0.1).round();
    raw.clamp(0.0, (NUM_CLASSES - 1) as f64) as usize
}

/// Seeded concerts with a planted class structure.
///
/// Cities come in `NUM_CLASSES` groups with increasing income and density.
/// Each concert draws a class, takes a popularity inside that class's band
/// and leans towards four class-specific genres; with probability `noise`
/// it is then placed in a city of a different class. Population and market
/// heat carry no class information. Log price is normal around a baseline
/// plus `price_signal` times a fixed feature effect.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let per_class = spec.n_cities / NUM_CLASSES;
    let mut cities = Vec::new();
    let income_noise = Normal::new(0.0, 800.0).expect("valid sd");
    let density_noise = Normal::new(0.0, 150.0).expect("valid sd");
    for c in 0..NUM_CLASSES {
        for i in 0..per_class {
            let income = round_to(20_000.0 + 8_000.0 * c as f64 + income_noise.sample(&mut rng), 0);
            let density = round_to((800.0 + 1_500.0 * c as f64 + density_noise.sample(&mut rng)).max(50.0), 1);
            let population = round_to(rng.random_range(50_000.0..3_000_000.0), 0);
            let mut features = CityFeatures::new(format!("city-{c}-{i:02}"), income, density);
            features.population_estimate = Some(population);
            cities.push(SyntheticCity {
                features,
                latitude: round_to(rng.random_range(25.0..48.0), 4),
                longitude: round_to(rng.random_range(-123.0..-70.0), 4),
                class: c,
            });
        }
    }
    let total_weight: f64 = spec.class_weights.iter().sum();
    let log_noise = Normal::new(0.0, LOG_PRICE_SD).expect("valid sd");
    let play_law = Normal::<f64>::new(10.0, 1.5).expect("valid sd");
    let venue_law = Normal::<f64>::new(2.0, 1.0).expect("valid sd");
    let mut concerts = Vec::with_capacity(spec.n_rows);
    let mut planted = Vec::with_capacity(spec.n_rows);
    for _ in 0..spec.n_rows {
        let mut u = rng.random::<f64>() * total_weight;
        let mut t = NUM_CLASSES - 1;
        for (k, w) in spec.class_weights.iter().enumerate() {
            if u < *w {
                t = k;
                break;
            }
            u -= w;
        }
        let popularity = round_to(popularity_band(t) + rng.random_range(0.0..0.08), 4);
        let mut genres = [false; 20];
        let primary = if rng.random::<f64>() < 0.6 { 4 * t + rng.random_range(0..4) } else { rng.random_range(0..GENRES.len()) };
        genres[primary] = true;
        if rng.random::<f64>() < 0.3 {
            genres[rng.random_range(0..GENRES.len())] = true;
        }
        let n_genres = genres.iter().filter(|g| **g).count();
        let class = if rng.random::<f64>() < spec.noise {
            let others: Vec<usize> = (0..NUM_CLASSES).filter(|&k| k != t).collect();
            *others.choose(&mut rng).expect("four other classes")
        } else {
            t
        };
        let city = &cities[class * per_class + rng.random_range(0..per_class)];
        let day = rng.random_range(0..DAYS.len());
        let venue_type = rng.random_range(1..=3u8);
        let effect = 0.15 * (class as f64 - 2.0)
            + 0.8 * (popularity - 0.45)
            + if day == 5 || day == 6 { 0.1 } else { 0.0 }
            + 0.05 * (venue_type as f64 - 2.0);
        let log_price = LOG_PRICE_MEAN + spec.price_signal * effect + log_noise.sample(&mut rng);
        let record = ConcertRecord {
            average_price: Some(round_to(log_price.exp(), 2).max(1.0)),
            latitude: city.latitude,
            longitude: city.longitude,
            concert_popularity: popularity,
            playcount: play_law.sample(&mut rng).exp().round(),
            population_estimate_2017: city.features.population_estimate.unwrap_or(0.0),
            market_heat: round_to(rng.random::<f64>(), 4),
            estimated_per_capita_income: city.features.income_per_capita,
            population_density: city.features.population_density,
            class_label: Some(class),
            genres,
            genres_num: (n_genres + rng.random_range(0..3)) as f64,
            venue_concert_count: 1.0 + venue_law.sample(&mut rng).exp().floor(),
            venue_type,
            day,
        };
        concerts.push(record);
        planted.push(t);
    }
    Ok(SyntheticData { concerts, cities, planted_class: planted })
}

/// Seed used for the held-out draw of [`bayes_oracle_accuracy`].
pub fn held_out_seed(seed: u64) -> u64 {
    derive_seed(seed, 0x0b5e_55ed)
}

/// Accuracy of [`planted_rule`] on a fresh draw of the same spec.
pub fn bayes_oracle_accuracy(spec: &SyntheticSpec) -> Result<f64> {
    let held_out = generate_synthetic(&SyntheticSpec { seed: held_out_seed(spec.seed), ..spec.clone() })?;
    let predicted: Vec<usize> = held_out.concerts.iter().map(planted_rule).collect();
    accuracy(&held_out.class_labels(), &predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn accuracy_direct_count() {
        assert_eq!(accuracy(&[0, 1, 2, 3], &[0, 1, 0, 0]).unwrap(), 0.5);
        assert_eq!(accuracy(&[4, 4], &[4, 4]).unwrap(), 1.0);
        assert!(accuracy(&[0], &[0, 1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn confusion_tabulation() {
        let m = confusion(&[0, 0, 1], &[0, 1, 1]).unwrap();
        assert_eq!(m.counts[0], [1, 1, 0, 0, 0]);
        assert_eq!(m.counts[1], [0, 1, 0, 0, 0]);
        assert_eq!(m.normalized[0], [0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(m.unsupported_rows, vec![2, 3, 4]);
        assert!(confusion(&[5], &[0]).is_err());
    }

    #[test]
    fn confusion_csv_layout() {
        let m = confusion(&[0, 1], &[0, 1]).unwrap();
        let mut buf = Vec::new();
        m.write_counts_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "true\\predicted,0,1,2,3,4");
        assert_eq!(text.lines().nth(1).unwrap(), "0,1,0,0,0,0");
    }

    #[test]
    fn constant_baseline_cases() {
        let b = constant_baseline(&[1.0, 3.0], false).unwrap();
        assert_eq!(b.value, 2.0);
        assert_eq!(b.price_constant, None);
        let b = constant_baseline(&[7.5; 3], false).unwrap();
        assert_eq!(rmspe(&[7.5; 3], &b.predict(3)).unwrap(), 0.0);
        let b = constant_baseline(&[5.0801], true).unwrap();
        assert_abs_diff_eq!(b.price_constant.unwrap(), 160.77, epsilon = 0.03);
        let b = constant_baseline(&[160.774f64.ln(); 4], true).unwrap();
        assert_abs_diff_eq!(b.price_constant.unwrap(), 160.774, epsilon = 1e-9);
        assert!(constant_baseline(&[], true).is_err());
    }

    #[test]
    fn random_guess_rate() {
        let g = random_guess_baseline(5, 3).unwrap();
        let y = random_guess_baseline(5, 4).unwrap().predict(10_000);
        let acc = accuracy(&y, &g.predict(10_000)).unwrap();
        assert!((acc - 0.2).abs() <= 0.02, "{acc}");
        assert!(random_guess_baseline(1, 0).is_err());
    }

    #[test]
    fn perfect_balanced_ratio_is_five() {
        let r = BenchmarkReport::new("x", 1.0, 1.0, 0.2, 0.2, Some(1.0));
        assert_abs_diff_eq!(r.improvement_ratio, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn unsupported_memorization() {
        let x = FeatureMatrix::from_array(ndarray::array![[0.0], [1.0]]);
        assert!(matches!(overfit_upper_bound(ModelFamily::Sgd, &x, &[0, 1], 0), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn synthetic_is_deterministic_and_valid() {
        let spec = SyntheticSpec { n_rows: 300, seed: 5, ..Default::default() };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        for r in &a.concerts {
            r.validate().unwrap();
        }
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.table().write_csv(&mut buf_a).unwrap();
        b.table().write_csv(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn planted_rule_exact_without_noise() {
        let spec = SyntheticSpec { n_rows: 500, noise: 0.0, seed: 2, ..Default::default() };
        let d = generate_synthetic(&spec).unwrap();
        let predicted: Vec<usize> = d.concerts.iter().map(planted_rule).collect();
        assert_eq!(predicted, d.class_labels());
        assert_eq!(d.planted_class, d.class_labels());
    }

    #[test]
    fn bayes_oracle_tracks_noise() {
        let acc = bayes_oracle_accuracy(&SyntheticSpec { n_rows: 4000, noise: 0.5, seed: 1, ..Default::default() }).unwrap();
        assert!((acc - 0.5).abs() < 0.03, "{acc}");
    }

    #[test]
    fn bad_specs_rejected() {
        for spec in [
            SyntheticSpec { n_rows: 0, ..Default::default() },
            SyntheticSpec { noise: 1.5, ..Default::default() },
            SyntheticSpec { n_cities: 3, ..Default::default() },
            SyntheticSpec { class_weights: [0.0, 1.0, 1.0, 1.0, 1.0], ..Default::default() },
        ] {
            assert!(generate_synthetic(&spec).is_err());
        }
    }
}
