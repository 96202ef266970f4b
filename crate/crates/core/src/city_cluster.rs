//! k-means city classes over income per capita and population density.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, seeded};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityFeatures {
    pub city: String,
    pub income_per_capita: f64,
    pub population_density: f64,
    /// Only used with [`ClusterFeatureSet::WithPopulation`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_estimate: Option<f64>,
}

impl CityFeatures {
    pub fn new(city: impl Into<String>, income_per_capita: f64, population_density: f64) -> Self {
        CityFeatures { city: city.into(), income_per_capita, population_density, population_estimate: None }
    }
}

/// Which city attributes span the clustering space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClusterFeatureSet {
    #[default]
    IncomeDensity,
    WithPopulation,
}

impl ClusterFeatureSet {
    fn dims(self) -> usize {
        match self {
            ClusterFeatureSet::IncomeDensity => 2,
            ClusterFeatureSet::WithPopulation => 3,
        }
    }

    fn raw(self, city: &CityFeatures) -> Result<Vec<f64>> {
        let mut v = vec![city.income_per_capita, city.population_density];
        if self == ClusterFeatureSet::WithPopulation {
            v.push(city.population_estimate.ok_or_else(|| {
                invalid(format!("city `{}` lacks a population estimate", city.city))
            })?);
        }
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(invalid(format!("city `{}` has non-finite or negative features", city.city)));
        }
        Ok(v)
    }
}

/// Fitted clustering; class `j` has the `j`-th smallest centroid income.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub feature_set: ClusterFeatureSet,
    /// Centroids in standardized space, one row per class.
    pub centroids: Vec<Vec<f64>>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub inertia: f64,
    pub seed: u64,
    pub n_restarts: usize,
}

/// Result of [`kmeans_fit`]: the model plus fit-time diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub model: KMeansModel,
    /// Class of every input point, after relabeling.
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub n_restarts: usize,
    pub feature_set: ClusterFeatureSet,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams { k: DEFAULT_K, seed: 0, n_restarts: DEFAULT_RESTARTS, feature_set: ClusterFeatureSet::IncomeDensity }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

struct Run {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    inertia: f64,
    history: Vec<f64>,
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[next].clone();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], k: usize, seed: u64) -> Run {
    let dims = points[0].len();
    let mut centroids = plus_plus_seeds(points, k, seed);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut inertia = 0.0;
        for (p, slot) in points.iter().zip(assignments.iter_mut()) {
            let (j, d) = nearest(p, &centroids);
            inertia += d;
            if *slot != j {
                *slot = j;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                // reseed to the point farthest from its current centroid
                let far = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, sq_dist(p, &centroids[assignments[i]])))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                    .0;
                centroids[j] = points[far].clone();
                assignments[far] = j;
            }
        }
    }
    let inertia = points.iter().zip(&assignments).map(|(p, &a)| sq_dist(p, &centroids[a])).sum();
    Run { centroids, assignments, inertia, history }
}

/// Lloyd's algorithm with k-means++ seeding, best of `n_restarts` by inertia.
pub fn kmeans_fit(cities: &[CityFeatures], params: KMeansParams) -> Result<KMeansFit> {
    let KMeansParams { k, seed, n_restarts, feature_set } = params;
    if k == 0 || n_restarts == 0 {
        return Err(invalid("k and n_restarts must be at least 1"));
    }
    let raw: Vec<Vec<f64>> = cities.iter().map(|c| feature_set.raw(c)).collect::<Result<_>>()?;
    let mut distinct = raw.clone();
    distinct.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    distinct.dedup();
    if distinct.len() < k {
        return Err(invalid(format!("need at least {k} distinct cities, got {}", distinct.len())));
    }
    let dims = feature_set.dims();
    let n = raw.len() as f64;
    let means: Vec<f64> = (0..dims).map(|d| raw.iter().map(|r| r[d]).sum::<f64>() / n).collect();
    let stds: Vec<f64> = (0..dims)
        .map(|d| {
            let var = raw.iter().map(|r| (r[d] - means[d]).powi(2)).sum::<f64>() / n;
            if var > 0.0 { var.sqrt() } else { 1.0 }
        })
        .collect();
    let points: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| r.iter().enumerate().map(|(d, v)| (v - means[d]) / stds[d]).collect())
        .collect();

    let runs: Vec<Run> = (0..n_restarts)
        .into_par_iter()
        .map(|r| lloyd(&points, k, derive_seed(seed, r as u64)))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart");

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        best.centroids[a]
            .iter()
            .zip(&best.centroids[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut new_label = vec![0; k];
    for (label, &old) in order.iter().enumerate() {
        new_label[old] = label;
    }
    let centroids = order.iter().map(|&old| best.centroids[old].clone()).collect();
    let assignments = best.assignments.iter().map(|&a| new_label[a]).collect();
    Ok(KMeansFit {
        model: KMeansModel {
            k,
            feature_set,
            centroids,
            feature_means: means,
            feature_stds: stds,
            inertia: best.inertia,
            seed,
            n_restarts,
        },
        assignments,
        inertia_history: best.history,
    })
}

impl KMeansModel {
    pub fn standardize(&self, city: &CityFeatures) -> Result<Vec<f64>> {
        let raw = self.feature_set.raw(city)?;
        Ok(raw
            .iter()
            .enumerate()
            .map(|(d, v)| (v - self.feature_means[d]) / self.feature_stds[d])
            .collect())
    }

    /// Centroids mapped back to raw feature units.
    pub fn raw_centroids(&self) -> Vec<Vec<f64>> {
        self.centroids
            .iter()
            .map(|c| c.iter().enumerate().map(|(d, v)| v * self.feature_stds[d] + self.feature_means[d]).collect())
            .collect()
    }
}

/// Nearest centroid in standardized space; ties go to the lower class.
pub fn assign_class(city: &CityFeatures, model: &KMeansModel) -> Result<usize> {
    let p = model.standardize(city)?;
    Ok(nearest(&p, &model.centroids).0)
}

#[derive(Debug, Deserialize)]
struct CityRow {
    city: String,
    income_per_capita: f64,
    population_density: f64,
    #[serde(default)]
    population_estimate: Option<f64>,
}

/// Reads a `city,income_per_capita,population_density` table.
pub fn load_cities(path: impl AsRef<Path>) -> Result<Vec<CityFeatures>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_cities(std::fs::File::open(path)?)
}

pub fn read_cities<R: std::io::Read>(reader: R) -> Result<Vec<CityFeatures>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let missing: Vec<String> = ["city", "income_per_capita", "population_density"]
        .iter()
        .filter(|h| !headers.iter().any(|x| x == **h))
        .map(|h| h.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::SchemaMismatch { missing });
    }
    rdr.deserialize::<CityRow>()
        .map(|row| {
            let row = row?;
            Ok(CityFeatures {
                city: row.city,
                income_per_capita: row.income_per_capita,
                population_density: row.population_density,
                population_estimate: row.population_estimate,
            })
        })
        .collect()
}
