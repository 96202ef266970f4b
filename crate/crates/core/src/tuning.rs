//! Grid and random search over named hyperparameter dimensions.
//!
//! Trials are scored in parallel; each gets a seed derived from the search
//! seed and its trial index, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, seeded};

pub const DEFAULT_TRIALS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match self {
            ParamValue::Int(v) if *v >= 0 => Some(*v as usize),
            ParamValue::Float(v) if *v >= 0.0 && v.fract() == 0.0 => Some(*v as usize),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ParamValue::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Text(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Uniform,
    LogUniform,
    IntegerUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dimension {
    Values(Vec<ParamValue>),
    Range { low: f64, high: f64, law: Sampling },
}

impl Dimension {
    pub fn values<V: Into<ParamValue>>(vs: impl IntoIterator<Item = V>) -> Self {
        Dimension::Values(vs.into_iter().map(Into::into).collect())
    }

    pub fn range(low: f64, high: f64, law: Sampling) -> Self {
        Dimension::Range { low, high, law }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match self {
            Dimension::Values(v) if v.is_empty() => Err(invalid(format!("dimension {name} has no values"))),
            Dimension::Range { low, high, law } => {
                if !(low < high) || !low.is_finite() || !high.is_finite() {
                    return Err(invalid(format!("dimension {name} needs finite low < high")));
                }
                if *law == Sampling::LogUniform && *low <= 0.0 {
                    return Err(invalid(format!("dimension {name} is log-uniform and needs low > 0")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ParamValue {
        match self {
            Dimension::Values(v) => v[rng.random_range(0..v.len())].clone(),
            Dimension::Range { low, high, law } => match law {
                Sampling::Uniform => ParamValue::Float(rng.random_range(*low..*high)),
                Sampling::LogUniform => ParamValue::Float(rng.random_range(low.ln()..high.ln()).exp()),
                Sampling::IntegerUniform => {
                    ParamValue::Int(rng.random_range(low.ceil() as i64..=high.floor() as i64))
                }
            },
        }
    }

    /// True if `v` could have been produced by this dimension.
    pub fn contains(&self, v: &ParamValue) -> bool {
        match self {
            Dimension::Values(vs) => vs.contains(v),
            Dimension::Range { low, high, law } => match (law, v) {
                (Sampling::IntegerUniform, ParamValue::Int(i)) => (*i as f64) >= *low && (*i as f64) <= *high,
                (Sampling::IntegerUniform, _) => false,
                (_, v) => v.as_f64().is_some_and(|x| x >= *low && x <= *high),
            },
        }
    }
}

/// Named dimensions; names are kept sorted so enumeration order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct ParamSpace {
    pub dimensions: BTreeMap<String, Dimension>,
}

pub type Assignment = BTreeMap<String, ParamValue>;

impl ParamSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, dim: Dimension) -> Self {
        self.dimensions.insert(name.to_string(), dim);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions.is_empty() {
            return Err(invalid("parameter space is empty"));
        }
        for (name, d) in &self.dimensions {
            d.validate(name)?;
        }
        Ok(())
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        a.len() == self.dimensions.len()
            && self.dimensions.iter().all(|(k, d)| a.get(k).is_some_and(|v| d.contains(v)))
    }

    /// Cartesian product, last dimension varying fastest.
    pub fn grid(&self) -> Result<Vec<Assignment>> {
        self.validate()?;
        let mut out = vec![Assignment::new()];
        for (name, d) in &self.dimensions {
            let Dimension::Values(vs) = d else {
                return Err(invalid(format!("dimension {name} is a range and cannot be enumerated")));
            };
            out = out
                .into_iter()
                .flat_map(|a| {
                    vs.iter().map(move |v| {
                        let mut a = a.clone();
                        a.insert(name.clone(), v.clone());
                        a
                    })
                })
                .collect();
        }
        Ok(out)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Assignment {
        self.dimensions.iter().map(|(k, d)| (k.clone(), d.sample(rng))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Minimize,
    Maximize,
}

impl Objective {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Objective::Minimize => a < b,
            Objective::Maximize => a > b,
        }
    }
}

/// What a scoring procedure hands back for one assignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    pub score: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl From<f64> for Evaluation {
    fn from(score: f64) -> Self {
        Evaluation { score, diagnostics: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub params: Assignment,
    /// `None` when the fit failed; `failure` then holds the reason.
    pub score: Option<f64>,
    pub failure: Option<String>,
    pub diagnostics: BTreeMap<String, f64>,
    pub seed: u64,
    #[serde(skip)]
    pub duration_ms: f64,
}

// Wall-clock duration is excluded from equality.
impl PartialEq for TrialResult {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
            && self.params == other.params
            && self.score == other.score
            && self.failure == other.failure
            && self.diagnostics == other.diagnostics
            && self.seed == other.seed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub objective: Objective,
    pub best_index: usize,
    pub trials: Vec<TrialResult>,
}

impl SearchResult {
    pub fn best(&self) -> &TrialResult {
        &self.trials[self.best_index]
    }

    /// One row per trial. Durations vary between runs, so they are only
    /// written when asked for.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, with_durations: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let names: Vec<String> = self.trials.first().map(|t| t.params.keys().cloned().collect()).unwrap_or_default();
        let mut header = vec!["trial".to_string(), "seed".to_string()];
        header.extend(names.iter().cloned());
        header.extend(["score".to_string(), "status".to_string()]);
        if with_durations {
            header.push("duration_ms".to_string());
        }
        w.write_record(&header)?;
        for t in &self.trials {
            let mut row = vec![t.index.to_string(), t.seed.to_string()];
            row.extend(names.iter().map(|n| t.params.get(n).map(|v| v.to_string()).unwrap_or_default()));
            row.push(t.score.map(|s| s.to_string()).unwrap_or_default());
            row.push(t.failure.clone().unwrap_or_else(|| "ok".to_string()));
            if with_durations {
                row.push(format!("{:.3}", t.duration_ms));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn run_trials<F>(assignments: Vec<Assignment>, seed: u64, objective: Objective, evaluate: F) -> Result<SearchResult>
where
    F: Fn(&Assignment, u64) -> Result<Evaluation> + Sync,
{
    let trials: Vec<TrialResult> = assignments
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| {
            let trial_seed = derive_seed(seed, index as u64);
            let start = Instant::now();
            let outcome = evaluate(&params, trial_seed);
            let duration_ms = start.elapsed().as_secs_f64() * 1e3;
            let (score, failure, diagnostics) = match outcome {
                Ok(e) if e.score.is_finite() => (Some(e.score), None, e.diagnostics),
                Ok(e) => (None, Some(format!("non-finite score {}", e.score)), e.diagnostics),
                Err(err) => (None, Some(err.to_string()), BTreeMap::new()),
            };
            TrialResult { index, params, score, failure, diagnostics, seed: trial_seed, duration_ms }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for t in &trials {
        if let Some(s) = t.score {
            if best.is_none_or(|(_, b)| objective.better(s, b)) {
                best = Some((t.index, s));
            }
        }
    }
    match best {
        Some((best_index, _)) => Ok(SearchResult { objective, best_index, trials }),
        None => Err(Error::InvalidArgument(format!(
            "all {} trials failed; first failure: {}",
            trials.len(),
            trials.first().and_then(|t| t.failure.clone()).unwrap_or_default()
        ))),
    }
}

/// Scores the full Cartesian product. Ties go to the earliest assignment.
pub fn grid_search<F>(space: &ParamSpace, seed: u64, objective: Objective, evaluate: F) -> Result<SearchResult>
where
    F: Fn(&Assignment, u64) -> Result<Evaluation> + Sync,
{
    run_trials(space.grid()?, seed, objective, evaluate)
}

/// `n_trials` independent draws from `space`. Ties go to the earliest trial.
pub fn random_search<F>(
    space: &ParamSpace,
    n_trials: usize,
    seed: u64,
    objective: Objective,
    evaluate: F,
) -> Result<SearchResult>
where
    F: Fn(&Assignment, u64) -> Result<Evaluation> + Sync,
{
    space.validate()?;
    if n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    let mut rng = seeded(seed);
    let assignments = (0..n_trials).map(|_| space.sample(&mut rng)).collect();
    run_trials(assignments, seed, objective, evaluate)
}
