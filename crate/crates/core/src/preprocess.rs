//! Log transform, min-max scaling, PCA and class-balancing oversampling.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data_model::{self, ColumnKind, FeatureMatrix};
use crate::error::{invalid, Error, Result};

/// Columns log-transformed by default.
pub const DEFAULT_LOG_COLUMNS: [&str; 5] = [
    data_model::AVERAGE_PRICE,
    data_model::PLAYCOUNT,
    data_model::POPULATION_ESTIMATE,
    data_model::GENRES_NUM,
    data_model::VENUE_CONCERT_COUNT,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogColumn {
    pub name: String,
    pub offset: f64,
}

/// Natural-log transform `ln(x + offset)` for a set of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LogSpec {
    pub columns: Vec<LogColumn>,
}

impl LogSpec {
    pub fn new(columns: &[(&str, f64)]) -> Result<Self> {
        let columns = columns
            .iter()
            .map(|&(name, offset)| {
                if offset < 0.0 || !offset.is_finite() {
                    Err(invalid(format!("log offset for `{name}` must be finite and >= 0")))
                } else {
                    Ok(LogColumn { name: name.to_string(), offset })
                }
            })
            .collect::<Result<_>>()?;
        Ok(LogSpec { columns })
    }

    /// Picks offset 0 for columns that are strictly positive in `x` and 1
    /// where zeros occur. Requested columns absent from `x` are skipped.
    pub fn fit(x: &FeatureMatrix, names: &[&str]) -> Result<Self> {
        let mut columns = Vec::new();
        for &name in names {
            let Ok(j) = x.column_index(name) else { continue };
            let col = x.values.column(j);
            if let Some((row, &v)) = col.iter().enumerate().find(|(_, &v)| v < 0.0 || !v.is_finite()) {
                return Err(Error::NonPositiveLog { row, column: name.to_string(), value: v });
            }
            let offset = if col.iter().all(|&v| v > 0.0) { 0.0 } else { 1.0 };
            columns.push(LogColumn { name: name.to_string(), offset });
        }
        Ok(LogSpec { columns })
    }

    pub fn offset_of(&self, name: &str) -> Option<f64> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.offset)
    }
}

/// Replaces each targeted column by `ln(x + offset)`. Targeted columns not
/// present in `x` are ignored.
pub fn log_transform(x: &FeatureMatrix, spec: &LogSpec) -> Result<FeatureMatrix> {
    let mut out = x.clone();
    for col in &spec.columns {
        let Ok(j) = x.column_index(&col.name) else { continue };
        for (row, v) in out.values.column_mut(j).iter_mut().enumerate() {
            let arg = *v + col.offset;
            if !(arg > 0.0) || !arg.is_finite() {
                return Err(Error::NonPositiveLog { row, column: col.name.clone(), value: arg });
            }
            *v = arg.ln();
        }
    }
    Ok(out)
}

/// Per-column min and max captured at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub column_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax(x: &FeatureMatrix) -> Result<ScalerState> {
    if x.n_rows() == 0 {
        return Err(invalid("cannot fit a scaler on zero rows"));
    }
    let mut min = Vec::with_capacity(x.n_cols());
    let mut max = Vec::with_capacity(x.n_cols());
    for col in x.values.columns() {
        min.push(col.iter().copied().fold(f64::INFINITY, f64::min));
        max.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(ScalerState { column_names: x.column_names.clone(), min, max })
}

/// `(x − min)/(max − min)` by column name; constant columns map to 0 and
/// out-of-range values are not clamped.
pub fn apply_minmax(x: &FeatureMatrix, state: &ScalerState) -> Result<FeatureMatrix> {
    let mut out = x.clone();
    for (j, name) in x.column_names.iter().enumerate() {
        let k = state
            .column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
        let (lo, hi) = (state.min[k], state.max[k]);
        let span = hi - lo;
        out.values.column_mut(j).mapv_inplace(|v| if span > 0.0 { (v - lo) / span } else { 0.0 });
    }
    Ok(out)
}

/// Inverse of [`apply_minmax`] for non-constant columns.
pub fn invert_minmax(x: &FeatureMatrix, state: &ScalerState) -> Result<FeatureMatrix> {
    let mut out = x.clone();
    for (j, name) in x.column_names.iter().enumerate() {
        let k = state
            .column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
        let (lo, hi) = (state.min[k], state.max[k]);
        out.values.column_mut(j).mapv_inplace(|v| lo + v * (hi - lo));
    }
    Ok(out)
}

/// Principal axes of the centred training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaState {
    /// `k × d`, orthonormal rows.
    pub components: Array2<f64>,
    pub means: Array1<f64>,
    pub explained_variance: Vec<f64>,
    pub input_columns: Vec<String>,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of the second value.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[[i, j]].powi(2)).sum();
        let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let values = order.iter().map(|&i| m[[i, i]]).collect();
    let vectors = v.select(Axis(1), &order);
    (values, vectors)
}

/// Sample covariance (divisor `M − 1`) of the columns of `x`.
pub fn covariance(x: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let m = x.nrows();
    let means = x.mean_axis(Axis(0)).expect("non-empty");
    let centred = x - &means;
    let cov = centred.t().dot(&centred) / (m as f64 - 1.0);
    (means, cov)
}

pub fn fit_pca(x: &FeatureMatrix, k: usize) -> Result<PcaState> {
    let d = x.n_cols();
    if k == 0 || k > d {
        return Err(invalid(format!("PCA component count must be in 1..={d}, got {k}")));
    }
    if x.n_rows() < 2 {
        return Err(invalid("PCA needs at least 2 rows"));
    }
    let (means, cov) = covariance(&x.values);
    let (values, vectors) = symmetric_eigen(&cov);
    let mut components = vectors.t().slice(ndarray::s![0..k, ..]).to_owned();
    for mut row in components.rows_mut() {
        if let Some(&first) = row.iter().find(|v| v.abs() > 1e-12) {
            if first < 0.0 {
                row.mapv_inplace(|v| -v);
            }
        }
    }
    let explained_variance = values[..k].iter().map(|&v| v.max(0.0)).collect();
    Ok(PcaState { components, means, explained_variance, input_columns: x.column_names.clone() })
}

/// `(X − means) · componentsᵀ`, output columns named `pc0, pc1, ...`.
pub fn pca_project(x: &FeatureMatrix, state: &PcaState) -> Result<FeatureMatrix> {
    if x.column_names != state.input_columns {
        return Err(Error::DimensionMismatch { expected: state.input_columns.len(), found: x.n_cols() });
    }
    let projected = (&x.values - &state.means).dot(&state.components.t());
    let k = projected.ncols();
    FeatureMatrix::new(projected, (0..k).map(|i| format!("pc{i}")).collect(), vec![ColumnKind::Continuous; k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversampleReport {
    pub original_counts: Vec<usize>,
    pub final_counts: Vec<usize>,
    pub duplicated_indices: Vec<usize>,
}

/// Random duplication of minority-class rows until every present class has
/// the majority count. Original rows come first, in input order.
pub fn oversample(
    x: &FeatureMatrix,
    y: &[usize],
    seed: u64,
) -> Result<(FeatureMatrix, Vec<usize>, OversampleReport)> {
    if y.is_empty() {
        return Err(invalid("cannot oversample an empty data set"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    let n_classes = y.iter().max().map_or(0, |&c| c + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    let original_counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let target = original_counts.iter().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut duplicated = Vec::new();
    for members in by_class.iter().filter(|m| !m.is_empty()) {
        for _ in members.len()..target {
            duplicated.push(members[rng.random_range(0..members.len())]);
        }
    }
    let rows: Vec<usize> = (0..y.len()).chain(duplicated.iter().copied()).collect();
    let x_out = x.select_rows(&rows);
    let y_out: Vec<usize> = rows.iter().map(|&i| y[i]).collect();
    let mut final_counts = vec![0; n_classes];
    for &c in &y_out {
        final_counts[c] += 1;
    }
    Ok((x_out, y_out, OversampleReport { original_counts, final_counts, duplicated_indices: duplicated }))
}
