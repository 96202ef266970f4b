//! Library results checked against independent reference computations.

mod common;

use approx::assert_relative_eq;
use common::*;
use concert_planner::data_model::{FeatureMatrix, RawTable, SplitSpec, NUM_CLASSES};
use concert_planner::forest::{forest_fit, gini, ForestParams};
use concert_planner::kernel_machines::{gram_matrix, svc_binary_fit, svr_fit, RbfKernel, SvrConfig};
use concert_planner::linear_models::{rmspe, rmspe_optimal_constant, sgd_fit, softmax_rows, Penalty, SgdConfig};
use concert_planner::mlp::MlpModel;
use concert_planner::preprocess::{fit_pca, symmetric_eigen};
use concert_planner::tuning::{Dimension, ParamSpace};
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::Rng;

fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::from_array(Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| rows[i][j]))
}

#[test]
fn paper_split_sizes() {
    assert_eq!(SplitSpec { test_fraction: 0.2, seed: 0 }.sizes(9594), (7675, 1919));
}

#[test]
fn gram_matrix_matches_direct_kernel() {
    let mut r = rng(1);
    let pts = random_points(&mut r, 12, 4);
    let got = gram_matrix(&matrix(&pts).values, RbfKernel { gamma: 0.7 });
    let want = rbf_gram(&pts, 0.7);
    for i in 0..12 {
        for j in 0..12 {
            assert_relative_eq!(got[[i, j]], want[i][j], epsilon = 1e-15);
        }
    }
}

#[test]
fn smo_matches_face_enumeration_on_larger_instances() {
    let mut r = rng(2);
    for _ in 0..5 {
        let m = 8;
        let pts = random_points(&mut r, m, 3);
        let k = rbf_gram(&pts, 2.0);
        let y: Vec<f64> = (0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let svc = svc_binary_fit(&matrix(&pts), &y, 3.0, 2.0, false).unwrap();
        let mut alpha = vec![0.0; m];
        for (&i, &a) in svc.support_indices.iter().zip(&svc.alphas) {
            alpha[i] = a;
        }
        let best = svc_dual_brute_force(&k, &y, 3.0);
        assert!((svc_dual_objective(&k, &y, &alpha) - best).abs() < 1e-3);
        assert!(alpha.iter().all(|&a| (0.0..=3.0).contains(&a)));
        assert!(y.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-9);

        let t: Vec<f64> = (0..m - 1).map(|_| r.random_range(-2.0..2.0)).collect();
        let svr = svr_fit(&matrix(&pts[..m - 1]), &t, &SvrConfig { c: 1.5, gamma: 2.0, epsilon: 0.1, track_objective: true }).unwrap();
        let mut beta = vec![0.0; m - 1];
        for (&i, &b) in svr.support_indices.iter().zip(&svr.dual_coef) {
            beta[i] = b;
        }
        let ks = rbf_gram(&pts[..m - 1], 2.0);
        let best = svr_dual_brute_force(&ks, &t, 1.5, 0.1);
        assert!((svr_dual_objective(&ks, &t, &beta, 0.1) - best).abs() < 1e-3);
        assert!(beta.iter().sum::<f64>().abs() < 1e-9);
        let h = &svr.report.objective_history;
        assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-12), "dual objective must not decrease");
    }
}

#[test]
fn pca_variances_match_nalgebra_eigenvalues() {
    let mut r = rng(3);
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let a: f64 = r.random_range(-1.0..1.0);
            vec![a, 2.0 * a + r.random_range(-0.1..0.1), r.random_range(-0.5..0.5), r.random::<f64>()]
        })
        .collect();
    let x = matrix(&rows);
    let pca = fit_pca(&x, 4).unwrap();
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..4).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let cov: Vec<Vec<f64>> = (0..4)
        .map(|a| (0..4).map(|b| rows.iter().map(|r| (r[a] - means[a]) * (r[b] - means[b])).sum::<f64>() / (n - 1.0)).collect())
        .collect();
    let want = eigenvalues_desc(&cov);
    for (got, want) in pca.explained_variance.iter().zip(&want) {
        assert_relative_eq!(*got, want.max(0.0), epsilon = 1e-10, max_relative = 1e-9);
    }
    let c = &pca.components;
    let gram = c.dot(&c.t());
    for i in 0..4 {
        for j in 0..4 {
            assert_relative_eq!(gram[[i, j]], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
        }
    }
}

#[test]
fn jacobi_eigen_reconstructs_matrix() {
    let mut r = rng(4);
    let b = Array2::from_shape_fn((6, 6), |_| r.random_range(-1.0..1.0));
    let a = &b + &b.t();
    let (values, vectors) = symmetric_eigen(&a);
    let rebuilt = vectors.dot(&Array2::from_diag(&ndarray::Array1::from(values.clone()))).dot(&vectors.t());
    for (x, y) in rebuilt.iter().zip(a.iter()) {
        assert_relative_eq!(*x, *y, epsilon = 1e-10);
    }
    let rows: Vec<Vec<f64>> = a.rows().into_iter().map(|r| r.to_vec()).collect();
    for (got, want) in values.iter().zip(eigenvalues_desc(&rows)) {
        assert_relative_eq!(*got, want, epsilon = 1e-10);
    }
}

#[test]
fn optimal_constant_beats_neighbours() {
    let mut r = rng(5);
    let y: Vec<f64> = (0..50).map(|_| r.random_range(3.0..7.0)).collect();
    let c = rmspe_optimal_constant(&y);
    let at = |v: f64| rmspe(&y, &vec![v; y.len()]).unwrap();
    for delta in [1e-4, 1e-3, 1e-2, 1e-1] {
        assert!(at(c) <= at(c + delta) && at(c) <= at(c - delta));
    }
}

/// Exact MSPE minimizer: least squares weighted by `1/y²`.
fn weighted_least_squares(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let (m, d) = (x.len(), x[0].len());
    let a = DMatrix::from_fn(m, d + 1, |i, j| if j == d { 1.0 / y[i] } else { x[i][j] / y[i] });
    let b = DVector::from_fn(m, |_, _| 1.0);
    let coef = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
    let pred: Vec<f64> = (0..m).map(|i| (0..d).map(|j| x[i][j] * coef[j]).sum::<f64>() + coef[d]).collect();
    direct_rmspe(y, &pred)
}

#[test]
fn sgd_approaches_exact_mspe_minimum() {
    let mut r = rng(6);
    let x: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| r.random::<f64>()).collect()).collect();
    let y: Vec<f64> = x.iter().map(|v| 5.0 + 0.4 * v[0] - 0.3 * v[1] + r.random_range(-0.3..0.3)).collect();
    let best = weighted_least_squares(&x, &y);
    let cfg = SgdConfig { penalty: Penalty::L2, alpha: 1e-8, eta0: 0.5, epochs: 400, degree: 1, ..SgdConfig::default() };
    let model = sgd_fit(&matrix(&x), &y, &cfg).unwrap();
    let got = rmspe(&y, &model.predict(&matrix(&x)).unwrap()).unwrap();
    assert!(got >= best - 1e-12, "cannot beat the exact optimum: {got} < {best}");
    assert!(got <= best * 1.01, "sgd {got} vs exact {best}");
}

#[test]
fn gini_matches_definition() {
    let mut r = rng(7);
    for _ in 0..50 {
        let n = r.random_range(1..40);
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..NUM_CLASSES)).collect();
        let mut impurity = 1.0;
        for k in 0..NUM_CLASSES {
            let p = labels.iter().filter(|&&l| l == k).count() as f64 / n as f64;
            impurity -= p * p;
        }
        assert_relative_eq!(gini(&labels).unwrap(), impurity, epsilon = 1e-15);
    }
}

#[test]
fn memorizing_tree_reproduces_labels() {
    let mut r = rng(8);
    let pts = random_points(&mut r, 150, 5);
    let y: Vec<usize> = (0..150).map(|_| r.random_range(0..NUM_CLASSES)).collect();
    let f = forest_fit(&matrix(&pts), &y, &ForestParams::memorize(0)).unwrap();
    assert_eq!(f.predict(&matrix(&pts)).unwrap(), y);
}

#[test]
fn softmax_matches_direct_exponentials() {
    let z = Array2::from_shape_vec((2, 3), vec![1.0, 2.0, 3.0, -1000.0, 0.0, 1000.0]).unwrap();
    let p = softmax_rows(z);
    let e: f64 = 1.0 + 1f64.exp() + 2f64.exp();
    assert_relative_eq!(p[[0, 0]], 1.0 / e, epsilon = 1e-15);
    assert_relative_eq!(p[[0, 2]], 2f64.exp() / e, epsilon = 1e-15);
    assert_relative_eq!(p[[1, 2]], 1.0, epsilon = 1e-15);
}

/// Inverted dropout keeps the next layer's pre-activation unbiased: its
/// Monte-Carlo mean over masks converges to the inference value.
#[test]
fn dropout_is_unbiased_in_expectation() {
    let model = MlpModel::init(4, &[32, 8], &[0.5, 0.0], 3);
    let x = Array2::from_shape_vec((1, 4), vec![0.3, -0.8, 1.2, 0.5]).unwrap();
    let mut r = rng(9);
    let exact = model.preactivations::<rand_chacha::ChaCha8Rng>(&x, None).unwrap()[1].clone();
    let draws = 20_000;
    let mut sum = Array2::<f64>::zeros(exact.raw_dim());
    let mut sq = Array2::<f64>::zeros(exact.raw_dim());
    for _ in 0..draws {
        let z = model.preactivations(&x, Some(&mut r)).unwrap()[1].clone();
        sq += &z.mapv(|v| v * v);
        sum += &z;
    }
    let mean = &sum / draws as f64;
    for ((m, s), e) in mean.iter().zip(sq.iter()).zip(exact.iter()) {
        let var = (s / draws as f64 - m * m).max(0.0);
        let se = (var / draws as f64).sqrt();
        assert!((m - e).abs() <= 5.0 * se + 1e-12, "mean {m} vs inference {e} (se {se})");
    }
}

#[test]
fn grid_is_the_cartesian_product() {
    let space = ParamSpace::new()
        .with("a", Dimension::Values(vec![1i64.into(), 2i64.into(), 3i64.into()]))
        .with("b", Dimension::Values(vec!["x".into(), "y".into()]));
    let grid = space.grid().unwrap();
    assert_eq!(grid.len(), 6);
    let distinct: std::collections::BTreeSet<String> = grid.iter().map(|g| format!("{g:?}")).collect();
    assert_eq!(distinct.len(), 6);
}

#[test]
fn mode_imputation_uses_most_frequent_value() {
    let cell = |s: &str| if s.is_empty() { None } else { Some(s.to_string()) };
    let rows = [["1", "2"], ["", "2"], ["1", ""], ["3", "3"]];
    let table = RawTable::new(
        vec!["Class".into(), "venue_type".into()],
        rows.iter().map(|r| r.iter().map(|c| cell(c)).collect()).collect(),
    )
    .unwrap();
    let filled = concert_planner::data_model::impute_most_frequent(&table, "Class").unwrap();
    assert_eq!(filled.column("Class").unwrap(), vec![Some("1"), Some("1"), Some("1"), Some("3")]);
    let filled = concert_planner::data_model::impute_most_frequent(&table, "venue_type").unwrap();
    assert_eq!(filled.column("venue_type").unwrap()[2], Some("2"));
}
