//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! tolerance and wall-clock budget. Exits non-zero if any criterion fails.
//!
//! Run with `cargo test --test acceptance`.

mod common;

use std::collections::HashSet;
use std::path::Path;
use std::time::{Duration, Instant};

use concert_planner::city_cluster::{kmeans_fit, CityFeatures, KMeansParams};
use concert_planner::cli::{run, Cli};
use concert_planner::data_model::{FeatureMatrix, Task, NUM_CLASSES};
use concert_planner::evaluation::{
    accuracy, confusion, generate_synthetic, overfit_upper_bound, random_guess_baseline, SyntheticSpec,
};
use concert_planner::kernel_machines::{svc_binary_fit, svr_fit, SvrConfig};
use concert_planner::linear_models::{mspe_objective, rmspe, Penalty};
use concert_planner::mlp::MlpModel;
use concert_planner::pipeline::{tune, Dataset, ModelFamily, PipelineConfig, SearchStrategy, Targets};
use clap::Parser;
use common::*;
use ndarray::{Array1, Array2};
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rmspe_oracle() -> Outcome {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..50);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(0.5..500.0) * if r.random_bool(0.1) { -1.0 } else { 1.0 }).collect();
        let y_hat: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..600.0)).collect();
        let got = rmspe(&y, &y_hat).map_err(|e| e.to_string())?;
        worst = worst.max((got - direct_rmspe(&y, &y_hat)).abs());
    }
    ensure(worst <= 1e-12, format!("max |Δ| = {worst:.2e} over 100 pairs (tol 1e-12)"))
}

fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    let d = rows[0].len();
    FeatureMatrix::from_array(Array2::from_shape_fn((rows.len(), d), |(i, j)| rows[i][j]))
}

fn gradient_checks() -> Outcome {
    let mut r = rng(22);
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for config in 0..20 {
        // SGD surrogate: MSPE plus penalty
        let (m, d) = (r.random_range(3..30), r.random_range(1..8));
        let x = Array2::from_shape_fn((m, d), |_| r.random_range(-1.0..1.0));
        let y = Array1::from_shape_fn(m, |_| r.random_range(2.0..7.0));
        let penalty = if config % 2 == 0 { Penalty::L2 } else { Penalty::L1 };
        let alpha = r.random_range(0.0..0.5);
        // keep weights away from the L1 kink
        let params: Vec<f64> = (0..=d).map(|_| r.random_range(0.05..1.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let f = |p: &[f64]| mspe_objective(x.view(), y.view(), Array1::from(p[..d].to_vec()).view(), p[d], penalty, alpha).0;
        let (_, gw, gb) = mspe_objective(x.view(), y.view(), Array1::from(params[..d].to_vec()).view(), params[d], penalty, alpha);
        for i in 0..=d {
            let analytic = if i < d { gw[i] } else { gb };
            worst = worst.max(relative_error(analytic, central_difference(&f, &params, i, h)));
            checked += 1;
        }

        // MLP: every weight and bias
        let n_in = r.random_range(1..6);
        let hidden: Vec<usize> = (0..r.random_range(1..4)).map(|_| r.random_range(1..7)).collect();
        let mut model = MlpModel::init(n_in, &hidden, &vec![0.0; hidden.len()], config as u64);
        for b in model.biases.iter_mut() {
            b.mapv_inplace(|_| r.random_range(-0.3..0.3));
        }
        let n = r.random_range(2..12);
        let xs = matrix(&(0..n).map(|_| (0..n_in).map(|_| r.random_range(-2.0..2.0)).collect()).collect::<Vec<_>>());
        let ys: Vec<usize> = (0..n).map(|_| r.random_range(0..NUM_CLASSES)).collect();
        let (_, grads) = model.loss_and_gradients(&xs, &ys).map_err(|e| e.to_string())?;
        for l in 0..model.weights.len() {
            for idx in 0..model.weights[l].len() {
                let (i, j) = (idx / model.weights[l].ncols(), idx % model.weights[l].ncols());
                let numeric = perturbed_loss(&model, &xs, &ys, h, |mm, s| mm.weights[l][[i, j]] += s);
                worst = worst.max(relative_error(grads.weights[l][[i, j]], numeric));
                checked += 1;
            }
            for i in 0..model.biases[l].len() {
                let numeric = perturbed_loss(&model, &xs, &ys, h, |mm, s| mm.biases[l][i] += s);
                worst = worst.max(relative_error(grads.biases[l][i], numeric));
                checked += 1;
            }
        }
    }
    ensure(worst < 1e-4, format!("max relative error {worst:.2e} over {checked} partials, 20 configurations (tol 1e-4)"))
}

fn perturbed_loss(model: &MlpModel, x: &FeatureMatrix, y: &[usize], h: f64, nudge: impl Fn(&mut MlpModel, f64)) -> f64 {
    let mut plus = model.clone();
    nudge(&mut plus, h);
    let mut minus = model.clone();
    nudge(&mut minus, -h);
    (plus.loss(x, y).unwrap() - minus.loss(x, y).unwrap()) / (2.0 * h)
}

fn dual_oracle() -> Outcome {
    let mut r = rng(33);
    let (mut gap_obj, mut gap_kkt) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let m = r.random_range(2..=6);
        let pts = random_points(&mut r, m, 2);
        let gamma = r.random_range(0.5..5.0);
        let c = r.random_range(0.1..10.0);
        let k = rbf_gram(&pts, gamma);
        let x = matrix(&pts);

        let mut y: Vec<f64> = (0..m).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let svc = svc_binary_fit(&x, &y, c, gamma, false).map_err(|e| e.to_string())?;
        let mut alpha = vec![0.0; m];
        for (&i, &a) in svc.support_indices.iter().zip(&svc.alphas) {
            alpha[i] = a;
        }
        let best = svc_dual_brute_force(&k, &y, c);
        gap_obj = gap_obj.max((svc_dual_objective(&k, &y, &alpha) - best).abs()).max((svc.report.dual_objective - best).abs());
        gap_kkt = gap_kkt.max(svc_kkt_gap(&k, &y, &alpha, c)).max(svc.report.kkt_violation);

        let t: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let epsilon = r.random_range(0.0..0.5);
        let svr = svr_fit(&x, &t, &SvrConfig { c, gamma, epsilon, track_objective: false }).map_err(|e| e.to_string())?;
        let mut beta = vec![0.0; m];
        for (&i, &b) in svr.support_indices.iter().zip(&svr.dual_coef) {
            beta[i] = b;
        }
        let best = svr_dual_brute_force(&k, &t, c, epsilon);
        gap_obj = gap_obj.max((svr_dual_objective(&k, &t, &beta, epsilon) - best).abs()).max((svr.report.dual_objective - best).abs());
        gap_kkt = gap_kkt.max(svr.report.kkt_violation);
    }
    ensure(
        gap_obj <= 1e-3 && gap_kkt <= 1e-3,
        format!("20 SVC + 20 SVR instances, M ≤ 6: max objective gap {gap_obj:.2e}, max KKT violation {gap_kkt:.2e} (tol 1e-3)"),
    )
}

fn kmeans_recovery() -> Outcome {
    let mut r = rng(44);
    let centres = [(20_000.0, 500.0), (35_000.0, 3_000.0), (50_000.0, 6_000.0)];
    for instance in 0..5 {
        let cities: Vec<CityFeatures> = (0..9)
            .map(|i| {
                let (inc, den) = centres[i % 3];
                CityFeatures::new(format!("c{i}"), inc + r.random_range(-800.0..800.0), den + r.random_range(-150.0..150.0))
            })
            .collect();
        let fit = kmeans_fit(&cities, KMeansParams { k: 3, seed: instance, ..KMeansParams::default() }).map_err(|e| e.to_string())?;
        let pts: Vec<Vec<f64>> = cities.iter().map(|c| fit.model.standardize(c).unwrap()).collect();
        let (optimal, best) = brute_force_partition(&pts, 3);
        let planted: Vec<usize> = (0..9).map(|i| i % 3).collect();
        if !same_partition(&fit.assignments, &optimal) || !same_partition(&optimal, &planted) {
            return Err(format!("instance {instance}: fitted partition differs from the brute-force optimum"));
        }
        if (fit.model.inertia - best).abs() > 1e-9 * best.max(1.0) {
            return Err(format!("instance {instance}: inertia {} vs optimum {best}", fit.model.inertia));
        }
        if let Some(w) = fit.inertia_history.windows(2).find(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(format!("instance {instance}: inertia rose from {} to {}", w[0], w[1]));
        }
    }
    ensure(true, "5 planted 3-blob instances match the exhaustive optimum; inertia non-increasing".into())
}

fn benchmark_anchors() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 600, ..SyntheticSpec::default() }).map_err(|e| e.to_string())?;
    let dataset = Dataset::from_table(&data.table()).map_err(|e| e.to_string())?;
    let (x, y) = dataset.task_data(Task::Location).map_err(|e| e.to_string())?;
    let Targets::Class(y) = y else { return Err("location targets are not classes".into()) };

    let truth: Vec<usize> = (0..10_000).map(|i| (i * 7 + i / 5) % NUM_CLASSES).collect();
    let guess = random_guess_baseline(NUM_CLASSES, 5).map_err(|e| e.to_string())?.predict(truth.len());
    let low = accuracy(&truth, &guess).map_err(|e| e.to_string())?;

    let mut seen = HashSet::new();
    let keep: Vec<usize> = (0..x.n_rows())
        .filter(|&i| seen.insert(x.values.row(i).iter().map(|v| v.to_bits()).collect::<Vec<_>>()))
        .collect();
    let xd = x.select_rows(&keep);
    let yd: Vec<usize> = keep.iter().map(|&i| y[i]).collect();
    let high = overfit_upper_bound(ModelFamily::Forest, &xd, &yd, 0).map_err(|e| e.to_string())?;
    ensure(
        (low - 0.2).abs() <= 0.02 && high == 1.0,
        format!("random guess {low:.4} over 10^4 draws (0.20 ± 0.02); forest memorization {high:.4} on {} distinct rows (1.00)", keep.len()),
    )
}

fn headline_analog() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec::default()).map_err(|e| e.to_string())?;
    let dataset = Dataset::from_table(&data.table()).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::default();
    let forest = tune(&dataset, Task::Location, ModelFamily::Forest, SearchStrategy::Random, &cfg).map_err(|e| e.to_string())?;
    let acc = forest.report.scores.test;
    let lower = 1.0 / NUM_CLASSES as f64;
    let mut best = f64::INFINITY;
    let mut best_family = "";
    let mut constant = f64::NAN;
    for family in [ModelFamily::Sgd, ModelFamily::Svr] {
        let out = tune(&dataset, Task::Price, family, SearchStrategy::Random, &cfg).map_err(|e| e.to_string())?;
        constant = out.report.baseline_test;
        if out.report.scores.test < best {
            best = out.report.scores.test;
            best_family = family.name();
        }
    }
    let gap = (constant - best).abs() / best;
    ensure(
        acc >= 0.60 && acc >= 3.0 * lower && gap <= 0.05,
        format!(
            "tuned forest test accuracy {acc:.4} (≥ 0.60, ratio {:.2}× ≥ 3.0×); constant RMSPE {constant:.4} vs tuned {best_family} {best:.4}, gap {:.2}% (≤ 5%)",
            acc / lower,
            gap * 100.0
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let cli = Cli::try_parse_from(["concert-planner", "--quiet"].into_iter().chain(args.iter().copied())).map_err(|e| e.to_string())?;
    run(&cli).map_err(|e| format!("{}: {e}", args[0]))
}

fn run_all_commands(data: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, String> {
    let p = |name: &str| out.join(name).to_string_lossy().into_owned();
    let d = data.to_string_lossy().into_owned();
    cli(&["train", "--data", &d, "--task", "both", "--model", "mlp,sgd", "--seed", "5", "--out", &p("train.json"), "--report", &p("train-report.json"), "--history", &p("history.csv")])?;
    cli(&["tune", "--data", &d, "--task", "both", "--model", "forest,svr", "--seed", "5", "--trials", "4", "--out", &p("tune.json"), "--report", &p("tune-report.json"), "--trials-csv", &p("trials.csv")])?;
    cli(&["tune", "--data", &d, "--task", "location", "--model", "logistic", "--strategy", "grid", "--seed", "5", "--out", &p("grid.json"), "--report", &p("grid-report.json")])?;
    cli(&["benchmark", "--data", &d, "--task", "location", "--seed", "5", "--report", &p("bench-loc.json"), "--text", &p("bench-loc.txt"), "--confusion-dir", &p("confusion")])?;
    cli(&["benchmark", "--data", &d, "--task", "price", "--seed", "5", "--report", &p("bench-price.json"), "--text", &p("bench-price.txt")])?;
    let mut files: Vec<_> = walk(out);
    files.sort();
    Ok(files)
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap().flatten() {
        let path = entry.path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = generate_synthetic(&SyntheticSpec { n_rows: 300, n_cities: 20, seed: 9, ..SyntheticSpec::default() }).map_err(|e| e.to_string())?;
    let csv = dir.path().join("concerts.csv");
    data.table().write_csv(std::fs::File::create(&csv).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        std::fs::create_dir_all(d).map_err(|e| e.to_string())?;
    }
    let first = run_all_commands(&csv, &a)?;
    let second = run_all_commands(&csv, &b)?;
    let rel = |root: &Path, files: &[std::path::PathBuf]| files.iter().map(|f| f.strip_prefix(root).unwrap().to_path_buf()).collect::<Vec<_>>();
    if rel(&a, &first) != rel(&b, &second) {
        return Err("the two runs wrote different file sets".into());
    }
    for (x, y) in first.iter().zip(&second) {
        if std::fs::read(x).map_err(|e| e.to_string())? != std::fs::read(y).map_err(|e| e.to_string())? {
            return Err(format!("{} differs between runs", x.strip_prefix(&a).unwrap().display()));
        }
    }
    ensure(true, format!("{} report/bundle/log files byte-identical across two runs of train, tune (random and grid) and benchmark", first.len()))
}

fn confusion_identities() -> Outcome {
    let mut r = rng(88);
    let mut worst_trace = 0.0f64;
    let mut worst_row = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..200);
        let y: Vec<usize> = (0..n).map(|_| r.random_range(0..NUM_CLASSES)).collect();
        let p: Vec<usize> = (0..n).map(|_| r.random_range(0..NUM_CLASSES)).collect();
        let m = confusion(&y, &p).map_err(|e| e.to_string())?;
        let acc = accuracy(&y, &p).map_err(|e| e.to_string())?;
        worst_trace = worst_trace.max((m.trace() as f64 / n as f64 - acc).abs());
        for (k, row) in m.normalized.iter().enumerate() {
            if m.counts[k].iter().sum::<u64>() > 0 {
                worst_row = worst_row.max((row.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    ensure(
        worst_trace <= 1e-12 && worst_row <= 1e-12,
        format!("100 label vectors: max |trace/M − accuracy| {worst_trace:.1e}, max |row sum − 1| {worst_row:.1e}"),
    )
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "RMSPE oracle equivalence", budget: Duration::from_secs(1), check: rmspe_oracle },
        Criterion { id: 2, name: "gradient checks", budget: Duration::from_secs(30), check: gradient_checks },
        Criterion { id: 3, name: "dual solver oracle", budget: Duration::from_secs(120), check: dual_oracle },
        Criterion { id: 4, name: "k-means recovery", budget: Duration::from_secs(10), check: kmeans_recovery },
        Criterion { id: 5, name: "benchmark protocol anchors", budget: Duration::from_secs(30), check: benchmark_anchors },
        Criterion { id: 6, name: "end-to-end synthetic headline", budget: Duration::from_secs(300), check: headline_analog },
        Criterion { id: 7, name: "determinism", budget: Duration::from_secs(300), check: determinism },
        Criterion { id: 8, name: "confusion-matrix identities", budget: Duration::from_secs(1), check: confusion_identities },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {} {}: {detail} [{:.2}s / budget {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
