// The SMO dual solver on a two-moons style toy problem.
//
// `cargo run --example kernel_smo`

use concert_planner::data_model::FeatureMatrix;
use concert_planner::kernel_machines::{svc_binary_fit, svr_fit, SvrConfig};
use concert_planner::Result;
use ndarray::Array2;

pub fn run_example() -> Result<()> {
    let n = 60;
    let x = Array2::from_shape_fn((n, 2), |(i, j)| {
        let t = std::f64::consts::PI * (i % 30) as f64 / 29.0;
        let upper = i < 30;
        match (j, upper) {
            (0, true) => t.cos(),
            (1, true) => t.sin(),
            (0, false) => 1.0 - t.cos(),
            _ => 0.5 - t.sin(),
        }
    });
    let y: Vec<f64> = (0..n).map(|i| if i < 30 { 1.0 } else { -1.0 }).collect();
    let x = FeatureMatrix::from_array(x);
    let svc = svc_binary_fit(&x, &y, 10.0, 2.0, true)?;
    let correct = svc.decision(&x.values).iter().zip(&y).filter(|(d, t)| d.signum() == **t).count();
    println!(
        "SVC: {} support vectors, dual objective {:.4}, KKT gap {:.1e}, {} iterations, training accuracy {}/{n}",
        svc.alphas.len(),
        svc.report.dual_objective,
        svc.report.kkt_violation,
        svc.report.iterations,
        correct
    );

    let t: Vec<f64> = (0..n).map(|i| x.values[[i, 0]].sin()).collect();
    let svr = svr_fit(&x, &t, &SvrConfig { c: 5.0, gamma: 1.0, epsilon: 0.05, track_objective: false })?;
    println!("SVR: {} support vectors, total slack {:.4}", svr.dual_coef.len(), svr.total_slack);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
