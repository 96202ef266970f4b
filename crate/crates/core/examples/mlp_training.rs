// Feed-forward network with dropout and early stopping; prints the
// per-epoch curve.
//
// `cargo run --example mlp_training`

use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{train, Dataset, ModelFamily, PipelineConfig};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 500, ..SyntheticSpec::default() })?;
    let ds = Dataset::from_table(&data.table())?;
    let mut cfg = PipelineConfig::default();
    cfg.mlp.epochs = 60;
    cfg.mlp.dropout = vec![0.2; 3];
    cfg.mlp.patience = Some(10);
    let (_, report) = train(&ds, Task::Location, ModelFamily::Mlp, &cfg)?;
    let history = report.history.expect("mlp records history");
    for e in history.epochs.iter().step_by(10) {
        println!("epoch {:>3}  loss {:.4}  train acc {:.3}", e.epoch, e.train_loss, e.train_accuracy);
    }
    println!("stopped early: {}; test accuracy {:.3}", history.stopped_early, report.scores.test);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
