// Log-price regression: constant mean, SGD on the MSPE loss and RBF SVR.
//
// `cargo run --example price_regression`

use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{train, Dataset, ModelFamily, PipelineConfig};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    // a little real signal so the models have something to find
    let data = generate_synthetic(&SyntheticSpec { n_rows: 600, price_signal: 1.0, ..SyntheticSpec::default() })?;
    let ds = Dataset::from_table(&data.table())?;
    let cfg = PipelineConfig::default();
    for family in [ModelFamily::Constant, ModelFamily::Sgd, ModelFamily::Svr] {
        let (_, r) = train(&ds, Task::Price, family, &cfg)?;
        println!(
            "{:<9} train RMSPE {:.4}  test RMSPE {:.4}  (price scale {:.4})",
            family.name(),
            r.scores.train,
            r.scores.test,
            r.scores.test_price_rmspe.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
