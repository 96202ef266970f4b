// Lower bound, over-fit upper bound and model scores in one table, for
// both tasks.
//
// `cargo run --example benchmark_report`

use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{benchmark, Dataset, ModelFamily, PipelineConfig};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 400, ..SyntheticSpec::default() })?;
    let ds = Dataset::from_table(&data.table())?;
    let cfg = PipelineConfig::default();
    let loc = benchmark(&ds, Task::Location, &[ModelFamily::Logistic, ModelFamily::Forest], &cfg)?;
    print!("{}", loc.text_table());
    let price = benchmark(&ds, Task::Price, &[ModelFamily::Sgd], &cfg)?;
    print!("{}", price.text_table());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
