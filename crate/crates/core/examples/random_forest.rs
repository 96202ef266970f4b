// Random forest city-class classifier with its confusion matrix.
//
// `cargo run --example random_forest`

use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{train, Dataset, ModelFamily, PipelineConfig};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 800, ..SyntheticSpec::default() })?;
    let ds = Dataset::from_table(&data.table())?;
    let (_, report) = train(&ds, Task::Location, ModelFamily::Forest, &PipelineConfig::default())?;
    println!("train accuracy {:.3}, test accuracy {:.3}", report.scores.train, report.scores.test);
    if let Some(m) = &report.confusion {
        println!("confusion (rows true, columns predicted):");
        for row in &m.counts {
            println!("  {row:?}");
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
