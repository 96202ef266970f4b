// Grid and random search over a parameter space, with a toy objective and
// then a real forest search.
//
// `cargo run --example hyperparameter_search`

use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{tune, Dataset, ModelFamily, PipelineConfig, SearchStrategy};
use concert_planner::tuning::{grid_search, random_search, Dimension, Objective, ParamSpace, Sampling};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let space = ParamSpace::new()
        .with("x", Dimension::Range { low: -2.0, high: 2.0, law: Sampling::Uniform })
        .with("k", Dimension::Values(vec![1i64.into(), 2i64.into(), 3i64.into()]));
    let bowl = |a: &concert_planner::tuning::Assignment, _seed: u64| {
        let x = a["x"].as_f64().unwrap_or(0.0);
        let k = a["k"].as_f64().unwrap_or(0.0);
        Ok(((x - 0.5).powi(2) + (k - 2.0).powi(2)).into())
    };
    let r = random_search(&space, 40, 1, Objective::Minimize, bowl)?;
    println!("random search best {:?} -> {:.4}", r.best().params, r.best().score.unwrap_or(f64::NAN));

    let grid = ParamSpace::new().with("k", Dimension::Values(vec![1i64.into(), 2i64.into(), 3i64.into()]));
    let g = grid_search(&grid, 1, Objective::Minimize, |a, _| Ok(((a["k"].as_f64().unwrap_or(0.0) - 2.0).abs()).into()))?;
    println!("grid search tried {} points, best {:?}", g.trials.len(), g.best().params);

    let data = generate_synthetic(&SyntheticSpec { n_rows: 400, ..SyntheticSpec::default() })?;
    let ds = Dataset::from_table(&data.table())?;
    let cfg = PipelineConfig { trials: 6, ..PipelineConfig::default() };
    let out = tune(&ds, Task::Location, ModelFamily::Forest, SearchStrategy::Random, &cfg)?;
    let mut log = Vec::new();
    out.search.write_csv(&mut log, false)?;
    print!("{}", String::from_utf8_lossy(&log));
    println!("refit test accuracy {:.3}", out.report.scores.test);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
