// Imputation, dummy columns, log transform, min-max scaling and PCA on a
// small concert table.
//
// `cargo run --example preprocessing`

use concert_planner::data_model::Task;
use concert_planner::preprocess::DEFAULT_LOG_COLUMNS;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{Dataset, Preprocessor};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 200, ..SyntheticSpec::default() })?;
    let mut table = data.table();
    // knock out a few cells; the dataset fills them with column modes
    let day = table.column_index("venue_type")?;
    for row in table.cells.iter_mut().step_by(17) {
        row[day] = None;
    }
    println!("missing venue_type cells: {}", table.missing_count("venue_type")?);
    let ds = Dataset::from_table(&table)?;
    println!("venue_type mode: {}", ds.modes["venue_type"]);

    let (x, _) = ds.task_data(Task::Location)?;
    let logs: Vec<String> = DEFAULT_LOG_COLUMNS.iter().map(|s| s.to_string()).collect();
    let pre = Preprocessor::fit(&x, &logs, 0)?;
    let z = pre.transform(&x)?;
    let (lo, hi) = z.values.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("{} covariates scaled into [{lo}, {hi}]", z.n_cols());

    let pca = Preprocessor::fit(&x, &logs, 10)?;
    let p = pca.transform(&x)?;
    let var = &pca.pca.as_ref().expect("pca fitted").explained_variance;
    println!("PCA keeps {} components; leading variances {:.4?}", p.n_cols(), &var[..3]);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
