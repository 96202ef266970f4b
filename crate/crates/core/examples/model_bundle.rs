// Trains both tasks, writes a bundle, reloads it and answers a what-if
// request.
//
// `cargo run --example model_bundle`

use concert_planner::bundle::{fingerprint, Bundle, CityInput, PredictRequest};
use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{fit_city_classes, train, Dataset, ModelFamily, PipelineConfig};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 400, ..SyntheticSpec::default() })?;
    let mut csv = Vec::new();
    data.table().write_csv(&mut csv)?;
    let ds = Dataset::from_table(&data.table())?;
    let cfg = PipelineConfig::default();
    let (loc, _) = train(&ds, Task::Location, ModelFamily::Forest, &cfg)?;
    let (price, _) = train(&ds, Task::Price, ModelFamily::Sgd, &cfg)?;
    let km = fit_city_classes(&ds, None, &cfg)?;
    let bundle = Bundle::new(&ds, km, Some(loc), Some(price), cfg.seed, fingerprint(&csv), "default")?;

    let path = std::env::temp_dir().join("concert-planner-example-bundle.json");
    bundle.save(&path)?;
    let loaded = Bundle::load(&path)?;
    assert_eq!(loaded.to_json()?, bundle.to_json()?);

    let request = PredictRequest {
        genres: vec!["indie".into(), "rock".into()],
        day: Some("Sat".into()),
        venue_type: Some(2),
        city: Some(CityInput { income_per_capita: 38_000.0, population_density: 4_200.0, ..CityInput::default() }),
        ..PredictRequest::default()
    };
    let x = loaded.rows_from_requests(&[request]).map_err(|e| concert_planner::Error::InvalidArgument(e.to_string()))?;
    let where_to = &loaded.predict_location(&x)?[0];
    let what_price = &loaded.predict_price(&x)?[0];
    println!("class distribution {:.3?} -> class {}", where_to.probabilities, where_to.class);
    println!("price estimate ${:.2} (train RMSPE {:.3})", what_price.price, what_price.train_rmspe);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
