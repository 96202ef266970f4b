// Generates the seeded synthetic concert set and reports how well the
// planted popularity rule and its Bayes oracle do.
//
// `cargo run --example synthetic_data`

use concert_planner::evaluation::{bayes_oracle_accuracy, generate_synthetic, planted_rule, SyntheticSpec};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let spec = SyntheticSpec { n_rows: 500, seed: 7, ..SyntheticSpec::default() };
    let data = generate_synthetic(&spec)?;
    let labels = data.class_labels();
    let hits = data.concerts.iter().zip(&labels).filter(|(c, &y)| planted_rule(c) == y).count();
    println!("{} concerts in {} cities", data.concerts.len(), data.cities.len());
    println!("planted rule agrees with {:.1}% of labels (noise {})", 100.0 * hits as f64 / labels.len() as f64, spec.noise);
    println!("Bayes oracle accuracy {:.3}", bayes_oracle_accuracy(&spec)?);

    let dir = std::env::temp_dir().join("concert-planner-synthetic");
    std::fs::create_dir_all(&dir)?;
    data.table().write_csv(std::fs::File::create(dir.join("concerts.csv"))?)?;
    data.write_cities_csv(std::fs::File::create(dir.join("cities.csv"))?)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
