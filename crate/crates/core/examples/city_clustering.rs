// k-means city classes from income per capita and population density.
//
// `cargo run --example city_clustering`

use concert_planner::city_cluster::{assign_class, kmeans_fit, CityFeatures, KMeansParams};
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::Result;

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 100, n_cities: 60, ..SyntheticSpec::default() })?;
    let cities: Vec<CityFeatures> = data.cities.iter().map(|c| c.features.clone()).collect();
    let fit = kmeans_fit(&cities, KMeansParams::default())?;
    for (k, c) in fit.model.raw_centroids().iter().enumerate() {
        let n = fit.assignments.iter().filter(|&&a| a == k).count();
        println!("class {k}: {n:>2} cities around income {:>6.0}, density {:>6.0}", c[0], c[1]);
    }
    println!("inertia by iteration: {:.4?}", fit.inertia_history);
    let agree = data.cities.iter().zip(&fit.assignments).filter(|(c, &a)| c.class == a).count();
    println!("recovered generator classes for {agree}/{} cities", cities.len());

    let newcomer = CityFeatures::new("newcomer", 41_000.0, 5_100.0);
    println!("a city at 41k income, 5100/sq mi is class {}", assign_class(&newcomer, &fit.model)?);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
