// Drives the HTTP router in-process: health, model card and a prediction.
// `concert-planner serve --bundle b.json` runs the same router on a socket.
//
// `cargo run --example inference_service`

use axum::body::Body;
use axum::http::Request;
use concert_planner::bundle::Bundle;
use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{fit_city_classes, train, Dataset, ModelFamily, PipelineConfig};
use concert_planner::service::{router, ServiceState};
use concert_planner::Result;
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn send(state: &std::sync::Arc<ServiceState>, method: &str, uri: &str, body: &str) -> String {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).expect("request");
    let resp = router(state.clone()).oneshot(req).await.expect("infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    format!("{status} {}", String::from_utf8_lossy(&bytes))
}

pub fn run_example() -> Result<()> {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 300, ..SyntheticSpec::default() })?;
    let ds = Dataset::from_table(&data.table())?;
    let cfg = PipelineConfig::default();
    let (loc, _) = train(&ds, Task::Location, ModelFamily::Logistic, &cfg)?;
    let km = fit_city_classes(&ds, None, &cfg)?;
    let state = ServiceState::new(Bundle::new(&ds, km, Some(loc), None, cfg.seed, "example".into(), "default")?);

    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    rt.block_on(async {
        println!("{}", send(&state, "GET", "/health", "").await);
        println!("{}", send(&state, "POST", "/predict/location", r#"{"genres":["jazz"],"day":"Sat","venue_type":3}"#).await);
        println!("{}", send(&state, "POST", "/predict/location", r#"{"genres":["polka"]}"#).await);
        println!("{}", send(&state, "POST", "/predict/price", "{}").await);
    });
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
