//! HTTP contract of the inference service, driven in-process.

use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use concert_planner::bundle::Bundle;
use concert_planner::data_model::Task;
use concert_planner::evaluation::{generate_synthetic, SyntheticSpec};
use concert_planner::pipeline::{fit_city_classes, train, Dataset, ModelFamily, PipelineConfig};
use concert_planner::service::{resolve_address, router, watch_bundle, ServiceState, PORT_ENV};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn fixture(family: ModelFamily, seed: u64) -> Bundle {
    let data = generate_synthetic(&SyntheticSpec { n_rows: 300, n_cities: 20, seed, ..SyntheticSpec::default() }).unwrap();
    let ds = Dataset::from_table(&data.table()).unwrap();
    let cfg = PipelineConfig { seed, ..PipelineConfig::default() };
    let (loc, _) = train(&ds, Task::Location, family, &cfg).unwrap();
    let (price, _) = train(&ds, Task::Price, ModelFamily::Sgd, &cfg).unwrap();
    let km = fit_city_classes(&ds, None, &cfg).unwrap();
    Bundle::new(&ds, km, Some(loc), Some(price), seed, "fixture".into(), "default").unwrap()
}

fn bundle() -> Bundle {
    static B: OnceLock<Bundle> = OnceLock::new();
    B.get_or_init(|| fixture(ModelFamily::Forest, 0)).clone()
}

async fn call(state: &Arc<ServiceState>, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn health_reports_bundle_version() {
    let state = ServiceState::new(bundle());
    let (status, body) = call(&state, "GET", "/health", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["format_version"], 1);
}

#[tokio::test]
async fn model_card_lists_models_and_classes() {
    let state = ServiceState::new(bundle());
    let (status, body) = call(&state, "GET", "/model-card", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["location"]["family"], "forest");
    assert_eq!(body["price"]["family"], "sgd");
    assert_eq!(body["classes"].as_array().unwrap().len(), 5);
    assert!(body["price"]["scores"]["train"].as_f64().unwrap() > 0.0);
    let incomes: Vec<f64> = body["classes"].as_array().unwrap().iter().map(|c| c["income_per_capita"].as_f64().unwrap()).collect();
    assert!(incomes.windows(2).all(|w| w[0] <= w[1]), "classes are income-ordered");
}

#[tokio::test]
async fn default_location_request_is_a_distribution() {
    let state = ServiceState::new(bundle());
    for body in ["{}", ""] {
        let (status, out) = call(&state, "POST", "/predict/location", body).await;
        assert_eq!(status, StatusCode::OK);
        let p: Vec<f64> = out["probabilities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(p.len(), 5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let argmax = (0..5).fold(0, |b, k| if p[k] > p[b] { k } else { b });
        assert_eq!(out["class"], argmax);
    }
}

#[tokio::test]
async fn price_request_returns_estimate_and_uncertainty() {
    let state = ServiceState::new(bundle());
    let req = r#"{"genres":["jazz"],"day":"Sat","venue_type":3,"city":{"income_per_capita":42000,"population_density":5200}}"#;
    let (status, out) = call(&state, "POST", "/predict/price", req).await;
    assert_eq!(status, StatusCode::OK);
    let price = out["price"].as_f64().unwrap();
    assert!(price > 0.0);
    assert!((out["log_price"].as_f64().unwrap().exp() - price).abs() < 1e-9 * price);
    assert!(out["train_rmspe"].as_f64().unwrap() > 0.0);
}

#[tokio::test]
async fn field_errors_name_the_field() {
    let state = ServiceState::new(bundle());
    let cases = [
        (r#"{"genres":["polka"]}"#, "genres"),
        (r#"{"day":"Someday"}"#, "day"),
        (r#"{"venue_type":7}"#, "venue_type"),
        (r#"{"tempo":120}"#, "tempo"),
        (r#"{"concert_popularity":"high"}"#, "concert_popularity"),
    ];
    for (body, field) in cases {
        let (status, out) = call(&state, "POST", "/predict/location", body).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(out["error"]["kind"], "invalid_field");
        assert!(out["error"]["field"].as_str().unwrap().contains(field), "{body} -> {out}");
    }
    let (status, out) = call(&state, "POST", "/predict/price", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(out["error"]["kind"], "malformed_body");
}

#[tokio::test]
async fn missing_model_is_a_server_error() {
    let mut b = bundle();
    b.price = None;
    let state = ServiceState::new(b);
    let (status, out) = call(&state, "POST", "/predict/price", "{}").await;
    assert!(status.is_server_error());
    assert!(out["error"]["message"].as_str().is_some());
}

#[tokio::test]
async fn concurrent_identical_requests_agree_and_leave_bundle_untouched() {
    let original = bundle();
    let state = ServiceState::new(original.clone());
    let body = r#"{"genres":["rock","indie"],"day":"Fri","concert_popularity":0.4}"#;
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let s = state.clone();
            tokio::spawn(async move { call(&s, "POST", "/predict/location", body).await })
        })
        .collect();
    let mut outs = Vec::new();
    for h in handles {
        outs.push(h.await.unwrap());
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(*state.snapshot(), original);
}

#[tokio::test]
async fn hot_reload_swaps_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bundle.json");
    bundle().save(&path).unwrap();
    let state = ServiceState::new(Bundle::load(&path).unwrap());
    let watcher = tokio::spawn(watch_bundle(state.clone(), path.clone(), std::time::Duration::from_millis(20)));
    tokio::time::sleep(std::time::Duration::from_millis(50)).await;

    let replacement = fixture(ModelFamily::Logistic, 1);
    std::fs::write(&path, replacement.to_json().unwrap()).unwrap();
    // some filesystems have coarse mtimes; nudge it forward explicitly
    let later = std::time::SystemTime::now() + std::time::Duration::from_secs(5);
    std::fs::File::options().write(true).open(&path).unwrap().set_modified(later).unwrap();
    let mut swapped = false;
    for _ in 0..100 {
        tokio::time::sleep(std::time::Duration::from_millis(20)).await;
        if state.snapshot().predictor(Task::Location).unwrap().family() == ModelFamily::Logistic {
            swapped = true;
            break;
        }
    }
    watcher.abort();
    assert!(swapped, "bundle was not reloaded");
}

#[test]
fn port_override_from_environment() {
    // the only test touching this variable
    std::env::set_var(PORT_ENV, "9123");
    let addr = resolve_address("127.0.0.1:8080").unwrap();
    std::env::remove_var(PORT_ENV);
    assert_eq!(addr.port(), 9123);
    assert!(resolve_address("nonsense").is_err());
}
