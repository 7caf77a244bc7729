use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use serde_json::Value;
use tetrascope_service::{router, ServiceConfig};
use tower::ServiceExt;

fn app() -> Router {
    router(ServiceConfig::default())
}

async fn get(app: Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = app.oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn get_json(uri: &str) -> (StatusCode, Value) {
    let (status, body) = get(app(), uri).await;
    (status, serde_json::from_slice(&body).unwrap())
}

#[tokio::test]
async fn healthz_reports_version() {
    let (status, body) = get(app(), "/healthz").await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().starts_with("tetrascope "));
}

#[tokio::test]
async fn measures_lists_registry() {
    let (status, body) = get_json("/api/measures").await;
    assert_eq!(status, StatusCode::OK);
    let list = body.as_array().unwrap();
    assert_eq!(list.len(), 22);
    let fb = list.iter().find(|m| m["id"] == "f_beta").unwrap();
    assert_eq!(fb["params"][0]["name"], "beta");
    assert_eq!(fb["params"][0]["default"], 1.0);
    assert_eq!(fb["params"][0]["interval"]["hi"], Value::Null);
    let (_, again) = get(app(), "/api/measures").await;
    assert_eq!(serde_json::to_vec(&body).unwrap(), serde_json::to_vec(&serde_json::from_slice::<Value>(&again).unwrap()).unwrap());
}

#[tokio::test]
async fn field_for_accuracy_at_unit_resolution() {
    let (status, body) = get_json("/api/field?measure=accuracy&n=1").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["points"].as_array().unwrap().len(), 4);
    assert_eq!(body["values"], serde_json::json!([1.0, 0.0, 0.0, 1.0]));
    assert_eq!(body["xyz"].as_array().unwrap().len(), 12);
    assert_eq!(body["gamut"]["undefined"], 0);
}

#[tokio::test]
async fn field_nulls_for_undefined_precision() {
    let (status, body) = get_json("/api/field?measure=precision&n=10").await;
    assert_eq!(status, StatusCode::OK);
    let values = body["values"].as_array().unwrap();
    assert_eq!(values.len(), 286);
    assert_eq!(values.iter().filter(|v| v.is_null()).count(), 11);
    assert_eq!(body["gamut"]["undefined"], 11);
}

#[tokio::test]
async fn field_accepts_parameters() {
    let (status, a) = get_json("/api/field?measure=f_beta&n=3&param.beta=2").await;
    assert_eq!(status, StatusCode::OK);
    let (_, b) = get_json("/api/field?measure=f_beta&n=3").await;
    assert_ne!(a["values"], b["values"]);
    let (status, _) = get_json("/api/field?measure=f_beta&n=3&param.beta=-1").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn field_errors() {
    let (status, body) = get_json("/api/field?measure=accuracy&n=10000").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["status"], 422);
    let (status, _) = get_json("/api/field?measure=nope&n=5").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = get_json("/api/field?measure=accuracy").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn identical_queries_are_byte_identical() {
    let uri = "/api/field?measure=mcc&n=12";
    let (_, a) = get(app(), uri).await;
    let (_, b) = get(app(), uri).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn etag_round_trip() {
    let uri = "/api/field?measure=mcc&n=4";
    let resp = app().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let tag = resp.headers()[header::ETAG].clone();
    let resp = app()
        .oneshot(Request::get(uri).header(header::IF_NONE_MATCH, tag).body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_MODIFIED);
}

#[tokio::test]
async fn slice_shapes_and_errors() {
    let (status, body) = get_json("/api/slice?measure=accuracy&n=100&pos_fraction=0.5").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((body["tpr_steps"].as_u64(), body["tnr_steps"].as_u64()), (Some(51), Some(51)));
    let values = body["values"].as_array().unwrap();
    assert_eq!(values.len(), 51 * 51);
    assert_eq!(values[51 * 51 - 1], 1.0);
    let (status, body) = get_json("/api/slice?measure=accuracy&n=100&pos_fraction=0.1").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["values"].as_array().unwrap().len(), 1001);
    let (status, body) = get_json("/api/slice?measure=accuracy&n=100&pos_fraction=0.303").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "resolution");
    assert!(body["message"].as_str().unwrap().contains("0.3 and 0.31"));
}

#[tokio::test]
async fn props_for_accuracy() {
    let (status, body) = get_json("/api/props?measures=accuracy&n=5").await;
    assert_eq!(status, StatusCode::OK);
    let cells = body["rows"][0]["cells"].as_array().unwrap();
    for cell in cells {
        let expected = if cell["property"] == "imbalance_invariance" { "fails" } else { "holds" };
        assert_eq!(cell["report"]["verdict"], expected, "{}", cell["property"]);
    }
    let (status, _) = get_json("/api/props?measures=accuracy,nope&n=5").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn threshold_endpoint() {
    let (status, body) =
        get_json("/api/threshold?measure=iba_gmean&param=alpha&property=monotonicity&lo=0&hi=4&tol=0.001&n=16").await;
    assert_eq!(status, StatusCode::OK);
    let keys: Vec<_> = body.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys.len(), 8);
    assert!(body["estimate"].as_f64().unwrap() > 0.3);
    let (status, body) =
        get_json("/api/threshold?measure=iba_gmean&param=alpha&property=monotonicity&lo=0&hi=0.1&n=10").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "bracket");
    let (status, _) = get_json("/api/threshold?measure=nope&param=alpha&property=monotonicity&lo=0&hi=1").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn over_budget_requests_are_rejected() {
    let config = ServiceConfig { budget: Duration::from_millis(1), max_n: 300, ..Default::default() };
    let (status, body) = get(router(config), "/api/props?measures=all&n=30").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let body: Value = serde_json::from_slice(&body).unwrap();
    assert!(body["message"].as_str().unwrap().contains("lower n"));
}

#[tokio::test]
async fn cors_headers_present() {
    let resp = app()
        .oneshot(Request::get("/api/measures").header(header::ORIGIN, "http://localhost:5173").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}
