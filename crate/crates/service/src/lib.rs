//! HTTP/JSON front end for the measure engine.
//!
//! Endpoints:
//!
//! - `GET /healthz` returns the version string
//! - `GET /api/measures` lists the registry
//! - `GET /api/field?measure=&n=&param.<k>=<v>` samples the whole grid
//! - `GET /api/slice?measure=&n=&pos_fraction=&param.<k>=<v>` one imbalance slice
//! - `GET /api/props?measures=a,b|all&n=` the property matrix
//! - `GET /api/threshold?measure=&param=&property=&lo=&hi=&tol=&n=` a property flip point
//!
//! Every handler is a pure function of its query string, so responses carry
//! an ETag derived from the query and the registry version.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tetrascope_core::measures::{list_measures, lookup};
use tetrascope_core::properties::{all_measure_ids, property_matrix};
use tetrascope_core::simplex::{cross_section_bound, sample_bound};
use tetrascope_core::threshold::find_threshold;
use tetrascope_core::{Params, PropertyId, VERSION};
use tower_http::cors::{AllowOrigin, CorsLayer};

mod error;
mod payload;
mod query;

pub use error::ApiError;
pub use payload::{FieldJson, GamutJson, MeasureJson, SliceJson};

use query::QueryArgs;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Largest grid resolution any request may ask for.
    pub max_n: u64,
    /// Wall-clock budget per request before answering 422.
    pub budget: Duration,
    /// Allowed CORS origin; any origin when `None`.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { max_n: 120, budget: Duration::from_secs(20), cors_origin: None }
    }
}

pub fn registry_version() -> String {
    format!("{VERSION}+{}", list_measures().len())
}

pub fn router(config: ServiceConfig) -> Router {
    let cors = match &config.cors_origin {
        Some(origin) => match HeaderValue::from_str(origin) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::exact(v)),
            Err(_) => CorsLayer::new(),
        },
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
    };
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/measures", get(measures))
        .route("/api/field", get(field))
        .route("/api/slice", get(slice))
        .route("/api/props", get(props))
        .route("/api/threshold", get(threshold))
        .layer(cors)
        .with_state(Arc::new(config))
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

type Shared = State<Arc<ServiceConfig>>;
type Pairs = Query<Vec<(String, String)>>;

async fn healthz() -> String {
    format!("tetrascope {VERSION}")
}

fn etag(uri: &Uri) -> String {
    let mut hasher = Sha256::new();
    hasher.update(registry_version().as_bytes());
    hasher.update(b"\n");
    hasher.update(uri.path().as_bytes());
    hasher.update(b"?");
    hasher.update(uri.query().unwrap_or("").as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
    format!("\"{hex}\"")
}

/// Runs `job` off the async runtime under the configured budget and wraps
/// the JSON it returns with an ETag.
async fn respond<T, F>(config: &ServiceConfig, uri: &Uri, headers: &HeaderMap, job: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    let tag = etag(uri);
    if headers.get(header::IF_NONE_MATCH).and_then(|v| v.to_str().ok()) == Some(tag.as_str()) {
        return (StatusCode::NOT_MODIFIED, [(header::ETAG, tag)]).into_response();
    }
    let task = tokio::task::spawn_blocking(move || job().map(|body| serde_json::to_vec(&body)));
    let body = match tokio::time::timeout(config.budget, task).await {
        Err(_) => {
            return ApiError::unprocessable(
                "resolution",
                format!("request exceeded the {:?} compute budget; retry with a lower n", config.budget),
            )
            .into_response()
        }
        Ok(Err(join)) => return ApiError::internal(join.to_string()).into_response(),
        Ok(Ok(Err(api))) => return api.into_response(),
        Ok(Ok(Ok(Err(ser)))) => return ApiError::internal(ser.to_string()).into_response(),
        Ok(Ok(Ok(Ok(bytes)))) => bytes,
    };
    (
        StatusCode::OK,
        [(header::CONTENT_TYPE, "application/json".to_string()), (header::ETAG, tag)],
        body,
    )
        .into_response()
}

fn check_n(config: &ServiceConfig, n: u64) -> Result<(), ApiError> {
    if n > config.max_n {
        return Err(ApiError::unprocessable(
            "argument",
            format!("n={n} exceeds the server limit of {}", config.max_n),
        ));
    }
    Ok(())
}

async fn measures() -> Json<Vec<MeasureJson>> {
    Json(list_measures().iter().map(MeasureJson::from_descriptor).collect())
}

async fn field(State(config): Shared, uri: Uri, headers: HeaderMap, Query(pairs): Pairs) -> Response {
    let prepared = (|| -> Result<_, ApiError> {
        let args = QueryArgs::parse(pairs)?;
        let n: u64 = args.number("n")?;
        check_n(&config, n)?;
        let measure = lookup(args.text("measure")?)
            .and_then(|d| d.bind(&args.params))
            .map_err(|e| ApiError::from_core(e, false))?;
        Ok((measure, n))
    })();
    let (measure, n) = match prepared {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    respond(&config, &uri, &headers, move || {
        let samples = sample_bound(&measure, n).map_err(|e| ApiError::from_core(e, false))?;
        Ok(FieldJson::new(measure.id(), n, &samples))
    })
    .await
}

async fn slice(State(config): Shared, uri: Uri, headers: HeaderMap, Query(pairs): Pairs) -> Response {
    let prepared = (|| -> Result<_, ApiError> {
        let args = QueryArgs::parse(pairs)?;
        let n: u64 = args.number("n")?;
        let fraction: f64 = args.number("pos_fraction")?;
        check_n(&config, n)?;
        let measure = lookup(args.text("measure")?)
            .and_then(|d| d.bind(&args.params))
            .map_err(|e| ApiError::from_core(e, false))?;
        Ok((measure, n, fraction))
    })();
    let (measure, n, fraction) = match prepared {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    respond(&config, &uri, &headers, move || {
        let section = cross_section_bound(&measure, n, fraction).map_err(|e| ApiError::from_core(e, false))?;
        Ok(SliceJson::new(measure.id(), &section))
    })
    .await
}

async fn props(State(config): Shared, uri: Uri, headers: HeaderMap, Query(pairs): Pairs) -> Response {
    let prepared = (|| -> Result<_, ApiError> {
        let args = QueryArgs::parse(pairs)?;
        let n: u64 = args.number("n")?;
        check_n(&config, n)?;
        let requested = args.text("measures")?;
        let ids: Vec<&'static str> = if requested.trim() == "all" {
            all_measure_ids()
        } else {
            requested
                .split(',')
                .map(|id| lookup(id).map(|d| d.id))
                .collect::<Result<_, _>>()
                .map_err(|e| ApiError::from_core(e, true))?
        };
        let mut per_measure = std::collections::BTreeMap::new();
        for (name, value) in &args.params {
            let mut used = false;
            for id in &ids {
                let d = lookup(id).expect("resolved above");
                if d.params.iter().any(|p| p.name == name || p.aliases.contains(&name.as_str())) {
                    per_measure.entry(id.to_string()).or_insert_with(Params::new).insert(name.clone(), *value);
                    used = true;
                }
            }
            if !used {
                return Err(ApiError::unprocessable("argument", format!("no requested measure has parameter `{name}`")));
            }
        }
        Ok((ids, per_measure, n))
    })();
    let (ids, per_measure, n) = match prepared {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    respond(&config, &uri, &headers, move || Ok(property_matrix(&ids, &per_measure, n))).await
}

async fn threshold(State(config): Shared, uri: Uri, headers: HeaderMap, Query(pairs): Pairs) -> Response {
    let prepared = (|| -> Result<_, ApiError> {
        let args = QueryArgs::parse(pairs)?;
        let n: u64 = args.number_or("n", 40)?;
        check_n(&config, n)?;
        let measure = lookup(args.text("measure")?).map_err(|e| ApiError::from_core(e, true))?.id;
        let param = args.text("param")?.to_string();
        let property: PropertyId = args.text("property")?.parse().map_err(|e| ApiError::from_core(e, false))?;
        let lo: f64 = args.number("lo")?;
        let hi: f64 = args.number("hi")?;
        let tol: f64 = args.number_or("tol", 1e-3)?;
        Ok((measure, args.params, param, property, lo, hi, tol, n))
    })();
    let (measure, params, param, property, lo, hi, tol, n) = match prepared {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    respond(&config, &uri, &headers, move || {
        find_threshold(measure, &params, &param, property, (lo, hi), tol, n)
            .map(|r| r.record())
            .map_err(|e| ApiError::from_core(e, true))
    })
    .await
}
