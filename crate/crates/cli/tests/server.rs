mod common;

use std::fs;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use common::{fixture, quick_model};
use serde_json::{json, Value};
use tower::ServiceExt;
use tubepulse_cli::server::{router, AppState, ServerOptions};
use tubepulse_cli::service::ModelSet;
use tubepulse_core::trendrank::{load_embeddings_file, load_topics, parse_topics, DEFAULT_MAX_TOPICS};
use tubepulse_core::{FeatureProfile, TrendingTopics};

fn topics() -> TrendingTopics {
    load_topics(fixture("topics.txt"), DEFAULT_MAX_TOPICS).unwrap()
}

struct Setup {
    pre: bool,
    post: bool,
    embeddings: bool,
    topics: Option<TrendingTopics>,
    options: ServerOptions,
}

impl Default for Setup {
    fn default() -> Self {
        Setup {
            pre: true,
            post: false,
            embeddings: true,
            topics: Some(topics()),
            options: ServerOptions::default(),
        }
    }
}

impl Setup {
    fn state(self) -> Arc<AppState> {
        let mut models = Vec::new();
        if self.pre {
            models.push(quick_model(FeatureProfile::pre_upload()));
        }
        if self.post {
            models.push(quick_model(FeatureProfile::post_upload()));
        }
        let table = self
            .embeddings
            .then(|| load_embeddings_file(fixture("embeddings.txt")).unwrap());
        Arc::new(AppState::new(
            ModelSet::new(models).unwrap(),
            table,
            self.topics,
            self.options,
        ))
    }

    fn app(self) -> Router {
        router(self.state())
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    call_with(app, method, uri, body.map(|b| b.to_string()), &[]).await
}

async fn call_with(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<String>,
    headers: &[(header::HeaderName, &str)],
) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(k, *v);
    }
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b)),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("non-JSON body: {bytes:?}"))
    };
    (status, value)
}

fn draft(title: &str) -> Value {
    json!({
        "title": title,
        "description": "Recorded at home",
        "tags": ["studio", "session"],
        "category_id": 10,
        "published_at": "2018-05-10T18:00:00Z",
        "as_of": "2018-05-14T18:00:00Z"
    })
}

fn assert_error_shape(body: &Value, code: &str) {
    let err = body["error"].as_object().expect("error object");
    assert_eq!(err["code"], code, "{body}");
    assert!(err["message"].is_string());
    assert!(err.keys().all(|k| ["code", "message", "fields"].contains(&k.as_str())));
}

#[tokio::test]
async fn predict_valid_pre_upload_request() {
    let app = Setup::default().app();
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/predict",
        Some(draft("Eurovision Contest Song")),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let views = body["predicted_views"].as_u64().unwrap();
    let raw = body["predicted_views_raw"].as_f64().unwrap();
    assert!(raw >= 0.0);
    assert_eq!(views, (raw + 0.5).floor() as u64);
    assert_eq!(body["profile_used"], "pre_upload/v1");
    assert!(body["model_version"]
        .as_str()
        .unwrap()
        .starts_with("boosted-pre_upload-"));
}

#[tokio::test]
async fn predict_validation_failures_name_fields() {
    let app = Setup::default().app();
    let mut early = draft("x");
    early["as_of"] = json!("2018-05-09T18:00:00Z");
    let (status, body) = call(&app, Method::POST, "/api/predict", Some(early)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "invalid_request");
    let fields: Vec<&str> = body["error"]["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["field"].as_str().unwrap())
        .collect();
    assert!(
        fields.contains(&"as_of") && fields.contains(&"published_at"),
        "{fields:?}"
    );

    let (status, body) = call(&app, Method::POST, "/api/predict", Some(json!({"tags": "oops"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["fields"][0]["field"], "tags");

    let (status, body) = call(&app, Method::POST, "/api/predict", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let fields: Vec<&str> = body["error"]["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["field"].as_str().unwrap())
        .collect();
    assert_eq!(fields, ["title", "category_id", "published_at", "as_of"]);

    let mut extra = draft("x");
    extra["views"] = json!(5);
    let (status, _) = call(&app, Method::POST, "/api/predict", Some(extra)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = call_with(&app, Method::POST, "/api/predict", Some("{not json".into()), &[]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "invalid_request");
}

#[tokio::test]
async fn post_upload_request_without_post_model_is_409() {
    let app = Setup::default().app();
    let mut req = draft("Eurovision Contest Song");
    req["likes"] = json!(100);
    req["dislikes"] = json!(3);
    req["comment_count"] = json!(12);
    let (status, body) = call(&app, Method::POST, "/api/predict", Some(req.clone())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error_shape(&body, "model_unavailable");
    let (status, _) = call(&app, Method::POST, "/api/rank", Some(req.clone())).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let both = Setup {
        post: true,
        ..Setup::default()
    }
    .app();
    let (status, body) = call(&both, Method::POST, "/api/predict", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["profile_used"], "post_upload/v1");
}

#[tokio::test]
async fn rank_matches_trending_topic() {
    let app = Setup::default().app();
    let (status, contest) = call(&app, Method::POST, "/api/rank", Some(draft("Eurovision Contest Song"))).await;
    assert_eq!(status, StatusCode::OK, "{contest}");
    assert!(contest["match_score"].as_f64().unwrap() > 0.0);
    assert_eq!(contest["best_topic"], "Eurovision");
    assert_eq!(contest["unscorable"], false);
    let top = contest["top_topics"].as_array().unwrap();
    assert_eq!(top[0]["topic"], "Eurovision");
    assert!(top.len() <= 5);
    for key in [
        "predicted_views",
        "rank_score",
        "profile_used",
        "model_version",
        "predicted_views_raw",
    ] {
        assert!(!contest[key].is_null(), "{key}");
    }

    let (_, piano) = call(&app, Method::POST, "/api/rank", Some(draft("Late Night Piano Improv"))).await;
    assert_eq!(piano["predicted_views"], contest["predicted_views"]);
    assert!(contest["rank_score"].as_f64() >= piano["rank_score"].as_f64());

    let mut oov = draft("zzq qqz");
    oov["tags"] = json!([]);
    oov["description"] = json!("");
    let (status, body) = call(&app, Method::POST, "/api/rank", Some(oov)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["match_score"], 0.0);
    assert_eq!(body["unscorable"], true);
    assert!(body["best_topic"].is_null());
    assert_eq!(body["rank_score"].as_f64(), body["predicted_views_raw"].as_f64());
}

#[tokio::test]
async fn rank_without_trend_components_is_503() {
    for setup in [
        Setup {
            embeddings: false,
            ..Setup::default()
        },
        Setup {
            topics: None,
            ..Setup::default()
        },
        Setup {
            topics: Some(TrendingTopics::new(Vec::new(), topics().fetched_at, "empty")),
            ..Setup::default()
        },
    ] {
        let app = setup.app();
        let (status, body) = call(&app, Method::POST, "/api/rank", Some(draft("Eurovision"))).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
        assert_error_shape(&body, "component_unavailable");
        // Prediction alone still works.
        let (status, _) = call(&app, Method::POST, "/api/predict", Some(draft("Eurovision"))).await;
        assert_eq!(status, StatusCode::OK);
    }
}

#[tokio::test]
async fn trending_returns_snapshot_and_flags_empty_lists() {
    let three = parse_topics(
        "Eurovision\nFortnite\nIPL Cricket\n",
        topics().fetched_at,
        "three.txt",
        100,
    )
    .unwrap();
    let app = Setup {
        topics: Some(three),
        ..Setup::default()
    }
    .app();
    let (status, body) = call(&app, Method::GET, "/api/trending", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["topics"], json!(["Eurovision", "Fortnite", "IPL Cricket"]));
    assert_eq!(body["fetched_at"], "2018-05-31T00:00:00Z");
    assert_eq!(body["source"], "three.txt");
    assert!(body.get("warning").is_none());

    let empty = Setup {
        topics: Some(TrendingTopics::new(Vec::new(), topics().fetched_at, "empty")),
        ..Setup::default()
    }
    .app();
    let (status, body) = call(&empty, Method::GET, "/api/trending", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["topics"], json!([]));
    assert!(body["warning"].is_string());

    let none = Setup {
        topics: None,
        ..Setup::default()
    }
    .app();
    let (status, _) = call(&none, Method::GET, "/api/trending", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn topics_reload_swaps_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("topics.txt");
    fs::write(&path, "Eurovision\nFortnite\n").unwrap();
    let state = Setup {
        topics: Some(load_topics(&path, 100).unwrap()),
        options: ServerOptions {
            topics_path: Some(path.clone()),
            admin_token: Some("s3cret".into()),
            ..ServerOptions::default()
        },
        ..Setup::default()
    }
    .state();
    let app = router(state.clone());

    fs::write(&path, "Royal Wedding\n").unwrap();
    let (status, _) = call(&app, Method::POST, "/api/admin/reload-topics", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let auth = [(header::AUTHORIZATION, "Bearer s3cret")];
    let (status, body) = call_with(&app, Method::POST, "/api/admin/reload-topics", None, &auth).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let (_, body) = call(&app, Method::GET, "/api/trending", None).await;
    assert_eq!(body["topics"], json!(["Royal Wedding"]));

    // A failed reload keeps the previous list.
    fs::remove_file(&path).unwrap();
    let (status, body) = call_with(&app, Method::POST, "/api/admin/reload-topics", None, &auth).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_error_shape(&body, "reload_failed");
    assert_eq!(state.topics().unwrap().topics, ["Royal Wedding"]);

    // Disabled unless an admin token is configured.
    let (status, body) = call(&Setup::default().app(), Method::POST, "/api/admin/reload-topics", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
}

#[tokio::test]
async fn health_reports_missing_components() {
    let (status, body) = call(&Setup::default().app(), Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["embeddings_loaded"], true);
    assert_eq!(body["topics_count"], 5);
    assert!(body["model_version"].is_string());

    let (status, body) = call(
        &Setup {
            embeddings: false,
            ..Setup::default()
        }
        .app(),
        Method::GET,
        "/api/health",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["embeddings_loaded"], false);
    assert_eq!(body["missing"], json!(["embeddings"]));

    let (status, body) = call(
        &Setup {
            pre: false,
            ..Setup::default()
        }
        .app(),
        Method::GET,
        "/api/health",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(body.get("model_version").is_none());
    assert_eq!(body["missing"], json!(["model"]));
}

#[tokio::test]
async fn bearer_token_guards_everything_but_health() {
    let app = Setup {
        options: ServerOptions {
            token: Some("t0k".into()),
            ..ServerOptions::default()
        },
        ..Setup::default()
    }
    .app();
    let (status, body) = call(&app, Method::POST, "/api/predict", Some(draft("x"))).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_error_shape(&body, "unauthorized");
    let (status, _) = call_with(
        &app,
        Method::POST,
        "/api/predict",
        Some(draft("x").to_string()),
        &[(header::AUTHORIZATION, "Bearer t0k")],
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn overload_sheds_with_429() {
    let state = Setup {
        options: ServerOptions {
            max_concurrency: 1,
            ..ServerOptions::default()
        },
        ..Setup::default()
    }
    .state();
    let app = router(state.clone());
    // Hold the only permit, as an in-flight request would.
    let permit = state.try_admit().unwrap();
    let (status, body) = call(&app, Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::TOO_MANY_REQUESTS);
    assert_error_shape(&body, "overloaded");
    drop(permit);
    let (status, _) = call(&app, Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn cors_allows_the_configured_origin() {
    let app = Setup::default().app();
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/api/rank")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(
        resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        "http://localhost:5173"
    );
    let req = Request::builder()
        .uri("/api/health")
        .header(header::ORIGIN, "http://evil.example")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
}

#[tokio::test]
async fn unknown_routes_and_methods_use_the_error_shape() {
    let app = Setup::default().app();
    let (status, body) = call(&app, Method::GET, "/api/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
    let (status, body) = call(&app, Method::GET, "/api/predict", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert_error_shape(&body, "method_not_allowed");
}

#[tokio::test]
async fn identical_requests_get_identical_responses() {
    let app = Setup::default().app();
    let body = draft("Eurovision Contest Song");
    let first = call(&app, Method::POST, "/api/rank", Some(body.clone())).await;
    for _ in 0..20 {
        assert_eq!(call(&app, Method::POST, "/api/rank", Some(body.clone())).await, first);
    }
}

#[cfg(target_os = "linux")]
fn resident_kib() -> u64 {
    let status = fs::read_to_string("/proc/self/status").unwrap();
    let line = status.lines().find(|l| l.starts_with("VmRSS:")).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[cfg(target_os = "linux")]
#[tokio::test]
async fn memory_stays_flat_over_ten_thousand_requests() {
    let app = Setup::default().app();
    let body = draft("Eurovision Contest Song").to_string();
    let send = |i: usize| {
        let uri = if i % 2 == 0 { "/api/rank" } else { "/api/predict" };
        call_with(&app, Method::POST, uri, Some(body.clone()), &[])
    };
    for i in 0..1_000 {
        assert_eq!(send(i).await.0, StatusCode::OK);
    }
    let before = resident_kib();
    for i in 0..10_000 {
        assert_eq!(send(i).await.0, StatusCode::OK);
    }
    let grown = resident_kib().saturating_sub(before);
    assert!(grown < 8 * 1024, "resident set grew by {grown} KiB");
}
