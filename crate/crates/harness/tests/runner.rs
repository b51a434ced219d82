use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use kitchen_core::taskgen::{assemble_bundle, solve, Category};
use kitchen_core::{execute, TaskBundle};
use kitchen_harness::{
    load_rows, rescore, run_experiment, Grouping, Method, OpenAiClient, ResultStore, RunOptions,
};
use serde_json::{json, Value};

#[derive(Clone)]
enum Reply {
    Text(String),
    /// Fail with this status for the first `n` calls, then answer.
    FailFirst(u16, usize, String),
}

#[derive(Clone)]
struct Mock {
    reply: Reply,
    hits: Arc<AtomicUsize>,
    auth: Arc<Mutex<Option<String>>>,
    prompts: Arc<Mutex<Vec<String>>>,
}

async fn chat(
    State(m): State<Mock>,
    headers: HeaderMap,
    Json(body): Json<Value>,
) -> (StatusCode, Json<Value>) {
    let hit = m.hits.fetch_add(1, Ordering::SeqCst);
    *m.auth.lock().unwrap() = headers
        .get("authorization")
        .map(|v| v.to_str().unwrap().to_string());
    m.prompts
        .lock()
        .unwrap()
        .push(body["messages"][0]["content"].as_str().unwrap().to_string());
    let text = match &m.reply {
        Reply::Text(t) => t.clone(),
        Reply::FailFirst(status, n, t) => {
            if hit < *n {
                return (
                    StatusCode::from_u16(*status).unwrap(),
                    Json(json!({"error": "busy"})),
                );
            }
            t.clone()
        }
    };
    (
        StatusCode::OK,
        Json(json!({
            "choices": [{"message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": 100, "completion_tokens": 20, "total_tokens": 120}
        })),
    )
}

async fn serve(reply: Reply) -> (String, Mock) {
    let mock = Mock {
        reply,
        hits: Arc::default(),
        auth: Arc::default(),
        prompts: Arc::default(),
    };
    let app = Router::new()
        .route("/v1/chat/completions", post(chat))
        .with_state(mock.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/chat/completions"), mock)
}

fn bundle() -> TaskBundle {
    assemble_bundle(Category::Salad, 1, 2, 4).unwrap()
}

fn golden_text(b: &TaskBundle) -> String {
    let sol = solve(&Arc::new(b.clone()), b.n_agents).unwrap();
    format!("Here is the plan:\n```json\n{}\n```", sol.plan.to_json())
}

fn opts() -> RunOptions {
    RunOptions {
        model: "mock-1".into(),
        method: Method::Io,
        retries: 2,
        backoff: Duration::from_millis(5),
        parallelism: 4,
    }
}

fn client(url: &str) -> OpenAiClient {
    OpenAiClient::new(
        url,
        "mock-1",
        Some("sk-test".into()),
        Duration::from_secs(10),
    )
    .unwrap()
}

#[tokio::test]
async fn golden_answer_scores_as_success_and_replays() {
    let b = bundle();
    let (url, mock) = serve(Reply::Text(golden_text(&b))).await;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let mut store = ResultStore::open(&path).unwrap();
    let s = run_experiment(&opts(), vec![b.clone()], &client(&url), &mut store)
        .await
        .unwrap();
    assert_eq!((s.attempted, s.succeeded), (1, 1));
    assert_eq!(mock.auth.lock().unwrap().as_deref(), Some("Bearer sk-test"));
    assert!(mock.prompts.lock().unwrap()[0].contains("Map JSON:"));

    let rows = load_rows(&path).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!(r.record.success, "{:?}", r.record.failure_reason);
    assert_eq!(r.attempts, 1);
    assert_eq!(r.usage.unwrap().completion_tokens, 20);
    assert!(r
        .raw_output
        .as_deref()
        .unwrap()
        .starts_with("Here is the plan"));
    let bundle = Arc::new(b);
    assert_eq!(r.replay(&bundle).unwrap(), r.record);
    assert_eq!(execute(&bundle, r.plan.as_ref().unwrap()), r.record);

    let scores = rescore(&rows, Grouping::Run).unwrap();
    assert_eq!(scores[0].score.sr, 1.0);
}

#[tokio::test]
async fn prose_is_a_parse_failure_not_an_infra_failure() {
    let (url, _) = serve(Reply::Text(
        "The agents should split the work evenly.".into(),
    ))
    .await;
    let dir = tempfile::tempdir().unwrap();
    let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
    let s = run_experiment(&opts(), vec![bundle()], &client(&url), &mut store)
        .await
        .unwrap();
    assert_eq!(s.parse_failures, 1);
    let r = &load_rows(store.path()).unwrap()[0];
    assert!(!r.infra_failure);
    assert!(!r.record.success);
    assert_eq!(r.record.failure_code(), Some("parse-error"));
    assert_eq!(
        rescore(std::slice::from_ref(r), Grouping::Run).unwrap()[0]
            .score
            .sr,
        0.0
    );
}

#[tokio::test]
async fn plan_for_a_missing_agent_is_a_parse_failure() {
    let (url, _) = serve(Reply::Text(
        r#"{"plan": {"agent3": [{"action": "Finish"}]}}"#.into(),
    ))
    .await;
    let dir = tempfile::tempdir().unwrap();
    let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
    run_experiment(&opts(), vec![bundle()], &client(&url), &mut store)
        .await
        .unwrap();
    let r = &load_rows(store.path()).unwrap()[0];
    assert!(r.parse_error.as_deref().unwrap().contains("agent3"));
}

#[tokio::test]
async fn server_errors_become_infra_rows_after_retries() {
    let (url, mock) = serve(Reply::FailFirst(500, usize::MAX, String::new())).await;
    let dir = tempfile::tempdir().unwrap();
    let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
    let s = run_experiment(&opts(), vec![bundle()], &client(&url), &mut store)
        .await
        .unwrap();
    assert_eq!(s.infra_failures, 1);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);
    let rows = load_rows(store.path()).unwrap();
    assert!(rows[0].infra_failure);
    assert_eq!(rows[0].attempts, 3);
    assert!(rescore(&rows, Grouping::Run).unwrap().is_empty());
}

#[tokio::test]
async fn bad_request_is_not_retried() {
    let (url, mock) = serve(Reply::FailFirst(400, usize::MAX, String::new())).await;
    let dir = tempfile::tempdir().unwrap();
    let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
    run_experiment(&opts(), vec![bundle()], &client(&url), &mut store)
        .await
        .unwrap();
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn rate_limit_is_retried_then_succeeds() {
    let b = bundle();
    let (url, mock) = serve(Reply::FailFirst(429, 2, golden_text(&b))).await;
    let dir = tempfile::tempdir().unwrap();
    let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
    let s = run_experiment(&opts(), vec![b], &client(&url), &mut store)
        .await
        .unwrap();
    assert_eq!(s.succeeded, 1);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);
    assert_eq!(load_rows(store.path()).unwrap()[0].attempts, 3);
}

#[tokio::test]
async fn rerun_skips_answered_bundles() {
    let bundles: Vec<TaskBundle> = (0..3)
        .map(|s| assemble_bundle(Category::Burger, 1, 1, s).unwrap())
        .collect();
    let (url, mock) = serve(Reply::Text("no plan".into())).await;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let c = client(&url);
    {
        let mut store = ResultStore::open(&path).unwrap();
        let s = run_experiment(&opts(), bundles[..2].to_vec(), &c, &mut store)
            .await
            .unwrap();
        assert_eq!(s.attempted, 2);
    }
    let mut store = ResultStore::open(&path).unwrap();
    let s = run_experiment(&opts(), bundles.clone(), &c, &mut store)
        .await
        .unwrap();
    assert_eq!((s.skipped, s.attempted), (2, 1));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);

    let mut ids: Vec<String> = load_rows(&path)
        .unwrap()
        .into_iter()
        .map(|r| r.bundle_id)
        .collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 3);
    assert_eq!(load_rows(&path).unwrap().len(), 3);

    // Another method on the same file is a separate experiment.
    let cot = RunOptions {
        method: Method::Cot,
        ..opts()
    };
    let s = run_experiment(&cot, bundles, &c, &mut store).await.unwrap();
    assert_eq!(s.attempted, 3);
}

#[tokio::test]
async fn unreachable_endpoint_is_an_infra_failure() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!(
        "http://{}/v1/chat/completions",
        listener.local_addr().unwrap()
    );
    drop(listener);
    let dir = tempfile::tempdir().unwrap();
    let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
    let s = run_experiment(&opts(), vec![bundle()], &client(&url), &mut store)
        .await
        .unwrap();
    assert_eq!(s.infra_failures, 1);
}
