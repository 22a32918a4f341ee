use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use rarevoice::classifier::{ClassifierConfig, LabeledExample, Strategy};
use rarevoice::harness::AnnotationSession;
use rarevoice::pipeline::train_on_pool;
use rarevoice::sampling::{random_sample, SamplingBatch};
use rarevoice::synth::{generate, SynthConfig};
use rarevoice_cli::server::{router, AppState, RankContext};

struct Fixture {
    _dir: tempfile::TempDir,
    labels: PathBuf,
    adjudications: PathBuf,
    batch: SamplingBatch,
    texts: HashMap<String, String>,
}

impl Fixture {
    fn new(n: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<String> = (0..n).map(|i| format!("c{i:03}")).collect();
        let texts = ids.iter().map(|id| (id.clone(), format!("text of {id}"))).collect();
        let batch = SamplingBatch { strategy: Strategy::Random, round: 2, params: json!({}), comment_ids: ids };
        Fixture {
            labels: dir.path().join("labels.jsonl"),
            adjudications: dir.path().join("adjudications.jsonl"),
            _dir: dir,
            batch,
            texts,
        }
    }

    fn session(&self) -> AnnotationSession {
        AnnotationSession::open(self.batch.clone(), self.texts.clone(), &self.labels, &self.adjudications).unwrap()
    }

    fn app(&self) -> Router {
        router(Arc::new(AppState { session: Mutex::new(self.session()), rank: None }))
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn label(app: &Router, annotator: &str, id: &str, label: &str) -> (StatusCode, Value) {
    call(app, "POST", "/api/labels", Some(json!({ "comment_id": id, "label": label, "annotator": annotator }))).await
}

/// Labels the whole batch for both annotators; `b_flips` lists positions
/// where B disagrees with A.
async fn label_all(app: &Router, f: &Fixture, b_flips: &HashSet<usize>) {
    for (i, id) in f.batch.comment_ids.iter().enumerate() {
        let a = if i % 3 == 0 { "positive" } else { "negative" };
        let b = match (b_flips.contains(&i), a) {
            (false, x) => x,
            (true, "positive") => "negative",
            (true, _) => "positive",
        };
        assert_eq!(label(app, "ann_a", id, a).await.0, StatusCode::OK);
        assert_eq!(label(app, "ann_b", id, b).await.0, StatusCode::OK);
    }
}

#[tokio::test]
async fn batch_lists_every_item_with_text() {
    let f = Fixture::new(300);
    let (status, body) = call(&f.app(), "GET", "/api/batch?annotator=ann_a", None).await;
    assert_eq!(status, StatusCode::OK);
    let items = body["items"].as_array().unwrap();
    assert_eq!(items.len(), 300);
    for (i, item) in items.iter().enumerate() {
        assert_eq!(item["position"], i + 1);
        let id = item["comment_id"].as_str().unwrap();
        assert_eq!(item["text"], format!("text of {id}"));
        assert!(item["label"].is_null());
    }
    assert_eq!(body["progress"], json!({ "labeled": 0, "total": 300 }));
    assert_eq!(body["round"], 2);
}

#[tokio::test]
async fn label_outside_batch_is_rejected_with_the_id() {
    let f = Fixture::new(5);
    let (status, body) = label(&f.app(), "ann_a", "stranger", "positive").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "not_in_batch");
    assert_eq!(body["details"]["comment_id"], "stranger");
    assert!(body["message"].as_str().unwrap().contains("stranger"));
}

#[tokio::test]
async fn malformed_requests_carry_error_shape() {
    let f = Fixture::new(5);
    let app = f.app();
    let (status, body) = call(&app, "POST", "/api/labels", Some(json!({ "comment_id": "c000", "label": "maybe", "annotator": "a" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "bad_request");

    let (status, body) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "empty_annotator");

    let (status, body) = call(&app, "GET", "/api/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "not_found");
}

#[tokio::test]
async fn annotator_can_be_given_in_the_query() {
    let f = Fixture::new(3);
    let app = f.app();
    let (status, body) =
        call(&app, "POST", "/api/labels?annotator=ann_q", Some(json!({ "comment_id": "c001", "label": "skip" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["annotator_id"], "ann_q");
    assert_eq!(body["label"], "skip");
    assert_eq!(body["round"], 2);
}

#[tokio::test]
async fn relabeling_and_third_annotators_conflict() {
    let f = Fixture::new(3);
    let app = f.app();
    assert_eq!(label(&app, "ann_a", "c000", "positive").await.0, StatusCode::OK);
    let (status, body) = label(&app, "ann_a", "c000", "negative").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "already_labeled");
    assert_eq!(label(&app, "ann_b", "c000", "positive").await.0, StatusCode::OK);
    let (status, body) = label(&app, "ann_c", "c000", "positive").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "too_many_annotators");
}

#[tokio::test]
async fn annotators_do_not_see_each_other() {
    let f = Fixture::new(4);
    let app = f.app();
    for id in &f.batch.comment_ids {
        label(&app, "ann_a", id, "positive").await;
    }
    let (_, a) = call(&app, "GET", "/api/batch?annotator=ann_a", None).await;
    let (_, b) = call(&app, "GET", "/api/batch?annotator=ann_b", None).await;
    assert!(a["items"].as_array().unwrap().iter().all(|i| i["label"] == "positive"));
    assert!(b["items"].as_array().unwrap().iter().all(|i| i["label"].is_null()));
    assert_eq!(b["progress"]["labeled"], 0);

    // agreement and the disagreement queue stay closed until both finish
    let (status, body) = call(&app, "GET", "/api/agreement", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "round_incomplete");
    assert_eq!(call(&app, "GET", "/api/disagreements", None).await.0, StatusCode::CONFLICT);
}

/// Kappa from the raw log lines, using only the JSON text.
fn kappa_from_log(path: &Path) -> f64 {
    let mut by_item: HashMap<String, HashMap<String, String>> = HashMap::new();
    for line in std::fs::read_to_string(path).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        by_item
            .entry(v["comment_id"].as_str().unwrap().to_string())
            .or_default()
            .insert(v["annotator_id"].as_str().unwrap().to_string(), v["label"].as_str().unwrap().to_string());
    }
    let mut table = [[0.0f64; 2]; 2];
    for votes in by_item.values() {
        let a = (votes["ann_a"] == "positive") as usize;
        let b = (votes["ann_b"] == "positive") as usize;
        table[a][b] += 1.0;
    }
    let n: f64 = table.iter().flatten().sum();
    let po = (table[0][0] + table[1][1]) / n;
    let a1 = (table[1][0] + table[1][1]) / n;
    let b1 = (table[0][1] + table[1][1]) / n;
    let pe = a1 * b1 + (1.0 - a1) * (1.0 - b1);
    (po - pe) / (1.0 - pe)
}

#[tokio::test]
async fn agreement_matches_kappa_recomputed_from_the_log() {
    let f = Fixture::new(40);
    let app = f.app();
    let flips: HashSet<usize> = [1, 6, 13, 27].into();
    label_all(&app, &f, &flips).await;

    let (status, body) = call(&app, "GET", "/api/agreement", None).await;
    assert_eq!(status, StatusCode::OK);
    let expected = kappa_from_log(&f.labels);
    assert!((body["kappa"].as_f64().unwrap() - expected).abs() < 1e-12, "{body} vs {expected}");
    assert_eq!(body["n_items"], 40);
    assert_eq!(body["n_agree"], 36);

    let (_, progress) = call(&app, "GET", "/api/progress", None).await;
    assert_eq!(progress["complete"], true);
    assert_eq!(progress["labeled"], json!({ "ann_a": 40, "ann_b": 40 }));
}

#[tokio::test]
async fn disagreements_are_adjudicated_once() {
    let f = Fixture::new(6);
    let app = f.app();
    label_all(&app, &f, &[2].into()).await;

    let (_, body) = call(&app, "GET", "/api/disagreements", None).await;
    let list = body["disagreements"].as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["comment_id"], "c002");
    assert!(list[0]["adjudicated"].is_null());

    let adj = |id: &str| json!({ "comment_id": id, "resolved_label": "negative", "note": "discussed" });
    let (status, body) = call(&app, "POST", "/api/adjudicate", Some(adj("c001"))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "nothing_to_adjudicate");

    let (status, body) = call(&app, "POST", "/api/adjudicate", Some(adj("c002"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["resolved_label"], "negative");
    let (status, body) = call(&app, "POST", "/api/adjudicate", Some(adj("c002"))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "already_adjudicated");

    let (_, body) = call(&app, "GET", "/api/disagreements", None).await;
    assert_eq!(body["disagreements"][0]["adjudicated"], "negative");
    let resolved = f.session().resolve().unwrap();
    assert_eq!(resolved.resolved.len(), 6);
}

#[tokio::test]
async fn acknowledged_labels_survive_a_restart() {
    let f = Fixture::new(10);
    let app = f.app();
    let mut acked = Vec::new();
    for (i, id) in f.batch.comment_ids.iter().enumerate().take(7) {
        let l = ["positive", "negative", "skip"][i % 3];
        let (status, body) = label(&app, "ann_a", id, l).await;
        assert_eq!(status, StatusCode::OK);
        acked.push(body);
    }
    let before = std::fs::read(&f.labels).unwrap();
    drop(app);

    let reopened = f.session();
    let records: Vec<Value> = reopened.label_records().iter().map(|r| serde_json::to_value(r).unwrap()).collect();
    assert_eq!(records, acked);
    assert_eq!(std::fs::read(&f.labels).unwrap(), before);

    let app = router(Arc::new(AppState { session: Mutex::new(reopened), rank: None }));
    let (_, body) = call(&app, "GET", "/api/batch?annotator=ann_a", None).await;
    assert_eq!(body["progress"]["labeled"], 7);
    let (status, _) = label(&app, "ann_a", "c000", "negative").await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn definition_is_served() {
    let f = Fixture::new(1);
    let (status, body) = call(&f.app(), "GET", "/api/definition", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.is_object());
}

#[tokio::test]
async fn rank_needs_a_model() {
    let f = Fixture::new(1);
    let (status, body) = call(&f.app(), "GET", "/api/rank?top=5", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "no_model");
}

#[tokio::test]
async fn rank_lists_unlabeled_comments_by_probability() {
    let syn = generate(&SynthConfig { n_comments: 1500, n_users: 300, seed: 3, ..SynthConfig::default() });
    let ids: Vec<String> = syn.corpus.comments().iter().map(|c| c.id.clone()).collect();
    let batch = random_sample(&ids, 400, 1, 0).unwrap();
    let mut pool: Vec<LabeledExample> = batch
        .comment_ids
        .iter()
        .map(|id| LabeledExample::direct(id.clone(), syn.truth[id], 0, Strategy::Random))
        .collect();
    pool.extend(syn.seed_positive.iter().map(|id| LabeledExample::direct(id.clone(), syn.truth[id], 0, Strategy::Seed)));
    let model = train_on_pool(&pool, &syn.corpus, None, &ClassifierConfig::default()).unwrap();
    let labeled_ids: HashSet<String> = pool.iter().map(|e| e.comment_id.clone()).collect();

    let f = Fixture::new(1);
    let corpus = Arc::new(syn.corpus.clone());
    let ctx = RankContext { model, corpus, vectors: None, labeled_ids: labeled_ids.clone() };
    let app = router(Arc::new(AppState { session: Mutex::new(f.session()), rank: Some(ctx) }));
    let (status, body) = call(&app, "GET", "/api/rank?top=20", None).await;
    assert_eq!(status, StatusCode::OK);
    let items = body["items"].as_array().unwrap();
    assert_eq!(items.len(), 20);
    let mut prev = f64::INFINITY;
    for (i, item) in items.iter().enumerate() {
        assert_eq!(item["rank"], i + 1);
        let id = item["comment_id"].as_str().unwrap();
        assert!(!labeled_ids.contains(id));
        assert_eq!(item["text"], syn.corpus.comment(id).unwrap().text);
        let p = item["prob_positive"].as_f64().unwrap();
        assert!(p <= prev);
        prev = p;
    }
    assert!(body["calibration"] == "held_out" || body["calibration"] == "in_sample");
}
