use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_rarevoice")).args(args).current_dir(self.dir.path()).output().unwrap()
    }

    /// Runs a command that must succeed and returns its stdout as JSON, or
    /// Null when stdout is not JSON.
    fn ok(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.path(name)).unwrap()).unwrap()
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }
}

fn error_of(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    let v: Value = serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {line}"));
    v["error"].clone()
}

/// Label log for two annotators who follow the planted truth, except that
/// B flips the items at `flips`.
fn oracle_log(truth: &Value, batch: &Value, flips: &[usize]) -> String {
    let round = batch["round"].as_u64().unwrap();
    let mut out = String::new();
    for (i, id) in batch["comment_ids"].as_array().unwrap().iter().enumerate() {
        let id = id.as_str().unwrap();
        let gold = truth["labels"][id].as_str().unwrap();
        let other = if gold == "positive" { "negative" } else { "positive" };
        for (ann, label) in [("ann_a", gold), ("ann_b", if flips.contains(&i) { other } else { gold })] {
            let rec = json!({ "comment_id": id, "annotator_id": ann, "label": label, "round": round, "recorded_at": 0 });
            out.push_str(&format!("{rec}\n"));
        }
    }
    out
}

fn label_round(w: &Work, truth: &Value, batch: &str, tag: &str) -> Value {
    let b = w.json(batch);
    w.write(&format!("labels_{tag}.jsonl"), &oracle_log(truth, &b, &[]));
    w.ok(&["resolve", "--batch", batch, "--labels", &format!("labels_{tag}.jsonl"), "--pool", "pool.jsonl"])
}

#[test]
fn full_workflow_through_the_binary() {
    let w = Work { dir: tempfile::tempdir().unwrap() };
    let syn = w.ok(&[
        "synth", "--output", "raw.jsonl", "--truth", "truth.json", "--channels", "channels.txt", "--comments", "3000",
        "--users", "600", "--seed", "5",
    ]);
    assert_eq!(syn["comments"], 3000);
    let truth = w.json("truth.json");

    w.ok(&["ingest", "--input", "raw.jsonl", "--output", "corpus.jsonl", "--manifest", "manifest.json"]);
    let manifest = w.json("manifest.json");
    assert_eq!(manifest["n_comments"], 3000);
    assert_eq!(manifest["line_errors"], json!([]));

    w.ok(&["embed-train", "--corpus", "corpus.jsonl", "--output", "emb.bin", "--dim", "24", "--epochs", "2", "--buckets", "20000"]);
    w.ok(&["embed-train", "--corpus", "corpus.jsonl", "--output", "emb.txt", "--dim", "24", "--epochs", "2", "--buckets", "20000"]);
    assert!(std::fs::read_to_string(w.path("emb.txt")).unwrap().lines().count() > 10);
    let composed = w.ok(&["embed-compose", "--corpus", "corpus.jsonl", "--table", "emb.bin", "--comments", "cv.bin", "--users", "uv.bin"]);
    assert_eq!(composed["comments"], 3000);
    w.ok(&["index-build", "--vectors", "cv.bin", "--output", "ci.bin"]);
    w.ok(&["index-build", "--vectors", "uv.bin", "--output", "ui.bin"]);

    // round 0: curated seeds
    w.write("seeds.json", &json!({ "positive": truth["seed_positive"], "negative": truth["seed_negative"] }).to_string());
    w.write("seed_pos.json", &truth["seed_positive"].to_string());
    let r = w.ok(&["resolve", "--seeds", "seeds.json", "--pool", "pool.jsonl"]);
    assert_eq!(r["round"], 0);

    // round 1: random, with one disagreement that needs adjudication
    w.ok(&["sample", "random", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "b1.json", "--n", "300"]);
    let b1 = w.json("b1.json");
    assert_eq!(b1["round"], 1);
    assert_eq!(b1["comment_ids"].as_array().unwrap().len(), 300);
    w.write("labels1.jsonl", &oracle_log(&truth, &b1, &[4]));
    let out = w.run(&["resolve", "--batch", "b1.json", "--labels", "labels1.jsonl", "--pool", "pool.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_of(&out);
    assert_eq!(err["code"], "unresolved");
    let disputed = b1["comment_ids"][4].as_str().unwrap();
    assert_eq!(err["details"]["comment_ids"], json!([disputed]));
    let adj = json!({ "comment_id": disputed, "resolved_label": truth["labels"][disputed], "round": 1, "note": "" });
    w.write("adj1.jsonl", &format!("{adj}\n"));
    let r = w.ok(&["resolve", "--batch", "b1.json", "--labels", "labels1.jsonl", "--adjudications", "adj1.jsonl", "--pool", "pool.jsonl"]);
    assert_eq!(r["added"], 300);

    // a batch cannot be applied twice
    let out = w.run(&["resolve", "--batch", "b1.json", "--labels", "labels1.jsonl", "--adjudications", "adj1.jsonl", "--pool", "pool.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["code"], "sampling");

    // round 2: nearest neighbors of the positive seeds
    w.ok(&[
        "sample", "nn-comment", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "b2.json", "--seeds",
        "seed_pos.json", "--index", "ci.bin", "--k-per-seed", "50",
    ]);
    let b2 = w.json("b2.json");
    assert_eq!(b2["strategy"], "nn_comment");
    assert!(b2["comment_ids"].as_array().unwrap().len() <= 300);
    label_round(&w, &truth, "b2.json", "2");

    w.ok(&["train", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "model.json"]);
    w.ok(&[
        "train", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "model_emb.json", "--with-embeddings",
        "--vectors", "cv.bin",
    ]);
    w.ok(&["eval", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--splits", "5", "--train-frac", "0.9", "--output", "eval.json"]);
    let eval = w.json("eval.json");
    assert_eq!(eval["splits"], 5);
    assert_eq!(eval["train_frac"], 0.9);
    assert!(eval["metrics"]["f1"]["mean"].as_f64().unwrap() > 0.0);

    w.ok(&[
        "sample", "nn-user", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "b_user.json", "--model",
        "model.json", "--users", "ui.bin", "--n", "50",
    ]);
    assert_eq!(w.json("b_user.json")["strategy"], "nn_user");

    // the embedding model refuses to score without vectors
    let out = w.run(&["sample", "certainty", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "x.json", "--model", "model_emb.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["code"], "bad_argument");

    w.ok(&["sample", "certainty", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "b3.json", "--model", "model.json", "--k", "100"]);
    assert_eq!(w.json("b3.json")["round"], 3);
    label_round(&w, &truth, "b3.json", "3");
    w.ok(&[
        "sample", "uncertainty", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "b4.json", "--model",
        "model_emb.json", "--vectors", "cv.bin", "--k", "100",
    ]);
    assert_eq!(w.json("b4.json")["comment_ids"].as_array().unwrap().len(), 100);

    w.ok(&["rank", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--model", "model.json", "--top", "25", "--output", "rank.csv"]);
    let rank = std::fs::read_to_string(w.path("rank.csv")).unwrap();
    assert!(rank.starts_with("rank,comment_id,prob_positive,text"));
    w.ok(&["export", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--output", "pool.csv"]);
    let exported = std::fs::read_to_string(w.path("pool.csv")).unwrap();
    let pool_lines = std::fs::read_to_string(w.path("pool.jsonl")).unwrap().lines().count();
    assert_eq!(exported.lines().count(), pool_lines + 1);
}

#[test]
fn analysis_commands_write_reports() {
    let w = Work { dir: tempfile::tempdir().unwrap() };
    w.ok(&["synth", "--output", "corpus.jsonl", "--channels", "channels.txt", "--comments", "1500", "--users", "300"]);
    w.ok(&["embed-train", "--corpus", "corpus.jsonl", "--output", "emb.bin", "--dim", "16", "--epochs", "1", "--buckets", "5000"]);

    w.ok(&["lexicon-induce", "--table", "emb.bin", "--output", "lex.txt", "--k", "10"]);
    let lex = std::fs::read_to_string(w.path("lex.txt")).unwrap();
    assert!(lex.lines().count() > 10);
    w.ok(&["analyze", "sentiment", "--corpus", "corpus.jsonl", "--lexicon", "lex.txt", "--cutoff", "3", "--output", "sent.json"]);
    let s = w.json("sent.json");
    assert_eq!(s["cutoff"], 3.0);
    let share = &s["share"];
    let total: f64 = ["positive", "negative", "neutral"].iter().map(|k| share[k].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);

    w.ok(&["analyze", "template", "--corpus", "corpus.jsonl", "--template", "we", "--top", "5", "--output", "tmpl.json"]);
    assert!(w.json("tmpl.json")["counts"].as_array().unwrap().len() <= 5);
    assert!(w.path("tmpl.csv").exists());
    let rank = w.ok(&["analyze", "ngram-rank", "--corpus", "corpus.jsonl", "--phrase", "the"]);
    assert!(rank["unique_ngrams"].as_u64().unwrap() > 0);

    w.ok(&["analyze", "partition", "--corpus", "corpus.jsonl", "--channels", "channels.txt", "--output", "part.json"]);
    let part = w.json("part.json");
    let n = part["n_roh_videos"].as_u64().unwrap() + part["n_other_videos"].as_u64().unwrap();
    assert_eq!(n, 300);
    let overlap = w.ok(&["analyze", "overlap", "--corpus", "corpus.jsonl", "--channels", "channels.txt"]);
    let j = overlap["overlap"]["jaccard"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&j));
    w.ok(&["analyze", "dominant", "--corpus", "corpus.jsonl", "--channels", "channels.txt", "--output", "dom.json"]);
    assert_eq!(w.json("dom.json")["threshold"], 0.8);
    assert!(w.path("dom.csv").exists());
    let out = w.run(&["analyze", "dominant", "--corpus", "corpus.jsonl", "--channels", "channels.txt", "--threshold", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["code"], "analytics");

    let stats = w.ok(&["analyze", "video-stats", "--corpus", "corpus.jsonl", "--channels", "channels.txt"]);
    assert_eq!(stats["all"]["n_videos"], 300);
    assert!(stats["by_side"].is_object());
}

#[test]
fn ingest_reports_bad_lines() {
    let w = Work { dir: tempfile::tempdir().unwrap() };
    let video = json!({ "kind": "video", "id": "v1", "channel_id": "ch", "title": "t", "views": 1, "likes": 0, "dislikes": 0, "comment_count": 1 });
    let comment = json!({ "kind": "comment", "id": "c1", "video_id": "v1", "user_id": "u1", "text": "we pray for them" });
    w.write("raw.jsonl", &format!("{video}\n{comment}\n{{not json\n{comment}\n"));
    w.ok(&["ingest", "--input", "raw.jsonl", "--output", "corpus.jsonl", "--manifest", "m.json", "--language-threshold", "0.15"]);
    let m = w.json("m.json");
    assert_eq!(m["n_comments"], 1);
    assert_eq!(m["duplicates_skipped"], 1);
    assert_eq!(m["line_errors"].as_array().unwrap().len(), 1);
    assert_eq!(m["line_errors"][0]["line"], 3);

    let out = w.run(&["ingest", "--input", "raw.jsonl", "--output", "strict.jsonl", "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["code"], "corpus");
    assert!(!w.path("strict.jsonl").exists());
}

#[test]
fn failures_are_machine_readable() {
    let w = Work { dir: tempfile::tempdir().unwrap() };
    let out = w.run(&["train", "--corpus", "missing.jsonl", "--pool", "pool.jsonl", "--output", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_of(&out);
    assert_eq!(err["code"], "io");
    assert!(err["details"]["path"].as_str().unwrap().ends_with("missing.jsonl"));
    assert!(err["message"].is_string());
}

#[test]
fn usage_errors_exit_with_two() {
    let w = Work { dir: tempfile::tempdir().unwrap() };
    assert_eq!(w.run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(w.run(&["sample", "sideways"]).status.code(), Some(2));
    assert_eq!(w.run(&["ingest", "--input", "a", "--output", "b", "--bogus"]).status.code(), Some(2));
    assert_eq!(w.run(&["resolve", "--pool", "p.jsonl"]).status.code(), Some(2));
    assert_eq!(w.run(&[]).status.code(), Some(2));
}

#[test]
fn serve_reports_bind_failures() {
    let w = Work { dir: tempfile::tempdir().unwrap() };
    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = held.local_addr().unwrap().to_string();
    let video = json!({ "kind": "video", "id": "v1", "channel_id": "ch", "title": "t", "views": 1, "likes": 0, "dislikes": 0, "comment_count": 1 });
    let comment = json!({ "kind": "comment", "id": "c1", "video_id": "v1", "user_id": "u1", "text": "we pray for them" });
    w.write("corpus.jsonl", &format!("{video}\n{comment}\n"));
    w.write("batch.json", &json!({ "strategy": "random", "round": 0, "params": {}, "comment_ids": ["c1"] }).to_string());
    let out = w.run(&[
        "serve", "--corpus", "corpus.jsonl", "--batch", "batch.json", "--labels", "l.jsonl", "--adjudications", "a.jsonl",
        "--addr", &addr,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["code"], "bind");
}
