use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rarevoice::analytics::{
    dominant_side_users, ngram_rank, parse_channel_list, partition_videos, sentiment_share, template_following_tokens,
    user_overlap, video_stats, video_stats_by_side, write_csv, VideoPartition,
};
use rarevoice::classifier::{repeated_eval, ClassifierConfig, Label, LabeledData, LabeledExample, Strategy, SvmConfig};
use rarevoice::corpus::{ingest, ngram_counts, tokenize, Corpus};
use rarevoice::embeddings::{compose_all, compose_users, train_embeddings, TrainConfig, VectorRecord};
use rarevoice::harness::{self, rank_wild, AdjudicationRecord, AnnotationSession, LabelRecord};
use rarevoice::lexicon::{induce_lexicon, LexiconConfig, SeedSet, NEGATIVE_SEEDS, POSITIVE_SEEDS};
use rarevoice::nnindex::VectorIndex;
use rarevoice::pipeline::train_on_pool;
use rarevoice::sampling::{
    certainty_sample, nn_comment_sample, predict_pool, random_sample, uncertainty_sample, user_nn_sample, LabeledPool,
    NnMode, SamplingBatch, UserNnParams,
};
use rarevoice::synth::{generate, SynthConfig};

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::files;
use crate::server::{router, AppState, RankContext};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::EmbedTrain(a) => cmd_embed_train(a),
        Command::EmbedCompose(a) => cmd_embed_compose(a),
        Command::IndexBuild(a) => cmd_index_build(a),
        Command::LexiconInduce(a) => cmd_lexicon_induce(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Resolve(a) => cmd_resolve(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Export(a) => cmd_export(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Pretty JSON to a file, or to stdout when no path is given.
fn emit(output: Option<&Path>, value: &Value) -> Result<()> {
    match output {
        Some(p) => files::write_json(p, value),
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn csv_companion(output: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let Some(p) = output else { return Ok(()) };
    let path = p.with_extension("csv");
    files::write_atomic(&path, |out| write_csv(out, header, rows).map_err(|e| CliError::io(&path, e)))
}

fn write_csv_to(output: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match output {
        Some(p) => files::write_atomic(p, |out| write_csv(out, header, rows).map_err(|e| CliError::io(p, e))),
        None => write_csv(std::io::stdout().lock(), header, rows).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let outcome = ingest(files::open(&a.input)?)?;
    if a.strict && !outcome.line_errors.is_empty() {
        return Err(CliError::new("corpus", format!("{} malformed lines", outcome.line_errors.len()))
            .with_details(serde_json::to_value(&outcome.line_errors)?));
    }
    let mut corpus = outcome.corpus;
    if let Some(t) = a.language_threshold {
        corpus.apply_language_filter(t)?;
    }
    files::write_corpus(&a.output, &corpus)?;
    let manifest = corpus.manifest(&outcome.line_errors, outcome.duplicates_skipped);
    emit(a.manifest.as_deref(), &serde_json::to_value(manifest)?)
}

fn cmd_embed_train(a: EmbedTrainArgs) -> Result<()> {
    let corpus = files::read_corpus(&a.corpus)?;
    let cfg = TrainConfig {
        dim: a.dim,
        epochs: a.epochs,
        window: a.window,
        min_count: a.min_count,
        bucket_count: a.buckets,
        rng_seed: a.seed,
        ..TrainConfig::default()
    };
    let table = train_embeddings(&corpus, &cfg)?;
    files::write_table(&a.output, &table)?;
    emit(None, &json!({ "words": table.words().len(), "dim": table.dim(), "config": cfg }))
}

fn cmd_embed_compose(a: EmbedComposeArgs) -> Result<()> {
    let corpus = files::read_corpus(&a.corpus)?;
    let table = files::read_table(&a.table)?;
    let comments = compose_all(&table, &corpus);
    let records: Vec<VectorRecord> = comments.iter().map(VectorRecord::from).collect();
    files::write_vectors(&a.comments, table.dim(), &records)?;
    let unusable = comments.iter().filter(|c| !c.usable).count();
    let mut report = json!({ "comments": comments.len(), "unusable_comments": unusable });
    if let Some(path) = &a.users {
        let (users, missing) = compose_users(&table, &corpus, &comments);
        let records: Vec<VectorRecord> = users.iter().map(VectorRecord::from).collect();
        files::write_vectors(path, table.dim(), &records)?;
        report["users"] = json!(users.len());
        report["users_without_vector"] = json!(missing);
    }
    emit(None, &report)
}

fn cmd_index_build(a: IndexBuildArgs) -> Result<()> {
    let (dim, records) = files::read_vectors(&a.vectors)?;
    let built = VectorIndex::from_records(dim, &records)?;
    files::write_vectors(&a.output, dim, &built.index.to_records())?;
    emit(None, &json!({ "indexed": built.index.len(), "dim": dim, "skipped": built.skipped }))
}

fn cmd_lexicon_induce(a: LexiconInduceArgs) -> Result<()> {
    let table = files::read_table(&a.table)?;
    let or_default = |given: Vec<String>, builtin: &[&str]| {
        if given.is_empty() {
            builtin.iter().map(|s| s.to_string()).collect()
        } else {
            given
        }
    };
    let seeds = SeedSet { positive: or_default(a.positive, &POSITIVE_SEEDS), negative: or_default(a.negative, &NEGATIVE_SEEDS) };
    let cfg = LexiconConfig { graph_k: a.k, restart_beta: a.beta, max_vocab: a.max_vocab };
    let lexicon = induce_lexicon(&table, &seeds, cfg)?;
    files::write_atomic(&a.output, |out| Ok(lexicon.write_text(out)?))?;
    emit(None, &json!({ "words": lexicon.len(), "dropped_seeds": lexicon.dropped_seeds, "config": cfg }))
}

fn read_partition(corpus: &Corpus, channels: &Path) -> Result<VideoPartition> {
    let text = std::fs::read_to_string(channels).map_err(|e| CliError::io(channels, e))?;
    Ok(partition_videos(corpus, &parse_channel_list(&text))?)
}

fn cmd_analyze(cmd: AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Template { io, template, top } => {
            let corpus = files::read_corpus(&io.corpus)?;
            let phrase = tokenize(&template).into_inner();
            let counts = template_following_tokens(corpus.english_tokens(), &phrase)?;
            let mut rows: Vec<(String, u64)> = counts.into_iter().collect();
            rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            if let Some(n) = top {
                rows.truncate(n);
            }
            let csv: Vec<Vec<String>> = rows.iter().map(|(t, c)| vec![t.clone(), c.to_string()]).collect();
            csv_companion(io.output.as_deref(), &["token", "count"], &csv)?;
            let counts: Vec<Value> = rows.iter().map(|(t, c)| json!({ "token": t, "count": c })).collect();
            emit(io.output.as_deref(), &json!({ "template": phrase, "top": top, "counts": counts }))
        }
        AnalyzeCommand::NgramRank { io, phrase } => {
            let corpus = files::read_corpus(&io.corpus)?;
            let phrase = tokenize(&phrase).into_inner();
            let table = ngram_counts(&corpus, phrase.len().max(1))?;
            let rank = ngram_rank(&table, &phrase)?;
            emit(io.output.as_deref(), &serde_json::to_value(rank)?)
        }
        AnalyzeCommand::Partition(p) => {
            let corpus = files::read_corpus(&p.io.corpus)?;
            let part = read_partition(&corpus, &p.channels)?;
            let mut rows: Vec<Vec<String>> = part.roh_video_ids.iter().map(|v| vec![v.clone(), "roh".into()]).collect();
            rows.extend(part.other_video_ids.iter().map(|v| vec![v.clone(), "other".into()]));
            csv_companion(p.io.output.as_deref(), &["video_id", "side"], &rows)?;
            emit(
                p.io.output.as_deref(),
                &json!({
                    "channels": p.channels,
                    "n_roh_videos": part.roh_video_ids.len(),
                    "n_other_videos": part.other_video_ids.len(),
                    "partition": part,
                }),
            )
        }
        AnalyzeCommand::Overlap(p) => {
            let corpus = files::read_corpus(&p.io.corpus)?;
            let part = read_partition(&corpus, &p.channels)?;
            let overlap = user_overlap(&corpus, &part)?;
            emit(p.io.output.as_deref(), &json!({ "channels": p.channels, "overlap": overlap }))
        }
        AnalyzeCommand::Dominant { part: p, threshold } => {
            let corpus = files::read_corpus(&p.io.corpus)?;
            let part = read_partition(&corpus, &p.channels)?;
            let users = dominant_side_users(&corpus, &part, threshold)?;
            let mut rows: Vec<Vec<String>> = users.roh_to_other.iter().map(|u| vec![u.clone(), "roh_to_other".into()]).collect();
            rows.extend(users.other_to_roh.iter().map(|u| vec![u.clone(), "other_to_roh".into()]));
            csv_companion(p.io.output.as_deref(), &["user_id", "direction"], &rows)?;
            emit(p.io.output.as_deref(), &json!({ "channels": p.channels, "threshold": threshold, "users": users }))
        }
        AnalyzeCommand::Sentiment { io, lexicon, cutoff } => {
            let corpus = files::read_corpus(&io.corpus)?;
            let lex = files::read_lexicon(&lexicon)?;
            let share = sentiment_share(corpus.english_tokens(), &lex, cutoff)?;
            emit(io.output.as_deref(), &json!({ "lexicon": lexicon, "cutoff": cutoff, "share": share }))
        }
        AnalyzeCommand::VideoStats { io, channels } => {
            let corpus = files::read_corpus(&io.corpus)?;
            let mut report = json!({ "all": video_stats(&corpus)? });
            if let Some(ch) = &channels {
                let part = read_partition(&corpus, ch)?;
                report["by_side"] = serde_json::to_value(video_stats_by_side(&corpus, &part))?;
                report["channels"] = json!(ch);
            }
            emit(io.output.as_deref(), &report)
        }
    }
}

fn write_batch(path: &Path, batch: &SamplingBatch) -> Result<()> {
    files::write_json(path, batch)?;
    emit(None, &json!({ "strategy": batch.strategy, "round": batch.round, "size": batch.len() }))
}

/// Probabilities for every unlabeled English comment.
fn pool_probs(corpus: &Corpus, pool: &LabeledPool, model: &ModelArgs) -> Result<Vec<(String, f64)>> {
    let clf = files::read_model(&model.model)?;
    let vectors = model.vectors.as_deref().map(files::read_vector_map).transpose()?;
    if clf.needs_embeddings() && vectors.is_none() {
        return Err(CliError::new("bad_argument", "the model uses embedding features; pass --vectors"));
    }
    Ok(predict_pool(&clf, corpus, &pool.unlabeled_ids(corpus), vectors.as_ref())?)
}

fn cmd_sample(cmd: SampleCommand) -> Result<()> {
    let load = |p: &PoolArgs| -> Result<(Corpus, LabeledPool)> {
        Ok((files::read_corpus(&p.corpus)?, files::read_pool(p.pool.as_deref())?))
    };
    match cmd {
        SampleCommand::Random { pool: p, n, seed } => {
            let (corpus, pool) = load(&p)?;
            let batch = random_sample(&pool.unlabeled_ids(&corpus), n, seed, pool.round_counter())?;
            write_batch(&p.output, &batch)
        }
        SampleCommand::NnComment { pool: p, seeds, index, k_per_seed, pooled } => {
            let (_, pool) = load(&p)?;
            let seeds = files::read_id_list(&seeds)?;
            let index = files::read_index(&index)?;
            let mode = if pooled { NnMode::Pooled } else { NnMode::PerSeed };
            let batch = nn_comment_sample(&seeds, k_per_seed, &index, pool.labeled_ids(), mode, pool.round_counter())?;
            write_batch(&p.output, &batch)
        }
        SampleCommand::Certainty { pool: p, model, k } => {
            let (corpus, pool) = load(&p)?;
            let probs = pool_probs(&corpus, &pool, &model)?;
            write_batch(&p.output, &certainty_sample(&probs, k, pool.round_counter())?)
        }
        SampleCommand::Uncertainty { pool: p, model, k } => {
            let (corpus, pool) = load(&p)?;
            let probs = pool_probs(&corpus, &pool, &model)?;
            write_batch(&p.output, &uncertainty_sample(&probs, k, pool.round_counter())?)
        }
        SampleCommand::NnUser { pool: p, model, users, k, m, n, seed } => {
            let (corpus, pool) = load(&p)?;
            let probs = pool_probs(&corpus, &pool, &model)?;
            let user_index = files::read_index(&users)?;
            let params = UserNnParams { k, m, n_comments: n, seed };
            let batch = user_nn_sample(&probs, &corpus, &user_index, pool.labeled_ids(), params, pool.round_counter())?;
            write_batch(&p.output, &batch)
        }
    }
}

#[derive(Deserialize)]
struct SeedFile {
    positive: Vec<String>,
    negative: Vec<String>,
}

fn read_log<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    Ok(harness::read_jsonl(files::open(path)?)?)
}

fn cmd_resolve(a: ResolveArgs) -> Result<()> {
    let mut pool = files::read_pool(Some(&a.pool))?;
    let (batch, resolved, skipped) = if let Some(seeds) = &a.seeds {
        let seeds: SeedFile = files::read_json(seeds)?;
        let round = pool.round_counter();
        let examples: Vec<LabeledExample> = seeds
            .positive
            .iter()
            .map(|id| LabeledExample::direct(id.clone(), Label::Positive, round, Strategy::Seed))
            .chain(seeds.negative.iter().map(|id| LabeledExample::direct(id.clone(), Label::Negative, round, Strategy::Seed)))
            .collect();
        let ids = examples.iter().map(|e| e.comment_id.clone()).collect();
        (SamplingBatch::seed(ids, round), examples, Vec::new())
    } else {
        let batch = files::read_batch(a.batch.as_deref().expect("clap requires --batch without --seeds"))?;
        let labels: Vec<LabelRecord> = read_log(a.labels.as_deref().expect("clap requires --labels with --batch"))?;
        let adjs: Vec<AdjudicationRecord> = match &a.adjudications {
            Some(p) if p.exists() => read_log(p)?,
            _ => Vec::new(),
        };
        let r = harness::resolve_round(&labels, &adjs, &batch)?;
        (batch, r.resolved, r.skipped)
    };
    let n = resolved.len();
    let balance = pool.run_round(&batch, resolved, &skipped)?;
    files::write_pool(&a.pool, &pool)?;
    emit(
        None,
        &json!({
            "round": batch.round,
            "added": n,
            "skipped": skipped,
            "round_balance": balance,
            "pool_size": pool.len(),
            "pool_balance": pool.balance(),
        }),
    )
}

fn classifier_config(a: &ClassifierArgs) -> ClassifierConfig {
    ClassifierConfig {
        min_df: a.min_df,
        tfidf: a.tfidf,
        with_embeddings: a.with_embeddings,
        svm: SvmConfig { lambda: a.lambda, epochs: a.epochs, ..SvmConfig::default() },
        ..ClassifierConfig::default()
    }
}

fn classifier_vectors(a: &ClassifierArgs) -> Result<Option<rarevoice::embeddings::CommentVectorMap>> {
    if a.with_embeddings {
        a.vectors.as_deref().map(files::read_vector_map).transpose()
    } else {
        Ok(None)
    }
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let corpus = files::read_corpus(&a.corpus)?;
    let pool = files::read_pool(Some(&a.pool))?;
    let cfg = classifier_config(&a.classifier);
    let vectors = classifier_vectors(&a.classifier)?;
    let model = train_on_pool(pool.examples(), &corpus, vectors.as_ref(), &cfg)?;
    files::write_json(&a.output, &model)?;
    emit(None, &json!({ "examples": pool.len(), "balance": pool.balance(), "features": model.space.len(), "calibration": model.calibration_source }))
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let corpus = files::read_corpus(&a.corpus)?;
    let pool = files::read_pool(Some(&a.pool))?;
    let cfg = classifier_config(&a.classifier);
    let vectors = classifier_vectors(&a.classifier)?;
    let data = LabeledData::from_examples(pool.examples(), &corpus, vectors.as_ref());
    let report = repeated_eval(&data, &cfg, a.splits, a.train_frac, a.seed)?;
    emit(
        a.output.as_deref(),
        &json!({
            "splits": a.splits,
            "train_frac": a.train_frac,
            "seed": a.seed,
            "examples": pool.len(),
            "balance": pool.balance(),
            "classifier": cfg,
            "metrics": report,
        }),
    )
}

fn cmd_rank(a: RankArgs) -> Result<()> {
    let corpus = files::read_corpus(&a.corpus)?;
    let pool = files::read_pool(a.pool.as_deref())?;
    let probs = pool_probs(&corpus, &pool, &a.model)?;
    let ranked = rank_wild(&probs, pool.labeled_ids(), a.top);
    let rows: Vec<Vec<String>> = ranked
        .iter()
        .enumerate()
        .map(|(i, (id, p))| {
            let text = corpus.comment(id).map(|c| c.text.clone()).unwrap_or_default();
            vec![(i + 1).to_string(), id.clone(), format!("{p:.6}"), text]
        })
        .collect();
    write_csv_to(a.output.as_deref(), &["rank", "comment_id", "prob_positive", "text"], &rows)
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let corpus = files::read_corpus(&a.corpus)?;
    let pool = files::read_pool(Some(&a.pool))?;
    let rows: Vec<Vec<String>> = pool
        .examples()
        .iter()
        .map(|e| {
            let c = corpus.comment(&e.comment_id);
            vec![
                e.comment_id.clone(),
                if e.label.is_positive() { "positive" } else { "negative" }.into(),
                e.round.to_string(),
                e.strategy.as_str().into(),
                e.adjudicated.to_string(),
                c.map(|c| c.user_id.clone()).unwrap_or_default(),
                c.map(|c| c.text.clone()).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv_to(a.output.as_deref(), &["comment_id", "label", "round", "strategy", "adjudicated", "user_id", "text"], &rows)
}

fn cmd_serve(a: ServeArgs) -> Result<()> {
    let corpus = Arc::new(files::read_corpus(&a.corpus)?);
    let batch = files::read_batch(&a.batch)?;
    let texts: HashMap<String, String> = batch
        .comment_ids
        .iter()
        .filter_map(|id| corpus.comment(id).map(|c| (id.clone(), c.text.clone())))
        .collect();
    if texts.len() != batch.len() {
        let missing: Vec<&String> = batch.comment_ids.iter().filter(|id| !texts.contains_key(*id)).collect();
        return Err(CliError::new("corpus", "batch refers to comments missing from the corpus")
            .with_details(json!({ "comment_ids": missing })));
    }
    let session = AnnotationSession::open(batch, texts, &a.labels, &a.adjudications)?;
    let rank = match &a.model {
        Some(m) => {
            let model = files::read_model(m)?;
            let vectors = a.vectors.as_deref().map(files::read_vector_map).transpose()?;
            if model.needs_embeddings() && vectors.is_none() {
                return Err(CliError::new("bad_argument", "the model uses embedding features; pass --vectors"));
            }
            let labeled_ids: HashSet<String> = files::read_pool(a.pool.as_deref())?.labeled_ids().clone();
            Some(RankContext { model, corpus: corpus.clone(), vectors, labeled_ids })
        }
        None => None,
    };
    let state = Arc::new(AppState { session: Mutex::new(session), rank });
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new("io", e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .map_err(|e| CliError::new("bind", format!("{}: {e}", a.addr)).with_details(json!({ "addr": a.addr })))?;
        let local = listener.local_addr().map_err(|e| CliError::new("bind", e.to_string()))?;
        eprintln!("{}", json!({ "listening": local.to_string() }));
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::new("io", e.to_string()))
    })
}

#[derive(Serialize)]
struct TruthFile<'a> {
    labels: BTreeMap<&'a str, Label>,
    seed_positive: &'a [String],
    seed_negative: &'a [String],
    sympathetic_users: Vec<&'a String>,
    focus_channels: &'a [String],
    config: SynthConfig,
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig { n_comments: a.comments, n_users: a.users, seed: a.seed, ..SynthConfig::default() };
    let syn = generate(&cfg);
    files::write_corpus(&a.output, &syn.corpus)?;
    if let Some(p) = &a.truth {
        let truth = TruthFile {
            labels: syn.truth.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
            seed_positive: &syn.seed_positive,
            seed_negative: &syn.seed_negative,
            sympathetic_users: syn.sympathetic_users.iter().collect(),
            focus_channels: &syn.focus_channels,
            config: cfg,
        };
        files::write_json(p, &truth)?;
    }
    if let Some(p) = &a.channels {
        let text: String = syn.focus_channels.iter().map(|c| format!("{c}\n")).collect();
        files::write_atomic(p, |out| out.write_all(text.as_bytes()).map_err(|e| CliError::io(p, e)))?;
    }
    emit(None, &json!({ "comments": syn.corpus.len(), "positives": syn.positives(), "videos": syn.corpus.videos().len() }))
}
