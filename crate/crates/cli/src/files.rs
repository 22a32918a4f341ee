//! Reading and writing the on-disk artifacts.
//!
//! | artifact        | format                                              |
//! |-----------------|-----------------------------------------------------|
//! | corpus          | JSON lines, one `{"kind": "comment" | "video", ...}` |
//! | embedding table | binary (`RVEMB001`) or text (`.txt`)                |
//! | vector store    | binary (`RVVEC001`)                                 |
//! | lexicon         | text lines `<token> <score>`                        |
//! | labeled pool    | JSON lines of labeled examples                      |
//! | batch, model    | JSON                                                |
//! | label log       | JSON lines of label records                         |

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use rarevoice::classifier::TrainedClassifier;
use rarevoice::corpus::{ingest, Corpus};
use rarevoice::embeddings::{read_vector_store, write_vector_store, CommentVectorMap, EmbeddingTable, VectorRecord};
use rarevoice::lexicon::Lexicon;
use rarevoice::nnindex::VectorIndex;
use rarevoice::sampling::{LabeledPool, SamplingBatch};

use crate::error::{CliError, Result};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out)?;
    out.flush().map_err(|e| CliError::io(&tmp, e))?;
    out.get_ref().sync_all().map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::new("json", format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n").map_err(|e| CliError::io(path, e))
    })
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let outcome = ingest(open(path)?)?;
    if !outcome.line_errors.is_empty() {
        return Err(CliError::new("corpus", format!("{}: {} malformed lines", path.display(), outcome.line_errors.len()))
            .with_details(serde_json::to_value(&outcome.line_errors)?));
    }
    Ok(outcome.corpus)
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    write_atomic(path, |out| Ok(corpus.write_jsonl(out)?))
}

fn is_text(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "txt" || e == "vec")
}

pub fn read_table(path: &Path) -> Result<EmbeddingTable> {
    Ok(if is_text(path) { EmbeddingTable::read_text(open(path)?)? } else { EmbeddingTable::read_binary(open(path)?)? })
}

pub fn write_table(path: &Path, table: &EmbeddingTable) -> Result<()> {
    let text = is_text(path);
    write_atomic(path, |out| {
        if text {
            table.write_text(out)?
        } else {
            table.write_binary(out)?
        }
        Ok(())
    })
}

pub fn read_vectors(path: &Path) -> Result<(usize, Vec<VectorRecord>)> {
    Ok(read_vector_store(open(path)?)?)
}

pub fn write_vectors(path: &Path, dim: usize, records: &[VectorRecord]) -> Result<()> {
    write_atomic(path, |out| Ok(write_vector_store(out, dim, records)?))
}

/// Comment vectors as a map, for classifiers with an embedding block.
pub fn read_vector_map(path: &Path) -> Result<CommentVectorMap> {
    Ok(read_vectors(path)?.1.into_iter().map(|r| (r.id, r.values)).collect())
}

pub fn read_index(path: &Path) -> Result<VectorIndex> {
    let (dim, records) = read_vectors(path)?;
    Ok(VectorIndex::from_records(dim, &records)?.index)
}

pub fn read_lexicon(path: &Path) -> Result<Lexicon> {
    Ok(Lexicon::read_text(open(path)?)?)
}

/// A missing pool file is an empty pool.
pub fn read_pool(path: Option<&Path>) -> Result<LabeledPool> {
    match path {
        Some(p) if p.exists() => Ok(LabeledPool::read_jsonl(open(p)?)?),
        _ => Ok(LabeledPool::new()),
    }
}

pub fn write_pool(path: &Path, pool: &LabeledPool) -> Result<()> {
    write_atomic(path, |out| Ok(pool.write_jsonl(out)?))
}

pub fn read_batch(path: &Path) -> Result<SamplingBatch> {
    read_json(path)
}

pub fn read_model(path: &Path) -> Result<TrainedClassifier> {
    read_json(path)
}

/// A JSON array of ids, or an object with a `comment_ids` array.
pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let v: serde_json::Value = read_json(path)?;
    let arr = v.get("comment_ids").unwrap_or(&v);
    serde_json::from_value(arr.clone())
        .map_err(|_| CliError::new("json", format!("{}: expected an array of ids", path.display())))
}
