//! File formats.
//!
//! Text vectors: a header line `<count> <dim>` followed by one line per token,
//! `<token> v1 ... vdim`, space separated.
//!
//! Binary table (`RVEMB001`), all integers little-endian:
//! magic[8], dim u32, n_words u64, has_subwords u8, min_n u32, max_n u32,
//! bucket_count u64, then per word (len u32, utf-8 bytes, count u64), then
//! n_words*dim f32 word rows, then bucket_count*dim f32 bucket rows.
//!
//! Vector store (`RVVEC001`): magic[8], dim u32, count u64, then per record
//! (id_len u32, utf-8 id, weight u32, flags u8, dim f32). Flag bit 0 means
//! normalized, bit 1 means unusable. `weight` is the number of comments
//! behind a user vector and 1 for comment vectors.

use std::io::{BufRead, Read, Write};

use super::{CommentVector, EmbeddingError, EmbeddingTable, SubwordConfig, UserVector};

pub const TABLE_MAGIC: &[u8; 8] = b"RVEMB001";
pub const VECTOR_STORE_MAGIC: &[u8; 8] = b"RVVEC001";

impl EmbeddingTable {
    /// Writes the effective vector of every vocabulary word in text format.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), EmbeddingError> {
        writeln!(out, "{} {}", self.words().len(), self.dim())?;
        for w in self.words() {
            let v = self.effective_word_vector(w);
            write!(out, "{w}")?;
            for x in &v.values {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Loads pretrained vectors; the result has no subword buckets.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines().enumerate();
        let parse_err = |line: usize, message: String| EmbeddingError::Parse { line, message };
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let header = header?;
        let mut parts = header.split_whitespace();
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "bad count".into()))?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "bad dim".into()))?;
        let mut entries = Vec::with_capacity(count);
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let token = fields.next().unwrap_or_default().to_string();
            let values: Result<Vec<f32>, _> = fields.filter(|f| !f.is_empty()).map(str::parse::<f32>).collect();
            let values = values.map_err(|e| parse_err(idx + 1, e.to_string()))?;
            if values.len() != dim {
                return Err(parse_err(idx + 1, format!("expected {dim} values, got {}", values.len())));
            }
            entries.push((token, values));
        }
        if entries.len() != count {
            return Err(parse_err(1, format!("header says {count} tokens, found {}", entries.len())));
        }
        EmbeddingTable::from_word_vectors(dim, entries)
            .map_err(|e| parse_err(0, e.to_string()))
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<(), EmbeddingError> {
        out.write_all(TABLE_MAGIC)?;
        out.write_all(&(self.dim() as u32).to_le_bytes())?;
        out.write_all(&(self.words().len() as u64).to_le_bytes())?;
        let sub = self.subwords();
        out.write_all(&[sub.is_some() as u8])?;
        let s = sub.unwrap_or(SubwordConfig { min_n: 0, max_n: 0, bucket_count: 0 });
        out.write_all(&(s.min_n as u32).to_le_bytes())?;
        out.write_all(&(s.max_n as u32).to_le_bytes())?;
        out.write_all(&(s.bucket_count as u64).to_le_bytes())?;
        for (w, c) in self.words().iter().zip(self.counts()) {
            write_str(&mut out, w)?;
            out.write_all(&c.to_le_bytes())?;
        }
        let (words, buckets) = self.raw_parts();
        write_f32s(&mut out, words)?;
        write_f32s(&mut out, buckets)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self, EmbeddingError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != TABLE_MAGIC {
            return Err(EmbeddingError::Format("not an embedding table".into()));
        }
        let dim = read_u32(&mut input)? as usize;
        let n_words = read_u64(&mut input)? as usize;
        let mut flag = [0u8; 1];
        input.read_exact(&mut flag)?;
        let min_n = read_u32(&mut input)? as usize;
        let max_n = read_u32(&mut input)? as usize;
        let bucket_count = read_u64(&mut input)? as usize;
        let subwords = match flag[0] {
            0 => None,
            1 => {
                if bucket_count == 0 || min_n == 0 || min_n > max_n {
                    return Err(EmbeddingError::Format("bad subword header".into()));
                }
                Some(SubwordConfig { min_n, max_n, bucket_count })
            }
            _ => return Err(EmbeddingError::Format("bad subword flag".into())),
        };
        if dim == 0 {
            return Err(EmbeddingError::Format("dim is zero".into()));
        }
        let mut words = Vec::with_capacity(n_words);
        let mut counts = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(read_str(&mut input)?);
            counts.push(read_u64(&mut input)?);
        }
        let word_vectors = read_f32s(&mut input, n_words * dim)?;
        let bucket_vectors = read_f32s(&mut input, subwords.map_or(0, |s| s.bucket_count) * dim)?;
        Ok(EmbeddingTable::from_parts(dim, words, counts, word_vectors, subwords, bucket_vectors))
    }
}

/// One entry of the vector store.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRecord {
    pub id: String,
    pub values: Vec<f32>,
    pub weight: u32,
    pub normalized: bool,
    pub usable: bool,
}

impl From<&CommentVector> for VectorRecord {
    fn from(v: &CommentVector) -> Self {
        VectorRecord {
            id: v.comment_id.clone(),
            values: v.values.clone(),
            weight: 1,
            normalized: v.normalized,
            usable: v.usable,
        }
    }
}

impl From<&UserVector> for VectorRecord {
    fn from(v: &UserVector) -> Self {
        VectorRecord {
            id: v.user_id.clone(),
            values: v.values.clone(),
            weight: v.comment_count as u32,
            normalized: false,
            usable: true,
        }
    }
}

pub fn write_vector_store<W: Write>(mut out: W, dim: usize, records: &[VectorRecord]) -> Result<(), EmbeddingError> {
    out.write_all(VECTOR_STORE_MAGIC)?;
    out.write_all(&(dim as u32).to_le_bytes())?;
    out.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        if r.values.len() != dim {
            return Err(EmbeddingError::Format(format!("record '{}' has length {}", r.id, r.values.len())));
        }
        write_str(&mut out, &r.id)?;
        out.write_all(&r.weight.to_le_bytes())?;
        let flags = (r.normalized as u8) | ((!r.usable as u8) << 1);
        out.write_all(&[flags])?;
        write_f32s(&mut out, &r.values)?;
    }
    Ok(())
}

/// Returns the store dimension and its records in file order.
pub fn read_vector_store<R: Read>(mut input: R) -> Result<(usize, Vec<VectorRecord>), EmbeddingError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != VECTOR_STORE_MAGIC {
        return Err(EmbeddingError::Format("not a vector store".into()));
    }
    let dim = read_u32(&mut input)? as usize;
    let count = read_u64(&mut input)? as usize;
    let mut records = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let id = read_str(&mut input)?;
        let weight = read_u32(&mut input)?;
        let mut flags = [0u8; 1];
        input.read_exact(&mut flags)?;
        let values = read_f32s(&mut input, dim)?;
        records.push(VectorRecord {
            id,
            values,
            weight,
            normalized: flags[0] & 1 != 0,
            usable: flags[0] & 2 == 0,
        });
    }
    Ok((dim, records))
}

fn write_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn write_f32s<W: Write>(out: &mut W, values: &[f32]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)
}

fn read_u32<R: Read>(input: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(input: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str<R: Read>(input: &mut R) -> Result<String, EmbeddingError> {
    let len = read_u32(input)? as usize;
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| EmbeddingError::Format(e.to_string()))
}

fn read_f32s<R: Read>(input: &mut R, n: usize) -> Result<Vec<f32>, EmbeddingError> {
    let mut buf = vec![0u8; n * 4];
    input.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::embeddings::{train_on_sequences, TrainConfig};

    fn trained() -> EmbeddingTable {
        let seqs = vec![tokenize("peace and love for all"), tokenize("love peace now")];
        let cfg = TrainConfig { dim: 8, epochs: 1, bucket_count: 64, min_count: 1, ..TrainConfig::default() };
        train_on_sequences(&seqs, &cfg).unwrap().0
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let t = trained();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(EmbeddingTable::read_binary(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn text_round_trip_keeps_effective_vectors() {
        let t = trained();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("{} 8\n", t.words().len())));
        let loaded = EmbeddingTable::read_text(buf.as_slice()).unwrap();
        for w in t.words() {
            assert_eq!(loaded.word_vector(w).unwrap(), t.effective_word_vector(w).values.as_slice());
        }
        assert!(loaded.subwords().is_none());
    }

    #[test]
    fn text_count_mismatch_rejected() {
        let bad = "3 2\na 1 2\nb 3 4\n";
        assert!(matches!(EmbeddingTable::read_text(bad.as_bytes()), Err(EmbeddingError::Parse { .. })));
        let short = "1 2\na 1\n";
        assert!(matches!(EmbeddingTable::read_text(short.as_bytes()), Err(EmbeddingError::Parse { line: 2, .. })));
    }

    #[test]
    fn vector_store_round_trip() {
        let recs = vec![
            VectorRecord { id: "c1".into(), values: vec![0.6, 0.8], weight: 1, normalized: true, usable: true },
            VectorRecord { id: "ü2".into(), values: vec![0.0, 0.0], weight: 1, normalized: false, usable: false },
        ];
        let mut buf = Vec::new();
        write_vector_store(&mut buf, 2, &recs).unwrap();
        let (dim, back) = read_vector_store(buf.as_slice()).unwrap();
        assert_eq!(dim, 2);
        assert_eq!(back, recs);
    }
}
