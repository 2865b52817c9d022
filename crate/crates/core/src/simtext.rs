//! Embedding providers and the two similarity primitives.
//!
//! The built-in provider is signed feature hashing (FNV-1a 64) of idf-weighted
//! tokens into 256 buckets. External embeddings are read from the `PFIEMB1`
//! little-endian binary format:
//!
//! ```text
//! magic  "PFIEMB1\0"        8 bytes
//! dim    u32
//! count  u64
//! count × { id_len u16, id bytes (UTF-8), dim × f32 }
//! ```

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::TokenSet;

pub const HASHED_DIM: usize = 256;
pub const EMBEDDING_MAGIC: &[u8; 8] = b"PFIEMB1\0";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("embedding file format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("duplicate embedding id {0:?}")]
    DuplicateId(String),
    #[error("no embedding for id {0:?} in external store")]
    MissingId(String),
    #[error("non-finite value in embedding {0:?}")]
    NonFinite(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector { values: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimError> {
    if a.dim() != b.dim() {
        return Err(SimError::DimensionMismatch(a.dim(), b.dim()));
    }
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// |a ∩ b| / |a ∪ b|; two empty sets have similarity 0.
pub fn jaccard(a: &TokenSet, b: &TokenSet) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.tokens.iter().filter(|t| large.tokens.contains(*t)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Bucket (low bits) and sign (bit 63) of a token under the hashing provider.
pub fn hash_bucket(token: &str, dim: usize) -> (usize, f64) {
    let h = fnv1a64(token.as_bytes());
    let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
    ((h % dim as u64) as usize, sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    HashedTfidf,
    ExternalFile,
}

/// Document frequencies turned into `ln((1+N)/(1+df)) + 1` weights.
#[derive(Debug, Clone, Default)]
pub struct IdfTable {
    pub n_docs: usize,
    pub weights: HashMap<String, f64>,
}

impl IdfTable {
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a TokenSet>) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n = 0usize;
        for doc in docs {
            n += 1;
            for t in &doc.tokens {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        let weights = df
            .into_iter()
            .map(|(t, d)| (t, idf_weight(n, d)))
            .collect();
        IdfTable { n_docs: n, weights }
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.weights
            .get(token)
            .copied()
            .unwrap_or_else(|| idf_weight(self.n_docs, 0))
    }
}

fn idf_weight(n: usize, df: usize) -> f64 {
    ((1.0 + n as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    pub provider: Provider,
    pub dim: usize,
    pub map: HashMap<String, EmbeddingVector>,
    pub idf: Option<IdfTable>,
}

impl EmbeddingStore {
    pub fn hashed(idf: IdfTable) -> Self {
        EmbeddingStore {
            provider: Provider::HashedTfidf,
            dim: HASHED_DIM,
            map: HashMap::new(),
            idf: Some(idf),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn insert(&mut self, id: impl Into<String>, v: EmbeddingVector) {
        self.map.insert(id.into(), v);
    }

    /// Vector for `id`, embedding `tokens` on the fly when the hashed provider
    /// has no cached entry. Missing ids are errors for external stores.
    pub fn lookup(&self, id: &str, tokens: &TokenSet) -> Result<EmbeddingVector, SimError> {
        if let Some(v) = self.map.get(id) {
            return Ok(v.clone());
        }
        match self.provider {
            Provider::HashedTfidf => Ok(embed_hashed_tfidf(tokens, self)),
            Provider::ExternalFile => Err(SimError::MissingId(id.to_string())),
        }
    }
}

/// Signed, idf-weighted feature hashing, L2-normalized unless all-zero.
pub fn embed_hashed_tfidf(tokens: &TokenSet, store: &EmbeddingStore) -> EmbeddingVector {
    let dim = store.dim.max(1);
    let mut values = vec![0.0; dim];
    for t in &tokens.tokens {
        let (bucket, sign) = hash_bucket(t, dim);
        let w = store.idf.as_ref().map_or(1.0, |idf| idf.weight(t));
        values[bucket] += sign * w;
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    EmbeddingVector { values }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore, SimError> {
    let bytes = std::fs::read(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_embeddings(&bytes)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], SimError> {
        if self.buf.len() - self.pos < n {
            return Err(SimError::Format {
                offset: self.pos,
                message: format!(
                    "truncated {what}: need {n} bytes, {} remain",
                    self.buf.len() - self.pos
                ),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

pub fn parse_embeddings(bytes: &[u8]) -> Result<EmbeddingStore, SimError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8, "magic")? != EMBEDDING_MAGIC {
        return Err(SimError::Format { offset: 0, message: "bad magic".into() });
    }
    let dim = u32::from_le_bytes(r.take(4, "dim")?.try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(r.take(8, "count")?.try_into().unwrap());
    let mut map = HashMap::new();
    for _ in 0..count {
        let start = r.pos;
        let id_len = u16::from_le_bytes(r.take(2, "id length")?.try_into().unwrap()) as usize;
        let id = std::str::from_utf8(r.take(id_len, "id")?)
            .map_err(|e| SimError::Format {
                offset: start + 2,
                message: format!("id is not UTF-8: {e}"),
            })?
            .to_string();
        let raw = r.take(4 * dim, "vector")?;
        let values: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite(id));
        }
        if map.insert(id.clone(), EmbeddingVector { values }).is_some() {
            return Err(SimError::DuplicateId(id));
        }
    }
    if r.pos != bytes.len() {
        return Err(SimError::Format {
            offset: r.pos,
            message: format!("{} trailing bytes after {count} records", bytes.len() - r.pos),
        });
    }
    Ok(EmbeddingStore { provider: Provider::ExternalFile, dim, map, idf: None })
}

/// Serializes vectors in `PFIEMB1` format, preserving the given order.
pub fn write_embeddings<W: Write>(
    mut w: W,
    dim: usize,
    records: &[(String, EmbeddingVector)],
) -> std::io::Result<()> {
    w.write_all(EMBEDDING_MAGIC)?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for (id, v) in records {
        assert_eq!(v.dim(), dim, "vector {id} has wrong dimension");
        let id_bytes = id.as_bytes();
        w.write_all(&(id_bytes.len() as u16).to_le_bytes())?;
        w.write_all(id_bytes)?;
        for x in &v.values {
            w.write_all(&(*x as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Sorted view of a store, for deterministic dumps.
pub fn sorted_records(store: &EmbeddingStore) -> Vec<(String, EmbeddingVector)> {
    store
        .map
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect::<BTreeMap<_, _>>()
        .into_iter()
        .collect()
}
