//! Document embedding matrices, the EMB1 file format and a deterministic
//! hashing embedder.
//!
//! EMB1 layout (little-endian, no padding):
//!
//! | bytes          | content                                   |
//! |----------------|-------------------------------------------|
//! | 0..4           | magic `EMB1`                              |
//! | 4..8           | `u32` row count N                         |
//! | 8..12          | `u32` dimension D                         |
//! | 12..12+4ND     | N·D `f32` values, row-major               |
//! | rest           | N LF-terminated UTF-8 document ids        |
//!
//! Values are held as `f64` in memory and narrowed to `f32` on write, so a
//! matrix read from disk round-trips bit-exactly.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::corpus::{Corpus, TokenizerConfig};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Array2<f64>,
    doc_ids: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(data: Array2<f64>, doc_ids: Vec<String>) -> Result<Self> {
        if data.nrows() != doc_ids.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} document ids",
                data.nrows(),
                doc_ids.len()
            )));
        }
        if data.ncols() == 0 {
            return Err(Error::invalid("embedding dimension must be >= 1"));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite embedding entry {bad}")));
        }
        if let Some(id) = doc_ids.iter().find(|id| id.contains('\n')) {
            return Err(Error::invalid(format!("document id {id:?} contains a line feed")));
        }
        Ok(Self { data, doc_ids })
    }

    /// Row ids `0..n`, for matrices that are not tied to a corpus.
    pub fn with_index_ids(data: Array2<f64>) -> Result<Self> {
        let ids = (0..data.nrows()).map(|i| i.to_string()).collect();
        Self::new(data, ids)
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Checks that rows line up with the corpus order.
    pub fn check_aligned(&self, corpus: &Corpus) -> Result<()> {
        if self.n_rows() != corpus.len() {
            return Err(Error::Format(format!(
                "embedding has {} rows, corpus has {} documents",
                self.n_rows(),
                corpus.len()
            )));
        }
        if let Some((i, (a, b))) = self
            .doc_ids
            .iter()
            .zip(corpus.ids())
            .enumerate()
            .find(|(_, (a, b))| a.as_str() != *b)
        {
            return Err(Error::Format(format!(
                "row {i}: embedding id {a:?} does not match corpus id {b:?}"
            )));
        }
        Ok(())
    }
}

pub fn encode_embeddings(m: &EmbeddingMatrix) -> Result<Vec<u8>> {
    let (n, d) = m.data.dim();
    let n32 = u32::try_from(n).map_err(|_| Error::invalid("too many rows for EMB1"))?;
    let d32 = u32::try_from(d).map_err(|_| Error::invalid("dimension too large for EMB1"))?;
    let id_bytes: usize = m.doc_ids.iter().map(|s| s.len() + 1).sum();
    let mut buf = Vec::with_capacity(12 + 4 * n * d + id_bytes);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&n32.to_le_bytes());
    buf.extend_from_slice(&d32.to_le_bytes());
    for &v in m.data.iter() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::invalid(format!("entry {v} is not representable as f32")));
        }
        buf.extend_from_slice(&f.to_le_bytes());
    }
    for id in &m.doc_ids {
        buf.extend_from_slice(id.as_bytes());
        buf.push(b'\n');
    }
    Ok(buf)
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    if bytes.len() < 12 {
        return Err(Error::Format(format!("{} bytes is shorter than the EMB1 header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_mul(4))
        .ok_or_else(|| Error::Format("declared shape overflows".into()))?;
    let body = &bytes[12..];
    if body.len() < payload {
        return Err(Error::Format(format!(
            "declared {n}x{d} needs {payload} payload bytes, found {}",
            body.len()
        )));
    }
    let values: Vec<f64> = body[..payload]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    let trailer = std::str::from_utf8(&body[payload..])
        .map_err(|e| Error::Format(format!("doc-id trailer is not UTF-8: {e}")))?;
    let ids: Vec<String> = match trailer.strip_suffix('\n') {
        Some(t) => t.split('\n').map(str::to_owned).collect(),
        None if trailer.is_empty() => Vec::new(),
        None => return Err(Error::Format("doc-id trailer is not LF-terminated".into())),
    };
    if ids.len() != n {
        return Err(Error::Format(format!("declared {n} rows, found {} doc ids", ids.len())));
    }
    let data = Array2::from_shape_vec((n, d), values).expect("shape checked");
    EmbeddingMatrix::new(data, ids).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_embeddings(m: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_embeddings(m)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    decode_embeddings(&std::fs::read(path)?)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in (0, 1], from the top 53 bits.
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

/// Unit vector for one token: entry `j` is a standard normal drawn by
/// Box-Muller from counters `2j` and `2j+1` of a key derived from the token
/// bytes and the seed.
fn token_vector(token: &str, dim: usize, seed: u64) -> Vec<f64> {
    let key = fnv1a64(token.as_bytes()) ^ splitmix64(seed);
    let mut v: Vec<f64> = (0..dim as u64)
        .map(|j| {
            let u1 = unit_open(splitmix64(key.wrapping_add((2 * j).wrapping_mul(0x9e37_79b9_7f4a_7c15))));
            let u2 = unit_open(splitmix64(
                key.wrapping_add((2 * j + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            ));
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Embeds each document as the normalized sum of pseudo-random unit vectors
/// of its tokens. Empty documents map to the zero vector.
pub fn hash_projection_embed(
    corpus: &Corpus,
    config: &TokenizerConfig,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix> {
    if dim == 0 {
        return Err(Error::invalid("embedding dimension must be >= 1"));
    }
    let mut cache: HashMap<String, Vec<f64>> = HashMap::new();
    let mut data = Array2::zeros((corpus.len(), dim));
    for (i, doc) in corpus.docs().iter().enumerate() {
        let mut row = data.row_mut(i);
        for tok in doc.tokens(config) {
            let v = cache
                .entry(tok)
                .or_insert_with_key(|t| token_vector(t, dim, seed));
            row.iter_mut().zip(v.iter()).for_each(|(r, x)| *r += x);
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
    EmbeddingMatrix::new(data, corpus.ids().map(str::to_owned).collect())
}
