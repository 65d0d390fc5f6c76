use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::corpus::{CountMatrix, Vocabulary};
use crate::embedding::{read_embeddings, write_embeddings, EmbeddingMatrix};
use crate::topic_rep::{top_terms, TopicSet, TopicWeights};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub alpha: f64,
    pub beta: f64,
    /// Gibbs sweeps over every token.
    pub iters: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.01,
            iters: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// K × |V|, rows sum to 1.
    pub topic_word: Array2<f64>,
    /// N × K, rows sum to 1.
    pub doc_topic: Array2<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub seed: u64,
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LdaTrace {
    /// Collapsed joint log-likelihood `ln p(w, z)` after each sweep.
    pub log_likelihood: Vec<f64>,
    /// `Σ n(k, t)` after each sweep.
    pub token_totals: Vec<u64>,
    /// Final topic of every token, in (document, column, repeat) order.
    pub assignments: Vec<usize>,
}

struct Sampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<usize>>,
    z: Vec<Vec<usize>>,
    n_dk: Vec<u32>,
    n_kt: Vec<u32>,
    n_k: Vec<u32>,
}

impl Sampler {
    fn log_likelihood(&self) -> f64 {
        let (k, v) = (self.k as f64, self.v as f64);
        let mut ll = self.k as f64 * (ln_gamma(v * self.beta) - v * ln_gamma(self.beta));
        for topic in 0..self.k {
            let row = &self.n_kt[topic * self.v..(topic + 1) * self.v];
            ll += row.iter().map(|&c| ln_gamma(f64::from(c) + self.beta)).sum::<f64>();
            ll -= ln_gamma(f64::from(self.n_k[topic]) + v * self.beta);
        }
        let per_doc = ln_gamma(k * self.alpha) - k * ln_gamma(self.alpha);
        for (d, doc) in self.docs.iter().enumerate() {
            ll += per_doc;
            let row = &self.n_dk[d * self.k..(d + 1) * self.k];
            ll += row.iter().map(|&c| ln_gamma(f64::from(c) + self.alpha)).sum::<f64>();
            ll -= ln_gamma(doc.len() as f64 + k * self.alpha);
        }
        ll
    }

    fn sweep(&mut self, rng: &mut ChaCha8Rng, p: &mut [f64]) {
        let vbeta = self.v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let t = self.docs[d][i];
                let old = self.z[d][i];
                self.n_dk[d * self.k + old] -= 1;
                self.n_kt[old * self.v + t] -= 1;
                self.n_k[old] -= 1;

                let mut acc = 0.0;
                for (topic, slot) in p.iter_mut().enumerate() {
                    acc += (f64::from(self.n_dk[d * self.k + topic]) + self.alpha)
                        * (f64::from(self.n_kt[topic * self.v + t]) + self.beta)
                        / (f64::from(self.n_k[topic]) + vbeta);
                    *slot = acc;
                }
                let u = rng.random::<f64>() * acc;
                let new = p.partition_point(|&c| c <= u).min(self.k - 1);

                self.z[d][i] = new;
                self.n_dk[d * self.k + new] += 1;
                self.n_kt[new * self.v + t] += 1;
                self.n_k[new] += 1;
            }
        }
    }
}

/// Collapsed Gibbs sampling for LDA with symmetric priors.
pub fn lda_fit(counts: &CountMatrix, k: usize, params: &LdaParams) -> Result<LdaModel> {
    lda_fit_traced(counts, k, params, false).map(|(m, _)| m)
}

/// As [`lda_fit`], additionally recording per-sweep diagnostics when
/// `trace` is set (the log-likelihood costs O(K·|V| + N·K) per sweep).
pub fn lda_fit_traced(
    counts: &CountMatrix,
    k: usize,
    params: &LdaParams,
    trace: bool,
) -> Result<(LdaModel, LdaTrace)> {
    if k == 0 {
        return Err(Error::invalid("LDA needs K >= 1"));
    }
    if counts.n_rows() == 0 || counts.n_cols() == 0 {
        return Err(Error::invalid("LDA needs a non-empty count matrix"));
    }
    if !(params.alpha > 0.0 && params.beta > 0.0) {
        return Err(Error::invalid("alpha and beta must be positive"));
    }
    let (n, v) = (counts.n_rows(), counts.n_cols());
    let docs: Vec<Vec<usize>> = (0..n)
        .map(|d| {
            counts
                .row(d)
                .flat_map(|(t, c)| std::iter::repeat_n(t, c as usize))
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut s = Sampler {
        k,
        v,
        alpha: params.alpha,
        beta: params.beta,
        z: Vec::with_capacity(n),
        n_dk: vec![0; n * k],
        n_kt: vec![0; k * v],
        n_k: vec![0; k],
        docs: Vec::new(),
    };
    for (d, doc) in docs.iter().enumerate() {
        let zs: Vec<usize> = doc
            .iter()
            .map(|&t| {
                let topic = rng.random_range(0..k);
                s.n_dk[d * k + topic] += 1;
                s.n_kt[topic * v + t] += 1;
                s.n_k[topic] += 1;
                topic
            })
            .collect();
        s.z.push(zs);
    }
    s.docs = docs;

    let mut tr = LdaTrace::default();
    let mut p = vec![0.0; k];
    for _ in 0..params.iters {
        s.sweep(&mut rng, &mut p);
        if trace {
            tr.log_likelihood.push(s.log_likelihood());
            tr.token_totals.push(s.n_kt.iter().map(|&c| u64::from(c)).sum());
        }
    }
    if trace {
        tr.assignments = s.z.iter().flatten().copied().collect();
    }

    let vbeta = v as f64 * params.beta;
    let topic_word = Array2::from_shape_fn((k, v), |(topic, t)| {
        (f64::from(s.n_kt[topic * v + t]) + params.beta) / (f64::from(s.n_k[topic]) + vbeta)
    });
    let kalpha = k as f64 * params.alpha;
    let doc_topic = Array2::from_shape_fn((n, k), |(d, topic)| {
        (f64::from(s.n_dk[d * k + topic]) + params.alpha) / (s.docs[d].len() as f64 + kalpha)
    });
    Ok((
        LdaModel {
            topic_word,
            doc_topic,
            alpha: params.alpha,
            beta: params.beta,
            iters: params.iters,
            seed: params.seed,
        },
        tr,
    ))
}

/// Top terms per topic by `topic_word` probability.
pub fn lda_topics(model: &LdaModel, vocab: &Vocabulary, n_terms: usize) -> Result<TopicSet> {
    let weights = TopicWeights {
        topic_ids: (0..model.topic_word.nrows()).collect(),
        weights: model.topic_word.clone(),
    };
    top_terms(&weights, vocab, n_terms)
}

#[derive(Debug, Serialize, Deserialize)]
struct LdaHeader {
    format: String,
    n_topics: usize,
    n_terms: usize,
    n_docs: usize,
    alpha: f64,
    beta: f64,
    iters: usize,
    seed: u64,
    topic_word: String,
    doc_topic: String,
    #[serde(default)]
    metadata: serde_json::Map<String, serde_json::Value>,
}

fn renormalize_rows(m: &mut Array2<f64>) {
    for mut row in m.rows_mut() {
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|x| x / s);
        }
    }
}

impl LdaModel {
    pub fn n_topics(&self) -> usize {
        self.topic_word.nrows()
    }

    /// Writes `<stem>.json` plus EMB1 payloads `<stem>.topic_word.emb1` and
    /// `<stem>.doc_topic.emb1`. Payloads are `f32`, so a reloaded model agrees
    /// to single precision.
    pub fn save(
        &self,
        stem: impl AsRef<Path>,
        doc_ids: &[String],
        metadata: serde_json::Map<String, serde_json::Value>,
    ) -> Result<()> {
        let stem = stem.as_ref();
        let name = |suffix: &str| {
            let mut s = stem.as_os_str().to_owned();
            s.push(suffix);
            std::path::PathBuf::from(s)
        };
        let tw_path = name(".topic_word.emb1");
        let dt_path = name(".doc_topic.emb1");
        let tw = EmbeddingMatrix::new(
            self.topic_word.clone(),
            (0..self.n_topics()).map(|k| format!("topic_{k}")).collect(),
        )?;
        let dt = EmbeddingMatrix::new(self.doc_topic.clone(), doc_ids.to_vec())?;
        write_embeddings(&tw, &tw_path)?;
        write_embeddings(&dt, &dt_path)?;
        let file_name = |p: &Path| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let header = LdaHeader {
            format: "lda-v1".into(),
            n_topics: self.n_topics(),
            n_terms: self.topic_word.ncols(),
            n_docs: self.doc_topic.nrows(),
            alpha: self.alpha,
            beta: self.beta,
            iters: self.iters,
            seed: self.seed,
            topic_word: file_name(&tw_path),
            doc_topic: file_name(&dt_path),
            metadata,
        };
        std::fs::write(name(".json"), serde_json::to_vec_pretty(&header)?)?;
        Ok(())
    }

    pub fn load(stem: impl AsRef<Path>) -> Result<Self> {
        let stem = stem.as_ref();
        let mut hp = stem.as_os_str().to_owned();
        hp.push(".json");
        let header: LdaHeader = serde_json::from_slice(&std::fs::read(&hp)?)?;
        if header.format != "lda-v1" {
            return Err(Error::Format(format!("unknown model format {:?}", header.format)));
        }
        let dir = stem.parent().unwrap_or(Path::new("."));
        let mut topic_word = read_embeddings(dir.join(&header.topic_word))?.into_data();
        let mut doc_topic = read_embeddings(dir.join(&header.doc_topic))?.into_data();
        if topic_word.dim() != (header.n_topics, header.n_terms)
            || doc_topic.dim() != (header.n_docs, header.n_topics)
        {
            return Err(Error::Format("payload shapes do not match the header".into()));
        }
        renormalize_rows(&mut topic_word);
        renormalize_rows(&mut doc_topic);
        Ok(Self {
            topic_word,
            doc_topic,
            alpha: header.alpha,
            beta: header.beta,
            iters: header.iters,
            seed: header.seed,
        })
    }
}
