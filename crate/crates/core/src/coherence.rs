//! UMass and c_v topic coherence.
//!
//! Both metrics work from boolean occurrence counts of topic terms.
//! Multi-word terms (`a_b`, `a_b_c`) match contiguous token runs; a window
//! contains a term when one of its occurrences lies fully inside it.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::topic_rep::TopicSet;
use crate::{Error, Result};

/// Longest n-gram matched against topic terms.
const MAX_NGRAM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// One window per document.
    WholeDoc,
    /// Boolean sliding windows of this many tokens, stride 1. Documents no
    /// longer than the width form a single window.
    Sliding(usize),
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::WholeDoc => f.write_str("whole_doc"),
            Window::Sliding(w) => write!(f, "{w}"),
        }
    }
}

/// Window counts for a fixed set of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    window: Window,
    terms: Vec<String>,
    index: HashMap<String, usize>,
    single: Vec<u64>,
    pair: Vec<u64>,
    n_windows: u64,
}

impl CooccurrenceStats {
    pub fn build<S: AsRef<str>>(docs: &[Vec<String>], terms: &[S], window: Window) -> Result<Self> {
        if window == Window::Sliding(0) {
            return Err(Error::invalid("window width must be >= 1"));
        }
        let mut uniq: Vec<String> = Vec::new();
        let mut index = HashMap::new();
        for t in terms {
            let t = t.as_ref();
            if !index.contains_key(t) {
                index.insert(t.to_owned(), uniq.len());
                uniq.push(t.to_owned());
            }
        }
        let t = uniq.len();
        let mut single = vec![0u64; t];
        let mut pair = vec![0u64; t * t];
        let mut n_windows = 0u64;
        let mut present: Vec<usize> = Vec::new();

        for doc in docs {
            // (start, end, term id), sorted by start
            let mut occ: Vec<(usize, usize, usize)> = Vec::new();
            for start in 0..doc.len() {
                for n in 1..=MAX_NGRAM.min(doc.len() - start) {
                    let g = doc[start..start + n].join("_");
                    if let Some(&id) = index.get(&g) {
                        occ.push((start, start + n, id));
                    }
                }
            }
            let len = doc.len();
            let spans: Vec<(usize, usize)> = match window {
                Window::Sliding(w) if len > w => (0..=len - w).map(|s| (s, s + w)).collect(),
                _ => vec![(0, len)],
            };
            for (lo, hi) in spans {
                n_windows += 1;
                present.clear();
                let first = occ.partition_point(|o| o.0 < lo);
                present.extend(
                    occ[first..]
                        .iter()
                        .take_while(|o| o.0 < hi)
                        .filter(|o| o.1 <= hi)
                        .map(|o| o.2),
                );
                present.sort_unstable();
                present.dedup();
                for (i, &a) in present.iter().enumerate() {
                    single[a] += 1;
                    for &b in &present[i + 1..] {
                        pair[a * t + b] += 1;
                        pair[b * t + a] += 1;
                    }
                }
            }
        }
        Ok(Self {
            window,
            terms: uniq,
            index,
            single,
            pair,
            n_windows,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn n_windows(&self) -> u64 {
        self.n_windows
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Windows containing `w`; 0 for unknown terms.
    pub fn count(&self, w: &str) -> u64 {
        self.index.get(w).map_or(0, |&i| self.single[i])
    }

    /// Windows containing both terms; `count(w)` when `a == b`.
    pub fn co_count(&self, a: &str, b: &str) -> u64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) if i == j => self.single[i],
            (Some(&i), Some(&j)) => self.pair[i * self.terms.len() + j],
            _ => 0,
        }
    }
}

/// Counts for every distinct term of `topics`.
pub fn cooccurrence_stats(docs: &[Vec<String>], topics: &TopicSet, window: Window) -> Result<CooccurrenceStats> {
    let terms: Vec<&str> = topics
        .topics
        .iter()
        .flat_map(|t| t.terms.iter().map(|x| x.term.as_str()))
        .collect();
    CooccurrenceStats::build(docs, &terms, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cv,
    Umass,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Cv => "cv",
            Metric::Umass => "umass",
        })
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cv" | "c_v" => Ok(Metric::Cv),
            "umass" | "u_mass" => Ok(Metric::Umass),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScore {
    pub topic_id: usize,
    pub score: f64,
    /// Terms that never occur in the reference corpus.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub metric: Metric,
    pub per_topic: Vec<TopicScore>,
    pub aggregate: f64,
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl CoherenceReport {
    fn assemble(metric: Metric, per_topic: Vec<TopicScore>, window: Window, epsilon: Option<f64>) -> Result<Self> {
        if per_topic.is_empty() {
            return Err(Error::invalid("no topics to score"));
        }
        let aggregate = per_topic.iter().map(|t| t.score).sum::<f64>() / per_topic.len() as f64;
        Ok(Self {
            metric,
            per_topic,
            aggregate,
            window,
            epsilon,
        })
    }

    /// `model,embedding,dim_reduction,clustering,coherence` row.
    pub fn csv_row(&self, model: &str, embedding: &str, reducer: &str, clusterer: &str) -> String {
        format!("{model},{embedding},{reducer},{clusterer},{:.4}", self.aggregate)
    }
}

pub const TABLE_CSV_HEADER: &str = "model,embedding,dim_reduction,clustering,coherence";

fn split_scorable<'a>(terms: &[&'a str], stats: &CooccurrenceStats) -> (Vec<&'a str>, Vec<String>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for &t in terms {
        if stats.count(t) > 0 {
            kept.push(t);
        } else {
            dropped.push(t.to_owned());
        }
    }
    if !dropped.is_empty() {
        log::warn!("dropping terms absent from the reference corpus: {dropped:?}");
    }
    (kept, dropped)
}

/// UMass: mean over ordered pairs `l < m` of `ln((D(w_m, w_l) + 1) / D(w_l))`
/// with document counts.
pub fn umass(topics: &TopicSet, stats: &CooccurrenceStats) -> Result<CoherenceReport> {
    if stats.window() != Window::WholeDoc {
        return Err(Error::invalid("UMass needs whole-document counts"));
    }
    let mut per_topic = Vec::with_capacity(topics.len());
    for topic in &topics.topics {
        let (terms, dropped) = split_scorable(&topic.term_strings(), stats);
        if terms.len() < 2 {
            return Err(Error::DegenerateTopic(topic.id));
        }
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for m in 1..terms.len() {
            for l in 0..m {
                let joint = stats.co_count(terms[m], terms[l]) as f64;
                sum += ((joint + 1.0) / stats.count(terms[l]) as f64).ln();
                pairs += 1;
            }
        }
        per_topic.push(TopicScore {
            topic_id: topic.id,
            score: sum / pairs as f64,
            dropped_terms: dropped,
        });
    }
    CoherenceReport::assemble(Metric::Umass, per_topic, Window::WholeDoc, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    pub window: usize,
    pub epsilon: f64,
}

impl Default for CvParams {
    fn default() -> Self {
        Self {
            window: 110,
            epsilon: 1e-12,
        }
    }
}

pub(crate) fn npmi(p_ij: f64, p_i: f64, p_j: f64, eps: f64) -> f64 {
    let denom = -(p_ij + eps).ln();
    if denom == 0.0 {
        return 0.0;
    }
    ((p_ij + eps) / (p_i * p_j)).ln() / denom
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// c_v from precomputed sliding-window statistics.
pub fn cv_from_stats(topics: &TopicSet, stats: &CooccurrenceStats, epsilon: f64) -> Result<CoherenceReport> {
    let total = stats.n_windows() as f64;
    if total == 0.0 {
        return Err(Error::invalid("reference corpus has no windows"));
    }
    let mut per_topic = Vec::with_capacity(topics.len());
    for topic in &topics.topics {
        let (terms, dropped) = split_scorable(&topic.term_strings(), stats);
        if terms.is_empty() {
            return Err(Error::DegenerateTopic(topic.id));
        }
        let p: Vec<f64> = terms.iter().map(|t| stats.count(t) as f64 / total).collect();
        let vectors: Vec<Vec<f64>> = terms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                terms
                    .iter()
                    .enumerate()
                    .map(|(j, b)| {
                        let p_ij = stats.co_count(a, b) as f64 / total;
                        npmi(p_ij, p[i], p[j], epsilon)
                    })
                    .collect()
            })
            .collect();
        if vectors.iter().all(|v| v.iter().all(|&x| x == 0.0)) {
            return Err(Error::DegenerateTopic(topic.id));
        }
        let mut sum_vec = vec![0.0; terms.len()];
        for v in &vectors {
            sum_vec.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        }
        let score = vectors.iter().map(|v| cosine(v, &sum_vec)).sum::<f64>() / terms.len() as f64;
        per_topic.push(TopicScore {
            topic_id: topic.id,
            score,
            dropped_terms: dropped,
        });
    }
    CoherenceReport::assemble(Metric::Cv, per_topic, stats.window(), Some(epsilon))
}

/// c_v: NPMI context vectors over boolean sliding windows, each term's vector
/// compared by cosine with the sum of all the topic's vectors.
pub fn cv(topics: &TopicSet, docs: &[Vec<String>], params: &CvParams) -> Result<CoherenceReport> {
    if docs.is_empty() {
        return Err(Error::invalid("reference corpus is empty"));
    }
    let stats = cooccurrence_stats(docs, topics, Window::Sliding(params.window))?;
    cv_from_stats(topics, &stats, params.epsilon)
}

/// UMass with whole-document counts built from `docs`.
pub fn umass_on(topics: &TopicSet, docs: &[Vec<String>]) -> Result<CoherenceReport> {
    let stats = cooccurrence_stats(docs, topics, Window::WholeDoc)?;
    umass(topics, &stats)
}
