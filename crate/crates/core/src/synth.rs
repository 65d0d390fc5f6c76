//! Synthetic corpora and point clouds with planted ground truth.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, Document};

/// A generated corpus and the planted theme of every document.
#[derive(Debug, Clone)]
pub struct Planted {
    pub corpus: Corpus,
    pub labels: Vec<usize>,
    /// Theme vocabularies; `vocab[k]` lists the words planted for theme `k`.
    pub vocab: Vec<Vec<String>>,
}

pub fn theme_word(theme: usize, i: usize) -> String {
    format!("t{theme}w{i:02}")
}

pub fn background_word(i: usize) -> String {
    format!("bg{i:02}")
}

fn build(texts: Vec<String>, labels: Vec<usize>, vocab: Vec<Vec<String>>) -> Planted {
    let docs = texts
        .into_iter()
        .enumerate()
        .map(|(i, t)| Document::new(format!("doc{i:05}"), t))
        .collect();
    Planted {
        corpus: Corpus::new(docs).expect("generated ids are unique"),
        labels,
        vocab,
    }
}

/// Single-theme documents drawing `doc_len` words uniformly from disjoint
/// per-theme vocabularies of `words_per_topic` words.
pub fn disjoint_topics(
    n_topics: usize,
    words_per_topic: usize,
    n_docs: usize,
    doc_len: usize,
    seed: u64,
) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<Vec<String>> = (0..n_topics)
        .map(|k| (0..words_per_topic).map(|i| theme_word(k, i)).collect())
        .collect();
    let mut texts = Vec::with_capacity(n_docs);
    let mut labels = Vec::with_capacity(n_docs);
    for d in 0..n_docs {
        let k = d % n_topics;
        let words: Vec<&str> = (0..doc_len)
            .map(|_| vocab[k][rng.random_range(0..words_per_topic)].as_str())
            .collect();
        texts.push(words.join(" "));
        labels.push(k);
    }
    build(texts, labels, vocab)
}

/// Settings for [`themed_short_texts`].
#[derive(Debug, Clone, Copy)]
pub struct ThemedParams {
    pub n_themes: usize,
    pub n_docs: usize,
    pub words_per_theme: usize,
    pub background_words: usize,
    /// Inclusive document length range.
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a token comes from the document's theme.
    pub theme_share: f64,
    pub seed: u64,
}

impl Default for ThemedParams {
    fn default() -> Self {
        Self {
            n_themes: 8,
            n_docs: 2000,
            words_per_theme: 25,
            background_words: 40,
            min_len: 8,
            max_len: 14,
            theme_share: 0.6,
            seed: 2024,
        }
    }
}

/// Zipf-like rank sampler: weight of rank `r` is `1 / (r + 1)`.
fn zipf_index(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn zipf_table(n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|r| {
            acc += 1.0 / (r as f64 + 1.0);
            acc
        })
        .collect()
}

/// Short single-theme documents mixing Zipf-distributed theme words with a
/// shared Zipf-distributed background vocabulary, loosely mimicking customer
/// tweets that share generic banking words.
pub fn themed_short_texts(p: &ThemedParams) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let vocab: Vec<Vec<String>> = (0..p.n_themes)
        .map(|k| (0..p.words_per_theme).map(|i| theme_word(k, i)).collect())
        .collect();
    let background: Vec<String> = (0..p.background_words).map(background_word).collect();
    let theme_cdf = zipf_table(p.words_per_theme);
    let bg_cdf = zipf_table(p.background_words.max(1));
    let mut texts = Vec::with_capacity(p.n_docs);
    let mut labels = Vec::with_capacity(p.n_docs);
    for d in 0..p.n_docs {
        let k = d % p.n_themes;
        let len = rng.random_range(p.min_len..=p.max_len);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                if p.background_words == 0 || rng.random::<f64>() < p.theme_share {
                    vocab[k][zipf_index(&mut rng, &theme_cdf)].as_str()
                } else {
                    background[zipf_index(&mut rng, &bg_cdf)].as_str()
                }
            })
            .collect();
        texts.push(words.join(" "));
        labels.push(k);
    }
    build(texts, labels, vocab)
}

/// Isotropic Gaussian blobs in the plane with centers on a grid of the given
/// spacing. Points are assigned to blobs round-robin.
pub fn gaussian_blobs(
    n_blobs: usize,
    n_points: usize,
    sigma: f64,
    spacing: f64,
    seed: u64,
) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    let cols = (n_blobs as f64).sqrt().ceil() as usize;
    let centers: Vec<(f64, f64)> = (0..n_blobs)
        .map(|b| ((b % cols) as f64 * spacing, (b / cols) as f64 * spacing))
        .collect();
    let mut data = Array2::zeros((n_points, 2));
    let mut labels = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let b = i % n_blobs;
        data[[i, 0]] = centers[b].0 + noise.sample(&mut rng);
        data[[i, 1]] = centers[b].1 + noise.sample(&mut rng);
        labels.push(b);
    }
    (data, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_corpora_are_deterministic() {
        let a = disjoint_topics(4, 10, 20, 12, 1);
        let b = disjoint_topics(4, 10, 20, 12, 1);
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.labels[5], 1);
        let t = themed_short_texts(&ThemedParams { n_docs: 16, ..Default::default() });
        assert_eq!(t.corpus.len(), 16);
        assert!(t.corpus.docs().iter().all(|d| {
            let n = d.text.split(' ').count();
            (8..=14).contains(&n)
        }));
    }

    #[test]
    fn blobs_sit_near_their_centers() {
        let (x, labels) = gaussian_blobs(8, 200, 0.1, 5.0, 3);
        assert_eq!(x.nrows(), 200);
        // blob 5 sits at column 5 % 3 = 2, row 1
        let i = labels.iter().position(|&l| l == 5).unwrap();
        assert!((x[[i, 0]] - 10.0).abs() < 1.0 && (x[[i, 1]] - 5.0).abs() < 1.0);
    }
}
