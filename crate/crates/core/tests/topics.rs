use std::collections::HashMap;

use ktopic::cluster::ClusterAssignment;
use ktopic::corpus::{build_vocabulary, doc_term_counts, Corpus, TokenizerConfig, Vocabulary};
use ktopic::embedding::{decode_embeddings, encode_embeddings, hash_projection_embed};
use ktopic::synth::{themed_short_texts, ThemedParams};
use ktopic::topic_rep::{class_tfidf, top_terms};
use proptest::prelude::*;

fn assignment(labels: Vec<i64>) -> ClusterAssignment {
    let n_clusters = labels.iter().filter(|&&l| l >= 0).max().map_or(0, |&m| m as usize + 1);
    ClusterAssignment {
        labels,
        n_clusters,
        inertia: None,
        n_iter: 0,
    }
}

/// Class-based TF-IDF straight from token lists.
fn brute_ctfidf(docs: &[Vec<String>], labels: &[i64]) -> HashMap<(i64, String), f64> {
    let mut tf: HashMap<(i64, String), f64> = HashMap::new();
    let mut size: HashMap<i64, f64> = HashMap::new();
    let mut freq: HashMap<String, f64> = HashMap::new();
    for (d, &l) in docs.iter().zip(labels) {
        if l < 0 {
            continue;
        }
        for t in d {
            *tf.entry((l, t.clone())).or_default() += 1.0;
            *size.entry(l).or_default() += 1.0;
            *freq.entry(t.clone()).or_default() += 1.0;
        }
    }
    let avg = size.values().sum::<f64>() / size.len() as f64;
    tf.into_iter()
        .map(|((l, t), c)| {
            let w = c / size[&l] * (1.0 + avg / freq[&t]).ln();
            ((l, t), w)
        })
        .collect()
}

#[test]
fn ctfidf_matches_direct_computation() {
    let p = themed_short_texts(&ThemedParams {
        n_docs: 300,
        n_themes: 5,
        ..ThemedParams::default()
    });
    let cfg = TokenizerConfig::default();
    let docs = p.corpus.tokenized(&cfg);
    let vocab = Vocabulary::from_tokens(&docs, (1, 1), 1).unwrap();
    let counts = vocab.count(&docs);
    let labels: Vec<i64> = p
        .labels
        .iter()
        .enumerate()
        .map(|(i, &l)| if i % 17 == 0 { -1 } else { l as i64 })
        .collect();
    let w = class_tfidf(&counts, &assignment(labels.clone())).unwrap();
    let want = brute_ctfidf(&docs, &labels);
    for (row, &topic) in w.topic_ids.iter().enumerate() {
        for (t, term) in vocab.terms().iter().enumerate() {
            let e = want.get(&(topic as i64, term.clone())).copied().unwrap_or(0.0);
            assert!((w.weights[[row, t]] - e).abs() < 1e-12);
        }
    }
    let ts = top_terms(&w, &vocab, 10).unwrap();
    // planted theme words dominate each class
    for t in &ts.topics {
        let own = t
            .term_strings()
            .iter()
            .filter(|s| s.starts_with(&format!("t{}w", t.id)))
            .count();
        assert!(own >= 6, "{:?}", t.term_strings());
    }
}

#[test]
fn vocabulary_and_counts_are_deterministic() {
    let p = themed_short_texts(&ThemedParams {
        n_docs: 100,
        ..ThemedParams::default()
    });
    let cfg = TokenizerConfig::default();
    let a = build_vocabulary(&p.corpus, &cfg, (1, 3), 2).unwrap();
    let b = build_vocabulary(&p.corpus, &cfg, (1, 3), 2).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(doc_term_counts(&p.corpus, &a, &cfg), doc_term_counts(&p.corpus, &b, &cfg));
    assert!(a.doc_freq().iter().all(|&f| f >= 2));
    assert!(a.terms().iter().any(|t| t.contains('_')));
}

#[test]
fn hash_embeddings_are_pure_and_unit_norm() {
    let c = Corpus::from_texts(["card blocked", "transfer failed", "", "card card"]);
    let cfg = TokenizerConfig::default();
    let a = hash_projection_embed(&c, &cfg, 64, 3).unwrap();
    let b = hash_projection_embed(&c, &cfg, 64, 3).unwrap();
    assert_eq!(encode_embeddings(&a).unwrap(), encode_embeddings(&b).unwrap());
    for (i, row) in a.data().rows().into_iter().enumerate() {
        let n = row.dot(&row).sqrt();
        if i == 2 {
            assert_eq!(n, 0.0);
        } else {
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
    let back = decode_embeddings(&encode_embeddings(&a).unwrap()).unwrap();
    assert_eq!(back.doc_ids(), a.doc_ids());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ctfidf_ignores_document_order(seed in 0u64..500, shift in 1usize..50) {
        let p = themed_short_texts(&ThemedParams { n_docs: 60, n_themes: 3, seed, ..ThemedParams::default() });
        let docs = p.corpus.tokenized(&TokenizerConfig::default());
        let vocab = Vocabulary::from_tokens(&docs, (1, 2), 1).unwrap();
        let labels: Vec<i64> = p.labels.iter().map(|&l| l as i64).collect();
        let w = class_tfidf(&vocab.count(&docs), &assignment(labels.clone())).unwrap();
        let n = docs.len();
        let rot_docs: Vec<Vec<String>> = (0..n).map(|i| docs[(i + shift) % n].clone()).collect();
        let rot_labels: Vec<i64> = (0..n).map(|i| labels[(i + shift) % n]).collect();
        let w2 = class_tfidf(&vocab.count(&rot_docs), &assignment(rot_labels)).unwrap();
        prop_assert!((&w.weights - &w2.weights).iter().all(|d| d.abs() < 1e-12));
        let ts = top_terms(&w, &vocab, 7).unwrap();
        for t in &ts.topics {
            prop_assert!(t.terms.windows(2).all(|p| p[0].weight >= p[1].weight));
            prop_assert!(t.terms.len() <= 7);
        }
    }
}
