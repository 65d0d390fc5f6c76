//! Class-based TF-IDF topic representations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterAssignment, NOISE};
use crate::corpus::{CountMatrix, Vocabulary};
use crate::{Error, Result};

/// Topic-term weight matrix; row `r` belongs to `topic_ids[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicWeights {
    pub topic_ids: Vec<usize>,
    pub weights: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTerm {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: usize,
    pub terms: Vec<TopicTerm>,
}

impl Topic {
    pub fn term_strings(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.term.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSet {
    pub topics: Vec<Topic>,
    pub n_terms: usize,
}

impl TopicSet {
    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Two-column Markdown table: topic id and comma-joined terms.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Topic | Terms |\n|---|---|\n");
        for t in &self.topics {
            let _ = writeln!(out, "| {} | {} |", t.id, t.term_strings().join(", "));
        }
        out
    }
}

/// Per-class weights `W(t,c) = tf(t,c)/|c| · ln(1 + A/f(t))`, where `|c|` is
/// the total term count of class `c`, `f(t)` the count of `t` over all
/// classes and `A` the mean class size. Noise documents are ignored.
pub fn class_tfidf(counts: &CountMatrix, assignment: &ClusterAssignment) -> Result<TopicWeights> {
    if assignment.labels.len() != counts.n_rows() {
        return Err(Error::invalid(format!(
            "{} labels for {} documents",
            assignment.labels.len(),
            counts.n_rows()
        )));
    }
    let mut class_rows: BTreeMap<i64, usize> = BTreeMap::new();
    for &l in &assignment.labels {
        if l != NOISE {
            if l < 0 {
                return Err(Error::invalid(format!("negative label {l}")));
            }
            let next = class_rows.len();
            class_rows.entry(l).or_insert(next);
        }
    }
    // rows in ascending label order
    for (row, v) in class_rows.values_mut().enumerate() {
        *v = row;
    }
    let v = counts.n_cols();
    let mut tf = Array2::<f64>::zeros((class_rows.len(), v));
    for (doc, &l) in assignment.labels.iter().enumerate() {
        if l == NOISE {
            continue;
        }
        let r = class_rows[&l];
        for (t, c) in counts.row(doc) {
            tf[[r, t]] += f64::from(c);
        }
    }
    let totals: Vec<f64> = tf.rows().into_iter().map(|r| r.sum()).collect();
    for (&label, &r) in &class_rows {
        if totals[r] == 0.0 {
            return Err(Error::EmptyClass(label));
        }
    }
    let avg = totals.iter().sum::<f64>() / totals.len().max(1) as f64;
    let f: Vec<f64> = tf.columns().into_iter().map(|c| c.sum()).collect();
    let mut weights = tf;
    for (mut row, total) in weights.rows_mut().into_iter().zip(&totals) {
        for (t, w) in row.iter_mut().enumerate() {
            if *w > 0.0 {
                *w = *w / total * (1.0 + avg / f[t]).ln();
            }
        }
    }
    Ok(TopicWeights {
        topic_ids: class_rows.keys().map(|&l| l as usize).collect(),
        weights,
    })
}

/// Top `n_terms` per topic by weight, ties broken lexicographically.
pub fn top_terms(weights: &TopicWeights, vocab: &Vocabulary, n_terms: usize) -> Result<TopicSet> {
    if n_terms == 0 {
        return Err(Error::invalid("n_terms must be >= 1"));
    }
    if weights.weights.ncols() != vocab.len() {
        return Err(Error::invalid("weight matrix does not match the vocabulary"));
    }
    let topics = weights
        .topic_ids
        .iter()
        .zip(weights.weights.rows())
        .map(|(&id, row)| {
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| {
                row[b]
                    .total_cmp(&row[a])
                    .then_with(|| vocab.term(a).cmp(vocab.term(b)))
            });
            Topic {
                id,
                terms: order
                    .into_iter()
                    .take(n_terms)
                    .map(|t| TopicTerm {
                        term: vocab.term(t).to_owned(),
                        weight: row[t],
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(TopicSet { topics, n_terms })
}
