use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::dimred::{normalize_sign, truncated_svd_op, LinearOperator};
use crate::topic_rep::{top_terms, TopicSet, TopicWeights};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiModel {
    /// N × K document coordinates `U Σ`.
    pub doc_coords: Array2<f64>,
    /// |V| × K term loadings `V`.
    pub term_loadings: Array2<f64>,
    pub singular_values: Vec<f64>,
}

/// Truncated SVD of a (TF-IDF) document-term matrix.
pub fn lsi_fit(m: &impl LinearOperator, k: usize, seed: u64) -> Result<LsiModel> {
    let svd = truncated_svd_op(m, k, seed)?;
    Ok(LsiModel {
        doc_coords: svd.row_coords(),
        term_loadings: svd.v,
        singular_values: svd.singular_values,
    })
}

/// Top terms per component by absolute loading. Each loading column is
/// first sign-normalized (largest-magnitude entry positive).
pub fn lsi_topics(model: &LsiModel, vocab: &Vocabulary, n_terms: usize) -> Result<TopicSet> {
    let (v, k) = model.term_loadings.dim();
    let mut weights = Array2::zeros((k, v));
    for j in 0..k {
        let mut col = model.term_loadings.column(j).to_vec();
        normalize_sign(&mut col);
        for (t, x) in col.into_iter().enumerate() {
            weights[[j, t]] = x.abs();
        }
    }
    top_terms(
        &TopicWeights {
            topic_ids: (0..k).collect(),
            weights,
        },
        vocab,
        n_terms,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimred::truncated_svd;
    use ndarray::array;

    #[test]
    fn rank_one_reconstructs() {
        let m = array![[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.5, 1.0, 0.0]];
        let model = lsi_fit(&m, 1, 0).unwrap();
        let rec = model.doc_coords.dot(&model.term_loadings.t());
        assert!((&rec - &m).iter().all(|x| x.abs() < 1e-10));
        assert!(lsi_fit(&m, 2, 0).is_err());
    }

    #[test]
    fn shares_the_truncated_svd_path() {
        let m = array![[1.0, 0.0, 2.0, 0.5], [0.0, 3.0, 1.0, 0.0], [1.0, 1.0, 0.0, 2.0]];
        let model = lsi_fit(&m, 2, 0).unwrap();
        let reduced = truncated_svd(&m, 2).unwrap();
        assert_eq!(model.doc_coords, reduced.data);
    }

    #[test]
    fn dominant_loading_first() {
        let vocab = Vocabulary::from_tokens(
            &[vec!["a".into(), "b".into(), "c".into()]],
            (1, 1),
            1,
        )
        .unwrap();
        let model = LsiModel {
            doc_coords: Array2::zeros((1, 1)),
            term_loadings: array![[0.1], [-0.9], [0.3]],
            singular_values: vec![1.0],
        };
        let t = lsi_topics(&model, &vocab, 10).unwrap();
        assert_eq!(t.topics[0].term_strings(), ["b", "c", "a"]);
    }
}
