//! Topic extraction on short-text corpora.
//!
//! The main pipeline embeds documents, reduces the embeddings (PCA, kernel
//! PCA or truncated SVD), clusters the reduced points (k-means, Ward
//! agglomerative or DBSCAN) and ranks per-cluster terms with class-based
//! TF-IDF. LDA and LSI baselines and c_v / UMass coherence scoring make the
//! resulting topic sets comparable.

pub mod baselines;
pub mod cluster;
pub mod coherence;
pub mod corpus;
pub mod dimred;
pub mod embedding;
mod error;
pub mod harness;
pub mod sparse;
pub mod synth;
pub mod topic_rep;

pub use error::{Error, Result, Stage};
