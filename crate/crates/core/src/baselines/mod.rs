//! Traditional topic models used as comparison baselines.

mod lda;
mod lsi;

pub use lda::{lda_fit, lda_fit_traced, lda_topics, LdaModel, LdaParams, LdaTrace};
pub use lsi::{lsi_fit, lsi_topics, LsiModel};
