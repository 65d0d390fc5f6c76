use std::fmt;

use thiserror::Error;

/// Pipeline stage tag attached to errors surfaced by the experiment runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Corpus,
    Embedding,
    Reduce,
    Cluster,
    Topics,
    Coherence,
    Baseline,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Corpus => "corpus",
            Stage::Embedding => "embedding",
            Stage::Reduce => "reduce",
            Stage::Cluster => "cluster",
            Stage::Topics => "topics",
            Stage::Coherence => "coherence",
            Stage::Baseline => "baseline",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation does not hold.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no term survives vocabulary filtering")]
    EmptyVocabulary,
    #[error("format error: {0}")]
    Format(String),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("rank deficient: requested {requested} components, only {available} admissible")]
    Rank { requested: usize, available: usize },
    #[error("class {0} has zero total term count")]
    EmptyClass(i64),
    #[error("topic {0} has too few scorable terms")]
    DegenerateTopic(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// True for configuration problems, including ones wrapped in a stage tag.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
