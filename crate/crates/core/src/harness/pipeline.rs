use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{
    ClusterMethod, EmbeddingSource, ModelKind, PipelineConfig, DEFAULT_BASELINE_TOPICS,
};
use crate::baselines::{lda_fit, lda_topics, lsi_fit, lsi_topics, LdaParams};
use crate::cluster::{agglomerative, dbscan, kmeans, ClusterAssignment};
use crate::coherence::{cv, umass_on, CoherenceReport, CvParams, Metric};
use crate::corpus::{tfidf, Corpus, CountMatrix, Vocabulary};
use crate::dimred::{
    kpca_fit_transform_seeded, pca_fit_transform, truncated_svd_seeded, ReducedMatrix,
    ReductionMethod,
};
use crate::embedding::{hash_projection_embed, read_embeddings, EmbeddingMatrix};
use crate::topic_rep::{class_tfidf, top_terms, TopicSet};
use crate::{Error, Result, Stage};

/// How the number of topics was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicMode {
    /// `evaluation.n_topics` was passed to the model.
    Fixed,
    /// The clusterer's own `n_clusters` (or the baseline default).
    Configured,
    /// `k = round(sqrt(N / 2))`.
    Heuristic,
    /// Density clustering chose the count.
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub topic_mode: TopicMode,
    /// Number of topics in `topics`.
    pub n_topics: usize,
    pub topics: TopicSet,
    pub coherence: Vec<CoherenceReport>,
    /// Cluster label (or dominant topic) per document; `-1` marks noise.
    pub doc_labels: Vec<i64>,
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    pub fn metric(&self, m: Metric) -> Option<&CoherenceReport> {
        self.coherence.iter().find(|r| r.metric == m)
    }

    pub fn score(&self, m: Metric) -> Option<f64> {
        self.metric(m).map(|r| r.aggregate)
    }

    pub fn total_seconds(&self) -> f64 {
        self.timings.iter().map(|t| t.seconds).sum()
    }

    /// Equality with timings ignored.
    pub fn same_result(&self, other: &RunReport) -> bool {
        let strip = |r: &RunReport| RunReport {
            timings: Vec::new(),
            ..r.clone()
        };
        strip(self) == strip(other)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

struct Timer {
    timings: Vec<StageTiming>,
}

impl Timer {
    fn stage<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.at(stage));
        self.timings.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Loads the corpus and any embedding file named by the config, then runs it.
/// Path and parameter problems surface as config errors before any work.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    config.check_paths(true)?;
    let path = config.corpus.path.as_ref().expect("checked above");
    let corpus = Corpus::from_jsonl_path(path).map_err(|e| e.at(Stage::Corpus))?;
    let embeddings = match (config.model, config.embedding.source) {
        (ModelKind::Pipeline, EmbeddingSource::File) => {
            let p = config.embedding.path.as_ref().expect("validated");
            Some(read_embeddings(p).map_err(|e| e.at(Stage::Embedding))?)
        }
        _ => None,
    };
    run_pipeline_on(config, &corpus, embeddings.as_ref())
}

/// Runs the configured model on an in-memory corpus. `embeddings` replaces a
/// file-backed embedding source; hash embeddings are computed when it is `None`.
pub fn run_pipeline_on(
    config: &PipelineConfig,
    corpus: &Corpus,
    embeddings: Option<&EmbeddingMatrix>,
) -> Result<RunReport> {
    config.validate()?;
    config.check_paths(false)?;
    if corpus.is_empty() {
        return Err(Error::invalid("corpus is empty").at(Stage::Corpus));
    }
    let mut timer = Timer {
        timings: Vec::new(),
    };
    let tok = config.corpus.tokenizer()?;

    let (docs, vocab, counts) = timer.stage(Stage::Corpus, || {
        let docs = corpus.tokenized(&tok);
        let vocab = Vocabulary::from_tokens(
            &docs,
            (config.corpus.ngram_min, config.corpus.ngram_max),
            config.corpus.min_count,
        )?;
        let counts = vocab.count(&docs);
        Ok((docs, vocab, counts))
    })?;

    let n_terms = config.evaluation.n_terms;
    let (topic_mode, topics, doc_labels) = match config.model {
        ModelKind::Pipeline => {
            let x = timer.stage(Stage::Embedding, || match embeddings {
                Some(e) => {
                    e.check_aligned(corpus)?;
                    Ok(e.clone())
                }
                None if config.embedding.source == EmbeddingSource::File => Err(Error::Config(
                    "embedding.source = \"file\" but no embeddings were supplied".into(),
                )),
                None => hash_projection_embed(corpus, &tok, config.embedding.dim, config.embedding.seed),
            })?;
            let reduced = timer.stage(Stage::Reduce, || reduce(config, &x))?;
            let (mode, assignment) = timer.stage(Stage::Cluster, || cluster(config, &reduced))?;
            let topics = timer.stage(Stage::Topics, || {
                let w = class_tfidf(&counts, &assignment)?;
                top_terms(&w, &vocab, n_terms)
            })?;
            (mode, topics, assignment.labels)
        }
        ModelKind::Lda | ModelKind::Lsi => {
            let (mode, k) = match config.evaluation.n_topics {
                Some(k) => (TopicMode::Fixed, k),
                None => (TopicMode::Configured, DEFAULT_BASELINE_TOPICS),
            };
            let (topics, labels) = timer.stage(Stage::Baseline, || baseline(config, &counts, &vocab, k))?;
            (mode, topics, labels)
        }
    };

    let coherence = timer.stage(Stage::Coherence, || {
        config
            .evaluation
            .metrics
            .iter()
            .map(|m| match m {
                Metric::Cv => cv(
                    &topics,
                    &docs,
                    &CvParams {
                        window: config.evaluation.cv_window,
                        epsilon: config.evaluation.cv_epsilon,
                    },
                ),
                Metric::Umass => umass_on(&topics, &docs),
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(RunReport {
        config: config.clone(),
        topic_mode,
        n_topics: topics.len(),
        topics,
        coherence,
        doc_labels,
        timings: timer.timings,
    })
}

fn reduce(config: &PipelineConfig, x: &EmbeddingMatrix) -> Result<ReducedMatrix> {
    let r = &config.reducer;
    match r.method {
        ReductionMethod::Pca => pca_fit_transform(x, r.pca.n_components),
        ReductionMethod::Kpca => kpca_fit_transform_seeded(
            x,
            r.kpca.n_components,
            &r.kpca.kernel_config(),
            r.kpca.random_state,
        ),
        ReductionMethod::Svd => truncated_svd_seeded(&x.data().view(), r.svd.n_components, r.svd.random_state),
    }
}

fn heuristic_k(n: usize) -> usize {
    ((n as f64 / 2.0).sqrt().round() as usize).max(1)
}

fn cluster(config: &PipelineConfig, reduced: &ReducedMatrix) -> Result<(TopicMode, ClusterAssignment)> {
    let cl = &config.clusterer;
    let y = reduced.data.view();
    let n = y.nrows();
    let pick = |table_k: usize| match config.evaluation.n_topics {
        Some(k) => (TopicMode::Fixed, k),
        None if cl.auto_k => (TopicMode::Heuristic, heuristic_k(n)),
        None => (TopicMode::Configured, table_k),
    };
    let (mode, assignment) = match cl.method {
        ClusterMethod::Kmeans => {
            let (mode, k) = pick(cl.kmeans.n_clusters);
            (mode, kmeans(y, k, &cl.kmeans_params(config.seed))?.0)
        }
        ClusterMethod::Agglomerative => {
            let (mode, k) = pick(cl.agglomerative.n_clusters);
            (mode, agglomerative(y, k)?)
        }
        ClusterMethod::Dbscan => {
            if config.evaluation.n_topics.is_some() {
                log::warn!("dbscan ignores evaluation.n_topics");
            }
            (TopicMode::Density, dbscan(y, cl.dbscan.eps, cl.dbscan.min_samples)?)
        }
    };
    if assignment.n_clusters == 0 {
        return Err(Error::invalid("every document was labelled noise"));
    }
    Ok((mode, assignment))
}

fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn baseline(
    config: &PipelineConfig,
    counts: &CountMatrix,
    vocab: &Vocabulary,
    k: usize,
) -> Result<(TopicSet, Vec<i64>)> {
    let n_terms = config.evaluation.n_terms;
    match config.model {
        ModelKind::Lda => {
            let params = LdaParams {
                alpha: config.lda.alpha,
                beta: config.lda.beta,
                iters: config.lda.iterations,
                seed: config.seed,
            };
            let model = lda_fit(counts, k, &params)?;
            let labels = model
                .doc_topic
                .rows()
                .into_iter()
                .map(|r| argmax(r) as i64)
                .collect();
            Ok((lda_topics(&model, vocab, n_terms)?, labels))
        }
        ModelKind::Lsi => {
            let m = tfidf(counts)?;
            let model = lsi_fit(&m, k, config.seed)?;
            let labels = model
                .doc_coords
                .rows()
                .into_iter()
                .map(|r| argmax(r.mapv(f64::abs).view()) as i64)
                .collect();
            Ok((lsi_topics(&model, vocab, n_terms)?, labels))
        }
        ModelKind::Pipeline => unreachable!("baseline called for the pipeline model"),
    }
}
