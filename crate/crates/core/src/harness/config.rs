use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::KMeansParams;
use crate::coherence::Metric;
use crate::corpus::{load_stopwords, TokenizerConfig, DEFAULT_TOKEN_PATTERN};
use crate::dimred::{KernelConfig, KernelKind, ReductionMethod};
use crate::{Error, Result};

/// Which model family produces the topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// embed → reduce → cluster → c-TF-IDF
    Pipeline,
    Lda,
    Lsi,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Pipeline => "pipeline",
            ModelKind::Lda => "lda",
            ModelKind::Lsi => "lsi",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pipeline" => Ok(ModelKind::Pipeline),
            "lda" => Ok(ModelKind::Lda),
            "lsi" => Ok(ModelKind::Lsi),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// JSONL corpus, one `{"id", "text"}` object per line.
    pub path: Option<PathBuf>,
    pub lowercase: bool,
    /// Plain-text stopword list, one term per line.
    pub stopwords: Option<PathBuf>,
    pub token_pattern: String,
    pub min_token_len: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_count: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        Self {
            path: None,
            lowercase: true,
            stopwords: None,
            token_pattern: DEFAULT_TOKEN_PATTERN.to_owned(),
            min_token_len: 2,
            ngram_min: 1,
            ngram_max: 3,
            min_count: 1,
        }
    }
}

impl CorpusSection {
    pub fn tokenizer(&self) -> Result<TokenizerConfig> {
        let mut cfg = TokenizerConfig::default().with_pattern(&self.token_pattern)?;
        cfg.lowercase = self.lowercase;
        cfg.min_len = self.min_token_len;
        if let Some(p) = &self.stopwords {
            cfg = cfg.with_stopwords(load_stopwords(p)?);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    /// Deterministic hash-projection embeddings computed in process.
    Hash,
    /// Precomputed EMB1 file aligned with the corpus.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub source: EmbeddingSource,
    pub path: Option<PathBuf>,
    pub dim: usize,
    pub seed: u64,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        Self {
            source: EmbeddingSource::Hash,
            path: None,
            dim: 256,
            seed: 0,
        }
    }
}

impl EmbeddingSection {
    pub fn label(&self) -> &'static str {
        match self.source {
            EmbeddingSource::Hash => "hash",
            EmbeddingSource::File => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaSection {
    pub n_components: usize,
}

impl Default for PcaSection {
    fn default() -> Self {
        Self { n_components: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KpcaSection {
    pub n_components: usize,
    pub kernel: KernelKind,
    pub gamma: f64,
    pub random_state: u64,
}

impl Default for KpcaSection {
    fn default() -> Self {
        Self {
            n_components: 5,
            kernel: KernelKind::Rbf,
            gamma: 15.0,
            random_state: 42,
        }
    }
}

impl KpcaSection {
    pub fn kernel_config(&self) -> KernelConfig {
        KernelConfig {
            kind: self.kernel,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvdSection {
    pub n_components: usize,
    pub algorithm: String,
    pub random_state: u64,
}

impl Default for SvdSection {
    fn default() -> Self {
        Self {
            n_components: 5,
            algorithm: "randomized".to_owned(),
            random_state: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReducerSection {
    pub method: ReductionMethod,
    pub pca: PcaSection,
    pub kpca: KpcaSection,
    pub svd: SvdSection,
}

impl Default for ReducerSection {
    fn default() -> Self {
        Self {
            method: ReductionMethod::Kpca,
            pca: PcaSection::default(),
            kpca: KpcaSection::default(),
            svd: SvdSection::default(),
        }
    }
}

impl ReducerSection {
    pub fn n_components(&self) -> usize {
        match self.method {
            ReductionMethod::Pca => self.pca.n_components,
            ReductionMethod::Kpca => self.kpca.n_components,
            ReductionMethod::Svd => self.svd.n_components,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    Kmeans,
    Agglomerative,
    Dbscan,
}

impl fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterMethod::Kmeans => "kmeans",
            ClusterMethod::Agglomerative => "agglomerative",
            ClusterMethod::Dbscan => "dbscan",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmeansSection {
    pub n_clusters: usize,
    pub n_init: usize,
    pub max_iter: usize,
    pub init: String,
}

impl Default for KmeansSection {
    fn default() -> Self {
        Self {
            n_clusters: 8,
            n_init: 10,
            max_iter: 300,
            init: "k-means++".to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgglomerativeSection {
    pub n_clusters: usize,
    pub linkage: String,
    pub metric: String,
}

impl Default for AgglomerativeSection {
    fn default() -> Self {
        Self {
            n_clusters: 2,
            linkage: "ward".to_owned(),
            metric: "euclidean".to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbscanSection {
    pub eps: f64,
    pub min_samples: usize,
}

impl Default for DbscanSection {
    fn default() -> Self {
        Self {
            eps: 0.30,
            min_samples: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClustererSection {
    pub method: ClusterMethod,
    /// With no `n_topics`, pick `k = round(sqrt(N / 2))` for partitional
    /// clusterers instead of the table value.
    pub auto_k: bool,
    pub kmeans: KmeansSection,
    pub agglomerative: AgglomerativeSection,
    pub dbscan: DbscanSection,
}

impl Default for ClustererSection {
    fn default() -> Self {
        Self {
            method: ClusterMethod::Kmeans,
            auto_k: false,
            kmeans: KmeansSection::default(),
            agglomerative: AgglomerativeSection::default(),
            dbscan: DbscanSection::default(),
        }
    }
}

impl ClustererSection {
    pub fn kmeans_params(&self, seed: u64) -> KMeansParams {
        KMeansParams {
            n_init: self.kmeans.n_init,
            max_iter: self.kmeans.max_iter,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    /// Recorded only; the Gibbs sampler has no minibatches.
    pub chunksize: usize,
    /// Recorded only.
    pub passes: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            chunksize: 1740,
            passes: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// Forces the topic count of partitional clusterers and baselines.
    pub n_topics: Option<usize>,
    pub n_terms: usize,
    pub metrics: Vec<Metric>,
    pub cv_window: usize,
    pub cv_epsilon: f64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            n_topics: None,
            n_terms: 20,
            metrics: vec![Metric::Cv, Metric::Umass],
            cv_window: 110,
            cv_epsilon: 1e-12,
        }
    }
}

/// Topic count used by baselines when `n_topics` is unset.
pub const DEFAULT_BASELINE_TOPICS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelKind,
    pub seed: u64,
    pub corpus: CorpusSection,
    pub embedding: EmbeddingSection,
    pub reducer: ReducerSection,
    pub clusterer: ClustererSection,
    pub lda: LdaSection,
    pub evaluation: EvaluationSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Pipeline,
            seed: 0,
            corpus: CorpusSection::default(),
            embedding: EmbeddingSection::default(),
            reducer: ReducerSection::default(),
            clusterer: ClustererSection::default(),
            lda: LdaSection::default(),
            evaluation: EvaluationSection::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn require_file(what: &str, p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(config_err(format!("{what} {} does not exist", p.display())))
    }
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| config_err(e.to_string()))
    }

    pub fn from_toml_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Parameter checks that need no filesystem access.
    pub fn validate(&self) -> Result<()> {
        let c = &self.corpus;
        if c.ngram_min == 0 || c.ngram_min > c.ngram_max {
            return Err(config_err(format!(
                "bad n-gram range ({}, {})",
                c.ngram_min, c.ngram_max
            )));
        }
        if c.min_count == 0 {
            return Err(config_err("corpus.min_count must be >= 1"));
        }
        if self.embedding.dim == 0 {
            return Err(config_err("embedding.dim must be >= 1"));
        }
        if self.embedding.source == EmbeddingSource::File && self.embedding.path.is_none() {
            return Err(config_err("embedding.source = \"file\" needs embedding.path"));
        }
        if self.reducer.n_components() == 0 {
            return Err(config_err("reducer n_components must be >= 1"));
        }
        self.reducer
            .kpca
            .kernel_config()
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        if self.reducer.svd.algorithm != "randomized" && self.reducer.svd.algorithm != "arpack" {
            return Err(config_err(format!(
                "unknown svd algorithm {:?}",
                self.reducer.svd.algorithm
            )));
        }
        let cl = &self.clusterer;
        if cl.kmeans.init != "k-means++" {
            return Err(config_err(format!("unsupported kmeans init {:?}", cl.kmeans.init)));
        }
        if cl.kmeans.n_clusters == 0 || cl.kmeans.n_init == 0 || cl.kmeans.max_iter == 0 {
            return Err(config_err("kmeans n_clusters, n_init and max_iter must be >= 1"));
        }
        if cl.agglomerative.linkage != "ward" {
            return Err(config_err(format!(
                "unsupported linkage {:?}",
                cl.agglomerative.linkage
            )));
        }
        if !cl.agglomerative.metric.eq_ignore_ascii_case("euclidean") {
            return Err(config_err(format!(
                "ward linkage needs the euclidean metric, got {:?}",
                cl.agglomerative.metric
            )));
        }
        if cl.agglomerative.n_clusters == 0 {
            return Err(config_err("agglomerative n_clusters must be >= 1"));
        }
        if !(cl.dbscan.eps > 0.0) || cl.dbscan.min_samples == 0 {
            return Err(config_err("dbscan needs eps > 0 and min_samples >= 1"));
        }
        if !(self.lda.alpha > 0.0 && self.lda.beta > 0.0) || self.lda.iterations == 0 {
            return Err(config_err("lda needs alpha > 0, beta > 0, iterations >= 1"));
        }
        let ev = &self.evaluation;
        if ev.n_terms == 0 {
            return Err(config_err("evaluation.n_terms must be >= 1"));
        }
        if ev.n_topics == Some(0) {
            return Err(config_err("evaluation.n_topics must be >= 1"));
        }
        if ev.metrics.is_empty() {
            return Err(config_err("evaluation.metrics must not be empty"));
        }
        if ev.cv_window == 0 || !(ev.cv_epsilon >= 0.0) {
            return Err(config_err("cv_window must be >= 1 and cv_epsilon >= 0"));
        }
        Ok(())
    }

    /// Checks that every referenced input file exists.
    pub fn check_paths(&self, need_corpus: bool) -> Result<()> {
        match &self.corpus.path {
            Some(p) => require_file("corpus", p)?,
            None if need_corpus => return Err(config_err("corpus.path is not set")),
            None => {}
        }
        if let Some(p) = &self.corpus.stopwords {
            require_file("stopword list", p)?;
        }
        if self.model == ModelKind::Pipeline && self.embedding.source == EmbeddingSource::File {
            if let Some(p) = &self.embedding.path {
                require_file("embedding file", p)?;
            }
        }
        Ok(())
    }

    /// Short labels for the grid columns `embedding`, `reducer`, `clusterer`.
    pub fn component_labels(&self) -> (String, String, String) {
        match self.model {
            ModelKind::Pipeline => (
                self.embedding.label().to_owned(),
                self.reducer.method.to_string(),
                self.clusterer.method.to_string(),
            ),
            m => ("bow".to_owned(), "none".to_owned(), m.to_string()),
        }
    }
}

/// Recursively overlays `top` onto `base`; tables merge key by key, every
/// other value in `top` replaces the one in `base`.
pub fn merge_toml(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge_toml(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl PipelineConfig {
    /// Applies a TOML document on top of this config.
    pub fn overlay_toml(&self, overlay: &str) -> Result<Self> {
        let mut base = toml::Value::try_from(self).map_err(|e| config_err(e.to_string()))?;
        let top: toml::Value = toml::from_str(overlay).map_err(|e| config_err(e.to_string()))?;
        merge_toml(&mut base, top);
        base.try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))
    }
}
