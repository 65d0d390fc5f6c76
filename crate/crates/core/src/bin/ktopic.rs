use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ktopic::coherence::{cv, umass_on, CoherenceReport, CvParams, Metric};
use ktopic::corpus::Corpus;
use ktopic::dimred::{KernelKind, ReductionMethod};
use ktopic::harness::{
    grid_run, run_pipeline, topic_sweep, ClusterMethod, EmbeddingSource, ModelKind, PipelineConfig,
    RunReport,
};
use ktopic::synth::{disjoint_topics, themed_short_texts, ThemedParams};
use ktopic::topic_rep::TopicSet;
use ktopic::{Error, Result};

#[derive(Parser)]
#[command(name = "ktopic", version, about = "Embedding-clustering topic extraction and coherence evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write a JSON report.
    Run {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the topic table as Markdown.
        #[arg(long)]
        topics_md: Option<PathBuf>,
    },
    /// Run the cartesian product of models, reducers and clusterers.
    Grid {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, value_delimiter = ',', default_value = "pipeline")]
        models: Vec<CliModel>,
        #[arg(long, value_delimiter = ',', default_value = "pca,kpca,svd")]
        reducers: Vec<CliReducer>,
        #[arg(long, value_delimiter = ',', default_value = "kmeans,agglomerative,dbscan")]
        clusterers: Vec<CliClusterer>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coherence versus topic count; writes CSV and an SVG chart beside it.
    Sweep {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the topics of a report as a Markdown table.
    ExportTopics {
        /// RunReport or TopicSet JSON.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score an existing topic set against a corpus.
    Score {
        /// RunReport or TopicSet JSON.
        #[arg(long)]
        topics: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic corpus with planted themes.
    Synth {
        #[arg(long, value_enum, default_value = "themes")]
        kind: SynthKind,
        #[arg(long, default_value_t = 2000)]
        docs: usize,
        #[arg(long, default_value_t = 8)]
        themes: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Planted theme per document as a JSON array.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Themes,
    Disjoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliModel {
    Pipeline,
    Lda,
    Lsi,
}

impl From<CliModel> for ModelKind {
    fn from(m: CliModel) -> Self {
        match m {
            CliModel::Pipeline => ModelKind::Pipeline,
            CliModel::Lda => ModelKind::Lda,
            CliModel::Lsi => ModelKind::Lsi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CliReducer {
    Pca,
    Kpca,
    Svd,
}

impl From<CliReducer> for ReductionMethod {
    fn from(r: CliReducer) -> Self {
        match r {
            CliReducer::Pca => ReductionMethod::Pca,
            CliReducer::Kpca => ReductionMethod::Kpca,
            CliReducer::Svd => ReductionMethod::Svd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CliClusterer {
    Kmeans,
    Agglomerative,
    Dbscan,
}

impl From<CliClusterer> for ClusterMethod {
    fn from(c: CliClusterer) -> Self {
        match c {
            CliClusterer::Kmeans => ClusterMethod::Kmeans,
            CliClusterer::Agglomerative => ClusterMethod::Agglomerative,
            CliClusterer::Dbscan => ClusterMethod::Dbscan,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CliKernel {
    Rbf,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMetric {
    Cv,
    Umass,
}

/// Flags mirroring `PipelineConfig`. Values read from `--config` win over
/// flags.
#[derive(Args, Default)]
struct PipelineArgs {
    /// TOML config file; its values override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    ngram_max: Option<usize>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<CliModel>,
    /// EMB1 file; switches the embedding source to `file`.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    embed_seed: Option<u64>,
    #[arg(long, value_enum)]
    reducer: Option<CliReducer>,
    /// Components for the selected reducer.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, value_enum)]
    kernel: Option<CliKernel>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    clusterer: Option<CliClusterer>,
    /// n_clusters for the selected partitional clusterer.
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_samples: Option<usize>,
    #[arg(long)]
    auto_k: bool,
    #[arg(long)]
    n_topics: Option<usize>,
    #[arg(long)]
    n_terms: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    metrics: Option<Vec<CliMetric>>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl PipelineArgs {
    fn to_config(&self) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::default();
        macro_rules! set {
            ($flag:ident => $($field:ident).+) => {
                if let Some(v) = self.$flag.clone() {
                    c.$($field).+ = v.into();
                }
            };
        }
        if self.corpus.is_some() {
            c.corpus.path = self.corpus.clone();
        }
        if self.stopwords.is_some() {
            c.corpus.stopwords = self.stopwords.clone();
        }
        set!(ngram_max => corpus.ngram_max);
        set!(min_count => corpus.min_count);
        set!(model => model);
        if self.embeddings.is_some() {
            c.embedding.source = EmbeddingSource::File;
            c.embedding.path = self.embeddings.clone();
        }
        set!(dim => embedding.dim);
        set!(embed_seed => embedding.seed);
        set!(reducer => reducer.method);
        if let Some(n) = self.components {
            match c.reducer.method {
                ReductionMethod::Pca => c.reducer.pca.n_components = n,
                ReductionMethod::Kpca => c.reducer.kpca.n_components = n,
                ReductionMethod::Svd => c.reducer.svd.n_components = n,
            }
        }
        if let Some(k) = self.kernel {
            c.reducer.kpca.kernel = match k {
                CliKernel::Rbf => KernelKind::Rbf,
                CliKernel::Linear => KernelKind::Linear,
            };
        }
        set!(gamma => reducer.kpca.gamma);
        set!(clusterer => clusterer.method);
        if let Some(n) = self.clusters {
            c.clusterer.kmeans.n_clusters = n;
            c.clusterer.agglomerative.n_clusters = n;
        }
        set!(eps => clusterer.dbscan.eps);
        set!(min_samples => clusterer.dbscan.min_samples);
        if self.auto_k {
            c.clusterer.auto_k = true;
        }
        if self.n_topics.is_some() {
            c.evaluation.n_topics = self.n_topics;
        }
        set!(n_terms => evaluation.n_terms);
        if let Some(ms) = &self.metrics {
            c.evaluation.metrics = ms
                .iter()
                .map(|m| match m {
                    CliMetric::Cv => Metric::Cv,
                    CliMetric::Umass => Metric::Umass,
                })
                .collect();
        }
        set!(window => evaluation.cv_window);
        set!(iterations => lda.iterations);
        set!(seed => seed);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            c = c.overlay_toml(&text)?;
        }
        c.validate()?;
        Ok(c)
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_topics(path: &Path) -> Result<TopicSet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(r) = RunReport::from_json(&text) {
        return Ok(r.topics);
    }
    serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{} is neither a report nor a topic set: {e}", path.display())))
}

/// Outcome of a command that completed; `partial` marks grids with failed cells.
struct Done {
    partial: bool,
}

fn execute(cmd: Command) -> Result<Done> {
    let ok = Done { partial: false };
    match cmd {
        Command::Run {
            pipeline,
            out,
            topics_md,
        } => {
            let report = run_pipeline(&pipeline.to_config()?)?;
            write_or_print(out.as_deref(), &(report.to_json()? + "\n"))?;
            if let Some(p) = topics_md {
                std::fs::write(p, report.topics.to_markdown())?;
            }
            Ok(ok)
        }
        Command::Grid {
            pipeline,
            models,
            reducers,
            clusterers,
            workers,
            out,
        } => {
            let base = pipeline.to_config()?;
            base.check_paths(true)?;
            let mut configs = Vec::new();
            for &m in &models {
                let model = ModelKind::from(m);
                if model != ModelKind::Pipeline {
                    let mut c = base.clone();
                    c.model = model;
                    configs.push(c);
                    continue;
                }
                for &r in &reducers {
                    for &cl in &clusterers {
                        let mut c = base.clone();
                        c.model = model;
                        c.reducer.method = r.into();
                        c.clusterer.method = cl.into();
                        configs.push(c);
                    }
                }
            }
            let g = grid_run(&configs, &out, workers)?;
            let failed = g.failures();
            if failed > 0 {
                log::warn!("{failed} of {} grid cells failed", g.rows.len());
            }
            Ok(Done { partial: failed > 0 })
        }
        Command::Sweep { pipeline, k, out } => {
            let base = pipeline.to_config()?;
            let s = topic_sweep(&base, base.model, &k, &out)?;
            eprintln!(
                "wrote {} and {}; best k = {}",
                s.csv_path.display(),
                s.svg_path.display(),
                s.best_k().map_or("none".to_owned(), |k| k.to_string())
            );
            Ok(ok)
        }
        Command::ExportTopics { report, out } => {
            let topics = read_topics(&report)?;
            write_or_print(out.as_deref(), &topics.to_markdown())?;
            Ok(ok)
        }
        Command::Score {
            topics,
            pipeline,
            out,
        } => {
            let cfg = pipeline.to_config()?;
            cfg.check_paths(true)?;
            let topics = read_topics(&topics)?;
            let corpus = Corpus::from_jsonl_path(cfg.corpus.path.as_ref().expect("checked"))?;
            let docs = corpus.tokenized(&cfg.corpus.tokenizer()?);
            let reports: Vec<CoherenceReport> = cfg
                .evaluation
                .metrics
                .iter()
                .map(|m| match m {
                    Metric::Cv => cv(
                        &topics,
                        &docs,
                        &CvParams {
                            window: cfg.evaluation.cv_window,
                            epsilon: cfg.evaluation.cv_epsilon,
                        },
                    ),
                    Metric::Umass => umass_on(&topics, &docs),
                })
                .collect::<Result<_>>()?;
            write_or_print(out.as_deref(), &(serde_json::to_string_pretty(&reports)? + "\n"))?;
            Ok(ok)
        }
        Command::Synth {
            kind,
            docs,
            themes,
            seed,
            out,
            labels,
        } => {
            if docs == 0 || themes == 0 {
                return Err(Error::Config("--docs and --themes must be >= 1".into()));
            }
            let planted = match kind {
                SynthKind::Themes => themed_short_texts(&ThemedParams {
                    n_themes: themes,
                    n_docs: docs,
                    seed,
                    ..ThemedParams::default()
                }),
                SynthKind::Disjoint => disjoint_topics(themes, 10, docs, 20, seed),
            };
            planted.corpus.write_jsonl(&out)?;
            if let Some(p) = labels {
                std::fs::write(p, serde_json::to_string(&planted.labels)? + "\n")?;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(Done { partial: false }) => ExitCode::SUCCESS,
        Ok(Done { partial: true }) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
