use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::pipeline::{run_pipeline, run_pipeline_on, RunReport};
use crate::coherence::Metric;
use crate::corpus::Corpus;
use crate::{Error, Result};

pub const GRID_CSV_HEADER: &str = "embedding,reducer,clusterer,n_topics,cv,umass,wall_time_s,error";

/// One grid cell. Scores are absent when the metric was not requested or the
/// run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub embedding: String,
    pub reducer: String,
    pub clusterer: String,
    pub n_topics: Option<usize>,
    pub cv: Option<f64>,
    pub umass: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl GridRow {
    fn from_outcome(cfg: &PipelineConfig, outcome: Result<RunReport>, secs: f64) -> Self {
        let (embedding, reducer, clusterer) = cfg.component_labels();
        match outcome {
            Ok(r) => GridRow {
                embedding,
                reducer,
                clusterer,
                n_topics: Some(r.n_topics),
                cv: r.score(Metric::Cv),
                umass: r.score(Metric::Umass),
                wall_time_s: secs,
                error: None,
            },
            Err(e) => GridRow {
                embedding,
                reducer,
                clusterer,
                n_topics: None,
                cv: None,
                umass: None,
                wall_time_s: secs,
                error: Some(e.to_string()),
            },
        }
    }

    fn fields(&self) -> [String; 8] {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        [
            self.embedding.clone(),
            self.reducer.clone(),
            self.clusterer.clone(),
            self.n_topics.map(|k| k.to_string()).unwrap_or_default(),
            opt(self.cv),
            opt(self.umass),
            format!("{:.3}", self.wall_time_s),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub rows: Vec<GridRow>,
}

impl GridOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn run_cells<F>(configs: &[PipelineConfig], workers: usize, run: F) -> Result<Vec<GridRow>>
where
    F: Fn(&PipelineConfig) -> Result<RunReport> + Sync,
{
    if configs.is_empty() {
        return Err(Error::invalid("grid needs at least one config"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let start = Instant::now();
                let outcome = run(cfg);
                if let Err(e) = &outcome {
                    log::warn!("grid cell {:?} failed: {e}", cfg.component_labels());
                }
                GridRow::from_outcome(cfg, outcome, start.elapsed().as_secs_f64())
            })
            .collect()
    }))
}

/// Writes the grid CSV with `GRID_CSV_HEADER` and one row per cell.
pub fn write_grid_csv(rows: &[GridRow], out: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out)?;
    w.write_record(GRID_CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every config (each loading its own corpus) on up to `workers` threads
/// (`0` = one per core) and writes the CSV. Failing cells become rows with the
/// `error` column set; only I/O on `out` fails the call.
pub fn grid_run(configs: &[PipelineConfig], out: impl AsRef<Path>, workers: usize) -> Result<GridOutcome> {
    let rows = run_cells(configs, workers, run_pipeline)?;
    write_grid_csv(&rows, out)?;
    Ok(GridOutcome { rows })
}

/// [`grid_run`] over a shared in-memory corpus with hash embeddings.
pub fn grid_run_on(
    configs: &[PipelineConfig],
    corpus: &Corpus,
    out: impl AsRef<Path>,
    workers: usize,
) -> Result<GridOutcome> {
    let rows = run_cells(configs, workers, |c| run_pipeline_on(c, corpus, None))?;
    write_grid_csv(&rows, out)?;
    Ok(GridOutcome { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimred::ReductionMethod;

    #[test]
    fn failures_become_rows() {
        let corpus = Corpus::from_texts([
            "card fee card blocked",
            "card blocked fee",
            "transfer money failed",
            "money transfer pending",
        ]);
        let mut ok = PipelineConfig::default();
        ok.corpus.ngram_max = 1;
        ok.embedding.dim = 16;
        ok.reducer.method = ReductionMethod::Pca;
        ok.reducer.pca.n_components = 2;
        ok.clusterer.kmeans.n_clusters = 2;
        let mut bad = ok.clone();
        bad.reducer.pca.n_components = 50;
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("grid.csv");
        let g = grid_run_on(&[ok.clone(), bad, ok], &corpus, &out, 2).unwrap();
        assert_eq!(g.rows.len(), 3);
        assert_eq!(g.failures(), 1);
        assert!(g.rows[1].error.as_deref().unwrap().contains("reduce"));
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], GRID_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("hash,pca,kmeans,2,"));
    }
}
