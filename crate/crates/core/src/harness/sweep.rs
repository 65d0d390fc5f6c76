use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ModelKind, PipelineConfig};
use super::pipeline::{run_pipeline, run_pipeline_on};
use super::svg::line_chart;
use crate::coherence::Metric;
use crate::corpus::Corpus;
use crate::{Error, Result};

pub const SWEEP_CSV_HEADER: &str = "k,cv,error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: usize,
    pub cv: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
}

impl SweepOutcome {
    /// k with the highest c_v among successful points (smallest k on ties).
    pub fn best_k(&self) -> Option<usize> {
        self.points
            .iter()
            .filter_map(|p| p.cv.map(|c| (p.k, c)))
            .fold(None, |best: Option<(usize, f64)>, (k, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((k, c)),
            })
            .map(|(k, _)| k)
    }
}

fn sweep_config(base: &PipelineConfig, model: ModelKind, k: usize) -> PipelineConfig {
    let mut c = base.clone();
    c.model = model;
    c.evaluation.n_topics = Some(k);
    if !c.evaluation.metrics.contains(&Metric::Cv) {
        c.evaluation.metrics.push(Metric::Cv);
    }
    c
}

fn sweep_with<F>(
    base: &PipelineConfig,
    model: ModelKind,
    k_values: &[usize],
    out: &Path,
    run: F,
) -> Result<SweepOutcome>
where
    F: Fn(&PipelineConfig) -> Result<super::RunReport> + Sync,
{
    if model == ModelKind::Lsi {
        return Err(Error::Config("sweep supports the lda and pipeline models".into()));
    }
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(Error::Config("k values must be non-empty and >= 1".into()));
    }
    let points: Vec<SweepPoint> = k_values
        .par_iter()
        .map(|&k| match run(&sweep_config(base, model, k)) {
            Ok(r) => SweepPoint {
                k,
                cv: r.score(Metric::Cv),
                error: None,
            },
            Err(e) => {
                log::warn!("sweep point k={k} failed: {e}");
                SweepPoint {
                    k,
                    cv: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out)?;
    w.write_record(SWEEP_CSV_HEADER.split(','))?;
    for p in &points {
        w.write_record([
            p.k.to_string(),
            p.cv.map(|c| format!("{c:.6}")).unwrap_or_default(),
            p.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let svg_path = out.with_extension("svg");
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.cv.map(|c| (p.k as f64, c)))
        .collect();
    let svg = line_chart(
        &xy,
        &format!("Topics versus coherence ({model})"),
        "Number of topics",
        "Coherence (c_v)",
    );
    std::fs::write(&svg_path, svg)?;
    Ok(SweepOutcome {
        points,
        csv_path: out.to_path_buf(),
        svg_path,
    })
}

/// Fits `model` once per k, writes `k,cv,error` rows to `out` and a line
/// chart next to it with the `.svg` extension. Failing points are recorded
/// and left out of the chart.
pub fn topic_sweep(
    base: &PipelineConfig,
    model: ModelKind,
    k_values: &[usize],
    out: impl AsRef<Path>,
) -> Result<SweepOutcome> {
    base.validate()?;
    base.check_paths(true)?;
    sweep_with(base, model, k_values, out.as_ref(), run_pipeline)
}

/// [`topic_sweep`] over an in-memory corpus.
pub fn topic_sweep_on(
    base: &PipelineConfig,
    model: ModelKind,
    k_values: &[usize],
    corpus: &Corpus,
    out: impl AsRef<Path>,
) -> Result<SweepOutcome> {
    base.validate()?;
    sweep_with(base, model, k_values, out.as_ref(), |c| run_pipeline_on(c, corpus, None))
}
