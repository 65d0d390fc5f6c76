//! Experiment runner: single runs, comparison grids and topic-count sweeps.

pub mod config;
mod grid;
mod pipeline;
pub mod svg;
mod sweep;

pub use config::{merge_toml, ClusterMethod, EmbeddingSource, ModelKind, PipelineConfig};
pub use grid::{grid_run, grid_run_on, write_grid_csv, GridOutcome, GridRow, GRID_CSV_HEADER};
pub use pipeline::{run_pipeline, run_pipeline_on, RunReport, StageTiming, TopicMode};
pub use sweep::{topic_sweep, topic_sweep_on, SweepOutcome, SweepPoint, SWEEP_CSV_HEADER};
