//! Clustering of reduced document vectors.

mod dbscan;
mod kmeans;
mod ward;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use dbscan::dbscan;
pub use kmeans::{kmeans, kmeanspp_init, lloyd, KMeansParams, LloydRun};
pub use ward::{agglomerative, ward_merges, Merge};

/// Label of points that belong to no cluster (density methods only).
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidSet {
    pub centroids: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Per-document label in `[0, n_clusters)` or [`NOISE`].
    pub labels: Vec<i64>,
    pub n_clusters: usize,
    /// Sum of squared distances to the assigned centroid (k-means only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    pub n_iter: usize,
}

impl ClusterAssignment {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Fraction of points whose cluster's majority reference label matches their
/// own. Noise points count as misses.
pub fn purity(labels: &[i64], reference: &[usize]) -> f64 {
    use std::collections::HashMap;
    assert_eq!(labels.len(), reference.len());
    if labels.is_empty() {
        return 1.0;
    }
    let mut table: HashMap<i64, HashMap<usize, usize>> = HashMap::new();
    for (&l, &r) in labels.iter().zip(reference) {
        if l != NOISE {
            *table.entry(l).or_default().entry(r).or_default() += 1;
        }
    }
    let hits: usize = table
        .values()
        .map(|counts| counts.values().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / labels.len() as f64
}
