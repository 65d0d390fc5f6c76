use std::collections::VecDeque;

use ndarray::ArrayView2;

use super::{sq_dist, ClusterAssignment, NOISE};
use crate::{Error, Result};

/// DBSCAN with Euclidean distance. A point is core when at least
/// `min_samples` points (itself included) lie within `eps`. Clusters are
/// numbered in order of their first core point; a border point joins the
/// first cluster that reaches it.
pub fn dbscan(y: ArrayView2<f64>, eps: f64, min_samples: usize) -> Result<ClusterAssignment> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    if min_samples == 0 {
        return Err(Error::invalid("min_samples must be >= 1"));
    }
    let n = y.nrows();
    let pts: Vec<Vec<f64>> = y.rows().into_iter().map(|r| r.to_vec()).collect();
    let eps2 = eps * eps;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| sq_dist(&pts[i], &pts[j]) <= eps2).collect())
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_samples).collect();

    const UNSEEN: i64 = -2;
    let mut labels = vec![UNSEEN; n];
    let mut cluster = 0i64;
    for start in 0..n {
        if labels[start] != UNSEEN {
            continue;
        }
        if !core[start] {
            labels[start] = NOISE;
            continue;
        }
        labels[start] = cluster;
        let mut queue: VecDeque<usize> = neighbors[start].iter().copied().collect();
        while let Some(p) = queue.pop_front() {
            if labels[p] == NOISE {
                labels[p] = cluster;
            }
            if labels[p] != UNSEEN {
                continue;
            }
            labels[p] = cluster;
            if core[p] {
                queue.extend(neighbors[p].iter().copied());
            }
        }
        cluster += 1;
    }
    Ok(ClusterAssignment {
        labels,
        n_clusters: cluster as usize,
        inertia: None,
        n_iter: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_points_one_cluster() {
        let y = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        let a = dbscan(y.view(), 0.3, 4).unwrap();
        assert_eq!(a.labels, [0, 0, 0, 0]);
        assert_eq!(a.noise_count(), 0);
    }

    #[test]
    fn isolated_point_is_noise() {
        let y = array![[0.0], [0.1], [0.2], [5.0]];
        let a = dbscan(y.view(), 0.3, 2).unwrap();
        assert_eq!(a.labels, [0, 0, 0, NOISE]);
        assert_eq!(a.n_clusters, 1);
    }

    #[test]
    fn border_point_seen_before_its_core_is_not_noise() {
        // point 0 is border (only 2 neighbours), point 1 is core
        let y = array![[0.0], [0.25], [0.5], [0.55]];
        let a = dbscan(y.view(), 0.3, 3).unwrap();
        assert_eq!(a.labels, [0, 0, 0, 0]);
    }

    #[test]
    fn invalid_params() {
        let y = array![[0.0]];
        assert!(dbscan(y.view(), 0.0, 1).is_err());
        assert!(dbscan(y.view(), 1.0, 0).is_err());
    }
}
