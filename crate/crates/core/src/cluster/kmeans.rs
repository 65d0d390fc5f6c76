use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sq_dist, CentroidSet, ClusterAssignment};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub n_init: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
            seed: 0,
        }
    }
}

fn rows(y: ArrayView2<f64>) -> Vec<Vec<f64>> {
    y.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// k-means++ seeding: the first centroid is uniform over the points, each
/// further one is drawn with probability proportional to the squared distance
/// to the nearest centroid chosen so far.
pub fn kmeanspp_init(y: ArrayView2<f64>, k: usize, seed: u64) -> Result<CentroidSet> {
    let n = y.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k={k} must be in 1..={n}")));
    }
    let pts = rows(y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![false; n];
    let mut picks = Vec::with_capacity(k);

    let first = rng.random_range(0..n);
    chosen[first] = true;
    picks.push(first);
    let mut d2: Vec<f64> = pts.iter().map(|p| sq_dist(p, &pts[first])).collect();

    while picks.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    acc += d;
                    pick = Some(i);
                    if acc > target {
                        break;
                    }
                }
            }
            pick.expect("positive total has a positive entry")
        } else {
            // Every remaining point coincides with a centroid.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        picks.push(next);
        for (i, p) in pts.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &pts[next]));
        }
    }
    let d = y.ncols();
    let mut centroids = Array2::zeros((k, d));
    for (row, &i) in picks.iter().enumerate() {
        centroids.row_mut(row).assign(&y.row(i));
    }
    Ok(CentroidSet { centroids })
}

/// Outcome of one Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    pub n_iter: usize,
    /// Inertia after the initial assignment and after every iteration.
    pub inertia_trace: Vec<f64>,
}

fn assign(pts: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, cent) in centroids.iter().enumerate() {
            let d = sq_dist(p, cent);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
        inertia += best_d;
    }
    inertia
}

/// Lloyd iterations from the given centroids until no label changes or
/// `max_iter` updates have run. An empty cluster's centroid is moved to the
/// point farthest from its own centroid.
pub fn lloyd(y: ArrayView2<f64>, init: &CentroidSet, max_iter: usize) -> Result<LloydRun> {
    let (n, d) = y.dim();
    let k = init.centroids.nrows();
    if k == 0 || k > n || init.centroids.ncols() != d {
        return Err(Error::invalid("centroid set does not fit the data"));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be >= 1"));
    }
    let pts = rows(y);
    let mut centroids = rows(init.centroids.view());
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut inertia = assign(&pts, &centroids, &mut labels, &mut dists);
    let mut trace = vec![inertia];
    let mut n_iter = 0;

    while n_iter < max_iter {
        n_iter += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in pts.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centroids[c] = sums[c].iter().map(|s| s * inv).collect();
            } else {
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .fold(None::<usize>, |best, i| match best {
                        Some(b) if dists[b] >= dists[i] => Some(b),
                        _ => Some(i),
                    })
                    .expect("k <= n leaves a free point");
                taken[far] = true;
                centroids[c] = pts[far].clone();
            }
        }
        let prev = labels.clone();
        inertia = assign(&pts, &centroids, &mut labels, &mut dists);
        trace.push(inertia);
        if labels == prev {
            break;
        }
    }

    let mut cm = Array2::zeros((k, d));
    for (c, row) in centroids.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            cm[[c, j]] = *v;
        }
    }
    Ok(LloydRun {
        labels,
        centroids: cm,
        inertia,
        n_iter,
        inertia_trace: trace,
    })
}

fn restart_seed(seed: u64, run: usize) -> u64 {
    let mut z = seed ^ (run as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// k-means with k-means++ seeding, `n_init` restarts, keeping the run with the
/// smallest inertia (earliest on ties).
pub fn kmeans(
    y: ArrayView2<f64>,
    k: usize,
    params: &KMeansParams,
) -> Result<(ClusterAssignment, CentroidSet)> {
    if params.n_init == 0 {
        return Err(Error::invalid("n_init must be >= 1"));
    }
    let mut best: Option<LloydRun> = None;
    for run in 0..params.n_init {
        let init = kmeanspp_init(y, k, restart_seed(params.seed, run))?;
        let r = lloyd(y, &init, params.max_iter)?;
        if best.as_ref().is_none_or(|b| r.inertia < b.inertia) {
            best = Some(r);
        }
    }
    let best = best.expect("n_init >= 1");
    Ok((
        ClusterAssignment {
            labels: best.labels.iter().map(|&l| l as i64).collect(),
            n_clusters: k,
            inertia: Some(best.inertia),
            n_iter: best.n_iter,
        },
        CentroidSet {
            centroids: best.centroids,
        },
    ))
}
