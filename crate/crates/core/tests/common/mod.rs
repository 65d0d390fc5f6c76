//! Brute-force reference implementations used as test oracles. They share no
//! code with the library beyond plain data types.
#![allow(dead_code)]

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(rows: usize, cols: usize, lo: f64, hi: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(lo..hi))
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
/// returned in descending order with matching eigenvector columns.
pub fn jacobi_eigen(a: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let vals = order.iter().map(|&i| m[[i, i]]).collect();
    let vecs = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (vals, vecs)
}

pub enum OracleKernel {
    Linear,
    Rbf(f64),
}

/// Kernel PCA straight from the definitions: explicit kernel loops, centering
/// by `H K H` with `H = I - 11ᵀ/N`, Jacobi eigenpairs, `α = u/√μ`, and
/// projections `K' α`.
pub fn brute_kpca(x: ArrayView2<f64>, k: usize, kernel: OracleKernel) -> Array2<f64> {
    let n = x.nrows();
    let kmat = Array2::from_shape_fn((n, n), |(i, j)| {
        let (a, b) = (x.row(i), x.row(j));
        match kernel {
            OracleKernel::Linear => a.dot(&b),
            OracleKernel::Rbf(g) => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
                (-g * d2).exp()
            }
        }
    });
    let h = Array2::<f64>::eye(n) - Array2::<f64>::from_elem((n, n), 1.0 / n as f64);
    let kc = h.dot(&kmat).dot(&h);
    let kc = (&kc + &kc.t()) * 0.5;
    let (vals, vecs) = jacobi_eigen(kc.view());
    let mut alphas = Array2::zeros((n, k));
    for c in 0..k {
        let s = vals[c].sqrt();
        for r in 0..n {
            alphas[[r, c]] = vecs[[r, c]] / s;
        }
    }
    kc.dot(&alphas)
}

/// Linear PCA scores from the covariance eigenvectors (Jacobi).
pub fn brute_pca(x: ArrayView2<f64>, k: usize) -> Array2<f64> {
    let n = x.nrows() as f64;
    let mean = x.sum_axis(ndarray::Axis(0)) / n;
    let c = &x - &mean;
    let cov = c.t().dot(&c) / n;
    let (_, vecs) = jacobi_eigen(cov.view());
    c.dot(&vecs.slice(ndarray::s![.., ..k]))
}

/// One-sided Jacobi (Hestenes) SVD. Returns `(U, σ, V)` with σ descending.
pub fn jacobi_svd(m: ArrayView2<f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (rows, cols) = m.dim();
    let mut a = m.to_owned();
    let mut v = Array2::<f64>::eye(cols);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = a.column(p).dot(&a.column(p));
                let beta: f64 = a.column(q).dot(&a.column(q));
                let gamma: f64 = a.column(p).dot(&a.column(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let (ap, aq) = (a[[r, p]], a[[r, q]]);
                    a[[r, p]] = c * ap - s * aq;
                    a[[r, q]] = s * ap + c * aq;
                }
                for r in 0..cols {
                    let (vp, vq) = (v[[r, p]], v[[r, q]]);
                    v[[r, p]] = c * vp - s * vq;
                    v[[r, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sig: Vec<f64> = (0..cols).map(|c| a.column(c).dot(&a.column(c)).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let u = Array2::from_shape_fn((rows, cols), |(r, c)| {
        let s = sig[order[c]];
        if s > 0.0 {
            a[[r, order[c]]] / s
        } else {
            0.0
        }
    });
    let vs = Array2::from_shape_fn((cols, cols), |(r, c)| v[[r, order[c]]]);
    (u, order.iter().map(|&i| sig[i]).collect(), vs)
}

pub fn corr(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.sum() / n, b.sum() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Largest elementwise difference after aligning each column's sign.
pub fn max_diff_up_to_sign(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    (0..a.ncols())
        .map(|c| {
            let plus = a.column(c).iter().zip(b.column(c)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let minus = a.column(c).iter().zip(b.column(c)).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
            plus.min(minus)
        })
        .fold(0.0, f64::max)
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid(x: ArrayView2<f64>, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; x.ncols()];
    for &i in members {
        for (cj, xj) in c.iter_mut().zip(x.row(i)) {
            *cj += xj;
        }
    }
    c.iter_mut().for_each(|v| *v /= members.len() as f64);
    c
}

/// Exhaustive Ward: at every step merge the pair minimizing
/// `|A||B|/(|A|+|B|) ‖μA − μB‖²`. Returns the partition at `k` clusters (each
/// sorted, ordered by smallest member) and the merge heights
/// `sqrt(2 Δ)`.
pub fn brute_ward(x: ArrayView2<f64>, k: usize) -> (Vec<Vec<usize>>, Vec<f64>) {
    let mut clusters: Vec<Vec<usize>> = (0..x.nrows()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let delta = na * nb / (na + nb)
                    * sq(&centroid(x, &clusters[a]), &centroid(x, &clusters[b]));
                if delta < best.0 {
                    best = (delta, a, b);
                }
            }
        }
        let (delta, a, b) = best;
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        heights.push((2.0 * delta).sqrt());
    }
    clusters.sort_by_key(|c| c[0]);
    (clusters, heights)
}

/// Groups point indices by label (noise excluded), in the same canonical
/// order as [`brute_ward`].
pub fn partition(labels: &[i64]) -> Vec<Vec<usize>> {
    let mut map: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            map.entry(l).or_default().push(i);
        }
    }
    let mut out: Vec<Vec<usize>> = map.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

/// DBSCAN reference: core points are joined by union-find when within `eps`.
/// Returns `(core flags, core partition, noise set)`. Border points are left to
/// the caller, since their cluster depends on visiting order.
pub fn brute_dbscan(x: ArrayView2<f64>, eps: f64, min_samples: usize) -> (Vec<bool>, Vec<Vec<usize>>, Vec<usize>) {
    let n = x.nrows();
    let close = |i: usize, j: usize| {
        let d2: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= eps * eps
    };
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| close(i, j)).count() >= min_samples).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if core[i] && core[j] && close(i, j) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in (0..n).filter(|&i| core[i]) {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
    parts.sort_by_key(|c| c[0]);
    let noise = (0..n)
        .filter(|&i| !core[i] && !(0..n).any(|j| core[j] && close(i, j)))
        .collect();
    (core, parts, noise)
}

/// Whether some run of 1 to 3 consecutive tokens in `window`, joined by `_`,
/// spells `term`.
fn window_has(window: &[String], term: &str) -> bool {
    (0..window.len()).any(|s| (1..=3).any(|n| s + n <= window.len() && window[s..s + n].join("_") == term))
}

/// Sliding windows of width `w`, stride 1; shorter documents are one window.
pub fn brute_windows(docs: &[Vec<String>], w: Option<usize>) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for d in docs {
        match w {
            Some(w) if d.len() > w => {
                for s in 0..=(d.len() - w) {
                    out.push(d[s..s + w].to_vec());
                }
            }
            _ => out.push(d.clone()),
        }
    }
    out
}

/// c_v per topic by explicit window enumeration.
pub fn brute_cv(topics: &[Vec<String>], docs: &[Vec<String>], w: usize, eps: f64) -> Vec<f64> {
    let windows = brute_windows(docs, Some(w));
    let total = windows.len() as f64;
    topics
        .iter()
        .map(|topic| {
            let terms: Vec<&String> = topic
                .iter()
                .filter(|t| windows.iter().any(|win| window_has(win, t)))
                .collect();
            let p = |a: &str| windows.iter().filter(|win| window_has(win, a)).count() as f64 / total;
            let pj = |a: &str, b: &str| {
                windows
                    .iter()
                    .filter(|win| window_has(win, a) && window_has(win, b))
                    .count() as f64
                    / total
            };
            let vecs: Vec<Vec<f64>> = terms
                .iter()
                .map(|a| {
                    terms
                        .iter()
                        .map(|b| {
                            let joint = pj(a, b) + eps;
                            let d = -joint.ln();
                            if d == 0.0 {
                                0.0
                            } else {
                                (joint / (p(a) * p(b))).ln() / d
                            }
                        })
                        .collect()
                })
                .collect();
            let sum: Vec<f64> = (0..terms.len()).map(|j| vecs.iter().map(|v| v[j]).sum()).collect();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            vecs.iter()
                .map(|v| {
                    let (na, nb) = (norm(v), norm(&sum));
                    if na == 0.0 || nb == 0.0 {
                        0.0
                    } else {
                        v.iter().zip(&sum).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
                    }
                })
                .sum::<f64>()
                / terms.len() as f64
        })
        .collect()
}

/// UMass per topic by direct document counting.
pub fn brute_umass(topics: &[Vec<String>], docs: &[Vec<String>]) -> Vec<f64> {
    let d = |a: &str| docs.iter().filter(|doc| window_has(doc, a)).count() as f64;
    let d2 = |a: &str, b: &str| docs.iter().filter(|doc| window_has(doc, a) && window_has(doc, b)).count() as f64;
    topics
        .iter()
        .map(|topic| {
            let terms: Vec<&String> = topic.iter().filter(|t| d(t) > 0.0).collect();
            let mut s = 0.0;
            let mut c = 0.0;
            for m in 1..terms.len() {
                for l in 0..m {
                    s += ((d2(terms[m], terms[l]) + 1.0) / d(terms[l])).ln();
                    c += 1.0;
                }
            }
            s / c
        })
        .collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best one-to-one matching of `k` predicted labels to `k` reference labels,
/// scored as the fraction of documents whose matched label agrees.
pub fn best_permutation_accuracy(pred: &[i64], reference: &[usize], k: usize) -> f64 {
    let mut table = vec![vec![0usize; k]; k];
    for (&p, &r) in pred.iter().zip(reference) {
        if p >= 0 && (p as usize) < k && r < k {
            table[p as usize][r] += 1;
        }
    }
    permutations(k)
        .iter()
        .map(|perm| (0..k).map(|i| table[i][perm[i]]).sum::<usize>())
        .max()
        .unwrap_or(0) as f64
        / pred.len() as f64
}

/// Best one-to-one matching of learned topics to planted vocabularies, scored
/// as the mean fraction of each topic's terms that lie in its matched
/// vocabulary.
pub fn best_permutation_term_purity(topics: &[Vec<String>], planted: &[Vec<String>]) -> f64 {
    let k = planted.len();
    assert_eq!(topics.len(), k);
    let hit = |t: usize, p: usize| {
        topics[t].iter().filter(|w| planted[p].contains(w)).count() as f64 / topics[t].len() as f64
    };
    permutations(k)
        .iter()
        .map(|perm| (0..k).map(|t| hit(t, perm[t])).sum::<f64>() / k as f64)
        .fold(0.0, f64::max)
}
