use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Width of the RBF kernel `exp(-gamma ‖x − y‖²)`.
    pub gamma: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma: 15.0,
        }
    }
}

impl KernelConfig {
    pub fn rbf(gamma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma,
        }
    }

    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            gamma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Rbf && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("rbf gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }

    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            KernelKind::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-self.gamma * d2).exp()
            }
        }
    }
}

/// Kernel block `K[i][j] = k(a_i, b_j)`.
pub fn cross_kernel(a: ArrayView2<f64>, b: ArrayView2<f64>, cfg: &KernelConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    if a.ncols() != b.ncols() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let a = a.as_standard_layout();
    let b = b.as_standard_layout();
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = Array2::zeros((n, m));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let ai = a.row(i);
            let ai = ai.as_slice().expect("standard layout");
            for j in 0..m {
                let bj = b.row(j);
                row[j] = cfg.eval(ai, bj.as_slice().expect("standard layout"));
            }
        });
    Ok(out)
}

/// Gram matrix of the rows of `x`. Symmetric by construction; the RBF
/// diagonal is exactly 1.
pub fn compute_kernel(x: ArrayView2<f64>, cfg: &KernelConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    let x = x.as_standard_layout();
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    k.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = x.row(i);
            let xi = xi.as_slice().expect("standard layout");
            for j in i..n {
                let xj = x.row(j);
                row[j] = cfg.eval(xi, xj.as_slice().expect("standard layout"));
            }
        });
    for i in 0..n {
        for j in 0..i {
            k[[i, j]] = k[[j, i]];
        }
    }
    Ok(k)
}

/// Row means and grand mean of a training kernel, needed to center both the
/// training kernel and out-of-sample kernel rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCentering {
    pub col_means: Array1<f64>,
    pub grand_mean: f64,
}

impl KernelCentering {
    pub fn fit(k: ArrayView2<f64>) -> Self {
        let col_means = k.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(0));
        let grand_mean = col_means.mean().unwrap_or(0.0);
        Self {
            col_means,
            grand_mean,
        }
    }

    /// `K' = K − 1K − K1 + 1K1` with `1` the matrix of `1/N`.
    pub fn center_train(&self, k: ArrayView2<f64>) -> Array2<f64> {
        let n = k.nrows();
        let mut out = k.to_owned();
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] += self.grand_mean - self.col_means[i] - self.col_means[j];
            }
        }
        out
    }

    /// Centers kernel rows `k(x_new, x_i)` against the training set.
    pub fn center_rows(&self, rows: ArrayView2<f64>) -> Array2<f64> {
        let mut out = rows.to_owned();
        for mut r in out.axis_iter_mut(Axis(0)) {
            let m = r.mean().unwrap_or(0.0);
            r.iter_mut()
                .zip(self.col_means.iter())
                .for_each(|(v, c)| *v += self.grand_mean - m - c);
        }
        out
    }
}

/// Double-centers a symmetric kernel matrix so every row and column sums to 0.
pub fn center_kernel(k: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (r, c) = k.dim();
    if r != c {
        return Err(Error::invalid(format!("kernel is {r}x{c}, not square")));
    }
    Ok(KernelCentering::fit(k).center_train(k))
}
