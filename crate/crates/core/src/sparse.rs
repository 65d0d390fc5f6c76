//! Compressed sparse row storage for document-term matrices.

use serde::{Deserialize, Serialize};

/// Row-major sparse matrix. Column indices are strictly increasing within a
/// row and no explicit zero is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix<T> {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Copy + Default + PartialEq> CsrMatrix<T> {
    /// Builds a matrix from per-row `(column, value)` lists. Entries are
    /// sorted by column; zero values are dropped.
    ///
    /// Panics if a column index is out of range or repeated within a row.
    pub fn from_rows<I>(n_cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = Vec<(usize, T)>>,
    {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut prev = None;
            for (c, v) in row {
                assert!(c < n_cols, "column {c} out of range ({n_cols} columns)");
                assert!(prev != Some(c), "duplicate column {c} in row");
                prev = Some(c);
                if v != T::default() {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => T::default(),
        }
    }

    pub fn map<U, F>(&self, mut f: F) -> CsrMatrix<U>
    where
        U: Copy + Default + PartialEq,
        F: FnMut(usize, usize, T) -> U,
    {
        CsrMatrix::from_rows(
            self.n_cols,
            (0..self.n_rows()).map(|i| self.row(i).map(|(j, v)| (j, f(i, j, v))).collect()),
        )
    }
}

impl<T: Copy + Default + PartialEq + Into<f64>> CsrMatrix<T> {
    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let mut out = ndarray::Array2::zeros((self.n_rows(), self.n_cols));
        for i in 0..self.n_rows() {
            for (j, v) in self.row(i) {
                out[[i, j]] = v.into();
            }
        }
        out
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v.into() * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`
    pub fn rmatvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v.into() * xi;
            }
        }
    }
}
