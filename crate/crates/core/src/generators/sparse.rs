use crate::error::{Error, Result};

use super::siegmund::DenseMatrix;

/// Compressed-row sparse matrix with canonical row-major ordering. Built as a
/// generator, the diagonal of every row is always stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Generator from off-diagonal rates; duplicates are summed, diagonal set
    /// to minus the row sum.
    pub fn generator(
        n: usize,
        rates: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, r) in rates {
            if i >= n || j >= n {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside {n}x{n}"
                )));
            }
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Numerical(format!("rate {r} at ({i}, {j})")));
            }
            if i != j && r > 0.0 {
                triplets.push((i, j, r));
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len() + n);
        let mut vals = Vec::with_capacity(triplets.len() + n);
        let mut t = 0;
        row_ptr.push(0);
        for i in 0..n {
            let start = cols.len();
            let mut diag_at = None;
            let mut exit = 0.0;
            while t < triplets.len() && triplets[t].0 == i {
                let (_, j, r) = triplets[t];
                t += 1;
                if diag_at.is_none() && j > i {
                    diag_at = Some(cols.len());
                    cols.push(i);
                    vals.push(0.0);
                }
                if cols.len() > start && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += r;
                } else {
                    cols.push(j);
                    vals.push(r);
                }
                exit += r;
            }
            let d = match diag_at {
                Some(d) => d,
                None => {
                    cols.push(i);
                    vals.push(0.0);
                    cols.len() - 1
                }
            };
            vals[d] = -exit;
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b]
            .iter()
            .copied()
            .zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(p) => self.vals[a + p],
            Err(_) => 0.0,
        }
    }

    /// `y = x A` for a row vector `x`.
    pub fn left_mul_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[p]] += xi * self.vals[p];
            }
        }
    }

    /// `y = A x` for a column vector `x`.
    pub fn right_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix<f64> {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}
