use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::builders::Scalar;
use super::combinatorics::binom_big;

/// Row-major dense matrix over any scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone + Zero> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }
}

impl<T: Clone + Zero + One> DenseMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }
}

impl<T> DenseMatrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> DenseMatrix<T> {
    /// Generator from off-diagonal rates, duplicates summed.
    pub fn generator(n: usize, rates: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut m = Self::zeros(n, n);
        for (i, j, r) in rates {
            if i >= n || j >= n {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside {n}x{n}"
                )));
            }
            if i == j {
                continue;
            }
            m[(i, j)] = m[(i, j)].clone() + r.clone();
            m[(i, i)] = m[(i, i)].clone() - r;
        }
        Ok(m)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }
}

impl DenseMatrix<f64> {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl DenseMatrix<BigRational> {
    pub fn to_f64(&self) -> DenseMatrix<f64> {
        self.map(|x| x.to_f64().unwrap_or(f64::NAN))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

fn big(x: num_bigint::BigUint) -> BigInt {
    BigInt::from(x)
}

/// `T` on `[N]_{0,Delta}` in exact arithmetic: index 0 is state 0, `1..=N`
/// line counts, `N+1` is `Delta`.
pub fn build_t_exact(n: usize) -> DenseMatrix<BigRational> {
    let dim = n + 2;
    let mut t = DenseMatrix::zeros(dim, dim);
    t[(0, 0)] = BigRational::one();
    t[(n + 1, n + 1)] = BigRational::one();
    for j in 1..=n {
        let denom = big(binom_big(n as u64, j as u64));
        for k in j..=n {
            let num = big(binom_big(k as u64 - 1, j as u64 - 1));
            t[(j, k)] = BigRational::new(num, denom.clone());
        }
    }
    t
}

pub fn build_t_inv_exact(n: usize) -> DenseMatrix<BigRational> {
    let dim = n + 2;
    let mut t = DenseMatrix::zeros(dim, dim);
    t[(0, 0)] = BigRational::one();
    t[(n + 1, n + 1)] = BigRational::one();
    for j in 1..=n {
        for k in j..=n {
            let mut v = big(binom_big(n as u64, k as u64) * binom_big(k as u64 - 1, j as u64 - 1));
            if (j + k) % 2 == 1 {
                v = -v;
            }
            t[(j, k)] = BigRational::from_integer(v);
        }
    }
    t
}

pub fn build_t(n: usize) -> DenseMatrix<f64> {
    build_t_exact(n).to_f64()
}

pub fn build_t_inv(n: usize) -> DenseMatrix<f64> {
    build_t_inv_exact(n).to_f64()
}

/// `T^{-1} Q T`.
pub fn conjugate<S: Scalar>(
    q: &DenseMatrix<S>,
    t: &DenseMatrix<S>,
    t_inv: &DenseMatrix<S>,
) -> Result<DenseMatrix<S>> {
    if q.rows != q.cols
        || t.rows != q.rows
        || t.cols != q.rows
        || t_inv.rows != q.rows
        || t_inv.cols != q.rows
    {
        return Err(Error::Dimension(format!(
            "conjugate needs square conformable matrices, got Q {}x{}, T {}x{}, T^-1 {}x{}",
            q.rows, q.cols, t.rows, t.cols, t_inv.rows, t_inv.cols
        )));
    }
    t_inv.matmul(q)?.matmul(t)
}
