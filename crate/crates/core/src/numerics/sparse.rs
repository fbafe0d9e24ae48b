use num_traits::{Float, Zero};
use super::scalar::Scalar;

/// Compressed sparse row matrix. Duplicate triplet indices are summed on
/// construction, so the assembled matrix always equals the sum of the entries.
#[derive(Debug, Clone)]
pub struct SparseOperator<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> SparseOperator<T> {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet index out of range");
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&i| (triplets[i].0, triplets[i].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &i in &order {
            let (r, c, v) = triplets[i];
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<(usize, usize, T)> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut s = T::zero();
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[i] * x[self.col_idx[i]];
            }
            y[r] = s;
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// y = conj(A)^t x.
    pub fn matvec_adjoint(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(T::zero());
        for r in 0..self.nrows {
            let xr = x[r];
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[i]] += self.vals[i].conj() * xr;
            }
        }
    }

    pub fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.ncols];
        self.matvec_adjoint(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<T> {
        let n = self.nrows.min(self.ncols);
        let mut d = vec![T::zero(); n];
        for r in 0..n {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[i] == r {
                    d[r] += self.vals[i];
                }
            }
        }
        d
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.vals {
            *v *= s;
        }
    }

    /// A + B.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for m in [self, other] {
            for r in 0..m.nrows {
                for i in m.row_ptr[r]..m.row_ptr[r + 1] {
                    t.push((r, m.col_idx[i], m.vals[i]));
                }
            }
        }
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// A + diag(d).
    pub fn add_diagonal(&self, d: &[T]) -> Self {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(d.len(), self.nrows);
        let mut t = Vec::with_capacity(self.nnz() + d.len());
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                t.push((r, self.col_idx[i], self.vals[i]));
            }
            t.push((r, r, d[r]));
        }
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, T)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                t.push((r, self.col_idx[i], self.vals[i]));
            }
        }
        t
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows * self.ncols];
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                d[r * self.ncols + self.col_idx[i]] += self.vals[i];
            }
        }
        d
    }

    /// Max |A - conj(A)^t| entry, as a cheap hermitian-structure probe.
    pub fn hermitian_defect(&self) -> T::R {
        if self.nrows != self.ncols {
            return T::R::infinity();
        }
        let mut map = std::collections::HashMap::new();
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                map.insert((r, self.col_idx[i]), self.vals[i]);
            }
        }
        let mut worst = T::R::zero();
        for (&(r, c), &v) in &map {
            let w = map.get(&(c, r)).copied().unwrap_or_else(T::zero);
            let d = (v - w.conj()).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T::R {
        self.vals
            .iter()
            .map(|v| v.abs())
            .fold(T::R::zero(), |a, b| if b > a { b } else { a })
    }
}
