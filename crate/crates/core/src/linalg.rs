//! Dense square matrices and LU with partial pivoting, sized for the
//! Newton polishes on a few hundred unknowns.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: T, other: &DenseMatrix<T>) {
        debug_assert_eq!(self.n, other.n);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Returns a copy bordered by one extra row and column.
    pub fn bordered(&self, col: &[T], row: &[T], corner: T) -> Self {
        let n = self.n + 1;
        let mut out = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j));
            }
            out.set(i, self.n, col[i]);
            out.set(self.n, i, row[i]);
        }
        out.set(self.n, self.n, corner);
        out
    }

    pub fn lu(self) -> Option<Lu<T>> {
        Lu::factor(self)
    }
}

/// Packed LU factors with the row permutation.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(m: DenseMatrix<T>) -> Option<Self> {
        let n = m.n;
        let mut a = m.data;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(T::zero(), |s, v| s.max(v.abs()));
        if scale == T::zero() && n > 0 {
            return None;
        }
        let tiny = scale * T::epsilon() * T::of(n.max(1) as f64);
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / d;
                a[i * n + k] = l;
                if l != T::zero() {
                    for j in k + 1..n {
                        let u = a[k * n + j];
                        a[i * n + j] -= l * u;
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}
