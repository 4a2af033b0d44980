//! Small dense symmetric systems (at most 6×6 here).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix rows must be square");
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i] * self[(i, j)] * v[j];
            }
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    fn cholesky(&self) -> Result<Vec<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::DegenerateDesign(format!(
                    "normal-equations matrix is not positive definite (pivot {j})"
                )));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(l)
    }

    fn solve_factored(l: &[T], n: usize, b: &[T]) -> Vec<T> {
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let v = l[i * n + k] * y[k];
                y[i] -= v;
            }
            y[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let v = l[k * n + i] * y[k];
                y[i] -= v;
            }
            y[i] /= l[i * n + i];
        }
        y
    }

    /// Solves `M x = b` for symmetric positive definite `M`.
    pub fn solve_spd(&self, b: &[T]) -> Result<Vec<T>> {
        let l = self.cholesky()?;
        Ok(Self::solve_factored(&l, self.n, b))
    }

    pub fn inverse_spd(&self) -> Result<Self> {
        let l = self.cholesky()?;
        let n = self.n;
        let mut inv = Self::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = Self::solve_factored(&l, n, &e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // symmetrize rounding noise
        for i in 0..n {
            for j in 0..i {
                let avg = (inv[(i, j)] + inv[(j, i)]) * T::lit(0.5);
                inv[(i, j)] = avg;
                inv[(j, i)] = avg;
            }
        }
        Ok(inv)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_spd() {
        let m = Matrix::<f64>::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ]);
        let inv = m.inverse_spd().unwrap();
        let id = m.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - e).abs() < 1e-14);
            }
        }
        let x = m.solve_spd(&[1.0, 2.0, 3.0]).unwrap();
        assert!((4.0 * x[0] + x[1] + 0.5 * x[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let m = Matrix::<f64>::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(m.inverse_spd(), Err(Error::DegenerateDesign(_))));
    }
}
