use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square, dense, row-major complex matrix.
///
/// Entry `(row, col)` is the amplitude for transfer from mode `col` into mode `row`,
/// so `m.mul_vec(psi)` is the action of the operator on a state.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        CMatrix { dim, data }
    }

    /// Builds from nested rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::domain("matrix rows must form a square array"));
        }
        let m = CMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::domain("matrix has non-finite entries"))
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self - shift * I`
    pub fn shifted(&self, shift: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] -= shift;
        }
        m
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|i| (i..n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// Entrywise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>` with the first argument conjugated.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalized(v: &[C64]) -> Vec<C64> {
    let n = vec_norm(v);
    if n == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|z| z / n).collect()
}

/// Orthonormalizes `vectors` in place with two passes of modified Gram-Schmidt,
/// dropping vectors whose remaining norm falls below `drop_tol` times their original norm.
pub fn orthonormalize(vectors: &mut Vec<Vec<C64>>, drop_tol: f64) {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for v in vectors.drain(..) {
        let original = vec_norm(&v);
        let mut w = v;
        for _ in 0..2 {
            for q in &out {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let n = vec_norm(&w);
        if original > 0.0 && n > drop_tol * original {
            out.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    *vectors = out;
}

/// Solves `a x = b` for every column of `rhs` by LU with partial pivoting.
///
/// Returns `None` when a pivot is exactly zero.
pub(crate) fn lu_solve_many(a: &CMatrix, rhs: &[Vec<C64>]) -> Option<Vec<Vec<C64>>> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    let solve = |b: &Vec<C64>| {
        let mut x: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= lu[(i, i)];
        }
        x
    };
    Some(rhs.iter().map(solve).collect())
}

/// Numerical rank: number of diagonal entries of a column-pivoted Householder QR
/// whose magnitude exceeds `abs_tol`.
pub fn numerical_rank(m: &CMatrix, abs_tol: f64) -> usize {
    let n = m.dim();
    let mut a = m.clone();
    let mut col_norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm_sqr()).sum())
        .collect();
    let mut rank = 0;
    for k in 0..n {
        // pivot: largest remaining column
        let (p, _) = (k..n)
            .map(|j| (j, col_norms[j]))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if p != k {
            for i in 0..n {
                let tmp = a[(i, k)];
                a[(i, k)] = a[(i, p)];
                a[(i, p)] = tmp;
            }
            col_norms.swap(k, p);
        }
        let norm: f64 = (k..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= abs_tol {
            break;
        }
        rank += 1;
        let x0 = a[(k, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = vec_norm(&v);
        if vn > 0.0 {
            for z in v.iter_mut() {
                *z /= vn;
            }
            for j in k..n {
                let s: C64 = v
                    .iter()
                    .enumerate()
                    .map(|(r, vr)| vr.conj() * a[(k + r, j)])
                    .sum();
                for (r, vr) in v.iter().enumerate() {
                    a[(k + r, j)] -= 2.0 * vr * s;
                }
            }
        }
        for j in k + 1..n {
            col_norms[j] = (k + 1..n).map(|i| a[(i, j)].norm_sqr()).sum();
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn from_rows_rejects_ragged_and_nan() {
        assert!(CMatrix::from_rows(&[vec![c(1.0)], vec![c(1.0), c(2.0)]]).is_err());
        assert!(CMatrix::from_real_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn rank_of_jordan_block_and_identity() {
        let j = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(numerical_rank(&j, 1e-12), 1);
        assert_eq!(numerical_rank(&CMatrix::identity(5), 1e-12), 5);
        assert_eq!(numerical_rank(&CMatrix::zeros(3), 1e-12), 0);
    }

    #[test]
    fn lu_solves_small_system() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0), C64::new(2.0, 1.0)],
            vec![c(3.0), c(1.0)],
        ])
        .unwrap();
        let b = vec![c(1.0), c(2.0)];
        let x = &lu_solve_many(&a, std::slice::from_ref(&b)).unwrap()[0];
        let ax = a.mul_vec(x);
        assert!(ax.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-14));
        assert!(lu_solve_many(&CMatrix::zeros(2), &[b]).is_none());
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let mut vs = vec![
            vec![c(1.0), c(1.0), c(0.0)],
            vec![c(2.0), c(2.0), c(0.0)],
            vec![c(0.0), c(1.0), c(1.0)],
        ];
        orthonormalize(&mut vs, 1e-10);
        assert_eq!(vs.len(), 2);
        assert!(inner(&vs[0], &vs[1]).norm() < 1e-14);
    }
}
