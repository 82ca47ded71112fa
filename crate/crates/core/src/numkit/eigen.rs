use std::cmp::Ordering;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::{lu_solve_many, normalized, numerical_rank, orthonormalize, vec_norm, CMatrix};
use super::schur::{schur, Schur};
use crate::error::{Error, Result};

/// Default relative tolerance (multiplies `1 + ||M||_F`).
pub const DEFAULT_TOL: f64 = 1e-10;

/// Full eigendecomposition of a general complex matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by ascending real part, then ascending imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors, `M v = λ v`.
    pub right_vectors: Vec<Vec<C64>>,
    /// Unit-norm left eigenvectors, `u^H M = λ u^H`.
    pub left_vectors: Vec<Vec<C64>>,
    /// `||(M - λ) v||` for each pair.
    pub residuals: Vec<f64>,
    /// Set when the eigenvalue belongs to a cluster whose geometric multiplicity is
    /// smaller than its algebraic one.
    pub defect_flags: Vec<bool>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_defective(&self) -> bool {
        self.defect_flags.iter().any(|&f| f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub eigenvalue: C64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
}

impl DefectReport {
    pub fn is_defective(&self) -> bool {
        self.geometric_multiplicity < self.algebraic_multiplicity
    }
}

pub(crate) fn cmp_eigenvalues(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Radius within which computed eigenvalues are treated as one multiple eigenvalue.
///
/// A Jordan block of size k perturbed at level ε splits its eigenvalue by ε^(1/k), so
/// the square root of the residual tolerance captures the size-2 case.
pub fn cluster_radius(m: &CMatrix, tol: f64) -> f64 {
    tol.sqrt() * (1.0 + m.frobenius_norm())
}

fn rank_tol(m: &CMatrix, tol: f64) -> f64 {
    tol * (1.0 + m.frobenius_norm())
}

/// Eigenvalues, right/left eigenvectors, residuals and defect flags of `m`.
///
/// Eigenvalues come from a Schur form; eigenvectors from triangular back-substitution
/// in which vanishing denominators are replaced by `eps * ||M||` so that defective
/// eigenvalues still yield a (repeated) null vector instead of a division by zero.
pub fn eig_general(m: &CMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    m.check_finite()?;
    let n = m.dim();
    let Schur { q, t } = schur(m)?;
    let small = f64::EPSILON * m.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_eigenvalues(&t[(a, a)], &t[(b, b)]));

    let mut spec = Spectrum {
        eigenvalues: Vec::with_capacity(n),
        right_vectors: Vec::with_capacity(n),
        left_vectors: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        defect_flags: vec![false; n],
    };
    for &k in &order {
        let lambda = t[(k, k)];
        let y = triangular_right(&t, k, small);
        let v = normalized(&q.mul_vec(&y));
        let x = triangular_left(&t, k, small);
        let u = normalized(&q.mul_vec(&x));
        let r = residual(m, lambda, &v);
        if !r.is_finite() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical("non-finite eigenvector"));
        }
        spec.eigenvalues.push(lambda);
        spec.right_vectors.push(v);
        spec.left_vectors.push(u);
        spec.residuals.push(r);
    }

    // Defect flags: only clusters of size > 1 need a rank test.
    let radius = cluster_radius(m, tol);
    for cluster in clusters(&spec.eigenvalues, radius) {
        if cluster.len() < 2 {
            continue;
        }
        let center = cluster.iter().map(|&i| spec.eigenvalues[i]).sum::<C64>()
            / cluster.len() as f64;
        let geometric = n - numerical_rank(&m.shifted(center), rank_tol(m, tol));
        if geometric < cluster.len() {
            for &i in &cluster {
                spec.defect_flags[i] = true;
            }
        }
    }
    Ok(spec)
}

pub fn residual(m: &CMatrix, lambda: C64, v: &[C64]) -> f64 {
    let mv = m.mul_vec(v);
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Groups indices of `values` (already sorted) into clusters of single-linkage
/// distance at most `radius`.
pub fn clusters(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

fn guard(d: C64, small: f64) -> C64 {
    if d.norm() < small {
        C64::new(small, 0.0)
    } else {
        d
    }
}

const RESCALE_AT: f64 = 1e100;

/// Solves `(T - t_kk) y = 0` with `y_k = 1`, `y_j = 0` for `j > k`.
fn triangular_right(t: &CMatrix, k: usize, small: f64) -> Vec<C64> {
    let n = t.dim();
    let lambda = t[(k, k)];
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[k] = C64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
        y[i] = -s / guard(t[(i, i)] - lambda, small);
        if y[i].norm() > RESCALE_AT {
            let f = 1.0 / y[i].norm();
            y.iter_mut().for_each(|z| *z *= f);
        }
    }
    y
}

/// Solves `x^H (T - t_kk) = 0` with `x_k = 1`, `x_j = 0` for `j < k`.
fn triangular_left(t: &CMatrix, k: usize, small: f64) -> Vec<C64> {
    let n = t.dim();
    let lambda = t[(k, k)];
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[k] = C64::new(1.0, 0.0);
    // (T^H - conj λ) x = 0, T^H lower triangular: forward substitution
    for i in k + 1..n {
        let s: C64 = (k..i).map(|j| t[(j, i)].conj() * x[j]).sum();
        x[i] = -s / guard((t[(i, i)] - lambda).conj(), small);
        if x[i].norm() > RESCALE_AT {
            let f = 1.0 / x[i].norm();
            x.iter_mut().for_each(|z| *z *= f);
        }
    }
    x
}

/// Algebraic and geometric multiplicity of `lambda`.
///
/// Algebraic: number of computed eigenvalues within [`cluster_radius`] of `lambda`.
/// Geometric: `dim - rank(M - λ)` with rank threshold `tol * (1 + ||M||_F)`.
pub fn defect_report(m: &CMatrix, lambda: C64, tol: f64) -> Result<DefectReport> {
    let spec = eig_general(m, tol)?;
    let radius = cluster_radius(m, tol);
    let algebraic = spec
        .eigenvalues
        .iter()
        .filter(|z| (*z - lambda).norm() <= radius)
        .count();
    if algebraic == 0 {
        return Err(Error::domain(format!(
            "{lambda} is not an eigenvalue within {radius:e}"
        )));
    }
    let geometric = m.dim() - numerical_rank(&m.shifted(lambda), rank_tol(m, tol));
    Ok(DefectReport {
        eigenvalue: lambda,
        algebraic_multiplicity: algebraic,
        // numerical rank may see more null directions than the cluster holds when λ
        // sits between two nearby clusters; clamp to the invariant 1 <= g <= a.
        geometric_multiplicity: geometric.clamp(1, algebraic),
    })
}

/// Orthonormal basis of the invariant subspace belonging to the `k` eigenvalues
/// nearest `shift`, by inverse subspace iteration.
pub fn cluster_subspace(m: &CMatrix, shift: C64, k: usize) -> Result<Vec<Vec<C64>>> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::domain(format!("subspace size {k} out of range 1..={n}")));
    }
    let scale = 1.0 + m.frobenius_norm();
    // Offset the shift off any exact eigenvalue; the direction avoids the real axis.
    let mut offset = C64::from_polar(1e-9 * scale, 0.3);
    let mut basis: Vec<Vec<C64>> = (0..k)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let a = ((i * 7 + j * 13 + 3) % 17) as f64 - 8.0;
                    let b = ((i * 5 + j * 3 + 1) % 11) as f64 - 5.0;
                    C64::new(a + 0.5, b + 0.25)
                })
                .collect()
        })
        .collect();
    let mut solved = None;
    for _ in 0..8 {
        let a = m.shifted(shift + offset);
        if let Some(x) = lu_solve_many(&a, &basis) {
            solved = Some(a);
            basis = x;
            break;
        }
        offset *= 10.0;
    }
    let a = solved.ok_or_else(|| Error::numerical("shifted matrix is exactly singular"))?;
    for _ in 0..4 {
        orthonormalize(&mut basis, 1e-12);
        if basis.len() < k {
            return Err(Error::numerical("subspace iteration lost rank"));
        }
        basis = lu_solve_many(&a, &basis)
            .ok_or_else(|| Error::numerical("shifted matrix is exactly singular"))?;
    }
    orthonormalize(&mut basis, 1e-12);
    if basis.len() < k {
        return Err(Error::numerical("subspace iteration lost rank"));
    }
    if basis.iter().any(|v| !vec_norm(v).is_finite()) {
        return Err(Error::numerical("non-finite subspace vector"));
    }
    Ok(basis)
}
