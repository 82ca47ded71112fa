//! Complex Schur decomposition `M = Q T Q^H`.
//!
//! The matrix is first split into the strongly connected components of its sparsity
//! graph. Ordering the components so that sinks come first makes `P M P^T` block upper
//! triangular, and every diagonal block is reduced independently (Householder
//! Hessenberg reduction, then single-shift QR with Wilkinson shifts). Eigenvalues of
//! decoupled pieces are therefore never mixed by rounding, which keeps exactly
//! degenerate flat bands and Jordan structures from smearing into `sqrt(eps)` clouds.

use num_complex::Complex64 as C64;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// QR sweeps allowed per eigenvalue before giving up.
pub const ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct Schur {
    /// Unitary Schur vectors (columns).
    pub q: CMatrix,
    /// Upper triangular factor.
    pub t: CMatrix,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Groups of mode indices forming irreducible diagonal blocks, ordered so that the
/// permuted matrix is block upper triangular.
pub(crate) fn irreducible_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            // source j feeds target i
            if i != j && m[(i, j)] != ZERO {
                g.add_edge(nodes[j], nodes[i], ());
            }
        }
    }
    // tarjan_scc yields components in reverse topological order: sinks first.
    let mut blocks: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut idx: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    // Stable, deterministic order among components that do not constrain each other
    // is already given by petgraph's traversal; keep it.
    blocks.retain(|b| !b.is_empty());
    blocks
}

pub fn schur(m: &CMatrix) -> Result<Schur> {
    m.check_finite()?;
    let n = m.dim();
    let blocks = irreducible_blocks(m);
    let perm: Vec<usize> = blocks.iter().flatten().copied().collect();
    debug_assert_eq!(perm.len(), n);

    let a = CMatrix::from_fn(n, |i, j| m[(perm[i], perm[j])]);
    let mut z = CMatrix::zeros(n);
    let mut diag_blocks = Vec::with_capacity(blocks.len());
    let mut offset = 0;
    let mut iterations = 0;
    for b in &blocks {
        let s = b.len();
        let sub = CMatrix::from_fn(s, |i, j| a[(offset + i, offset + j)]);
        let (zb, tb, its) = match schur_dense(&sub) {
            Ok(r) => r,
            Err(Error::NoConvergence { iterations: its, .. }) => {
                let partial: Vec<C64> = (0..n).map(|i| a[(i, i)]).collect();
                return Err(Error::NoConvergence {
                    iterations: iterations + its,
                    partial,
                });
            }
            Err(e) => return Err(e),
        };
        iterations += its;
        for i in 0..s {
            for j in 0..s {
                z[(offset + i, offset + j)] = zb[(i, j)];
            }
        }
        diag_blocks.push((offset, tb));
        offset += s;
    }

    let mut t = z.adjoint().matmul(&a).matmul(&z);
    for (off, tb) in diag_blocks {
        let s = tb.dim();
        for i in 0..s {
            for j in 0..s {
                t[(off + i, off + j)] = tb[(i, j)];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    let mut q = CMatrix::zeros(n);
    for (row, &orig) in perm.iter().enumerate() {
        for c in 0..n {
            q[(orig, c)] = z[(row, c)];
        }
    }
    Ok(Schur { q, t })
}

/// Plain dense complex Schur form of an (assumed irreducible) matrix.
/// Returns `(Z, T, iterations)` with `A = Z T Z^H`.
pub(crate) fn schur_dense(a: &CMatrix) -> Result<(CMatrix, CMatrix, usize)> {
    let n = a.dim();
    let mut h = a.clone();
    let mut z = CMatrix::identity(n);
    if n <= 1 {
        return Ok((z, h, 0));
    }
    hessenberg(&mut h, &mut z);
    let its = hessenberg_qr(&mut h, &mut z)?;
    Ok((z, h, its))
}

fn hessenberg(h: &mut CMatrix, z: &mut CMatrix) {
    let n = h.dim();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let tail: f64 = x[1..].iter().map(|v| v.norm_sqr()).sum();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x;
        v[0] += phase * xnorm;
        let vn = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c /= vn;
        }
        // H <- P H, P = I - 2 v v^H acting on rows k+1..n
        for j in 0..n {
            let s: C64 = v
                .iter()
                .enumerate()
                .map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)])
                .sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= 2.0 * vr * s;
            }
        }
        // H <- H P, Z <- Z P acting on columns k+1..n
        for mat in [&mut *h, &mut *z] {
            for i in 0..n {
                let s: C64 = v
                    .iter()
                    .enumerate()
                    .map(|(r, vr)| mat[(i, k + 1 + r)] * vr)
                    .sum();
                for (r, vr) in v.iter().enumerate() {
                    mat[(i, k + 1 + r)] -= 2.0 * s * vr.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let r = x.norm().hypot(y.norm());
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    (ax / r, (x / ax) * y.conj() / r)
}

fn hessenberg_qr(h: &mut CMatrix, z: &mut CMatrix) -> Result<usize> {
    let n = h.dim();
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let cap = ITERATIONS_PER_EIGENVALUE * n;
    let mut total = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    while hi > 0 {
        // locate the active unreduced window lo..=hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= eps * scale || sub <= f64::MIN_POSITIVE * norm {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > cap {
            return Err(Error::NoConvergence {
                iterations: total,
                partial: (0..n).map(|i| h[(i, i)]).collect(),
            });
        }

        let mu = if since_deflation % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm() * C64::new(1.0, 0.5)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + c * b;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let rows = (k + 2).min(hi) + 1;
            for i in 0..rows {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = c * a + s.conj() * b;
                h[(i, k + 1)] = -s * a + c * b;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = c * a + s.conj() * b;
                z[(i, k + 1)] = -s * a + c * b;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(total)
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}
