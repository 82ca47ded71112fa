//! The three-level Λ system `(|↑⟩, |↓⟩, |3⟩)` with a complex spin field on the lower pair.
//!
//! Two real couplings `Ω1` (↑↔3) and `-Ω2` (↓↔3) leave the dark combination
//! `|D⟩ = cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩` decoupled from `|3⟩`. A real field `B_R · S` on the
//! lower pair rotates `|D⟩` away; adding `i B_I · S` with `B_I` from [`compensate`]
//! removes the `|B⟩⟨D|` amplitude and the imaginary energy shift, so `|D⟩` is again an
//! exact eigenstate with a real eigenvalue.
//!
//! Matrix elements returned by [`db_couplings`] are true matrix elements of
//! `(B_R + i B_I) · σ/2`; the vanishing conditions do not depend on that factor of two.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{self, inner, vec_norm, CMatrix};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiPair {
    pub omega1: f64,
    pub omega2: f64,
}

impl RabiPair {
    /// Couplings are taken real and non-negative; at least one must be nonzero.
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite()) || omega1 < 0.0 || omega2 < 0.0 {
            return Err(Error::domain(format!(
                "Rabi couplings must be finite and non-negative, got ({omega1}, {omega2})"
            )));
        }
        if omega1 == 0.0 && omega2 == 0.0 {
            return Err(Error::domain("Ω1 = Ω2 = 0 leaves no dark state defined"));
        }
        Ok(RabiPair { omega1, omega2 })
    }

    /// Unit-strength pair whose mixing angle is `theta`.
    pub fn from_theta(theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::domain(format!("θ = {theta} outside [0, π]")));
        }
        Self::new((theta / 2.0).sin().max(0.0), (theta / 2.0).cos().max(0.0))
    }

    pub fn omega(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }

    /// Mixing angle with `cos(θ/2) = Ω2/Ω`, `sin(θ/2) = Ω1/Ω`.
    pub fn theta(&self) -> f64 {
        2.0 * self.omega1.atan2(self.omega2)
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.omega1, self.omega2).map(|_| ())
    }
}

/// Complex magnetic field `B = B_R + i B_I` in (x, y, z) components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexField {
    pub b_r: [f64; 3],
    pub b_i: [f64; 3],
}

impl ComplexField {
    pub fn real(b_r: [f64; 3]) -> Self {
        ComplexField { b_r, b_i: [0.0; 3] }
    }

    /// Real field together with its compensating imaginary part for angle `theta`.
    pub fn compensated(b_r: [f64; 3], theta: f64) -> Self {
        ComplexField {
            b_r,
            b_i: compensate(b_r, theta),
        }
    }

    pub fn components(&self) -> [C64; 3] {
        [0, 1, 2].map(|c| C64::new(self.b_r[c], self.b_i[c]))
    }

    fn check_finite(&self) -> Result<()> {
        if self.b_r.iter().chain(&self.b_i).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("field components must be finite"))
        }
    }

    pub fn real_norm(&self) -> f64 {
        self.b_r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.b_r.iter().chain(&self.b_i).map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Amplitudes of the lower-pair Hamiltonian in the dark/bright basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DBCouplings {
    /// `⟨D|H|B⟩`, feeding |D⟩ from |B⟩.
    pub m_db: C64,
    /// `⟨B|H|D⟩`, leakage out of |D⟩.
    pub m_bd: C64,
    /// `⟨D|H|D⟩ - ⟨B|H|B⟩`.
    pub delta: C64,
}

/// Mixing angle, dark state and bright state in the (↑, ↓) basis.
pub fn dark_bright(rabi: &RabiPair) -> Result<(f64, [C64; 2], [C64; 2])> {
    rabi.validate()?;
    let omega = rabi.omega();
    let (c, s) = (rabi.omega2 / omega, rabi.omega1 / omega);
    Ok((
        rabi.theta(),
        [C64::new(c, 0.0), C64::new(s, 0.0)],
        [C64::new(-s, 0.0), C64::new(c, 0.0)],
    ))
}

/// `B · S` with `S = σ/2` on (↑, ↓).
pub fn spin_block(field: &ComplexField) -> CMatrix {
    let [bx, by, bz] = field.components();
    let half = 0.5;
    CMatrix::from_rows(&[
        vec![bz * half, (bx - I * by) * half],
        vec![(bx + I * by) * half, -bz * half],
    ])
    .expect("2x2 block is square")
}

/// Full 3x3 Hamiltonian in the basis (|↑⟩, |↓⟩, |3⟩).
pub fn h_lambda(rabi: &RabiPair, field: &ComplexField) -> Result<CMatrix> {
    rabi.validate()?;
    field.check_finite()?;
    let block = spin_block(field);
    let mut h = CMatrix::zeros(3);
    for i in 0..2 {
        for j in 0..2 {
            h[(i, j)] = block[(i, j)];
        }
    }
    let (o1, o2) = (C64::new(rabi.omega1, 0.0), C64::new(-rabi.omega2, 0.0));
    h[(0, 2)] = o1;
    h[(2, 0)] = o1;
    h[(1, 2)] = o2;
    h[(2, 1)] = o2;
    Ok(h)
}

/// Field components in the frame whose z axis points along the dark state.
pub fn rotate_field(b: [C64; 3], theta: f64) -> [C64; 3] {
    let (s, c) = theta.sin_cos();
    [b[0] * c - b[2] * s, b[1], b[0] * s + b[2] * c]
}

/// Exact inverse of [`rotate_field`].
pub fn inverse_rotate(b: [C64; 3], theta: f64) -> [C64; 3] {
    let (s, c) = theta.sin_cos();
    [b[0] * c + b[2] * s, b[1], -b[0] * s + b[2] * c]
}

fn sandwich(bra: &[C64; 2], m: &CMatrix, ket: &[C64; 2]) -> C64 {
    inner(bra, &m.mul_vec(ket))
}

pub fn db_couplings(rabi: &RabiPair, field: &ComplexField) -> Result<DBCouplings> {
    let (_, d, b) = dark_bright(rabi)?;
    field.check_finite()?;
    let h = spin_block(field);
    Ok(DBCouplings {
        m_db: sandwich(&d, &h, &b),
        m_bd: sandwich(&b, &h, &d),
        delta: sandwich(&d, &h, &d) - sandwich(&b, &h, &b),
    })
}

/// Imaginary field that makes `|D⟩` an exact eigenstate with real energy.
pub fn compensate(b_r: [f64; 3], theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    let [bx, by, bz] = b_r;
    [-by * c, bx * c - bz * s, by * s]
}

/// Same as [`compensate`], obtained by solving the real 3x3 linear system
/// `Re m_BD = Im m_BD = Im δ = 0` for `B_I`, with the coefficients read off the
/// dark/bright matrix elements of each Pauli component.
pub fn compensate_linear(b_r: [f64; 3], theta: f64) -> Result<[f64; 3]> {
    let (s, c) = (theta / 2.0).sin_cos();
    let d = [C64::new(c, 0.0), C64::new(s, 0.0)];
    let b = [C64::new(-s, 0.0), C64::new(c, 0.0)];
    let unit = |axis: usize, value: C64| {
        let mut comps = [ZERO; 3];
        comps[axis] = value;
        let [x, y, z] = comps;
        let half = 0.5;
        CMatrix::from_rows(&[
            vec![z * half, (x - I * y) * half],
            vec![(x + I * y) * half, -z * half],
        ])
        .expect("2x2")
    };
    // g_c = ⟨B|σ_c/2|D⟩ (complex), e_c = ⟨D|σ_c/2|D⟩ - ⟨B|σ_c/2|B⟩ (real)
    let mut g = [ZERO; 3];
    let mut e = [0.0; 3];
    for axis in 0..3 {
        let s = unit(axis, C64::new(1.0, 0.0));
        g[axis] = sandwich(&b, &s, &d);
        e[axis] = (sandwich(&d, &s, &d) - sandwich(&b, &s, &b)).re;
    }
    let real_part: C64 = (0..3).map(|c| g[c] * b_r[c]).sum();
    // m_BD = Σ (B_R,c + i B_I,c) g_c ; Im δ = Σ B_I,c e_c
    let a = [
        [-g[0].im, -g[1].im, -g[2].im],
        [g[0].re, g[1].re, g[2].re],
        [e[0], e[1], e[2]],
    ];
    let rhs = [-real_part.re, -real_part.im, 0.0];
    solve3(a, rhs).ok_or_else(|| Error::numerical("compensation system is singular"))
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-14 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkCheck {
    /// `||(H - λ_D)|D⟩||` for the three-level Hamiltonian.
    pub residual: f64,
    /// `⟨D|H|D⟩`.
    pub lambda_d: C64,
}

pub fn verify_dark(rabi: &RabiPair, field: &ComplexField) -> Result<DarkCheck> {
    let h = h_lambda(rabi, field)?;
    let (_, d, _) = dark_bright(rabi)?;
    let d3 = [d[0], d[1], ZERO];
    let hd = h.mul_vec(&d3);
    let lambda_d = inner(&d3, &hd);
    let residual = hd
        .iter()
        .zip(&d3)
        .map(|(a, b)| (a - lambda_d * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(DarkCheck { residual, lambda_d })
}

/// Dark-state energy predicted for a compensated field, `(B_R^x sinθ + B_R^z cosθ) / 2`.
pub fn compensated_dark_energy(b_r: [f64; 3], theta: f64) -> f64 {
    (b_r[0] * theta.sin() + b_r[2] * theta.cos()) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochSample {
    pub t: f64,
    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of the normalized (↑, ↓) part; zero if that part vanishes.
    pub bloch: [f64; 3],
    /// `|⟨D|ψ(t)⟩| / ||ψ(t)||`.
    pub dark_fidelity: f64,
}

pub fn bloch_trajectory(
    rabi: &RabiPair,
    field: &ComplexField,
    psi0: &[C64; 3],
    t_grid: &[f64],
) -> Result<Vec<BlochSample>> {
    let h = h_lambda(rabi, field)?;
    let (_, d, _) = dark_bright(rabi)?;
    let d3 = [d[0], d[1], ZERO];
    t_grid
        .iter()
        .map(|&t| {
            let psi = numkit::evolve(&h, psi0, t)?;
            let norm = vec_norm(&psi);
            if !(norm > 1e-300) || !norm.is_finite() {
                return Err(Error::numerical(format!("state norm {norm:e} at t = {t}")));
            }
            let (up, down) = (psi[0], psi[1]);
            let pair = (up.norm_sqr() + down.norm_sqr()).sqrt();
            let bloch = if pair > 0.0 {
                let (a, b) = (up / pair, down / pair);
                let coh = a.conj() * b;
                [2.0 * coh.re, 2.0 * coh.im, a.norm_sqr() - b.norm_sqr()]
            } else {
                [0.0; 3]
            };
            Ok(BlochSample {
                t,
                bloch,
                dark_fidelity: inner(&d3, &psi).norm() / norm,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dark_bright_examples() {
        let (theta, d, b) = dark_bright(&RabiPair::new(1.0, 1.0).unwrap()).unwrap();
        assert!((theta - FRAC_PI_2).abs() < 1e-15);
        assert!(close(d[0], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(d[1], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(inner(&d, &b).norm() < 1e-15);

        let (theta, d, _) = dark_bright(&RabiPair::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(theta, 0.0);
        assert_eq!(d, [C64::new(1.0, 0.0), ZERO]);

        let (_, d, _) = dark_bright(&RabiPair::new(3.0, 4.0).unwrap()).unwrap();
        assert!((d[0].re - 0.8).abs() < 1e-15 && (d[1].re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_couplings_rejected() {
        assert!(matches!(RabiPair::new(0.0, 0.0), Err(Error::Domain(_))));
        assert!(RabiPair::new(-1.0, 1.0).is_err());
        let bad = RabiPair { omega1: 0.0, omega2: 0.0 };
        assert!(dark_bright(&bad).is_err());
    }

    #[test]
    fn bare_lambda_system_hides_dark_state() {
        let rabi = RabiPair::new(1.0, 1.0).unwrap();
        let h = h_lambda(&rabi, &ComplexField::default()).unwrap();
        let (_, d, b) = dark_bright(&rabi).unwrap();
        let hd = h.mul_vec(&[d[0], d[1], ZERO]);
        assert!(hd.iter().all(|z| z.norm() == 0.0 || z.norm() < 1e-16));
        let hb = h.mul_vec(&[b[0], b[1], ZERO]);
        assert!(hb[0].norm() < 1e-15 && hb[1].norm() < 1e-15);
        // |⟨3|H|B⟩| = Ω = √2; the sign depends on the bright-state phase
        assert!((hb[2].norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn z_field_adds_half_sigma_z() {
        let rabi = RabiPair::new(1.0, 2.0).unwrap();
        let h0 = h_lambda(&rabi, &ComplexField::default()).unwrap();
        let h = h_lambda(&rabi, &ComplexField::real([0.0, 0.0, 1.0])).unwrap();
        let diff = h.add(&h0.scale(C64::new(-1.0, 0.0)));
        let want = CMatrix::diag(&[C64::new(0.5, 0.0), C64::new(-0.5, 0.0), ZERO]);
        assert!(diff.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn rotation_examples() {
        let b = [C64::new(0.3, -1.0), C64::new(2.0, 0.5), C64::new(-0.7, 0.1)];
        assert_eq!(rotate_field(b, 0.0), b);
        let r = rotate_field([ZERO, ZERO, C64::new(1.0, 0.0)], FRAC_PI_2);
        assert!(close(r[0], C64::new(-1.0, 0.0), 1e-15));
        assert!(r[1].norm() == 0.0 && r[2].norm() < 1e-15);
        let back = inverse_rotate(r, FRAC_PI_2);
        assert!(close(back[2], C64::new(1.0, 0.0), 1e-15) && back[0].norm() < 1e-15);
    }

    #[test]
    fn coupling_examples() {
        let up = RabiPair::new(0.0, 1.0).unwrap(); // θ = 0
        let c = db_couplings(&up, &ComplexField::real([1.0, 0.0, 0.0])).unwrap();
        assert!(close(c.m_db, C64::new(0.5, 0.0), 1e-15));
        assert!(close(c.m_bd, C64::new(0.5, 0.0), 1e-15));
        let c = db_couplings(&up, &ComplexField::real([0.0, 0.0, 1.0])).unwrap();
        assert!(close(c.delta, C64::new(1.0, 0.0), 1e-15));
        assert!(c.m_db.norm() < 1e-15 && c.m_bd.norm() < 1e-15);

        let half = RabiPair::new(1.0, 1.0).unwrap(); // θ = π/2
        let f = ComplexField {
            b_r: [0.0, 1.0, 0.0],
            b_i: [0.0, 0.0, 1.0],
        };
        let c = db_couplings(&half, &f).unwrap();
        assert!(c.m_bd.norm() < 1e-15);
        assert!(close(c.m_db, C64::new(0.0, -1.0), 1e-15));
        assert!(c.delta.norm() < 1e-15);
    }

    #[test]
    fn compensation_examples() {
        assert_eq!(compensate([0.0; 3], 1.0), [0.0; 3]);
        let bi = compensate([0.0, 0.0, 1.0], FRAC_PI_2);
        assert!(bi[0].abs() < 1e-15 && (bi[1] + 1.0).abs() < 1e-15 && bi[2].abs() < 1e-15);
        let bi = compensate([0.0, 1.0, 0.0], FRAC_PI_2);
        assert!(bi[0].abs() < 1e-15 && bi[1].abs() < 1e-15 && (bi[2] - 1.0).abs() < 1e-15);

        let lin = compensate_linear([0.0, 0.0, 1.0], FRAC_PI_2).unwrap();
        assert!(lin[0].abs() < 1e-14 && (lin[1] + 1.0).abs() < 1e-14 && lin[2].abs() < 1e-14);
        assert_eq!(compensate_linear([0.0; 3], 0.4).unwrap().map(|x| x.abs()), [0.0; 3]);
    }

    #[test]
    fn compensated_block_annihilates_dark_state() {
        let rabi = RabiPair::new(1.0, 1.0).unwrap();
        let f = ComplexField::compensated([0.0, 1.0, 0.0], PI / 2.0);
        let (_, d, _) = dark_bright(&rabi).unwrap();
        let hd = spin_block(&f).mul_vec(&d);
        assert!(hd.iter().all(|z| z.norm() < 1e-15));
        let check = verify_dark(&rabi, &f).unwrap();
        assert!(check.residual < 1e-12 && check.lambda_d.norm() < 1e-12);
    }

    #[test]
    fn uncompensated_field_breaks_dark_state() {
        let rabi = RabiPair::new(1.0, 1.0).unwrap();
        let check = verify_dark(&rabi, &ComplexField::real([0.0, 1.0, 0.0])).unwrap();
        assert!(check.residual > 0.1);
        let check = verify_dark(&rabi, &ComplexField::default()).unwrap();
        assert_eq!(check.residual, 0.0);
        assert_eq!(check.lambda_d, ZERO);
    }

    #[test]
    fn trajectory_from_dark_state_with_no_field_is_static() {
        let rabi = RabiPair::new(1.0, 1.0).unwrap();
        let (_, d, _) = dark_bright(&rabi).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let traj = bloch_trajectory(&rabi, &ComplexField::default(), &[d[0], d[1], ZERO], &grid)
            .unwrap();
        for s in &traj {
            assert!((s.bloch[0] - 1.0).abs() < 1e-12);
            assert!(s.bloch[1].abs() < 1e-12 && s.bloch[2].abs() < 1e-12);
            assert!((s.dark_fidelity - 1.0).abs() < 1e-12);
        }
    }
}
