use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::model::{build_ladder_b, Boundary, LadderParams, Leg};
use crate::error::{Error, Result};
use crate::numkit::{lu_solve_many, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitalLabel {
    DownMinus,
    DownPlus,
    UpMinus,
    UpPlus,
    EdgeDown,
    EdgeUp,
}

/// Compactly supported eigenvector of the b-basis ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbital {
    pub label: OrbitalLabel,
    pub center: usize,
    /// Nonzero amplitudes in ascending mode order; unit 2-norm.
    pub amplitudes: Vec<((usize, Leg), C64)>,
    pub energy: C64,
}

impl Orbital {
    pub fn to_vector(&self, p: &LadderParams) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); p.dim()];
        for &((rung, leg), a) in &self.amplitudes {
            v[p.mode(rung, leg)] = a;
        }
        v
    }

    /// Number of amplitudes above `1e-12` of the largest one.
    pub fn support_size(&self) -> usize {
        let max = self.amplitudes.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max);
        self.amplitudes
            .iter()
            .filter(|(_, a)| a.norm() > 1e-12 * max)
            .count()
    }

    /// Squared amplitude at `(rung, leg)`.
    pub fn density(&self, rung: usize, leg: Leg) -> f64 {
        self.amplitudes
            .iter()
            .filter(|((r, l), _)| *r == rung && *l == leg)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// What to do with up orbitals that do not exist because an up level collides with a
/// down level (`Ω_x ∈ {0, ±t}` in the bulk).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitalMode {
    Strict,
    /// Skip the missing orbitals; the set then no longer spans the space.
    DefectTolerant,
}

/// The 6×6 block around an Up dimer at even rung `n`, basis
/// `(↓n-1, ↓n, ↑n, ↑n+1, ↓n+1, ↓n+2)`.
pub fn local_block(p: &LadderParams) -> Result<CMatrix> {
    p.validate()?;
    p.require_flat_band("local_block")?;
    let (t, ox) = (p.t, p.omega_x);
    let mut h = CMatrix::zeros(6);
    for (i, j, e) in [(0, 1, -ox), (2, 3, ox), (4, 5, -ox)] {
        h[(i, i)] = C64::new(e, 0.0);
        h[(j, j)] = C64::new(e, 0.0);
        h[(i, j)] = C64::new(t, 0.0);
        h[(j, i)] = C64::new(t, 0.0);
    }
    // t_down = -2iΓ at the flat-band point
    h[(1, 2)] = p.t_down();
    h[(4, 3)] = p.t_down();
    Ok(h)
}

fn orbital_from_vector(
    label: OrbitalLabel,
    center: usize,
    energy: C64,
    mut entries: Vec<(usize, C64)>,
) -> Orbital {
    entries.sort_by_key(|(m, _)| *m);
    let norm: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
    Orbital {
        label,
        center,
        amplitudes: entries
            .into_iter()
            .filter(|(_, a)| *a != C64::new(0.0, 0.0))
            .map(|(m, a)| ((m / 2, if m % 2 == 0 { Leg::Up } else { Leg::Down }), a / norm))
            .collect(),
        energy,
    }
}

/// Eigenvector with the given Up-leg amplitudes. Down amplitudes come from
/// `(H_dd - E) x_d = -H_du u` on the Down modes the Up modes feed into plus their bond
/// partners; `Ok(None)` when `E` hits a Down level there.
fn dressed_up_orbital(
    p: &LadderParams,
    h: &CMatrix,
    label: OrbitalLabel,
    center: usize,
    up: &[(usize, C64)],
    energy: f64,
) -> Result<Option<Orbital>> {
    let mut down: Vec<usize> = Vec::new();
    for &(r, _) in up {
        down.push(r);
        if let Some(q) = p.partner(r, Leg::Down) {
            down.push(q);
        }
    }
    down.sort_unstable();
    down.dedup();
    // Each Down piece is a bonded pair (levels -Ω_x ± t) or a lone site (-Ω_x).
    let scale = p.t + p.omega_x.abs();
    let gap = down
        .iter()
        .map(|&r| {
            let base = energy + p.omega_x;
            if p.partner(r, Leg::Down).is_some() {
                (base - p.t).abs().min((base + p.t).abs())
            } else {
                base.abs()
            }
        })
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-12 * scale {
        return Ok(None);
    }
    let modes: Vec<usize> = down.iter().map(|&r| p.mode(r, Leg::Down)).collect();
    let a = CMatrix::from_fn(modes.len(), |i, j| {
        let d = if i == j { C64::new(energy, 0.0) } else { C64::new(0.0, 0.0) };
        h[(modes[i], modes[j])] - d
    });
    let rhs: Vec<C64> = modes
        .iter()
        .map(|&mi| {
            -up.iter()
                .map(|&(r, u)| h[(mi, p.mode(r, Leg::Up))] * u)
                .sum::<C64>()
        })
        .collect();
    let x = lu_solve_many(&a, &[rhs])
        .ok_or_else(|| Error::numerical("singular Down block in orbital construction"))?
        .remove(0);
    let mut entries: Vec<(usize, C64)> = up.iter().map(|&(r, u)| (p.mode(r, Leg::Up), u)).collect();
    entries.extend(modes.into_iter().zip(x));
    Ok(Some(orbital_from_vector(label, center, C64::new(energy, 0.0), entries)))
}

/// Dimer orbitals on every Down bond and dressed Up-dimer orbitals on every Up bond.
pub fn bulk_orbitals(p: &LadderParams, mode: OrbitalMode) -> Result<Vec<Orbital>> {
    p.validate()?;
    p.require_flat_band("bulk_orbitals")?;
    let h = build_ladder_b(p)?;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut out = Vec::new();
    for n in 0..p.length {
        if n % 2 == 0 {
            let Some(m) = p.partner(n, Leg::Up) else { continue };
            for (label, sign) in [(OrbitalLabel::UpMinus, -1.0), (OrbitalLabel::UpPlus, 1.0)] {
                let energy = p.omega_x + sign * p.t;
                let up = [(n, s), (m, s * sign)];
                match dressed_up_orbital(p, &h, label, n, &up, energy)? {
                    Some(o) => out.push(o),
                    None if mode == OrbitalMode::DefectTolerant => {}
                    None => {
                        return Err(Error::domain(format!(
                            "Up orbital at rung {n} with energy {energy} collides with a Down \
                             level (defective point Ω_x = {}); use OrbitalMode::DefectTolerant",
                            p.omega_x
                        )))
                    }
                }
            }
        } else {
            let Some(m) = p.partner(n, Leg::Down) else { continue };
            for (label, sign) in [(OrbitalLabel::DownMinus, -1.0), (OrbitalLabel::DownPlus, 1.0)] {
                let entries = vec![(p.mode(n, Leg::Down), s), (p.mode(m, Leg::Down), s * sign)];
                let energy = C64::new(-p.omega_x + sign * p.t, 0.0);
                out.push(orbital_from_vector(label, n, energy, entries));
            }
        }
    }
    Ok(out)
}

/// The 3×3 block at the right end of an open ladder with an odd number of rungs, basis
/// `(↑L-1, ↓L-1, ↓L-2)`, and its eigenvector at energy `Ω_x`.
pub fn edge_block(p: &LadderParams) -> Result<(CMatrix, Orbital)> {
    p.validate()?;
    p.require_flat_band("edge_block")?;
    if p.boundary != Boundary::Open || p.length.is_multiple_of(2) {
        return Err(Error::domain(
            "edge_block needs an open ladder with an odd number of rungs",
        ));
    }
    let last = p.length - 1;
    let (t, ox) = (C64::new(p.t, 0.0), C64::new(p.omega_x, 0.0));
    let zero = C64::new(0.0, 0.0);
    let block = CMatrix::from_rows(&[
        vec![ox, zero, zero],
        vec![p.t_down(), -ox, t],
        vec![zero, t, -ox],
    ])?;
    let h = build_ladder_b(p)?;
    let orbital = dressed_up_orbital(
        p,
        &h,
        OrbitalLabel::EdgeUp,
        last,
        &[(last, C64::new(1.0, 0.0))],
        p.omega_x,
    )?
    .ok_or_else(|| {
        Error::domain(format!(
            "edge orbital at Ω_x = {} collides with the neighbouring Down dimer (2Ω_x = ±t)",
            p.omega_x
        ))
    })?;
    Ok((block, orbital))
}

/// Down sites left without a bond partner by an open boundary: rung 0 always, rung
/// `L-1` for even `L`. Empty for periodic ladders.
pub fn single_site_edges(p: &LadderParams) -> Result<Vec<Orbital>> {
    p.validate()?;
    p.require_flat_band("single_site_edges")?;
    Ok((0..p.length)
        .filter(|&r| p.partner(r, Leg::Down).is_none())
        .map(|r| Orbital {
            label: OrbitalLabel::EdgeDown,
            center: r,
            amplitudes: vec![((r, Leg::Down), C64::new(1.0, 0.0))],
            energy: C64::new(-p.omega_x, 0.0),
        })
        .collect())
}

/// Bulk orbitals plus every edge orbital; `2L` of them away from defective points.
pub fn orbital_set(p: &LadderParams, mode: OrbitalMode) -> Result<Vec<Orbital>> {
    let mut all = bulk_orbitals(p, mode)?;
    all.extend(single_site_edges(p)?);
    if p.boundary == Boundary::Open && p.length % 2 == 1 {
        match edge_block(p) {
            Ok((_, o)) => all.push(o),
            Err(_) if mode == OrbitalMode::DefectTolerant => {}
            Err(e) => return Err(e),
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{defect_report, eig_general, numerical_rank, residual, DEFAULT_TOL};

    fn flat(omega_x: f64, l: usize, b: Boundary) -> LadderParams {
        LadderParams::new(1.0, 0.3, omega_x, -0.3, l, b).unwrap()
    }

    #[test]
    fn local_block_spectrum() {
        let h = local_block(&flat(0.4, 8, Boundary::Periodic)).unwrap();
        let spec = eig_general(&h, DEFAULT_TOL).unwrap();
        let expected = [-1.4, -1.4, -0.6, 0.6, 0.6, 1.4];
        for (z, e) in spec.eigenvalues.iter().zip(expected) {
            assert!((z - e).norm() < 1e-12, "{z} vs {e}");
        }
        assert_eq!(h[(1, 2)], C64::new(0.0, -0.6));
        assert_eq!(h[(4, 3)], C64::new(0.0, -0.6));
    }

    #[test]
    fn local_block_rejects_off_flat_band() {
        let p = LadderParams::new(1.0, 0.3, 0.4, 0.2, 8, Boundary::Open).unwrap();
        let err = local_block(&p).unwrap_err();
        assert!(err.to_string().contains("Γ = -Ω_y"));
    }

    #[test]
    fn local_block_at_zero_gain_is_pure_dimers() {
        let p = LadderParams::new(1.0, 0.0, 0.4, 0.0, 8, Boundary::Open).unwrap();
        let h = local_block(&p).unwrap();
        assert_eq!(h[(1, 2)], C64::new(0.0, 0.0));
        assert_eq!(h[(4, 3)], C64::new(0.0, 0.0));
    }

    /// Rank by exact Gaussian elimination on small integer-valued data.
    fn rank_by_row_reduction(m: &CMatrix) -> usize {
        let n = m.dim();
        let mut a: Vec<Vec<C64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
        let mut rank = 0;
        for col in 0..n {
            let Some(piv) = (rank..n).find(|&r| a[r][col].norm() > 1e-14) else { continue };
            a.swap(rank, piv);
            for r in 0..n {
                if r != rank {
                    let f = a[r][col] / a[rank][col];
                    let pivot_row = a[rank].clone();
                    for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                        *x -= f * y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn local_block_is_defective_at_zero_omega_x() {
        let h = local_block(&flat(0.0, 8, Boundary::Periodic)).unwrap();
        let shifted = h.shifted(C64::new(1.0, 0.0));
        assert_eq!(6 - rank_by_row_reduction(&shifted), 2);
        let d = defect_report(&h, C64::new(1.0, 0.0), DEFAULT_TOL).unwrap();
        assert_eq!((d.algebraic_multiplicity, d.geometric_multiplicity), (3, 2));
    }

    #[test]
    fn orbitals_are_eigenvectors_with_expected_energies() {
        for (l, b) in [(12, Boundary::Periodic), (12, Boundary::Open), (13, Boundary::Open)] {
            let p = flat(0.4, l, b);
            let h = build_ladder_b(&p).unwrap();
            for o in orbital_set(&p, OrbitalMode::Strict).unwrap() {
                let v = o.to_vector(&p);
                assert!(residual(&h, o.energy, &v) < 1e-12, "{:?} at {}", o.label, o.center);
                let expected = match o.label {
                    OrbitalLabel::DownMinus => -1.4,
                    OrbitalLabel::DownPlus => 0.6,
                    OrbitalLabel::UpMinus => -0.6,
                    OrbitalLabel::UpPlus => 1.4,
                    OrbitalLabel::EdgeDown => -0.4,
                    OrbitalLabel::EdgeUp => 0.4,
                };
                assert_eq!(o.energy, C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn support_sizes() {
        let p = flat(0.4, 13, Boundary::Open);
        for o in orbital_set(&p, OrbitalMode::Strict).unwrap() {
            let s = o.support_size();
            match o.label {
                OrbitalLabel::DownMinus | OrbitalLabel::DownPlus => {
                    assert_eq!(s, 2);
                    for (_, a) in &o.amplitudes {
                        assert!((a.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
                    }
                }
                OrbitalLabel::UpMinus | OrbitalLabel::UpPlus => assert!(s <= 6),
                OrbitalLabel::EdgeDown => assert_eq!(s, 1),
                OrbitalLabel::EdgeUp => assert_eq!(s, 3),
            }
        }
    }

    #[test]
    fn orbital_set_is_complete() {
        for (l, b) in [(8, Boundary::Periodic), (10, Boundary::Open), (11, Boundary::Open)] {
            let p = flat(0.4, l, b);
            let set = orbital_set(&p, OrbitalMode::Strict).unwrap();
            assert_eq!(set.len(), 2 * l);
            let vectors: Vec<Vec<C64>> = set.iter().map(|o| o.to_vector(&p)).collect();
            let m = CMatrix::from_fn(2 * l, |i, j| vectors[j][i]);
            assert_eq!(numerical_rank(&m, 1e-8), 2 * l);
        }
    }

    #[test]
    fn defective_point_handling() {
        let p = flat(0.0, 8, Boundary::Periodic);
        assert!(bulk_orbitals(&p, OrbitalMode::Strict).is_err());
        let tolerant = bulk_orbitals(&p, OrbitalMode::DefectTolerant).unwrap();
        assert!(tolerant.iter().all(|o| matches!(
            o.label,
            OrbitalLabel::DownMinus | OrbitalLabel::DownPlus
        )));
    }

    #[test]
    fn edge_block_spectrum_and_decoupled_limit() {
        let p = flat(0.4, 9, Boundary::Open);
        let (blk, o) = edge_block(&p).unwrap();
        let spec = eig_general(&blk, DEFAULT_TOL).unwrap();
        for (z, e) in spec.eigenvalues.iter().zip([-1.4, 0.4, 0.6]) {
            assert!((z - e).norm() < 1e-12);
        }
        // null vector of (h - Ω_x) in block coordinates
        let v: Vec<C64> = [(8, Leg::Up), (8, Leg::Down), (7, Leg::Down)]
            .iter()
            .map(|&(r, l)| o.to_vector(&p)[p.mode(r, l)])
            .collect();
        assert!(residual(&blk, C64::new(0.4, 0.0), &v) < 1e-14);

        let p0 = LadderParams::new(1.0, 0.0, 0.4, 0.0, 9, Boundary::Open).unwrap();
        let (_, o0) = edge_block(&p0).unwrap();
        assert_eq!(o0.support_size(), 1);
        assert!(edge_block(&flat(0.4, 10, Boundary::Open)).is_err());
    }

    #[test]
    fn single_site_edge_counts() {
        assert_eq!(single_site_edges(&flat(0.4, 10, Boundary::Open)).unwrap().len(), 2);
        assert_eq!(single_site_edges(&flat(0.4, 11, Boundary::Open)).unwrap().len(), 1);
        assert!(single_site_edges(&flat(0.4, 10, Boundary::Periodic)).unwrap().is_empty());
    }
}
