use darkstate::ladder::{
    analytic_edge_state, band_sweep, build_ladder_a, build_ladder_b, numeric_edge_states,
    orbital_set, spectrum_report, Boundary, LadderParams, Leg, OrbitalMode, Side,
    DEFAULT_EDGE_WINDOW,
};
use darkstate::numkit::{eig_general, numerical_rank, residual, CMatrix, DEFAULT_TOL};
use darkstate::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Greedy nearest-neighbour matching distance between two spectra.
fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (w - z).norm()))
            .fold((usize::MAX, f64::INFINITY), |x, y| if y.1 < x.1 { y } else { x });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn random_params(rng: &mut ChaCha8Rng) -> LadderParams {
    let boundary = if rng.gen_bool(0.5) { Boundary::Open } else { Boundary::Periodic };
    let mut length = rng.gen_range(4..=12);
    if boundary == Boundary::Periodic && length % 2 == 1 {
        length += 1;
    }
    LadderParams::new(
        rng.gen_range(0.2..2.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        length,
        boundary,
    )
    .unwrap()
}

#[test]
fn a_and_b_bases_share_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let a = eig_general(&build_ladder_a(&p).unwrap(), DEFAULT_TOL).unwrap();
        // the a-basis carries the opposite Ω_y sign
        let b = eig_general(&build_ladder_b(&p.with_omega_y(-p.omega_y)).unwrap(), DEFAULT_TOL)
            .unwrap();
        let d = spectral_distance(&a.eigenvalues, &b.eigenvalues);
        assert!(d < 1e-10, "{p:?}: {d:e}");
    }
}

#[test]
fn a_basis_matches_b_basis_at_zero_field() {
    let p = LadderParams::new(1.0, 0.0, 0.0, 0.0, 10, Boundary::Open).unwrap();
    let a = eig_general(&build_ladder_a(&p).unwrap(), DEFAULT_TOL).unwrap();
    let b = spectrum_report(&p).unwrap();
    assert!(spectral_distance(&a.eigenvalues, &b.eigenvalues) < 1e-12);
}

#[test]
fn flat_band_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    for _ in 0..10 {
        let oy = rng.gen_range(-1.0..1.0);
        let ox = rng.gen_range(-1.0..1.0);
        let p = LadderParams::new(1.0, -oy, ox, oy, 8, Boundary::Periodic).unwrap();
        assert!(p.is_flat_band_point());
        let h = build_ladder_b(&p).unwrap();
        for n in 0..8 {
            assert_eq!(h[(p.mode(n, Leg::Up), p.mode(n, Leg::Down))], C64::new(0.0, 0.0));
        }
        let sweep = band_sweep(&p, 201).unwrap();
        assert!(sweep.max_flatness() < 1e-10, "{:?}", sweep.flatness);
    }
    let off = LadderParams::new(1.0, 0.2, 0.4, 0.3, 8, Boundary::Periodic).unwrap();
    assert!(!off.is_flat_band_point());
    assert!(band_sweep(&off, 201).unwrap().max_flatness() > 1e-3);
}

#[test]
fn orbitals_span_the_space() {
    for (l, b, ox) in [
        (16, Boundary::Periodic, 0.4),
        (15, Boundary::Open, 0.4),
        (16, Boundary::Open, -0.7),
        (9, Boundary::Open, 1.3),
    ] {
        let p = LadderParams::new(1.0, 0.25, ox, -0.25, l, b).unwrap();
        let set = orbital_set(&p, OrbitalMode::Strict).unwrap();
        assert_eq!(set.len(), 2 * l);
        let h = build_ladder_b(&p).unwrap();
        let vecs: Vec<Vec<C64>> = set.iter().map(|o| o.to_vector(&p)).collect();
        for (o, v) in set.iter().zip(&vecs) {
            assert!(residual(&h, o.energy, v) < 1e-12);
        }
        let m = CMatrix::from_fn(2 * l, |i, j| vecs[j][i]);
        assert_eq!(numerical_rank(&m, 1e-8), 2 * l);
    }
}

#[test]
fn spectrum_is_real_inside_the_gauge_balanced_regime() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let oy: f64 = rng.gen_range(0.1..1.5);
        let g = rng.gen_range(-0.95..0.95) * oy;
        for b in [Boundary::Open, Boundary::Periodic] {
            let p = LadderParams::new(1.0, g, rng.gen_range(-1.0..1.0), oy, 12, b).unwrap();
            let s = spectrum_report(&p).unwrap();
            assert!(s.max_abs_imag() < 1e-10, "{p:?}: {:e}", s.max_abs_imag());
        }
    }
    for (g, oy) in [(0.5, 0.3), (-0.8, 0.1), (1.0, -0.4)] {
        let p = LadderParams::new(1.0, g, 0.0, oy, 12, Boundary::Periodic).unwrap();
        assert!(spectrum_report(&p).unwrap().max_abs_imag() > 1e-3);
    }
}

#[test]
fn zero_mode_ratio_law() {
    for (g, oy) in [(-0.1, 0.3), (0.2, 0.5), (0.5, 0.8)] {
        let p = LadderParams::new(1.0, g, 0.0, oy, 40, Boundary::Open).unwrap();
        let r = (p.t_up() * p.t_down()).norm();
        let rep = numeric_edge_states(&p, DEFAULT_EDGE_WINDOW).unwrap();
        let left = rep.states.iter().find(|s| s.side == Side::Left).unwrap();
        let v = &left.vector;
        for n in 0..10 {
            let a = v[p.mode(2 * n, Leg::Down)].norm();
            let b = v[p.mode(2 * n + 2, Leg::Down)].norm();
            if a < 1e-11 {
                break;
            }
            assert!((b / a - r).abs() / r < 1e-8, "n = {n}: {} vs {r}", b / a);
        }
        let exact = analytic_edge_state(&p, Side::Left).unwrap().to_vector(&p);
        let ov: C64 = exact.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
        assert!((ov.norm() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn leg_relabeling_symmetry(
        g in -1.0f64..1.0,
        oy in -1.0f64..1.0,
        ox in -1.0f64..1.0,
        half in 2usize..6,
        open in any::<bool>(),
    ) {
        let b = if open { Boundary::Open } else { Boundary::Periodic };
        let p = LadderParams::new(1.0, g, ox, oy, 2 * half, b).unwrap();
        let q = LadderParams::new(1.0, -g, ox, -oy, 2 * half, b).unwrap();
        let a = spectrum_report(&p).unwrap();
        let c = spectrum_report(&q).unwrap();
        prop_assert!(spectral_distance(&a.eigenvalues, &c.eigenvalues) < 1e-9);
    }

    #[test]
    fn trace_is_zero(g in -1.0f64..1.0, oy in -1.0f64..1.0, ox in -1.0f64..1.0) {
        let p = LadderParams::new(1.0, g, ox, oy, 8, Boundary::Open).unwrap();
        let s = spectrum_report(&p).unwrap();
        let sum: C64 = s.eigenvalues.iter().sum();
        prop_assert!(sum.norm() < 1e-10);
    }
}
