use exsc::sphere_spectral::{sogge_ratio, GridField, SpectralField, SphereBasis};
use exsc::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn circle_cos_squared() {
    let b = SphereBasis::new(2, 6, 4).unwrap();
    let f = GridField::from_fn(&b, 1, |p| vec![p[0] * p[0]]).unwrap().analyze().unwrap();
    // ½ = ½√(2π)·(1/√(2π)), ½cos2θ = ½√π·(cos2θ/√π)
    assert!(close(f.get(0, 0, 0), 0.5 * (2.0 * PI).sqrt(), 1e-13));
    assert!(close(f.get(0, 2, 2), 0.5 * PI.sqrt(), 1e-13));
    let rest: f64 = f.coeffs().iter().enumerate().filter(|(i, _)| *i != 0 && *i != 4).map(|(_, c)| c.abs()).sum();
    assert!(rest < 1e-13);
    let p0 = f.project(0);
    assert!(close(p0.get(0, 0, 0), 0.5 * (2.0 * PI).sqrt(), 1e-13));
    assert_eq!(p0.project(0).coeffs(), p0.coeffs());
}

#[test]
fn sphere_y10_analyzes_to_unit_coefficient() {
    let b = SphereBasis::new(3, 5, 4).unwrap();
    let c = (3.0 / (4.0 * PI)).sqrt();
    let f = GridField::from_fn(&b, 1, |p| vec![c * p[2]]).unwrap().analyze().unwrap();
    let idx = b.index(1, 0).unwrap();
    for (i, x) in f.coeffs().iter().enumerate() {
        let want = if i == idx { 1.0 } else { 0.0 };
        assert!(close(*x, want, 1e-13), "coeff {i} = {x}");
    }
}

#[test]
fn sin_theta_sin_two_theta_has_odd_support() {
    let b = SphereBasis::new(2, 6, 4).unwrap();
    let f = GridField::from_fn(&b, 1, |p| {
        let th = p[1].atan2(p[0]);
        vec![th.sin() * (2.0 * th).sin()]
    })
    .unwrap()
    .analyze()
    .unwrap();
    // sinθ·sin2θ = ½cosθ − ½cos3θ
    let e = f.degree_energies();
    assert!(close(e[1].sqrt(), 0.5 * PI.sqrt(), 1e-13));
    assert!(close(e[3].sqrt(), 0.5 * PI.sqrt(), 1e-13));
    assert!(close(f.get(0, 1, 1), 0.5 * PI.sqrt(), 1e-13));
    assert!(close(f.get(0, 3, 3), -0.5 * PI.sqrt(), 1e-13));
    for l in [0, 2, 4, 5, 6] {
        assert!(e[l] < 1e-26);
    }
}

#[test]
fn synthesize_constant_and_zero() {
    let b = SphereBasis::new(2, 4, 2).unwrap();
    let g = SpectralField::mode(&b, 0, 0, 1.0).unwrap().synthesize();
    assert!(g.values().iter().all(|v| close(*v, 1.0 / (2.0 * PI).sqrt(), 1e-15)));
    let z = SpectralField::zeros(&b, 2).synthesize();
    assert!(z.values().iter().all(|v| *v == 0.0));
}

#[test]
fn non_finite_grid_is_rejected() {
    let b = SphereBasis::new(3, 2, 2).unwrap();
    let mut vals = vec![0.0; b.n_points()];
    vals[3] = f64::NAN;
    let res = GridField::new(&b, 1, vals).and_then(|g| g.analyze());
    assert!(matches!(res, Err(Error::NonFinite(_))));
}

#[test]
fn discrete_orthonormality() {
    for d in [2, 3] {
        let b = SphereBasis::new(d, 10, 2).unwrap();
        let n = b.n_modes();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i] = 1.0;
                b.synthesize_slice(&c)
            })
            .collect();
        let w = b.weights();
        for i in 0..n {
            for j in i..n {
                let ip: f64 = rows[i].iter().zip(&rows[j]).zip(w).map(|((a, b), w)| a * b * w).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() <= 1e-12, "d={d} ⟨{i},{j}⟩ = {ip}");
            }
        }
    }
}

#[test]
fn grid_sizes_match_dimension() {
    let b = SphereBasis::new(2, 8, 4).unwrap();
    assert_eq!(b.n_points(), b.grid_theta().len());
    assert!(b.grid_phi().is_empty());
    let b = SphereBasis::new(3, 8, 4).unwrap();
    assert_eq!(b.n_points(), b.grid_theta().len() * b.grid_phi().len());
    assert!(close(b.weights().iter().sum::<f64>(), 4.0 * PI, 1e-12));
    assert!(SphereBasis::new(4, 3, 2).is_err());
}

#[test]
fn apply_d_eigenvalues() {
    let b3 = SphereBasis::new(3, 4, 2).unwrap();
    let f = SpectralField::mode(&b3, 2, -1, 1.0).unwrap().apply_D();
    assert!(close(f.get(0, 2, -1), 2.5, 1e-15));
    let b2 = SphereBasis::new(2, 6, 2).unwrap();
    assert_eq!(SpectralField::mode(&b2, 0, 0, 1.0).unwrap().apply_D().max_abs(), 0.0);
    let f = SpectralField::mode(&b2, 5, -5, 1.0).unwrap().apply_D();
    assert!(close(f.get(0, 5, -5), 5.0, 1e-15));
}

#[test]
fn product_examples() {
    let b = SphereBasis::new(2, 6, 4).unwrap();
    let s = SpectralField::mode(&b, 1, -1, PI.sqrt()).unwrap(); // sin θ
    let p = s.multiply(&s).unwrap().field;
    assert!(close(p.get(0, 0, 0), 0.5 * (2.0 * PI).sqrt(), 1e-13));
    assert!(close(p.get(0, 2, 2), -0.5 * PI.sqrt(), 1e-13));
    let c = SpectralField::mode(&b, 0, 0, 3.0 * (2.0 * PI).sqrt()).unwrap(); // constant 3
    let f = SpectralField::random(&b, 1, 0, 6, 1.0, 3);
    let out = f.multiply(&c).unwrap();
    assert!(max_diff(out.field.coeffs(), f.scale(3.0).coeffs()) < 1e-13);
    assert!(out.truncation_l2 < 1e-13);
}

#[test]
fn product_basis_mismatch() {
    let a = SpectralField::zeros(&SphereBasis::new(3, 4, 2).unwrap(), 1);
    let b = SpectralField::zeros(&SphereBasis::new(3, 5, 2).unwrap(), 1);
    assert!(matches!(a.multiply(&b), Err(Error::BasisMismatch(_))));
}

#[test]
fn product_support_of_harmonics() {
    for d in [2, 3] {
        let b = SphereBasis::new(d, 10, 4).unwrap();
        for l1 in 0..=5 {
            for l2 in 0..=5 {
                let f = SpectralField::random(&b, 1, l1, l1, 1.0, (10 * l1 + l2) as u64);
                let g = SpectralField::random(&b, 1, l2, l2, 1.0, (10 * l2 + l1 + 100) as u64);
                let e = f.multiply(&g).unwrap().field.degree_energies();
                for (l, x) in e.iter().enumerate() {
                    if l < l1.abs_diff(l2) || l > l1 + l2 {
                        assert!(x.sqrt() <= 1e-12, "d={d} ℓ₁={l1} ℓ₂={l2} ℓ={l}: {}", x.sqrt());
                    }
                }
            }
        }
    }
}

#[test]
fn ri_on_sine_modes() {
    let b = SphereBasis::new(2, 9, 4).unwrap();
    for n in 1..=8usize {
        let u = SpectralField::mode(&b, n, -(n as i64), 1.0).unwrap();
        let r = u.apply_Ri(1).unwrap();
        let want = if n == 1 {
            SpectralField::zeros(&b, 1)
        } else {
            SpectralField::mode(&b, n - 1, -(n as i64 - 1), n as f64).unwrap()
        };
        assert!(max_diff(r.coeffs(), want.coeffs()) < 1e-12, "n={n}");
    }
}

#[test]
fn di_of_constant_and_bad_index() {
    for d in [2, 3] {
        let b = SphereBasis::new(d, 5, 2).unwrap();
        let c = SpectralField::mode(&b, 0, 0, 2.0).unwrap();
        for i in 1..=d {
            assert!(c.apply_Di(i).unwrap().max_abs() < 1e-15);
        }
        assert!(c.apply_Di(0).is_err());
        assert!(c.apply_Ri(d + 1).is_err());
    }
}

/// d=2, u = cos 3θ: D_x u = −sinθ·u′(θ), D_y u = cosθ·u′(θ); checked against central differences.
#[test]
fn di_matches_finite_differences_on_circle() {
    let b = SphereBasis::new(2, 6, 4).unwrap();
    let u = SpectralField::mode(&b, 3, 3, 1.0).unwrap();
    let norm = PI.sqrt();
    let h = 1e-5;
    let du = |th: f64| (((3.0 * (th + h)).cos() - (3.0 * (th - h)).cos()) / (2.0 * h)) / norm;
    let dx = u.apply_Di(1).unwrap();
    let dy = u.apply_Di(2).unwrap();
    let rx = u.apply_Ri(1).unwrap();
    let mut worst = 0.0f64;
    for k in 0..50 {
        let th = 2.0 * PI * k as f64 / 50.0;
        let y = [th.cos(), th.sin()];
        let fd = du(th);
        worst = worst.max((dx.eval_at(&y)[0] + th.sin() * fd).abs());
        worst = worst.max((dy.eval_at(&y)[0] - th.cos() * fd).abs());
        // ℜ_x = D_x + x(𝔇 − 0) with 𝔇 cos3θ = 3cos3θ
        let want = -th.sin() * fd + th.cos() * 3.0 * (3.0 * th).cos() / norm;
        worst = worst.max((rx.eval_at(&y)[0] - want).abs());
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn ri_identity_and_degree_shift_on_sphere() {
    let b = SphereBasis::new(3, 8, 4).unwrap();
    let f = SpectralField::random(&b, 1, 0, 7, 1.0, 5);
    let d_shifted = f.apply_D().sub(&f.scale(0.5)).unwrap();
    for i in 1..=3 {
        let r = f.apply_Ri(i).unwrap();
        let di = f.apply_Di(i).unwrap();
        // y_i(𝔇 − ½)f on the grid
        let g = d_shifted.synthesize();
        let vals: Vec<f64> = g.values().iter().zip(b.points()).map(|(v, p)| v * p[i - 1]).collect();
        let y_term = GridField::new(&b, 1, vals).unwrap().analyze().unwrap();
        let rhs = di.add(&y_term).unwrap();
        assert!(max_diff(r.coeffs(), rhs.coeffs()) < 1e-10);
        for l in 1..=7 {
            let e = SpectralField::random(&b, 1, l, l, 1.0, l as u64).apply_Ri(i).unwrap().degree_energies();
            let off: f64 = e.iter().enumerate().filter(|(k, _)| *k + 1 != l).map(|(_, x)| x).sum();
            assert!(off.sqrt() < 1e-10);
        }
    }
}

#[test]
fn poly_to_sh_examples() {
    let b2 = SphereBasis::new(2, 4, 2).unwrap();
    let f = SpectralField::poly_to_sh(&b2, &[2, 0]).unwrap();
    assert!(close(f.get(0, 0, 0), 0.5 * (2.0 * PI).sqrt(), 1e-13));
    assert!(close(f.get(0, 2, 2), 0.5 * PI.sqrt(), 1e-13));
    let b3 = SphereBasis::new(3, 4, 2).unwrap();
    let x = SpectralField::poly_to_sh(&b3, &[1, 0, 0]).unwrap();
    let e = x.degree_energies();
    assert!(close(e[1], x.l2_norm().powi(2), 1e-14));
    let x2 = SpectralField::poly_to_sh(&b3, &[2, 0, 0]).unwrap();
    // ⟨1/3, 1/√(4π)⟩ = (1/3)·√(4π)
    assert!(close(x2.get(0, 0, 0), (4.0 * PI).sqrt() / 3.0, 1e-13));
    let e = x2.degree_energies();
    assert!(e[1] < 1e-26 && e[3] < 1e-26 && e[2] > 0.1);
    assert!(SpectralField::poly_to_sh(&b3, &[3, 2, 0]).is_err());
}

#[test]
fn sogge_ratio_examples() {
    let b3 = SphereBasis::new(3, 12, 4).unwrap();
    assert!(close(sogge_ratio(&b3, 10).unwrap(), (21.0 / (4.0 * PI)).sqrt(), 1e-10));
    let b2 = SphereBasis::new(2, 12, 4).unwrap();
    let r1 = sogge_ratio(&b2, 1).unwrap();
    for l in 2..=12 {
        assert!(close(sogge_ratio(&b2, l).unwrap(), r1, 1e-12));
    }
    assert!(sogge_ratio(&b2, 13).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesize_analyze_round_trip(d in 2usize..=3, lmax in 1usize..=10, ncomp in 1usize..=3, seed in any::<u64>()) {
        let b = SphereBasis::new(d, lmax, 2).unwrap();
        let f = SpectralField::random(&b, ncomp, 0, lmax, 1.0, seed);
        let back = f.synthesize().analyze().unwrap();
        prop_assert!(max_diff(back.coeffs(), f.coeffs()) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn projections_are_idempotent_and_complete(d in 2usize..=3, lmax in 0usize..=8, seed in any::<u64>()) {
        let b = SphereBasis::new(d, lmax, 2).unwrap();
        let f = SpectralField::random(&b, 2, 0, lmax, 1.0, seed);
        let mut sum = SpectralField::zeros(&b, 2);
        for l in 0..=lmax {
            let p = f.project(l);
            let pp = p.project(l);
            prop_assert_eq!(pp.coeffs(), p.coeffs());
            sum = sum.add(&p).unwrap();
        }
        prop_assert!(max_diff(sum.coeffs(), f.coeffs()) == 0.0);
        prop_assert_eq!(f.project(lmax + 1).max_abs(), 0.0);
    }

    #[test]
    fn d_squared_is_shifted_laplacian(d in 2usize..=3, lmax in 0usize..=8, seed in any::<u64>()) {
        let b = SphereBasis::new(d, lmax, 2).unwrap();
        let f = SpectralField::random(&b, 1, 0, lmax, 1.0, seed);
        let dd = f.apply_D().apply_D();
        let shift = ((d as f64 - 2.0) / 2.0).powi(2);
        for (i, &(l, _)) in b.modes().iter().enumerate() {
            let lap = (l * (l + d - 2)) as f64;
            prop_assert!((dd.coeffs()[i] - (lap + shift) * f.coeffs()[i]).abs() <= 1e-12 * (1.0 + lap));
        }
    }

    #[test]
    fn circle_di_is_theta_derivative(lmax in 1usize..=8, seed in any::<u64>()) {
        let b = SphereBasis::new(2, lmax, 4).unwrap();
        // D_i raises the degree by one
        let f = SpectralField::random(&b, 1, 0, lmax - 1, 1.0, seed);
        // ∂_θ maps cos ℓθ → −ℓ sin ℓθ and sin ℓθ → ℓ cos ℓθ
        let mut c = vec![0.0; b.n_modes()];
        for l in 1..=lmax {
            c[2 * l - 1] = -(l as f64) * f.coeffs()[2 * l];
            c[2 * l] = l as f64 * f.coeffs()[2 * l - 1];
        }
        let dtheta = SpectralField::from_coeffs(&b, 1, c).unwrap().synthesize();
        let dx = f.apply_Di(1).unwrap().synthesize();
        let dy = f.apply_Di(2).unwrap().synthesize();
        for (k, p) in b.points().iter().enumerate() {
            prop_assert!((dx.values()[k] + p[1] * dtheta.values()[k]).abs() < 1e-10);
            prop_assert!((dy.values()[k] - p[0] * dtheta.values()[k]).abs() < 1e-10);
        }
    }
}
