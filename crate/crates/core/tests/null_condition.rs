use exsc::null_condition::{
    flat_transform, is_null, null_decay_probe, null_form_product, zeta, BilinearFormField, Mat2,
};
use exsc::sphere_spectral::{SpectralField, SphereBasis};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sin3(basis: &std::sync::Arc<SphereBasis>) -> SpectralField {
    SpectralField::mode(basis, 3, -3, 1.0).unwrap()
}

#[test]
fn flat_transform_examples() {
    let z = c(0.0, 0.0);
    assert_eq!(flat_transform(&BilinearFormField::identity()).at(1.1), [[z, c(2.0, 0.0)], [c(2.0, 0.0), z]]);
    assert_eq!(flat_transform(&BilinearFormField::symplectic()).at(-0.4), [[z, c(0.0, 2.0)], [c(0.0, -2.0), z]]);
    let d = BilinearFormField::constant_real([[1.0, 0.0], [0.0, 0.0]]);
    let f = flat_transform(&d).at(0.0);
    assert_eq!(f[0][0], c(1.0, 0.0));
    assert_eq!(d.apply(0.0, zeta(1), zeta(1)), c(1.0, 0.0));
}

#[test]
fn null_classification() {
    assert!(is_null(&BilinearFormField::identity(), 1e-12));
    assert!(is_null(&BilinearFormField::symplectic(), 1e-12));
    assert!(!is_null(&BilinearFormField::constant_real([[1.0, 0.0], [0.0, 0.0]]), 1e-12));
    // c(θ) = 1 + 0.5 cos θ − 0.2 sin 2θ
    let coeffs = [c(0.0, -0.1), c(0.25, 0.0), c(1.0, 0.0), c(0.25, 0.0), c(0.0, 0.1)];
    let id: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let field = BilinearFormField::scalar_times(&coeffs, &id).unwrap();
    assert_eq!(field.lmax(), 2);
    assert!(is_null(&field, 1e-10));
}

#[test]
fn fourier_length_must_be_odd() {
    let v = vec![c(1.0, 0.0); 2];
    assert!(BilinearFormField::from_fourier([[v.clone(), v.clone()], [v.clone(), v]]).is_err());
}

#[test]
fn probe_slopes_for_a_single_mode() {
    let basis = SphereBasis::new(2, 8, 2).unwrap();
    let u = sin3(&basis);
    let s = 3.0;
    // I(∇u, ∇u) = 9e^{−6t}/π exactly: well inside the e^{−2t} bound
    let null = null_decay_probe(&u, &u, &BilinearFormField::identity(), s, (0.5, 5.0), 24).unwrap();
    assert!((null.fit.slope + 6.0).abs() <= 0.05, "{}", null.fit.slope);
    // J(∇u, ∇u) ≡ 0
    assert!(null_decay_probe(&u, &u, &BilinearFormField::symplectic(), s, (0.5, 5.0), 24).is_err());
    let diag = BilinearFormField::constant_real([[1.0, 0.0], [0.0, 0.0]]);
    let ctrl = null_decay_probe(&u, &u, &diag, s, (0.5, 5.0), 24).unwrap();
    assert!(ctrl.fit.slope.abs() <= 0.05, "{}", ctrl.fit.slope);
}

#[test]
fn probe_slopes_for_mixed_data() {
    let b = SphereBasis::new(2, 8, 4).unwrap();
    let u = SpectralField::mode(&b, 1, 1, 1.0).unwrap().add(&SpectralField::mode(&b, 3, -3, 0.5).unwrap()).unwrap();
    let v = SpectralField::mode(&b, 1, -1, 1.0).unwrap().add(&SpectralField::mode(&b, 2, 2, 0.3).unwrap()).unwrap();
    let slope = |a: &BilinearFormField| null_decay_probe(&u, &v, a, 2.6, (0.5, 5.0), 40).unwrap().fit.slope;
    assert!((slope(&BilinearFormField::identity()) + 2.0).abs() <= 0.05);
    assert!((slope(&BilinearFormField::symplectic()) + 2.0).abs() <= 0.05);
    assert!(slope(&BilinearFormField::constant_real([[1.0, 0.0], [0.0, 0.0]])).abs() <= 0.05);
}

#[test]
fn single_interaction_gains_two() {
    // ∇(e^{−3t}sin3θ)·∇(e^{−t}sinθ) = 3e^{−4t}cos2θ: only ℓ = 2, against free decay e^{−2t}.
    let basis = SphereBasis::new(2, 8, 2).unwrap();
    let u = sin3(&basis);
    let v = SpectralField::mode(&basis, 1, -1, 1.0).unwrap();
    let cos2 = basis.index(2, 2).unwrap();
    for t in [0.0, 0.7, 2.0] {
        let prod = null_form_product(&u, &v, &BilinearFormField::identity(), t).unwrap();
        let expect = 3.0 * (-4.0 * t).exp() / PI.sqrt();
        for (i, x) in prod.coeffs().iter().enumerate() {
            let want = if i == cos2 { expect } else { 0.0 };
            assert!((x - want).abs() < 1e-13, "t={t} mode {i}: {x} vs {want}");
        }
    }
}

#[test]
fn probe_rejects_three_dimensional_data() {
    let basis = SphereBasis::new(3, 4, 2).unwrap();
    let u = SpectralField::mode(&basis, 1, 0, 1.0).unwrap();
    assert!(null_decay_probe(&u, &u, &BilinearFormField::identity(), 3.0, (0.5, 5.0), 8).is_err());
}

#[test]
fn zeta_homogeneity() {
    let a = BilinearFormField::from_fourier([
        [vec![c(0.3, 0.1), c(1.0, -2.0), c(0.3, -0.1)], vec![c(0.0, 0.0), c(0.5, 0.5), c(0.0, 0.0)]],
        [vec![c(0.2, 0.0), c(-1.0, 0.0), c(0.2, 0.0)], vec![c(0.0, 0.7), c(2.0, 0.0), c(0.0, -0.7)]],
    ])
    .unwrap();
    for p in [-4i64, -1, 2, 5] {
        for q in [-3i64, 1, 4] {
            for th in [0.0, 0.9, 2.5] {
                let lhs = a.apply(th, zeta(p), zeta(q));
                let rhs = a.apply(th, zeta(p.signum()), zeta(q.signum())) * (p.abs() * q.abs()) as f64;
                assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
            }
        }
    }
}

fn cplx() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
}

fn inverse(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// max |A(ξ, ξ)| over roots ξ = (ξ_t, ±iξ_t) of the symbol.
fn root_defect(a: &BilinearFormField, xs: &[(Complex64, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for &(x, th) in xs {
        for sgn in [1.0, -1.0] {
            let xi = [x, x * c(0.0, sgn)];
            worst = worst.max(a.apply(th, xi, xi).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn null_check_agrees_with_symbol_roots(
        off in (cplx(), cplx()),
        diag in (cplx(), cplx()),
        make_null in any::<bool>(),
        roots in prop::collection::vec((cplx(), 0.0f64..6.3), 64),
    ) {
        let l: Mat2 = [[c(-1.0, 0.0), c(0.0, 1.0)], [c(-1.0, 0.0), c(0.0, -1.0)]];
        let r: Mat2 = [[c(-1.0, 0.0), c(-1.0, 0.0)], [c(0.0, 1.0), c(0.0, -1.0)]];
        let dg = if make_null { (c(0.0, 0.0), c(0.0, 0.0)) } else { diag };
        let flat: Mat2 = [[dg.0, off.0], [off.1, dg.1]];
        let a = mul(&mul(&inverse(&l), &flat), &inverse(&r));
        let field = BilinearFormField::constant(a);
        let defect = root_defect(&field, &roots);
        let scale = roots.iter().map(|p| p.0.norm_sqr()).fold(1.0, f64::max) * 8.0;
        let null = is_null(&field, 1e-12);
        prop_assert_eq!(null, make_null || (dg.0.norm() <= 1e-12 && dg.1.norm() <= 1e-12));
        if null {
            prop_assert!(defect <= 1e-12 * scale, "defect {}", defect);
        } else {
            prop_assert!(defect > 1e-12 * scale);
        }
    }
}
