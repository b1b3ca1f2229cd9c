use astro_float::{BigFloat, Consts, RoundingMode};
use exsc::duhamel::{phi, DuhamelOptions, Forcing, TimeGrid, Trajectory};
use exsc::norms::{h1_partial, hs_norm, traj_norm, x_nu_norm, y_norm, y_norm_log, z_norm, Orientation};
use exsc::solver::Monomial;
use exsc::sphere_spectral::{SpectralField, SphereBasis};
use proptest::prelude::*;

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// ln‖v‖_{Y_{s,t}} summed in 256-bit floating point.
fn y_log_oracle(v: &SpectralField, s: f64, t: f64) -> f64 {
    let mut cc = Consts::new().unwrap();
    let b = v.basis();
    let mut acc = BigFloat::from_f64(0.0, P);
    for (l, e) in v.degree_energies().iter().enumerate() {
        if *e == 0.0 {
            continue;
        }
        let bracket = BigFloat::from_f64(1.0 + (l * l) as f64, P).ln(P, RM, &mut cc);
        let expo = BigFloat::from_f64(s, P)
            .mul(&bracket, P, RM)
            .add(&BigFloat::from_f64(2.0 * b.lambda(l) * t, P), P, RM);
        let term = expo.exp(P, RM, &mut cc).mul(&BigFloat::from_f64(*e, P), P, RM);
        acc = acc.add(&term, P, RM);
    }
    let half = BigFloat::from_f64(0.5, P);
    let out = acc.ln(P, RM, &mut cc).mul(&half, P, RM);
    out.format(astro_float::Radix::Dec, RM, &mut cc).unwrap().parse::<f64>().unwrap()
}

#[test]
fn single_mode_value() {
    let b = SphereBasis::new(3, 3, 2).unwrap();
    let v = SpectralField::mode(&b, 1, 0, 1.0).unwrap();
    let y = y_norm(&v, 2.0, 1.0).unwrap();
    assert!((y - 2.0 * 1.5f64.exp()).abs() < 1e-12, "{y}");
    assert!((y - 8.9634).abs() < 1e-4);
}

#[test]
fn t_zero_is_sobolev_norm() {
    let b = SphereBasis::new(2, 6, 2).unwrap();
    let v = SpectralField::random(&b, 2, 0, 6, 1.0, 1);
    let direct: f64 = v.degree_energies().iter().enumerate().map(|(l, e)| (1.0 + (l * l) as f64).powf(2.6) * e).sum::<f64>().sqrt();
    assert!((y_norm(&v, 2.6, 0.0).unwrap() - direct).abs() < 1e-12 * direct);
    assert_eq!(y_norm(&v, 2.6, 0.0).unwrap(), hs_norm(&v, 2.6));
    assert!(y_norm(&v, 2.6, -0.1).is_err());
}

#[test]
fn overflowing_weights_match_extended_precision() {
    for d in [2, 3] {
        let b = SphereBasis::new(d, 40, 1).unwrap();
        let v = SpectralField::random(&b, 1, 0, 40, 1.0, 9);
        let naive: f64 = v
            .degree_energies()
            .iter()
            .enumerate()
            .map(|(l, e)| (1.0 + (l * l) as f64).powf(3.1) * (2.0 * b.lambda(l) * 20.0).exp() * e)
            .sum();
        assert!(naive.is_infinite());
        let got = y_norm_log(&v, 3.1, 20.0).unwrap();
        let want = y_log_oracle(&v, 3.1, 20.0);
        assert!(got.is_finite());
        assert!(((got - want) / want).abs() < 1e-10, "d={d}: {got} vs {want}");
    }
}

#[test]
fn z_norm_examples() {
    let b = SphereBasis::new(3, 4, 2).unwrap();
    let v = SpectralField::random(&b, 1, 0, 4, 1.0, 2);
    let s = 3.1;
    assert!((z_norm(&v, s, 1.0, Orientation::Infinity).unwrap() - hs_norm(&v, s)).abs() < 1e-13);
    assert!((z_norm(&v, s, 1.0, Orientation::Zero).unwrap() - hs_norm(&v, s)).abs() < 1e-13);
    let phi0 = SpectralField::mode(&b, 0, 0, 1.0).unwrap();
    let z = z_norm(&phi0, s, 4.0, Orientation::Infinity).unwrap();
    assert!((z - 4.0 * hs_norm(&phi0, s)).abs() < 1e-13);
    assert!(z_norm(&v, s, 0.5, Orientation::Infinity).is_err());
    assert!(z_norm(&v, s, 2.0, Orientation::Zero).is_err());
    assert!(z_norm(&v, s, 0.0, Orientation::Zero).is_err());
}

#[test]
fn linear_trajectory_norm_bounds() {
    for d in [2, 3] {
        let b = SphereBasis::new(d, 6, 2).unwrap();
        let u0 = SpectralField::random(&b, 1, 0, 6, 1.0, 4);
        let s = d as f64 / 2.0 + 1.6;
        let grid = TimeGrid::new(0.0, 10.0, 0.05).unwrap();
        let lin = Trajectory::linear(&u0, &grid, 0.0);
        let n = traj_norm(&lin, s, 0.0, 0.0).unwrap().value;
        let h = hs_norm(&u0, s);
        assert!(n >= h * (1.0 - 1e-12) && n <= (d as f64 + 2.0) / 2.0 * h, "d={d}: {n} vs {h}");
        // equality case: ‖u0‖_{H^s} + ‖𝔇u0‖_{H^{s−1}}, constant along the flow
        let want = h + hs_norm(&u0.apply_D(), s - 1.0);
        assert!((n - want).abs() < 1e-10 * want);
        let later = traj_norm(&lin, s, 5.0, 0.0).unwrap().value;
        assert!((later - want).abs() < 1e-10 * want);
        let zero = Trajectory::zeros(&grid, &b, 1);
        assert_eq!(traj_norm(&zero, s, 0.0, 0.0).unwrap().value, 0.0);
        assert!(traj_norm(&lin, s, 11.0, 0.0).is_err());
    }
}

#[test]
fn x_nu_norm_cases() {
    let b = SphereBasis::new(3, 4, 2).unwrap();
    let grid = TimeGrid::new(0.0, 30.0, 0.02).unwrap();
    let l = 2;
    let lam = b.lambda(l);
    let kappa = lam + 1.0;
    let phi_l = SpectralField::mode(&b, l, 1, 1.0).unwrap();
    let f = Forcing::separable(&phi_l, &grid, |t| (-kappa * t).exp());
    let (traj, _) = phi(&f, &DuhamelOptions::default()).unwrap();
    let s = 3.1;
    // Φ(e^{−κτ}φ) = e^{−κt}/(κ²−λ²)φ, so e^{ν t}𝒴^{0}_{s,t} ≡ ⟨ℓ⟩^s (1 + κ⟨ℓ⟩^{−1})/(κ²−λ²) for ν = κ − λ
    let bracket = (1.0 + (l * l) as f64).sqrt();
    let want = bracket.powf(s) * (1.0 + kappa / bracket) / (kappa * kappa - lam * lam);
    let x = x_nu_norm(&traj, s, kappa - lam, 0.0, 0.0).unwrap();
    assert!(((x.value - want) / want).abs() < 1e-8, "{} vs {want}", x.value);
    assert!(!x.unbounded);
    let big = x_nu_norm(&traj, s, kappa - lam + 0.5, 0.0, 0.0).unwrap();
    assert!(big.unbounded);
    assert!(x_nu_norm(&traj, s, 0.0, 0.0, 0.0).is_err());
}

fn power(d: usize, p: u32) -> Vec<Monomial> {
    vec![Monomial { comp: 0, p: vec![p], q: vec![0; d], a: -1.0 }]
}

#[test]
fn h1_partial_examples() {
    let s = 3.1;
    let sq = power(3, 2);
    let a = h1_partial(&sq, 3, 1, s, 0.1).unwrap();
    let b = h1_partial(&sq, 3, 1, s, 0.2).unwrap();
    assert!((b / a - 2.0).abs() < 1e-12);
    assert_eq!(h1_partial(&sq, 3, 1, s, 0.0).unwrap(), 0.0);
    let q5 = power(3, 5);
    assert!((h1_partial(&q5, 3, 1, s, 0.1).unwrap() - 5.0 * 1e-4).abs() < 1e-15);
    // gradient monomial: ∂₁u·∂₁u has degree 2, vanishes at σ = 0
    let g = vec![Monomial { comp: 0, p: vec![0], q: vec![2, 0, 0], a: 1.0 }];
    assert_eq!(h1_partial(&g, 3, 1, s, 0.0).unwrap(), 0.0);
    assert!(h1_partial(&g, 3, 1, s, 0.1).unwrap() > 0.0);
    assert!(h1_partial(&[], 3, 1, s, 0.1).is_err());
}

#[test]
fn product_law_ratio_is_bounded() {
    let mut worst = 0.0f64;
    for d in [2, 3] {
        let b = SphereBasis::new(d, 8, 4).unwrap();
        let s = d as f64 / 2.0 + 1.6;
        for seed in 0..12 {
            let u = SpectralField::random(&b, 1, 0, 4, 1.0, seed);
            let v = SpectralField::random(&b, 1, 0, 4, 1.0, seed + 100);
            let uv = u.multiply(&v).unwrap().field;
            for k in 0..=10 {
                let t = 0.5 * k as f64;
                let lhs = y_norm_log(&uv, s, t).unwrap();
                let rhs = -t * (d as f64 - 2.0) / 2.0 + y_norm_log(&u, s, t).unwrap() + y_norm_log(&v, s, t).unwrap();
                worst = worst.max((lhs - rhs).exp());
            }
        }
    }
    assert!(worst < 1.0, "product constant {worst}");
}

#[test]
fn monomial_norm_ratio_is_bounded() {
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        let b = SphereBasis::new(d, 8, 4).unwrap();
        let s = d as f64 / 2.0 + 1.6;
        for deg in 0..=8u32 {
            let alphas: Vec<Vec<u32>> = if d == 2 {
                (0..=deg).map(|a| vec![a, deg - a]).collect()
            } else {
                (0..=deg).flat_map(|a| (0..=deg - a).map(move |c| vec![a, c, deg - a - c])).collect()
            };
            for alpha in alphas {
                let f = SpectralField::poly_to_sh(&b, &alpha).unwrap();
                for k in 0..=10 {
                    let t = 0.5 * k as f64;
                    let bound = (deg as f64 + (d as f64 - 2.0) / 2.0) * t + (s + 1.0) * 0.5 * (1.0 + (deg * deg) as f64).ln();
                    worst = worst.max((y_norm_log(&f, s, t).unwrap() - bound).exp());
                }
            }
        }
    }
    assert!(worst < 10.0, "monomial constant {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn y_norm_nondecreasing_in_t(d in 2usize..=3, seed in any::<u64>(), t in 0.0f64..10.0, dt in 0.0f64..5.0) {
        let b = SphereBasis::new(d, 6, 2).unwrap();
        let v = SpectralField::random(&b, 2, 0, 6, 1.0, seed);
        prop_assert!(y_norm_log(&v, 3.0, t + dt).unwrap() >= y_norm_log(&v, 3.0, t).unwrap() - 1e-14);
    }

    #[test]
    fn z_norm_monotone_in_r(d in 2usize..=3, seed in any::<u64>(), r in 1.0f64..50.0, k in 1.0f64..3.0) {
        let b = SphereBasis::new(d, 6, 2).unwrap();
        let v = SpectralField::random(&b, 1, 0, 6, 1.0, seed);
        let s = d as f64 / 2.0 + 1.6;
        prop_assert!(z_norm(&v, s, r, Orientation::Infinity).unwrap() <= z_norm(&v, s, r * k, Orientation::Infinity).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn log_norm_matches_oracle(d in 2usize..=3, seed in any::<u64>(), t in 0.0f64..30.0) {
        let b = SphereBasis::new(d, 12, 1).unwrap();
        let v = SpectralField::random(&b, 1, 0, 12, 1.0, seed);
        let got = y_norm_log(&v, 2.6, t).unwrap();
        let want = y_log_oracle(&v, 2.6, t);
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
    }
}
