//! Quick structural self-checks behind `exsc verify`.

use crate::duhamel::{phi, phi_dirichlet, DuhamelOptions, Forcing, TimeGrid};
use crate::equations::fischer_decompose;
use crate::error::Result;
use crate::norms::{self, Orientation};
use crate::null_condition::{is_null, BilinearFormField};
use crate::poly::{rat, Poly};
use crate::sphere_spectral::{sogge_ratio, SpectralField, SphereBasis};

#[derive(Clone, Debug, serde::Serialize)]
pub struct Check {
    pub name: String,
    /// Observed figure of merit (error, ratio, …).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(name: &str, value: f64, tolerance: f64) -> Check {
    Check { name: name.into(), value, tolerance, passed: value <= tolerance }
}

/// Largest relative deviation from Φ(μe^{−κτ}φ_ℓ) = μe^{−κt}/(κ² − λ²)φ_ℓ and its Dirichlet twin.
pub fn duhamel_closed_form(lmax: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    let opts = DuhamelOptions::default();
    for d in [2, 3] {
        let basis = SphereBasis::new(d, lmax, 2)?;
        let grid = TimeGrid::new(0.0, 30.0, 0.02)?;
        for l in 0..=lmax {
            let lam = basis.lambda(l);
            let phi_l = SpectralField::mode(&basis, l, l as i64, 1.0)?;
            let idx = basis.index(l, l as i64).expect("mode exists");
            for dk in [0.5, 1.0, 2.5] {
                let kappa = lam + dk;
                let f = Forcing::separable(&phi_l, &grid, |t| 0.7 * (-kappa * t).exp());
                let (traj, _) = phi(&f, &opts)?;
                let (dir, up, _) = phi_dirichlet(&f, &opts)?;
                let c = 0.7 / (kappa * kappa - lam * lam);
                for k in (0..grid.len()).step_by(25) {
                    let t = grid.t(k);
                    let want = c * (-kappa * t).exp();
                    worst = worst.max((traj.node_v(k)[idx] - want).abs() / want);
                    let dwant = c * ((-kappa * t).exp() - (-lam * t).exp());
                    worst = worst.max((dir.node_v(k)[idx] - dwant).abs() / c);
                }
                worst = worst.max((up.coeffs()[idx] + c).abs() / c);
            }
        }
    }
    Ok(worst)
}

/// Content above degree a + b in the product of degree-a and degree-b fields, relative to the product.
pub fn product_support_leak(d: usize, a: usize, b: usize, seed: u64) -> Result<f64> {
    let basis = SphereBasis::new(d, a + b + 3, 2)?;
    let f = SpectralField::random(&basis, 1, a, a, 1.0, seed);
    let g = SpectralField::random(&basis, 1, b, b, 1.0, seed + 1);
    let prod = f.multiply(&g)?.field;
    let e = prod.degree_energies();
    let total: f64 = e.iter().sum();
    let above: f64 = e.iter().skip(a + b + 1).sum();
    Ok((above / total).sqrt())
}

/// max over i, random f of degree ≤ lmax−1 and t ∈ [0, 6] of
/// e^{t}‖ℜ_i f‖_{Y_{s−1,t}} / ‖f‖_{Y_{s,t}}, plus the largest content of ℜ_i φ_ℓ off degree ℓ − 1.
pub fn ri_gain(d: usize, lmax: usize, s: f64, seed: u64) -> Result<(f64, f64)> {
    let basis = SphereBasis::new(d, lmax, 2)?;
    let mut ratio = 0.0f64;
    let mut leak = 0.0f64;
    for i in 1..=d {
        for l in 1..lmax {
            let f = SpectralField::random(&basis, 1, l, l, 1.0, seed + l as u64);
            let rf = f.apply_Ri(i)?;
            let e = rf.degree_energies();
            let total: f64 = e.iter().sum::<f64>().max(1e-300);
            let off: f64 = e.iter().enumerate().filter(|(k, _)| *k + 1 != l).map(|(_, x)| x).sum();
            leak = leak.max((off / total).sqrt());
        }
        let f = SpectralField::random(&basis, 1, 0, lmax - 1, 1.0, seed);
        let rf = f.apply_Ri(i)?;
        for k in 0..=12 {
            let t = 0.5 * k as f64;
            let r = (t + norms::y_norm_log(&rf, s - 1.0, t)? - norms::y_norm_log(&f, s, t)?).exp();
            ratio = ratio.max(r);
        }
    }
    Ok((ratio, leak))
}

/// max_ℓ sogge_ratio(ℓ)/⟨ℓ⟩^{d/2−1}.
pub fn sogge_bound(d: usize, lmax: usize) -> Result<f64> {
    let basis = SphereBasis::new(d, lmax, 2)?;
    let mut worst = 0.0f64;
    for l in 0..=lmax {
        let b = (1.0 + (l * l) as f64).sqrt().powf(d as f64 / 2.0 - 1.0);
        worst = worst.max(sogge_ratio(&basis, l)? / b);
    }
    Ok(worst)
}

/// |z_norm(v, s, r, ∞) − r^{(d−2)/2}·y_norm(v, s, ln r)| relative, over a radius sweep, both orientations.
pub fn yz_consistency(d: usize, seed: u64) -> Result<f64> {
    let basis = SphereBasis::new(d, 8, 2)?;
    let v = SpectralField::random(&basis, 2, 0, 8, 1.0, seed);
    let s = d as f64 / 2.0 + 1.6;
    let mut worst = 0.0f64;
    for r in [1.0, 1.5, 2.0, 10.0, 100.0] {
        let z = norms::z_norm(&v, s, r, Orientation::Infinity)?;
        let y = r.powf((d as f64 - 2.0) / 2.0) * norms::y_norm(&v, s, r.ln())?;
        worst = worst.max((z - y).abs() / y);
        let rz = 1.0 / r;
        let z0 = norms::z_norm(&v, s, rz, Orientation::Zero)?;
        let y0 = rz.powf((d as f64 - 2.0) / 2.0) * norms::y_norm(&v, s, -rz.ln())?;
        worst = worst.max((z0 - y0).abs() / y0);
    }
    Ok(worst)
}

/// Number of failures of P = h + |x|²q with Δh = 0 (exact rational arithmetic),
/// over x^α for every |α| ≤ max_degree in d = 3.
pub fn fischer_failures(max_degree: u32) -> Result<usize> {
    let mut fails = 0;
    for deg in 0..=max_degree {
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                let p = Poly::monomial(vec![a, b, deg - a - b], rat(1, 1));
                let (h, q) = fischer_decompose(&p)?;
                let back = &h + &(&Poly::radius_squared(3) * &q);
                if !h.laplacian().is_zero() || !(&back - &p).is_zero() {
                    fails += 1;
                }
            }
        }
    }
    Ok(fails)
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut out = vec![check("duhamel_closed_form", duhamel_closed_form(8)?, 1e-8)];
    let mut leak = 0.0f64;
    for d in [2, 3] {
        for (a, b) in [(1, 1), (2, 3), (4, 2)] {
            leak = leak.max(product_support_leak(d, a, b, seed)?);
        }
    }
    out.push(check("product_support", leak, 1e-12));
    let mut ratio = 0.0f64;
    let mut shift = 0.0f64;
    for d in [2, 3] {
        let (r, l) = ri_gain(d, 8, d as f64 / 2.0 + 1.6, seed)?;
        ratio = ratio.max(r);
        shift = shift.max(l);
    }
    out.push(check("ri_degree_shift", shift, 1e-12));
    out.push(check("ri_exponential_gain", ratio, 20.0));
    out.push(check("sogge_bound", sogge_bound(2, 24)?.max(sogge_bound(3, 24)?), 2.0));
    out.push(check("yz_consistency", yz_consistency(2, seed)?.max(yz_consistency(3, seed)?), 1e-10));
    out.push(check("fischer_delta_exact", fischer_failures(8)? as f64, 0.0));
    let nulls = [
        is_null(&BilinearFormField::identity(), 1e-14),
        is_null(&BilinearFormField::symplectic(), 1e-14),
        !is_null(&BilinearFormField::constant_real([[1.0, 0.0], [0.0, 0.0]]), 1e-14),
    ];
    out.push(check("null_classification", nulls.iter().filter(|x| !**x).count() as f64, 0.0));
    Ok(out)
}
