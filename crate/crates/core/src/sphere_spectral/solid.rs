//! Real solid harmonics as exact polynomials: `H_{ℓ,m}(x) = |x|^ℓ φ_{ℓ,m}(x/|x|)`.

use crate::poly::{rat, Poly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::f64::consts::PI;

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial_ratio(l: usize, m: usize) -> f64 {
    // (ℓ−m)!/(ℓ+m)!
    ((l - m + 1)..=(l + m)).fold(1.0, |acc, k| acc / k as f64)
}

/// Real and imaginary parts of (x + i y)^m as polynomials in `nvars` variables.
fn complex_power(nvars: usize, m: u32) -> (Poly, Poly) {
    let mut re = Poly::zero(nvars);
    let mut im = Poly::zero(nvars);
    for k in 0..=m {
        let mut e = vec![0; nvars];
        e[0] = m - k;
        e[1] = k;
        let c = BigRational::from_integer(binomial(m as u64, k as u64));
        let mono = Poly::monomial(e, c);
        match k % 4 {
            0 => re = &re + &mono,
            1 => im = &im + &mono,
            2 => re = &re - &mono,
            _ => im = &im - &mono,
        }
    }
    (re, im)
}

/// Coefficients of the m-th derivative of the Legendre polynomial P_ℓ, indexed by power.
fn legendre_derivative_coeffs(l: usize, m: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); l + 1];
    let two_l = BigRational::from_integer(BigInt::from(2).pow(l as u32));
    for k in 0..=(l / 2) {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let v = BigRational::from_integer(
            binomial(l as u64, k as u64) * binomial((2 * l - 2 * k) as u64, l as u64) * BigInt::from(sign),
        ) / two_l.clone();
        c[l - 2 * k] = v;
    }
    for _ in 0..m {
        let mut next = vec![BigRational::zero(); l + 1];
        for n in 1..=l {
            next[n - 1] = c[n].clone() * BigRational::from_integer(BigInt::from(n));
        }
        c = next;
    }
    c
}

/// Returns `(P, a)` with `a·P` the solid harmonic whose restriction to the sphere is the
/// real orthonormal basis function `φ_{ℓ,m}` (same conventions as [`super::SphereBasis`]).
pub fn solid_harmonic(d: usize, l: usize, m: i64) -> (Poly, f64) {
    match d {
        2 => {
            if l == 0 {
                return (Poly::constant(2, BigRational::one()), 1.0 / (2.0 * PI).sqrt());
            }
            let (re, im) = complex_power(2, l as u32);
            let p = if m > 0 { re } else { im };
            (p, 1.0 / PI.sqrt())
        }
        3 => {
            let ma = m.unsigned_abs() as usize;
            let coeffs = legendre_derivative_coeffs(l, ma);
            let z = Poly::var(3, 2);
            let r2 = Poly::radius_squared(3);
            let mut q = Poly::zero(3);
            for (n, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let k = (l - ma - n) / 2;
                q = &q + &(&z.pow(n as u32) * &r2.pow(k as u32)).scale(c);
            }
            let (re, im) = complex_power(3, ma as u32);
            let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial_ratio(l, ma)).sqrt();
            match m.signum() {
                0 => (q, norm),
                1 => (&re * &q, norm * 2f64.sqrt()),
                _ => (&im * &q, norm * 2f64.sqrt()),
            }
        }
        _ => (Poly::zero(d), 0.0),
    }
}

/// Exact Gauss split of a homogeneous polynomial of degree `k`:
/// `P = H + |x|² Q` with `H` harmonic.
pub fn gauss_split_homogeneous(p: &Poly, k: u32) -> (Poly, Poly) {
    let n = p.nvars() as i64;
    let r2 = Poly::radius_squared(p.nvars());
    let mut harmonic = p.clone();
    let mut quotient = Poly::zero(p.nvars());
    let mut lap = p.clone();
    let mut coef = BigRational::one();
    let mut r_pow = Poly::constant(p.nvars(), BigRational::one());
    let mut j: i64 = 0;
    loop {
        lap = lap.laplacian();
        if lap.is_zero() {
            break;
        }
        j += 1;
        // c_j = (−1)^j / Π_{i<j} (2i+2)(2k+n−4−2i)
        let i = j - 1;
        coef = -coef / rat((2 * i + 2) * (2 * k as i64 + n - 4 - 2 * i), 1);
        let term = lap.scale(&coef);
        quotient = &quotient - &(&r_pow * &term);
        r_pow = &r_pow * &r2;
        harmonic = &harmonic + &(&r_pow * &term);
    }
    (harmonic, quotient)
}
