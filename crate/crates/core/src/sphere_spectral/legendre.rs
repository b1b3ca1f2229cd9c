//! Gauss–Legendre nodes and fully normalized associated Legendre functions.
//!
//! Normalization: `P̄_ℓ^m(cos θ) = sqrt((2ℓ+1)/(4π) · (ℓ−m)!/(ℓ+m)!) P_ℓ^m(cos θ)`,
//! without the Condon–Shortley phase, so that `P̄_ℓ^0(1) = sqrt((2ℓ+1)/(4π))`.

use std::f64::consts::PI;

/// Gauss–Legendre rule on [−1, 1] with `n` nodes, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = ((i as f64 + 0.75) / (nf + 0.5) * PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_p_and_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_p_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Triangular table of `P̄_ℓ^m(x)` for `0 ≤ m ≤ ℓ ≤ lmax`, stored at `tri_index(ℓ, m)`.
pub fn alf_table(lmax: usize, x: f64, sin_theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; tri_len(lmax)];
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta;
        }
        out[tri_index(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mf = m as f64;
        let mut p_prev = pmm;
        let mut p_cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
        out[tri_index(m + 1, m)] = p_cur;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (x * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
            out[tri_index(l, m)] = p_cur;
        }
    }
    out
}

/// `dP̄_ℓ^m(cos θ)/dθ` from a table produced by [`alf_table`]; requires `sin θ ≠ 0`.
pub fn alf_dtheta(lmax: usize, table: &[f64], x: f64, sin_theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; tri_len(lmax)];
    for l in 0..=lmax {
        let lf = l as f64;
        for m in 0..=l {
            let mf = m as f64;
            let lower = if l > m {
                ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt()
                    * table[tri_index(l - 1, m)]
            } else {
                0.0
            };
            out[tri_index(l, m)] = (lf * x * table[tri_index(l, m)] - lower) / sin_theta;
        }
    }
    out
}

#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

#[inline]
pub fn tri_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}: {q} vs {exact}");
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let th: f64 = 0.7;
        let (x, s) = (th.cos(), th.sin());
        let t = alf_table(2, x, s);
        let c = 1.0 / (4.0 * PI);
        assert!((t[tri_index(1, 0)] - (3.0 * c).sqrt() * x).abs() < 1e-15);
        // P_1^1 = sinθ, N = sqrt(3/(4π)/2)
        assert!((t[tri_index(1, 1)] - (1.5 * c).sqrt() * s).abs() < 1e-15);
        // P_2^0 = (3x²−1)/2
        assert!((t[tri_index(2, 0)] - (5.0 * c).sqrt() * 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        // P_2^2 = 3 sin²θ, N = sqrt(5/(4π)/24)
        assert!((t[tri_index(2, 2)] - (5.0 * c / 24.0).sqrt() * 3.0 * s * s).abs() < 1e-15);
    }

    #[test]
    fn dtheta_matches_finite_difference() {
        let lmax = 12;
        let th: f64 = 1.1;
        let h = 1e-6;
        let t = alf_table(lmax, th.cos(), th.sin());
        let d = alf_dtheta(lmax, &t, th.cos(), th.sin());
        let tp = alf_table(lmax, (th + h).cos(), (th + h).sin());
        let tm = alf_table(lmax, (th - h).cos(), (th - h).sin());
        for i in 0..tri_len(lmax) {
            let fd = (tp[i] - tm[i]) / (2.0 * h);
            assert!((fd - d[i]).abs() < 1e-7, "{i}: {fd} vs {}", d[i]);
        }
    }
}
