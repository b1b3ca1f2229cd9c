//! Independent radial oracle: u'' + (d−1)u'/r = κ u^p by adaptive Dormand–Prince 5(4).

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrates y' = f(x, y) from x0 to x1 (either direction) with mixed error control.
pub fn dp45<F>(f: F, x0: f64, y0: &[f64], x1: f64, rtol: f64, atol: f64, blowup: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y0.len();
    let dir = (x1 - x0).signum();
    let mut x = x0;
    let mut y = y0.to_vec();
    let span = (x1 - x0).abs();
    if span == 0.0 {
        return Ok(y);
    }
    let mut h = span.min(1e-3 * span.max(1.0)) * dir;
    let mut k = vec![vec![0.0; n]; 7];
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        k[0] = f(x, &y);
        for s in 1..7 {
            let ys: Vec<f64> = (0..n).map(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()).collect();
            k[s] = f(x + C[s] * h, &ys);
        }
        let y5: Vec<f64> = (0..n).map(|i| y[i] + h * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>()).collect();
        let err = (0..n)
            .map(|i| {
                let e = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                let sc = atol + rtol * y[i].abs().max(y5[i].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / n as f64;
        let err = err.sqrt();
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite() || v.abs() > blowup) {
            if h.abs() < 1e-14 * span {
                return Err(Error::BlowUp { r: x });
            }
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            x += h;
            y = y5;
            steps += 1;
            if steps > 2_000_000 {
                return Err(Error::BlowUp { r: x });
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < 1e-14 * span && err > 1.0 {
            return Err(Error::BlowUp { r: x });
        }
    }
    Ok(y)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Matching {
    /// u ≈ c r^{2−d} + first correction at r_max, c found by secant shooting.
    Asymptotic { r_max: f64 },
    /// Initial value problem from r = 1 with the given slope u'(1).
    Slope(f64),
}

#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub d: usize,
    pub p: u32,
    pub kappa: f64,
    /// Asymptotic coefficient c of u ~ c r^{2−d} (NaN for slope matching).
    pub c: f64,
    pub radii: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

fn rhs(d: usize, p: u32, kappa: f64) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |r, y| vec![y[1], kappa * y[0].powi(p as i32) - (d as f64 - 1.0) * y[1] / r]
}

/// State (u, u') at r_max of the asymptotic branch with coefficient c.
fn asymptotic_state(d: usize, p: u32, kappa: f64, c: f64, r: f64) -> [f64; 2] {
    let a = 2.0 - d as f64;
    let m = a * p as f64 + 2.0;
    let denom = m * (m + d as f64 - 2.0);
    let corr = if denom != 0.0 { kappa * c.powi(p as i32) / denom } else { 0.0 };
    [c * r.powf(a) + corr * r.powf(m), c * a * r.powf(a - 1.0) + corr * m * r.powf(m - 1.0)]
}

/// Radial profile with u(1) = `boundary`, sampled at `radii` (each ≥ 1).
pub fn radial_ode_oracle(
    d: usize,
    p: u32,
    kappa: f64,
    boundary: f64,
    matching: Matching,
    radii: &[f64],
) -> Result<RadialProfile> {
    if d < 3 {
        return Err(Error::InvalidArgument("radial oracle needs d >= 3".into()));
    }
    if radii.iter().any(|r| !(*r >= 1.0)) {
        return Err(Error::InvalidArgument("oracle radii must be >= 1".into()));
    }
    let f = rhs(d, p, kappa);
    let (rtol, atol) = (1e-13, 1e-16);
    let blow = 1e8;
    let (start_r, start, c) = match matching {
        Matching::Slope(s) => (1.0, vec![boundary, s], f64::NAN),
        Matching::Asymptotic { r_max } => {
            let shoot = |c: f64| -> Result<f64> {
                let st = asymptotic_state(d, p, kappa, c, r_max);
                Ok(dp45(&f, r_max, &st, 1.0, rtol, atol, blow)?[0] - boundary)
            };
            let (mut c0, mut c1) = (boundary, boundary * 1.01 + 1e-12);
            let (mut f0, mut f1) = (shoot(c0)?, shoot(c1)?);
            for _ in 0..60 {
                if f1 == f0 || f1.abs() < 1e-15 * boundary.abs().max(1e-300) {
                    break;
                }
                let c2 = c1 - f1 * (c1 - c0) / (f1 - f0);
                c0 = c1;
                f0 = f1;
                c1 = c2;
                f1 = shoot(c1)?;
            }
            (r_max, asymptotic_state(d, p, kappa, c1, r_max).to_vec(), c1)
        }
    };
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = ((radii[a] - start_r).abs(), (radii[b] - start_r).abs());
        da.partial_cmp(&db).unwrap()
    });
    let mut u = vec![0.0; radii.len()];
    let mut du = vec![0.0; radii.len()];
    let (mut r, mut y) = (start_r, start);
    for i in order {
        y = dp45(&f, r, &y, radii[i], rtol, atol, blow)?;
        r = radii[i];
        u[i] = y[0];
        du[i] = y[1];
    }
    Ok(RadialProfile { d, p, kappa, c, radii: radii.to_vec(), u, du })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dp45_exponential() {
        let y = dp45(|_, y| vec![-y[0]], 0.0, &[1.0], 3.0, 1e-12, 1e-15, 1e10).unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn linear_case_is_exact_power() {
        let radii = [1.0, 2.0, 10.0];
        let prof = radial_ode_oracle(3, 5, 0.0, 0.7, Matching::Asymptotic { r_max: 1e3 }, &radii).unwrap();
        for (r, u) in radii.iter().zip(&prof.u) {
            assert!((u - 0.7 / r).abs() < 1e-12);
        }
    }
}
