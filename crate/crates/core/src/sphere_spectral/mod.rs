//! Real spherical-harmonic analysis and synthesis on S¹ and S².
//!
//! Mode layout is `(ℓ, m)`-ascending. On S¹ degree ℓ ≥ 1 carries `m = −ℓ` (sin ℓθ)
//! and `m = +ℓ` (cos ℓθ); on S² the real `Y_{ℓ,m}` use cos(mφ) for m > 0 and
//! sin(|m|φ) for m < 0. All basis functions are L²-orthonormal.
//!
//! The S² grid is Gauss–Legendre in colatitude times a uniform longitude grid, sized so
//! that the quadrature integrates spherical polynomials of degree `oversample·lmax` exactly.

pub mod legendre;
mod field;
pub mod solid;

pub use field::{sogge_ratio, GridField, MultiplyOutput, SpectralField};

use crate::error::{Error, Result};
use legendre::{alf_dtheta, alf_table, gauss_legendre, tri_index, tri_len};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

#[derive(Debug)]
enum Tables {
    Circle {
        // [ℓ][point]
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Sphere {
        // [j][tri(ℓ,m)]
        plm: Vec<f64>,
        dplm: Vec<f64>,
        plm_over_sin: Vec<f64>,
        // [m][k]
        cos_m: Vec<f64>,
        sin_m: Vec<f64>,
        cos_t: Vec<f64>,
        sin_t: Vec<f64>,
    },
}

#[derive(Debug)]
pub struct SphereBasis {
    d: usize,
    lmax: usize,
    oversample: usize,
    modes: Vec<(usize, i64)>,
    grid_theta: Vec<f64>,
    grid_phi: Vec<f64>,
    weights: Vec<f64>,
    points: Vec<[f64; 3]>,
    tables: Tables,
    r_matrices: OnceLock<Vec<Vec<f64>>>,
}

impl SphereBasis {
    pub fn new(d: usize, lmax: usize, oversample: usize) -> Result<Arc<Self>> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidArgument(format!("dimension d = {d} not in {{2,3}}")));
        }
        if oversample < 1 {
            return Err(Error::InvalidArgument("oversample must be ≥ 1".into()));
        }
        // Exact degree of the quadrature; at least 2·lmax so analysis itself is exact.
        let exact = oversample.max(2) * lmax;
        let basis = if d == 2 { Self::circle(lmax, oversample, exact) } else { Self::sphere(lmax, oversample, exact) };
        Ok(Arc::new(basis))
    }

    fn circle(lmax: usize, oversample: usize, exact: usize) -> Self {
        let n = (exact + 1).max(3);
        let theta: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let mut cos = vec![0.0; (lmax + 1) * n];
        let mut sin = vec![0.0; (lmax + 1) * n];
        for l in 0..=lmax {
            for (k, th) in theta.iter().enumerate() {
                cos[l * n + k] = (l as f64 * th).cos();
                sin[l * n + k] = (l as f64 * th).sin();
            }
        }
        let mut modes = vec![(0, 0)];
        for l in 1..=lmax {
            modes.push((l, -(l as i64)));
            modes.push((l, l as i64));
        }
        let points = theta.iter().map(|t| [t.cos(), t.sin(), 0.0]).collect();
        Self {
            d: 2,
            lmax,
            oversample,
            modes,
            weights: vec![2.0 * PI / n as f64; n],
            grid_theta: theta,
            grid_phi: Vec::new(),
            points,
            tables: Tables::Circle { cos, sin },
            r_matrices: OnceLock::new(),
        }
    }

    fn sphere(lmax: usize, oversample: usize, exact: usize) -> Self {
        let nt = exact / 2 + 1;
        let np = (exact + 1).max(3);
        let (x, w) = gauss_legendre(nt);
        // colatitude ascending: x = cos θ descending
        let theta: Vec<f64> = x.iter().rev().map(|xi| xi.acos()).collect();
        let wt: Vec<f64> = w.iter().rev().copied().collect();
        let phi: Vec<f64> = (0..np).map(|k| 2.0 * PI * k as f64 / np as f64).collect();
        let tl = tri_len(lmax);
        let mut plm = vec![0.0; nt * tl];
        let mut dplm = vec![0.0; nt * tl];
        let mut plm_over_sin = vec![0.0; nt * tl];
        let mut cos_t = vec![0.0; nt];
        let mut sin_t = vec![0.0; nt];
        for (j, th) in theta.iter().enumerate() {
            let (c, s) = (th.cos(), th.sin());
            cos_t[j] = c;
            sin_t[j] = s;
            let t = alf_table(lmax, c, s);
            let dt = alf_dtheta(lmax, &t, c, s);
            for i in 0..tl {
                plm[j * tl + i] = t[i];
                dplm[j * tl + i] = dt[i];
                plm_over_sin[j * tl + i] = t[i] / s;
            }
        }
        let mut cos_m = vec![0.0; (lmax + 1) * np];
        let mut sin_m = vec![0.0; (lmax + 1) * np];
        for m in 0..=lmax {
            for (k, p) in phi.iter().enumerate() {
                cos_m[m * np + k] = (m as f64 * p).cos();
                sin_m[m * np + k] = (m as f64 * p).sin();
            }
        }
        let mut modes = Vec::new();
        for l in 0..=lmax {
            for m in -(l as i64)..=(l as i64) {
                modes.push((l, m));
            }
        }
        let mut weights = Vec::with_capacity(nt * np);
        let mut points = Vec::with_capacity(nt * np);
        for j in 0..nt {
            for p in &phi {
                weights.push(wt[j] * 2.0 * PI / np as f64);
                points.push([sin_t[j] * p.cos(), sin_t[j] * p.sin(), cos_t[j]]);
            }
        }
        Self {
            d: 3,
            lmax,
            oversample,
            modes,
            grid_theta: theta,
            grid_phi: phi,
            weights,
            points,
            tables: Tables::Sphere { plm, dplm, plm_over_sin, cos_m, sin_m, cos_t, sin_t },
            r_matrices: OnceLock::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn lmax(&self) -> usize {
        self.lmax
    }
    pub fn oversample(&self) -> usize {
        self.oversample
    }
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }
    pub fn n_points(&self) -> usize {
        self.weights.len()
    }
    pub fn modes(&self) -> &[(usize, i64)] {
        &self.modes
    }
    pub fn grid_theta(&self) -> &[f64] {
        &self.grid_theta
    }
    pub fn grid_phi(&self) -> &[f64] {
        &self.grid_phi
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Grid points as Cartesian unit vectors (third entry zero on S¹).
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Eigenvalue of 𝔇 on degree ℓ: ℓ + (d−2)/2.
    pub fn lambda(&self, l: usize) -> f64 {
        l as f64 + (self.d as f64 - 2.0) / 2.0
    }

    pub fn index(&self, l: usize, m: i64) -> Option<usize> {
        if l > self.lmax {
            return None;
        }
        match self.d {
            2 => match (l, m) {
                (0, 0) => Some(0),
                (l, m) if l > 0 && m == -(l as i64) => Some(2 * l - 1),
                (l, m) if l > 0 && m == l as i64 => Some(2 * l),
                _ => None,
            },
            _ => {
                if m.unsigned_abs() as usize > l {
                    None
                } else {
                    Some(((l * l + l) as i64 + m) as usize)
                }
            }
        }
    }

    pub fn same_as(&self, other: &SphereBasis) -> bool {
        std::ptr::eq(self, other)
            || (self.d == other.d && self.lmax == other.lmax && self.oversample == other.oversample)
    }

    /// Grid values of Σ c_{ℓm} φ_{ℓm}.
    pub fn synthesize_slice(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_points()];
        match &self.tables {
            Tables::Circle { cos, sin } => {
                let n = self.n_points();
                let c0 = coeffs[0] / (2.0 * PI).sqrt();
                out.iter_mut().for_each(|v| *v = c0);
                let s = 1.0 / PI.sqrt();
                for l in 1..=self.lmax {
                    let (a, b) = (coeffs[2 * l] * s, coeffs[2 * l - 1] * s);
                    if a == 0.0 && b == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        out[k] += a * cos[l * n + k] + b * sin[l * n + k];
                    }
                }
            }
            Tables::Sphere { plm, cos_m, sin_m, .. } => {
                self.sphere_synth(coeffs, plm, cos_m, sin_m, false, &mut out);
            }
        }
        out
    }

    fn sphere_synth(
        &self,
        coeffs: &[f64],
        table: &[f64],
        cos_m: &[f64],
        sin_m: &[f64],
        phi_derivative: bool,
        out: &mut [f64],
    ) {
        let lmax = self.lmax;
        let np = self.grid_phi.len();
        let tl = tri_len(lmax);
        let sqrt2 = 2f64.sqrt();
        let mut a = vec![0.0; lmax + 1];
        let mut b = vec![0.0; lmax + 1];
        for j in 0..self.grid_theta.len() {
            let row = &table[j * tl..(j + 1) * tl];
            for m in 0..=lmax {
                let (mut sa, mut sb) = (0.0, 0.0);
                for l in m..=lmax {
                    let p = row[tri_index(l, m)];
                    let base = l * l + l;
                    sa += coeffs[base + m] * p;
                    if m > 0 {
                        sb += coeffs[base - m] * p;
                    }
                }
                a[m] = sa;
                b[m] = sb;
            }
            let dst = &mut out[j * np..(j + 1) * np];
            if phi_derivative {
                // (1/sinθ) ∂_φ: table already carries 1/sinθ; factor m applied here.
                dst.iter_mut().for_each(|v| *v = 0.0);
                for m in 1..=lmax {
                    let (am, bm) = (a[m] * sqrt2 * m as f64, b[m] * sqrt2 * m as f64);
                    if am == 0.0 && bm == 0.0 {
                        continue;
                    }
                    let (cr, sr) = (&cos_m[m * np..(m + 1) * np], &sin_m[m * np..(m + 1) * np]);
                    for k in 0..np {
                        dst[k] += -am * sr[k] + bm * cr[k];
                    }
                }
            } else {
                dst.iter_mut().for_each(|v| *v = a[0]);
                for m in 1..=lmax {
                    let (am, bm) = (a[m] * sqrt2, b[m] * sqrt2);
                    if am == 0.0 && bm == 0.0 {
                        continue;
                    }
                    let (cr, sr) = (&cos_m[m * np..(m + 1) * np], &sin_m[m * np..(m + 1) * np]);
                    for k in 0..np {
                        dst[k] += am * cr[k] + bm * sr[k];
                    }
                }
            }
        }
    }

    /// Discrete inner products ⟨g, φ_{ℓm}⟩ with the grid quadrature.
    pub fn analyze_slice(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_modes()];
        match &self.tables {
            Tables::Circle { cos, sin } => {
                let n = self.n_points();
                let w = 2.0 * PI / n as f64;
                out[0] = values.iter().sum::<f64>() * w / (2.0 * PI).sqrt();
                let s = w / PI.sqrt();
                for l in 1..=self.lmax {
                    let (mut a, mut b) = (0.0, 0.0);
                    for k in 0..n {
                        a += values[k] * cos[l * n + k];
                        b += values[k] * sin[l * n + k];
                    }
                    out[2 * l] = a * s;
                    out[2 * l - 1] = b * s;
                }
            }
            Tables::Sphere { plm, cos_m, sin_m, .. } => {
                let lmax = self.lmax;
                let np = self.grid_phi.len();
                let nt = self.grid_theta.len();
                let tl = tri_len(lmax);
                let sqrt2 = 2f64.sqrt();
                for j in 0..nt {
                    let wj = self.weights[j * np];
                    let row = &values[j * np..(j + 1) * np];
                    let prow = &plm[j * tl..(j + 1) * tl];
                    for m in 0..=lmax {
                        let (cr, sr) = (&cos_m[m * np..(m + 1) * np], &sin_m[m * np..(m + 1) * np]);
                        let (mut a, mut b) = (0.0, 0.0);
                        for k in 0..np {
                            a += row[k] * cr[k];
                            b += row[k] * sr[k];
                        }
                        let scale = if m == 0 { wj } else { wj * sqrt2 };
                        let (a, b) = (a * scale, b * scale);
                        for l in m..=lmax {
                            let p = prow[tri_index(l, m)];
                            let base = l * l + l;
                            out[base + m] += a * p;
                            if m > 0 {
                                out[base - m] += b * p;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Grid values of D_i f = e_i·∇_S f for i = 0..d, laid out `[i][point]`.
    pub fn tangential_gradient_slice(&self, coeffs: &[f64]) -> Vec<f64> {
        let npts = self.n_points();
        let mut out = vec![0.0; self.d * npts];
        if self.lmax == 0 {
            return out;
        }
        match &self.tables {
            Tables::Circle { cos, sin } => {
                let n = npts;
                let s = 1.0 / PI.sqrt();
                let mut dth = vec![0.0; n];
                for l in 1..=self.lmax {
                    let lf = l as f64;
                    let (a, b) = (coeffs[2 * l] * s * lf, coeffs[2 * l - 1] * s * lf);
                    if a == 0.0 && b == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        dth[k] += -a * sin[l * n + k] + b * cos[l * n + k];
                    }
                }
                for k in 0..n {
                    let [c, sn, _] = self.points[k];
                    out[k] = -sn * dth[k];
                    out[n + k] = c * dth[k];
                }
            }
            Tables::Sphere { dplm, plm_over_sin, cos_m, sin_m, cos_t, sin_t, .. } => {
                let mut dth = vec![0.0; npts];
                let mut dph = vec![0.0; npts];
                self.sphere_synth(coeffs, dplm, cos_m, sin_m, false, &mut dth);
                self.sphere_synth(coeffs, plm_over_sin, cos_m, sin_m, true, &mut dph);
                let np = self.grid_phi.len();
                for j in 0..self.grid_theta.len() {
                    for k in 0..np {
                        let p = j * np + k;
                        let (cp, sp) = (cos_m[np + k], sin_m[np + k]);
                        let (ct, st) = (cos_t[j], sin_t[j]);
                        out[p] = ct * cp * dth[p] - sp * dph[p];
                        out[npts + p] = ct * sp * dth[p] + cp * dph[p];
                        out[2 * npts + p] = -st * dth[p];
                    }
                }
            }
        }
        out
    }

    /// Values of every basis function at an arbitrary unit vector `y`.
    pub fn basis_values_at(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_modes()];
        match self.d {
            2 => {
                let th = y[1].atan2(y[0]);
                out[0] = 1.0 / (2.0 * PI).sqrt();
                let s = 1.0 / PI.sqrt();
                for l in 1..=self.lmax {
                    out[2 * l - 1] = (l as f64 * th).sin() * s;
                    out[2 * l] = (l as f64 * th).cos() * s;
                }
            }
            _ => {
                let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                let ct = (y[2] / r).clamp(-1.0, 1.0);
                let st = (y[0] * y[0] + y[1] * y[1]).sqrt() / r;
                let ph = y[1].atan2(y[0]);
                let t = alf_table(self.lmax, ct, st);
                let sqrt2 = 2f64.sqrt();
                for l in 0..=self.lmax {
                    let base = l * l + l;
                    out[base] = t[tri_index(l, 0)];
                    for m in 1..=l {
                        let p = t[tri_index(l, m)] * sqrt2;
                        out[base + m] = p * (m as f64 * ph).cos();
                        out[base - m] = p * (m as f64 * ph).sin();
                    }
                }
            }
        }
        out
    }

    /// Dense matrices of ℜ_i (row = output mode, column = input mode), built by exact
    /// differentiation of the solid harmonics and re-expansion on the grid.
    pub fn r_matrices(&self) -> &Vec<Vec<f64>> {
        self.r_matrices.get_or_init(|| {
            let n = self.n_modes();
            let mut mats = vec![vec![0.0; n * n]; self.d];
            for (col, &(l, m)) in self.modes.iter().enumerate() {
                if l == 0 {
                    continue;
                }
                let (p, a) = solid::solid_harmonic(self.d, l, m);
                for (i, mat) in mats.iter_mut().enumerate() {
                    let dp = p.derivative(i).to_f64_terms();
                    let vals: Vec<f64> = self
                        .points
                        .iter()
                        .map(|y| {
                            a * dp
                                .iter()
                                .map(|(e, c)| c * e.iter().zip(y.iter()).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
                                .sum::<f64>()
                        })
                        .collect();
                    let coeffs = self.analyze_slice(&vals);
                    for (row, c) in coeffs.into_iter().enumerate() {
                        mat[row * n + col] = c;
                    }
                }
            }
            mats
        })
    }
}
