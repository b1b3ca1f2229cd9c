//! Elliptic null condition in d = 2: the flat transform, null checks and the decay probe.

use crate::cli::fit::{fit_rate, Abscissa, RateFit};
use crate::error::{Error, Result};
use crate::norms;
use crate::sphere_spectral::SpectralField;
use num_complex::Complex64;

/// 2×2 complex matrix field A(θ) whose entries are Fourier series Σ_{|k|≤L} c_k e^{ikθ},
/// acting on (t, θ) covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearFormField {
    lmax: usize,
    /// entries[a][b][k + L]
    entries: [[Vec<Complex64>; 2]; 2],
}

pub type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl BilinearFormField {
    pub fn constant(m: Mat2) -> Self {
        let e = |a: usize, b: usize| vec![m[a][b]];
        Self { lmax: 0, entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn constant_real(m: [[f64; 2]; 2]) -> Self {
        Self::constant([[c(m[0][0], 0.0), c(m[0][1], 0.0)], [c(m[1][0], 0.0), c(m[1][1], 0.0)]])
    }

    pub fn identity() -> Self {
        Self::constant_real([[1.0, 0.0], [0.0, 1.0]])
    }

    /// The symplectic form J = [[0, 1], [−1, 0]].
    pub fn symplectic() -> Self {
        Self::constant_real([[0.0, 1.0], [-1.0, 0.0]])
    }

    /// Entries given as Fourier coefficient vectors of length 2L + 1 (index k + L).
    pub fn from_fourier(entries: [[Vec<Complex64>; 2]; 2]) -> Result<Self> {
        let len = entries[0][0].len();
        if len % 2 == 0 || entries.iter().flatten().any(|e| e.len() != len) {
            return Err(Error::InvalidArgument("Fourier vectors must share an odd length 2L+1".into()));
        }
        if entries.iter().flatten().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("bilinear form coefficients".into()));
        }
        Ok(Self { lmax: (len - 1) / 2, entries })
    }

    /// c(θ)·B for a real trigonometric polynomial c given by its Fourier vector.
    pub fn scalar_times(coeffs: &[Complex64], base: &Mat2) -> Result<Self> {
        let mut e: [[Vec<Complex64>; 2]; 2] = Default::default();
        for a in 0..2 {
            for b in 0..2 {
                e[a][b] = coeffs.iter().map(|z| z * base[a][b]).collect();
            }
        }
        Self::from_fourier(e)
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn fourier(&self, a: usize, b: usize) -> &[Complex64] {
        &self.entries[a][b]
    }

    pub fn at(&self, theta: f64) -> Mat2 {
        let l = self.lmax as i64;
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = self.entries[a][b]
                    .iter()
                    .enumerate()
                    .map(|(i, z)| z * Complex64::from_polar(1.0, (i as i64 - l) as f64 * theta))
                    .sum();
            }
        }
        out
    }

    /// A(θ)(ξ, η) = Σ a_{ab}(θ) ξ_a η_b (bilinear, no conjugation).
    pub fn apply(&self, theta: f64, xi: [Complex64; 2], eta: [Complex64; 2]) -> Complex64 {
        let m = self.at(theta);
        let mut acc = c(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += m[a][b] * xi[a] * eta[b];
            }
        }
        acc
    }
}

/// ζ(k) = (−|k|, ik).
pub fn zeta(k: i64) -> [Complex64; 2] {
    [c(-(k.abs() as f64), 0.0), c(0.0, k as f64)]
}

const LEFT: Mat2 = [[Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)], [Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]];
const RIGHT: Mat2 = [[Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)], [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]];

/// A^♭ = L A R per Fourier mode with L = [[−1, i], [−1, −i]], R = [[−1, −1], [i, −i]].
pub fn flat_transform(a: &BilinearFormField) -> BilinearFormField {
    let n = 2 * a.lmax + 1;
    let mut e: [[Vec<Complex64>; 2]; 2] = Default::default();
    for row in e.iter_mut() {
        for entry in row.iter_mut() {
            *entry = vec![c(0.0, 0.0); n];
        }
    }
    for k in 0..n {
        let m = [[a.entries[0][0][k], a.entries[0][1][k]], [a.entries[1][0][k], a.entries[1][1][k]]];
        let f = matmul(&matmul(&LEFT, &m), &RIGHT);
        for i in 0..2 {
            for j in 0..2 {
                e[i][j][k] = f[i][j];
            }
        }
    }
    BilinearFormField { lmax: a.lmax, entries: e }
}

/// Both diagonal entries of A^♭ vanish (every Fourier coefficient ≤ tol).
pub fn is_null(a: &BilinearFormField, tol: f64) -> bool {
    let f = flat_transform(a);
    f.entries[0][0].iter().chain(&f.entries[1][1]).all(|z| z.norm() <= tol)
}

#[derive(Clone, Debug)]
pub struct NullProbe {
    /// (t, ‖A(∇u_L, ∇v_L)(t)‖_{Y_{s−1,t}}).
    pub samples: Vec<(f64, f64)>,
    pub fit: RateFit,
}

/// Pointwise A(θ)(∇_{t,θ}u_L, ∇_{t,θ}v_L) at time t for the linear flows of u0, v0 (real part).
pub fn null_form_product(u0: &SpectralField, v0: &SpectralField, a: &BilinearFormField, t: f64) -> Result<SpectralField> {
    let basis = u0.basis();
    if basis.d() != 2 || !basis.same_as(v0.basis()) || u0.ncomp() != 1 || v0.ncomp() != 1 {
        return Err(Error::InvalidArgument("null probe needs scalar fields on one circle basis".into()));
    }
    let u = u0.flow(t);
    let v = v0.flow(t);
    // ∂_t of a decaying linear flow is −𝔇
    let gut = basis.synthesize_slice(&u.apply_D().scale(-1.0).into_coeffs());
    let gvt = basis.synthesize_slice(&v.apply_D().scale(-1.0).into_coeffs());
    let tu = basis.tangential_gradient_slice(u.coeffs());
    let tv = basis.tangential_gradient_slice(v.coeffs());
    let n = basis.n_points();
    let mut vals = vec![0.0; n];
    for (p, th) in basis.grid_theta().iter().enumerate() {
        let y = basis.points()[p];
        // ∂_θ f = y^⊥·∇_S f with y^⊥ = (−sinθ, cosθ)
        let ut = -y[1] * tu[p] + y[0] * tu[n + p];
        let vt = -y[1] * tv[p] + y[0] * tv[n + p];
        let m = a.at(*th);
        let xi = [gut[p], ut];
        let eta = [gvt[p], vt];
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += m[i][j].re * xi[i] * eta[j];
            }
        }
        vals[p] = acc;
    }
    // exact support: degrees add under products; everything above is transform roundoff,
    // which the e^{λt} weights would otherwise amplify
    let top = degree(u0) + degree(v0) + a.lmax;
    let mut coeffs = basis.analyze_slice(&vals);
    for (c, &(l, _)) in coeffs.iter_mut().zip(basis.modes()) {
        if l > top {
            *c = 0.0;
        }
    }
    SpectralField::from_coeffs(basis, 1, coeffs)
}

fn degree(f: &SpectralField) -> usize {
    f.basis().modes().iter().zip(f.coeffs()).filter(|(_, c)| **c != 0.0).map(|(m, _)| m.0).max().unwrap_or(0)
}

/// Log-linear slope in t of ‖A(∇u_L, ∇v_L)(t)‖_{Y_{s−1,t}} over [t_start, t_end].
pub fn null_decay_probe(
    u0: &SpectralField,
    v0: &SpectralField,
    a: &BilinearFormField,
    s: f64,
    t_range: (f64, f64),
    samples: usize,
) -> Result<NullProbe> {
    let (t_a, t_b) = t_range;
    if !(t_b > t_a) || t_a < 0.0 || samples < 2 {
        return Err(Error::InvalidArgument("probe needs 0 <= t_start < t_end and >= 2 samples".into()));
    }
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = t_a + (t_b - t_a) * i as f64 / (samples - 1) as f64;
        let prod = null_form_product(u0, v0, a, t)?;
        out.push((t, norms::y_norm(&prod, s - 1.0, t)?));
    }
    let scale = out.iter().map(|p| p.1).fold(0.0, f64::max);
    if scale == 0.0 || out.iter().any(|p| p.1 <= 1e-300) {
        return Err(Error::InvalidArgument("degenerate (zero) null-form product".into()));
    }
    let fit = fit_rate(&out, (t_a, t_b), Abscissa::Linear)?;
    Ok(NullProbe { samples: out, fit })
}
