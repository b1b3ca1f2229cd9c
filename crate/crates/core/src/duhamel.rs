//! Mode-wise Duhamel operators Φ and Φ^D on the half-cylinder.
//!
//! For each mode with 𝔇-eigenvalue λ the two one-sided integrals
//! `I∓(t) = ∫_t^∞ e^{±λ(τ−t)} F(τ) dτ` are accumulated backward from the last node,
//! integrating the per-interval interpolant of `F` against the exponential in closed form.
//! Intervals on which `F` keeps its sign with a moderate ratio are interpolated
//! log-linearly (exact for exponentials); the rest linearly. The tail past the last
//! significant node is closed with a fitted exponential.

use crate::error::{Error, Result};
use crate::sphere_spectral::{SpectralField, SphereBasis};
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_max > t0) {
            return Err(Error::InvalidArgument(format!("bad time grid t0={t0}, T_max={t_max}, dt={dt}")));
        }
        let n = ((t_max - t0) / dt).round() as usize + 1;
        Ok(Self { t0, dt, n })
    }

    pub fn with_nodes(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || n < 2 {
            return Err(Error::InvalidArgument(format!("bad time grid dt={dt}, n={n}")));
        }
        Ok(Self { t0, dt, n })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }
    pub fn t_max(&self) -> f64 {
        self.t(self.n - 1)
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.t(k)).collect()
    }
    /// First node index with t ≥ `t` (up to rounding).
    pub fn index_at_or_after(&self, t: f64) -> usize {
        (((t - self.t0) / self.dt - 1e-9).ceil().max(0.0) as usize).min(self.n)
    }
}

/// Pair (v, ∂_t v) sampled on a time grid; storage `[node][component][mode]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: TimeGrid,
    basis: Arc<SphereBasis>,
    ncomp: usize,
    v: Vec<f64>,
    dv: Vec<f64>,
}

/// A single time-sampled field sequence (the right-hand side F of the cylinder equation).
#[derive(Clone, Debug)]
pub struct Forcing {
    grid: TimeGrid,
    basis: Arc<SphereBasis>,
    ncomp: usize,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn zeros(grid: &TimeGrid, basis: &Arc<SphereBasis>, ncomp: usize) -> Self {
        let n = grid.len() * ncomp * basis.n_modes();
        Self { grid: grid.clone(), basis: basis.clone(), ncomp, v: vec![0.0; n], dv: vec![0.0; n] }
    }

    pub fn from_parts(
        grid: &TimeGrid,
        basis: &Arc<SphereBasis>,
        ncomp: usize,
        v: Vec<f64>,
        dv: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.len() * ncomp * basis.n_modes();
        if v.len() != n || dv.len() != n {
            return Err(Error::InvalidArgument(format!("trajectory expects {n} values per slot")));
        }
        if v.iter().chain(&dv).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("trajectory".into()));
        }
        Ok(Self { grid: grid.clone(), basis: basis.clone(), ncomp, v, dv })
    }

    /// Linear flow S(t − t_ref)(u0, −𝔇u0) sampled on `grid`.
    pub fn linear(u0: &SpectralField, grid: &TimeGrid, t_ref: f64) -> Self {
        let basis = u0.basis().clone();
        let nm = basis.n_modes();
        let ncomp = u0.ncomp();
        let mut out = Self::zeros(grid, &basis, ncomp);
        let stride = ncomp * nm;
        for k in 0..grid.len() {
            let t = grid.t(k) - t_ref;
            for (i, c) in u0.coeffs().iter().enumerate() {
                let lam = basis.lambda(basis.modes()[i % nm].0);
                let val = c * (-lam * t).exp();
                out.v[k * stride + i] = val;
                out.dv[k * stride + i] = -lam * val;
            }
        }
        out
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn basis(&self) -> &Arc<SphereBasis> {
        &self.basis
    }
    pub fn ncomp(&self) -> usize {
        self.ncomp
    }
    pub fn stride(&self) -> usize {
        self.ncomp * self.basis.n_modes()
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn dv(&self) -> &[f64] {
        &self.dv
    }
    pub fn node_v(&self, k: usize) -> &[f64] {
        let s = self.stride();
        &self.v[k * s..(k + 1) * s]
    }
    pub fn node_dv(&self, k: usize) -> &[f64] {
        let s = self.stride();
        &self.dv[k * s..(k + 1) * s]
    }
    pub fn v_field(&self, k: usize) -> SpectralField {
        SpectralField::from_coeffs(&self.basis, self.ncomp, self.node_v(k).to_vec()).expect("finite slice")
    }
    pub fn dv_field(&self, k: usize) -> SpectralField {
        SpectralField::from_coeffs(&self.basis, self.ncomp, self.node_dv(k).to_vec()).expect("finite slice")
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.ncomp != other.ncomp || !self.basis.same_as(&other.basis) {
            return Err(Error::BasisMismatch("trajectories on different grids/bases".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.v.iter_mut().zip(&other.v).for_each(|(a, b)| *a += b);
        out.dv.iter_mut().zip(&other.dv).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.v.iter_mut().zip(&other.v).for_each(|(a, b)| *a -= b);
        out.dv.iter_mut().zip(&other.dv).for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.v.iter_mut().chain(out.dv.iter_mut()).for_each(|x| *x *= a);
        out
    }
}

impl Forcing {
    pub fn zeros(grid: &TimeGrid, basis: &Arc<SphereBasis>, ncomp: usize) -> Self {
        Self { grid: grid.clone(), basis: basis.clone(), ncomp, values: vec![0.0; grid.len() * ncomp * basis.n_modes()] }
    }

    pub fn from_values(grid: &TimeGrid, basis: &Arc<SphereBasis>, ncomp: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * ncomp * basis.n_modes() {
            return Err(Error::InvalidArgument("forcing length mismatch".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("forcing".into()));
        }
        Ok(Self { grid: grid.clone(), basis: basis.clone(), ncomp, values })
    }

    /// F(τ) = g(τ)·field, for a scalar time profile g.
    pub fn separable(field: &SpectralField, grid: &TimeGrid, profile: impl Fn(f64) -> f64) -> Self {
        let stride = field.coeffs().len();
        let mut values = vec![0.0; grid.len() * stride];
        for k in 0..grid.len() {
            let g = profile(grid.t(k));
            for (i, c) in field.coeffs().iter().enumerate() {
                values[k * stride + i] = g * c;
            }
        }
        Self { grid: grid.clone(), basis: field.basis().clone(), ncomp: field.ncomp(), values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn basis(&self) -> &Arc<SphereBasis> {
        &self.basis
    }
    pub fn ncomp(&self) -> usize {
        self.ncomp
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn stride(&self) -> usize {
        self.ncomp * self.basis.n_modes()
    }
    pub fn node(&self, k: usize) -> &[f64] {
        let s = self.stride();
        &self.values[k * s..(k + 1) * s]
    }
    pub fn field(&self, k: usize) -> SpectralField {
        SpectralField::from_coeffs(&self.basis, self.ncomp, self.node(k).to_vec()).expect("finite slice")
    }
}

#[derive(Clone, Debug)]
pub struct DuhamelOptions {
    /// Sobolev index used for the weighted tail magnitude.
    pub s: f64,
    /// Tolerance on the weighted magnitude of a mode whose tail cannot be fitted.
    pub tail_tol: f64,
    /// Coefficients below `noise_floor · max|F(τ_k)|` at a node are treated as zero.
    pub noise_floor: f64,
}

impl Default for DuhamelOptions {
    fn default() -> Self {
        Self { s: 3.1, tail_tol: 1e-10, noise_floor: 1e-13 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TailDiagnostics {
    /// Modes closed by an exponential tail.
    pub fitted: usize,
    /// Modes whose unfittable tail was below tolerance and dropped.
    pub dropped: usize,
    /// Smallest fitted margin κ̂ − λ over fitted modes.
    pub min_margin: f64,
    /// Largest relative weighted magnitude of a dropped tail.
    pub max_dropped: f64,
}

/// (e^z − 1)/z.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

/// ∫_0^1 x e^{zx} dx.
fn psi(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let mut term = 1.0;
        let mut sum = 0.5;
        for n in 1..12 {
            term *= z / n as f64;
            sum += term / (n as f64 + 2.0);
        }
        sum
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    }
}

const MAX_LOG_RATIO: f64 = 1.0;
const FIT_SPAN: usize = 8;

struct SeriesOut {
    v: Vec<f64>,
    dv: Vec<f64>,
    fitted_margin: Option<f64>,
    dropped: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn integrate_series(
    f: &[f64],
    lam: f64,
    h: f64,
    weight_log: f64,
    t_rel_last: impl Fn(usize) -> f64,
    tail_tol: f64,
    ids: (usize, usize, i64),
) -> Result<SeriesOut> {
    let n = f.len();
    let mut out = SeriesOut { v: vec![0.0; n], dv: vec![0.0; n], fitted_margin: None, dropped: None };
    let Some(last) = f.iter().rposition(|x| *x != 0.0) else {
        return Ok(out);
    };
    let fk = f[last];
    let mut span = 0;
    while span < FIT_SPAN && span < last {
        let a = f[last - span - 1];
        if a == 0.0 || a.signum() != fk.signum() {
            break;
        }
        span += 1;
    }
    let kappa = if span > 0 { (f[last - span] / fk).ln() / (span as f64 * h) } else { f64::NAN };
    let fitted = span > 0 && kappa > lam && kappa.is_finite();
    if fitted {
        out.fitted_margin = Some(kappa - lam);
    } else {
        // weighted magnitude ⟨ℓ⟩^{s−1} e^{λ(t_K − t0)} |F_K| relative to the forcing scale
        let wm = (weight_log + lam * t_rel_last(last)).exp() * fk.abs();
        if !(wm <= tail_tol) {
            let (comp, l, m) = ids;
            return Err(Error::TailNotIntegrable { comp, l, m, kappa_hat: kappa, lambda: lam });
        }
        out.dropped = Some(wm);
    }

    // Suffix integrals at nodes ≥ last from the tail model F_K e^{−κ(τ − t_K)}.
    let (mut a_plus, mut a_minus) = (vec![0.0; n], vec![0.0; n]);
    if fitted {
        for k in last..n {
            let g = fk * (-kappa * (k - last) as f64 * h).exp();
            if lam == 0.0 {
                a_minus[k] = g / kappa; // ∫F
                a_plus[k] = g / (kappa * kappa); // ∫(τ−t)F
            } else {
                a_minus[k] = g / (kappa - lam);
                a_plus[k] = g / (kappa + lam);
            }
        }
    }
    for k in (0..last).rev() {
        let (a, b) = (f[k], f[k + 1]);
        let expfit = a != 0.0 && b != 0.0 && a.signum() == b.signum() && (a / b).ln().abs() <= MAX_LOG_RATIO;
        if lam == 0.0 {
            let (i0, i1) = if expfit {
                let rho = (a / b).ln() / h;
                (a * h * phi1(-rho * h), a * h * h * psi(-rho * h))
            } else {
                (h * (a + b) / 2.0, h * h * (a / 6.0 + b / 3.0))
            };
            a_minus[k] = i0 + a_minus[k + 1];
            a_plus[k] = i1 + a_plus[k + 1] + h * a_minus[k + 1];
        } else {
            let (lm, lp) = if expfit {
                let rho = (a / b).ln() / h;
                (a * h * phi1((lam - rho) * h), a * h * phi1(-(lam + rho) * h))
            } else {
                (
                    h * (a * phi1(lam * h) + (b - a) * psi(lam * h)),
                    h * (a * phi1(-lam * h) + (b - a) * psi(-lam * h)),
                )
            };
            a_minus[k] = lm + (lam * h).exp() * a_minus[k + 1];
            a_plus[k] = lp + (-lam * h).exp() * a_plus[k + 1];
        }
    }
    for k in 0..n {
        if lam == 0.0 {
            out.v[k] = a_plus[k];
            out.dv[k] = -a_minus[k];
        } else {
            out.v[k] = (a_minus[k] - a_plus[k]) / (2.0 * lam);
            out.dv[k] = -(a_minus[k] + a_plus[k]) / 2.0;
        }
    }
    Ok(out)
}

fn bracket(l: usize) -> f64 {
    (1.0 + (l * l) as f64).sqrt()
}

/// Φ(F): v(t) = −∫_t^∞ sinh((t−τ)𝔇)/𝔇 F dτ, ∂_t v = −∫_t^∞ cosh((t−τ)𝔇) F dτ.
pub fn phi(f: &Forcing, opts: &DuhamelOptions) -> Result<(Trajectory, TailDiagnostics)> {
    let grid = f.grid().clone();
    let basis = f.basis().clone();
    let nm = basis.n_modes();
    let stride = f.stride();
    let n = grid.len();
    let h = grid.dt();

    // per-node noise floor
    let mut filtered = f.values.clone();
    for k in 0..n {
        let row = &mut filtered[k * stride..(k + 1) * stride];
        let m = row.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let cut = opts.noise_floor * m;
        row.iter_mut().for_each(|x| {
            if x.abs() <= cut {
                *x = 0.0
            }
        });
    }

    // scale for the weighted tail test: max_k ‖F(τ_k)‖_{Y_{s−1, τ_k − t0}}
    let mut log_scale = f64::NEG_INFINITY;
    for k in 0..n {
        let row = &filtered[k * stride..(k + 1) * stride];
        let ln = crate::norms::weighted_log_norm(&basis, row, opts.s - 1.0, grid.t(k) - grid.t0());
        log_scale = log_scale.max(ln);
    }
    let mut traj = Trajectory::zeros(&grid, &basis, f.ncomp());
    let mut diag = TailDiagnostics { min_margin: f64::INFINITY, ..Default::default() };
    if log_scale == f64::NEG_INFINITY {
        return Ok((traj, diag));
    }

    let outs: Vec<Result<SeriesOut>> = (0..stride)
        .into_par_iter()
        .map(|i| {
            let (l, m) = basis.modes()[i % nm];
            let series: Vec<f64> = (0..n).map(|k| filtered[k * stride + i]).collect();
            let lam = basis.lambda(l);
            let weight_log = (opts.s - 1.0) * bracket(l).ln() - log_scale;
            let t0 = grid.t0();
            let g = &grid;
            integrate_series(&series, lam, h, weight_log, |k| g.t(k) - t0, opts.tail_tol, (i / nm, l, m))
        })
        .collect();
    for (i, o) in outs.into_iter().enumerate() {
        let o = o?;
        if let Some(mg) = o.fitted_margin {
            diag.fitted += 1;
            diag.min_margin = diag.min_margin.min(mg);
        }
        if let Some(w) = o.dropped {
            diag.dropped += 1;
            diag.max_dropped = diag.max_dropped.max(w);
        }
        for k in 0..n {
            traj.v[k * stride + i] = o.v[k];
            traj.dv[k * stride + i] = o.dv[k];
        }
    }
    Ok((traj, diag))
}

/// Φ^D(F) = Φ(F) + S(t − t0)(u₊, −𝔇u₊) with u₊ = −Φ(F)(t0); returns (Φ^D(F), u₊).
pub fn phi_dirichlet(f: &Forcing, opts: &DuhamelOptions) -> Result<(Trajectory, SpectralField, TailDiagnostics)> {
    let (base, diag) = phi(f, opts)?;
    let u_plus = base.v_field(0).scale(-1.0);
    let lin = Trajectory::linear(&u_plus, f.grid(), f.grid().t0());
    Ok((base.add(&lin)?, u_plus, diag))
}

/// Max over interior nodes of ‖∂_tt v − 𝔇²v − F‖_{H^{s−1}} (centered differences), divided by
/// max_k max(‖F_k‖, ‖𝔇²v_k‖) in the same norm.
pub fn ode_residual(traj: &Trajectory, f: &Forcing, s: f64) -> Result<f64> {
    let n = traj.grid().len();
    if n < 3 {
        return Err(Error::InvalidArgument("ode_residual needs at least 3 nodes".into()));
    }
    if traj.grid() != f.grid() || traj.stride() != f.stride() {
        return Err(Error::BasisMismatch("trajectory and forcing differ in shape".into()));
    }
    let basis = traj.basis();
    let nm = basis.n_modes();
    let h2 = traj.grid().dt().powi(2);
    let stride = traj.stride();
    let mut worst = f64::NEG_INFINITY;
    let mut scale = f64::NEG_INFINITY;
    for k in 0..n {
        let v = traj.node_v(k);
        let d2v: Vec<f64> = (0..stride).map(|i| basis.lambda(basis.modes()[i % nm].0).powi(2) * v[i]).collect();
        scale = scale
            .max(crate::norms::weighted_log_norm(basis, &d2v, s - 1.0, 0.0))
            .max(crate::norms::weighted_log_norm(basis, f.node(k), s - 1.0, 0.0));
        if k == 0 || k == n - 1 {
            continue;
        }
        let (vp, vm) = (traj.node_v(k + 1), traj.node_v(k - 1));
        let r: Vec<f64> = (0..stride).map(|i| (vp[i] - 2.0 * v[i] + vm[i]) / h2 - d2v[i] - f.node(k)[i]).collect();
        worst = worst.max(crate::norms::weighted_log_norm(basis, &r, s - 1.0, 0.0));
    }
    if scale == f64::NEG_INFINITY {
        return Ok(worst.exp());
    }
    Ok((worst - scale).exp())
}
