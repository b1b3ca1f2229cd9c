//! Conformal change of variables between physical functions and half-cylinder trajectories.
//!
//! With σ = +1 near infinity and σ = −1 near zero, a point x = e^{σt} y and
//! `v(t, y) = e^{σ(d−2)t/2} u(e^{σt} y)`.

use crate::duhamel::{TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::norms::Orientation;
use crate::sphere_spectral::{GridField, SpectralField, SphereBasis};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalFrame {
    d: usize,
    orientation: Orientation,
    r0: f64,
    t0: f64,
}

impl ConformalFrame {
    pub fn new(d: usize, orientation: Orientation, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::InvalidArgument(format!("anchor radius must be positive, got {r0}")));
        }
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
        }
        let t0 = match orientation {
            Orientation::Infinity => r0.ln(),
            Orientation::Zero => -r0.ln(),
        };
        Ok(Self { d, orientation, r0, t0 })
    }

    /// Frame anchored at cylinder time `t0` instead of a radius.
    pub fn at_time(d: usize, orientation: Orientation, t0: f64) -> Result<Self> {
        let r0 = match orientation {
            Orientation::Infinity => t0.exp(),
            Orientation::Zero => (-t0).exp(),
        };
        Self::new(d, orientation, r0)
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn sigma(&self) -> f64 {
        match self.orientation {
            Orientation::Infinity => 1.0,
            Orientation::Zero => -1.0,
        }
    }
    pub fn radius_at(&self, t: f64) -> f64 {
        (self.sigma() * t).exp()
    }
    pub fn time_at(&self, r: f64) -> f64 {
        self.sigma() * r.ln()
    }
    /// u = amplitude_factor(t)·v on the sphere of radius e^{σt}.
    pub fn amplitude_factor(&self, t: f64) -> f64 {
        (-self.sigma() * (self.d as f64 - 2.0) / 2.0 * t).exp()
    }
}

/// S(t − t0)(u0, −𝔇u0).
pub fn linear_flow(u0: &SpectralField, t: f64, t0: f64) -> Result<(SpectralField, SpectralField)> {
    if t < t0 {
        return Err(Error::InvalidArgument(format!("linear flow needs t >= t0 ({t} < {t0})")));
    }
    let v = u0.flow(t - t0);
    let dv = v.apply_D().scale(-1.0);
    Ok((v, dv))
}

/// Values are sampled with `value(x)`, gradients (row-major N×d) with `gradient(x)` if given.
pub type PointFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A physical function on an annulus r_min ≤ |x| ≤ r_max.
#[derive(Clone)]
pub struct PhysicalSampler {
    pub d: usize,
    pub ncomp: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub value: PointFn,
    pub gradient: Option<PointFn>,
}

impl std::fmt::Debug for PhysicalSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhysicalSampler")
            .field("d", &self.d)
            .field("ncomp", &self.ncomp)
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .finish()
    }
}

impl PhysicalSampler {
    fn check(&self, x: &[f64]) -> Result<()> {
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let tol = 1e-12 * self.r_max.max(1.0);
        if r < self.r_min - tol || r > self.r_max + tol {
            return Err(Error::InvalidArgument(format!(
                "sample radius {r} outside [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok((self.value)(x))
    }

    /// Gradient from the closed form if provided, else 4th-order central differences.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        if let Some(g) = &self.gradient {
            return Ok(g(x));
        }
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let h = 1e-3 * r.max(1e-300);
        let mut out = vec![0.0; self.ncomp * self.d];
        let mut xp = x.to_vec();
        for a in 0..self.d {
            let mut f = |s: f64| {
                xp[a] = x[a] + s * h;
                (self.value)(&xp)
            };
            let (p2, p1, m1, m2) = (f(2.0), f(1.0), f(-1.0), f(-2.0));
            for j in 0..self.ncomp {
                out[j * self.d + a] = (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h);
            }
            xp[a] = x[a];
        }
        Ok(out)
    }
}

/// Samples v and ∂_t v on every node of `grid` (exact pointwise identities on collocation nodes).
pub fn to_cylinder(
    u: &PhysicalSampler,
    frame: &ConformalFrame,
    basis: &Arc<SphereBasis>,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    if u.d != basis.d() || frame.d() != basis.d() {
        return Err(Error::InvalidArgument("sampler/frame/basis dimensions differ".into()));
    }
    let d = basis.d();
    let n = u.ncomp;
    let npts = basis.n_points();
    let sig = frame.sigma();
    let half = (d as f64 - 2.0) / 2.0;
    let mut v = Vec::with_capacity(grid.len() * n * basis.n_modes());
    let mut dv = Vec::with_capacity(v.capacity());
    for k in 0..grid.len() {
        let t = grid.t(k);
        let r = frame.radius_at(t);
        let pre = (sig * half * t).exp();
        let mut gv = vec![0.0; n * npts];
        let mut gdv = vec![0.0; n * npts];
        for (p, y) in basis.points().iter().enumerate() {
            let x: Vec<f64> = y[..d].iter().map(|c| c * r).collect();
            let val = u.eval(&x)?;
            let grad = u.grad(&x)?;
            for j in 0..n {
                let radial: f64 = (0..d).map(|a| y[a] * grad[j * d + a]).sum();
                gv[j * npts + p] = pre * val[j];
                // ∂_t v = σ(d−2)/2 v + σ e^{σt} pre (y·∇u)
                gdv[j * npts + p] = sig * half * pre * val[j] + sig * r * pre * radial;
            }
        }
        v.extend(GridField::new(basis, n, gv)?.analyze()?.into_coeffs());
        dv.extend(GridField::new(basis, n, gdv)?.analyze()?.into_coeffs());
    }
    Trajectory::from_parts(grid, basis, n, v, dv)
}

/// Physical sampler reading a trajectory back; cubic Hermite interpolation in t between nodes.
pub fn from_cylinder(traj: &Trajectory, frame: &ConformalFrame) -> PhysicalSampler {
    let traj = Arc::new(traj.clone());
    let frame = *frame;
    let g = traj.grid().clone();
    let (ra, rb) = (frame.radius_at(g.t0()), frame.radius_at(g.t_max()));
    let d = frame.d();
    let ncomp = traj.ncomp();
    let tr = traj.clone();
    let value: PointFn = Arc::new(move |x: &[f64]| {
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let t = frame.time_at(r);
        let y: Vec<f64> = x.iter().map(|a| a / r).collect();
        let (c, _) = hermite_at(&tr, t);
        let basis = tr.basis();
        let phis = basis.basis_values_at(&y);
        let nm = basis.n_modes();
        let amp = frame.amplitude_factor(t);
        (0..ncomp).map(|j| amp * (0..nm).map(|i| c[j * nm + i] * phis[i]).sum::<f64>()).collect()
    });
    PhysicalSampler { d, ncomp, r_min: ra.min(rb), r_max: ra.max(rb), value, gradient: None }
}

/// Hermite-interpolated (v, ∂_t v) coefficient slices at time t (clamped to the grid).
pub fn hermite_at(traj: &Trajectory, t: f64) -> (Vec<f64>, Vec<f64>) {
    let g = traj.grid();
    let h = g.dt();
    let x = ((t - g.t0()) / h).clamp(0.0, (g.len() - 1) as f64);
    let k = (x.floor() as usize).min(g.len() - 2);
    let s = x - k as f64;
    let (v0, v1, d0, d1) = (traj.node_v(k), traj.node_v(k + 1), traj.node_dv(k), traj.node_dv(k + 1));
    let (h00, h10, h01, h11) = (
        2.0 * s.powi(3) - 3.0 * s * s + 1.0,
        s.powi(3) - 2.0 * s * s + s,
        -2.0 * s.powi(3) + 3.0 * s * s,
        s.powi(3) - s * s,
    );
    let (g00, g10, g01, g11) = (6.0 * s * s - 6.0 * s, 3.0 * s * s - 4.0 * s + 1.0, -6.0 * s * s + 6.0 * s, 3.0 * s * s - 2.0 * s);
    let v = (0..v0.len()).map(|i| h00 * v0[i] + h10 * h * d0[i] + h01 * v1[i] + h11 * h * d1[i]).collect();
    let dv = (0..v0.len()).map(|i| (g00 * v0[i] + g01 * v1[i]) / h + g10 * d0[i] + g11 * d1[i]).collect();
    (v, dv)
}

/// Pointwise u and ∇u on the basis grid from cylinder slices (v, ∂_t v) at time t.
/// Returns (u `[comp][pt]`, ∇u `[comp][axis][pt]`).
pub fn physical_on_grid(
    basis: &SphereBasis,
    ncomp: usize,
    v: &[f64],
    dv: &[f64],
    t: f64,
    frame: &ConformalFrame,
) -> (Vec<f64>, Vec<f64>) {
    let d = basis.d();
    let nm = basis.n_modes();
    let npts = basis.n_points();
    let sig = frame.sigma();
    let half = (d as f64 - 2.0) / 2.0;
    let amp = frame.amplitude_factor(t);
    let gscale = (-sig * d as f64 / 2.0 * t).exp();
    let mut u = vec![0.0; ncomp * npts];
    let mut grad = vec![0.0; ncomp * d * npts];
    for j in 0..ncomp {
        let cv = &v[j * nm..(j + 1) * nm];
        let gv = basis.synthesize_slice(cv);
        let gdv = basis.synthesize_slice(&dv[j * nm..(j + 1) * nm]);
        let tg = basis.tangential_gradient_slice(cv);
        for (p, y) in basis.points().iter().enumerate() {
            u[j * npts + p] = amp * gv[p];
            let radial = -half * gv[p] + sig * gdv[p];
            for a in 0..d {
                grad[(j * d + a) * npts + p] = gscale * (y[a] * radial + tg[a * npts + p]);
            }
        }
    }
    (u, grad)
}

/// Cartesian ∇u on the sphere of radius e^{σt_k}, as a GridField with ncomp·d components
/// (component-major, axis-minor).
pub fn reconstruct_gradient(traj: &Trajectory, k: usize, frame: &ConformalFrame) -> Result<GridField> {
    if k >= traj.grid().len() {
        return Err(Error::InvalidArgument(format!("node {k} not stored")));
    }
    let (_, grad) =
        physical_on_grid(traj.basis(), traj.ncomp(), traj.node_v(k), traj.node_dv(k), traj.grid().t(k), frame);
    GridField::new(traj.basis(), traj.ncomp() * traj.basis().d(), grad)
}

/// Mode-wise harmonic extension of the trace u0 to radius r:
/// r^{−(ℓ+d−2)} outside the unit ball, r^ℓ inside.
pub fn harmonic_extension(u0: &SpectralField, orientation: Orientation, r: f64) -> Result<SpectralField> {
    let ok = match orientation {
        Orientation::Infinity => r >= 1.0,
        Orientation::Zero => r > 0.0 && r <= 1.0,
    };
    if !ok {
        return Err(Error::InvalidArgument(format!("radius {r} outside the {orientation:?} region")));
    }
    let basis = u0.basis().clone();
    let d = basis.d() as f64;
    let nm = basis.n_modes();
    let mut c = u0.coeffs().to_vec();
    for (i, x) in c.iter_mut().enumerate() {
        let l = basis.modes()[i % nm].0 as f64;
        *x *= match orientation {
            Orientation::Infinity => r.powf(-(l + d - 2.0)),
            Orientation::Zero => r.powf(l),
        };
    }
    SpectralField::from_coeffs(&basis, u0.ncomp(), c)
}
