//! Picard solvers on the half-cylinder: scattering at infinity (plain and refined),
//! Dirichlet problems, and the zero-orientation variants.

mod nonlinearity;
pub mod radial;

pub use nonlinearity::{
    nu_exponent, nu_exponent_structured, predicted_nu, Evaluator, Monomial, NonlinearitySpec, StructureFlags,
};
pub use radial::{radial_ode_oracle, Matching, RadialProfile};

use crate::cli::fit::{fit_rate, Abscissa, RateFit};
use crate::conformal::{physical_on_grid, ConformalFrame};
use crate::duhamel::{ode_residual, phi, phi_dirichlet, DuhamelOptions, Forcing, TailDiagnostics, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::norms::{self, Orientation};
use crate::sphere_spectral::SpectralField;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Scatter,
    ScatterRefined,
    Dirichlet,
    ZeroScatter,
    ZeroDirichlet,
}

impl SolveMode {
    pub fn orientation(self) -> Orientation {
        match self {
            Self::ZeroScatter | Self::ZeroDirichlet => Orientation::Zero,
            _ => Orientation::Infinity,
        }
    }
    pub fn is_dirichlet(self) -> bool {
        matches!(self, Self::Dirichlet | Self::ZeroDirichlet)
    }
}

/// Solver parameters; the dimension and band limit come from the data's basis.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub s: f64,
    /// Physical anchor radius: where Dirichlet data live, and the initial r0 of scattering solves.
    pub r0: f64,
    pub dt: f64,
    /// T_max − t0.
    pub t_span: f64,
    pub eps_fp: f64,
    pub max_iter: usize,
    pub mode: SolveMode,
    /// Weight origin for the 𝒴 norms (defaults to t0).
    pub t1: Option<f64>,
    pub tail_tol: f64,
    pub noise_floor: f64,
    pub max_escalations: usize,
    /// Radius window of the decay fit; defaults [2, 100] at infinity and [0.01, 0.5] at zero.
    pub fit_window: Option<(f64, f64)>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            s: 3.1,
            r0: 1.0,
            dt: 0.02,
            t_span: 30.0,
            eps_fp: 1e-10,
            max_iter: 60,
            mode: SolveMode::Scatter,
            t1: None,
            tail_tol: 1e-10,
            noise_floor: 1e-13,
            max_escalations: 4,
            fit_window: None,
        }
    }
}

impl SolveConfig {
    pub fn for_dimension(d: usize) -> Self {
        Self { s: d as f64 / 2.0 + 1.6, ..Self::default() }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.s > d as f64 / 2.0 + 1.5) {
            return Err(Error::Config(format!("s = {} must exceed d/2 + 3/2 = {}", self.s, d as f64 / 2.0 + 1.5)));
        }
        if !(self.dt > 0.0) || !(self.t_span > 0.0) || !(self.eps_fp > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("dt, t_span, eps_fp and max_iter must be positive".into()));
        }
        let ok_r0 = match self.mode.orientation() {
            Orientation::Infinity => self.r0 >= 1.0,
            Orientation::Zero => self.r0 > 0.0 && self.r0 <= 1.0,
        };
        if !ok_r0 {
            return Err(Error::Config(format!("r0 = {} incompatible with mode {:?}", self.r0, self.mode)));
        }
        Ok(())
    }

    pub fn default_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or(match self.mode.orientation() {
            Orientation::Infinity => (2.0, 100.0),
            Orientation::Zero => (0.01, 0.5),
        })
    }

    fn duhamel(&self) -> DuhamelOptions {
        DuhamelOptions { s: self.s, tail_tol: self.tail_tol, noise_floor: self.noise_floor }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveReport {
    pub mode: Option<SolveMode>,
    /// 𝒴^{t1}_{s,t0} norms of successive increments.
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// ‖Ψ(v*) − v*‖ at the returned iterate.
    pub fixed_point_residual: f64,
    pub ode_residual: f64,
    pub t0: f64,
    pub escalations: usize,
    /// (r, ‖(u − u_lin)(r·)‖) with u_lin the scattering linear solution.
    pub decay_samples: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
    /// Expected decay exponent: fitted slope ≈ −ν at infinity, +ν (= 2) near zero.
    pub predicted_nu: Option<f64>,
    /// (r, ‖(u − u_lin − Ψ(0))(r·)‖) in refined mode.
    pub refined_samples: Vec<(f64, f64)>,
    pub refined_fit: Option<RateFit>,
    pub first_iterate_samples: Vec<(f64, f64)>,
    pub first_iterate_fit: Option<RateFit>,
    pub tail: TailDiagnostics,
    pub h1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub frame: ConformalFrame,
    /// Total cylinder trajectory v (the conformal image of u).
    pub trajectory: Trajectory,
    /// Linear part: e^{−t𝔇}u0 (scattering) or S(t − t0)v(t0) (Dirichlet).
    pub linear: Trajectory,
    /// Ψ(0) in refined mode.
    pub first_iterate: Option<Trajectory>,
    /// Scattering datum referenced to r = 1 (Dirichlet modes).
    pub v_plus: Option<SpectralField>,
    pub report: SolveReport,
}

impl Solution {
    /// Spherical samples of (u − u_L)(r·)/r², the quotient in u − u_L = |x|²·g near zero.
    pub fn fischer_quotient(&self, r: f64) -> Result<SpectralField> {
        if self.frame.orientation() != Orientation::Zero || !(r > 0.0 && r <= self.frame.r0()) {
            return Err(Error::InvalidArgument("quotient samples need a zero-orientation solution and 0 < r <= r0".into()));
        }
        let t = self.frame.time_at(r);
        let w = self.trajectory.sub(&self.linear)?;
        let (v, _) = crate::conformal::hermite_at(&w, t);
        let field = SpectralField::from_coeffs(w.basis(), w.ncomp(), v)?;
        Ok(field.scale(self.frame.amplitude_factor(t) / (r * r)))
    }
}

/// g(t, y, v, ∂_t v, ∇_y v) = e^{σ(d+2)t/2} f(u, ∇u) on every node, analyzed back to modes.
pub fn eval_g(traj: &Trajectory, spec: &NonlinearitySpec, frame: &ConformalFrame) -> Result<Forcing> {
    let basis = traj.basis();
    let d = basis.d();
    let n = traj.ncomp();
    if spec.ncomp() != n || spec.d() != d || frame.d() != d {
        return Err(Error::InvalidArgument("nonlinearity, frame and trajectory shapes differ".into()));
    }
    let npts = basis.n_points();
    let g = traj.grid();
    let sig = frame.sigma();
    let slices: Vec<Result<Vec<f64>>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let t = g.t(k);
            let (u, grad) = physical_on_grid(basis, n, traj.node_v(k), traj.node_dv(k), t, frame);
            let scale = (sig * (d as f64 + 2.0) / 2.0 * t).exp();
            let mut out = vec![0.0; n * npts];
            let mut up = vec![0.0; n];
            let mut gp = vec![0.0; n * d];
            let mut fp = vec![0.0; n];
            for p in 0..npts {
                for j in 0..n {
                    up[j] = u[j * npts + p];
                    for a in 0..d {
                        gp[j * d + a] = grad[(j * d + a) * npts + p];
                    }
                }
                if let Some(limit) = spec.chart_radius() {
                    let rad = up.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if rad > limit {
                        return Err(Error::ChartExit { radius: rad, limit, t });
                    }
                }
                (spec.evaluator())(&up, &gp, &mut fp);
                for j in 0..n {
                    out[j * npts + p] = scale * fp[j];
                }
            }
            if out.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("nonlinearity at t = {t}")));
            }
            let mut coeffs = Vec::with_capacity(n * basis.n_modes());
            for j in 0..n {
                coeffs.extend(basis.analyze_slice(&out[j * npts..(j + 1) * npts]));
            }
            Ok(coeffs)
        })
        .collect();
    let mut values = Vec::with_capacity(g.len() * n * basis.n_modes());
    for s in slices {
        values.extend(s?);
    }
    Forcing::from_values(g, basis, n, values)
}

struct PicardOut {
    correction: Trajectory,
    first: Trajectory,
    u_plus: Option<SpectralField>,
    increments: Vec<f64>,
    ratios: Vec<f64>,
    iterations: usize,
    fixed_point_residual: f64,
    ode_residual: f64,
    tail: TailDiagnostics,
}

fn apply_psi(
    lin: &Trajectory,
    w: &Trajectory,
    spec: &NonlinearitySpec,
    frame: &ConformalFrame,
    cfg: &SolveConfig,
) -> Result<(Trajectory, Option<SpectralField>, TailDiagnostics, Forcing)> {
    let total = lin.add(w)?;
    let f = eval_g(&total, spec, frame)?;
    if cfg.mode.is_dirichlet() {
        let (t, up, diag) = phi_dirichlet(&f, &cfg.duhamel())?;
        Ok((t, Some(up), diag, f))
    } else {
        let (t, diag) = phi(&f, &cfg.duhamel())?;
        Ok((t, None, diag, f))
    }
}

fn picard(lin: &Trajectory, spec: &NonlinearitySpec, frame: &ConformalFrame, cfg: &SolveConfig) -> Result<PicardOut> {
    let t0 = lin.grid().t0();
    let t1 = cfg.t1.unwrap_or(t0);
    let mut w = Trajectory::zeros(lin.grid(), lin.basis(), lin.ncomp());
    let mut first = None;
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut bad = 0;
    for it in 1..=cfg.max_iter {
        let (next, _, _, _) = apply_psi(lin, &w, spec, frame, cfg)?;
        let inc = norms::traj_norm(&next.sub(&w)?, cfg.s, t0, t1)?.value;
        if let Some(prev) = increments.last() {
            let r = if *prev > 0.0 { inc / prev } else { 0.0 };
            ratios.push(r);
            bad = if r >= 1.0 { bad + 1 } else { 0 };
        }
        increments.push(inc);
        if first.is_none() {
            first = Some(next.clone());
        }
        w = next;
        if inc < cfg.eps_fp {
            let (again, u_plus, tail, f) = apply_psi(lin, &w, spec, frame, cfg)?;
            let fixed_point_residual = norms::traj_norm(&again.sub(&w)?, cfg.s, t0, t1)?.value;
            let ode = ode_residual(&lin.add(&w)?, &f, cfg.s)?;
            return Ok(PicardOut {
                correction: w,
                first: first.expect("set on first pass"),
                u_plus,
                increments,
                ratios,
                iterations: it,
                fixed_point_residual,
                ode_residual: ode,
                tail,
            });
        }
        if bad >= 3 {
            return Err(Error::NonContraction { iterations: it, last_ratio: *ratios.last().unwrap() });
        }
    }
    Err(Error::NonContraction { iterations: cfg.max_iter, last_ratio: ratios.last().copied().unwrap_or(f64::NAN) })
}

/// (r, ‖w(t)‖_{Y_{s,t−t1}}) for every node.
pub fn decay_samples(w: &Trajectory, frame: &ConformalFrame, s: f64, t1: f64) -> Vec<(f64, f64)> {
    let g = w.grid();
    (0..g.len())
        .map(|k| {
            let t = g.t(k);
            let ln = norms::weighted_log_norm(w.basis(), w.node_v(k), s, t - t1);
            (frame.radius_at(t), if ln == f64::NEG_INFINITY { 0.0 } else { ln.exp() })
        })
        .collect()
}

fn fit_in(samples: &[(f64, f64)], window: (f64, f64)) -> Option<RateFit> {
    fit_rate(samples, window, Abscissa::LogRadius).ok()
}

fn check_data(u0: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<()> {
    let d = u0.basis().d();
    cfg.validate(d)?;
    if spec.ncomp() != u0.ncomp() || spec.d() != d {
        return Err(Error::InvalidArgument(format!(
            "data has (N={}, d={d}) but nonlinearity expects (N={}, d={})",
            u0.ncomp(),
            spec.ncomp(),
            spec.d()
        )));
    }
    Ok(())
}

fn base_report(spec: &NonlinearitySpec, cfg: &SolveConfig, out: &PicardOut, t0: f64, esc: usize) -> SolveReport {
    SolveReport {
        mode: Some(cfg.mode),
        increments: out.increments.clone(),
        ratios: out.ratios.clone(),
        converged: true,
        iterations: out.iterations,
        fixed_point_residual: out.fixed_point_residual,
        ode_residual: out.ode_residual,
        t0,
        escalations: esc,
        // near zero the gain is the |x|² of the Fischer quotient, whatever the monomials
        predicted_nu: match cfg.mode.orientation() {
            Orientation::Infinity => predicted_nu(spec).ok(),
            Orientation::Zero => Some(2.0),
        },
        tail: out.tail.clone(),
        ..Default::default()
    }
}

fn scatter_impl(u0: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig, refined: bool) -> Result<Solution> {
    check_data(u0, spec, cfg)?;
    let d = u0.basis().d();
    let orientation = cfg.mode.orientation();
    let mut frame = ConformalFrame::new(d, orientation, cfg.r0)?;
    let mut esc = 0;
    loop {
        let grid = TimeGrid::new(frame.t0(), frame.t0() + cfg.t_span, cfg.dt)?;
        let lin = Trajectory::linear(u0, &grid, 0.0);
        match picard(&lin, spec, &frame, cfg) {
            Ok(out) => {
                let t1 = cfg.t1.unwrap_or(frame.t0());
                let window = cfg.default_window();
                let mut report = base_report(spec, cfg, &out, frame.t0(), esc);
                report.decay_samples = decay_samples(&out.correction, &frame, cfg.s, t1);
                report.fit = fit_in(&report.decay_samples, window);
                if let Some(ms) = spec.monomials() {
                    if !ms.is_empty() {
                        let sigma = norms::traj_norm(&lin, cfg.s, frame.t0(), t1)?.value;
                        report.h1 = norms::h1_partial(ms, d, spec.ncomp(), cfg.s, sigma).ok();
                    }
                }
                let first = if refined {
                    report.first_iterate_samples = decay_samples(&out.first, &frame, cfg.s, t1);
                    report.first_iterate_fit = fit_in(&report.first_iterate_samples, window);
                    let rest = out.correction.sub(&out.first)?;
                    report.refined_samples = decay_samples(&rest, &frame, cfg.s, t1);
                    report.refined_fit = fit_in(&report.refined_samples, window);
                    if let Some(fit) = &report.first_iterate_fit {
                        let rate = -frame.sigma() * fit.slope;
                        if !(rate > 0.0) {
                            return Err(Error::NoFirstIterateGain { rate });
                        }
                    }
                    Some(out.first.clone())
                } else {
                    None
                };
                return Ok(Solution {
                    frame,
                    trajectory: lin.add(&out.correction)?,
                    linear: lin,
                    first_iterate: first,
                    v_plus: None,
                    report,
                });
            }
            Err(Error::NonContraction { .. }) if esc < cfg.max_escalations => {
                esc += 1;
                let t0 = if frame.t0() > 0.0 { 2.0 * frame.t0() } else { std::f64::consts::LN_2 };
                frame = ConformalFrame::at_time(d, orientation, t0)?;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Fixed point of Ψ(v) = Φ(g(v + v_L)) with v_L = e^{−t𝔇}u0 (u0 is the trace of the
/// linear solution on the unit sphere).
pub fn solve_scatter(u0: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Solution> {
    let cfg = SolveConfig { mode: SolveMode::Scatter, ..cfg.clone() };
    scatter_impl(u0, spec, &cfg, false)
}

/// As [`solve_scatter`], additionally returning Ψ(0) and the decay of v − v_L − Ψ(0).
/// The Ψ̃ iterates from 0 coincide with the Ψ iterates from Ψ(0) shifted by Ψ(0).
pub fn solve_scatter_refined(u0: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Solution> {
    let cfg = SolveConfig { mode: SolveMode::ScatterRefined, ..cfg.clone() };
    scatter_impl(u0, spec, &cfg, true)
}

fn dirichlet_impl(trace: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Solution> {
    check_data(trace, spec, cfg)?;
    let d = trace.basis().d();
    let frame = ConformalFrame::new(d, cfg.mode.orientation(), cfg.r0)?;
    let grid = TimeGrid::new(frame.t0(), frame.t0() + cfg.t_span, cfg.dt)?;
    // v(t0, y) = r0^{(d−2)/2} u(r0 y) in both orientations
    let v0 = trace.scale(cfg.r0.powf((d as f64 - 2.0) / 2.0));
    let lin = Trajectory::linear(&v0, &grid, frame.t0());
    let out = picard(&lin, spec, &frame, cfg)?;
    let u_plus = out.u_plus.clone().expect("dirichlet iteration returns u+");
    let at_t0 = v0.add(&u_plus)?;
    let v_plus = at_t0.flow(-frame.t0());
    let total = lin.add(&out.correction)?;
    let t1 = cfg.t1.unwrap_or(frame.t0());
    let mut report = base_report(spec, cfg, &out, frame.t0(), 0);
    let scattered = Trajectory::linear(&at_t0, &grid, frame.t0());
    report.decay_samples = decay_samples(&total.sub(&scattered)?, &frame, cfg.s, t1);
    report.fit = fit_in(&report.decay_samples, cfg.default_window());
    Ok(Solution { frame, trajectory: total, linear: lin, first_iterate: None, v_plus: Some(v_plus), report })
}

/// Solution with boundary trace `trace` on |x| = r0, via Ψ^D(v) = Φ^D(g(v + S(t − t0)v0)).
pub fn solve_dirichlet(trace: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Solution> {
    let mode = if cfg.mode.orientation() == Orientation::Zero { SolveMode::ZeroDirichlet } else { SolveMode::Dirichlet };
    dirichlet_impl(trace, spec, &SolveConfig { mode, ..cfg.clone() })
}

/// Interior problems on B(0, r0)∖{0}: zero-orientation scattering (default) or Dirichlet.
pub fn solve_zero(u0: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Solution> {
    match cfg.mode {
        SolveMode::ZeroDirichlet => dirichlet_impl(u0, spec, cfg),
        _ => {
            if spec.is_derivative_free() == Some(false) && !spec.flags().scalar_product_structure {
                return Err(Error::InvalidArgument(
                    "interior scattering needs a derivative-free or structured nonlinearity".into(),
                ));
            }
            scatter_impl(u0, spec, &SolveConfig { mode: SolveMode::ZeroScatter, ..cfg.clone() }, false)
        }
    }
}

/// Dispatch on `cfg.mode`.
pub fn solve(u0: &SpectralField, spec: &NonlinearitySpec, cfg: &SolveConfig) -> Result<Solution> {
    match cfg.mode {
        SolveMode::Scatter => solve_scatter(u0, spec, cfg),
        SolveMode::ScatterRefined => solve_scatter_refined(u0, spec, cfg),
        SolveMode::Dirichlet => solve_dirichlet(u0, spec, cfg),
        SolveMode::ZeroScatter | SolveMode::ZeroDirichlet => solve_zero(u0, spec, cfg),
    }
}
