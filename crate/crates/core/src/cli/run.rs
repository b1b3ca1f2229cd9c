//! Subcommand drivers: build inputs from an [`ExperimentConfig`], solve, write artifacts.

use super::config::{DataKind, ExperimentConfig, MatrixSpec, ModeAmp};
use super::fit::{fit_rate, Abscissa, RateFit};
use super::io::{load_trajectory, save_trajectory, write_csv};
use super::verify;
use crate::conformal::ConformalFrame;
use crate::equations::{h_system_2d, harmonic_map_sphere_chart, preset_by_name, semilinear_power};
use crate::error::{Error, Result};
use crate::norms::Orientation;
use crate::null_condition::{flat_transform, is_null, null_decay_probe, BilinearFormField};
use crate::solver::{
    predicted_nu, radial_ode_oracle, solve, Matching, NonlinearitySpec, Solution, SolveMode,
};
use crate::sphere_spectral::{GridField, SpectralField, SphereBasis};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SolveInfinity,
    SolveDirichlet,
    SolveZero,
    CheckNull,
    ProbeNull,
    Rates,
    Verify,
    OracleRadial,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::SolveInfinity => "solve-infinity",
            Self::SolveDirichlet => "solve-dirichlet",
            Self::SolveZero => "solve-zero",
            Self::CheckNull => "check-null",
            Self::ProbeNull => "probe-null",
            Self::Rates => "rates",
            Self::Verify => "verify",
            Self::OracleRadial => "oracle-radial",
        }
    }
}

/// Key/value summary of a run; also written as `report.toml` next to the echoed config.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Table,
    /// `verify` found a failing check.
    pub verify_failed: bool,
}

impl Outcome {
    fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.into(), v.into());
    }
}

/// Process exit code for an error: 1 I/O, 2 configuration, 3 non-contraction, 4 tail failure,
/// 5 chart exit (verify failures exit with 6).
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format(_) => 1,
        Error::Config(_) | Error::InvalidArgument(_) | Error::BasisMismatch(_) => 2,
        Error::NonContraction { .. } | Error::NoFirstIterateGain { .. } | Error::BlowUp { .. } | Error::NonFinite(_) => 3,
        Error::TailNotIntegrable { .. } => 4,
        Error::ChartExit { .. } => 5,
    }
}

pub const VERIFY_FAILED: i32 = 6;

pub fn build_spec(cfg: &ExperimentConfig) -> Result<NonlinearitySpec> {
    let e = &cfg.equation;
    let spec = match e.preset.as_str() {
        "custom" => NonlinearitySpec::from_monomials(e.ncomp, e.d, e.monomials.clone())?,
        "harmonic-map" | "harmonic-map-s2" => harmonic_map_sphere_chart(e.d, e.base_point.clone())?.spec,
        "h-system" if e.h.is_some() => h_system_2d(e.h.unwrap())?.spec,
        "semilinear" | "power" => semilinear_power(e.d, e.p, e.kappa)?.spec,
        name => preset_by_name(name, e.d, e.p, e.kappa)?.spec,
    };
    if spec.d() != e.d {
        return Err(Error::Config(format!("preset '{}' is defined for d = {}, config has d = {}", e.preset, spec.d(), e.d)));
    }
    Ok(spec)
}

fn modes_field(basis: &Arc<SphereBasis>, ncomp: usize, modes: &[ModeAmp]) -> Result<SpectralField> {
    let nm = basis.n_modes();
    let mut c = vec![0.0; ncomp * nm];
    for m in modes {
        let idx = basis
            .index(m.l, m.m)
            .filter(|_| m.comp < ncomp)
            .ok_or_else(|| Error::Config(format!("mode (comp={}, l={}, m={}) not representable", m.comp, m.l, m.m)))?;
        c[m.comp * nm + idx] += m.amp;
    }
    SpectralField::from_coeffs(basis, ncomp, c)
}

/// Initial data (scattering modes) or boundary trace (Dirichlet modes) on the unit sphere.
pub fn build_data(cfg: &ExperimentConfig, basis: &Arc<SphereBasis>, ncomp: usize, orientation: Orientation) -> Result<SpectralField> {
    let dcfg = &cfg.data;
    match dcfg.kind {
        DataKind::Zero => Ok(SpectralField::zeros(basis, ncomp)),
        DataKind::Random => Ok(SpectralField::random(basis, ncomp, dcfg.l_min, dcfg.l_max, dcfg.amplitude, cfg.seed)),
        DataKind::Modes => modes_field(basis, ncomp, &dcfg.modes),
        DataKind::GroundState => {
            if basis.d() != 3 || ncomp != 1 {
                return Err(Error::Config("ground-state data needs d = 3 and a scalar equation".into()));
            }
            let w = crate::equations::ground_state_value(dcfg.lambda, cfg.frame.r0);
            GridField::from_fn(basis, 1, |_| vec![w])?.analyze()
        }
        DataKind::TraceFile => {
            let path = dcfg.file.as_ref().expect("validated");
            let (traj, _) = load_trajectory(path)?;
            if !traj.basis().same_as(basis) || traj.ncomp() != ncomp {
                return Err(Error::BasisMismatch(format!("trace file {} does not match the configured basis", path.display())));
            }
            let frame = ConformalFrame::new(basis.d(), orientation, 1.0)?;
            let t = frame.time_at(cfg.frame.r0);
            let k = traj.grid().index_at_or_after(t);
            if k >= traj.grid().len() || (traj.grid().t(k) - t).abs() > 1e-9 {
                return Err(Error::Config(format!("r0 = {} is not a node of the trace file", cfg.frame.r0)));
            }
            Ok(traj.v_field(k).scale(frame.amplitude_factor(t)))
        }
    }
}

fn fit_table(fit: &Option<RateFit>) -> Value {
    let mut t = Table::new();
    match fit {
        Some(f) => {
            t.insert("slope".into(), f.slope.into());
            t.insert("intercept".into(), f.intercept.into());
            t.insert("residual".into(), f.residual.into());
            t.insert("window".into(), Value::Array(vec![f.window.0.into(), f.window.1.into()]));
            t.insert("n_samples".into(), (f.n_samples as i64).into());
        }
        None => {
            t.insert("slope".into(), "none".into());
        }
    }
    Value::Table(t)
}

fn write_samples(path: &Path, header: [&str; 2], samples: &[(f64, f64)]) -> Result<()> {
    write_csv(path, &header, samples.iter().map(|&(a, b)| vec![a, b]))
}

fn solve_and_write(cfg: &ExperimentConfig, mode: SolveMode, out: &Path, o: &mut Outcome) -> Result<Solution> {
    let spec = build_spec(cfg)?;
    let basis = SphereBasis::new(cfg.equation.d, cfg.discretization.lmax, cfg.discretization.oversample)?;
    let scfg = cfg.solve_config(mode)?;
    let data = build_data(cfg, &basis, spec.ncomp(), mode.orientation())?;
    let sol = solve(&data, &spec, &scfg)?;
    let rep = &sol.report;
    save_trajectory(&out.join("trajectory.bin"), &sol.trajectory, scfg.s)?;
    write_samples(&out.join("decay.csv"), ["r", "z_err"], &rep.decay_samples)?;
    write_csv(
        &out.join("increments.csv"),
        &["iteration", "increment"],
        rep.increments.iter().enumerate().map(|(i, x)| vec![(i + 1) as f64, *x]),
    )?;
    if !rep.refined_samples.is_empty() {
        write_samples(&out.join("refined.csv"), ["r", "z_err_refined"], &rep.refined_samples)?;
        write_samples(&out.join("first_iterate.csv"), ["r", "z_first"], &rep.first_iterate_samples)?;
    }
    if let Some(vp) = &sol.v_plus {
        let nm = basis.n_modes();
        write_csv(
            &out.join("v_plus.csv"),
            &["comp", "l", "m", "coeff"],
            vp.coeffs().iter().enumerate().map(|(i, c)| {
                let (l, m) = basis.modes()[i % nm];
                vec![(i / nm) as f64, l as f64, m as f64, *c]
            }),
        )?;
    }
    o.set("mode", format!("{mode:?}"));
    o.set("converged", rep.converged);
    o.set("iterations", rep.iterations as i64);
    o.set("t0", rep.t0);
    o.set("escalations", rep.escalations as i64);
    o.set("fixed_point_residual", rep.fixed_point_residual);
    o.set("ode_residual", rep.ode_residual);
    o.set("tail_fitted", rep.tail.fitted as i64);
    o.set("tail_dropped", rep.tail.dropped as i64);
    if let Some(nu) = rep.predicted_nu {
        // the fitted slope should approach −ν at infinity and +ν near zero
        let sign = if mode.orientation() == Orientation::Infinity { -1.0 } else { 1.0 };
        o.set("predicted_slope", if nu.is_finite() { Value::from(sign * nu) } else { Value::from("none") });
    }
    o.results.insert("fit".into(), fit_table(&rep.fit));
    if rep.refined_fit.is_some() || rep.first_iterate_fit.is_some() {
        o.results.insert("refined_fit".into(), fit_table(&rep.refined_fit));
        o.results.insert("first_iterate_fit".into(), fit_table(&rep.first_iterate_fit));
    }
    if let Some(h1) = rep.h1 {
        o.set("h1_partial", h1);
    }
    Ok(sol)
}

fn probe_matrix(m: &MatrixSpec) -> Result<BilinearFormField> {
    match m {
        MatrixSpec::Named(n) if n == "identity" => Ok(BilinearFormField::identity()),
        MatrixSpec::Named(n) if n == "symplectic" => Ok(BilinearFormField::symplectic()),
        MatrixSpec::Named(n) => Err(Error::Config(format!("unknown probe matrix '{n}'"))),
        MatrixSpec::Real(a) => Ok(BilinearFormField::constant_real(*a)),
    }
}

fn check_null(cfg: &ExperimentConfig, o: &mut Outcome) -> Result<()> {
    let a = probe_matrix(&cfg.probe.matrix)?;
    let flat = flat_transform(&a);
    o.set("null", is_null(&a, 1e-12));
    for (name, i, j) in [("flat_11", 0, 0), ("flat_12", 0, 1), ("flat_21", 1, 0), ("flat_22", 1, 1)] {
        let z = flat.fourier(i, j)[flat.lmax()];
        o.set(name, Value::Array(vec![z.re.into(), z.im.into()]));
    }
    Ok(())
}

fn probe_null(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let p = &cfg.probe;
    let basis = SphereBasis::new(2, p.lmax, cfg.discretization.oversample)?;
    let u0 = modes_field(&basis, 1, &p.u0)?;
    let v0 = modes_field(&basis, 1, &p.v0)?;
    let a = probe_matrix(&p.matrix)?;
    let probe = null_decay_probe(&u0, &v0, &a, p.s, p.t_range, p.samples)?;
    write_samples(&out.join("probe.csv"), ["t", "y_norm"], &probe.samples)?;
    o.set("null", is_null(&a, 1e-12));
    o.set("predicted_slope", if is_null(&a, 1e-12) { -2.0 } else { 0.0 });
    o.results.insert("fit".into(), fit_table(&Some(probe.fit)));
    Ok(())
}

fn rates(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let d = cfg.equation.d;
    let basis = SphereBasis::new(d, cfg.discretization.lmax, cfg.discretization.oversample)?;
    let scfg = cfg.solve_config(SolveMode::Scatter)?;
    let mut rows = Vec::new();
    for &p in &cfg.rates.powers {
        let spec = semilinear_power(d, p, cfg.equation.kappa)?.spec;
        let nu = predicted_nu(&spec)?;
        for &amp in &cfg.rates.amplitudes {
            let data = SpectralField::random(&basis, 1, cfg.data.l_min, cfg.data.l_max, amp, cfg.seed);
            let (slope, resid, iters) = match solve(&data, &spec, &scfg) {
                Ok(sol) => match &sol.report.fit {
                    Some(f) => (f.slope, f.residual, sol.report.iterations as f64),
                    None => (f64::NAN, f64::NAN, sol.report.iterations as f64),
                },
                Err(e) if exit_code(&e) >= 3 => (f64::NAN, f64::NAN, f64::NAN),
                Err(e) => return Err(e),
            };
            rows.push(vec![p as f64, amp, -nu, slope, resid, iters]);
        }
    }
    write_csv(&out.join("rates.csv"), &["p", "amplitude", "predicted_slope", "fitted_slope", "residual", "iterations"], rows.clone())?;
    o.set("runs", rows.len() as i64);
    o.set("failed_runs", rows.iter().filter(|r| r[3].is_nan()).count() as i64);
    Ok(())
}

fn verify_cmd(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let checks = verify::run_all(cfg.seed)?;
    let mut lines = String::from("check,value,tolerance,passed\n");
    for c in &checks {
        lines.push_str(&format!("{},{:.16e},{:.16e},{}\n", c.name, c.value, c.tolerance, c.passed));
        let mut t = Table::new();
        t.insert("value".into(), c.value.into());
        t.insert("tolerance".into(), c.tolerance.into());
        t.insert("passed".into(), c.passed.into());
        o.results.insert(c.name.clone(), Value::Table(t));
    }
    std::fs::write(out.join("verify.csv"), lines)?;
    o.verify_failed = checks.iter().any(|c| !c.passed);
    o.set("all_passed", !o.verify_failed);
    Ok(())
}

fn oracle_radial(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let c = &cfg.oracle;
    let prof = radial_ode_oracle(c.d, c.p, c.kappa, c.boundary, Matching::Asymptotic { r_max: c.r_max }, &c.radii)?;
    let a = 2.0 - c.d as f64;
    // Z-norm of the ℓ = 0 deviation from the harmonic tail c·r^{2−d}
    let z: Vec<f64> = prof.radii.iter().zip(&prof.u).map(|(r, u)| r.powf(-a) * (u - prof.c * r.powf(a)).abs()).collect();
    write_csv(
        &out.join("radial.csv"),
        &["r", "u", "du", "z_err"],
        (0..prof.radii.len()).map(|i| vec![prof.radii[i], prof.u[i], prof.du[i], z[i]]),
    )?;
    let samples: Vec<(f64, f64)> = prof.radii.iter().copied().zip(z).collect();
    o.set("asymptotic_coefficient", prof.c);
    o.set("predicted_slope", -(((c.d as f64) - 2.0) * c.p as f64 - c.d as f64));
    o.results.insert("fit".into(), fit_table(&fit_rate(&samples, c.window, Abscissa::LogRadius).ok()));
    Ok(())
}

/// Runs `cmd`, writing artifacts and `report.toml` into `out`.
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out)?;
    let mut o = Outcome::default();
    match cmd {
        Command::SolveInfinity => {
            let mode = cfg.mode.unwrap_or(SolveMode::Scatter);
            if !matches!(mode, SolveMode::Scatter | SolveMode::ScatterRefined) {
                return Err(Error::Config(format!("solve-infinity cannot run mode {mode:?}")));
            }
            solve_and_write(cfg, mode, out, &mut o)?;
        }
        Command::SolveDirichlet => {
            let mode = match cfg.frame.orientation {
                Orientation::Infinity => SolveMode::Dirichlet,
                Orientation::Zero => SolveMode::ZeroDirichlet,
            };
            solve_and_write(cfg, mode, out, &mut o)?;
        }
        Command::SolveZero => {
            let mode = cfg.mode.filter(|m| *m == SolveMode::ZeroDirichlet).unwrap_or(SolveMode::ZeroScatter);
            solve_and_write(cfg, mode, out, &mut o)?;
        }
        Command::CheckNull => check_null(cfg, &mut o)?,
        Command::ProbeNull => probe_null(cfg, out, &mut o)?,
        Command::Rates => rates(cfg, out, &mut o)?,
        Command::Verify => verify_cmd(cfg, out, &mut o)?,
        Command::OracleRadial => oracle_radial(cfg, out, &mut o)?,
    }
    let mut report = Table::new();
    report.insert("command".into(), cmd.name().into());
    report.insert("result".into(), Value::Table(o.results.clone()));
    report.insert("config".into(), Value::try_from(cfg).map_err(|e| Error::Config(e.to_string()))?);
    std::fs::write(out.join("report.toml"), toml::to_string(&report).map_err(|e| Error::Config(e.to_string()))?)?;
    Ok(o)
}

/// Flattens a result table into `key = value` lines (nested keys dotted).
pub fn summary_lines(t: &Table, prefix: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in t {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) => out.extend(summary_lines(inner, &key)),
            other => out.push(format!("{key} = {other}")),
        }
    }
    out
}

pub fn default_out_dir(cmd: Command) -> PathBuf {
    PathBuf::from("out").join(cmd.name())
}
