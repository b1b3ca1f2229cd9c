//! Experiment configuration (TOML).
//!
//! ```toml
//! mode = "scatter"            # scatter | scatter_refined | dirichlet | zero_scatter | zero_dirichlet
//! seed = 7
//!
//! [equation]
//! preset = "semilinear"       # semilinear | critical-semilinear | harmonic-map | h-system | zero | custom
//! d = 3
//! p = 5
//! kappa = -1.0
//!
//! [discretization]
//! lmax = 8
//! dt = 0.02
//! t_span = 30.0
//!
//! [data]
//! kind = "random"             # random | modes | ground-state | trace-file | zero
//! amplitude = 0.1
//! l_max = 3
//! ```
//!
//! Every field has a default; the effective configuration is echoed into each report.

use crate::error::{Error, Result};
use crate::norms::Orientation;
use crate::solver::{Monomial, SolveConfig, SolveMode};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Option<SolveMode>,
    pub seed: u64,
    pub equation: EquationSection,
    pub discretization: DiscretizationSection,
    pub frame: FrameSection,
    pub data: DataSection,
    pub solver: SolverSection,
    pub fit: FitSection,
    pub probe: ProbeSection,
    pub rates: RatesSection,
    pub oracle: OracleSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquationSection {
    pub preset: String,
    pub d: usize,
    pub p: u32,
    pub kappa: f64,
    /// Base point on S² for the harmonic-map chart.
    pub base_point: Vec<f64>,
    /// H-system coefficients H^i_{jl}, indexed [i][j][l].
    pub h: Option<[[[f64; 2]; 2]; 2]>,
    /// Inline polynomial nonlinearity for `preset = "custom"`.
    pub ncomp: usize,
    pub monomials: Vec<Monomial>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationSection {
    pub lmax: usize,
    pub oversample: usize,
    /// Sobolev index; defaults to d/2 + 1.6.
    pub s: Option<f64>,
    pub dt: f64,
    pub t_span: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSection {
    pub r0: f64,
    pub t1: Option<f64>,
    /// Orientation used for Dirichlet problems and trace files.
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    Random,
    Modes,
    GroundState,
    TraceFile,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAmp {
    #[serde(default)]
    pub comp: usize,
    pub l: usize,
    pub m: i64,
    pub amp: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub kind: DataKind,
    /// L² norm per component for random data.
    pub amplitude: f64,
    pub l_min: usize,
    pub l_max: usize,
    pub modes: Vec<ModeAmp>,
    /// Concentration parameter of the ground state W_λ.
    pub lambda: f64,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub eps_fp: f64,
    pub max_iter: usize,
    pub tail_tol: f64,
    pub noise_floor: f64,
    pub max_escalations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    /// Radius window; defaults to [2, 100] at infinity and [0.01, 0.5] near zero.
    pub window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    pub u0: Vec<ModeAmp>,
    pub v0: Vec<ModeAmp>,
    /// "identity", "symplectic", or a real 2×2 matrix.
    pub matrix: MatrixSpec,
    pub lmax: usize,
    pub s: f64,
    pub t_range: (f64, f64),
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Real([[f64; 2]; 2]),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesSection {
    pub powers: Vec<u32>,
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub d: usize,
    pub p: u32,
    pub kappa: f64,
    pub boundary: f64,
    pub r_max: f64,
    pub radii: Vec<f64>,
    pub window: (f64, f64),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: None,
            seed: 0,
            equation: EquationSection::default(),
            discretization: DiscretizationSection::default(),
            frame: FrameSection::default(),
            data: DataSection::default(),
            solver: SolverSection::default(),
            fit: FitSection::default(),
            probe: ProbeSection::default(),
            rates: RatesSection::default(),
            oracle: OracleSection::default(),
        }
    }
}

impl Default for EquationSection {
    fn default() -> Self {
        Self {
            preset: "semilinear".into(),
            d: 3,
            p: 5,
            kappa: -1.0,
            base_point: vec![0.0, 0.0, 1.0],
            h: None,
            ncomp: 1,
            monomials: vec![],
        }
    }
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self { lmax: 8, oversample: 4, s: None, dt: 0.02, t_span: 30.0 }
    }
}

impl Default for FrameSection {
    fn default() -> Self {
        Self { r0: 1.0, t1: None, orientation: Orientation::Infinity }
    }
}

impl Default for DataSection {
    fn default() -> Self {
        Self { kind: DataKind::Random, amplitude: 0.1, l_min: 0, l_max: 3, modes: vec![], lambda: 1.0, file: None }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolveConfig::default();
        Self {
            eps_fp: c.eps_fp,
            max_iter: c.max_iter,
            tail_tol: c.tail_tol,
            noise_floor: c.noise_floor,
            max_escalations: c.max_escalations,
        }
    }
}

impl Default for FitSection {
    fn default() -> Self {
        Self { window: None }
    }
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            u0: vec![ModeAmp { comp: 0, l: 1, m: 1, amp: 1.0 }, ModeAmp { comp: 0, l: 3, m: -3, amp: 0.5 }],
            v0: vec![ModeAmp { comp: 0, l: 1, m: -1, amp: 1.0 }, ModeAmp { comp: 0, l: 2, m: 2, amp: 0.3 }],
            matrix: MatrixSpec::Named("identity".into()),
            lmax: 8,
            s: 2.6,
            t_range: (0.5, 5.0),
            samples: 40,
        }
    }
}

impl Default for RatesSection {
    fn default() -> Self {
        Self { powers: vec![5, 7], amplitudes: vec![0.1, 0.2] }
    }
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            d: 4,
            p: 3,
            kappa: 1.0,
            boundary: 0.1,
            r_max: 1e3,
            radii: (0..=40).map(|i| 10f64.powf(i as f64 / 20.0)).collect(),
            window: (2.0, 100.0),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.equation.d;
        // spectral bases exist for circles and 2-spheres; higher d only through the radial oracle
        if !(2..=3).contains(&d) {
            return Err(Error::Config(format!("equation.d = {d} outside 2..=3")));
        }
        if self.data.kind == DataKind::TraceFile && self.data.file.is_none() {
            return Err(Error::Config("data.kind = \"trace-file\" needs data.file".into()));
        }
        if self.data.l_min > self.data.l_max || self.data.l_max > self.discretization.lmax {
            return Err(Error::Config("need data.l_min <= data.l_max <= discretization.lmax".into()));
        }
        if let MatrixSpec::Named(n) = &self.probe.matrix {
            if !["identity", "symplectic"].contains(&n.as_str()) {
                return Err(Error::Config(format!("unknown probe matrix '{n}'")));
            }
        }
        self.solve_config(self.default_mode())?.validate(d)
    }

    /// Explicit `mode`, else plain scattering in the configured orientation.
    pub fn default_mode(&self) -> SolveMode {
        self.mode.unwrap_or(match self.frame.orientation {
            Orientation::Infinity => SolveMode::Scatter,
            Orientation::Zero => SolveMode::ZeroScatter,
        })
    }

    pub fn solve_config(&self, mode: SolveMode) -> Result<SolveConfig> {
        let d = self.equation.d;
        let base = SolveConfig::for_dimension(d);
        let s = self.discretization.s.unwrap_or(base.s);
        let cfg = SolveConfig {
            s,
            r0: self.frame.r0,
            dt: self.discretization.dt,
            t_span: self.discretization.t_span,
            eps_fp: self.solver.eps_fp,
            max_iter: self.solver.max_iter,
            mode,
            t1: self.frame.t1,
            tail_tol: self.solver.tail_tol,
            noise_floor: self.solver.noise_floor,
            max_escalations: self.solver.max_escalations,
            fit_window: self.fit.window,
        };
        Ok(cfg)
    }
}
