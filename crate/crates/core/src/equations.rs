//! Equation presets, the ground state, sphere-chart geometry and Fischer decompositions.

use crate::conformal::PhysicalSampler;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::solver::{nu_exponent, nu_exponent_structured, Monomial, NonlinearitySpec, SolveMode, StructureFlags};
use crate::sphere_spectral::solid::gauss_split_homogeneous;
use std::sync::Arc;

/// Radius of the chart ball the solver may visit.
pub const CHART_RADIUS: f64 = 0.4;

#[derive(Clone, Debug)]
pub struct EquationPreset {
    pub name: String,
    pub spec: NonlinearitySpec,
    /// ν₁ = inf (d−2)(|p|+|q|) − d.
    pub nu1: f64,
    /// ν_{1,ℜ} = inf (d−2)|p| + (d−1)|q| − d.
    pub nu1_structured: f64,
    /// Exponent the solver should observe (structured when a structure flag is set).
    pub predicted_nu: f64,
    pub critical: bool,
    pub modes: Vec<SolveMode>,
    pub chart: Option<SphereChart>,
}

impl EquationPreset {
    fn build(name: String, spec: NonlinearitySpec, modes: Vec<SolveMode>, chart: Option<SphereChart>) -> Result<Self> {
        let nu1 = nu_exponent(&spec)?;
        let nu1_structured = nu_exponent_structured(&spec)?;
        let f = spec.flags();
        let predicted_nu = if f.scalar_product_structure || f.bracket_structure_2d { nu1_structured } else { nu1 };
        Ok(Self { name, spec, nu1, nu1_structured, predicted_nu, critical: predicted_nu == 0.0, modes, chart })
    }
}

/// Δu = κu^p.
pub fn semilinear_power(d: usize, p: u32, kappa: f64) -> Result<EquationPreset> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("power p = {p} must be at least 2")));
    }
    let mono = Monomial { comp: 0, p: vec![p], q: vec![0; d], a: kappa };
    let spec = NonlinearitySpec::from_monomials(1, d, vec![mono])?;
    let modes = vec![
        SolveMode::Scatter,
        SolveMode::ScatterRefined,
        SolveMode::Dirichlet,
        SolveMode::ZeroScatter,
        SolveMode::ZeroDirichlet,
    ];
    EquationPreset::build(format!("semilinear(d={d}, p={p}, kappa={kappa})"), spec, modes, None)
}

/// W_λ(x) = λ^{1/2}(1 + λ²|x|²/3)^{−1/2}.
pub fn ground_state_value(lambda: f64, r: f64) -> f64 {
    lambda.sqrt() / (1.0 + lambda * lambda * r * r / 3.0).sqrt()
}

/// ΔW_λ + W_λ⁵ at x from the closed-form radial derivatives.
pub fn ground_state_residual(lambda: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|a| a * a).sum();
    let r = r2.sqrt();
    let a = lambda * lambda / 3.0;
    let q = 1.0 + a * r2;
    let s = lambda.sqrt();
    let w = s * q.powf(-0.5);
    let w1 = -s * a * r * q.powf(-1.5);
    let w2 = -s * a * q.powf(-1.5) + 3.0 * s * a * a * r2 * q.powf(-2.5);
    let lap = if r > 0.0 { w2 + 2.0 * w1 / r } else { 3.0 * w2 };
    lap + w.powi(5)
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub lambda: f64,
    pub sampler: PhysicalSampler,
    /// Constant value of W_λ on the unit sphere.
    pub trace: f64,
}

/// Rescaled ground state of Δu = −u⁵ in ℝ³.
pub fn ground_state_w(lambda: f64) -> Result<GroundState> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let value = Arc::new(move |x: &[f64]| vec![ground_state_value(lambda, x.iter().map(|a| a * a).sum::<f64>().sqrt())]);
    let gradient = Arc::new(move |x: &[f64]| {
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let a = lambda * lambda / 3.0;
        let c = -lambda.sqrt() * a * (1.0 + a * r2).powf(-1.5);
        x.iter().map(|xi| c * xi).collect()
    });
    Ok(GroundState {
        lambda,
        sampler: PhysicalSampler { d: 3, ncomp: 1, r_min: 0.0, r_max: f64::INFINITY, value, gradient: Some(gradient) },
        trace: ground_state_value(lambda, 1.0),
    })
}

/// Graph chart x ↦ ψ(x) = R(x, √(1−|x|²)) of S^N around a base point, R a reflection taking
/// e_{N+1} to the base point.
#[derive(Clone, Debug)]
pub struct SphereChart {
    pub n: usize,
    pub base_point: Vec<f64>,
}

impl SphereChart {
    pub fn new(base_point: Vec<f64>) -> Result<Self> {
        let norm = base_point.iter().map(|a| a * a).sum::<f64>().sqrt();
        if base_point.len() < 2 || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("base point must be a unit vector in R^{N+1}, N >= 1".into()));
        }
        Ok(Self { n: base_point.len() - 1, base_point })
    }

    fn reflect(&self, v: &mut [f64]) {
        // Householder map exchanging e_{N+1} and the base point
        let n = self.n;
        let mut w: Vec<f64> = self.base_point.clone();
        w[n] -= 1.0;
        let ww: f64 = w.iter().map(|a| a * a).sum();
        if ww < 1e-30 {
            return;
        }
        let dot: f64 = w.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&w).for_each(|(x, wi)| *x -= 2.0 * dot / ww * wi);
    }

    /// ψ(x) ∈ S^N ⊂ ℝ^{N+1}.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let mut out = x.to_vec();
        out.push((1.0 - r2).sqrt());
        self.reflect(&mut out);
        out
    }

    /// ∂_j ψ (rows j), unrotated graph coordinates.
    pub fn dpsi(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let h = (1.0 - x.iter().map(|a| a * a).sum::<f64>()).sqrt();
        (0..self.n)
            .map(|j| {
                let mut row = vec![0.0; self.n + 1];
                row[j] = 1.0;
                row[self.n] = -x[j] / h;
                row
            })
            .collect()
    }

    /// g_jk = ⟨∂_jψ, ∂_kψ⟩.
    pub fn metric(&self, x: &[f64]) -> Vec<f64> {
        let dp = self.dpsi(x);
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                g[j * n + k] = dp[j].iter().zip(&dp[k]).map(|(a, b)| a * b).sum();
            }
        }
        g
    }

    /// Γ^i_jk = g^{il} ⟨∂_lψ, ∂_j∂_kψ⟩ with g^{-1} by Sherman–Morrison; layout [i][j][k].
    pub fn christoffel(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let h2 = 1.0 - r2;
        // only the last component of ψ has second derivatives: ∂_jk h = −δ_jk/h − x_j x_k/h³
        let dp = self.dpsi(x);
        let h = h2.sqrt();
        // g = I + x xᵀ/h², g^{-1} = I − x xᵀ/(h² + |x|²)
        let ginv = |i: usize, l: usize| (if i == l { 1.0 } else { 0.0 }) - x[i] * x[l] / (h2 + r2);
        let mut gamma = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d2 = -(if j == k { 1.0 } else { 0.0 }) / h - x[j] * x[k] / (h * h2);
                    gamma[(i * n + j) * n + k] = (0..n).map(|l| ginv(i, l) * dp[l][n] * d2).sum();
                }
            }
        }
        gamma
    }
}

/// f^i = −Σ Γ^i_jk(u) ∇u^j·∇u^k for the sphere chart (closed form Γ^i_jk = u_i g_jk).
fn harmonic_map_eval(n: usize, d: usize, u: &[f64], g: &[f64], out: &mut [f64]) {
    let r2: f64 = u.iter().map(|a| a * a).sum();
    let h2 = 1.0 - r2;
    let mut e = 0.0;
    for a in 0..d {
        let mut dot = 0.0;
        for j in 0..n {
            let gj = g[j * d + a];
            e += gj * gj;
            dot += u[j] * gj;
        }
        e += dot * dot / h2;
    }
    for i in 0..n {
        out[i] = -u[i] * e;
    }
}

fn leading_gradient_monomials(n: usize, d: usize) -> Vec<Monomial> {
    let mut out = vec![];
    for i in 0..n {
        for j in 0..n {
            for a in 0..d {
                let mut p = vec![0; n];
                p[i] = 1;
                let mut q = vec![0; n * d];
                q[j * d + a] = 2;
                out.push(Monomial { comp: i, p, q, a: -1.0 });
            }
        }
    }
    out
}

/// Harmonic maps ℝ^d ⊃ Ω → S^N in the graph chart around `base_point`.
pub fn harmonic_map_sphere_chart(d: usize, base_point: Vec<f64>) -> Result<EquationPreset> {
    let chart = SphereChart::new(base_point)?;
    let n = chart.n;
    let eval = Arc::new(move |u: &[f64], g: &[f64], out: &mut [f64]| harmonic_map_eval(n, d, u, g, out));
    let spec = NonlinearitySpec::new(n, d, eval)
        .with_metadata(leading_gradient_monomials(n, d), false)
        .with_flags(StructureFlags { scalar_product_structure: true, bracket_structure_2d: false, null_condition_2d: d == 2 })
        .with_chart_radius(CHART_RADIUS);
    EquationPreset::build(
        format!("harmonic_map(d={d}, S^{n})"),
        spec,
        vec![SolveMode::Scatter, SolveMode::ScatterRefined, SolveMode::Dirichlet, SolveMode::ZeroScatter],
        Some(chart),
    )
}

/// Prescribed-mean-curvature type system in the S² chart (d = 2):
/// f_i = −Σ Γ^i_jℓ ∇u^j·∇u^ℓ − Σ H^i_jℓ ∂_x u^j ∂_y u^ℓ, constant H with H^i_jℓ = −H^i_ℓj.
pub fn h_system_2d(h: [[[f64; 2]; 2]; 2]) -> Result<EquationPreset> {
    for (i, hi) in h.iter().enumerate() {
        for j in 0..2 {
            for l in 0..2 {
                if (hi[j][l] + hi[l][j]).abs() > 1e-14 {
                    return Err(Error::InvalidArgument(format!("H^{i} is not antisymmetric")));
                }
            }
        }
    }
    let chart = SphereChart::new(vec![0.0, 0.0, 1.0])?;
    let eval = Arc::new(move |u: &[f64], g: &[f64], out: &mut [f64]| {
        harmonic_map_eval(2, 2, u, g, out);
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    out[i] -= h[i][j][l] * g[j * 2] * g[l * 2 + 1];
                }
            }
        }
    });
    let mut monos = leading_gradient_monomials(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                if h[i][j][l] != 0.0 {
                    let mut q = vec![0; 4];
                    q[j * 2] += 1;
                    q[l * 2 + 1] += 1;
                    monos.push(Monomial { comp: i, p: vec![0, 0], q, a: -h[i][j][l] });
                }
            }
        }
    }
    let spec = NonlinearitySpec::new(2, 2, eval)
        .with_metadata(monos, false)
        .with_flags(StructureFlags { scalar_product_structure: true, bracket_structure_2d: true, null_condition_2d: true })
        .with_chart_radius(CHART_RADIUS);
    EquationPreset::build("h_system_2d".into(), spec, vec![SolveMode::Scatter, SolveMode::ScatterRefined], Some(chart))
}

/// Exact split p = |x|² q + r with Δr = 0, degree by degree (degree ≤ 8).
pub fn fischer_decompose(p: &Poly) -> Result<(Poly, Poly)> {
    let deg = p.degree().unwrap_or(0);
    if deg > 8 {
        return Err(Error::InvalidArgument(format!("degree {deg} exceeds the supported bound 8")));
    }
    let mut harmonic = Poly::zero(p.nvars());
    let mut quotient = Poly::zero(p.nvars());
    for k in 0..=deg {
        let part = p.homogeneous_part(k);
        if part.is_zero() {
            continue;
        }
        let (h, q) = gauss_split_homogeneous(&part, k);
        harmonic = &harmonic + &h;
        quotient = &quotient + &q;
    }
    Ok((harmonic, quotient))
}

/// Preset lookup by name for configuration files.
pub fn preset_by_name(name: &str, d: usize, p: u32, kappa: f64) -> Result<EquationPreset> {
    match name {
        "semilinear" | "power" => semilinear_power(d, p, kappa),
        "critical-semilinear" => semilinear_power(3, 5, -1.0),
        "harmonic-map" | "harmonic-map-s2" => harmonic_map_sphere_chart(d, vec![0.0, 0.0, 1.0]),
        "h-system" => h_system_2d([[[0.0, kappa], [-kappa, 0.0]], [[0.0, kappa], [-kappa, 0.0]]]),
        "zero" | "linear" => {
            let spec = NonlinearitySpec::zero(1, d).with_metadata(vec![], true);
            Ok(EquationPreset {
                name: "zero".into(),
                spec,
                nu1: f64::INFINITY,
                nu1_structured: f64::INFINITY,
                predicted_nu: f64::INFINITY,
                critical: false,
                modes: vec![
                    SolveMode::Scatter,
                    SolveMode::ScatterRefined,
                    SolveMode::Dirichlet,
                    SolveMode::ZeroScatter,
                    SolveMode::ZeroDirichlet,
                ],
                chart: None,
            })
        }
        other => Err(Error::Config(format!("unknown preset '{other}'"))),
    }
}
