use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One term a·u^p·(∇u)^q of component `comp`; `q[j*d + k]` is the power of ∂_k u^j.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Monomial {
    pub comp: usize,
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    pub a: f64,
}

impl Monomial {
    pub fn p_degree(&self) -> u32 {
        self.p.iter().sum()
    }
    pub fn q_degree(&self) -> u32 {
        self.q.iter().sum()
    }
    pub fn eval(&self, u: &[f64], grad: &[f64]) -> f64 {
        let mut acc = self.a;
        for (x, &k) in u.iter().zip(&self.p) {
            if k > 0 {
                acc *= x.powi(k as i32);
            }
        }
        for (x, &k) in grad.iter().zip(&self.q) {
            if k > 0 {
                acc *= x.powi(k as i32);
            }
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StructureFlags {
    pub scalar_product_structure: bool,
    pub bracket_structure_2d: bool,
    pub null_condition_2d: bool,
}

/// f(u, ∇u, out): `u` has N entries, `grad` is row-major N×d.
pub type Evaluator = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct NonlinearitySpec {
    ncomp: usize,
    d: usize,
    eval: Evaluator,
    monomials: Option<Vec<Monomial>>,
    /// Metadata reproduces the evaluator exactly (false for truncated series of analytic f).
    metadata_complete: bool,
    flags: StructureFlags,
    chart_radius: Option<f64>,
}

impl std::fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("ncomp", &self.ncomp)
            .field("d", &self.d)
            .field("monomials", &self.monomials)
            .field("flags", &self.flags)
            .field("chart_radius", &self.chart_radius)
            .finish()
    }
}

impl NonlinearitySpec {
    pub fn new(ncomp: usize, d: usize, eval: Evaluator) -> Self {
        Self { ncomp, d, eval, monomials: None, metadata_complete: false, flags: StructureFlags::default(), chart_radius: None }
    }

    /// Polynomial nonlinearity given entirely by its monomials.
    pub fn from_monomials(ncomp: usize, d: usize, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            if m.comp >= ncomp || m.p.len() != ncomp || m.q.len() != ncomp * d || !m.a.is_finite() {
                return Err(Error::InvalidArgument(format!("malformed monomial {m:?}")));
            }
        }
        let terms = monomials.clone();
        let eval: Evaluator = Arc::new(move |u, g, out| {
            out.iter_mut().for_each(|x| *x = 0.0);
            for m in &terms {
                out[m.comp] += m.eval(u, g);
            }
        });
        Ok(Self { monomials: Some(monomials), metadata_complete: true, ..Self::new(ncomp, d, eval) })
    }

    pub fn zero(ncomp: usize, d: usize) -> Self {
        Self::from_monomials(ncomp, d, vec![]).expect("empty metadata is valid")
    }

    /// Attach (possibly truncated) monomial metadata used for exponent bookkeeping.
    pub fn with_metadata(mut self, monomials: Vec<Monomial>, complete: bool) -> Self {
        self.monomials = Some(monomials);
        self.metadata_complete = complete;
        self
    }
    pub fn with_flags(mut self, flags: StructureFlags) -> Self {
        self.flags = flags;
        self
    }
    pub fn with_chart_radius(mut self, r: f64) -> Self {
        self.chart_radius = Some(r);
        self
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn monomials(&self) -> Option<&[Monomial]> {
        self.monomials.as_deref()
    }
    pub fn metadata_complete(&self) -> bool {
        self.metadata_complete
    }
    pub fn flags(&self) -> StructureFlags {
        self.flags
    }
    pub fn chart_radius(&self) -> Option<f64> {
        self.chart_radius
    }
    pub fn evaluator(&self) -> &Evaluator {
        &self.eval
    }

    pub fn evaluate(&self, u: &[f64], grad: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncomp];
        (self.eval)(u, grad, &mut out);
        out
    }

    pub fn is_derivative_free(&self) -> Option<bool> {
        self.monomials.as_ref().map(|ms| ms.iter().all(|m| m.a == 0.0 || m.q_degree() == 0))
    }

    /// Largest |evaluator − metadata| over `n` random states with |u|, |∇u| entries in [−scale, scale].
    pub fn metadata_discrepancy(&self, n: usize, scale: f64, seed: u64) -> Result<f64> {
        let ms = self.monomials.as_ref().ok_or_else(|| Error::InvalidArgument("no monomial metadata".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..n {
            let u: Vec<f64> = (0..self.ncomp).map(|_| rng.gen_range(-scale..scale)).collect();
            let g: Vec<f64> = (0..self.ncomp * self.d).map(|_| rng.gen_range(-scale..scale)).collect();
            let direct = self.evaluate(&u, &g);
            let mut meta = vec![0.0; self.ncomp];
            for m in ms {
                meta[m.comp] += m.eval(&u, &g);
            }
            for (a, b) in direct.iter().zip(&meta) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

fn active(spec: &NonlinearitySpec) -> Result<Vec<&Monomial>> {
    let ms = spec.monomials().ok_or_else(|| Error::InvalidArgument("exponent needs monomial metadata".into()))?;
    let act: Vec<&Monomial> = ms.iter().filter(|m| m.a != 0.0).collect();
    if act.is_empty() {
        return Err(Error::InvalidArgument("no nonzero monomials".into()));
    }
    Ok(act)
}

/// ν₁ = min over monomials of (d−2)(|p|+|q|) − d.
pub fn nu_exponent(spec: &NonlinearitySpec) -> Result<f64> {
    let d = spec.d() as f64;
    Ok(active(spec)?
        .iter()
        .map(|m| (d - 2.0) * (m.p_degree() + m.q_degree()) as f64 - d)
        .fold(f64::INFINITY, f64::min))
}

/// ν_{1,ℜ} = min over monomials of (d−2)|p| + (d−1)|q| − d (scalar-product / bracket forms).
pub fn nu_exponent_structured(spec: &NonlinearitySpec) -> Result<f64> {
    let d = spec.d() as f64;
    Ok(active(spec)?
        .iter()
        .map(|m| (d - 2.0) * m.p_degree() as f64 + (d - 1.0) * m.q_degree() as f64 - d)
        .fold(f64::INFINITY, f64::min))
}

/// Exponent relevant for the spec: structured if any structure flag is set.
pub fn predicted_nu(spec: &NonlinearitySpec) -> Result<f64> {
    let f = spec.flags();
    if f.scalar_product_structure || f.bracket_structure_2d {
        nu_exponent_structured(spec)
    } else {
        nu_exponent(spec)
    }
}
