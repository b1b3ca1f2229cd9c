use super::SphereBasis;
use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// N-component field stored as real harmonic coefficients, component-major.
#[derive(Clone, Debug)]
pub struct SpectralField {
    basis: Arc<SphereBasis>,
    ncomp: usize,
    coeffs: Vec<f64>,
}

/// Collocation values, component-major.
#[derive(Clone, Debug)]
pub struct GridField {
    basis: Arc<SphereBasis>,
    ncomp: usize,
    values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MultiplyOutput {
    pub field: SpectralField,
    /// L² norm of the product content above lmax (discarded by truncation).
    pub truncation_l2: f64,
}

fn check_same(a: &SphereBasis, b: &SphereBasis) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::BasisMismatch(format!(
            "(d={}, lmax={}, oversample={}) vs (d={}, lmax={}, oversample={})",
            a.d(),
            a.lmax(),
            a.oversample(),
            b.d(),
            b.lmax(),
            b.oversample()
        )))
    }
}

impl SpectralField {
    pub fn zeros(basis: &Arc<SphereBasis>, ncomp: usize) -> Self {
        let n = basis.n_modes() * ncomp;
        Self { basis: basis.clone(), ncomp, coeffs: vec![0.0; n] }
    }

    pub fn from_coeffs(basis: &Arc<SphereBasis>, ncomp: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.n_modes() * ncomp {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                basis.n_modes() * ncomp,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("spectral coefficients".into()));
        }
        Ok(Self { basis: basis.clone(), ncomp, coeffs })
    }

    /// Scalar field `amp·φ_{ℓ,m}`.
    pub fn mode(basis: &Arc<SphereBasis>, l: usize, m: i64, amp: f64) -> Result<Self> {
        let idx = basis
            .index(l, m)
            .ok_or_else(|| Error::InvalidArgument(format!("mode ({l},{m}) not in basis")))?;
        let mut f = Self::zeros(basis, 1);
        f.coeffs[idx] = amp;
        Ok(f)
    }

    /// Seeded random data: coefficients uniform in [−1, 1] on degrees `l_min..=l_max`,
    /// rescaled so each component has L² norm `amp`.
    pub fn random(basis: &Arc<SphereBasis>, ncomp: usize, l_min: usize, l_max: usize, amp: f64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let nm = basis.n_modes();
        let mut coeffs = vec![0.0; nm * ncomp];
        for block in coeffs.chunks_mut(nm) {
            for (c, &(l, _)) in block.iter_mut().zip(basis.modes()) {
                if (l_min..=l_max).contains(&l) {
                    *c = rng.gen_range(-1.0..=1.0);
                }
            }
            let n = block.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                block.iter_mut().for_each(|x| *x *= amp / n);
            }
        }
        Self { basis: basis.clone(), ncomp, coeffs }
    }

    pub fn basis(&self) -> &Arc<SphereBasis> {
        &self.basis
    }
    pub fn ncomp(&self) -> usize {
        self.ncomp
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }
    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.basis.n_modes();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn get(&self, comp: usize, l: usize, m: i64) -> f64 {
        self.basis.index(l, m).map_or(0.0, |i| self.coeffs[comp * self.basis.n_modes() + i])
    }

    pub fn synthesize(&self) -> GridField {
        let mut values = Vec::with_capacity(self.ncomp * self.basis.n_points());
        for c in 0..self.ncomp {
            values.extend(self.basis.synthesize_slice(self.component(c)));
        }
        GridField { basis: self.basis.clone(), ncomp: self.ncomp, values }
    }

    fn map_modes(&self, f: impl Fn(usize, i64, f64) -> f64) -> Self {
        let n = self.basis.n_modes();
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            let (l, m) = self.basis.modes()[k % n];
            *c = f(l, m, *c);
        }
        out
    }

    /// 𝔇: multiplies degree ℓ by ℓ + (d−2)/2.
    #[allow(non_snake_case)]
    pub fn apply_D(&self) -> Self {
        let b = self.basis.clone();
        self.map_modes(|l, _, c| b.lambda(l) * c)
    }

    /// e^{−t𝔇} applied mode-wise.
    pub fn flow(&self, t: f64) -> Self {
        let b = self.basis.clone();
        self.map_modes(|l, _, c| c * (-b.lambda(l) * t).exp())
    }

    /// P_ℓ; a degree above lmax yields the zero field.
    pub fn project(&self, l: usize) -> Self {
        self.map_modes(|ll, _, c| if ll == l { c } else { 0.0 })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_modes(|_, _, c| a * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(&self.basis, &other.basis)?;
        if self.ncomp != other.ncomp {
            return Err(Error::InvalidArgument("component count mismatch".into()));
        }
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Σ over components of ‖P_ℓ v‖², indexed by ℓ.
    pub fn degree_energies(&self) -> Vec<f64> {
        let n = self.basis.n_modes();
        let mut e = vec![0.0; self.basis.lmax() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            e[self.basis.modes()[k % n].0] += c * c;
        }
        e
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Pointwise product via the oversampled grid, truncated to lmax. A scalar factor
    /// broadcasts over the components of the other.
    pub fn multiply(&self, other: &Self) -> Result<MultiplyOutput> {
        check_same(&self.basis, &other.basis)?;
        let ncomp = match (self.ncomp, other.ncomp) {
            (a, b) if a == b => a,
            (1, b) => b,
            (a, 1) => a,
            (a, b) => return Err(Error::InvalidArgument(format!("cannot multiply {a}- and {b}-component fields"))),
        };
        let ga = self.synthesize();
        let gb = other.synthesize();
        let np = self.basis.n_points();
        let mut values = vec![0.0; ncomp * np];
        for c in 0..ncomp {
            let a = &ga.values[(c % self.ncomp) * np..][..np];
            let b = &gb.values[(c % other.ncomp) * np..][..np];
            for k in 0..np {
                values[c * np + k] = a[k] * b[k];
            }
        }
        let total: f64 = (0..ncomp)
            .map(|c| (0..np).map(|k| self.basis.weights()[k] * values[c * np + k].powi(2)).sum::<f64>())
            .sum();
        let field = GridField { basis: self.basis.clone(), ncomp, values }.analyze()?;
        let kept: f64 = field.coeffs.iter().map(|c| c * c).sum();
        Ok(MultiplyOutput { field, truncation_l2: (total - kept).max(0.0).sqrt() })
    }

    fn check_direction(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.basis.d() {
            Err(Error::InvalidArgument(format!("direction {i} not in [1, {}]", self.basis.d())))
        } else {
            Ok(())
        }
    }

    /// D_i = e_i·∇_S (1-based i), evaluated pointwise on the grid and re-expanded;
    /// exact for content of degree ≤ lmax − 1.
    #[allow(non_snake_case)]
    pub fn apply_Di(&self, i: usize) -> Result<Self> {
        self.check_direction(i)?;
        let np = self.basis.n_points();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in 0..self.ncomp {
            let g = self.basis.tangential_gradient_slice(self.component(c));
            coeffs.extend(self.basis.analyze_slice(&g[(i - 1) * np..i * np]));
        }
        Ok(Self { basis: self.basis.clone(), ncomp: self.ncomp, coeffs })
    }

    /// ℜ_i = D_i + y_i(𝔇 − (d−2)/2): restriction of ∂_i of the solid-harmonic extension.
    #[allow(non_snake_case)]
    pub fn apply_Ri(&self, i: usize) -> Result<Self> {
        self.check_direction(i)?;
        let n = self.basis.n_modes();
        let mat = &self.basis.r_matrices()[i - 1];
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for c in 0..self.ncomp {
            let src = self.component(c);
            for row in 0..n {
                let r = &mat[row * n..(row + 1) * n];
                coeffs[c * n + row] = r.iter().zip(src).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Self { basis: self.basis.clone(), ncomp: self.ncomp, coeffs })
    }

    /// Coefficients of the monomial y^α restricted to the sphere. Only degrees |α|, |α| − 2, …
    /// can carry content; quadrature roundoff elsewhere is cleared.
    pub fn poly_to_sh(basis: &Arc<SphereBasis>, alpha: &[u32]) -> Result<Self> {
        if alpha.len() != basis.d() {
            return Err(Error::InvalidArgument("multi-index length must equal d".into()));
        }
        let deg: u32 = alpha.iter().sum();
        if deg as usize > basis.lmax() {
            return Err(Error::InvalidArgument(format!("|α| = {deg} exceeds lmax = {}", basis.lmax())));
        }
        let values: Vec<f64> = basis
            .points()
            .iter()
            .map(|y| alpha.iter().zip(y.iter()).map(|(&a, &x)| x.powi(a as i32)).product())
            .collect();
        let mut f = GridField { basis: basis.clone(), ncomp: 1, values }.analyze()?;
        for (c, &(l, _)) in f.coeffs.iter_mut().zip(basis.modes()) {
            if l as u32 > deg || (deg - l as u32) % 2 == 1 {
                *c = 0.0;
            }
        }
        Ok(f)
    }

    /// Evaluates the field at an arbitrary unit vector.
    pub fn eval_at(&self, y: &[f64]) -> Vec<f64> {
        let phi = self.basis.basis_values_at(y);
        (0..self.ncomp).map(|c| self.component(c).iter().zip(&phi).map(|(a, b)| a * b).sum()).collect()
    }
}

/// ‖Y_{ℓ,0}‖_∞ / ‖Y_{ℓ,0}‖_2 for the zonal harmonic (cos ℓθ on S¹). The sup is taken over
/// the grid together with a dense meridian sweep that includes both poles.
pub fn sogge_ratio(basis: &Arc<SphereBasis>, l: usize) -> Result<f64> {
    if l > basis.lmax() {
        return Err(Error::InvalidArgument(format!("ℓ = {l} exceeds lmax = {}", basis.lmax())));
    }
    let m = if basis.d() == 2 { l as i64 } else { 0 };
    let f = SpectralField::mode(basis, l, m, 1.0)?;
    let g = f.synthesize();
    let l2 = g.values.iter().zip(basis.weights()).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
    let mut sup = g.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let sweep = 16 * (basis.lmax() + 1);
    for k in 0..=sweep {
        let th = PI * k as f64 / sweep as f64;
        let y = if basis.d() == 2 { [th.cos(), th.sin(), 0.0] } else { [th.sin(), 0.0, th.cos()] };
        sup = sup.max(f.eval_at(&y)[0].abs());
    }
    Ok(sup / l2)
}

impl GridField {
    pub fn new(basis: &Arc<SphereBasis>, ncomp: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != ncomp * basis.n_points() {
            return Err(Error::InvalidArgument(format!(
                "expected {} grid values, got {}",
                ncomp * basis.n_points(),
                values.len()
            )));
        }
        Ok(Self { basis: basis.clone(), ncomp, values })
    }

    pub fn from_fn(basis: &Arc<SphereBasis>, ncomp: usize, f: impl Fn(&[f64; 3]) -> Vec<f64>) -> Result<Self> {
        let np = basis.n_points();
        let mut values = vec![0.0; ncomp * np];
        for (k, y) in basis.points().iter().enumerate() {
            let v = f(y);
            for c in 0..ncomp {
                values[c * np + k] = v[c];
            }
        }
        Self::new(basis, ncomp, values)
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
    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.basis.n_points();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn analyze(&self) -> Result<SpectralField> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid values".into()));
        }
        let mut coeffs = Vec::with_capacity(self.ncomp * self.basis.n_modes());
        for c in 0..self.ncomp {
            coeffs.extend(self.basis.analyze_slice(self.component(c)));
        }
        Ok(SpectralField { basis: self.basis.clone(), ncomp: self.ncomp, coeffs })
    }
}
