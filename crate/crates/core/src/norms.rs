//! Weighted norms H^s, Y_{s,t}, Z_{s,r}, the space-time sups 𝒴 and 𝒳_ν, and the h₁ series.
//!
//! Every weighted sum is accumulated in the log domain: e^{(ℓ+(d−2)/2)t} overflows quickly.

use crate::duhamel::Trajectory;
use crate::error::{Error, Result};
use crate::solver::Monomial;
use crate::sphere_spectral::{SpectralField, SphereBasis};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Infinity,
    Zero,
}

/// Signed number stored as (sign, ln|x|).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMagnitude {
    pub sign: f64,
    pub log_abs: f64,
}

impl LogMagnitude {
    pub const ZERO: Self = Self { sign: 0.0, log_abs: f64::NEG_INFINITY };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { sign: x.signum(), log_abs: x.abs().ln() }
        }
    }

    /// e^{log_abs} with sign.
    pub fn from_log(sign: f64, log_abs: f64) -> Self {
        if sign == 0.0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_abs }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn mul(self, other: Self) -> Self {
        Self::from_log(self.sign * other.sign, self.log_abs + other.log_abs)
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.log_abs >= other.log_abs { (self, other) } else { (other, self) };
        let r = (small.log_abs - big.log_abs).exp();
        if big.sign == small.sign {
            Self::from_log(big.sign, big.log_abs + r.ln_1p())
        } else if r == 1.0 {
            Self::ZERO
        } else {
            Self::from_log(big.sign, big.log_abs + (-r).ln_1p())
        }
    }
}

/// ln Σ e^{x_i}, with −∞ for an empty or all −∞ input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn log_bracket(l: usize) -> f64 {
    0.5 * (1.0 + (l * l) as f64).ln()
}

/// ln of √(Σ_ℓ ⟨ℓ⟩^{2s} e^{2λ_ℓ t} ‖P_ℓ c‖²) for a coefficient slice (any number of components).
/// No sign restriction on `t`.
pub fn weighted_log_norm(basis: &SphereBasis, coeffs: &[f64], s: f64, t: f64) -> f64 {
    let nm = basis.n_modes();
    let mut energy = vec![0.0f64; basis.lmax() + 1];
    for (i, c) in coeffs.iter().enumerate() {
        energy[basis.modes()[i % nm].0] += c * c;
    }
    let terms = energy.iter().enumerate().filter(|(_, e)| **e > 0.0).map(|(l, e)| {
        2.0 * s * log_bracket(l) + 2.0 * basis.lambda(l) * t + e.ln()
    });
    0.5 * log_sum_exp(terms)
}

fn exp_or_zero(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else {
        x.exp()
    }
}

/// ‖v‖_{H^s}.
pub fn hs_norm(v: &SpectralField, s: f64) -> f64 {
    exp_or_zero(weighted_log_norm(v.basis(), v.coeffs(), s, 0.0))
}

/// ‖v‖_{Y_{s,t}} = ‖e^{t𝔇}v‖_{H^s}.
pub fn y_norm(v: &SpectralField, s: f64, t: f64) -> Result<f64> {
    Ok(exp_or_zero(y_norm_log(v, s, t)?))
}

/// ln ‖v‖_{Y_{s,t}} (−∞ for v = 0); finite where the norm itself overflows.
pub fn y_norm_log(v: &SpectralField, s: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("Y norm needs t >= 0, got {t}")));
    }
    Ok(weighted_log_norm(v.basis(), v.coeffs(), s, t))
}

/// Z^∞_{s,r} = r^{(d−2)/2} Y_{s,ln r} (r ≥ 1) or Z^0_{s,r} = r^{(d−2)/2} Y_{s,−ln r} (r ≤ 1).
pub fn z_norm(v: &SpectralField, s: f64, r: f64, orientation: Orientation) -> Result<f64> {
    let ok = match orientation {
        Orientation::Infinity => r >= 1.0,
        Orientation::Zero => r > 0.0 && r <= 1.0,
    };
    if !ok || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius {r} incompatible with {orientation:?} orientation")));
    }
    let t = match orientation {
        Orientation::Infinity => r.ln(),
        Orientation::Zero => -r.ln(),
    };
    let shift = (v.basis().d() as f64 - 2.0) / 2.0 * r.ln();
    Ok(exp_or_zero(y_norm_log(v, s, t)? + shift))
}

/// ln(‖v(τ_k)‖_{Y_{s,τ_k−t0}} + ‖φ(τ_k)‖_{Y_{s−1,τ_k−t0}}).
pub fn pair_log_norm(traj: &Trajectory, k: usize, s: f64, t0: f64) -> f64 {
    let tau = traj.grid().t(k) - t0;
    let a = weighted_log_norm(traj.basis(), traj.node_v(k), s, tau);
    let b = weighted_log_norm(traj.basis(), traj.node_dv(k), s - 1.0, tau);
    log_sum_exp([a, b])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupNorm {
    pub value: f64,
    pub log_value: f64,
    pub arg_node: usize,
    pub arg_time: f64,
}

/// 𝒴^{t0}_{s,t}: sup over nodes τ ≥ t of the pair norm.
pub fn traj_norm(traj: &Trajectory, s: f64, t: f64, t0: f64) -> Result<SupNorm> {
    let g = traj.grid();
    let start = g.index_at_or_after(t);
    if start >= g.len() {
        return Err(Error::InvalidArgument(format!("no nodes at or after t = {t}")));
    }
    let mut best = SupNorm { value: 0.0, log_value: f64::NEG_INFINITY, arg_node: start, arg_time: g.t(start) };
    for k in start..g.len() {
        let l = pair_log_norm(traj, k, s, t0);
        if l > best.log_value {
            best = SupNorm { value: l.exp(), log_value: l, arg_node: k, arg_time: g.t(k) };
        }
    }
    Ok(best)
}

/// Suffix sups of the pair norm at every node: out[k] = ln 𝒴^{t0}_{s,τ_k}.
pub fn traj_norm_profile(traj: &Trajectory, s: f64, t0: f64) -> Vec<f64> {
    let n = traj.grid().len();
    let mut out = vec![f64::NEG_INFINITY; n];
    let mut run = f64::NEG_INFINITY;
    for k in (0..n).rev() {
        run = run.max(pair_log_norm(traj, k, s, t0));
        out[k] = run;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XNuNorm {
    pub value: f64,
    pub log_value: f64,
    pub arg_time: f64,
    /// The sup is attained at the end of the grid: the true norm grows with T_max.
    pub unbounded: bool,
}

/// sup_{t ≥ t0} e^{ν(t−t1)} 𝒴^{t1}_{s,t}.
pub fn x_nu_norm(traj: &Trajectory, s: f64, nu: f64, t0: f64, t1: f64) -> Result<XNuNorm> {
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("nu must be positive, got {nu}")));
    }
    let g = traj.grid();
    let start = g.index_at_or_after(t0);
    if start >= g.len() {
        return Err(Error::InvalidArgument(format!("no nodes at or after t0 = {t0}")));
    }
    let prof = traj_norm_profile(traj, s, t1);
    let vals: Vec<f64> = (start..g.len()).map(|k| nu * (g.t(k) - t1) + prof[k]).collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(XNuNorm { value: 0.0, log_value: max, arg_time: g.t(start), unbounded: false });
    }
    // first node within rounding of the max
    let first = vals.iter().position(|v| *v >= max - 1e-9).unwrap_or(0);
    let tail_start = vals.len() - (vals.len() / 20).max(1);
    Ok(XNuNorm { value: max.exp(), log_value: max, arg_time: g.t(start + first), unbounded: first >= tail_start })
}

/// All compositions of `total` into `parts` nonnegative parts (lexicographic order).
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn log_bracket_multi(alpha: &[u32]) -> f64 {
    log_bracket(alpha.iter().sum::<u32>() as usize)
}

/// Coefficient bookkeeping B_ϑ: for every monomial u^p ϖ^q, distribute the gradient factors
/// over (α, δ, ι, γ) with |α| = |ι| + |γ| = A and |δ| = |q| − A, each choice weighted by
/// max_i |a_{i,p,q}| · (d/2 + 1)^{|ι|+|γ|+|δ|}. Keys are (α, β = p + ι, γ, δ, ι).
pub fn h1_terms(monomials: &[Monomial], d: usize, ncomp: usize) -> Result<BTreeMap<Vec<u32>, (f64, Vec<u32>, u32)>> {
    if monomials.is_empty() {
        return Err(Error::InvalidArgument("h1 needs monomial metadata".into()));
    }
    let mut amax: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
    for mono in monomials {
        if mono.p.len() != ncomp || mono.q.len() != ncomp * d {
            return Err(Error::InvalidArgument("monomial shape does not match (ncomp, d)".into()));
        }
        let e = amax.entry((mono.p.clone(), mono.q.clone())).or_insert(0.0);
        *e = e.max(mono.a.abs());
    }
    let factor = d as f64 / 2.0 + 1.0;
    // key → (B, α, |β|+|γ|+|δ|)
    let mut terms: BTreeMap<Vec<u32>, (f64, Vec<u32>, u32)> = BTreeMap::new();
    for ((p, q), a) in amax {
        if a == 0.0 {
            continue;
        }
        let qn: u32 = q.iter().sum();
        let pn: u32 = p.iter().sum();
        for big_a in 0..=qn {
            for alpha in compositions(big_a, d) {
                for delta in compositions(qn - big_a, ncomp * d) {
                    for iota_gamma in compositions(big_a, 2 * ncomp) {
                        let (iota, gamma) = iota_gamma.split_at(ncomp);
                        let beta: Vec<u32> = p.iter().zip(iota).map(|(a, b)| a + b).collect();
                        let mut key = alpha.clone();
                        key.extend(&beta);
                        key.extend(gamma);
                        key.extend(&delta);
                        key.extend(iota);
                        let w = a * factor.powi(qn as i32);
                        let e = terms.entry(key).or_insert((0.0, alpha.clone(), pn + qn));
                        e.0 += w;
                    }
                }
            }
        }
    }
    Ok(terms)
}

/// Finite partial sum of h₁(σ) = Σ_ϑ B_ϑ ⟨α⟩^{s+1} (|β|+|γ|+|δ|) σ^{|β|+|γ|+|δ|−1}.
pub fn h1_partial(monomials: &[Monomial], d: usize, ncomp: usize, s: f64, sigma: f64) -> Result<f64> {
    let terms = h1_terms(monomials, d, ncomp)?;
    let mut acc = 0.0;
    for (b, alpha, deg) in terms.values() {
        if *deg == 0 {
            continue;
        }
        acc += b * ((s + 1.0) * log_bracket_multi(alpha)).exp() * *deg as f64 * sigma.powi(*deg as i32 - 1);
    }
    Ok(acc)
}
