//! Problem tuple, power-log weights, cusp profile and derived exponents.
//!
//! All weights are evaluated in log space. Callers that need values at
//! depths like `z = 2^-4000` use the `*_at_ln` entry points, which take
//! `ln z` instead of `z`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{dual, exp, ln, powf};
use crate::{Error, Result};

/// Width kind; selects the effective exponent `q̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WidthKind {
    Kolmogorov,
    Linear,
    Gelfand,
}

/// Integrability and smoothness tuple `(p, q, r, d)` plus width kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub p: f64,
    pub q: f64,
    pub r: u32,
    pub d: u32,
    pub kind: WidthKind,
}

impl ProblemParams {
    /// Requires `1 < p <= q < inf`, `r >= 1`, `d >= 2` and `delta > 0`.
    pub fn new(p: f64, q: f64, r: u32, d: u32, kind: WidthKind) -> Result<Self> {
        let params = Self { p, q, r, d, kind };
        if let Some(msg) = params.range_violation() {
            return Err(Error::InvalidParams(msg));
        }
        if params.delta() <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "delta = r + d/q - d/p = {} must be positive",
                params.delta()
            )));
        }
        Ok(params)
    }

    fn range_violation(&self) -> Option<String> {
        if !(self.p.is_finite() && self.q.is_finite()) {
            return Some(String::from("p and q must be finite"));
        }
        if !(self.p > 1.0 && self.p <= self.q) {
            return Some(format!("need 1 < p <= q, got p = {}, q = {}", self.p, self.q));
        }
        if self.r < 1 {
            return Some(String::from("r must be at least 1"));
        }
        if self.d < 2 {
            return Some(format!("d must be at least 2, got {}", self.d));
        }
        None
    }

    /// `r + d/q - d/p`.
    pub fn delta(&self) -> f64 {
        let d = self.d as f64;
        self.r as f64 + d / self.q - d / self.p
    }

    pub fn p_dual(&self) -> f64 {
        dual(self.p)
    }

    /// `q` for Kolmogorov, `min(q, p')` for linear, `p'` for Gelfand widths.
    pub fn qhat(&self) -> f64 {
        qhat(self.p, self.q, self.kind)
    }

    /// Number of multi-indices of order `r` in `d` variables.
    pub fn multi_index_count(&self) -> u64 {
        binomial(u64::from(self.r + self.d - 1), u64::from(self.d - 1))
    }
}

pub(crate) fn qhat(p: f64, q: f64, kind: WidthKind) -> f64 {
    match kind {
        WidthKind::Kolmogorov => q,
        WidthKind::Linear => q.min(dual(p)),
        WidthKind::Gelfand => dual(p),
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Deepest supported log iteration.
pub const MAX_LOG_DEPTH: u32 = 4;

/// Threshold above which `log^{∘k}` is positive: 1, e, e^e, ...
fn log_tower(k: u32) -> f64 {
    (1..k).fold(1.0, |acc, _| exp(acc))
}

/// `scale · ∏ (log^{∘k} t)^e`, frozen to its value at `t_min` for `t < t_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowlyVarying {
    factors: Vec<(u32, f64)>,
    t_min: f64,
    scale: f64,
}

impl Default for SlowlyVarying {
    fn default() -> Self {
        Self::one()
    }
}

impl SlowlyVarying {
    /// The constant function 1.
    pub fn one() -> Self {
        Self {
            factors: Vec::new(),
            t_min: 2.0,
            scale: 1.0,
        }
    }

    /// Floor defaults to twice the positivity threshold of the deepest factor.
    pub fn new(factors: Vec<(u32, f64)>) -> Result<Self> {
        let depth = factors.iter().map(|f| f.0).max().unwrap_or(1);
        if depth > MAX_LOG_DEPTH {
            return Err(Error::InvalidParams(format!(
                "log depth {depth} exceeds {MAX_LOG_DEPTH}"
            )));
        }
        Self::with_floor(factors, 2.0 * log_tower(depth.max(1)))
    }

    pub fn with_floor(factors: Vec<(u32, f64)>, t_min: f64) -> Result<Self> {
        let mut merged: Vec<(u32, f64)> = Vec::new();
        for &(k, e) in &factors {
            if k == 0 || k > MAX_LOG_DEPTH {
                return Err(Error::InvalidParams(format!(
                    "log depth must lie in 1..={MAX_LOG_DEPTH}, got {k}"
                )));
            }
            if !e.is_finite() {
                return Err(Error::InvalidParams(String::from(
                    "slowly varying exponent must be finite",
                )));
            }
            match merged.iter_mut().find(|m| m.0 == k) {
                Some(m) => m.1 += e,
                None => merged.push((k, e)),
            }
        }
        merged.retain(|m| m.1 != 0.0);
        merged.sort_by_key(|m| m.0);
        let depth = merged.iter().map(|f| f.0).max().unwrap_or(1);
        if !(t_min.is_finite() && t_min > 1.0 && t_min > log_tower(depth)) {
            return Err(Error::InvalidParams(format!(
                "floor t_min = {t_min} must exceed 1 and the positivity threshold {}",
                log_tower(depth)
            )));
        }
        Ok(Self {
            factors: merged,
            t_min,
            scale: 1.0,
        })
    }

    /// Multiplies by a positive constant.
    pub fn scaled(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "scale must be positive and finite, got {c}"
            )));
        }
        self.scale *= c;
        Ok(self)
    }

    pub fn factors(&self) -> &[(u32, f64)] {
        &self.factors
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn ln_value(&self, t: f64) -> f64 {
        let t = t.max(self.t_min);
        let mut acc = ln(self.scale);
        let mut level = t;
        let mut k = 0;
        for &(depth, e) in &self.factors {
            while k < depth {
                level = ln(level);
                k += 1;
            }
            acc += e * ln(level);
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        exp(self.ln_value(t))
    }

    /// Pointwise product; exact for `t` above both floors.
    pub fn product(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let mut out = Self::with_floor(factors, self.t_min.max(other.t_min))
            .expect("floors of valid factors stay valid");
        out.scale = self.scale * other.scale;
        out
    }

    /// Real power; the zero power is the constant 1.
    pub fn powf(&self, e: f64) -> Self {
        if e == 0.0 {
            return Self::one();
        }
        let factors = self.factors.iter().map(|&(k, x)| (k, x * e)).collect();
        let mut out =
            Self::with_floor(factors, self.t_min).expect("floors of valid factors stay valid");
        out.scale = powf(self.scale, e);
        out
    }
}

/// `g0(z) = z^-beta |log z|^-alpha_exp sv(|log z|)` on `(0, 1/2]`, constant beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub beta: f64,
    pub alpha_exp: f64,
    pub sv: SlowlyVarying,
}

const LN_HALF: f64 = -core::f64::consts::LN_2;

impl WeightSpec {
    pub fn new(beta: f64, alpha_exp: f64, sv: SlowlyVarying) -> Result<Self> {
        if !(beta.is_finite() && alpha_exp.is_finite()) {
            return Err(Error::InvalidParams(String::from(
                "weight exponents must be finite",
            )));
        }
        Ok(Self {
            beta,
            alpha_exp,
            sv,
        })
    }

    /// The constant weight 1.
    pub fn unit() -> Self {
        Self {
            beta: 0.0,
            alpha_exp: 0.0,
            sv: SlowlyVarying::one(),
        }
    }

    /// `ln g0` at `ln z`.
    pub fn ln_value_at_ln(&self, ln_z: f64) -> f64 {
        let lz = ln_z.min(LN_HALF);
        let big_l = -lz;
        -self.beta * lz - self.alpha_exp * ln(big_l) + self.sv.ln_value(big_l)
    }

    pub fn ln_value(&self, z: f64) -> f64 {
        self.ln_value_at_ln(ln(z))
    }

    pub fn value(&self, z: f64) -> f64 {
        exp(self.ln_value(z))
    }

    /// Same weight times a positive constant.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Self {
            sv: self.sv.clone().scaled(c)?,
            ..self.clone()
        })
    }
}

/// `φ(z) = z^sigma |log z|^theta ω(|log z|)`; the log part is frozen at `z = 1/2` for larger `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspProfile {
    pub sigma: f64,
    pub theta: f64,
    pub omega: SlowlyVarying,
}

impl CuspProfile {
    /// Accepts `sigma >= 1` so boundary profiles like `z/2` can be built;
    /// the strict cusp condition is checked by [`validate_regime`].
    pub fn new(sigma: f64, theta: f64, omega: SlowlyVarying) -> Result<Self> {
        if !(sigma.is_finite() && theta.is_finite() && sigma >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "profile needs finite sigma >= 1 and finite theta, got sigma = {sigma}, theta = {theta}"
            )));
        }
        Ok(Self {
            sigma,
            theta,
            omega,
        })
    }

    /// `z^sigma`.
    pub fn power(sigma: f64) -> Result<Self> {
        Self::new(sigma, 0.0, SlowlyVarying::one())
    }

    pub fn ln_phi_at_ln(&self, ln_z: f64) -> f64 {
        let big_l = (-ln_z).max(-LN_HALF);
        self.sigma * ln_z + self.theta * ln(big_l) + self.omega.ln_value(big_l)
    }

    pub fn ln_phi(&self, z: f64) -> f64 {
        self.ln_phi_at_ln(ln(z))
    }

    pub fn phi(&self, z: f64) -> f64 {
        exp(self.ln_phi(z))
    }

    /// Samples `(z_max 2^-60, z_max]` log-uniformly and checks that `φ` increases and stays below `z`.
    pub fn check_working_interval(&self, z_max: f64, samples: usize) -> Result<()> {
        let samples = samples.max(2);
        let ln_hi = ln(z_max);
        let ln_lo = ln_hi - 60.0 * core::f64::consts::LN_2;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..samples {
            let lz = ln_lo + (ln_hi - ln_lo) * i as f64 / (samples - 1) as f64;
            let lphi = self.ln_phi_at_ln(lz);
            if lphi > lz + 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "phi(z) > z at z = {}",
                    exp(lz)
                )));
            }
            if let Some((plz, plphi)) = prev {
                if lphi <= plphi {
                    return Err(Error::NonMonotoneProfile {
                        lo: exp(plz),
                        hi: exp(lz),
                    });
                }
            }
            prev = Some((lz, lphi));
        }
        Ok(())
    }
}

/// Exponents derived from a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantities {
    pub delta: f64,
    pub alpha: f64,
    pub qhat: f64,
    /// `ρ_g ρ_v ω^{(d-1)(1/q-1/p)}`.
    pub rho: SlowlyVarying,
}

pub fn derive_quantities(
    params: &ProblemParams,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
) -> DerivedQuantities {
    let dm1 = params.d as f64 - 1.0;
    let gap = 1.0 / params.p - 1.0 / params.q;
    let alpha = g.alpha_exp + v.alpha_exp + cusp.theta * dm1 * gap;
    let rho = g.sv.product(&v.sv).product(&cusp.omega.powf(-dm1 * gap));
    DerivedQuantities {
        delta: params.delta(),
        alpha,
        qhat: params.qhat(),
        rho,
    }
}

/// Absolute tolerance of the exponent balance equation.
pub const BALANCE_TOL: f64 = 1e-12;

/// A violated standing hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ParamRange(String),
    SigmaNotAboveOne { sigma: f64 },
    Balance { lhs: f64, rhs: f64 },
    VIntegrability { value: f64 },
    AlphaNonpositive { alpha: f64 },
    DeltaNonpositive { delta: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ParamRange(m) => write!(f, "{m}"),
            Self::SigmaNotAboveOne { sigma } => write!(f, "σ > 1 required (σ = {sigma})"),
            Self::Balance { lhs, rhs } => write!(
                f,
                "r + (σ(d−1)+1)(1/q−1/p) = {lhs} differs from β_g+β_v = {rhs}"
            ),
            Self::VIntegrability { value } => write!(f, "σ(d−1)+1−β_v q = {value} ≤ 0"),
            Self::AlphaNonpositive { alpha } => write!(f, "α = {alpha} ≤ 0"),
            Self::DeltaNonpositive { delta } => write!(f, "δ = {delta} ≤ 0"),
        }
    }
}

/// Checks every standing hypothesis and names each failure; empty means admissible.
pub fn validate_regime(
    params: &ProblemParams,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Some(msg) = params.range_violation() {
        out.push(Violation::ParamRange(msg));
        return out;
    }
    let dm1 = params.d as f64 - 1.0;
    let (p, q, r) = (params.p, params.q, params.r as f64);
    if cusp.sigma <= 1.0 {
        out.push(Violation::SigmaNotAboveOne { sigma: cusp.sigma });
    }
    let lhs = r + (cusp.sigma * dm1 + 1.0) * (1.0 / q - 1.0 / p);
    let rhs = g.beta + v.beta;
    if (lhs - rhs).abs() > BALANCE_TOL {
        out.push(Violation::Balance { lhs, rhs });
    }
    let integrability = cusp.sigma * dm1 + 1.0 - v.beta * q;
    if integrability <= 0.0 {
        out.push(Violation::VIntegrability {
            value: integrability,
        });
    }
    let dq = derive_quantities(params, g, v, cusp);
    if dq.alpha <= 0.0 {
        out.push(Violation::AlphaNonpositive { alpha: dq.alpha });
    }
    if dq.delta <= 0.0 {
        out.push(Violation::DeltaNonpositive { delta: dq.delta });
    }
    out
}

/// Band of `sv(t y) / sv(y)` against `t^{±ε}` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowVariationReport {
    pub eps: f64,
    /// `min sv(ty) / (sv(y) t^-ε)`.
    pub c1: f64,
    /// `max sv(ty) / (sv(y) t^ε)`.
    pub c2: f64,
    pub raw_min: f64,
    pub raw_max: f64,
    /// `(t, y)` attaining `c2`.
    pub worst_upper: (f64, f64),
    /// `(t, y)` attaining `c1`.
    pub worst_lower: (f64, f64),
}

pub fn slowly_varying_check(
    sv: &SlowlyVarying,
    eps: f64,
    y_grid: &[f64],
    t_grid: &[f64],
) -> SlowVariationReport {
    let mut rep = SlowVariationReport {
        eps,
        c1: f64::INFINITY,
        c2: 0.0,
        raw_min: f64::INFINITY,
        raw_max: 0.0,
        worst_upper: (f64::NAN, f64::NAN),
        worst_lower: (f64::NAN, f64::NAN),
    };
    for &y in y_grid {
        let base = sv.ln_value(y);
        for &t in t_grid {
            let raw = exp(sv.ln_value(t * y) - base);
            let lt = ln(t);
            let upper = raw * exp(-eps * lt);
            let lower = raw * exp(eps * lt);
            rep.raw_min = rep.raw_min.min(raw);
            rep.raw_max = rep.raw_max.max(raw);
            if upper > rep.c2 {
                rep.c2 = upper;
                rep.worst_upper = (t, y);
            }
            if lower < rep.c1 {
                rep.c1 = lower;
                rep.worst_lower = (t, y);
            }
        }
    }
    rep
}

/// Ratio `sup w / inf w` over `[max(z/2, z-φ(z)), z+φ(z)]`, sampled at `samples` points.
pub fn local_oscillation(w: &WeightSpec, cusp: &CuspProfile, z: f64, samples: usize) -> f64 {
    let phi = cusp.phi(z);
    let lo = (z / 2.0).max(z - phi);
    let hi = z + phi;
    let samples = samples.max(2);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..samples {
        let s = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let lw = w.ln_value(s);
        min = min.min(lw);
        max = max.max(lw);
    }
    exp(max - min)
}
