//! Predicted width orders.
//!
//! [`width_exponent`] decides the regime of the weighted problem on the
//! cusp, [`cube_exponent`] gives the unweighted cube order, and the Gluskin
//! functions give orders of widths of finite-dimensional balls.

use alloc::format;
use core::fmt;

use crate::math::{dual, powf, sqrt};
use crate::params::{qhat, DerivedQuantities, ProblemParams, WidthKind};
use crate::{Error, Result};

/// Relative tolerance below which two competing exponents count as tied.
pub const TIE_TOL: f64 = 1e-10;

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Case1,
    /// Unique minimiser `j*` in 1..=4.
    Case2 { j_star: u8 },
    BoundaryUncovered,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Case1 => f.write_str("case1"),
            Self::Case2 { j_star } => write!(f, "case2-{j_star}"),
            Self::BoundaryUncovered => f.write_str("boundary-uncovered"),
        }
    }
}

/// Predicted order `n^-theta_star · ρ(n^sigma_star)` or an uncovered verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthPrediction {
    pub covered: bool,
    pub regime: Regime,
    pub theta_star: Option<f64>,
    pub sigma_star: Option<f64>,
    /// `θ1..θ4`, present when `p < q` and `q̂ > 2`.
    pub thetas: Option<[f64; 4]>,
    pub note: &'static str,
}

pub const NOTE_BOUNDARY_CASE1: &str = "α = δ/d is excluded: the two case-1 rates coincide";
pub const NOTE_TIE_CASE2: &str = "no strict unique minimiser among θ1..θ4";
pub const NOTE_LOG_INFERRED: &str =
    "log power inferred: ρ(n) accompanies the rate when α is the minimum";

/// `(1/2 - 1/q̂, 1/p - 1/q)` minimum shared by `θ1` and `θ3`.
fn gain(p: f64, q: f64, qh: f64) -> f64 {
    (0.5 - 1.0 / qh).min(1.0 / p - 1.0 / q)
}

pub fn width_exponent(dq: &DerivedQuantities, params: &ProblemParams) -> WidthPrediction {
    let d = params.d as f64;
    let (p, q) = (params.p, params.q);
    let dd = dq.delta / d;
    let alpha = dq.alpha;
    let qh = dq.qhat;
    if p == q || qh <= 2.0 {
        if tied(alpha, dd) {
            return WidthPrediction {
                covered: false,
                regime: Regime::BoundaryUncovered,
                theta_star: None,
                sigma_star: None,
                thetas: None,
                note: NOTE_BOUNDARY_CASE1,
            };
        }
        let (theta, sigma, note) = if dd < alpha {
            (dd, 0.0, "")
        } else {
            (alpha, 1.0, NOTE_LOG_INFERRED)
        };
        return WidthPrediction {
            covered: true,
            regime: Regime::Case1,
            theta_star: Some(theta),
            sigma_star: Some(sigma),
            thetas: None,
            note,
        };
    }
    let gain = gain(p, q, qh);
    let thetas = [dd + gain, qh * dq.delta / (2.0 * d), alpha + gain, qh * alpha / 2.0];
    let sigmas = [0.0, 0.0, 1.0, qh / 2.0];
    let (mut best, mut best_val) = (0usize, thetas[0]);
    for (j, &t) in thetas.iter().enumerate().skip(1) {
        if t < best_val {
            best = j;
            best_val = t;
        }
    }
    let unique = thetas
        .iter()
        .enumerate()
        .all(|(j, &t)| j == best || (t > best_val && !tied(t, best_val)));
    if !unique {
        return WidthPrediction {
            covered: false,
            regime: Regime::BoundaryUncovered,
            theta_star: None,
            sigma_star: None,
            thetas: Some(thetas),
            note: NOTE_TIE_CASE2,
        };
    }
    WidthPrediction {
        covered: true,
        regime: Regime::Case2 {
            j_star: best as u8 + 1,
        },
        theta_star: Some(best_val),
        sigma_star: Some(sigmas[best]),
        thetas: Some(thetas),
        note: "",
    }
}

/// Width order of the unweighted Sobolev class on the unit cube.
///
/// `Ok(None)` marks the excluded tie between the two second-branch values.
/// Unlike [`ProblemParams`], `p > q` is accepted here.
pub fn cube_exponent(p: f64, q: f64, r: u32, d: u32, kind: WidthKind) -> Result<Option<f64>> {
    if !(p >= 1.0 && q >= 1.0 && p.is_finite() && q.is_finite() && d >= 1 && r >= 1) {
        return Err(Error::InvalidParams(format!(
            "need 1 <= p, q < inf, r, d >= 1; got p = {p}, q = {q}, r = {r}, d = {d}"
        )));
    }
    let df = d as f64;
    let margin = r as f64 / df + 1.0 / q - 1.0 / p;
    if margin <= 0.0 {
        return Err(Error::EmbeddingExponentNonpositive(margin));
    }
    let dd = margin;
    let qh = qhat(p, q, kind);
    if p >= q || qh <= 2.0 {
        return Ok(Some(dd));
    }
    let a = dd + gain(p, q, qh);
    let b = qh * dd / 2.0;
    if tied(a, b) {
        return Ok(None);
    }
    Ok(Some(a.min(b)))
}

fn check_ball_args(n: u64, nu: u64, p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && p < q && q.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 1 < p < q < inf, got p = {p}, q = {q}"
        )));
    }
    if nu == 0 || n > nu {
        return Err(Error::InvalidParams(format!(
            "need 0 <= n <= nu and nu >= 1, got n = {n}, nu = {nu}"
        )));
    }
    Ok(())
}

/// `n^{-1/2}` with the convention `0^{-1/2} = +inf`.
fn inv_sqrt(n: u64) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else {
        1.0 / sqrt(n as f64)
    }
}

/// Gluskin's order function for `d_n(B_p^ν, l_q^ν)`, `1 < p < q < ∞`.
pub fn gluskin_phi(n: u64, nu: u64, p: f64, q: f64) -> Result<f64> {
    check_ball_args(n, nu, p, q)?;
    let nuf = nu as f64;
    let frac = n as f64 / nuf;
    let val = if p >= 2.0 {
        let base = powf(nuf, 1.0 / q) * inv_sqrt(n);
        let e = (1.0 / p - 1.0 / q) / (0.5 - 1.0 / q);
        1f64.min(powf(base, e))
    } else if q > 2.0 {
        let m = 1f64.min(powf(nuf, 1.0 / q) * inv_sqrt(n));
        powf(nuf, 1.0 / q - 1.0 / p).max(m * sqrt(1.0 - frac))
    } else {
        let e = (1.0 / q - 1.0 / p) / (1.0 - 2.0 / p);
        powf(nuf, 1.0 / q - 1.0 / p).max(powf(1.0 - frac, e))
    };
    Ok(val)
}

/// Linear-width order: `Φ(p, q)` when `q <= p'`, else `Φ(q', p')`.
pub fn gluskin_psi(n: u64, nu: u64, p: f64, q: f64) -> Result<f64> {
    check_ball_args(n, nu, p, q)?;
    if q <= dual(p) {
        gluskin_phi(n, nu, p, q)
    } else {
        gluskin_phi(n, nu, dual(q), dual(p))
    }
}

/// Gelfand-width order `Φ(n, ν, q', p')`.
pub fn gelfand_order(n: u64, nu: u64, p: f64, q: f64) -> Result<f64> {
    check_ball_args(n, nu, p, q)?;
    gluskin_phi(n, nu, dual(q), dual(p))
}
