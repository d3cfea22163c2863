//! Two-weight Hardy constants for the Riemann–Liouville type operator
//! `f ↦ w(t) ∫_t^{t1} (s - t)^{r-1} u(s) f(s) ds` and their cusp-embedding
//! counterparts.
//!
//! Weights are passed as log-evaluators: `ln u(x)`, with `-inf` for zero.
//! Integrands are assembled as `exp` of a sum of logs, so power-log weights
//! near `x = 0` never overflow.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{dual, exp, ln, powf};
use crate::optimize::{maximize, SCAN_POINTS};
use crate::params::{derive_quantities, CuspProfile, ProblemParams, WeightSpec};
use crate::quad::{GradedIntegrator, QuadOptions};
use crate::{Error, Result};

/// `x ↦ ln w(x)`.
pub type LnWeight = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Operator data `(r, u, w, t0, t1, p, q)`.
#[derive(Clone)]
pub struct KernelSpec {
    pub r: u32,
    pub ln_u: LnWeight,
    pub ln_w: LnWeight,
    pub t0: f64,
    pub t1: f64,
    pub p: f64,
    pub q: f64,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("r", &self.r)
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("p", &self.p)
            .field("q", &self.q)
            .finish_non_exhaustive()
    }
}

impl KernelSpec {
    pub fn new(r: u32, ln_u: LnWeight, ln_w: LnWeight, t0: f64, t1: f64, p: f64, q: f64) -> Result<Self> {
        if !(t0 <= t1 && t0.is_finite() && t1.is_finite()) {
            return Err(Error::InvalidParams(format!("need t0 <= t1, got [{t0}, {t1}]")));
        }
        if r < 1 || !(p > 1.0 && p <= q && q.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need r >= 1 and 1 < p <= q < inf, got r = {r}, p = {p}, q = {q}"
            )));
        }
        Ok(Self {
            r,
            ln_u,
            ln_w,
            t0,
            t1,
            p,
            q,
        })
    }

    /// `u = w ≡ 1`.
    pub fn unit(r: u32, t0: f64, t1: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(r, Arc::new(|_| 0.0), Arc::new(|_| 0.0), t0, t1, p, q)
    }
}

/// One sup-of-product constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyConstant {
    /// `+inf` means the constant is infinite and the operator unbounded.
    pub value: f64,
    pub argmax: f64,
    pub quad_error: f64,
}

impl HardyConstant {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// The pair of constants: `(B0, B1)` for a kernel, `(A0, A1)` for an embedding window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyResult {
    pub c0: HardyConstant,
    pub c1: HardyConstant,
}

impl HardyResult {
    pub fn max(&self) -> f64 {
        self.c0.value.max(self.c1.value)
    }

    pub fn sum(&self) -> f64 {
        self.c0.value + self.c1.value
    }

    pub fn is_infinite(&self) -> bool {
        self.c0.is_infinite() || self.c1.is_infinite()
    }

    pub fn quad_error(&self) -> f64 {
        self.c0.quad_error + self.c1.quad_error
    }
}

/// Which side of the product carries the kernel power.
#[derive(Clone, Copy, PartialEq, Eq)]
enum KernelSide {
    /// `(t - x)^{q(r-1)}` under the `w` integral.
    Left,
    /// `(x - t)^{p'(r-1)}` under the `u` integral.
    Right,
}

fn sup_constant(spec: &KernelSpec, side: KernelSide, opts: &QuadOptions, quad: &GradedIntegrator) -> HardyConstant {
    let (t0, t1) = (spec.t0, spec.t1);
    if !(t1 > t0) {
        return HardyConstant {
            value: 0.0,
            argmax: t0,
            quad_error: 0.0,
        };
    }
    let q = spec.q;
    let pd = dual(spec.p);
    let rm1 = spec.r as f64 - 1.0;
    let ln_w = &spec.ln_w;
    let ln_u = &spec.ln_u;
    let eval = |t: f64| -> (f64, f64) {
        let left = quad.integrate(
            |x| {
                let mut s = q * ln_w(x);
                if side == KernelSide::Left && rm1 > 0.0 {
                    s += q * rm1 * ln(t - x);
                }
                exp(s)
            },
            t0,
            t,
            opts,
        );
        let right = quad.integrate(
            |x| {
                let mut s = pd * ln_u(x);
                if side == KernelSide::Right && rm1 > 0.0 {
                    s += pd * rm1 * ln(x - t);
                }
                exp(s)
            },
            t,
            t1,
            opts,
        );
        if left.divergent || right.divergent {
            return (f64::INFINITY, f64::INFINITY);
        }
        if left.value <= 0.0 || right.value <= 0.0 {
            return (0.0, 0.0);
        }
        let val = powf(left.value, 1.0 / q) * powf(right.value, 1.0 / pd);
        let rel = left.error / (q * left.value) + right.error / (pd * right.value);
        (val, val * rel)
    };
    let best = maximize(|t| eval(t).0, t0, t1, SCAN_POINTS, 1e-10);
    let (value, quad_error) = if best.value.is_finite() {
        eval(best.x)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    HardyConstant {
        value,
        argmax: best.x,
        quad_error,
    }
}

/// `B0 = sup_t (∫_{t0}^t (t-x)^{q(r-1)} w^q)^{1/q} (∫_t^{t1} u^{p'})^{1/p'}` and
/// `B1 = sup_t (∫_{t0}^t w^q)^{1/q} (∫_t^{t1} (x-t)^{p'(r-1)} u^{p'})^{1/p'}`.
pub fn stepanov_b(spec: &KernelSpec, tol: f64) -> HardyResult {
    let opts = QuadOptions { tol, refine: 0 };
    stepanov_b_with(spec, &opts)
}

/// [`stepanov_b`] with explicit quadrature options.
pub fn stepanov_b_with(spec: &KernelSpec, opts: &QuadOptions) -> HardyResult {
    let quad = GradedIntegrator::new();
    HardyResult {
        c0: sup_constant(spec, KernelSide::Left, opts, &quad),
        c1: sup_constant(spec, KernelSide::Right, opts, &quad),
    }
}

/// Window `[τ-, τ+]` of the axis with the vanishing-ball radius `R = λ φ(τ+)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingWindow {
    pub tau_minus: f64,
    pub tau_plus: f64,
    pub lambda: f64,
    pub radius: f64,
}

impl EmbeddingWindow {
    /// Requires `0 <= τ- <= τ+ <= 1/2`, `λ ∈ (0, 1)` and, for a nonempty window, `τ- < τ+ - R`.
    pub fn new(tau_minus: f64, tau_plus: f64, lambda: f64, cusp: &CuspProfile) -> Result<Self> {
        if !(0.0 <= tau_minus && tau_minus <= tau_plus && tau_plus <= 0.5) {
            return Err(Error::InvalidParams(format!(
                "need 0 <= tau- <= tau+ <= 1/2, got [{tau_minus}, {tau_plus}]"
            )));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParams(format!("lambda must lie in (0, 1), got {lambda}")));
        }
        let radius = if tau_plus > 0.0 { lambda * cusp.phi(tau_plus) } else { 0.0 };
        if tau_minus < tau_plus && tau_minus >= tau_plus - radius {
            return Err(Error::InvalidParams(format!(
                "window too short: tau- = {tau_minus} must lie below tau+ - R = {}",
                tau_plus - radius
            )));
        }
        Ok(Self {
            tau_minus,
            tau_plus,
            lambda,
            radius,
        })
    }
}

/// Kernel with `w = φ^{(d-1)/q} v0` and `u = g0 φ^{-(d-1)/p}` on the window.
fn embedding_kernel(
    window: &EmbeddingWindow,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
    params: &ProblemParams,
) -> Result<KernelSpec> {
    let dm1 = params.d as f64 - 1.0;
    let (p, q) = (params.p, params.q);
    let (g, v) = (g.clone(), v.clone());
    let (c1, c2) = (cusp.clone(), cusp.clone());
    let ln_u: LnWeight = Arc::new(move |z| g.ln_value(z) - dm1 / p * c1.ln_phi(z));
    let ln_w: LnWeight = Arc::new(move |z| v.ln_value(z) + dm1 / q * c2.ln_phi(z));
    KernelSpec::new(params.r, ln_u, ln_w, window.tau_minus, window.tau_plus, p, q)
}

/// `A0` (kernel power on the `g` side) and `A1` (kernel power on the `v` side) of the window.
pub fn embedding_a(
    window: &EmbeddingWindow,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
    params: &ProblemParams,
    tol: f64,
) -> Result<HardyResult> {
    let opts = QuadOptions { tol, refine: 0 };
    embedding_a_with(window, g, v, cusp, params, &opts)
}

pub fn embedding_a_with(
    window: &EmbeddingWindow,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
    params: &ProblemParams,
    opts: &QuadOptions,
) -> Result<HardyResult> {
    let spec = embedding_kernel(window, g, v, cusp, params)?;
    let b = stepanov_b_with(&spec, opts);
    Ok(HardyResult { c0: b.c1, c1: b.c0 })
}

/// Octaves resolved by the geometric grid below the first regular cell.
const GRID_OCTAVES: f64 = 30.0;
const POWER_ITERS: usize = 2000;
const POWER_RTOL: f64 = 1e-12;
pub const DEFAULT_RESTARTS: usize = 20;

/// Cell boundaries, geometric toward `t0`, with the first cell `[t0, t0 + L 2^-30]`.
pub fn geometric_grid(t0: f64, t1: f64, cells: usize) -> Vec<f64> {
    let len = t1 - t0;
    let mut x = Vec::with_capacity(cells + 1);
    x.push(t0);
    for k in 0..cells {
        let frac = GRID_OCTAVES * (1.0 - k as f64 / (cells - 1) as f64);
        x.push(t0 + len * powf(2.0, -frac));
    }
    x
}

/// Dense discretization `A` with `‖A v‖_q / ‖v‖_p` approximating the operator ratio.
fn operator_matrix(spec: &KernelSpec, cells: usize) -> (usize, Vec<f64>) {
    let x = geometric_grid(spec.t0, spec.t1, cells);
    let n = cells;
    let r = spec.r as f64;
    let mid: Vec<f64> = (0..n).map(|i| 0.5 * (x[i] + x[i + 1])).collect();
    let h: Vec<f64> = (0..n).map(|i| x[i + 1] - x[i]).collect();
    let u: Vec<f64> = mid.iter().map(|&m| exp((spec.ln_u)(m))).collect();
    let w: Vec<f64> = mid.iter().map(|&m| exp((spec.ln_w)(m))).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let row_scale = w[i] * powf(h[i], 1.0 / spec.q);
        if row_scale == 0.0 {
            continue;
        }
        for j in i..n {
            // exact ∫ (s - t_i)^{r-1} ds over the part of cell j to the right of t_i
            let lo = if j == i { 0.0 } else { x[j] - mid[i] };
            let hi = x[j + 1] - mid[i];
            let kern = (powf(hi, r) - powf(lo, r)) / r;
            a[i * n + j] = row_scale * kern * u[j] / h[j] * powf(h[j], 1.0 - 1.0 / spec.p);
        }
    }
    (n, a)
}

fn matvec(a: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        y[i] = row[i..].iter().zip(&x[i..]).map(|(r, v)| r * v).sum();
    }
}

fn matvec_t(a: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        let xi = x[i];
        if xi == 0.0 {
            continue;
        }
        let row = &a[i * n..(i + 1) * n];
        for j in i..n {
            y[j] += row[j] * xi;
        }
    }
}

fn norm_s(x: &[f64], s: f64) -> f64 {
    powf(x.iter().map(|v| powf(v.abs(), s)).sum::<f64>(), 1.0 / s)
}

/// Nonlinear power ascent for `‖A‖_{p→q}` from a nonnegative start.
fn boyd_ascent(a: &[f64], n: usize, p: f64, q: f64, start: &mut [f64]) -> f64 {
    let pd = dual(p);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let nx = norm_s(start, p);
    start.iter_mut().for_each(|v| *v /= nx);
    let mut best = 0.0f64;
    let mut last = 0.0f64;
    for _ in 0..POWER_ITERS {
        matvec(a, n, start, &mut y);
        let ratio = norm_s(&y, q);
        best = best.max(ratio);
        if ratio == 0.0 {
            return 0.0;
        }
        if (ratio - last).abs() <= POWER_RTOL * ratio {
            break;
        }
        last = ratio;
        y.iter_mut().for_each(|v| *v = powf(*v / ratio, q - 1.0));
        matvec_t(a, n, &y, &mut z);
        z.iter_mut().for_each(|v| *v = powf(v.max(0.0), pd - 1.0));
        let nz = norm_s(&z, p);
        if nz == 0.0 {
            break;
        }
        for (s, v) in start.iter_mut().zip(&z) {
            *s = v / nz;
        }
    }
    best
}

/// Largest singular value by power iteration on `AᵀA`.
fn spectral_norm(a: &[f64], n: usize) -> f64 {
    let mut x = vec![1.0 / libm::sqrt(n as f64); n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut last = 0.0;
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERS {
        matvec(a, n, &x, &mut y);
        matvec_t(a, n, &y, &mut z);
        let nz = norm_s(&z, 2.0);
        if nz == 0.0 {
            return 0.0;
        }
        sigma = libm::sqrt(nz);
        for (s, v) in x.iter_mut().zip(&z) {
            *s = v / nz;
        }
        if (sigma - last).abs() <= POWER_RTOL * sigma {
            break;
        }
        last = sigma;
    }
    sigma
}

/// Lower estimate of `‖Ĩ‖_{L_p→L_q}` on a geometric grid with `grid_size` cells.
///
/// `p = q = 2` uses power iteration; otherwise nonlinear power ascent from
/// the constant start plus `DEFAULT_RESTARTS - 1` seeded random starts.
pub fn discretized_operator_norm(spec: &KernelSpec, grid_size: usize, seed: u64) -> f64 {
    let grid_size = grid_size.max(16);
    if !(spec.t1 > spec.t0) {
        return 0.0;
    }
    let (n, a) = operator_matrix(spec, grid_size);
    if spec.p == 2.0 && spec.q == 2.0 {
        return spectral_norm(&a, n);
    }
    let mut best = 0.0f64;
    for restart in 0..DEFAULT_RESTARTS {
        let mut start = if restart == 0 {
            vec![1.0; n]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            (0..n).map(|_| rng.random_range(0.01..1.0)).collect()
        };
        best = best.max(boyd_ascent(&a, n, spec.p, spec.q, &mut start));
    }
    best
}

/// One row of the flatness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessRow {
    pub tau: f64,
    pub a: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub rows: Vec<FlatnessRow>,
    pub max_over_min: f64,
}

/// `A_{[0,τ]} |log τ|^α / ρ(|log τ|)` over the grid; bounded ratios mean the
/// window constant decays at the predicted log rate.
pub fn asymptotic_a_check(
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
    params: &ProblemParams,
    tau_grid: &[f64],
    tol: f64,
) -> Result<FlatnessReport> {
    let dq = derive_quantities(params, g, v, cusp);
    let mut rows = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        if !(tau > 0.0 && tau <= 0.25) {
            return Err(Error::InvalidParams(format!("tau grid must lie in (0, 1/4], got {tau}")));
        }
        let window = EmbeddingWindow::new(0.0, tau, 0.5, cusp)?;
        let res = embedding_a(&window, g, v, cusp, params, tol)?;
        let big_l = -ln(tau);
        let a = res.max();
        let ratio = a * exp(dq.alpha * ln(big_l) - dq.rho.ln_value(big_l));
        rows.push(FlatnessRow { tau, a, ratio });
    }
    Ok(FlatnessReport {
        max_over_min: flatness(rows.iter().map(|r| r.ratio)),
        rows,
    })
}

/// `max / min` of a positive sequence; `1` for a single value.
pub fn flatness<I: IntoIterator<Item = f64>>(vals: I) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        1.0
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{SlowlyVarying, WidthKind};

    #[test]
    fn closed_form_first_order() {
        let spec = KernelSpec::unit(1, 0.0, 1.0, 2.0, 2.0).unwrap();
        let b = stepanov_b(&spec, 1e-10);
        assert!((b.c0.value - 0.5).abs() < 1e-9, "{b:?}");
        assert!((b.c1.value - 0.5).abs() < 1e-9);
        assert!((b.c0.argmax - 0.5).abs() < 1e-5);
    }

    #[test]
    fn closed_form_second_order() {
        let spec = KernelSpec::unit(2, 0.0, 1.0, 2.0, 2.0).unwrap();
        let b = stepanov_b(&spec, 1e-10);
        assert!((b.c0.value - 0.1875).abs() < 1e-9, "{b:?}");
        assert!((b.c0.argmax - 0.75).abs() < 1e-5);
        // B1 mirrors B0 under t ↦ 1 - t for unit weights
        assert!((b.c1.value - 0.1875).abs() < 1e-9);
    }

    #[test]
    fn dilation_covariance() {
        for t in [0.25, 3.0] {
            let spec = KernelSpec::unit(1, 0.0, t, 2.0, 2.0).unwrap();
            let b = stepanov_b(&spec, 1e-10);
            assert!((b.c0.value - t / 2.0).abs() < 1e-9 * t);
        }
    }

    #[test]
    fn embedding_closed_form() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let params = ProblemParams::new(2.0, 2.0, 1, 2, WidthKind::Kolmogorov).unwrap();
        let w = EmbeddingWindow::new(0.0, 0.5, 0.5, &cusp).unwrap();
        let a = embedding_a(&w, &WeightSpec::unit(), &WeightSpec::unit(), &cusp, &params, 1e-10).unwrap();
        assert!((a.c0.value - 1.0 / 9.0).abs() < 1e-8, "{a:?}");
        assert!((a.c0.argmax - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn empty_window_is_zero() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let params = ProblemParams::new(2.0, 2.0, 1, 2, WidthKind::Kolmogorov).unwrap();
        let w = EmbeddingWindow::new(0.25, 0.25, 0.5, &cusp).unwrap();
        let a = embedding_a(&w, &WeightSpec::unit(), &WeightSpec::unit(), &cusp, &params, 1e-10).unwrap();
        assert_eq!(a.max(), 0.0);
    }

    #[test]
    fn nonintegrable_v_gives_infinite_constant() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let params = ProblemParams::new(2.0, 4.0, 2, 2, WidthKind::Kolmogorov).unwrap();
        let g = WeightSpec::new(0.75, 1.0, SlowlyVarying::one()).unwrap();
        let v = WeightSpec::new(1.0, 0.0, SlowlyVarying::one()).unwrap();
        let w = EmbeddingWindow::new(0.0, 0.25, 0.5, &cusp).unwrap();
        let a = embedding_a(&w, &g, &v, &cusp, &params, 1e-8).unwrap();
        assert!(a.is_infinite());
    }

    #[test]
    fn window_validation() {
        let cusp = CuspProfile::power(2.0).unwrap();
        assert!(EmbeddingWindow::new(0.3, 0.2, 0.5, &cusp).is_err());
        assert!(EmbeddingWindow::new(0.0, 0.6, 0.5, &cusp).is_err());
        assert!(EmbeddingWindow::new(0.0, 0.5, 1.0, &cusp).is_err());
        // R = 0.5 * 0.25 = 0.125 at tau+ = 1/2
        assert!(EmbeddingWindow::new(0.4, 0.5, 0.5, &cusp).is_err());
    }

    #[test]
    fn homogeneity_in_both_weights() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let params = ProblemParams::new(2.0, 4.0, 2, 2, WidthKind::Kolmogorov).unwrap();
        let g = WeightSpec::new(0.75, 1.0, SlowlyVarying::one()).unwrap();
        let v = WeightSpec::new(0.5, 0.0, SlowlyVarying::one()).unwrap();
        let w = EmbeddingWindow::new(0.0, 0.125, 0.5, &cusp).unwrap();
        let base = embedding_a(&w, &g, &v, &cusp, &params, 1e-10).unwrap();
        let sg = embedding_a(&w, &g.scaled(3.0).unwrap(), &v, &cusp, &params, 1e-10).unwrap();
        let sv = embedding_a(&w, &g, &v.scaled(0.2).unwrap(), &cusp, &params, 1e-10).unwrap();
        assert!((sg.c0.value / base.c0.value - 3.0).abs() < 1e-9);
        assert!((sv.c1.value / base.c1.value - 0.2).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_window() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let params = ProblemParams::new(2.0, 2.0, 1, 2, WidthKind::Kolmogorov).unwrap();
        let g = WeightSpec::new(1.0, 2.0, SlowlyVarying::one()).unwrap();
        let v = WeightSpec::unit();
        let mut last = 0.0;
        for tp in [0.05, 0.1, 0.2, 0.4] {
            let w = EmbeddingWindow::new(0.0, tp, 0.5, &cusp).unwrap();
            let a = embedding_a(&w, &g, &v, &cusp, &params, 1e-10).unwrap().max();
            assert!(a >= last);
            last = a;
        }
        let mut last = f64::INFINITY;
        for tm in [0.0, 0.01, 0.05, 0.1] {
            let w = EmbeddingWindow::new(tm, 0.4, 0.5, &cusp).unwrap();
            let a = embedding_a(&w, &g, &v, &cusp, &params, 1e-10).unwrap().max();
            assert!(a <= last * (1.0 + 1e-12));
            last = a;
        }
    }

    #[test]
    fn refinement_within_quad_error() {
        let spec = KernelSpec::new(
            2,
            Arc::new(|x: f64| -0.3 * x.ln()),
            Arc::new(|x: f64| 0.2 * x.ln()),
            0.0,
            0.5,
            1.5,
            3.0,
        )
        .unwrap();
        let a = stepanov_b_with(&spec, &QuadOptions { tol: 1e-10, refine: 0 });
        let b = stepanov_b_with(&spec, &QuadOptions { tol: 1e-10, refine: 1 });
        for (x, y) in [(a.c0, b.c0), (a.c1, b.c1)] {
            assert!((x.value - y.value).abs() <= x.quad_error.max(1e-11 * x.value), "{x:?} {y:?}");
        }
    }

    #[test]
    fn operator_norm_examples() {
        let zero = KernelSpec::new(1, Arc::new(|_| f64::NEG_INFINITY), Arc::new(|_| 0.0), 0.0, 1.0, 2.0, 2.0).unwrap();
        assert_eq!(discretized_operator_norm(&zero, 64, 0), 0.0);
        let unit = KernelSpec::unit(1, 0.0, 1.0, 2.0, 2.0).unwrap();
        let est = discretized_operator_norm(&unit, 512, 0);
        assert!((0.5..=1.0).contains(&est), "{est}");
        assert!((est - 2.0 / core::f64::consts::PI).abs() < 0.02, "{est}");
        // u lives on [0, 0.4], w on [0.6, 1]: s >= t never pairs them
        let split = KernelSpec::new(
            1,
            Arc::new(|x: f64| if x < 0.4 { 0.0 } else { f64::NEG_INFINITY }),
            Arc::new(|x: f64| if x > 0.6 { 0.0 } else { f64::NEG_INFINITY }),
            0.0,
            1.0,
            2.0,
            2.0,
        )
        .unwrap();
        assert_eq!(discretized_operator_norm(&split, 128, 0), 0.0);
    }

    #[test]
    fn operator_norm_general_exponents_reproducible() {
        let spec = KernelSpec::unit(1, 0.0, 1.0, 1.5, 3.0).unwrap();
        let a = discretized_operator_norm(&spec, 128, 7);
        let b = discretized_operator_norm(&spec, 128, 7);
        assert_eq!(a.to_bits(), b.to_bits());
        let bb = stepanov_b(&spec, 1e-10);
        assert!(a >= 0.2 * bb.max() && a <= 4.0 * bb.sum(), "{a} {bb:?}");
    }

    #[test]
    fn flatness_single_point() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let params = ProblemParams::new(2.0, 2.0, 1, 2, WidthKind::Kolmogorov).unwrap();
        let g = WeightSpec::new(1.0, 2.0, SlowlyVarying::one()).unwrap();
        let rep = asymptotic_a_check(&g, &WeightSpec::unit(), &cusp, &params, &[0.01], 1e-8).unwrap();
        assert_eq!(rep.max_over_min, 1.0);
    }
}
