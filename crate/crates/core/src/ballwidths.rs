//! Numerical Kolmogorov and Gelfand widths of `B_p^ν` in `l_q^ν` for small `ν`.
//!
//! The outer problem (best subspace) is nonconvex and is searched by compass
//! moves from seeded random starts. The inner supremum is a sampled lower
//! approximation refined by ascent, so an estimate is reported together with
//! the sampled supremum it came from.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::powf;
use crate::{Error, Result};

pub const MAX_NU: usize = 6;
pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_ASCENT_STEPS: usize = 50;
/// Number of best samples refined by ascent.
const ASCENT_STARTS: usize = 4;
const MAX_EVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallWidthKind {
    Kolmogorov,
    Gelfand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallWidthProblem {
    pub nu: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub kind: BallWidthKind,
}

impl BallWidthProblem {
    pub fn new(nu: usize, n: usize, p: f64, q: f64, kind: BallWidthKind) -> Result<Self> {
        if !(1..=MAX_NU).contains(&nu) {
            return Err(Error::InvalidParams(alloc::format!("need 1 <= ν <= {MAX_NU}, got {nu}")));
        }
        if n > nu {
            return Err(Error::InvalidParams(alloc::format!("need n <= ν, got n = {n}, ν = {nu}")));
        }
        if !(p >= 1.0 && q >= 1.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParams(alloc::format!("need finite p, q >= 1, got p = {p}, q = {q}")));
        }
        Ok(Self { nu, n, p, q, kind })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthOptions {
    pub restarts: usize,
    pub samples: usize,
    pub ascent_steps: usize,
    /// Compass step at which the outer search stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for WidthOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            samples: DEFAULT_SAMPLES,
            ascent_steps: DEFAULT_ASCENT_STEPS,
            tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallWidthEstimate {
    /// Supremum at the best subspace after a second, independent sampling pass.
    pub upper: f64,
    /// Sampled supremum at the best subspace as seen by the search.
    pub inner_sup: f64,
    /// Orthonormal basis, column-major `ν × k`: the subspace for Kolmogorov, the kernel for Gelfand.
    pub basis: Vec<f64>,
    pub best_restart: usize,
}

/// Result of one seeded restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub restart: usize,
    pub value: f64,
    pub basis: Vec<f64>,
}

pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p == 2.0 {
        return crate::math::sqrt(x.iter().map(|v| v * v).sum());
    }
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * powf(x.iter().map(|v| powf(v.abs() / m, p)).sum::<f64>(), 1.0 / p)
}

/// `∇ ‖r‖_q` up to a positive factor: `sign(r) |r|^{q-1}`.
fn norm_gradient(r: &[f64], q: f64) -> Vec<f64> {
    r.iter()
        .map(|&v| if v == 0.0 { 0.0 } else { v.signum() * powf(v.abs(), q - 1.0) })
        .collect()
}

/// Maximiser of `<g, y>` over the unit `l_p` ball.
fn dual_direction(g: &[f64], p: f64) -> Option<Vec<f64>> {
    let m = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return None;
    }
    let y: Vec<f64> = if p == 1.0 {
        let k = g.iter().position(|v| v.abs() == m).unwrap();
        let mut y = vec![0.0; g.len()];
        y[k] = g[k].signum();
        y
    } else {
        let pd = p / (p - 1.0);
        g.iter().map(|&v| v.signum() * powf(v.abs() / m, pd - 1.0)).collect()
    };
    let s = lp_norm(&y, p);
    Some(y.into_iter().map(|v| v / s).collect())
}

/// Modified Gram–Schmidt on the columns of `m`; `None` when rank deficient.
fn orthonormalize(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut u = m.clone();
    for j in 0..u.ncols() {
        for _ in 0..2 {
            for k in 0..j {
                let proj = u.column(k).dot(&u.column(j));
                let ck = u.column(k).clone_owned();
                u.column_mut(j).axpy(-proj, &ck, 1.0);
            }
        }
        let nrm = u.column(j).norm();
        if nrm < 1e-10 {
            return None;
        }
        u.column_mut(j).unscale_mut(nrm);
    }
    Some(u)
}

/// Orthonormal basis of the complement of the column span of `m` (`ν × n`).
fn complement(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let nu = m.nrows();
    let u = if m.ncols() == 0 { DMatrix::zeros(nu, 0) } else { orthonormalize(m)? };
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..nu {
        let mut v = DVector::zeros(nu);
        v[i] = 1.0;
        for _ in 0..2 {
            for k in 0..u.ncols() {
                let pr = u.column(k).dot(&v);
                v.axpy(-pr, &u.column(k).clone_owned(), 1.0);
            }
            for c in &cols {
                let pr = c.dot(&v);
                v.axpy(-pr, c, 1.0);
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            cols.push(v / nrm);
        }
        if cols.len() == nu - u.ncols() {
            break;
        }
    }
    Some(DMatrix::from_columns(&cols))
}

fn all_subsets(nu: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(start: usize, nu: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..nu {
            cur.push(i);
            rec(i + 1, nu, n, cur, out);
            cur.pop();
        }
    }
    rec(0, nu, n, &mut cur, &mut out);
    out
}

/// `l_q` distance from points to the column span of an orthonormal `u`.
struct Distance {
    u: DMatrix<f64>,
    q: f64,
    subsets: Vec<(Vec<usize>, DMatrix<f64>)>,
}

impl Distance {
    fn new(u: DMatrix<f64>, q: f64) -> Self {
        let n = u.ncols();
        let subsets = if q == 1.0 && n > 0 {
            all_subsets(u.nrows(), n)
                .into_iter()
                .filter_map(|s| {
                    let sub = DMatrix::from_fn(n, n, |i, j| u[(s[i], j)]);
                    sub.try_inverse().map(|inv| (s, inv))
                })
                .collect()
        } else {
            Vec::new()
        };
        Self { u, q, subsets }
    }

    fn residual(&self, x: &[f64], c: &DVector<f64>) -> Vec<f64> {
        let uc = &self.u * c;
        x.iter().zip(uc.iter()).map(|(a, b)| a - b).collect()
    }

    /// Returns `(distance, residual)`.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = self.u.ncols();
        if n == 0 {
            return (lp_norm(x, self.q), x.to_vec());
        }
        let xv = DVector::from_column_slice(x);
        let ls = self.u.transpose() * &xv;
        if self.q == 2.0 {
            let r = self.residual(x, &ls);
            return (lp_norm(&r, 2.0), r);
        }
        if self.q == 1.0 {
            // an l1 minimiser interpolates x on n coordinates
            let mut best = (f64::INFINITY, Vec::new());
            for (s, inv) in &self.subsets {
                let xs = DVector::from_fn(n, |i, _| x[s[i]]);
                let c = inv * xs;
                let r = self.residual(x, &c);
                let d = lp_norm(&r, 1.0);
                if d < best.0 {
                    best = (d, r);
                }
            }
            return best;
        }
        self.newton(x, ls)
    }

    /// Damped Newton on `Σ |x - Uc|^q`.
    fn newton(&self, x: &[f64], mut c: DVector<f64>) -> (f64, Vec<f64>) {
        let q = self.q;
        let f = |c: &DVector<f64>| {
            let r = self.residual(x, c);
            let s = lp_norm(&r, q);
            (s, r)
        };
        let (mut val, mut r) = f(&c);
        for _ in 0..100 {
            if val == 0.0 {
                break;
            }
            let floor = 1e-12 * val;
            let g = DVector::from_iterator(r.len(), norm_gradient(&r, q));
            let w = DVector::from_iterator(r.len(), r.iter().map(|v| powf(v.abs().max(floor) / val, q - 2.0)));
            let grad = -(self.u.transpose() * &g);
            let mut h = self.u.transpose() * DMatrix::from_diagonal(&w) * &self.u;
            h *= (q - 1.0) * powf(val, q - 2.0);
            let step = match h.clone().cholesky() {
                Some(ch) => ch.solve(&grad),
                None => -grad.clone(),
            };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let trial = &c - &step * t;
                let (v2, r2) = f(&trial);
                if v2 < val {
                    let gain = val - v2;
                    c = trial;
                    val = v2;
                    r = r2;
                    improved = gain > 1e-15 * val;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (val, r)
    }
}

fn random_point(rng: &mut ChaCha8Rng, nu: usize, p: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..nu).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let s = lp_norm(&x, p);
        if s > 1e-3 {
            return x.into_iter().map(|v| v / s).collect();
        }
    }
}

fn sample_set(rng: &mut ChaCha8Rng, nu: usize, p: f64, count: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = (0..nu)
        .map(|i| {
            let mut e = vec![0.0; nu];
            e[i] = 1.0;
            e
        })
        .collect();
    let diag = lp_norm(&vec![1.0; nu], p);
    pts.push(vec![1.0 / diag; nu]);
    while pts.len() < count.max(pts.len()) {
        pts.push(random_point(rng, nu, p));
    }
    pts
}

/// Sampled supremum of a convex function over the unit `l_p` sphere, refined by
/// conditional-gradient ascent from the best samples.
fn convex_sup<F>(h: F, samples: &[Vec<f64>], p: f64, steps: usize) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut scored: Vec<(f64, usize)> = samples.iter().enumerate().map(|(i, x)| (h(x).0, i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for &(_, i) in scored.iter().take(ASCENT_STARTS) {
        let mut x = samples[i].clone();
        let (mut val, mut g) = h(&x);
        for _ in 0..steps {
            let Some(y) = dual_direction(&g, p) else { break };
            let (v2, g2) = h(&y);
            if v2 <= val {
                break;
            }
            x = y;
            val = v2;
            g = g2;
        }
        if val > best.0 {
            best = (val, x);
        }
    }
    best
}

/// `sup_{‖x‖_p <= 1} dist_q(x, span U)` for an orthonormal `u`.
fn kolmogorov_sup(u: &DMatrix<f64>, p: f64, q: f64, samples: &[Vec<f64>], steps: usize) -> f64 {
    let dist = Distance::new(u.clone(), q);
    convex_sup(
        |x| {
            let (d, r) = dist.eval(x);
            (d, norm_gradient(&r, q))
        },
        samples,
        p,
        steps,
    )
    .0
}

/// `sup ‖Kc‖_q / ‖Kc‖_p` over `c` by backtracking gradient ascent from sampled starts.
fn gelfand_sup(k: &DMatrix<f64>, p: f64, q: f64, samples: &[Vec<f64>], steps: usize) -> f64 {
    let dim = k.ncols();
    if dim == 0 {
        return 0.0;
    }
    let ratio = |c: &DVector<f64>| {
        let x = k * c;
        let xs = x.as_slice();
        let np = lp_norm(xs, p);
        if np == 0.0 {
            0.0
        } else {
            lp_norm(xs, q) / np
        }
    };
    // sample directions inside the kernel through the projections of the ambient samples
    let mut starts: Vec<(f64, DVector<f64>)> = samples
        .iter()
        .filter_map(|s| {
            let c = k.transpose() * DVector::from_column_slice(s);
            let n = c.norm();
            (n > 1e-9).then(|| {
                let c = c / n;
                (ratio(&c), c)
            })
        })
        .collect();
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    for (val0, c0) in starts.into_iter().take(ASCENT_STARTS) {
        let (mut c, mut val) = (c0, val0);
        let mut t = 0.1;
        for _ in 0..steps {
            let x = k * &c;
            let xs = x.as_slice();
            let (nq, np) = (lp_norm(xs, q), lp_norm(xs, p));
            let gq = DVector::from_vec(norm_gradient(xs, q)) / powf(nq, q - 1.0);
            let gp = DVector::from_vec(norm_gradient(xs, p)) / powf(np, p - 1.0);
            let grad = k.transpose() * (gq / np - gp * (nq / (np * np)));
            let gn = grad.norm();
            if gn < 1e-14 {
                break;
            }
            let mut moved = false;
            for _ in 0..30 {
                let trial = &c + &grad * (t / gn);
                let trial = &trial / trial.norm();
                let v2 = ratio(&trial);
                if v2 > val {
                    c = trial;
                    val = v2;
                    moved = true;
                    t *= 2.0;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        best = best.max(val);
    }
    best
}

/// Supremum value for a parameter matrix: the subspace for Kolmogorov, the constraint rows for Gelfand.
struct Objective<'a> {
    prob: &'a BallWidthProblem,
    samples: Vec<Vec<f64>>,
    steps: usize,
}

impl Objective<'_> {
    fn basis(&self, m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        match self.prob.kind {
            BallWidthKind::Kolmogorov => orthonormalize(m),
            BallWidthKind::Gelfand => complement(m),
        }
    }

    fn value_of_basis(&self, b: &DMatrix<f64>) -> f64 {
        let (p, q) = (self.prob.p, self.prob.q);
        match self.prob.kind {
            BallWidthKind::Kolmogorov => kolmogorov_sup(b, p, q, &self.samples, self.steps),
            BallWidthKind::Gelfand => gelfand_sup(b, p, q, &self.samples, self.steps),
        }
    }

    fn value(&self, m: &DMatrix<f64>) -> f64 {
        self.basis(m).map_or(f64::INFINITY, |b| self.value_of_basis(&b))
    }
}

fn params_shape(prob: &BallWidthProblem) -> (usize, usize) {
    // columns span the subspace, or are the rows of the constraint matrix
    (prob.nu, prob.n)
}

/// One seeded restart: compass search over the parameter matrix.
pub fn width_restart(prob: &BallWidthProblem, opts: &WidthOptions, restart: usize) -> RestartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let (rows, cols) = params_shape(prob);
    let samples = sample_set(&mut rng, prob.nu, prob.p, opts.samples);
    let obj = Objective {
        prob,
        samples,
        steps: opts.ascent_steps,
    };
    let mut m = DMatrix::from_fn(rows, cols, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let mut val = obj.value(&m);
    let mut step = 0.5;
    let mut evals = 1usize;
    while step >= opts.tol && evals < MAX_EVALS {
        let mut improved = false;
        for idx in 0..rows * cols {
            for sgn in [1.0, -1.0] {
                let mut trial = m.clone();
                trial[idx] += sgn * step;
                let v = obj.value(&trial);
                evals += 1;
                if v < val - 1e-13 {
                    m = trial;
                    val = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let basis = obj.basis(&m).map(|b| b.as_slice().to_vec()).unwrap_or_default();
    RestartResult {
        restart,
        value: val,
        basis,
    }
}

/// Trivial cases that need no search.
fn closed_form(prob: &BallWidthProblem) -> Option<BallWidthEstimate> {
    match prob.kind {
        BallWidthKind::Kolmogorov if prob.n >= prob.nu => Some(BallWidthEstimate {
            upper: 0.0,
            inner_sup: 0.0,
            basis: DMatrix::<f64>::identity(prob.nu, prob.nu).as_slice().to_vec(),
            best_restart: 0,
        }),
        BallWidthKind::Gelfand if prob.n >= prob.nu => Some(BallWidthEstimate {
            upper: 0.0,
            inner_sup: 0.0,
            basis: Vec::new(),
            best_restart: 0,
        }),
        _ => None,
    }
}

/// Picks the best restart (smallest value, ties to the lowest index) and re-samples its supremum.
pub fn combine_restarts(prob: &BallWidthProblem, opts: &WidthOptions, results: &[RestartResult]) -> Result<BallWidthEstimate> {
    if let Some(e) = closed_form(prob) {
        return Ok(e);
    }
    let best = results
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.restart.cmp(&b.restart)))
        .ok_or_else(|| Error::InvalidParams(String::from("no restarts to combine")))?;
    let cols = if prob.kind == BallWidthKind::Kolmogorov { prob.n } else { prob.nu - prob.n };
    let b = DMatrix::from_column_slice(prob.nu, cols, &best.basis);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let obj = Objective {
        prob,
        samples: sample_set(&mut rng, prob.nu, prob.p, 4 * opts.samples),
        steps: 4 * opts.ascent_steps,
    };
    let resampled = obj.value_of_basis(&b);
    Ok(BallWidthEstimate {
        upper: resampled.max(best.value),
        inner_sup: best.value,
        basis: best.basis.clone(),
        best_restart: best.restart,
    })
}

fn estimate(prob: &BallWidthProblem, opts: &WidthOptions) -> Result<BallWidthEstimate> {
    if let Some(e) = closed_form(prob) {
        return Ok(e);
    }
    let results: Vec<RestartResult> = (0..opts.restarts.max(1)).map(|k| width_restart(prob, opts, k)).collect();
    combine_restarts(prob, opts, &results)
}

/// `d_n(B_p^ν, l_q^ν)` estimate.
pub fn kolmogorov_width_est(prob: &BallWidthProblem, opts: &WidthOptions) -> Result<BallWidthEstimate> {
    if prob.kind != BallWidthKind::Kolmogorov {
        return Err(Error::InvalidParams(String::from("problem is not a Kolmogorov width")));
    }
    estimate(prob, opts)
}

/// `d^n(B_p^ν, l_q^ν)` estimate.
pub fn gelfand_width_est(prob: &BallWidthProblem, opts: &WidthOptions) -> Result<BallWidthEstimate> {
    if prob.kind != BallWidthKind::Gelfand {
        return Err(Error::InvalidParams(String::from("problem is not a Gelfand width")));
    }
    estimate(prob, opts)
}

/// Sampled `sup_{‖x‖_p <= 1} dist_q(x, span U)` for a given column-major `ν × n` matrix.
pub fn subspace_deviation(nu: usize, columns: &[f64], p: f64, q: f64, samples: usize, seed: u64) -> Result<f64> {
    let n = columns.len() / nu.max(1);
    let m = DMatrix::from_column_slice(nu, n, columns);
    let u = if n == 0 { m } else { orthonormalize(&m).ok_or(Error::DegenerateRegression)? };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_set(&mut rng, nu, p, samples);
    Ok(kolmogorov_sup(&u, p, q, &pts, DEFAULT_ASCENT_STEPS))
}
