//! Gauss–Legendre rules and a graded composite integrator for integrands
//! with power-log behaviour at the interval ends.

use alloc::vec::Vec;

use crate::math::{cos, powi};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like starting points.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, w * h))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of a graded integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Relative target for the extrapolated end tails.
    pub tol: f64,
    /// Each graded cell is split into `2^refine` panels.
    pub refine: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            refine: 0,
        }
    }
}

/// Consecutive scale ratios at or above this mark a divergent end.
pub const DIVERGENCE_RATIO: f64 = 0.999;
/// Number of such consecutive scales.
pub const DIVERGENCE_RUN: usize = 10;
const MAX_LEVELS: usize = 1000;
const MIN_LEVELS: usize = 4;

/// GL16 with a GL8 error estimate, geometrically graded toward both ends.
#[derive(Debug, Clone)]
pub struct GradedIntegrator {
    hi: GaussLegendre,
    lo: GaussLegendre,
}

impl Default for GradedIntegrator {
    fn default() -> Self {
        Self::new()
    }
}

impl GradedIntegrator {
    pub fn new() -> Self {
        Self {
            hi: GaussLegendre::new(16),
            lo: GaussLegendre::new(8),
        }
    }

    fn cell<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, refine: u32) -> (f64, f64) {
        let panels = 1usize << refine;
        let h = (b - a) / panels as f64;
        let mut val = 0.0;
        let mut err = 0.0;
        for k in 0..panels {
            let (x0, x1) = (a + h * k as f64, a + h * (k + 1) as f64);
            let v16 = self.hi.integrate(f, x0, x1);
            let v8 = self.lo.integrate(f, x0, x1);
            val += v16;
            err += (v16 - v8).abs();
        }
        (val, err)
    }

    /// Integrates over `[end, end + dir * h]` on cells shrinking toward `end`.
    fn half<F: Fn(f64) -> f64>(&self, f: &F, end: f64, h: f64, dir: f64, opts: &QuadOptions) -> Integral {
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut prev = f64::NAN;
        let mut ratio = f64::NAN;
        let mut prev_ratio = f64::NAN;
        let mut run = 0usize;
        let mut zeros = 0usize;
        // a finite end value rules out divergence; growth there is a nearby singularity
        let f_end = f(end);
        let singular_end = !f_end.is_finite();
        for k in 0..MAX_LEVELS {
            let outer = h * powi(0.5, k as i32);
            let inner = 0.5 * outer;
            let (x0, x1) = (end + dir * inner, end + dir * outer);
            // nodes lose relative resolution near a nonzero end; extrapolate from here
            let collapsed = inner <= end.abs() * 1e-12;
            let (a, b) = if dir > 0.0 { (x0, x1) } else { (x1, x0) };
            let (c, e) = self.cell(f, a, b, opts.refine);
            if !c.is_finite() {
                return Integral {
                    value: f64::INFINITY,
                    error: f64::INFINITY,
                    divergent: true,
                };
            }
            let c = c.abs();
            sum += c;
            err += e;
            if k > 0 {
                prev_ratio = ratio;
                ratio = if prev > 0.0 { c / prev } else if c > 0.0 { f64::INFINITY } else { 0.0 };
                if singular_end && ratio >= DIVERGENCE_RATIO {
                    run += 1;
                    if run >= DIVERGENCE_RUN {
                        return Integral {
                            value: f64::INFINITY,
                            error: f64::INFINITY,
                            divergent: true,
                        };
                    }
                } else {
                    run = 0;
                }
            }
            zeros = if c == 0.0 { zeros + 1 } else { 0 };
            prev = c;
            if k + 1 < MIN_LEVELS {
                continue;
            }
            if zeros >= MIN_LEVELS {
                break;
            }
            if ratio < 1.0 {
                let tail = c * ratio / (1.0 - ratio);
                let drift = if prev_ratio.is_finite() {
                    c * (ratio - prev_ratio).abs() / ((1.0 - ratio) * (1.0 - ratio))
                } else {
                    tail
                };
                if tail <= 0.5 * opts.tol * sum || collapsed {
                    return Integral {
                        value: sum + tail,
                        error: err + drift.min(tail),
                        divergent: false,
                    };
                }
            } else if collapsed {
                break;
            }
            if k + 1 == MAX_LEVELS {
                let divergent = singular_end && ratio > 0.99;
                return Integral {
                    value: if divergent { f64::INFINITY } else { sum },
                    error: if divergent { f64::INFINITY } else { err + sum * opts.tol },
                    divergent,
                };
            }
        }
        Integral {
            value: sum,
            error: err,
            divergent: false,
        }
    }

    /// `∫_a^b f`, graded toward both `a` and `b`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
        if !(b > a) {
            return Integral {
                value: 0.0,
                error: 0.0,
                divergent: false,
            };
        }
        let h = 0.5 * (b - a);
        let left = self.half(&f, a, h, 1.0, opts);
        let right = self.half(&f, b, h, -1.0, opts);
        Integral {
            value: left.value + right.value,
            error: left.error + right.error,
            divergent: left.divergent || right.divergent,
        }
    }
}
