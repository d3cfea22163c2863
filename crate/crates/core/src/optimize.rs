//! One-dimensional maximisation: coarse scan plus golden-section refinement.

use alloc::vec::Vec;

use crate::math::{powf, sqrt};

/// Default number of coarse scan points.
pub const SCAN_POINTS: usize = 200;
/// Smallest relative offset of scan points from the ends.
const SCAN_EDGE: f64 = 1e-9;

/// Golden-section search for a maximum on `[a, b]`; stops once the bracket is below `tol`.
///
/// Equal values keep the left point, so ties resolve toward smaller `x`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (sqrt(5.0) - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Scan points in `(a, b)`, geometrically clustered toward both ends.
pub fn scan_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let half = (n / 2).max(1);
    let mut s: Vec<f64> = (0..half)
        .map(|i| 0.5 * powf(SCAN_EDGE / 0.5, 1.0 - i as f64 / half as f64))
        .collect();
    let mirror: Vec<f64> = s.iter().rev().map(|x| 1.0 - x).collect();
    s.push(0.5);
    s.extend(mirror);
    s.into_iter().map(|x| a + (b - a) * x).collect()
}

/// Result of [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Coarse scan then golden-section on the bracket around the best scan point.
///
/// A non-finite scan value is returned at once.
pub fn maximize<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n_scan: usize, tol: f64) -> Maximum {
    let pts = scan_points(a, b, n_scan);
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &x) in pts.iter().enumerate() {
        let v = f(x);
        if v.is_infinite() && v > 0.0 || v.is_nan() {
            return Maximum { x, value: v };
        }
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    let lo = if best == 0 { a } else { pts[best - 1] };
    let hi = if best + 1 == pts.len() { b } else { pts[best + 1] };
    let (x, v) = golden_section_max(&mut f, lo, hi, tol * (b - a));
    if v > best_val {
        Maximum { x, value: v }
    } else {
        Maximum {
            x: pts[best],
            value: best_val,
        }
    }
}
