//! Least-squares line through `(ln x, ln y)`.

use crate::math::ln;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit in log coordinates.
    pub r2: f64,
    pub points: usize,
}

/// Fits `ln y = intercept + slope ln x`; needs two distinct positive abscissae and positive ordinates.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateRegression);
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateRegression);
    }
    let n = xs.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sx += ln(x);
        sy += ln(y);
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (ln(x) - mx, ln(y) - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateRegression);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LogLogFit {
        slope,
        intercept,
        r2,
        points: xs.len(),
    })
}
