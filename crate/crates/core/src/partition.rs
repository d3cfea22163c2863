//! Multiscale grids of the upper-bound construction and their overlap
//! certificates.
//!
//! A window `[a, b]` of the axis stands for the union of the cross-section
//! balls centred in it; its one-dimensional shadow is `[a - φ(a), b + φ(b)]`.
//! Overlaps of shadows bound overlaps of the corresponding domains.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{ceil, exp2, floor, powf};
use crate::params::CuspProfile;
use crate::{Error, Result};

const LN2: f64 = core::f64::consts::LN_2;
/// Slack used when rounding exponents that are integers up to roundoff.
const SNAP: f64 = 1e-10;

/// `z_0 > z_1 > ...` with `z_{k+1} + φ(z_{k+1}) = z_k`, kept while `z_k >= floor`.
pub fn zk_sequence(cusp: &CuspProfile, z0: f64, floor_z: f64) -> Result<Vec<f64>> {
    zk_run(cusp, z0, floor_z, usize::MAX)
}

/// The first `levels + 1` terms of the same sequence.
pub fn zk_levels(cusp: &CuspProfile, z0: f64, levels: usize) -> Result<Vec<f64>> {
    zk_run(cusp, z0, 0.0, levels)
}

fn zk_run(cusp: &CuspProfile, z0: f64, floor_z: f64, levels: usize) -> Result<Vec<f64>> {
    if !(z0 > 0.0 && z0 <= 0.5) {
        return Err(Error::GridRange(format!("z0 must lie in (0, 1/2], got {z0}")));
    }
    if floor_z < 0.0 {
        return Err(Error::GridRange(format!("floor must be nonnegative, got {floor_z}")));
    }
    let mut out = vec![z0];
    let mut zk = z0;
    while out.len() <= levels {
        let next = solve_step(cusp, zk)?;
        if next < floor_z || next <= 0.0 {
            break;
        }
        out.push(next);
        zk = next;
    }
    Ok(out)
}

/// Bisection for `z + φ(z) = zk` on `(0, zk)`.
fn solve_step(cusp: &CuspProfile, zk: f64) -> Result<f64> {
    let g = |z: f64| z + cusp.phi(z);
    let (mut lo, mut hi) = (0.0f64, zk);
    if g(hi) < zk {
        return Err(Error::NonMonotoneProfile { lo, hi });
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) < zk {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    // φ must increase across the step it defines
    let samples = 8;
    let mut prev = cusp.ln_phi(z);
    for i in 1..=samples {
        let x = z + (zk - z) * i as f64 / samples as f64;
        let cur = cusp.ln_phi(x);
        if cur < prev {
            return Err(Error::NonMonotoneProfile { lo: z, hi: zk });
        }
        prev = cur;
    }
    let residual = (zk - z - cusp.phi(z)).abs();
    if residual > 1e-12 * zk {
        return Err(Error::GridRange(format!(
            "step residual {residual} exceeds 1e-12 z_k at z_k = {zk}"
        )));
    }
    Ok(z)
}

/// `log2 φ(2^-j)` computed in log space.
fn log2_phi_dyadic(cusp: &CuspProfile, j: u32) -> f64 {
    cusp.ln_phi_at_ln(-(j as f64) * LN2) / LN2
}

/// The integer `l_j` with `2^{-j-l_j-1} < φ(2^{-j}) <= 2^{-j-l_j}`.
pub fn lj_index(cusp: &CuspProfile, j: u32) -> Result<u32> {
    if j < 1 {
        return Err(Error::GridRange(String::from("level j must be at least 1")));
    }
    let y = log2_phi_dyadic(cusp, j);
    let x = -(j as f64) - y;
    if x < -SNAP {
        return Err(Error::ProfileAboveIdentity { j });
    }
    Ok(floor(x + SNAP).max(0.0) as u32)
}

/// Strictly decreasing breakpoints `τ_0 > τ_1 > ... > τ_k` on the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    breakpoints: Vec<f64>,
}

impl IntervalPartition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::GridRange(String::from("partition needs at least one breakpoint")));
        }
        if breakpoints[0] > 0.5 || *breakpoints.last().unwrap() < 0.0 {
            return Err(Error::GridRange(String::from("breakpoints must lie in [0, 1/2]")));
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            if !(w[0] > w[1]) {
                return Err(Error::GridRange(format!(
                    "breakpoints must strictly decrease; fails at index {}",
                    i + 1
                )));
            }
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Number of cells `[τ_j, τ_{j-1}]`.
    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell `j` in `1..=len` as `(τ_j, τ_{j-1})`.
    pub fn cell(&self, j: usize) -> (f64, f64) {
        (self.breakpoints[j], self.breakpoints[j - 1])
    }

    /// Shadow `[a - φ(a), b + φ(b)]` of cell `j`.
    pub fn slab_extent(&self, cusp: &CuspProfile, j: usize) -> (f64, f64) {
        let (a, b) = self.cell(j);
        shadow(cusp, a, b)
    }
}

fn shadow(cusp: &CuspProfile, a: f64, b: f64) -> (f64, f64) {
    let pa = if a > 0.0 { cusp.phi(a) } else { 0.0 };
    (a - pa, b + cusp.phi(b))
}

/// Uniform grid `τ_{j,l}(i) = 2^{-j} + i 2^{-j-l}` on `[2^{-j}, 2^{-j+1}]`, returned descending.
pub fn grid_r_jl(cusp: &CuspProfile, j: u32, l: u32) -> Result<IntervalPartition> {
    if j < 2 {
        return Err(Error::GridRange(format!("slab level j must be at least 2, got {j}")));
    }
    let lj = lj_index(cusp, j)?;
    if l > lj {
        return Err(Error::GridRange(format!(
            "l = {l} exceeds l_j = {lj}; finer cells come from subdividing the cells at l_j"
        )));
    }
    if j + l > 1020 || l > 50 {
        return Err(Error::GridRange(format!(
            "j + l = {} is beyond exact dyadic range",
            j + l
        )));
    }
    let base = exp2(-(j as f64));
    let step = exp2(-((j + l) as f64));
    let cells = 1u64 << l;
    let pts = (0..=cells).rev().map(|i| base + i as f64 * step).collect();
    IntervalPartition::new(pts)
}

/// Parameters of the multiscale schedule for `n = 2^{level}`, `level = Nd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSchedule {
    pub level: u32,
    pub d: u32,
    pub eps: f64,
    /// `0` or `level`.
    pub t_star: u32,
    /// Effective exponent bounding the range of the refined levels.
    pub qhat: Option<f64>,
}

impl PartitionSchedule {
    /// Schedule for `n = 2^{Nd}`; accepts `ε >= 0`, where `ε = 0` is the degenerate
    /// schedule with logarithmic blow-up.
    pub fn new(n: u32, d: u32, eps: f64, t_star: u32, qhat: Option<f64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::GridRange(String::from("scale N must be at least 1")));
        }
        Self::with_level(n.saturating_mul(d), d, eps, t_star, qhat)
    }

    /// Same schedule at an arbitrary dyadic level, not necessarily a multiple of `d`.
    pub fn with_level(level: u32, d: u32, eps: f64, t_star: u32, qhat: Option<f64>) -> Result<Self> {
        if d < 1 || level > 60 {
            return Err(Error::GridRange(format!("need d >= 1 and level <= 60, got level = {level}, d = {d}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::GridRange(format!("eps must be finite and nonnegative, got {eps}")));
        }
        if t_star != 0 && t_star != level {
            return Err(Error::GridRange(format!("t_star must be 0 or {level}, got {t_star}")));
        }
        Ok(Self {
            level,
            d,
            eps,
            t_star,
            qhat,
        })
    }

    /// `ε = d |α - δ/d| / (2δ)`; `t_* = 0` when `α > δ/d`, else `Nd`.
    pub fn auto(n: u32, d: u32, delta: f64, alpha: f64, qhat: Option<f64>) -> Result<Self> {
        Self::auto_at_level(n.saturating_mul(d), d, delta, alpha, qhat)
    }

    pub fn auto_at_level(level: u32, d: u32, delta: f64, alpha: f64, qhat: Option<f64>) -> Result<Self> {
        let df = d as f64;
        let eps = df / (2.0 * delta) * (alpha - delta / df).abs();
        let t_star = if alpha > delta / df { 0 } else { level };
        Self::with_level(level, d, eps, t_star, qhat)
    }

    /// The same schedule at another level, keeping `t_*` on the same side.
    pub fn relevel(&self, level: u32) -> Result<Self> {
        let t_star = if self.t_star == 0 { 0 } else { level };
        Self::with_level(level, self.d, self.eps, t_star, self.qhat)
    }

    /// Cell count of the partition with `2^{l_{m*_t, t}}` cells on every slab of group `t`, plus the tail cell.
    pub fn total_cells(&self) -> u64 {
        schedule_cardinalities(self).total
    }

    /// `Nd`.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// `γ = 2^{1+ε}`.
    pub fn gamma(&self) -> f64 {
        powf(2.0, 1.0 + self.eps)
    }

    fn dist(&self, t: u32) -> f64 {
        self.eps * (t as f64 - self.t_star as f64).abs()
    }

    /// `max(⌈t - Nd + ε|t - t_*|⌉, 0)`.
    pub fn m_star(&self, t: u32) -> u32 {
        let x = t as f64 - self.level() as f64 + self.dist(t);
        ceil(x - SNAP).max(0.0) as u32
    }

    /// `⌈Nd - t - ε|t - t_*|⌉ + m`, clamped below at 0.
    pub fn l_mt(&self, m: u32, t: u32) -> u32 {
        let x = self.level() as f64 - t as f64 - self.dist(t);
        (ceil(x - SNAP) + m as f64).max(0.0) as u32
    }

    /// `⌈(1 + ε)(t - Nd)⌉`.
    pub fn m_t(&self, t: u32) -> u32 {
        let x = (1.0 + self.eps) * (t as f64 - self.level() as f64);
        ceil(x - SNAP).max(0.0) as u32
    }

    /// `⌊q̂ Nd / 2⌋`.
    pub fn t_hat(&self) -> Option<u32> {
        self.qhat.map(|q| floor(q * self.level() as f64 / 2.0 + SNAP) as u32)
    }
}

/// Levels `j_{m,t}(s)` for `s ∈ J_{m,t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step5Grid {
    pub m: u32,
    pub t: u32,
    /// `(s, j_{m,t}(s))` in increasing `s`.
    pub levels: Vec<(u64, u64)>,
}

impl Step5Grid {
    pub fn card(&self) -> usize {
        self.levels.len()
    }

    /// `τ_{m,t}(s) = 2^{-j}`; zero once it underflows.
    pub fn taus(&self) -> Vec<f64> {
        self.levels.iter().map(|&(_, j)| exp2(-(j as f64))).collect()
    }

    /// The counting bound `2^m 2^{Nd} 2^{-ε(t - Nd)}`.
    pub fn bound(&self, schedule: &PartitionSchedule) -> f64 {
        let lvl = schedule.level() as f64;
        exp2(self.m as f64 + lvl - schedule.eps * (self.t as f64 - lvl))
    }
}

/// Enumerates `J_{m,t} = {s : j(s) <= 2^{t+1}, j(s+1) >= 2^t}` with `j(s) = ⌊γ^{t-Nd} 2^{-m} s⌋`.
pub fn grid_step5(schedule: &PartitionSchedule, m: u32, t: u32) -> Result<Step5Grid> {
    let lvl = schedule.level();
    let t_hat = schedule
        .t_hat()
        .ok_or_else(|| Error::GridRange(String::from("schedule has no effective exponent q̂")))?;
    if t < lvl + 1 || t >= t_hat {
        return Err(Error::GridRange(format!(
            "need Nd + 1 <= t < ⌊q̂Nd/2⌋, got t = {t}, Nd = {lvl}, bound {t_hat}"
        )));
    }
    if t > 40 {
        return Err(Error::GridRange(format!("t = {t} is too large to enumerate")));
    }
    let mt = schedule.m_t(t);
    if m > mt {
        return Err(Error::GridRange(format!("need m <= m_t = {mt}, got {m}")));
    }
    let factor = exp2((1.0 + schedule.eps) * (t - lvl) as f64 - m as f64);
    let j_of = |s: u64| floor(factor * s as f64) as u64;
    let (lo, hi) = (1u64 << t, 1u64 << (t + 1));
    let mut levels = Vec::new();
    let mut s = 0u64;
    loop {
        let j = j_of(s);
        if j > hi {
            break;
        }
        if j_of(s + 1) >= lo {
            levels.push((s, j));
        }
        s += 1;
    }
    Ok(Step5Grid { m, t, levels })
}

/// A cell of a refined partition: a finite union of intervals inside its source slab.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedCell {
    pub pieces: Vec<(f64, f64)>,
    /// Index of the covering slab it came from.
    pub source: usize,
}

impl RefinedCell {
    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }
}

/// Sequential difference `Ê_i = U ∩ E_i \ ∪_{k<i} E_k`, keeping cells of positive length.
pub fn refine_covering_to_partition(covering: &[(f64, f64)], u: (f64, f64)) -> Result<Vec<RefinedCell>> {
    for (i, &(a, b)) in covering.iter().enumerate() {
        if !(b > a) {
            return Err(Error::GridRange(format!("covering slab {i} has nonpositive length")));
        }
    }
    // disjoint sorted union of the slabs seen so far
    let mut covered: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::new();
    for (i, &(a, b)) in covering.iter().enumerate() {
        let (lo, hi) = (a.max(u.0), b.min(u.1));
        if hi > lo {
            let mut pieces = Vec::new();
            let mut cur = lo;
            for &(ca, cb) in &covered {
                if cb <= cur {
                    continue;
                }
                if ca >= hi {
                    break;
                }
                if ca > cur {
                    pieces.push((cur, ca));
                }
                cur = cur.max(cb);
                if cur >= hi {
                    break;
                }
            }
            if cur < hi {
                pieces.push((cur, hi));
            }
            if !pieces.is_empty() {
                out.push(RefinedCell { pieces, source: i });
            }
        }
        insert_interval(&mut covered, (a, b));
    }
    Ok(out)
}

fn insert_interval(set: &mut Vec<(f64, f64)>, (a, b): (f64, f64)) {
    let mut merged = (a, b);
    let mut keep = Vec::with_capacity(set.len() + 1);
    for &(x, y) in set.iter() {
        if y < merged.0 || x > merged.1 {
            keep.push((x, y));
        } else {
            merged = (merged.0.min(x), merged.1.max(y));
        }
    }
    keep.push(merged);
    keep.sort_by(|p, q| p.0.total_cmp(&q.0));
    *set = keep;
}

/// Overlap certificate of a family of shadows.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityCertificate {
    /// `max_E #{E' : mes(E ∩ E') > 0}`, counting `E` itself.
    pub max_overlap: usize,
    /// `histogram[c]` cells meet exactly `c` members.
    pub histogram: Vec<usize>,
    /// Largest number of cells of a neighbouring level met by one cell, when compared.
    pub neighbor_bound: Option<usize>,
}

/// Overlaps below this fraction of the shorter interval count as measure zero.
const OVERLAP_RTOL: f64 = 1e-9;

fn overlaps(x: (f64, f64), y: (f64, f64)) -> bool {
    let len = (x.1.min(y.1) - x.0.max(y.0)).max(0.0);
    let scale = (x.1 - x.0).min(y.1 - y.0);
    len > OVERLAP_RTOL * scale
}

fn shadows(p: &IntervalPartition, cusp: &CuspProfile) -> Vec<(f64, f64)> {
    (1..=p.len()).map(|j| p.slab_extent(cusp, j)).collect()
}

/// For every member of `a`, the number of members of `b` it meets; `b` must be sorted by left end.
fn overlap_counts(a: &[(f64, f64)], b_sorted: &[(f64, f64)]) -> Vec<usize> {
    a.iter()
        .map(|&x| {
            let start = b_sorted.partition_point(|y| y.0 < x.0 - (x.1 - x.0).max(max_len(b_sorted)));
            b_sorted[start..]
                .iter()
                .take_while(|y| y.0 < x.1)
                .filter(|&&y| overlaps(x, y))
                .count()
        })
        .collect()
}

fn max_len(v: &[(f64, f64)]) -> f64 {
    v.iter().map(|x| x.1 - x.0).fold(0.0, f64::max)
}

fn check_gaps(p: &IntervalPartition, cusp: &CuspProfile, c_hat: f64) -> Result<()> {
    if !(c_hat > 0.0 && c_hat <= 1.0) {
        return Err(Error::GridRange(format!("c_hat must lie in (0, 1], got {c_hat}")));
    }
    let bp = p.breakpoints();
    for j in 1..bp.len() {
        let gap = bp[j - 1] - bp[j];
        let required = c_hat * cusp.phi(bp[j - 1]);
        if gap < required * (1.0 - 1e-12) {
            return Err(Error::GapViolation { j, gap, required });
        }
    }
    Ok(())
}

/// Checks the gap hypothesis `τ_{j-1} - τ_j >= ĉ φ(τ_{j-1})`, then counts shadow overlaps.
pub fn multiplicity_check(p: &IntervalPartition, cusp: &CuspProfile, c_hat: f64) -> Result<MultiplicityCertificate> {
    check_gaps(p, cusp, c_hat)?;
    let sh = shadows(p, cusp);
    let mut sorted = sh.clone();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let counts = overlap_counts(&sh, &sorted);
    let max_overlap = counts.iter().copied().max().unwrap_or(0).max(1);
    let mut histogram = vec![0usize; max_overlap + 1];
    for c in counts {
        histogram[c] += 1;
    }
    Ok(MultiplicityCertificate {
        max_overlap,
        histogram,
        neighbor_bound: None,
    })
}

/// [`multiplicity_check`] of `fine` plus the largest count of `coarse` shadows met by one `fine` shadow.
pub fn multiplicity_check_levels(
    fine: &IntervalPartition,
    coarse: &IntervalPartition,
    cusp: &CuspProfile,
    c_hat: f64,
) -> Result<MultiplicityCertificate> {
    let mut cert = multiplicity_check(fine, cusp, c_hat)?;
    check_gaps(coarse, cusp, c_hat)?;
    let mut sorted = shadows(coarse, cusp);
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let counts = overlap_counts(&shadows(fine, cusp), &sorted);
    cert.neighbor_bound = counts.into_iter().max();
    Ok(cert)
}

/// One group `t` of the schedule: `2^t` slabs with `2^l` cells each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalityRow {
    pub t: u32,
    pub m_star: u32,
    pub l: u32,
    pub slabs: u64,
    pub cells: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityTable {
    pub rows: Vec<CardinalityRow>,
    /// The single tail cell below the deepest group.
    pub tail_cells: u64,
    pub total: u64,
    /// `total / 2^{Nd}`.
    pub ratio: f64,
}

/// Cell counts of the partition that uses `l_{m*_t, t}` on group `t`, for `0 <= t <= Nd`.
pub fn schedule_cardinalities(s: &PartitionSchedule) -> CardinalityTable {
    let rows: Vec<CardinalityRow> = (0..=s.level())
        .map(|t| {
            let m_star = s.m_star(t);
            let l = s.l_mt(m_star, t);
            let slabs = 1u64 << t;
            CardinalityRow {
                t,
                m_star,
                l,
                slabs,
                cells: slabs << l,
            }
        })
        .collect();
    let total = rows.iter().map(|r| r.cells).sum::<u64>() + 1;
    CardinalityTable {
        rows,
        tail_cells: 1,
        total,
        ratio: total as f64 / exp2(s.level() as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SlowlyVarying;
    use proptest::prelude::*;

    fn half_profile() -> CuspProfile {
        CuspProfile::new(1.0, 0.0, SlowlyVarying::one().scaled(0.5).unwrap()).unwrap()
    }

    #[test]
    fn zk_closed_form() {
        let z = zk_levels(&half_profile(), 0.5, 3).unwrap();
        assert_eq!(z.len(), 4);
        assert!((z[3] - 4.0 / 27.0).abs() < 1e-14);
        for (k, &zk) in z.iter().enumerate() {
            assert!((zk - 0.5 * (2.0f64 / 3.0).powi(k as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn zk_square_residuals() {
        let cusp = CuspProfile::power(2.0).unwrap();
        let z = zk_sequence(&cusp, 0.5, 1e-3).unwrap();
        for w in z.windows(2) {
            assert!(w[1] < w[0]);
            assert!((w[0] - w[1] - w[1] * w[1]).abs() <= 1e-12 * w[0]);
        }
        assert!(*z.last().unwrap() >= 1e-3);
        assert_eq!(zk_sequence(&cusp, 0.5, 0.5).unwrap(), vec![0.5]);
        assert_eq!(zk_sequence(&cusp, 0.25, 0.3).unwrap(), vec![0.25]);
    }

    #[test]
    fn lj_examples() {
        let sq = CuspProfile::power(2.0).unwrap();
        assert_eq!(lj_index(&sq, 3).unwrap(), 3);
        assert_eq!(lj_index(&sq, 4).unwrap(), 4);
        let id = CuspProfile::power(1.0).unwrap();
        for j in 1..30 {
            assert_eq!(lj_index(&id, j).unwrap(), 0);
        }
        let big = CuspProfile::new(1.0, 0.0, SlowlyVarying::one().scaled(3.0).unwrap()).unwrap();
        assert!(matches!(lj_index(&big, 3), Err(Error::ProfileAboveIdentity { j: 3 })));
    }

    #[test]
    fn lj_brackets_phi_deep() {
        let cusp = CuspProfile::new(1.5, 1.0, SlowlyVarying::one()).unwrap();
        for j in [2u32, 7, 50, 900, 5000] {
            let l = lj_index(&cusp, j).unwrap() as f64;
            let y = log2_phi_dyadic(&cusp, j);
            assert!(-(j as f64) - l - 1.0 < y && y <= -(j as f64) - l + 1e-9);
        }
    }

    #[test]
    fn r_jl_examples() {
        let sq = CuspProfile::power(2.0).unwrap();
        let g = grid_r_jl(&sq, 3, 1).unwrap();
        assert_eq!(g.breakpoints(), &[0.25, 0.1875, 0.125]);
        let g = grid_r_jl(&sq, 3, 0).unwrap();
        assert_eq!(g.breakpoints(), &[0.25, 0.125]);
        assert_eq!(grid_r_jl(&sq, 5, 3).unwrap().len(), 8);
        assert!(grid_r_jl(&sq, 3, 4).is_err());
    }

    #[test]
    fn schedule_formulas() {
        let s = PartitionSchedule::new(2, 2, 0.5, 0, Some(4.0)).unwrap();
        assert!((s.gamma() - 2f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(s.m_t(5), 2);
        assert_eq!(s.t_hat(), Some(8));
        // t = 2: ⌈4 - 2 - 1⌉ = 1
        assert_eq!(s.l_mt(0, 2), 1);
        assert_eq!(s.m_star(2), 0);
        // t = 4: ⌈0 + 2⌉ = 2 and l = ⌈-2⌉ + 2 = 0
        assert_eq!(s.m_star(4), 2);
        assert_eq!(s.l_mt(2, 4), 0);
    }

    #[test]
    fn auto_schedule_choices() {
        let s = PartitionSchedule::auto(3, 2, 1.0, 2.0, None).unwrap();
        assert_eq!(s.t_star, 0);
        assert!((s.eps - 1.5).abs() < 1e-15);
        let s = PartitionSchedule::auto(3, 2, 1.5, 0.5, None).unwrap();
        assert_eq!(s.t_star, 6);
        assert!((s.eps - 1.0 / 6.0).abs() < 1e-15);
    }

    fn brute_j(eps: f64, lvl: u32, m: u32, t: u32) -> Vec<(u64, u64)> {
        let gamma = 2f64.powf(1.0 + eps);
        let j = |s: u64| (gamma.powi((t - lvl) as i32) * 2f64.powi(-(m as i32)) * s as f64).floor() as u64;
        (0..100_000u64)
            .filter(|&s| j(s) <= 1 << (t + 1) && j(s + 1) >= 1 << t)
            .map(|s| (s, j(s)))
            .collect()
    }

    #[test]
    fn step5_matches_enumeration() {
        let s = PartitionSchedule::new(2, 2, 0.5, 0, Some(4.0)).unwrap();
        let g = grid_step5(&s, 0, 5).unwrap();
        assert_eq!(g.levels, brute_j(0.5, 4, 0, 5));
        assert_eq!(g.card(), 12);
        let c = g.card() as f64 / g.bound(&s);
        assert!(c > 0.5 && c < 2.0, "{c}");
    }

    #[test]
    fn step5_top_refinement_is_unit_steps() {
        let s = PartitionSchedule::new(2, 2, 0.5, 0, Some(4.0)).unwrap();
        for t in 5..8 {
            let g = grid_step5(&s, s.m_t(t), t).unwrap();
            for w in g.levels.windows(2) {
                assert!(w[1].1 - w[0].1 <= 1);
            }
        }
    }

    #[test]
    fn step5_zero_eps_is_floor_arithmetic() {
        let s = PartitionSchedule::new(2, 2, 0.0, 0, Some(4.0)).unwrap();
        let g = grid_step5(&s, 0, 5).unwrap();
        // j(s) = 2s; need 2s <= 64 and 2(s + 1) >= 32
        let expect: Vec<(u64, u64)> = (15..=32).map(|s| (s, 2 * s)).collect();
        assert_eq!(g.levels, expect);
        assert!(grid_step5(&s, 0, 4).is_err());
        assert!(grid_step5(&s, 9, 5).is_err());
    }

    #[test]
    fn refinement_examples() {
        let disjoint = [(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)];
        let r = refine_covering_to_partition(&disjoint, (0.0, 3.0)).unwrap();
        assert_eq!(r.len(), 3);
        for (i, c) in r.iter().enumerate() {
            assert_eq!(c.source, i);
            assert_eq!(c.pieces, vec![disjoint[i]]);
        }
        let r = refine_covering_to_partition(&[(0.0, 2.0), (1.0, 3.0)], (0.0, 3.0)).unwrap();
        assert_eq!(r[0].pieces, vec![(0.0, 2.0)]);
        assert_eq!(r[1].pieces, vec![(2.0, 3.0)]);
        let r = refine_covering_to_partition(&[(0.0, 3.0), (1.0, 2.0), (2.5, 4.0)], (0.0, 4.0)).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].source, 2);
        assert!(refine_covering_to_partition(&[(1.0, 1.0)], (0.0, 1.0)).is_err());
    }

    #[test]
    fn single_slab_and_gap_violation() {
        let sq = CuspProfile::power(2.0).unwrap();
        let p = IntervalPartition::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(multiplicity_check(&p, &sq, 0.5).unwrap().max_overlap, 1);
        let mut bp = vec![0.5];
        for _ in 0..5 {
            let last = *bp.last().unwrap();
            bp.push(last - sq.phi(last) / 100.0);
        }
        let p = IntervalPartition::new(bp).unwrap();
        assert!(matches!(multiplicity_check(&p, &sq, 1.0), Err(Error::GapViolation { j: 1, .. })));
    }

    #[test]
    fn zk_certificate_is_depth_stable() {
        let sq = CuspProfile::power(2.0).unwrap();
        let a = multiplicity_check(&IntervalPartition::new(zk_levels(&sq, 0.5, 100).unwrap()).unwrap(), &sq, 0.5).unwrap();
        let b = multiplicity_check(&IntervalPartition::new(zk_levels(&sq, 0.5, 1000).unwrap()).unwrap(), &sq, 0.5).unwrap();
        assert_eq!(a.max_overlap, b.max_overlap);
        assert!(a.max_overlap >= 2);
    }

    #[test]
    fn neighbor_levels() {
        let sq = CuspProfile::power(2.0).unwrap();
        let fine = grid_r_jl(&sq, 4, 2).unwrap();
        let coarse = grid_r_jl(&sq, 4, 1).unwrap();
        let cert = multiplicity_check_levels(&fine, &coarse, &sq, 0.5).unwrap();
        assert!(cert.neighbor_bound.unwrap() >= 1 && cert.neighbor_bound.unwrap() <= 2);
    }

    #[test]
    fn cardinality_examples() {
        let zero = PartitionSchedule::new(3, 2, 0.0, 0, None).unwrap();
        let tab = schedule_cardinalities(&zero);
        assert_eq!(tab.total, 7 * 64 + 1);
        for row in &tab.rows {
            assert_eq!(row.cells, 64);
        }
        let mut last = f64::INFINITY;
        for n in 3..=5 {
            let s = PartitionSchedule::new(n, 2, 0.5, 0, None).unwrap();
            let tab = schedule_cardinalities(&s);
            assert!(tab.ratio <= last * 1.2);
            last = tab.ratio;
            let row = tab.rows[s.level() as usize];
            assert_eq!(row.cells, (1u64 << row.t) << s.l_mt(s.m_star(row.t), row.t));
        }
    }

    proptest! {
        #[test]
        fn r_jl_tiles_the_slab(j in 2u32..40, l in 0u32..12) {
            let sq = CuspProfile::power(2.0).unwrap();
            prop_assume!(l <= lj_index(&sq, j).unwrap());
            let g = grid_r_jl(&sq, j, l).unwrap();
            prop_assert_eq!(g.len(), 1usize << l);
            prop_assert_eq!(g.breakpoints()[0], 2f64.powi(-(j as i32) + 1));
            prop_assert_eq!(*g.breakpoints().last().unwrap(), 2f64.powi(-(j as i32)));
            let w = 2f64.powi(-((j + l) as i32));
            for k in 1..=g.len() {
                let (a, b) = g.cell(k);
                prop_assert_eq!(b - a, w);
            }
        }

        #[test]
        fn refinement_partitions_the_target(raw in proptest::collection::vec((0.0f64..10.0, 0.01f64..3.0), 1..12)) {
            let cov: Vec<(f64, f64)> = raw.iter().map(|&(a, l)| (a, a + l)).collect();
            let lo = cov.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
            let hi = cov.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
            let cells = refine_covering_to_partition(&cov, (lo, hi)).unwrap();
            prop_assert!(cells.len() <= cov.len());
            let mut pieces: Vec<(f64, f64)> = cells.iter().flat_map(|c| c.pieces.clone()).collect();
            for c in &cells {
                let (a, b) = cov[c.source];
                for &(x, y) in &c.pieces {
                    prop_assert!(a <= x && y <= b && x < y);
                }
            }
            pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in pieces.windows(2) {
                prop_assert!(w[0].1 <= w[1].0);
            }
            let mut union: Vec<(f64, f64)> = Vec::new();
            for &c in &cov {
                insert_interval(&mut union, c);
            }
            let total: f64 = pieces.iter().map(|p| p.1 - p.0).sum();
            let expect: f64 = union.iter().map(|p| p.1 - p.0).sum();
            prop_assert!((total - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }
}
