//! Model cusp `{(y, z) : 0 < z < 1/2, |y| < φ(z)}` in the plane: meshes built from
//! the multiscale schedule, local polynomial projections, weighted norms, the
//! bump family of the lower bound and the error-decay experiment.
//!
//! Cells are stored in slab-local coordinates so that slabs far below the
//! double-precision range stay usable. In slab `j` a point is
//! `z = 2^-j (1 + u)`, `y = φ(z) Y` with `u ∈ [0, 1]`, `Y ∈ [-1, 1]`; the region
//! below the deepest slab is one tail cell with `z = 2^-J u`, `u ∈ (0, 1]`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::exponents::{width_exponent, Regime};
use crate::math::{cos, exp, floor, ln, ln_add, powf, sin, sqrt};
use crate::params::{derive_quantities, CuspProfile, DerivedQuantities, ProblemParams, WeightSpec};
use crate::partition::{lj_index, PartitionSchedule};
use crate::quad::GaussLegendre;
use crate::regression::fit_loglog;
use crate::{Error, Result};

const LN2: f64 = core::f64::consts::LN_2;
/// Tensor Gauss–Legendre order per cell direction.
pub const QUAD_ORDER: usize = 8;
/// Dyadic sub-slabs integrated inside the tail cell.
pub const TAIL_SLABS: u32 = 48;
pub const MAX_R: u32 = 4;
/// Smallest cell count accepted by [`build_mesh`].
pub const MIN_TARGET: usize = 16;
/// Largest level tried when matching a target cell count.
const MAX_LEVEL: u32 = 20;
/// A column that keeps less than this fraction of its norm under orthogonalisation is degenerate.
const DEGENERATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `2^-j <= z <= 2^{-j+1}`.
    Slab(u32),
    /// `0 < z <= 2^-j`.
    Tail(u32),
    /// Plain rectangle in physical coordinates, `u = z`, `Y = y`.
    Plane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub region: Region,
    /// Axial range in local units.
    pub u: (f64, f64),
    /// Cross-section range as a fraction of `(-φ, φ)`; physical `y` for [`Region::Plane`].
    pub y: (f64, f64),
    /// Produced by splitting a slab cell across the cross-section.
    pub refined: bool,
}

impl Cell {
    pub fn plane(z: (f64, f64), y: (f64, f64)) -> Self {
        Self {
            region: Region::Plane,
            u: z,
            y,
            refined: false,
        }
    }
}

/// A quadrature node as seen by integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    /// Physical coordinates; zero once they underflow.
    pub z: f64,
    pub y: f64,
    pub ln_z: f64,
    /// Dyadic slab `2^-slab <= z < 2^{-slab+1}` containing the point and the offset `z 2^slab - 1`.
    pub slab: u32,
    pub slab_u: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    u: f64,
    w: f64,
    weight: f64,
    point: Point,
}

/// Axial unit, cross-section unit and axial offset of a region, in log form.
fn frame(cusp: &CuspProfile, region: Region) -> (f64, f64, f64) {
    match region {
        Region::Slab(j) => {
            let lz = -(j as f64) * LN2;
            (lz, cusp.ln_phi_at_ln(lz), 1.0)
        }
        Region::Tail(j) => {
            let lz = -(j as f64) * LN2;
            (lz, cusp.ln_phi_at_ln(lz), 0.0)
        }
        Region::Plane => (0.0, 0.0, 0.0),
    }
}

fn slab_of(ln_z: f64) -> (u32, f64) {
    let j = floor(-ln_z / LN2) + 1.0;
    let j = j.max(0.0);
    (j as u32, exp(ln_z + j * LN2) - 1.0)
}

/// Nodes of a cell and `ln` of the constant factor converting local to physical measure.
fn cell_nodes(cusp: &CuspProfile, cell: &Cell, gl: &GaussLegendre) -> (Vec<Node>, f64) {
    let (ln_zu, ln_yu, offset) = frame(cusp, cell.region);
    let mut out = Vec::with_capacity(gl.len() * gl.len());
    let mut push_axis = |u0: f64, u1: f64, sub: Option<u32>| {
        for (u, wu) in gl.mapped(u0, u1) {
            let (ln_z, ratio) = match cell.region {
                Region::Plane => (ln(u), 1.0),
                _ => {
                    let lz = ln_zu + ln(offset + u);
                    (lz, exp(cusp.ln_phi_at_ln(lz) - ln_yu))
                }
            };
            let (slab, slab_u) = match (cell.region, sub) {
                (Region::Slab(j), _) => (j, u),
                (Region::Tail(j), Some(k)) => (j + k, u * exp(k as f64 * LN2) - 1.0),
                _ => {
                    if u > 0.0 {
                        slab_of(ln_z)
                    } else {
                        (0, 0.0)
                    }
                }
            };
            for (yf, wy) in gl.mapped(cell.y.0, cell.y.1) {
                let w = ratio * yf;
                out.push(Node {
                    u,
                    w,
                    weight: wu * wy * ratio,
                    point: Point {
                        z: exp(ln_z),
                        y: w * exp(ln_yu),
                        ln_z,
                        slab,
                        slab_u,
                    },
                });
            }
        }
    };
    match cell.region {
        Region::Tail(_) => {
            for k in 1..=TAIL_SLABS {
                let hi = exp(-((k - 1) as f64) * LN2);
                push_axis(0.5 * hi, hi, Some(k));
            }
        }
        _ => push_axis(cell.u.0, cell.u.1, None),
    }
    (out, ln_zu + ln_yu)
}

/// Monomial exponents `(a, b)` with `a + b <= r - 1`.
fn monomials(r: u32) -> Vec<(u32, u32)> {
    let mut m = Vec::new();
    for deg in 0..r {
        for a in (0..=deg).rev() {
            m.push((a, deg - a));
        }
    }
    m
}

/// Centre and half-widths of the scaled local coordinates used by the basis.
fn basis_frame(cusp: &CuspProfile, cell: &Cell) -> (f64, f64, f64, f64) {
    let uc = 0.5 * (cell.u.0 + cell.u.1);
    let hu = 0.5 * (cell.u.1 - cell.u.0);
    let scale = match cell.region {
        Region::Plane => 1.0,
        region => {
            let (ln_zu, ln_yu, offset) = frame(cusp, region);
            exp(cusp.ln_phi_at_ln(ln_zu + ln(offset + uc)) - ln_yu)
        }
    };
    let wc = scale * 0.5 * (cell.y.0 + cell.y.1);
    let hw = scale * 0.5 * (cell.y.1 - cell.y.0);
    (uc, hu, wc, hw)
}

/// Orthogonal projector onto polynomials of total degree `< r` on one cell.
struct CellProjector {
    nodes: Vec<Node>,
    ln_unit: f64,
    /// Monomials at the nodes, `m × nb`.
    basis: DMatrix<f64>,
    /// Orthonormal columns of `sqrt(W) B T`.
    q: DMatrix<f64>,
    /// Upper-triangular change of basis.
    t: DMatrix<f64>,
    sw: Vec<f64>,
    mono: Vec<(u32, u32)>,
    frame: (f64, f64, f64, f64),
}

impl CellProjector {
    fn new(cusp: &CuspProfile, cell: &Cell, index: usize, r: u32, gl: &GaussLegendre) -> Result<Self> {
        let (nodes, ln_unit) = cell_nodes(cusp, cell, gl);
        let mono = monomials(r);
        let fr = basis_frame(cusp, cell);
        let (uc, hu, wc, hw) = fr;
        let m = nodes.len();
        let nb = mono.len();
        let basis = DMatrix::from_fn(m, nb, |k, i| {
            let (a, b) = mono[i];
            let x = (nodes[k].u - uc) / hu;
            let y = (nodes[k].w - wc) / hw;
            crate::math::powi(x, a as i32) * crate::math::powi(y, b as i32)
        });
        let sw: Vec<f64> = nodes.iter().map(|n| sqrt(n.weight)).collect();
        let mut q = DMatrix::from_fn(m, nb, |k, i| sw[k] * basis[(k, i)]);
        let mut t = DMatrix::<f64>::identity(nb, nb);
        for jc in 0..nb {
            let orig = q.column(jc).norm();
            for _ in 0..2 {
                for kc in 0..jc {
                    let proj = q.column(kc).dot(&q.column(jc));
                    let qk = q.column(kc).clone_owned();
                    q.column_mut(jc).axpy(-proj, &qk, 1.0);
                    let tk = t.column(kc).clone_owned();
                    t.column_mut(jc).axpy(-proj, &tk, 1.0);
                }
            }
            let nrm = q.column(jc).norm();
            if !(nrm > DEGENERATE * orig) || !nrm.is_finite() {
                return Err(Error::IllConditionedCell { cell: index });
            }
            q.column_mut(jc).unscale_mut(nrm);
            t.column_mut(jc).unscale_mut(nrm);
        }
        Ok(Self {
            nodes,
            ln_unit,
            basis,
            q,
            t,
            sw,
            mono,
            frame: fr,
        })
    }

    /// Monomial coefficients of the projection of nodal values.
    fn coefficients(&self, vals: &[f64]) -> Vec<f64> {
        let nb = self.q.ncols();
        let mut qtf = vec![0.0; nb];
        for (i, acc) in qtf.iter_mut().enumerate() {
            *acc = (0..vals.len()).map(|k| self.q[(k, i)] * self.sw[k] * vals[k]).sum();
        }
        (0..nb).map(|i| (i..nb).map(|k| self.t[(i, k)] * qtf[k]).sum()).collect()
    }

    fn eval(&self, coef: &[f64], k: usize) -> f64 {
        (0..coef.len()).map(|i| self.basis[(k, i)] * coef[i]).sum()
    }

    /// `ln ∫_cell |f - Pf|^q v^q`, or `-∞` when the error vanishes.
    fn ln_error(&self, vals: &[f64], q: f64, v: &WeightSpec) -> f64 {
        let coef = self.coefficients(vals);
        self.ln_weighted(|k| vals[k] - self.eval(&coef, k), q, v)
    }

    fn ln_weighted<F: Fn(usize) -> f64>(&self, f: F, q: f64, v: &WeightSpec) -> f64 {
        let lv: Vec<f64> = self.nodes.iter().map(|n| q * v.ln_value_at_ln(n.point.ln_z)).collect();
        let vref = lv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        for (k, n) in self.nodes.iter().enumerate() {
            let e = f(k).abs();
            if e > 0.0 {
                acc += n.weight * powf(e, q) * exp(lv[k] - vref);
            }
        }
        if acc > 0.0 {
            ln(acc) + vref + self.ln_unit
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Discretised cusp: cells grouped by slab, plus at most one tail cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspMesh {
    pub profile: CuspProfile,
    pub level: Option<u32>,
    pub cells: Vec<Cell>,
    /// `(j, first, end)` ranges of `cells` per slab, ascending in `j`.
    slabs: Vec<(u32, usize, usize)>,
}

/// Splits a base cell of a slab into `2^extra` near-square cells by always halving the longer side.
fn split_counts(cusp: &CuspProfile, j: u32, u: (f64, f64), extra: u32) -> (u32, u32) {
    let lz = -(j as f64) * LN2;
    let ln_zw = lz + ln(u.1 - u.0);
    let ln_yw = cusp.ln_phi_at_ln(lz + ln(1.0 + 0.5 * (u.0 + u.1))) + LN2;
    let (mut kz, mut ky) = (1u32, 1u32);
    for _ in 0..extra {
        if ln_zw - ln(kz as f64) > ln_yw - ln(ky as f64) {
            kz *= 2;
        } else {
            ky *= 2;
        }
    }
    (kz, ky)
}

impl CuspMesh {
    /// Mesh with `2^{l_{m*_t, t}}` cells on every slab of group `t = 0..=level`, plus a tail cell.
    pub fn from_schedule(profile: &CuspProfile, schedule: &PartitionSchedule) -> Result<Self> {
        let level = schedule.level();
        if level > MAX_LEVEL {
            return Err(Error::GridRange(alloc::format!("level {level} exceeds {MAX_LEVEL}")));
        }
        let deepest = 1u32 << (level + 1);
        profile.check_working_interval(0.5, 256)?;
        let mut cells = Vec::new();
        let mut slabs = Vec::new();
        for t in 0..=level {
            let l = schedule.l_mt(schedule.m_star(t), t);
            for j in (1u32 << t) + 1..=(1u32 << (t + 1)) {
                let start = cells.len();
                Self::push_slab(profile, j, l, &mut cells)?;
                slabs.push((j, start, cells.len()));
            }
        }
        cells.push(Cell {
            region: Region::Tail(deepest),
            u: (0.0, 1.0),
            y: (-1.0, 1.0),
            refined: false,
        });
        Ok(Self {
            profile: profile.clone(),
            level: Some(level),
            cells,
            slabs,
        })
    }

    fn push_slab(profile: &CuspProfile, j: u32, l: u32, cells: &mut Vec<Cell>) -> Result<()> {
        let lj = lj_index(profile, j)?;
        let base = l.min(lj);
        if base > 30 || l - base > 30 {
            return Err(Error::GridRange(alloc::format!("slab {j} needs 2^{l} cells")));
        }
        let nb = 1u32 << base;
        for i in 0..nb {
            let u = (i as f64 / nb as f64, (i + 1) as f64 / nb as f64);
            if l <= lj {
                cells.push(Cell {
                    region: Region::Slab(j),
                    u,
                    y: (-1.0, 1.0),
                    refined: false,
                });
                continue;
            }
            let (kz, ky) = split_counts(profile, j, u, l - lj);
            for a in 0..kz {
                let ua = (u.0 + (u.1 - u.0) * a as f64 / kz as f64, u.0 + (u.1 - u.0) * (a + 1) as f64 / kz as f64);
                for b in 0..ky {
                    let yb = (-1.0 + 2.0 * b as f64 / ky as f64, -1.0 + 2.0 * (b + 1) as f64 / ky as f64);
                    cells.push(Cell {
                        region: Region::Slab(j),
                        u: ua,
                        y: yb,
                        refined: ky > 1,
                    });
                }
            }
        }
        Ok(())
    }

    /// Slab `j` cut into `k` cells along the axis; no tail.
    pub fn strip(profile: &CuspProfile, j: u32, k: u32) -> Result<Self> {
        if j < 2 || k < 1 {
            return Err(Error::GridRange(String::from("strip needs j >= 2 and k >= 1")));
        }
        let cells: Vec<Cell> = (0..k)
            .map(|i| Cell {
                region: Region::Slab(j),
                u: (i as f64 / k as f64, (i + 1) as f64 / k as f64),
                y: (-1.0, 1.0),
                refined: false,
            })
            .collect();
        let n = cells.len();
        Ok(Self {
            profile: profile.clone(),
            level: None,
            cells,
            slabs: vec![(j, 0, n)],
        })
    }

    /// Arbitrary planar cells; used for single-cell checks.
    pub fn from_plane_cells(profile: &CuspProfile, cells: Vec<Cell>) -> Self {
        Self {
            profile: profile.clone(),
            level: None,
            cells,
            slabs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Deepest slab index of the tail cell, if any.
    pub fn tail(&self) -> Option<u32> {
        self.cells.iter().find_map(|c| match c.region {
            Region::Tail(j) => Some(j),
            _ => None,
        })
    }

    /// Cells of slab `j`.
    pub fn slab_cells(&self, j: u32) -> &[Cell] {
        match self.slabs.binary_search_by_key(&j, |s| s.0) {
            Ok(i) => &self.cells[self.slabs[i].1..self.slabs[i].2],
            Err(_) => &[],
        }
    }

    /// Number of distinct axial intervals on slab `j`.
    pub fn axial_resolution(&self, j: u32) -> usize {
        let mut starts: Vec<f64> = self.slab_cells(j).iter().map(|c| c.u.0).collect();
        starts.sort_by(|a, b| a.total_cmp(b));
        starts.dedup();
        starts.len()
    }

    /// Checks that the cells of every slab tile `[0, 1] × [-1, 1]` without overlap.
    pub fn check_tiling(&self) -> Result<()> {
        for &(j, a, b) in &self.slabs {
            let mut cells: Vec<&Cell> = self.cells[a..b].iter().collect();
            cells.sort_by(|x, y| x.u.0.total_cmp(&y.u.0).then(x.y.0.total_cmp(&y.y.0)));
            let area: f64 = cells.iter().map(|c| (c.u.1 - c.u.0) * (c.y.1 - c.y.0)).sum();
            if (area - 2.0).abs() > 1e-12 {
                return Err(Error::GridRange(alloc::format!("slab {j} covers area {area} instead of 2")));
            }
            for (i, c) in cells.iter().enumerate() {
                if c.u.0 < 0.0 || c.u.1 > 1.0 || c.y.0 < -1.0 || c.y.1 > 1.0 {
                    return Err(Error::GridRange(alloc::format!("slab {j} has a cell outside the slab")));
                }
                for d in cells[i + 1..].iter().take_while(|d| d.u.0 < c.u.1) {
                    let du = c.u.1.min(d.u.1) - c.u.0.max(d.u.0);
                    let dy = c.y.1.min(d.y.1) - c.y.0.max(d.y.0);
                    if du > 1e-15 && dy > 1e-15 {
                        return Err(Error::GridRange(alloc::format!("slab {j} has overlapping cells")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Physical axial over cross-sectional width at the centre of every refined cell.
    pub fn refined_aspect_ratios(&self) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.refined)
            .map(|c| {
                let Region::Slab(j) = c.region else { return 1.0 };
                let lz = -(j as f64) * LN2;
                let zc = lz + ln(1.0 + 0.5 * (c.u.0 + c.u.1));
                exp(lz + ln(c.u.1 - c.u.0) - self.profile.ln_phi_at_ln(zc) - ln(c.y.1 - c.y.0))
            })
            .collect()
    }
}

/// Cell count that [`CuspMesh::from_schedule`] produces at every level, and the level closest to `n_target`.
pub fn level_for_target(schedule: &PartitionSchedule, n_target: usize) -> Result<(u32, u64)> {
    let mut best: Option<(f64, u32, u64)> = None;
    for level in 0..=MAX_LEVEL {
        let count = schedule.relevel(level)?.total_cells();
        let gap = (ln(count as f64) - ln(n_target as f64)).abs();
        if best.is_none_or(|b| gap < b.0 - 1e-12) {
            best = Some((gap, level, count));
        }
    }
    let (_, level, count) = best.unwrap();
    Ok((level, count))
}

/// Mesh from the schedule at the level whose cell count is closest to `n_target`.
pub fn build_mesh(profile: &CuspProfile, schedule: &PartitionSchedule, n_target: usize) -> Result<CuspMesh> {
    if n_target < MIN_TARGET {
        return Err(Error::InsufficientResolution(alloc::format!(
            "target cell count {n_target} is below {MIN_TARGET}"
        )));
    }
    let (level, count) = level_for_target(schedule, n_target)?;
    if (count as f64) < n_target as f64 / 4.0 || count as f64 > 4.0 * n_target as f64 {
        return Err(Error::InsufficientResolution(alloc::format!(
            "closest schedule level gives {count} cells for target {n_target}"
        )));
    }
    CuspMesh::from_schedule(profile, &schedule.relevel(level)?)
}

/// Piecewise polynomial on a mesh: monomial coefficients per cell in scaled local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    pub r: u32,
    pub coefficients: Vec<Vec<f64>>,
}

fn gl() -> GaussLegendre {
    GaussLegendre::new(QUAD_ORDER)
}

fn check_r(r: u32) -> Result<()> {
    if !(1..=MAX_R).contains(&r) {
        return Err(Error::InvalidParams(alloc::format!("need 1 <= r <= {MAX_R}, got {r}")));
    }
    Ok(())
}

/// Per-cell least-squares fit of total degree `<= r - 1` at the quadrature nodes.
pub fn project_local_poly<F: Fn(&Point) -> f64>(mesh: &CuspMesh, f: F, r: u32) -> Result<PiecewisePolynomial> {
    check_r(r)?;
    let gl = gl();
    let mut coefficients = Vec::with_capacity(mesh.len());
    for (i, cell) in mesh.cells.iter().enumerate() {
        let pr = CellProjector::new(&mesh.profile, cell, i, r, &gl)?;
        let vals: Vec<f64> = pr.nodes.iter().map(|n| f(&n.point)).collect();
        coefficients.push(pr.coefficients(&vals));
    }
    Ok(PiecewisePolynomial { r, coefficients })
}

impl PiecewisePolynomial {
    /// Values at the quadrature nodes of cell `i`, paired with the node points.
    pub fn node_values(&self, mesh: &CuspMesh, i: usize) -> Vec<(Point, f64)> {
        let gl = gl();
        let cell = &mesh.cells[i];
        let (nodes, _) = cell_nodes(&mesh.profile, cell, &gl);
        let (uc, hu, wc, hw) = basis_frame(&mesh.profile, cell);
        let mono = monomials(self.r);
        nodes
            .iter()
            .map(|n| {
                let x = (n.u - uc) / hu;
                let y = (n.w - wc) / hw;
                let v = mono
                    .iter()
                    .zip(&self.coefficients[i])
                    .map(|(&(a, b), c)| c * crate::math::powi(x, a as i32) * crate::math::powi(y, b as i32))
                    .sum();
                (n.point, v)
            })
            .collect()
    }

    /// `‖(f - P) v‖_q` over the mesh.
    pub fn error_norm<F: Fn(&Point) -> f64>(&self, mesh: &CuspMesh, f: F, q: f64, v: &WeightSpec) -> Result<f64> {
        let gl = gl();
        let mut total = f64::NEG_INFINITY;
        for (i, cell) in mesh.cells.iter().enumerate() {
            let pr = CellProjector::new(&mesh.profile, cell, i, self.r, &gl)?;
            let _ = (&pr.mono, pr.frame);
            let coef = &self.coefficients[i];
            let l = pr.ln_weighted(|k| f(&pr.nodes[k].point) - pr.eval(coef, k), q, v);
            total = ln_add(total, l);
        }
        Ok(exp(total / q))
    }
}

/// `‖f v‖_q` over the meshed domain by tensor Gauss–Legendre.
pub fn weighted_norm<F: Fn(&Point) -> f64>(mesh: &CuspMesh, f: F, q: f64, v: &WeightSpec) -> f64 {
    let gl = gl();
    let mut total = f64::NEG_INFINITY;
    for cell in &mesh.cells {
        let (nodes, ln_unit) = cell_nodes(&mesh.profile, cell, &gl);
        let lv: Vec<f64> = nodes.iter().map(|n| q * v.ln_value_at_ln(n.point.ln_z)).collect();
        let vref = lv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let acc: f64 = nodes
            .iter()
            .zip(&lv)
            .map(|(n, l)| n.weight * powf(f(&n.point).abs(), q) * exp(l - vref))
            .sum();
        if acc > 0.0 {
            total = ln_add(total, ln(acc) + vref + ln_unit);
        }
    }
    exp(total / q)
}

/// `‖f - P f‖` in `L_{q,v}` on every cell, as `ln` of the `q`-th power.
pub fn cellwise_ln_errors<F: Fn(&Point) -> f64>(mesh: &CuspMesh, f: F, r: u32, q: f64, v: &WeightSpec) -> Result<Vec<f64>> {
    check_r(r)?;
    let gl = gl();
    mesh.cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let pr = CellProjector::new(&mesh.profile, cell, i, r, &gl)?;
            let vals: Vec<f64> = pr.nodes.iter().map(|n| f(&n.point)).collect();
            Ok(pr.ln_error(&vals, q, v))
        })
        .collect()
}

/// `x^{m} (1 - x)^{m}` coefficients, lowest degree first.
fn bump_polynomial(m: u32) -> Vec<f64> {
    let mut c = vec![0.0; 2 * m as usize + 1];
    let mut binom = 1.0;
    for k in 0..=m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[(m + k) as usize] = sign * binom;
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    c
}

fn derivative(c: &[f64], times: u32) -> Vec<f64> {
    let mut c = c.to_vec();
    for _ in 0..times {
        c = c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
        if c.is_empty() {
            c.push(0.0);
        }
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// Composite Gauss–Legendre on `[0, 1]`: 16 panels of 16 nodes.
fn unit_rule() -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(16);
    let panels = 16;
    let mut out = Vec::with_capacity(256);
    for k in 0..panels {
        let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
        out.extend(gl.mapped(a, b));
    }
    out
}

/// `K (x (1 - x))^{r+1}` on `(0, 1)` with `‖ψ^{(r)}‖_{L_p(0,1)} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    pub r: u32,
    pub p: f64,
    pub scale: f64,
    coeffs: Vec<f64>,
    deriv: Vec<f64>,
}

impl BumpProfile {
    pub fn new(r: u32, p: f64) -> Result<Self> {
        check_r(r)?;
        let raw = bump_polynomial(r + 1);
        let d = derivative(&raw, r);
        let norm = powf(unit_rule().iter().map(|&(x, w)| w * powf(horner(&d, x).abs(), p)).sum::<f64>(), 1.0 / p);
        let scale = 1.0 / norm;
        Ok(Self {
            r,
            p,
            scale,
            coeffs: raw.iter().map(|c| c * scale).collect(),
            deriv: d.iter().map(|c| c * scale).collect(),
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        horner(&self.coeffs, x)
    }

    /// `r`-th derivative.
    pub fn top_derivative(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        horner(&self.deriv, x)
    }
}

/// `ψ_j(y, z) = c_j ψ(2^j z - 1)` for `j` in a range, with `‖∇^r ψ_j / g‖_p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionFamily {
    pub profile: BumpProfile,
    pub d: u32,
    pub j_lo: u32,
    pub j_hi: u32,
    /// `ln c_j` for `j_lo..=j_hi`.
    pub ln_c: Vec<f64>,
    cusp: CuspProfile,
}

/// `ln ∫_0^1 F(Z) exp(L(Z)) dZ` with the slab factor `L` pulled out at its maximum.
fn ln_slab_integral<F: Fn(f64) -> f64, L: Fn(f64) -> f64>(rule: &[(f64, f64)], f: F, l: L) -> f64 {
    let ls: Vec<f64> = rule.iter().map(|&(x, _)| l(x)).collect();
    let lmax = ls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let acc: f64 = rule.iter().zip(&ls).map(|(&(x, w), lv)| w * f(x) * exp(lv - lmax)).sum();
    if acc > 0.0 {
        ln(acc) + lmax
    } else {
        f64::NEG_INFINITY
    }
}

impl TestFunctionFamily {
    pub fn ln_c(&self, j: u32) -> Option<f64> {
        (self.j_lo..=self.j_hi).contains(&j).then(|| self.ln_c[(j - self.j_lo) as usize])
    }

    /// `ψ_j / c_j`.
    pub fn unit_bump(&self, j: u32, pt: &Point) -> f64 {
        if pt.slab == j {
            self.profile.value(pt.slab_u)
        } else {
            0.0
        }
    }

    /// `ψ_j` at a point.
    pub fn value(&self, j: u32, pt: &Point) -> f64 {
        match self.ln_c(j) {
            Some(lc) => exp(lc) * self.unit_bump(j, pt),
            None => 0.0,
        }
    }

    /// `ln ‖ψ_j / c_j‖_{q,v}^q` in the slab.
    fn ln_unit_norm_q(&self, j: u32, q: f64, v: &WeightSpec) -> f64 {
        let lz0 = -(j as f64) * LN2;
        let (d1, cusp) = ((self.d - 1) as f64, &self.cusp);
        ln_slab_integral(
            &unit_rule(),
            |x| powf(self.profile.value(x).abs(), q),
            |x| {
                let lz = lz0 + ln(1.0 + x);
                q * v.ln_value_at_ln(lz) + d1 * cusp.ln_phi_at_ln(lz)
            },
        ) + lz0
            + d1 * LN2
    }

    /// `‖ψ_j‖_{q,v}`.
    pub fn norm(&self, j: u32, q: f64, v: &WeightSpec) -> Option<f64> {
        self.ln_c(j).map(|lc| exp(lc + self.ln_unit_norm_q(j, q, v) / q))
    }

    /// `ln` of the asymptotic normalisation `g(2^-j) φ(2^-j)^{-(d-1)/p} 2^{j/p} 2^{-jr}`.
    pub fn ln_predicted_c(&self, j: u32, g: &WeightSpec) -> f64 {
        let lz = -(j as f64) * LN2;
        let p = self.profile.p;
        g.ln_value_at_ln(lz) - (self.d - 1) as f64 / p * self.cusp.ln_phi_at_ln(lz) - lz / p + self.profile.r as f64 * lz
    }

    /// Errors unless every slab of the family has at least four axial cells in `mesh`.
    pub fn check_resolution(&self, mesh: &CuspMesh) -> Result<()> {
        for j in self.j_lo..=self.j_hi {
            let res = mesh.axial_resolution(j);
            if res < 4 {
                return Err(Error::InsufficientResolution(alloc::format!(
                    "slab {j} has {res} axial cells, needs 4"
                )));
            }
        }
        Ok(())
    }
}

/// Normalises `ψ_j` for `j ∈ [j_lo, j_hi]` numerically.
pub fn bump_family(params: &ProblemParams, g: &WeightSpec, cusp: &CuspProfile, j_lo: u32, j_hi: u32) -> Result<TestFunctionFamily> {
    if j_lo < 2 || j_hi < j_lo {
        return Err(Error::GridRange(alloc::format!("need 2 <= j_lo <= j_hi, got [{j_lo}, {j_hi}]")));
    }
    let profile = BumpProfile::new(params.r, params.p)?;
    let rule = unit_rule();
    let (p, r, d1) = (params.p, params.r as f64, (params.d - 1) as f64);
    let ln_c = (j_lo..=j_hi)
        .map(|j| {
            let lz0 = -(j as f64) * LN2;
            // ∫ |2^{jr} ψ^{(r)}|^p g^{-p} (2φ)^{d-1} 2^{-j} dZ
            let li = ln_slab_integral(
                &rule,
                |x| powf(profile.top_derivative(x).abs(), p),
                |x| {
                    let lz = lz0 + ln(1.0 + x);
                    -p * g.ln_value_at_ln(lz) + d1 * cusp.ln_phi_at_ln(lz)
                },
            ) - p * r * lz0
                + lz0
                + d1 * LN2;
            -li / p
        })
        .collect();
    Ok(TestFunctionFamily {
        profile,
        d: params.d,
        j_lo,
        j_hi,
        ln_c,
        cusp: cusp.clone(),
    })
}

/// `‖ψ_j‖_{q,v} j^α / ρ(j)` over the family.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFlatness {
    /// `(j, ‖ψ_j‖_{q,v}, normalised ratio)`.
    pub rows: Vec<(u32, f64, f64)>,
    pub max_over_min: f64,
}

pub fn bump_flatness(family: &TestFunctionFamily, dq: &DerivedQuantities, q: f64, v: &WeightSpec) -> BumpFlatness {
    let rows: Vec<(u32, f64, f64)> = (family.j_lo..=family.j_hi)
        .map(|j| {
            let n = family.norm(j, q, v).unwrap_or(0.0);
            let jf = j as f64;
            (j, n, n * powf(jf, dq.alpha) / dq.rho.value(jf))
        })
        .collect();
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.2), b.max(r.2)));
    BumpFlatness {
        rows,
        max_over_min: hi / lo,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Cos,
    Sin,
    Exp,
}

/// Smooth probes; plane waves `F(a_z z + a_y y)` have `|∇^r f| = |a|^r |F^{(r)}|`.
#[derive(Debug, Clone, PartialEq)]
pub enum GlobalProbe {
    PlaneWave { a_z: f64, a_y: f64, wave: Wave },
    /// `Σ c z^a y^b` over `(a, b, c)`.
    Polynomial(Vec<(u32, u32, f64)>),
}

impl GlobalProbe {
    pub fn defaults() -> Vec<Self> {
        vec![
            Self::PlaneWave { a_z: 3.0, a_y: 2.0, wave: Wave::Cos },
            Self::PlaneWave { a_z: 5.0, a_y: -1.0, wave: Wave::Sin },
            Self::PlaneWave { a_z: 2.0, a_y: 3.0, wave: Wave::Exp },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Self::PlaneWave { a_z, a_y, wave } => {
                let w = match wave {
                    Wave::Cos => "cos",
                    Wave::Sin => "sin",
                    Wave::Exp => "exp",
                };
                alloc::format!("{w}({a_z}z{a_y:+}y)")
            }
            Self::Polynomial(_) => String::from("polynomial"),
        }
    }

    pub fn value(&self, pt: &Point) -> f64 {
        match self {
            Self::PlaneWave { a_z, a_y, wave } => {
                let x = a_z * pt.z + a_y * pt.y;
                match wave {
                    Wave::Cos => cos(x),
                    Wave::Sin => sin(x),
                    Wave::Exp => exp(x),
                }
            }
            Self::Polynomial(terms) => terms
                .iter()
                .map(|&(a, b, c)| c * crate::math::powi(pt.z, a as i32) * crate::math::powi(pt.y, b as i32))
                .sum(),
        }
    }

    /// `|∇^r f|`; zero for polynomials of lower degree.
    fn top_gradient(&self, pt: &Point, r: u32) -> f64 {
        match self {
            Self::PlaneWave { a_z, a_y, wave } => {
                let a = sqrt(a_z * a_z + a_y * a_y);
                let x = a_z * pt.z + a_y * pt.y;
                let shift = r as f64 * core::f64::consts::FRAC_PI_2;
                let f = match wave {
                    Wave::Cos => cos(x + shift),
                    Wave::Sin => sin(x + shift),
                    Wave::Exp => exp(x),
                };
                powf(a, r as f64) * f.abs()
            }
            Self::Polynomial(terms) => {
                if terms.iter().all(|&(a, b, _)| a + b < r) {
                    0.0
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// `‖∇^r f / g‖_p` over the cusp, slab by slab until the slabs stop contributing.
    pub fn sobolev_seminorm(&self, r: u32, p: f64, g: &WeightSpec, cusp: &CuspProfile) -> f64 {
        let gl = GaussLegendre::new(16);
        let mut total = f64::NEG_INFINITY;
        let mut quiet = 0;
        for j in 2..4000u32 {
            let cell = Cell {
                region: Region::Slab(j),
                u: (0.0, 1.0),
                y: (-1.0, 1.0),
                refined: false,
            };
            let (nodes, ln_unit) = cell_nodes(cusp, &cell, &gl);
            let lg: Vec<f64> = nodes.iter().map(|n| -p * g.ln_value_at_ln(n.point.ln_z)).collect();
            let gref = lg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let acc: f64 = nodes
                .iter()
                .zip(&lg)
                .map(|(n, l)| n.weight * powf(self.top_gradient(&n.point, r), p) * exp(l - gref))
                .sum();
            if acc.is_nan() {
                return f64::NAN;
            }
            let contrib = if acc > 0.0 { ln(acc) + gref + ln_unit } else { f64::NEG_INFINITY };
            let before = total;
            total = ln_add(total, contrib);
            quiet = if total - before < 1e-17 || contrib == f64::NEG_INFINITY { quiet + 1 } else { 0 };
            if quiet >= 8 {
                break;
            }
        }
        exp(total / p)
    }
}

/// Worst-case weighted errors on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayPoint {
    pub level: u32,
    pub cells: usize,
    /// Largest bump error and the slab it sits on.
    pub bump_error: Option<(u32, f64)>,
    /// Errors of the normalised global probes, in probe order.
    pub probe_errors: Vec<f64>,
}

impl DecayPoint {
    pub fn worst(&self) -> f64 {
        self.probe_errors
            .iter()
            .copied()
            .chain(self.bump_error.map(|b| b.1))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every error vanished to rounding: the probes lie in the approximation space.
    Exact,
    Agrees,
    Disagrees,
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Agrees => "agrees",
            Self::Disagrees => "disagrees",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub points: Vec<DecayPoint>,
    pub probe_names: Vec<String>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// `-θ*`.
    pub predicted: f64,
    /// Whether `ρ(n)` accompanies the predicted power.
    pub log_factor: bool,
    pub verdict: Verdict,
}

impl DecayReport {
    pub fn n_values(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.cells).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.worst()).collect()
    }
}

/// Tolerances for the verdict and the probe set.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    pub probes: Vec<GlobalProbe>,
    pub bumps: bool,
    pub slope_tol: f64,
    pub min_r2: f64,
    /// Errors below this fraction of the probe norm count as zero.
    pub exact_tol: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            probes: GlobalProbe::defaults(),
            bumps: true,
            slope_tol: 0.15,
            min_r2: 0.98,
            exact_tol: 1e-10,
        }
    }
}

/// Experiment inputs shared by every mesh: parameters, prediction, normalised probes.
#[derive(Debug, Clone)]
pub struct DecaySetup {
    pub params: ProblemParams,
    pub g: WeightSpec,
    pub v: WeightSpec,
    pub cusp: CuspProfile,
    pub dq: DerivedQuantities,
    pub theta_star: f64,
    pub log_factor: bool,
    pub schedule: PartitionSchedule,
    pub family: Option<TestFunctionFamily>,
    /// Probes with their scale: `1/‖∇^r f / g‖_p`, or `1/‖f‖_{q,v}` when the seminorm vanishes.
    pub probes: Vec<(GlobalProbe, f64)>,
    pub options: DecayOptions,
}

/// Deepest bump slab needed for meshes of up to `max_level`.
fn bump_depth(max_level: u32) -> u32 {
    (1u32 << (max_level + 1)) + TAIL_SLABS + 1
}

impl DecaySetup {
    /// Rejects parameters outside case 1, where the constructive scheme has no rate.
    pub fn new(params: &ProblemParams, g: &WeightSpec, v: &WeightSpec, cusp: &CuspProfile, max_level: u32, options: DecayOptions) -> Result<Self> {
        if params.d != 2 {
            return Err(Error::InvalidParams(String::from("experiments run in dimension 2")));
        }
        let dq = derive_quantities(params, g, v, cusp);
        let pred = width_exponent(&dq, params);
        if pred.regime != Regime::Case1 || !pred.covered {
            return Err(Error::OutsideCaseOne);
        }
        let theta_star = pred.theta_star.ok_or(Error::OutsideCaseOne)?;
        let log_factor = pred.sigma_star.is_some_and(|s| s > 0.0);
        let schedule = PartitionSchedule::auto_at_level(0, params.d, dq.delta, dq.alpha, None)?;
        let family = if options.bumps {
            Some(bump_family(params, g, cusp, 2, bump_depth(max_level))?)
        } else {
            None
        };
        let probes = options
            .probes
            .iter()
            .map(|pr| {
                let s = pr.sobolev_seminorm(params.r, params.p, g, cusp);
                let scale = if s > 0.0 && s.is_finite() {
                    1.0 / s
                } else {
                    // seminorm zero: measure relative to the probe's own size
                    let mesh = CuspMesh::from_schedule(cusp, &schedule)?;
                    1.0 / weighted_norm(&mesh, |pt| pr.value(pt), params.q, v)
                };
                Ok((pr.clone(), scale))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            g: g.clone(),
            v: v.clone(),
            cusp: cusp.clone(),
            dq,
            theta_star,
            log_factor,
            schedule,
            family,
            probes,
            options,
        })
    }

    /// Worst errors on the mesh at `level`.
    pub fn point(&self, level: u32) -> Result<DecayPoint> {
        let mesh = CuspMesh::from_schedule(&self.cusp, &self.schedule.relevel(level)?)?;
        self.point_on(&mesh)
    }

    pub fn point_on(&self, mesh: &CuspMesh) -> Result<DecayPoint> {
        let (r, q, v) = (self.params.r, self.params.q, &self.v);
        let gl = gl();
        let mut probe_ln = vec![f64::NEG_INFINITY; self.probes.len()];
        let mut bump_ln: Vec<(u32, f64)> = Vec::new();
        let mut current: Option<(u32, f64)> = None;
        for (i, cell) in mesh.cells.iter().enumerate() {
            let pr = CellProjector::new(&mesh.profile, cell, i, r, &gl)?;
            for (k, (probe, _)) in self.probes.iter().enumerate() {
                let vals: Vec<f64> = pr.nodes.iter().map(|n| probe.value(&n.point)).collect();
                probe_ln[k] = ln_add(probe_ln[k], pr.ln_error(&vals, q, v));
            }
            let Some(fam) = &self.family else { continue };
            match cell.region {
                Region::Slab(j) if j <= fam.j_hi => {
                    let vals: Vec<f64> = pr.nodes.iter().map(|n| fam.unit_bump(j, &n.point)).collect();
                    let e = pr.ln_error(&vals, q, v);
                    current = match current {
                        Some((cj, acc)) if cj == j => Some((j, ln_add(acc, e))),
                        Some(done) => {
                            bump_ln.push(done);
                            Some((j, e))
                        }
                        None => Some((j, e)),
                    };
                }
                Region::Tail(deep) => {
                    for j in deep + 1..=(deep + TAIL_SLABS).min(fam.j_hi) {
                        let vals: Vec<f64> = pr.nodes.iter().map(|n| fam.unit_bump(j, &n.point)).collect();
                        bump_ln.push((j, pr.ln_error(&vals, q, v)));
                    }
                }
                _ => {}
            }
        }
        if let Some(done) = current {
            bump_ln.push(done);
        }
        let bump_error = self.family.as_ref().map(|fam| {
            let mut worst = (0u32, 0.0f64);
            let mut seen = vec![false; (fam.j_hi - fam.j_lo + 1) as usize];
            for &(j, l) in &bump_ln {
                seen[(j - fam.j_lo) as usize] = true;
                let e = exp(fam.ln_c(j).unwrap() + l / q);
                if e > worst.1 {
                    worst = (j, e);
                }
            }
            // bumps below the integrated part of the tail are not seen by any projection
            for j in fam.j_lo..=fam.j_hi {
                if !seen[(j - fam.j_lo) as usize] {
                    let e = fam.norm(j, q, v).unwrap_or(0.0);
                    if e > worst.1 {
                        worst = (j, e);
                    }
                }
            }
            worst
        });
        let probe_errors = probe_ln
            .iter()
            .zip(&self.probes)
            .map(|(l, (_, s))| s * exp(l / q))
            .collect();
        Ok(DecayPoint {
            level: mesh.level.unwrap_or(0),
            cells: mesh.len(),
            bump_error,
            probe_errors,
        })
    }

    /// Distinct levels whose cell counts are closest to the targets, ascending.
    pub fn levels_for(&self, n_list: &[usize]) -> Result<Vec<u32>> {
        let mut levels = Vec::new();
        for &n in n_list {
            if n < MIN_TARGET {
                return Err(Error::InsufficientResolution(alloc::format!("target {n} is below {MIN_TARGET}")));
            }
            levels.push(level_for_target(&self.schedule, n)?.0);
        }
        levels.sort_unstable();
        levels.dedup();
        Ok(levels)
    }

    /// Fits the slope and issues the verdict.
    pub fn summarize(&self, mut points: Vec<DecayPoint>) -> DecayReport {
        points.sort_by_key(|p| p.cells);
        let predicted = -self.theta_star;
        let errs: Vec<f64> = points.iter().map(|p| p.worst()).collect();
        let exact = errs.iter().all(|&e| e <= self.options.exact_tol);
        let xs: Vec<f64> = points.iter().map(|p| p.cells as f64).collect();
        let fit = if exact { None } else { fit_loglog(&xs, &errs).ok() };
        let verdict = match (exact, fit) {
            (true, _) => Verdict::Exact,
            (false, Some(f)) if (f.slope - predicted).abs() <= self.options.slope_tol && f.r2 >= self.options.min_r2 => Verdict::Agrees,
            _ => Verdict::Disagrees,
        };
        let mut names = Vec::new();
        if self.family.is_some() {
            names.push(String::from("bumps"));
        }
        names.extend(self.probes.iter().map(|(p, _)| p.name()));
        DecayReport {
            points,
            probe_names: names,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            r2: fit.map(|f| f.r2),
            predicted,
            log_factor: self.log_factor,
            verdict,
        }
    }
}

/// Worst weighted error against cell count over meshes matched to `n_list`, with a log-log slope fit.
pub fn decay_experiment(params: &ProblemParams, g: &WeightSpec, v: &WeightSpec, cusp: &CuspProfile, n_list: &[usize]) -> Result<DecayReport> {
    decay_experiment_with(params, g, v, cusp, n_list, DecayOptions::default())
}

pub fn decay_experiment_with(
    params: &ProblemParams,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
    n_list: &[usize],
    options: DecayOptions,
) -> Result<DecayReport> {
    let (setup, levels) = decay_setup(params, g, v, cusp, n_list, options)?;
    let points = levels.iter().map(|&l| setup.point(l)).collect::<Result<Vec<_>>>()?;
    Ok(setup.summarize(points))
}

/// Shared inputs sized for the deepest target, and the mesh levels matched to `n_list`.
///
/// Levels are independent; callers may evaluate [`DecaySetup::point`] in any order.
pub fn decay_setup(
    params: &ProblemParams,
    g: &WeightSpec,
    v: &WeightSpec,
    cusp: &CuspProfile,
    n_list: &[usize],
    options: DecayOptions,
) -> Result<(DecaySetup, Vec<u32>)> {
    if n_list.is_empty() {
        return Err(Error::InsufficientResolution(String::from("no target cell counts")));
    }
    let dq = derive_quantities(params, g, v, cusp);
    let sched = PartitionSchedule::auto_at_level(0, params.d.max(1), dq.delta, dq.alpha, None)?;
    let mut max_level = 0;
    for &n in n_list {
        max_level = max_level.max(level_for_target(&sched, n.max(MIN_TARGET))?.0);
    }
    let setup = DecaySetup::new(params, g, v, cusp, max_level, options)?;
    let levels = setup.levels_for(n_list)?;
    Ok((setup, levels))
}
