//! Volume inclusions (ruled between two NURBS surfaces) and linear
//! inclusions (rock bolts), their stress grids and the integrals of the
//! initial-stress kernel that feed the `B0` matrices.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::kernels::{kernel_e, ElasticConstants, Matrix3x6};
use crate::nurbs::{NurbsSurface, Vec3};
use crate::quadrature::{octree_points, singular_box_points, Box3, QuadratureConfig};

/// Interpolation order of a stress grid direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridDegree {
    /// One node in the middle of each cell.
    Constant,
    Linear,
    Quadratic,
}

impl GridDegree {
    fn nodes_per_cell(self) -> usize {
        match self {
            GridDegree::Constant => 1,
            GridDegree::Linear => 2,
            GridDegree::Quadratic => 3,
        }
    }
}

/// Lagrange interpolation along one local direction, piecewise over equal
/// cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridAxis {
    pub degree: GridDegree,
    pub cells: usize,
}

pub type AxisValues = SmallVec<[(usize, f64, f64); 3]>;

fn lagrange_1d(degree: GridDegree, z: f64) -> ([f64; 3], [f64; 3]) {
    match degree {
        GridDegree::Constant => ([1.0, 0.0, 0.0], [0.0; 3]),
        GridDegree::Linear => ([1.0 - z, z, 0.0], [-1.0, 1.0, 0.0]),
        GridDegree::Quadratic => (
            [2.0 * (z - 0.5) * (z - 1.0), -4.0 * z * (z - 1.0), 2.0 * z * (z - 0.5)],
            [4.0 * z - 3.0, 4.0 - 8.0 * z, 4.0 * z - 1.0],
        ),
    }
}

impl GridAxis {
    pub fn new(degree: GridDegree, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Validation("grid direction needs at least one cell".into()));
        }
        Ok(Self { degree, cells })
    }

    pub fn n_nodes(&self) -> usize {
        match self.degree {
            GridDegree::Constant => self.cells,
            GridDegree::Linear => self.cells + 1,
            GridDegree::Quadratic => 2 * self.cells + 1,
        }
    }

    pub fn node_coord(&self, i: usize) -> f64 {
        match self.degree {
            GridDegree::Constant => (i as f64 + 0.5) / self.cells as f64,
            GridDegree::Linear => i as f64 / self.cells as f64,
            GridDegree::Quadratic => i as f64 / (2 * self.cells) as f64,
        }
    }

    fn cell_of(&self, s: f64) -> usize {
        ((s * self.cells as f64).floor().max(0.0) as usize).min(self.cells - 1)
    }

    fn first_node(&self, cell: usize) -> usize {
        match self.degree {
            GridDegree::Constant | GridDegree::Linear => cell,
            GridDegree::Quadratic => 2 * cell,
        }
    }

    /// Values and `d/ds` of the functions of a given cell at `s`.
    pub fn shape_in_cell(&self, cell: usize, s: f64) -> AxisValues {
        let n = self.cells as f64;
        let z = s * n - cell as f64;
        let (v, d) = lagrange_1d(self.degree, z);
        let first = self.first_node(cell);
        (0..self.degree.nodes_per_cell()).map(|a| (first + a, v[a], d[a] * n)).collect()
    }

    /// Nonzero functions at `s` with their derivatives.
    pub fn shape(&self, s: f64) -> Result<AxisValues> {
        if !(-1e-12..=1.0 + 1e-12).contains(&s) {
            return Err(Error::ParameterDomain(s));
        }
        Ok(self.shape_in_cell(self.cell_of(s), s.clamp(0.0, 1.0)))
    }

    /// Derivatives of all functions at node `i`, averaged over the cells
    /// that share the node.
    pub fn node_derivative(&self, i: usize) -> AxisValues {
        if self.degree == GridDegree::Constant {
            return AxisValues::new();
        }
        let s = self.node_coord(i);
        let cells: SmallVec<[usize; 2]> = (0..self.cells)
            .filter(|&c| {
                let (a, b) = (c as f64 / self.cells as f64, (c + 1) as f64 / self.cells as f64);
                s >= a - 1e-12 && s <= b + 1e-12
            })
            .collect();
        let mut out = AxisValues::new();
        for &c in &cells {
            for (node, _, d) in self.shape_in_cell(c, s) {
                let w = d / cells.len() as f64;
                match out.iter_mut().find(|e| e.0 == node) {
                    Some(e) => e.2 += w,
                    None => out.push((node, 0.0, w)),
                }
            }
        }
        out
    }
}

/// Volume inclusion `x(s,t,r) = (1 - r) x_I(s,t) + r x_II(s,t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralInclusion {
    pub bottom: NurbsSurface,
    pub top: NurbsSurface,
    /// Stress grid in (s, t, r).
    pub grid: [GridAxis; 3],
}

/// Position, Jacobi matrix (columns `∂x/∂s, ∂x/∂t, ∂x/∂r`) and determinant.
#[derive(Debug, Clone, Copy)]
pub struct VolumePoint {
    pub x: Vec3,
    pub jacobi: Matrix3<f64>,
    pub det: f64,
}

/// Shape function of a stress grid node with its local gradient.
pub type GridShape = SmallVec<[(usize, f64, [f64; 3]); 27]>;

impl GeneralInclusion {
    pub fn new(bottom: NurbsSurface, top: NurbsSurface, grid: [GridAxis; 3]) -> Result<Self> {
        let incl = Self { bottom, top, grid };
        for k in 0..incl.n_nodes() {
            let p = incl.map(&incl.node_local(k))?;
            if !(p.det > 0.0) {
                return Err(Error::DegenerateInclusion(format!("det J = {:e} at grid node {k}", p.det)));
            }
        }
        Ok(incl)
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.iter().map(|a| a.n_nodes()).product()
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.grid[0].n_nodes() * (j + self.grid[1].n_nodes() * k)
    }

    pub fn node_ijk(&self, n: usize) -> [usize; 3] {
        let (n0, n1) = (self.grid[0].n_nodes(), self.grid[1].n_nodes());
        [n % n0, (n / n0) % n1, n / (n0 * n1)]
    }

    pub fn node_local(&self, n: usize) -> [f64; 3] {
        let ijk = self.node_ijk(n);
        [0, 1, 2].map(|d| self.grid[d].node_coord(ijk[d]))
    }

    pub fn map(&self, s: &[f64; 3]) -> Result<VolumePoint> {
        let a = self.bottom.eval(s[0], s[1])?;
        let b = self.top.eval(s[0], s[1])?;
        let r = s[2];
        let x = a.x * (1.0 - r) + b.x * r;
        let jacobi = Matrix3::from_columns(&[a.du * (1.0 - r) + b.du * r, a.dv * (1.0 - r) + b.dv * r, b.x - a.x]);
        Ok(VolumePoint { x, jacobi, det: jacobi.determinant() })
    }

    pub fn point(&self, s: &[f64; 3]) -> Vec3 {
        let a = self.bottom.point(s[0], s[1]).expect("local coordinate in range");
        let b = self.top.point(s[0], s[1]).expect("local coordinate in range");
        a * (1.0 - s[2]) + b * s[2]
    }

    /// Tensor-product stress grid functions at a local coordinate.
    pub fn shape(&self, s: &[f64; 3]) -> Result<GridShape> {
        let a = [self.grid[0].shape(s[0])?, self.grid[1].shape(s[1])?, self.grid[2].shape(s[2])?];
        let mut out = GridShape::new();
        for &(k, lk, dk) in &a[2] {
            for &(j, lj, dj) in &a[1] {
                for &(i, li, di) in &a[0] {
                    out.push((self.node_index(i, j, k), li * lj * lk, [di * lj * lk, li * dj * lk, li * lj * dk]));
                }
            }
        }
        Ok(out)
    }

    /// Local coordinates of `y` if it lies inside the inclusion or on its
    /// boundary.
    pub fn locate(&self, y: &Vec3) -> Option<[f64; 3]> {
        let scale = 1.0 + y.norm();
        let n = 6;
        let mut best = (f64::INFINITY, [0.5; 3]);
        for c in 0..=n {
            for b in 0..=n {
                for a in 0..=n {
                    let s = [a as f64 / n as f64, b as f64 / n as f64, c as f64 / n as f64];
                    let d = (self.point(&s) - y).norm();
                    if d < best.0 {
                        best = (d, s);
                    }
                }
            }
        }
        let mut s = best.1;
        for _ in 0..50 {
            let p = self.map(&s).ok()?;
            let step = p.jacobi.lu().solve(&(p.x - y))?;
            for d in 0..3 {
                s[d] = (s[d] - step[d]).clamp(0.0, 1.0);
            }
            if step.norm() < 1e-15 {
                break;
            }
        }
        ((self.point(&s) - y).norm() < 1e-10 * scale).then_some(s)
    }

    fn cell_box(&self, c: [usize; 3]) -> Box3 {
        let lo = [0, 1, 2].map(|d| c[d] as f64 / self.grid[d].cells as f64);
        let hi = [0, 1, 2].map(|d| (c[d] + 1) as f64 / self.grid[d].cells as f64);
        Box3::new(lo, hi)
    }

    /// Adds `∫ E(y, x) M_j(x) dV` for every grid node `j` into `out`
    /// (indexed by node). `local` is the position of `y` in local
    /// coordinates when it lies in the closed inclusion.
    pub fn integrate_e(
        &self,
        y: &Vec3,
        local: Option<[f64; 3]>,
        k: &ElasticConstants,
        cfg: &QuadratureConfig,
        out: &mut [Matrix3x6],
    ) -> Result<()> {
        let map = |s: &[f64; 3]| self.point(s);
        for c2 in 0..self.grid[2].cells {
            for c1 in 0..self.grid[1].cells {
                for c0 in 0..self.grid[0].cells {
                    let cell = [c0, c1, c2];
                    let bx = self.cell_box(cell);
                    let pts = match local {
                        Some(l) if bx.contains(&l) => singular_box_points(&map, &bx, &l, cfg)?,
                        _ => octree_points(&map, &bx, y, cfg)?,
                    };
                    let axes = [0, 1, 2].map(|d| self.grid[d]);
                    for q in pts {
                        let p = self.map(&q.s)?;
                        let e = kernel_e(y, &p.x, k)? * (q.w * p.det.abs());
                        let v = [0, 1, 2].map(|d| axes[d].shape_in_cell(cell[d], q.s[d]));
                        for &(kk, lk, _) in &v[2] {
                            for &(j, lj, _) in &v[1] {
                                for &(i, li, _) in &v[0] {
                                    out[self.node_index(i, j, kk)] += e * (li * lj * lk);
                                }
                            }
                        }
                        if e.iter().any(|x| !x.is_finite()) {
                            return Err(Error::Integration(format!("non-finite volume integrand in cell {cell:?}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rock bolt: straight segments between grid nodes, circular cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInclusion {
    pub axis: Vec<Vec3>,
    pub radius: f64,
    pub young: f64,
}

/// Local frame of a bolt segment seen from a source point. The columns of
/// `t` are the local axes; the source sits at `(0, y_loc, z_loc)`.
#[derive(Debug, Clone, Copy)]
pub struct BoltFrame {
    pub t: Matrix3<f64>,
    pub y_loc: f64,
    pub z_loc: f64,
    pub length: f64,
}

/// Sources closer to the axis than this fraction of the segment length use
/// the on-axis formulas.
pub const ON_AXIS: f64 = 1e-6;

pub fn bolt_local_frame(a: &Vec3, b: &Vec3, y: &Vec3) -> Result<BoltFrame> {
    let d = b - a;
    let length = d.norm();
    if !(length > 0.0) {
        return Err(Error::DegenerateInclusion("zero-length bolt segment".into()));
    }
    let vz = d / length;
    let rel = y - a;
    let z_loc = rel.dot(&vz);
    let perp = rel - vz * z_loc;
    let (vx, y_loc) = if perp.norm() > ON_AXIS * length {
        (rel.cross(&vz).normalize(), perp.norm())
    } else {
        let mut vx = Vec3::y().cross(&vz);
        if vx.norm() < 1e-8 {
            vx = Vec3::z().cross(&vz);
        }
        (vx.normalize(), 0.0)
    };
    let vy = vz.cross(&vx);
    Ok(BoltFrame { t: Matrix3::from_columns(&[vx, vy, vz]), y_loc, z_loc, length })
}

/// Stable `r0 - z` for `r0 = sqrt(y² + z²)`.
fn minus_root(y: f64, z: f64, r0: f64) -> f64 {
    if z > 0.0 {
        y * y / (r0 + z)
    } else {
        r0 - z
    }
}

/// Closed-form `∫ E'(y, x(z')) M_l(z') πR² dz'` over a straight bolt segment
/// of length `h` for a source at local `(0, yt, zt)` away from the segment.
/// `l = 1` weights with `z'/h`, `l = 2` with `1 - z'/h`.
pub fn bolt_regular_analytic(
    h: f64,
    radius: f64,
    yt: f64,
    zt: f64,
    k: &ElasticConstants,
    l: usize,
) -> Result<Matrix3x6> {
    if !(h > 0.0 && radius > 0.0) {
        return Err(Error::DegenerateInclusion("bolt segment length and radius must be positive".into()));
    }
    if !(l == 1 || l == 2) {
        return Err(Error::Validation(format!("bolt shape index {l} not in 1..=2")));
    }
    let c = k.c();
    let c3 = k.c3();
    let p = c * PI * radius * radius;
    let mut e = Matrix3x6::zeros();
    if yt.abs() < ON_AXIS * h {
        if zt > -ON_AXIS * h && zt < h * (1.0 + ON_AXIS) {
            return Err(Error::Singularity(0.0));
        }
        let s = if zt < 0.0 { 1.0 } else { -1.0 };
        let dz = h - zt;
        let i0 = -1.0 / zt - 1.0 / dz;
        let i1 = (dz / zt).abs().ln() - zt / dz - 1.0;
        let im = if l == 1 { i1 / h } else { i0 - i1 / h };
        let base = PI * radius * radius * s * im;
        e[(0, 5)] = -2.0 * c * c3 * base;
        e[(1, 4)] = e[(0, 5)];
        e[(2, 0)] = c * base;
        e[(2, 1)] = c * base;
        e[(2, 2)] = -2.0 * c * (1.0 + c3) * base;
        return Ok(e);
    }
    let (y2, dz) = (yt * yt, h - zt);
    let rc0 = (y2 + zt * zt).sqrt();
    let rc1 = (y2 + dz * dz).sqrt();
    // ln((rc0 - zt) / (rc1 + dz)), both factors evaluated without cancellation
    let lg = (minus_root(yt, zt, rc0) / minus_root(yt, -dz, rc1)).ln();
    let (rc0_3, rc1_3) = (rc0.powi(3), rc1.powi(3));
    if l == 1 {
        e[(0, 3)] = 2.0 * p * c3 / (h * yt) * (rc0 + (zt * dz - y2) / rc1);
        e[(0, 5)] = 2.0 * p * c3 / h * (h / rc1 + lg);
        e[(1, 0)] = p / (h * yt) * ((y2 - zt * dz) / rc1 - rc0);
        e[(1, 1)] = p / (h * yt)
            * ((zt * zt + 2.0 * c3 * rc0 * rc0) / rc0
                + (dz * (zt * dz * dz + (h + zt) * y2) - 2.0 * c3 * rc1 * rc1 * (y2 - zt * dz)) / rc1_3);
        e[(1, 2)] = p * yt / h * (1.0 / rc0 - (rc0 * rc0 + 2.0 * h * h - 3.0 * h * zt) / rc1_3);
        e[(1, 4)] = 2.0 * p / h
            * (h * ((c3 - 1.0) * h * (dz - zt) + c3 * rc0 * rc0 - zt * zt) / rc1_3
                + zt * (1.0 / rc1 - 1.0 / rc0)
                + c3 * lg);
        e[(2, 0)] = p / h * (-lg - h / rc1);
        e[(2, 1)] = p / h * (-zt / rc0 - dz * (2.0 * h * dz - h * zt + rc0 * rc0) / rc1_3 - lg);
        e[(2, 2)] = p / h
            * (h / rc1_3
                * ((3.0 + 2.0 * c3) * h * h + 2.0 * (1.0 + c3) * y2 - 2.0 * (3.0 + 2.0 * c3) * h * zt
                    + (3.0 + 2.0 * c3) * zt * zt)
                + zt * (1.0 / rc0 - 1.0 / rc1)
                + 2.0 * (1.0 + c3) * lg);
        e[(2, 4)] = 2.0 * p / (h * yt)
            * (((2.0 + c3) * y2 + (1.0 + c3) * zt * zt) / rc0 + (1.0 + c3) * zt * dz.powi(3) / rc1_3
                - ((2.0 + c3) * y2 * y2 + y2 * dz * ((3.0 + c3) * dz - c3 * zt)) / rc1_3);
    } else {
        e[(0, 3)] = 2.0 * p * c3 / (h * yt) * (rc1 + (zt * dz - y2) / rc0);
        e[(0, 5)] = -2.0 * p * c3 / h * (h / rc0 + lg);
        e[(1, 0)] = p / (h * yt) * ((y2 - zt * dz) / rc0 - rc1);
        e[(1, 1)] = p / (h * yt)
            * (((1.0 + 2.0 * c3) * h * h + zt * zt - 2.0 * h * zt * (1.0 + 2.0 * c3) + 2.0 * c3 * rc0 * rc0) / rc1
                + (zt * (rc0 * rc0 * dz + h * y2) - 2.0 * c3 * rc0 * rc0 * (y2 - zt * dz)) / rc0_3);
        e[(1, 2)] = p * yt / h * (1.0 / rc1 - (rc0 * rc0 + h * zt) / rc0_3);
        e[(1, 4)] = 2.0 * p / h * ((zt - c3 * h) / rc0 - h * y2 / rc0_3 + dz / rc1 - c3 * lg);
        e[(2, 0)] = p / h * (lg + h / rc0);
        e[(2, 1)] = p / h * (dz / rc1 + zt * (h * zt + rc0 * rc0) / rc0_3 + lg);
        e[(2, 2)] = p / h * (h * y2 / rc0_3 - (2.0 * (1.0 + c3) * h + zt) / rc0 - dz / rc1 - 2.0 * (1.0 + c3) * lg);
        e[(2, 4)] = 2.0 * p / (h * yt)
            * (((1.0 + c3) * rc0 * rc0 + y2 + (1.0 + c3) * (h * h - 2.0 * h * zt)) / rc1
                + (1.0 + c3) * zt.powi(3) * dz / rc0_3
                - ((2.0 + c3) * y2 * y2 - y2 * zt * (c3 * dz - (3.0 + c3) * zt)) / rc0_3);
    }
    Ok(e)
}

/// End of a bolt segment at which the source sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentEnd {
    /// `z' = 0`, the segment lies above the source.
    Bottom,
    /// `z' = H`, the segment lies below the source.
    Top,
}

/// Closed-form volume integral for a source at an end of the segment axis.
/// `l = 1` is the shape function that vanishes at the source, `l = 2` the
/// one equal to one there.
pub fn bolt_singular_analytic(
    h: f64,
    radius: f64,
    k: &ElasticConstants,
    l: usize,
    end: SegmentEnd,
) -> Result<Matrix3x6> {
    if !(h > 0.0 && radius > 0.0) {
        return Err(Error::DegenerateInclusion("bolt segment length and radius must be positive".into()));
    }
    let c = k.c();
    let c3 = k.c3();
    let th = (radius / h).atan();
    let (cs, sn) = (th.cos(), th.sin());
    let c3t = (3.0 * th).cos();
    let lg = ((0.5 * th).sin() / (0.5 * th).cos()).ln();
    let (r, r2, h2) = (radius, radius * radius, h * h);
    let (a, b, d) = match l {
        1 => (
            c * PI / (4.0 * h)
                * (h2 * (8.0 + 8.0 * c3 - (9.0 + 8.0 * c3) * cs + c3t)
                    + r2 * ((3.0 - 8.0 * c3) * cs + c3t - 8.0 * c3 * lg)),
            c * PI / (8.0 * h) * (r2 * (11.0 * cs + c3t + 8.0 * lg) - 4.0 * h2 * cs * sn * sn),
            -c * PI * r2 / (4.0 * h) * ((11.0 + 8.0 * c3) * cs + c3t + 8.0 * (1.0 + c3) * lg)
                + c * PI * h * (1.0 + 4.0 * c3 + 2.0 * cs + (2.0 * th).cos()) * (0.5 * th).sin().powi(2),
        ),
        2 => (
            c * PI / (4.0 * h)
                * (h2 * (8.0 + 8.0 * c3 - (9.0 + 8.0 * c3) * cs + c3t)
                    + r * ((8.0 * c3 - 3.0) * r * cs - r * c3t
                        + 8.0 * (h + 2.0 * c3 * h + c3 * r * lg)
                        + 4.0 * h * (-1.0 - 4.0 * c3 + (2.0 * th).cos()) * sn)),
            -c * PI * h / 2.0 * cs * sn * sn
                - c * PI * r / (8.0 * h)
                    * (r * (11.0 * cs + c3t + 8.0 * lg) - 2.0 * h * (5.0 * sn + (3.0 * th).sin() - 4.0)),
            c * PI * h * (1.0 + 4.0 * c3 + 2.0 * cs + (2.0 * th).cos()) * (0.5 * th).sin().powi(2)
                + c * PI * r / (4.0 * h)
                    * ((11.0 + 8.0 * c3) * r * cs + r * c3t + 8.0 * (h + 2.0 * c3 * h + (1.0 + c3) * r * lg)
                        - 4.0 * h * (3.0 + 4.0 * c3 + (2.0 * th).cos()) * sn),
        ),
        _ => return Err(Error::Validation(format!("bolt shape index {l} not in 1..=2"))),
    };
    let sg = match end {
        SegmentEnd::Top => 1.0,
        SegmentEnd::Bottom => -1.0,
    };
    let mut e = Matrix3x6::zeros();
    e[(0, 5)] = sg * a;
    e[(1, 4)] = sg * a;
    e[(2, 0)] = sg * b;
    e[(2, 1)] = sg * b;
    e[(2, 2)] = sg * d;
    Ok(e)
}

impl LinearInclusion {
    pub fn new(axis: Vec<Vec3>, radius: f64, young: f64) -> Result<Self> {
        if axis.len() < 2 {
            return Err(Error::Validation("a bolt needs at least two axis points".into()));
        }
        if !(radius > 0.0 && young > 0.0) {
            return Err(Error::Validation("bolt radius and modulus must be positive".into()));
        }
        if axis.windows(2).any(|w| (w[1] - w[0]).norm() == 0.0) {
            return Err(Error::DegenerateInclusion("zero-length bolt segment".into()));
        }
        Ok(Self { axis, radius, young })
    }

    pub fn n_nodes(&self) -> usize {
        self.axis.len()
    }

    pub fn segment_length(&self, s: usize) -> f64 {
        (self.axis[s + 1] - self.axis[s]).norm()
    }

    pub fn direction(&self, s: usize) -> Vec3 {
        (self.axis[s + 1] - self.axis[s]).normalize()
    }

    /// Shortest distance from `p` to the bolt axis.
    pub fn axis_distance(&self, p: &Vec3) -> f64 {
        self.axis
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                let t = ((p - w[0]).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
                (p - (w[0] + d * t)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Adds the global blocks `T ΔE'` for every node into `out`. Column 2
    /// multiplies the axial initial stress at the node; the others are zero.
    pub fn integrate_e(&self, y: &Vec3, k: &ElasticConstants, out: &mut [Matrix3x6]) -> Result<()> {
        for s in 0..self.axis.len() - 1 {
            let (a, b) = (self.axis[s], self.axis[s + 1]);
            let f = bolt_local_frame(&a, &b, y)?;
            let h = f.length;
            // blocks in the segment frame for the start and end nodes
            let (start, end) = if f.y_loc == 0.0 && f.z_loc.abs() <= ON_AXIS * h {
                (
                    bolt_singular_analytic(h, self.radius, k, 2, SegmentEnd::Bottom)?,
                    bolt_singular_analytic(h, self.radius, k, 1, SegmentEnd::Bottom)?,
                )
            } else if f.y_loc == 0.0 && (f.z_loc - h).abs() <= ON_AXIS * h {
                (
                    bolt_singular_analytic(h, self.radius, k, 1, SegmentEnd::Top)?,
                    bolt_singular_analytic(h, self.radius, k, 2, SegmentEnd::Top)?,
                )
            } else {
                (
                    bolt_regular_analytic(h, self.radius, f.y_loc, f.z_loc, k, 2)?,
                    bolt_regular_analytic(h, self.radius, f.y_loc, f.z_loc, k, 1)?,
                )
            };
            out[s] += axial_block(&f.t, &start);
            out[s + 1] += axial_block(&f.t, &end);
        }
        Ok(())
    }
}

/// Global block of a bolt node: only the axial Voigt column is kept because
/// a bolt carries no other initial stress.
fn axial_block(t: &Matrix3<f64>, local: &Matrix3x6) -> Matrix3x6 {
    let mut out = Matrix3x6::zeros();
    out.set_column(2, &(t * local.column(2)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_axis_node_layout() {
        let a = GridAxis::new(GridDegree::Quadratic, 2).unwrap();
        assert_eq!(a.n_nodes(), 5);
        assert!((a.node_coord(3) - 0.75).abs() < 1e-15);
    }
}
