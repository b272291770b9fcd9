//! Inclusion grid points, their displacement rows and the strain operator
//! `B̂` that maps grid displacements to Voigt strains.

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::assembly::{BoundaryMesh, Occurrence};
use crate::error::{Error, Result};
use crate::inclusion::{GeneralInclusion, GridDegree, LinearInclusion};
use crate::kernels::{isotropic_stiffness, ElasticConstants, Matrix3x6};
use crate::nurbs::Vec3;
use crate::quadrature::{gauss_rule, QuadratureConfig};
use crate::solver::{MohrCoulomb, PointModel};

/// Inclusion material; `yield_` enables Mohr-Coulomb plasticity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    #[serde(default, rename = "yield", skip_serializing_if = "Option::is_none")]
    pub yield_: Option<MohrCoulomb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inclusion {
    General { geometry: GeneralInclusion, material: Material },
    Linear(LinearInclusion),
}

impl Inclusion {
    pub fn n_nodes(&self) -> usize {
        match self {
            Inclusion::General { geometry, .. } => geometry.n_nodes(),
            Inclusion::Linear(b) => b.n_nodes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub inclusion: usize,
    pub node: usize,
    pub position: Vec3,
    /// Local coordinates; bolts use `[node, 0, 0]`.
    pub local: [f64; 3],
    /// Boundary location when the point lies on the excavation surface.
    pub boundary: Option<Occurrence>,
}

/// Grid points of all inclusions in column order.
pub fn build_grid(inclusions: &[Inclusion], mesh: &BoundaryMesh) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for (ii, inc) in inclusions.iter().enumerate() {
        for node in 0..inc.n_nodes() {
            let (position, local) = match inc {
                Inclusion::General { geometry, .. } => {
                    let l = geometry.node_local(node);
                    (geometry.point(&l), l)
                }
                Inclusion::Linear(b) => (b.axis[node], [node as f64, 0.0, 0.0]),
            };
            let boundary = mesh.locate(&position);
            out.push(GridPoint { inclusion: ii, node, position, local, boundary });
        }
    }
    out
}

/// First grid column of every inclusion.
pub fn offsets(inclusions: &[Inclusion]) -> Vec<usize> {
    let mut o = Vec::with_capacity(inclusions.len());
    let mut acc = 0;
    for inc in inclusions {
        o.push(acc);
        acc += inc.n_nodes();
    }
    o
}

/// `∫ E M_j` for every grid point `j`, as a 3 × 6M row block. `own` names
/// the grid point the source coincides with, if any.
pub fn volume_row(
    inclusions: &[Inclusion],
    y: &Vec3,
    own: Option<&GridPoint>,
    k: &ElasticConstants,
    cfg: &QuadratureConfig,
) -> Result<DMatrix<f64>> {
    let offs = offsets(inclusions);
    let total: usize = inclusions.iter().map(|i| i.n_nodes()).sum();
    let mut row = DMatrix::zeros(3, 6 * total);
    for (ii, inc) in inclusions.iter().enumerate() {
        let mut blocks = vec![Matrix3x6::zeros(); inc.n_nodes()];
        match inc {
            Inclusion::General { geometry, .. } => {
                let local = match own {
                    Some(g) if g.inclusion == ii => Some(g.local),
                    _ => geometry.locate(y),
                };
                geometry.integrate_e(y, local, k, cfg, &mut blocks)?;
            }
            Inclusion::Linear(b) => b.integrate_e(y, k, &mut blocks)?,
        }
        for (n, b) in blocks.iter().enumerate() {
            row.fixed_view_mut::<3, 6>(0, 6 * (offs[ii] + n)).copy_from(b);
        }
    }
    Ok(row)
}

fn add_gradient(b: &mut DMatrix<f64>, row: usize, col: usize, g: &Vec3) {
    // row block of the strain at the point, column block of the node
    b[(row, col)] += g[0];
    b[(row + 1, col + 1)] += g[1];
    b[(row + 2, col + 2)] += g[2];
    b[(row + 3, col)] += g[1];
    b[(row + 3, col + 1)] += g[0];
    b[(row + 4, col + 1)] += g[2];
    b[(row + 4, col + 2)] += g[1];
    b[(row + 5, col)] += g[2];
    b[(row + 5, col + 2)] += g[0];
}

/// How nodal derivatives of the grid displacement are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StrainStencil {
    /// Derivative of the cell's Lagrange polynomial in the local coordinate,
    /// averaged over the cells sharing the node.
    CellAverage,
    /// Derivative along the arc length of the grid line of the polynomial
    /// through the `2p + 1` nearest nodes, shifted inward at the ends.
    #[default]
    ArcLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RecoveryConfig {
    #[serde(default)]
    pub stencil: StrainStencil,
}

/// Derivative weights at `xs[at]` of the Lagrange polynomial through `xs`.
pub fn lagrange_derivative_at(xs: &[f64], at: usize) -> Vec<f64> {
    let x0 = xs[at];
    (0..xs.len())
        .map(|a| {
            if a == at {
                (0..xs.len()).filter(|&b| b != at).map(|b| 1.0 / (x0 - xs[b])).sum()
            } else {
                let num: f64 = (0..xs.len()).filter(|&b| b != at && b != a).map(|b| x0 - xs[b]).product();
                let den: f64 = (0..xs.len()).filter(|&b| b != a).map(|b| xs[a] - xs[b]).product();
                num / den
            }
        })
        .collect()
}

/// Arc length of the grid line through node `ijk` along `dir`, at every
/// node of the line.
fn line_arclength(incl: &GeneralInclusion, dir: usize, ijk: [usize; 3]) -> Result<Vec<f64>> {
    let axis = &incl.grid[dir];
    let rule = gauss_rule(16)?;
    let mut out = vec![0.0];
    for m in 1..axis.n_nodes() {
        let (a, b) = (axis.node_coord(m - 1), axis.node_coord(m));
        let mut len = 0.0;
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let mut loc = incl.node_local(incl.node_index(ijk[0], ijk[1], ijk[2]));
            loc[dir] = 0.5 * (a + b) + 0.5 * (b - a) * x;
            len += w * 0.5 * (b - a) * incl.map(&loc)?.jacobi.column(dir).norm();
        }
        out.push(out[m - 1] + len);
    }
    Ok(out)
}

/// `d/ds_dir` weights at node `ijk` as (node along the line, weight).
fn node_weights(
    incl: &GeneralInclusion,
    dir: usize,
    ijk: [usize; 3],
    stencil: StrainStencil,
) -> Result<Vec<(usize, f64)>> {
    let axis = &incl.grid[dir];
    match (stencil, axis.degree) {
        (_, GridDegree::Constant) => Ok(Vec::new()),
        (StrainStencil::CellAverage, _) => {
            Ok(axis.node_derivative(ijk[dir]).into_iter().map(|(m, _, d)| (m, d)).collect())
        }
        (StrainStencil::ArcLength, deg) => {
            let n = axis.n_nodes();
            let width = if deg == GridDegree::Linear { 3 } else { 5 }.min(n);
            let i = ijk[dir];
            let first = i.saturating_sub(width / 2).min(n - width);
            let sigma = line_arclength(incl, dir, ijk)?;
            let speed = incl.map(&incl.node_local(incl.node_index(ijk[0], ijk[1], ijk[2])))?.jacobi.column(dir).norm();
            Ok(lagrange_derivative_at(&sigma[first..first + width], i - first)
                .into_iter()
                .enumerate()
                .map(|(a, w)| (first + a, w * speed))
                .collect())
        }
    }
}

/// Strain rows of a general inclusion's nodes: nodal derivatives of the
/// grid displacement mapped through `J⁻ᵀ`.
pub fn strain_operator_general(
    incl: &GeneralInclusion,
    offset: usize,
    stencil: StrainStencil,
    b: &mut DMatrix<f64>,
) -> Result<()> {
    for n in 0..incl.n_nodes() {
        let ijk = incl.node_ijk(n);
        let p = incl.map(&incl.node_local(n))?;
        let jinv_t = p
            .jacobi
            .try_inverse()
            .ok_or(Error::DegenerateInclusion(format!("singular Jacobi matrix at node {n}")))?
            .transpose();
        for dir in 0..3 {
            for (m, d) in node_weights(incl, dir, ijk, stencil)? {
                let mut q = ijk;
                q[dir] = m;
                let mut g = Vec3::zeros();
                g[dir] = d;
                let grad = jinv_t * g;
                add_gradient(b, 6 * (offset + n), 3 * (offset + incl.node_index(q[0], q[1], q[2])), &grad);
            }
        }
    }
    Ok(())
}

/// Axial strain rows of a bolt: the mean of the adjacent segment strains,
/// stored in Voigt slot 2 of the node.
pub fn strain_operator_bolt(bolt: &LinearInclusion, offset: usize, b: &mut DMatrix<f64>) -> Result<()> {
    let n = bolt.n_nodes();
    for node in 0..n {
        let segs: Vec<usize> = [node.checked_sub(1), (node + 1 < n).then_some(node)].into_iter().flatten().collect();
        let w = 1.0 / segs.len() as f64;
        for s in segs {
            let h = bolt.segment_length(s);
            if !(h > 0.0) {
                return Err(Error::DegenerateInclusion("zero-length bolt segment".into()));
            }
            let v = bolt.direction(s) * (w / h);
            let row = 6 * (offset + node) + 2;
            for c in 0..3 {
                b[(row, 3 * (offset + s + 1) + c)] += v[c];
                b[(row, 3 * (offset + s) + c)] -= v[c];
            }
        }
    }
    Ok(())
}

/// `B̂` for all inclusions (6M × 3M).
pub fn strain_operator(inclusions: &[Inclusion], stencil: StrainStencil) -> Result<DMatrix<f64>> {
    let offs = offsets(inclusions);
    let m: usize = inclusions.iter().map(|i| i.n_nodes()).sum();
    let mut b = DMatrix::zeros(6 * m, 3 * m);
    for (inc, &o) in inclusions.iter().zip(&offs) {
        match inc {
            Inclusion::General { geometry, .. } => strain_operator_general(geometry, o, stencil, &mut b)?,
            Inclusion::Linear(bolt) => strain_operator_bolt(bolt, o, &mut b)?,
        }
    }
    Ok(b)
}

/// Boundary recovery row: the displacement basis at the patch parameter.
pub fn boundary_row(mesh: &BoundaryMesh, at: &Occurrence) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(3, mesh.n_dof());
    for (node, w) in mesh.interpolation_row(at.patch, at.xi, at.eta)? {
        for c in 0..3 {
            a[(c, 3 * node + c)] += w;
        }
    }
    Ok(a)
}

/// Constitutive model of every grid point in the frame of its strains.
pub fn point_models(
    inclusions: &[Inclusion],
    grid: &[GridPoint],
    domain: &ElasticConstants,
    virgin: &[f64; 6],
) -> Vec<PointModel> {
    let d = domain.stiffness();
    let sv = Vector6::from_row_slice(virgin);
    grid.iter()
        .map(|g| match &inclusions[g.inclusion] {
            Inclusion::General { material, .. } => PointModel {
                d,
                d_e: isotropic_stiffness(material.young, material.poisson),
                virgin: sv,
                yield_: material.yield_,
            },
            Inclusion::Linear(bolt) => {
                let seg = g.node.min(bolt.n_nodes() - 2);
                let v = bolt.direction(seg);
                let mut dd = Matrix6::zeros();
                let mut de = Matrix6::zeros();
                dd[(2, 2)] = domain.young;
                de[(2, 2)] = bolt.young;
                let t: Matrix3<f64> = crate::kernels::voigt_to_tensor(virgin);
                let mut vv = Vector6::zeros();
                vv[2] = (v.transpose() * t * v)[0];
                PointModel { d: dd, d_e: de, virgin: vv, yield_: None }
            }
        })
        .collect()
}
