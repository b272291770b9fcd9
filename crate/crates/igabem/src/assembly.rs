//! Boundary mesh bookkeeping and assembly of the collocation system
//! `L x = r` from the patch integrals of the Kelvin kernels.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_t, kernel_u, ElasticConstants};
use crate::nurbs::Vec3;
use crate::patch::{Patch, PatchKind};
use crate::quadrature::{partition_regions, regular_points, singular_points, QPoint2, QuadratureConfig, Rect};

/// Positions closer than this (relative to model size) are the same node.
pub const MATCH_TOL: f64 = 1e-9;

/// How known tractions enter the load integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TractionMode {
    /// Interpolated from values at the Greville points of the geometry basis.
    #[default]
    Greville,
    /// Evaluated from the boundary condition at every quadrature point.
    Exact,
}

/// A patch parameter at which a node lies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occurrence {
    pub patch: usize,
    pub xi: f64,
    pub eta: f64,
}

/// Shared displacement parameter and its collocation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub position: Vec3,
    /// Every patch location of the point; the first one anchors the node.
    pub on: Vec<Occurrence>,
    /// Global displacement functions and their values at the point.
    pub coeffs: Vec<(usize, f64)>,
}

/// Per-patch Greville interpolant of the traction.
#[derive(Debug, Clone)]
struct TractionFit {
    /// Geometry-basis coefficients, one traction vector per basis function.
    coeffs: Vec<Vec3>,
}

#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pub patches: Vec<Patch>,
    pub regions: Vec<Vec<Rect>>,
    /// Local field function to global node, per patch.
    pub dofs: Vec<Vec<usize>>,
    pub nodes: Vec<Node>,
    pub scale: f64,
    pub virgin: [f64; 6],
    pub traction_mode: TractionMode,
    fits: Vec<Option<TractionFit>>,
}

impl BoundaryMesh {
    pub fn new(
        patches: Vec<Patch>,
        virgin: [f64; 6],
        traction_mode: TractionMode,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::Validation("no boundary patches".into()));
        }
        cfg.validate()?;
        let mut scale: f64 = 0.0;
        for p in &patches {
            for (u, v) in p.field_anchors() {
                scale = scale.max(p.point(u, v)?.norm());
            }
        }
        let scale = scale.max(1.0);
        let tol = MATCH_TOL * scale;
        let mut nodes: Vec<Node> = Vec::new();
        let mut dofs = Vec::with_capacity(patches.len());
        for (pi, p) in patches.iter().enumerate() {
            let mut local = Vec::new();
            for (u, v) in p.field_anchors() {
                let x = p.point(u, v)?;
                let occ = Occurrence { patch: pi, xi: u, eta: v };
                let id = match nodes.iter().position(|n| (n.position - x).norm() < tol) {
                    Some(id) => {
                        if !nodes[id].on.iter().any(|o| o.patch == pi) {
                            nodes[id].on.push(occ);
                        }
                        id
                    }
                    None => {
                        nodes.push(Node { position: x, on: vec![occ], coeffs: Vec::new() });
                        nodes.len() - 1
                    }
                };
                local.push(id);
            }
            dofs.push(local);
        }
        // nodes that touch a patch without anchoring one of its functions
        for n in nodes.iter_mut() {
            for (pi, p) in patches.iter().enumerate() {
                if n.on.iter().any(|o| o.patch == pi) {
                    continue;
                }
                if let Some((u, v)) = p.locate(&n.position, tol) {
                    n.on.push(Occurrence { patch: pi, xi: u, eta: v });
                }
            }
        }
        for id in 0..nodes.len() {
            let o = nodes[id].on[0];
            let coeffs = patches[o.patch]
                .field_basis(o.xi, o.eta)?
                .into_iter()
                .filter(|&(_, v)| v != 0.0)
                .map(|(k, v)| (dofs[o.patch][k], v))
                .collect();
            nodes[id].coeffs = coeffs;
        }

        let mut regions = Vec::with_capacity(patches.len());
        for (pi, p) in patches.iter().enumerate() {
            let (mut ul, mut vl) = p.knot_lines();
            for n in &nodes {
                for o in n.on.iter().filter(|o| o.patch == pi) {
                    ul.push(o.xi);
                    vl.push(o.eta);
                }
            }
            let map = |u: f64, v: f64| p.point(u, v).expect("parameter in range");
            let infinite = p.is_infinite();
            if infinite {
                vl.retain(|&v| v == 0.0);
                vl.extend((1..=cfg.infinite_levels).map(|j| 1.0 - 0.5f64.powi(j as i32)));
            }
            let split = |r: &Rect| !infinite || r.v0 == 0.0;
            let mut rs = partition_regions(&map, &ul, &vl, cfg.max_aspect, &split);
            if infinite {
                // the last interval reaches infinity and is dropped
                let cut = 1.0 - 0.5f64.powi(cfg.infinite_levels as i32);
                rs.retain(|r| r.v1 <= cut + 1e-15);
            }
            regions.push(rs);
        }

        let mut mesh = Self { patches, regions, dofs, nodes, scale, virgin, traction_mode, fits: Vec::new() };
        mesh.fits = match traction_mode {
            TractionMode::Exact => vec![None; mesh.patches.len()],
            TractionMode::Greville => {
                (0..mesh.patches.len()).map(|p| mesh.fit_traction(p).map(Some)).collect::<Result<_>>()?
            }
        };
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_dof(&self) -> usize {
        3 * self.nodes.len()
    }

    fn fit_traction(&self, pi: usize) -> Result<TractionFit> {
        let p = &self.patches[pi];
        let (params, basis): (Vec<(f64, f64)>, Box<dyn Fn(f64, f64) -> Result<Vec<(usize, f64)>>>) = match &p.kind {
            PatchKind::Finite(f) => {
                let g = &f.geometry;
                let mut pts = Vec::new();
                for v in g.kv.greville() {
                    for u in g.ku.greville() {
                        pts.push((u, v));
                    }
                }
                (pts, Box::new(move |u, v| Ok(g.basis(u, v)?.iter().map(|&(i, r, _, _)| (i, r)).collect())))
            }
            PatchKind::Special(s) => {
                let g = &s.field;
                let mut pts = Vec::new();
                for v in g.kv.greville() {
                    for u in g.ku.greville() {
                        pts.push((u, v));
                    }
                }
                (pts, Box::new(move |u, v| Ok(g.basis(u, v)?.iter().map(|&(i, r, _, _)| (i, r)).collect())))
            }
            PatchKind::Infinite(f) => {
                let c = &f.edge;
                let pts = c.knot.greville().into_iter().map(|u| (u, 0.0)).collect();
                (
                    pts,
                    Box::new(move |u, _| {
                        let b = crate::nurbs::eval_basis(&c.knot, &c.weights, u)?;
                        Ok(b.values.iter().enumerate().map(|(k, r)| (b.first + k, *r)).collect())
                    }),
                )
            }
        };
        let n = params.len();
        let mut m = DMatrix::zeros(n, n);
        let mut rhs = DMatrix::zeros(n, 3);
        for (row, &(u, v)) in params.iter().enumerate() {
            for (k, r) in basis(u, v)? {
                m[(row, k)] = r;
            }
            let mp = p.map(u, v)?;
            let t = p.bc.traction(&self.virgin, &mp.normal);
            for c in 0..3 {
                rhs[(row, c)] = t[c];
            }
        }
        let sol = m.lu().solve(&rhs).ok_or(Error::SingularMatrix("traction interpolation"))?;
        Ok(TractionFit { coeffs: (0..n).map(|i| Vec3::new(sol[(i, 0)], sol[(i, 1)], sol[(i, 2)])).collect() })
    }

    /// Known traction at a patch parameter.
    pub fn traction(&self, pi: usize, xi: f64, eta: f64, normal: &Vec3) -> Result<Vec3> {
        let p = &self.patches[pi];
        match &self.fits[pi] {
            None => Ok(p.bc.traction(&self.virgin, normal)),
            Some(fit) => {
                let vals: Vec<(usize, f64)> = match &p.kind {
                    PatchKind::Finite(f) => f.geometry.basis(xi, eta)?.iter().map(|&(i, r, _, _)| (i, r)).collect(),
                    PatchKind::Special(s) => s.field.basis(xi, eta)?.iter().map(|&(i, r, _, _)| (i, r)).collect(),
                    PatchKind::Infinite(f) => {
                        let b = crate::nurbs::eval_basis(&f.edge.knot, &f.edge.weights, xi)?;
                        b.values.iter().enumerate().map(|(k, r)| (b.first + k, *r)).collect()
                    }
                };
                Ok(vals.iter().map(|&(i, r)| fit.coeffs[i] * r).sum())
            }
        }
    }

    /// Quadrature points of patch `pi` for a source at `y`; `apex` holds the
    /// source parameters when it lies on the patch.
    fn patch_points(
        &self,
        pi: usize,
        y: &Vec3,
        apex: Option<(f64, f64)>,
        cfg: &QuadratureConfig,
    ) -> Result<Vec<QPoint2>> {
        let p = &self.patches[pi];
        let map = |u: f64, v: f64| p.point(u, v).expect("parameter in range");
        let mut pts = Vec::new();
        for r in &self.regions[pi] {
            match apex {
                Some((u, v)) if r.contains(u, v) => pts.extend(singular_points(&map, r, (u, v), cfg)?),
                _ => pts.extend(regular_points(&map, r, y, cfg)?),
            }
        }
        Ok(pts)
    }

    /// Boundary integrals for a source point: `∫ T R_k` per global node,
    /// `∫ T` and `∫ U t`.
    pub fn integrate_source(
        &self,
        y: &Vec3,
        on: &[Occurrence],
        k: &ElasticConstants,
        cfg: &QuadratureConfig,
    ) -> Result<SourceIntegrals> {
        let mut out = SourceIntegrals {
            t_nodes: vec![Matrix3::zeros(); self.nodes.len()],
            t_sum: Matrix3::zeros(),
            ut: Vec3::zeros(),
        };
        for (pi, p) in self.patches.iter().enumerate() {
            let apex = on.iter().find(|o| o.patch == pi).map(|o| (o.xi, o.eta));
            for q in self.patch_points(pi, y, apex, cfg)? {
                let m = p.map(q.u, q.v)?;
                let w = q.w * m.jac;
                let t = kernel_t(y, &m.x, &m.normal, k)? * w;
                for (kk, r) in p.field_basis(q.u, q.v)? {
                    if r != 0.0 {
                        out.t_nodes[self.dofs[pi][kk]] += t * r;
                    }
                }
                out.t_sum += t;
                let tr = self.traction(pi, q.u, q.v, &m.normal)?;
                if tr != Vec3::zeros() {
                    out.ut += kernel_u(y, &m.x, k)? * tr * w;
                }
            }
        }
        if out.t_sum.iter().chain(out.ut.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Integration(format!("non-finite boundary integral for source at {:?}", y.as_slice())));
        }
        Ok(out)
    }

    /// Sum of `R_k(x)` over the nodes at a patch parameter, as node weights.
    pub fn interpolation_row(&self, pi: usize, xi: f64, eta: f64) -> Result<Vec<(usize, f64)>> {
        Ok(self.patches[pi]
            .field_basis(xi, eta)?
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|(k, v)| (self.dofs[pi][k], v))
            .collect())
    }

    /// Patch location of a point on the boundary, if any.
    pub fn locate(&self, x: &Vec3) -> Option<Occurrence> {
        let tol = MATCH_TOL * self.scale;
        self.patches
            .iter()
            .enumerate()
            .find_map(|(pi, p)| p.locate(x, tol).map(|(xi, eta)| Occurrence { patch: pi, xi, eta }))
    }
}

impl BoundaryMesh {
    /// Checks that every anchor on a patch edge is shared with a neighbour,
    /// i.e. that the patches close the excavation surface.
    pub fn check_connectivity(&self) -> Result<()> {
        let (patches, dofs, nodes) = (&self.patches, &self.dofs, &self.nodes);
        for (pi, p) in patches.iter().enumerate() {
            for (k, (u, v)) in p.field_anchors().into_iter().enumerate() {
                let on_edge = u == 0.0 || u == 1.0 || v == 0.0 || v == 1.0;
                if !on_edge {
                    continue;
                }
                let n = &nodes[dofs[pi][k]];
                if n.on.len() < 2 {
                    return Err(Error::Connectivity(format!(
                        "patch {} ({}) edge point ({u}, {v}) is not shared with a neighbour",
                        pi, p.label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Boundary integrals for one source point.
#[derive(Debug, Clone)]
pub struct SourceIntegrals {
    pub t_nodes: Vec<Matrix3<f64>>,
    pub t_sum: Matrix3<f64>,
    pub ut: Vec3,
}

/// Collocation system `L x = r`.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub l: DMatrix<f64>,
    pub r: DVector<f64>,
}

/// Assembles the regularised collocation equations
/// `Σ ∫ T (R_k - R_k(y_n)) u_k + A u(y_n) = ∫ U t` with `A = I`.
pub fn assemble(mesh: &BoundaryMesh, k: &ElasticConstants, cfg: &QuadratureConfig) -> Result<SystemMatrices> {
    let n = mesh.n_nodes();
    let rows: Vec<SourceIntegrals> = mesh
        .nodes
        .par_iter()
        .map(|node| mesh.integrate_source(&node.position, &node.on, k, cfg))
        .collect::<Result<_>>()?;
    let mut l = DMatrix::zeros(3 * n, 3 * n);
    let mut r = DVector::zeros(3 * n);
    for (row, (node, s)) in mesh.nodes.iter().zip(&rows).enumerate() {
        for (col, t) in s.t_nodes.iter().enumerate() {
            l.fixed_view_mut::<3, 3>(3 * row, 3 * col).copy_from(t);
        }
        let jump = Matrix3::identity() - s.t_sum;
        for &(col, c) in &node.coeffs {
            let mut blk = l.fixed_view_mut::<3, 3>(3 * row, 3 * col);
            blk += jump * c;
        }
        r.fixed_rows_mut::<3>(3 * row).copy_from(&s.ut);
    }
    Ok(SystemMatrices { l, r })
}

/// Interior displacement row: `u(x) = Â x + c̄` with `Â = -∫ T R_k` and
/// `c̄ = ∫ U t`.
pub fn interior_row(
    mesh: &BoundaryMesh,
    x: &Vec3,
    k: &ElasticConstants,
    cfg: &QuadratureConfig,
) -> Result<(DMatrix<f64>, Vec3)> {
    let s = mesh.integrate_source(x, &[], k, cfg)?;
    let mut a = DMatrix::zeros(3, mesh.n_dof());
    for (col, t) in s.t_nodes.iter().enumerate() {
        a.fixed_view_mut::<3, 3>(0, 3 * col).copy_from(&(-t));
    }
    Ok((a, s.ut))
}
