//! Boundary patches: finite NURBS patches, infinite patches that extend one
//! edge to infinity, and special ruled patches between two curves.
//!
//! Every patch carries a field basis for the displacement approximation that
//! is independent of its geometry basis; refinement only touches the field.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::nurbs::{eval_basis_derivatives, Direction, KnotVector, NurbsCurve, NurbsSurface, Vec3};

const DEGENERATE_JAC: f64 = 1e-14;

/// Position, tangents, unit normal and surface Jacobian of a mapped point.
#[derive(Debug, Clone, Copy)]
pub struct MapPoint {
    pub x: Vec3,
    pub dxi: Vec3,
    pub deta: Vec3,
    pub normal: Vec3,
    pub jac: f64,
}

impl MapPoint {
    fn from_tangents(x: Vec3, dxi: Vec3, deta: Vec3, xi: f64, eta: f64) -> Result<Self> {
        let c = dxi.cross(&deta);
        let jac = c.norm();
        let scale = dxi.norm() * deta.norm();
        if !(jac > DEGENERATE_JAC * scale.max(1e-300)) || !jac.is_finite() {
            return Err(Error::DegenerateMapping(xi, eta));
        }
        Ok(Self { x, dxi, deta, normal: c / jac, jac })
    }
}

/// Displacement behaviour of an infinite patch away from its finite edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfiniteMode {
    /// Displacements are constant along the direction to infinity.
    PlaneStrain,
    /// Displacements decay linearly in `eta` and vanish at infinity.
    Decay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePatch {
    pub geometry: NurbsSurface,
    pub field: NurbsSurface,
    /// Negates the normal given by the control point numbering.
    pub flip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinitePatch {
    /// Finite edge (first control row).
    pub edge: NurbsCurve,
    /// Second control row on the same basis; the patch extends from `edge`
    /// through `far` to infinity.
    pub far: Vec<Vec3>,
    /// Edge basis used for the displacement field.
    pub field: NurbsCurve,
    pub mode: InfiniteMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialPatch {
    pub outer: NurbsCurve,
    pub inner: NurbsCurve,
    pub field: NurbsSurface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Finite(FinitePatch),
    Infinite(InfinitePatch),
    Special(SpecialPatch),
}

/// Known traction on a patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Relief of the virgin stress on a newly excavated surface: `t = -σv n`.
    #[default]
    Excavation,
    /// Prescribed traction vector, added to nothing else.
    Traction([f64; 3]),
}

impl BoundaryCondition {
    pub fn traction(&self, virgin: &[f64; 6], n: &Vec3) -> Vec3 {
        match self {
            BoundaryCondition::Excavation => excavation_traction(virgin, n),
            BoundaryCondition::Traction(t) => Vec3::new(t[0], t[1], t[2]),
        }
    }
}

/// `t = -σv · n` for a virgin stress in Voigt order (11, 22, 33, 12, 23, 13).
pub fn excavation_traction(virgin: &[f64; 6], n: &Vec3) -> Vec3 {
    let s = crate::kernels::voigt_to_tensor(virgin);
    -(s * n)
}

/// Nonzero field functions `(local index, value)` at a parameter.
pub type FieldValues = SmallVec<[(usize, f64); 16]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub label: String,
    pub kind: PatchKind,
    #[serde(default)]
    pub bc: BoundaryCondition,
}

/// Weight functions of an infinite patch and their `eta` derivatives.
pub fn infinite_shape(eta: f64) -> Result<([f64; 2], [f64; 2])> {
    if !(eta < 1.0) || eta < 0.0 {
        return Err(Error::InfiniteDomain(eta));
    }
    let d = 1.0 - eta;
    Ok(([(1.0 - 2.0 * eta) / d, eta / d], [-1.0 / (d * d), 1.0 / (d * d)]))
}

impl Patch {
    pub fn finite(label: &str, geometry: NurbsSurface) -> Self {
        Self {
            label: label.into(),
            kind: PatchKind::Finite(FinitePatch { field: geometry.clone(), geometry, flip: false }),
            bc: BoundaryCondition::Excavation,
        }
    }

    pub fn infinite(label: &str, edge: NurbsCurve, far: Vec<Vec3>, mode: InfiniteMode) -> Result<Self> {
        if far.len() != edge.points.len() {
            return Err(Error::Validation(format!(
                "infinite patch {label}: {} far points for {} edge points",
                far.len(),
                edge.points.len()
            )));
        }
        if edge.points.iter().zip(&far).any(|(a, b)| (a - b).norm() == 0.0) {
            return Err(Error::Validation(format!("infinite patch {label}: coincident control rows")));
        }
        Ok(Self {
            label: label.into(),
            kind: PatchKind::Infinite(InfinitePatch { field: edge.clone(), edge, far, mode }),
            bc: BoundaryCondition::Excavation,
        })
    }

    pub fn special(label: &str, outer: NurbsCurve, inner: NurbsCurve) -> Result<Self> {
        let field = NurbsSurface::ruled(&outer, &inner)?;
        Ok(Self {
            label: label.into(),
            kind: PatchKind::Special(SpecialPatch { outer, inner, field }),
            bc: BoundaryCondition::Excavation,
        })
    }

    /// Rechecks a deserialized patch: bases, point counts and that the
    /// field spans the same parameter domain as the geometry.
    pub fn validate(&self) -> Result<()> {
        let ctx = |e: Error| Error::Validation(format!("patch {}: {e}", self.label));
        match &self.kind {
            PatchKind::Finite(p) => {
                p.geometry.validate().map_err(ctx)?;
                p.field.validate().map_err(ctx)?;
            }
            PatchKind::Infinite(p) => {
                p.edge.validate().map_err(ctx)?;
                p.field.validate().map_err(ctx)?;
                Self::infinite(&self.label, p.edge.clone(), p.far.clone(), p.mode)?;
            }
            PatchKind::Special(p) => {
                p.outer.validate().map_err(ctx)?;
                p.inner.validate().map_err(ctx)?;
                p.field.validate().map_err(ctx)?;
                NurbsSurface::ruled(&p.outer, &p.inner).map_err(ctx)?;
            }
        }
        if let BoundaryCondition::Traction(t) = self.bc {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("patch {}: traction must be finite", self.label)));
            }
        }
        Ok(())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.kind, PatchKind::Infinite(_))
    }

    pub fn map(&self, xi: f64, eta: f64) -> Result<MapPoint> {
        match &self.kind {
            PatchKind::Finite(p) => map_finite(p, xi, eta),
            PatchKind::Infinite(p) => map_infinite(p, xi, eta),
            PatchKind::Special(p) => map_special(p, xi, eta),
        }
    }

    pub fn point(&self, xi: f64, eta: f64) -> Result<Vec3> {
        match &self.kind {
            PatchKind::Finite(p) => p.geometry.point(xi, eta),
            PatchKind::Infinite(p) => {
                let (m, _) = infinite_shape(eta)?;
                let b = eval_basis_derivatives(&p.edge.knot, &p.edge.weights, xi)?;
                let mut x = Vec3::zeros();
                for (k, r) in b.values.iter().enumerate() {
                    let i = b.first + k;
                    x += (p.edge.points[i] * m[0] + p.far[i] * m[1]) * *r;
                }
                Ok(x)
            }
            PatchKind::Special(p) => Ok(p.outer.point(xi)? * (1.0 - eta) + p.inner.point(xi)? * eta),
        }
    }

    /// Number of local displacement functions.
    pub fn n_field(&self) -> usize {
        match &self.kind {
            PatchKind::Finite(p) => p.field.n_basis(),
            PatchKind::Infinite(p) => p.field.knot.n_basis(),
            PatchKind::Special(p) => p.field.n_basis(),
        }
    }

    /// Nonzero displacement functions at `(xi, eta)`.
    pub fn field_basis(&self, xi: f64, eta: f64) -> Result<FieldValues> {
        match &self.kind {
            PatchKind::Finite(FinitePatch { field, .. }) | PatchKind::Special(SpecialPatch { field, .. }) => {
                Ok(field.basis(xi, eta)?.iter().map(|&(i, r, _, _)| (i, r)).collect())
            }
            PatchKind::Infinite(p) => {
                let scale = match p.mode {
                    InfiniteMode::PlaneStrain => 1.0,
                    InfiniteMode::Decay => 1.0 - eta,
                };
                let b = eval_basis_derivatives(&p.field.knot, &p.field.weights, xi)?;
                Ok(b.values.iter().enumerate().map(|(k, r)| (b.first + k, r * scale)).collect())
            }
        }
    }

    /// Greville parameters of the local displacement functions, in local
    /// index order. Infinite patches anchor their functions on the finite
    /// edge.
    pub fn field_anchors(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            PatchKind::Finite(FinitePatch { field, .. }) | PatchKind::Special(SpecialPatch { field, .. }) => {
                let gu = field.ku.greville();
                let gv = field.kv.greville();
                let mut out = Vec::with_capacity(gu.len() * gv.len());
                for &v in &gv {
                    for &u in &gu {
                        out.push((u, v));
                    }
                }
                out
            }
            PatchKind::Infinite(p) => p.field.knot.greville().into_iter().map(|u| (u, 0.0)).collect(),
        }
    }

    /// Parameter lines that integration regions must respect: knot breaks of
    /// geometry and field bases in each direction.
    pub fn knot_lines(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            PatchKind::Finite(p) => {
                let mut u = p.geometry.ku.interior_breaks();
                u.extend(p.field.ku.interior_breaks());
                let mut v = p.geometry.kv.interior_breaks();
                v.extend(p.field.kv.interior_breaks());
                (u, v)
            }
            PatchKind::Infinite(p) => {
                let mut u = p.edge.knot.interior_breaks();
                u.extend(p.field.knot.interior_breaks());
                (u, Vec::new())
            }
            PatchKind::Special(p) => {
                let mut u = p.outer.knot.interior_breaks();
                u.extend(p.field.ku.interior_breaks());
                (u, p.field.kv.interior_breaks())
            }
        }
    }

    /// Inserts a knot into the displacement basis only.
    pub fn refine_field(&mut self, dir: Direction, u: f64) -> Result<()> {
        match &mut self.kind {
            PatchKind::Finite(FinitePatch { field, .. }) | PatchKind::Special(SpecialPatch { field, .. }) => {
                *field = field.insert_knot(dir, u)?;
            }
            PatchKind::Infinite(p) => {
                if dir == Direction::V {
                    return Err(Error::Validation("infinite patches refine along the edge only".into()));
                }
                p.field = p.field.insert_knot(u)?;
            }
        }
        Ok(())
    }

    /// Raises the displacement basis degree by one.
    pub fn elevate_field(&mut self, dir: Direction) -> Result<()> {
        match &mut self.kind {
            PatchKind::Finite(FinitePatch { field, .. }) | PatchKind::Special(SpecialPatch { field, .. }) => {
                *field = field.elevate(dir);
            }
            PatchKind::Infinite(p) => {
                if dir == Direction::V {
                    return Err(Error::Validation("infinite patches refine along the edge only".into()));
                }
                p.field = p.field.elevate();
            }
        }
        Ok(())
    }

    /// Closest parameter on the patch to `x` if the distance is below `tol`.
    pub fn locate(&self, x: &Vec3, tol: f64) -> Option<(f64, f64)> {
        let eta_max = if self.is_infinite() { 0.999 } else { 1.0 };
        let n = 12;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for j in 0..=n {
            for i in 0..=n {
                let (u, v) = (i as f64 / n as f64, eta_max * j as f64 / n as f64);
                if let Ok(p) = self.point(u, v) {
                    let d = (p - x).norm();
                    if d < best.0 {
                        best = (d, u, v);
                    }
                }
            }
        }
        let (_, mut u, mut v) = best;
        for _ in 0..60 {
            let m = self.map(u, v).ok()?;
            let r = m.x - x;
            let (a11, a12, a22) = (m.dxi.dot(&m.dxi), m.dxi.dot(&m.deta), m.deta.dot(&m.deta));
            let (b1, b2) = (m.dxi.dot(&r), m.deta.dot(&r));
            let det = a11 * a22 - a12 * a12;
            if det.abs() < 1e-300 {
                break;
            }
            let du = (a22 * b1 - a12 * b2) / det;
            let dv = (a11 * b2 - a12 * b1) / det;
            let nu = (u - du).clamp(0.0, 1.0);
            let nv = (v - dv).clamp(0.0, eta_max);
            let step = (nu - u).abs() + (nv - v).abs();
            u = nu;
            v = nv;
            if step < 1e-15 {
                break;
            }
        }
        let d = (self.point(u, v).ok()? - x).norm();
        (d <= tol).then_some((u, v))
    }
}

pub fn map_finite(p: &FinitePatch, xi: f64, eta: f64) -> Result<MapPoint> {
    let s = p.geometry.eval(xi, eta)?;
    let mut m = MapPoint::from_tangents(s.x, s.du, s.dv, xi, eta)?;
    if p.flip {
        m.normal = -m.normal;
    }
    Ok(m)
}

pub fn map_infinite(p: &InfinitePatch, xi: f64, eta: f64) -> Result<MapPoint> {
    let (m, dm) = infinite_shape(eta)?;
    let b = eval_basis_derivatives(&p.edge.knot, &p.edge.weights, xi)?;
    let mut x = Vec3::zeros();
    let mut dxi = Vec3::zeros();
    let mut deta = Vec3::zeros();
    for k in 0..b.values.len() {
        let i = b.first + k;
        let (a, c) = (p.edge.points[i], p.far[i]);
        x += (a * m[0] + c * m[1]) * b.values[k];
        dxi += (a * m[0] + c * m[1]) * b.ders[k];
        deta += (a * dm[0] + c * dm[1]) * b.values[k];
    }
    MapPoint::from_tangents(x, dxi, deta, xi, eta)
}

pub fn map_special(p: &SpecialPatch, xi: f64, eta: f64) -> Result<MapPoint> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::ParameterDomain(eta));
    }
    let (a, da) = p.outer.eval(xi)?;
    let (c, dc) = p.inner.eval(xi)?;
    let x = a * (1.0 - eta) + c * eta;
    let dxi = da * (1.0 - eta) + dc * eta;
    MapPoint::from_tangents(x, dxi, c - a, xi, eta)
}

/// Rational quadratic half circle of radius `r` in the plane `y = y0`,
/// centred on the `y` axis. The upper half runs from `+x` over `+z` to `-x`,
/// the lower half from `-x` over `-z` back to `+x`.
pub fn half_circle(r: f64, y0: f64, upper: bool) -> NurbsCurve {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sg = if upper { 1.0 } else { -1.0 };
    let pts = [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 1.0), (-1.0, 0.0)]
        .iter()
        .map(|&(a, b)| Vec3::new(sg * a * r, y0, sg * b * r))
        .collect();
    let knot = KnotVector::new(vec![0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2).expect("static knots");
    NurbsCurve::new(knot, pts, vec![1.0, s, 1.0, s, 1.0]).expect("static curve")
}

/// Half cylinder between `y = -length/2` and `y = +length/2`.
pub fn half_cylinder(radius: f64, length: f64, upper: bool) -> NurbsSurface {
    let a = half_circle(radius, -0.5 * length, upper);
    let b = half_circle(radius, 0.5 * length, upper);
    NurbsSurface::ruled(&a, &b).expect("same basis")
}

/// Circular tunnel along the `y` axis: two finite half-cylinder patches of
/// the given length closed by four infinite patches (two per end) that carry
/// the barrel to `±∞`. Normals point into the opening.
pub fn build_circular_tunnel(radius: f64, length: f64, mode: InfiniteMode) -> Result<Vec<Patch>> {
    if !(radius > 0.0 && length > 0.0) {
        return Err(Error::Validation("tunnel radius and length must be positive".into()));
    }
    let h = 0.5 * length;
    let step = radius.max(h);
    let mut patches = vec![
        Patch::finite("barrel-upper", half_cylinder(radius, length, true)),
        Patch::finite("barrel-lower", half_cylinder(radius, length, false)),
    ];
    for (upper, tag) in [(true, "upper"), (false, "lower")] {
        let edge = half_circle(radius, h, upper);
        let far = edge.translated(Vec3::new(0.0, step, 0.0)).points;
        patches.push(Patch::infinite(&format!("front-{tag}"), edge, far, mode)?);
        // reversed so that the normal still points into the opening
        let edge = half_circle(radius, -h, upper).reversed();
        let far = edge.translated(Vec3::new(0.0, -step, 0.0)).points;
        patches.push(Patch::infinite(&format!("back-{tag}"), edge, far, mode)?);
    }
    Ok(patches)
}
