//! Clamped NURBS bases, curves and surfaces.
//!
//! Basis evaluation only returns the `p + 1` functions that are nonzero at a
//! parameter together with the index of the first one. Refinement (knot
//! insertion, order elevation) never moves the geometry.

use nalgebra::{DMatrix, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
type Hom = Vector4<f64>;

/// Nonzero basis values at one parameter.
pub type Local = SmallVec<[f64; 8]>;

const PARAM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Rechecks a deserialized knot vector.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.knots.clone(), self.degree).map(|_| ())
    }

    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidKnots(format!("{} knots cannot carry degree {p}", knots.len())));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be nondecreasing".into()));
        }
        if knots.iter().any(|k| !(0.0..=1.0).contains(k)) {
            return Err(Error::InvalidKnots("knots must lie in [0, 1]".into()));
        }
        let n = knots.len();
        if knots[..=p].iter().any(|&k| k != 0.0) || knots[n - p - 1..].iter().any(|&k| k != 1.0) {
            return Err(Error::InvalidKnots(format!("end knots must be repeated {} times at 0 and 1", p + 1)));
        }
        for k in &knots[p + 1..n - p - 1] {
            let m = knots.iter().filter(|x| *x == k).count();
            if m > p + 1 || *k == 0.0 || *k == 1.0 {
                return Err(Error::InvalidKnots(format!("interior knot {k} repeated too often")));
            }
        }
        Ok(Self { knots, degree })
    }

    /// Bezier knot vector `[0; p+1, 1; p+1]`.
    pub fn bezier(degree: usize) -> Self {
        let mut knots = vec![0.0; degree + 1];
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self { knots, degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn multiplicity(&self, u: f64) -> usize {
        self.knots.iter().filter(|&&k| k == u).count()
    }

    /// Distinct interior knot values.
    pub fn interior_breaks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if k > 0.0 && k < 1.0 && out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    /// Index `i` of the span with `t_i <= u < t_{i+1}`; `u = 1` maps to the last
    /// nonempty span.
    pub fn span(&self, u: f64) -> Result<usize> {
        if !(-PARAM_SLACK..=1.0 + PARAM_SLACK).contains(&u) || u.is_nan() {
            return Err(Error::ParameterDomain(u));
        }
        let u = u.clamp(0.0, 1.0);
        let n = self.n_basis();
        let p = self.degree;
        if u >= self.knots[n] {
            let mut i = n - 1;
            while i > p && self.knots[i] == self.knots[i + 1] {
                i -= 1;
            }
            return Ok(i);
        }
        // binary search over [p, n)
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    }

    /// B-spline values and first derivatives of the `p + 1` functions
    /// `N_{span-p} .. N_{span}` (de Boor-Cox triangular scheme).
    pub fn basis_ders(&self, span: usize, u: f64) -> (Local, Local) {
        let p = self.degree;
        let t = &self.knots;
        let u = u.clamp(0.0, 1.0);
        let mut left: SmallVec<[f64; 8]> = SmallVec::from_elem(0.0, p + 1);
        let mut right: SmallVec<[f64; 8]> = SmallVec::from_elem(0.0, p + 1);
        // ndu[j][r]: upper triangle basis values, lower triangle knot differences
        let mut ndu = [[0.0f64; 8]; 8];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - t[span + 1 - j];
            right[j] = t[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let tmp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            ndu[j][j] = saved;
        }
        let vals: Local = (0..=p).map(|j| ndu[j][p]).collect();
        let mut ders: Local = SmallVec::from_elem(0.0, p + 1);
        if p > 0 {
            for r in 0..=p {
                let mut d = 0.0;
                if r >= 1 {
                    d += ndu[r - 1][p - 1] / ndu[p][r - 1];
                }
                if r < p {
                    d -= ndu[r][p - 1] / ndu[p][r];
                }
                ders[r] = d * p as f64;
            }
        }
        (vals, ders)
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.n_basis())
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    /// Nonempty knot spans as parameter intervals.
    pub fn spans(&self) -> Vec<(f64, f64)> {
        self.knots.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
    }

    fn with_inserted(&self, u: f64) -> Self {
        let mut knots = self.knots.clone();
        let pos = knots.iter().position(|&k| k > u).unwrap_or(knots.len());
        knots.insert(pos, u);
        Self { knots, degree: self.degree }
    }

    /// Knot vector of the order-elevated space: every distinct knot gains one
    /// multiplicity.
    pub fn elevated(&self) -> Self {
        let mut knots = Vec::with_capacity(self.knots.len() * 2);
        for (i, &k) in self.knots.iter().enumerate() {
            knots.push(k);
            if i + 1 == self.knots.len() || self.knots[i + 1] != k {
                knots.push(k);
            }
        }
        Self { knots, degree: self.degree + 1 }
    }

    fn check_insert(&self, u: f64) -> Result<()> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ParameterDomain(u));
        }
        let m = self.multiplicity(u);
        if m >= self.degree {
            return Err(Error::Multiplicity { u, multiplicity: m, degree: self.degree });
        }
        Ok(())
    }
}

/// Rational basis values (and first derivatives) at `u`.
#[derive(Debug, Clone)]
pub struct BasisEval {
    pub first: usize,
    pub values: Local,
    pub ders: Local,
}

/// Rational basis `R_i = N_i w_i / W` at `u`.
pub fn eval_basis(knot: &KnotVector, weights: &[f64], u: f64) -> Result<BasisEval> {
    let b = eval_basis_derivatives(knot, weights, u)?;
    Ok(b)
}

/// Rational basis with first derivatives at `u`.
pub fn eval_basis_derivatives(knot: &KnotVector, weights: &[f64], u: f64) -> Result<BasisEval> {
    let span = knot.span(u)?;
    let p = knot.degree();
    let first = span - p;
    let (n, dn) = knot.basis_ders(span, u);
    let mut w = 0.0;
    let mut dw = 0.0;
    for k in 0..=p {
        w += n[k] * weights[first + k];
        dw += dn[k] * weights[first + k];
    }
    let mut values = Local::new();
    let mut ders = Local::new();
    for k in 0..=p {
        let wk = weights[first + k];
        values.push(n[k] * wk / w);
        ders.push((dn[k] * wk * w - n[k] * wk * dw) / (w * w));
    }
    Ok(BasisEval { first, values, ders })
}

fn hom(x: &Vec3, w: f64) -> Hom {
    Hom::new(x.x * w, x.y * w, x.z * w, w)
}

fn dehom(h: &Hom) -> (Vec3, f64) {
    (Vec3::new(h.x / h.w, h.y / h.w, h.z / h.w), h.w)
}

/// Boehm insertion on one homogeneous control polygon.
fn insert_row(knot: &KnotVector, pts: &[Hom], u: f64) -> Vec<Hom> {
    let p = knot.degree();
    let t = knot.knots();
    let k = knot.span(u).expect("checked");
    let s = knot.multiplicity(u);
    let mut out = Vec::with_capacity(pts.len() + 1);
    for i in 0..=pts.len() {
        let q = if i + p <= k {
            pts[i]
        } else if i > k - s {
            pts[i - 1]
        } else {
            let a = (u - t[i]) / (t[i + p] - t[i]);
            pts[i] * a + pts[i - 1] * (1.0 - a)
        };
        out.push(q);
    }
    out
}

/// Re-represents homogeneous rows in the elevated space by collocation at the
/// Greville abscissae of the new knot vector (exact: the elevated space
/// contains the old one).
fn elevate_rows(knot: &KnotVector, rows: &[Vec<Hom>]) -> (KnotVector, Vec<Vec<Hom>>) {
    let new = knot.elevated();
    let g = new.greville();
    let n = new.n_basis();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (r, &u) in g.iter().enumerate() {
        let span = new.span(u).expect("greville in domain");
        let (v, _) = new.basis_ders(span, u);
        for (k, val) in v.iter().enumerate() {
            a[(r, span - new.degree() + k)] = *val;
        }
    }
    let lu = a.lu();
    let out = rows
        .iter()
        .map(|pts| {
            let mut rhs = DMatrix::<f64>::zeros(n, 4);
            for (r, &u) in g.iter().enumerate() {
                let span = knot.span(u).expect("greville in domain");
                let (v, _) = knot.basis_ders(span, u);
                let mut h = Hom::zeros();
                for (k, val) in v.iter().enumerate() {
                    h += pts[span - knot.degree() + k] * *val;
                }
                for c in 0..4 {
                    rhs[(r, c)] = h[c];
                }
            }
            let sol = lu.solve(&rhs).expect("Greville collocation matrix is nonsingular");
            (0..n).map(|i| Hom::new(sol[(i, 0)], sol[(i, 1)], sol[(i, 2)], sol[(i, 3)])).collect()
        })
        .collect();
    (new, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurbsCurve {
    pub knot: KnotVector,
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl NurbsCurve {
    pub fn validate(&self) -> Result<()> {
        self.knot.validate()?;
        Self::new(self.knot.clone(), self.points.clone(), self.weights.clone()).map(|_| ())
    }

    pub fn new(knot: KnotVector, points: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != knot.n_basis() || weights.len() != points.len() {
            return Err(Error::InvalidKnots(format!(
                "{} control points / {} weights for {} basis functions",
                points.len(),
                weights.len(),
                knot.n_basis()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Validation("weights must be positive".into()));
        }
        Ok(Self { knot, points, weights })
    }

    /// Straight polyline through `points` with the given interior knots
    /// (degree 1).
    pub fn polyline(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        let mut knots = vec![0.0, 0.0];
        for i in 1..n - 1 {
            knots.push(i as f64 / (n - 1) as f64);
        }
        knots.extend([1.0, 1.0]);
        let w = vec![1.0; n];
        Self::new(KnotVector::new(knots, 1)?, points, w)
    }

    pub fn degree(&self) -> usize {
        self.knot.degree()
    }

    /// Position and first derivative.
    pub fn eval(&self, u: f64) -> Result<(Vec3, Vec3)> {
        let b = eval_basis_derivatives(&self.knot, &self.weights, u)?;
        let mut x = Vec3::zeros();
        let mut dx = Vec3::zeros();
        for k in 0..b.values.len() {
            x += self.points[b.first + k] * b.values[k];
            dx += self.points[b.first + k] * b.ders[k];
        }
        Ok((x, dx))
    }

    pub fn point(&self, u: f64) -> Result<Vec3> {
        Ok(self.eval(u)?.0)
    }

    pub fn insert_knot(&self, u: f64) -> Result<Self> {
        self.knot.check_insert(u)?;
        let h: Vec<Hom> = self.points.iter().zip(&self.weights).map(|(x, &w)| hom(x, w)).collect();
        let new = insert_row(&self.knot, &h, u);
        let (points, weights) = new.iter().map(dehom).unzip();
        Ok(Self { knot: self.knot.with_inserted(u), points, weights })
    }

    pub fn elevate(&self) -> Self {
        let h: Vec<Hom> = self.points.iter().zip(&self.weights).map(|(x, &w)| hom(x, w)).collect();
        let (knot, rows) = elevate_rows(&self.knot, &[h]);
        let (points, weights) = rows[0].iter().map(dehom).unzip();
        Self { knot, points, weights }
    }

    /// Parameter `u` as a new curve with reversed parametrisation.
    pub fn reversed(&self) -> Self {
        let knots: Vec<f64> = self.knot.knots().iter().rev().map(|k| 1.0 - k).collect();
        Self {
            knot: KnotVector { knots, degree: self.knot.degree() },
            points: self.points.iter().rev().cloned().collect(),
            weights: self.weights.iter().rev().cloned().collect(),
        }
    }

    pub fn translated(&self, d: Vec3) -> Self {
        let mut c = self.clone();
        for p in &mut c.points {
            *p += d;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    U,
    V,
}

/// Position and tangents of a surface point.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub x: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
}

/// Tensor-product NURBS surface; control points numbered first along `u`
/// then along `v` (`index = i + n_u * j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurbsSurface {
    pub ku: KnotVector,
    pub kv: KnotVector,
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

/// Nonzero tensor basis values `(local index, R, dR/du, dR/dv)`.
pub type SurfaceBasis = SmallVec<[(usize, f64, f64, f64); 16]>;

impl NurbsSurface {
    pub fn validate(&self) -> Result<()> {
        self.ku.validate()?;
        self.kv.validate()?;
        Self::new(self.ku.clone(), self.kv.clone(), self.points.clone(), self.weights.clone()).map(|_| ())
    }

    pub fn new(ku: KnotVector, kv: KnotVector, points: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        let n = ku.n_basis() * kv.n_basis();
        if points.len() != n || weights.len() != n {
            return Err(Error::InvalidKnots(format!(
                "{} control points / {} weights, expected {n}",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Validation("weights must be positive".into()));
        }
        Ok(Self { ku, kv, points, weights })
    }

    /// Ruled surface `(1 - v) a(u) + v b(u)` between two curves on the same
    /// basis.
    pub fn ruled(a: &NurbsCurve, b: &NurbsCurve) -> Result<Self> {
        if a.knot != b.knot || a.weights != b.weights {
            return Err(Error::Validation("ruled surface needs curves on one basis".into()));
        }
        let mut points = a.points.clone();
        points.extend(b.points.iter().cloned());
        let mut weights = a.weights.clone();
        weights.extend(b.weights.iter().cloned());
        Self::new(a.knot.clone(), KnotVector::bezier(1), points, weights)
    }

    pub fn nu(&self) -> usize {
        self.ku.n_basis()
    }

    pub fn nv(&self) -> usize {
        self.kv.n_basis()
    }

    pub fn n_basis(&self) -> usize {
        self.nu() * self.nv()
    }

    /// Rational tensor basis with parametric derivatives.
    pub fn basis(&self, u: f64, v: f64) -> Result<SurfaceBasis> {
        let su = self.ku.span(u)?;
        let sv = self.kv.span(v)?;
        let (p, q) = (self.ku.degree(), self.kv.degree());
        let (nu_v, nu_d) = self.ku.basis_ders(su, u);
        let (nv_v, nv_d) = self.kv.basis_ders(sv, v);
        let nu = self.nu();
        let mut raw = SurfaceBasis::new();
        let (mut w, mut wu, mut wv) = (0.0, 0.0, 0.0);
        for b in 0..=q {
            for a in 0..=p {
                let idx = (su - p + a) + nu * (sv - q + b);
                let wi = self.weights[idx];
                let n = nu_v[a] * nv_v[b] * wi;
                let nu_ = nu_d[a] * nv_v[b] * wi;
                let nv_ = nu_v[a] * nv_d[b] * wi;
                w += n;
                wu += nu_;
                wv += nv_;
                raw.push((idx, n, nu_, nv_));
            }
        }
        for r in raw.iter_mut() {
            let (n, du, dv) = (r.1, r.2, r.3);
            r.1 = n / w;
            r.2 = (du * w - n * wu) / (w * w);
            r.3 = (dv * w - n * wv) / (w * w);
        }
        Ok(raw)
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<SurfacePoint> {
        let b = self.basis(u, v)?;
        let mut sp = SurfacePoint { x: Vec3::zeros(), du: Vec3::zeros(), dv: Vec3::zeros() };
        for &(i, r, ru, rv) in &b {
            sp.x += self.points[i] * r;
            sp.du += self.points[i] * ru;
            sp.dv += self.points[i] * rv;
        }
        Ok(sp)
    }

    pub fn point(&self, u: f64, v: f64) -> Result<Vec3> {
        Ok(self.eval(u, v)?.x)
    }

    fn homogeneous(&self) -> Vec<Hom> {
        self.points.iter().zip(&self.weights).map(|(x, &w)| hom(x, w)).collect()
    }

    fn rows(&self, dir: Direction) -> Vec<Vec<Hom>> {
        let h = self.homogeneous();
        let (nu, nv) = (self.nu(), self.nv());
        match dir {
            Direction::U => (0..nv).map(|j| (0..nu).map(|i| h[i + nu * j]).collect()).collect(),
            Direction::V => (0..nu).map(|i| (0..nv).map(|j| h[i + nu * j]).collect()).collect(),
        }
    }

    fn from_rows(ku: KnotVector, kv: KnotVector, dir: Direction, rows: Vec<Vec<Hom>>) -> Self {
        let (nu, nv) = (ku.n_basis(), kv.n_basis());
        let mut points = vec![Vec3::zeros(); nu * nv];
        let mut weights = vec![0.0; nu * nv];
        for (r, row) in rows.iter().enumerate() {
            for (c, h) in row.iter().enumerate() {
                let (i, j) = match dir {
                    Direction::U => (c, r),
                    Direction::V => (r, c),
                };
                let (x, w) = dehom(h);
                points[i + nu * j] = x;
                weights[i + nu * j] = w;
            }
        }
        Self { ku, kv, points, weights }
    }

    pub fn insert_knot(&self, dir: Direction, u: f64) -> Result<Self> {
        let knot = match dir {
            Direction::U => &self.ku,
            Direction::V => &self.kv,
        };
        knot.check_insert(u)?;
        let rows: Vec<Vec<Hom>> = self.rows(dir).iter().map(|r| insert_row(knot, r, u)).collect();
        let new = knot.with_inserted(u);
        Ok(match dir {
            Direction::U => Self::from_rows(new, self.kv.clone(), dir, rows),
            Direction::V => Self::from_rows(self.ku.clone(), new, dir, rows),
        })
    }

    pub fn elevate(&self, dir: Direction) -> Self {
        let knot = match dir {
            Direction::U => &self.ku,
            Direction::V => &self.kv,
        };
        let (new, rows) = elevate_rows(knot, &self.rows(dir));
        match dir {
            Direction::U => Self::from_rows(new, self.kv.clone(), dir, rows),
            Direction::V => Self::from_rows(self.ku.clone(), new, dir, rows),
        }
    }

    /// Iso-curve at fixed `v` (exact for `v` equal to 0 or 1 and for linear
    /// `v` directions).
    pub fn edge_v(&self, v_end: bool) -> NurbsCurve {
        let nu = self.nu();
        let j = if v_end { self.nv() - 1 } else { 0 };
        NurbsCurve {
            knot: self.ku.clone(),
            points: (0..nu).map(|i| self.points[i + nu * j]).collect(),
            weights: (0..nu).map(|i| self.weights[i + nu * j]).collect(),
        }
    }

    /// Same surface with the `u` parametrisation reversed.
    pub fn reversed_u(&self) -> Self {
        let (nu, nv) = (self.nu(), self.nv());
        let knots: Vec<f64> = self.ku.knots().iter().rev().map(|k| 1.0 - k).collect();
        let mut points = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            for i in (0..nu).rev() {
                points.push(self.points[i + nu * j]);
                weights.push(self.weights[i + nu * j]);
            }
        }
        Self { ku: KnotVector { knots, degree: self.ku.degree() }, kv: self.kv.clone(), points, weights }
    }
}

/// Greville abscissae of a knot vector.
pub fn greville_abscissae(knot: &KnotVector) -> Vec<f64> {
    knot.greville()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_lookup_at_ends() {
        let k = KnotVector::new(vec![0., 0., 0., 0.5, 1., 1., 1.], 2).unwrap();
        assert_eq!(k.span(0.0).unwrap(), 2);
        assert_eq!(k.span(0.5).unwrap(), 3);
        assert_eq!(k.span(1.0).unwrap(), 3);
        assert!(k.span(1.5).is_err());
    }

    #[test]
    fn rejects_unclamped() {
        assert!(KnotVector::new(vec![0., 0.2, 0.5, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0., 0., 0.7, 0.5, 1., 1.], 1).is_err());
    }
}
