//! Gauss-Legendre rules, integration regions, proximity-driven subdivision
//! and degenerate (apex) maps for weakly singular integrands.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nurbs::Vec3;

pub const MAX_GAUSS: usize = 64;

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> GaussRule {
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    GaussRule { points, weights }
}

/// Cached Gauss-Legendre rule with `n` points on [-1, 1].
pub fn gauss_rule(n: usize) -> Result<&'static GaussRule> {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    if !(1..=MAX_GAUSS).contains(&n) {
        return Err(Error::GaussOrder(n));
    }
    let rules = RULES.get_or_init(|| (1..=MAX_GAUSS).map(legendre_rule).collect());
    Ok(&rules[n - 1])
}

/// Settings of the proximity rule `n = ceil(base + slope * L / d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub gauss_base: f64,
    pub gauss_slope: f64,
    pub gauss_cap: usize,
    /// Gauss order per direction of each singular triangle or pyramid.
    pub singular_order: usize,
    pub max_aspect: f64,
    /// Number of geometric intervals along the infinite direction.
    pub infinite_levels: usize,
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            gauss_base: 4.0,
            gauss_slope: 2.0,
            gauss_cap: 12,
            singular_order: 8,
            max_aspect: 2.0,
            infinite_levels: 30,
            max_depth: 24,
        }
    }
}

impl QuadratureConfig {
    pub fn count(&self, len: f64, dist: f64) -> usize {
        if dist <= 0.0 {
            return usize::MAX;
        }
        (self.gauss_base + self.gauss_slope * len / dist).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.gauss_cap == 0 || self.gauss_cap > MAX_GAUSS {
            return Err(Error::GaussOrder(self.gauss_cap));
        }
        if self.singular_order == 0 || self.singular_order > MAX_GAUSS {
            return Err(Error::GaussOrder(self.singular_order));
        }
        if !(self.max_aspect >= 1.0) || !(self.gauss_base >= 0.0) || !(self.gauss_slope >= 0.0) {
            return Err(Error::Validation("quadrature settings out of range".into()));
        }
        Ok(())
    }
}

/// Parameter rectangle `[u0, u1] × [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

const CLOSURE_TOL: f64 = 1e-12;

impl Rect {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Self { u0, u1, v0, v1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u0 - CLOSURE_TOL
            && u <= self.u1 + CLOSURE_TOL
            && v >= self.v0 - CLOSURE_TOL
            && v <= self.v1 + CLOSURE_TOL
    }

    pub fn on_boundary(&self, u: f64, v: f64) -> bool {
        self.contains(u, v)
            && ((u - self.u0).abs() < CLOSURE_TOL
                || (u - self.u1).abs() < CLOSURE_TOL
                || (v - self.v0).abs() < CLOSURE_TOL
                || (v - self.v1).abs() < CLOSURE_TOL)
    }

    fn split_u(&self) -> [Rect; 2] {
        let m = 0.5 * (self.u0 + self.u1);
        [Rect { u1: m, ..*self }, Rect { u0: m, ..*self }]
    }

    fn split_v(&self) -> [Rect; 2] {
        let m = 0.5 * (self.v0 + self.v1);
        [Rect { v1: m, ..*self }, Rect { v0: m, ..*self }]
    }
}

/// Parameter-space quadrature point with its parameter-space weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint2 {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

/// A rectangle and the Gauss counts chosen for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubRegion {
    pub rect: Rect,
    pub nu: usize,
    pub nv: usize,
}

/// Tensor Gauss points on a rectangle.
pub fn rect_points(rect: &Rect, nu: usize, nv: usize, out: &mut Vec<QPoint2>) -> Result<()> {
    let (gu, gv) = (gauss_rule(nu)?, gauss_rule(nv)?);
    let (hu, hv) = (0.5 * (rect.u1 - rect.u0), 0.5 * (rect.v1 - rect.v0));
    for (a, wa) in gv.points.iter().zip(&gv.weights) {
        let v = rect.v0 + hv * (1.0 + a);
        for (b, wb) in gu.points.iter().zip(&gu.weights) {
            out.push(QPoint2 { u: rect.u0 + hu * (1.0 + b), v, w: wa * wb * hu * hv });
        }
    }
    Ok(())
}

fn sample_distance(map: &dyn Fn(f64, f64) -> Vec3, rect: &Rect, y: &Vec3) -> f64 {
    let at = |f: [f64; 2]| map(rect.u0 + f[0] * (rect.u1 - rect.u0), rect.v0 + f[1] * (rect.v1 - rect.v0));
    let mut best = (f64::INFINITY, [0.0; 2]);
    for k in 0..9 {
        let f = [(k % 3) as f64 * 0.5, (k / 3) as f64 * 0.5];
        let d = (at(f) - y).norm();
        if d < best.0 {
            best = (d, f);
        }
    }
    nearest_distance(&at, best.1, y).min(best.0)
}

/// Distance from `y` to a mapped unit box, by clamped Gauss-Newton from
/// `start` with finite-difference tangents.
fn nearest_distance<const N: usize>(at: &dyn Fn([f64; N]) -> Vec3, start: [f64; N], y: &Vec3) -> f64 {
    const H: f64 = 1e-6;
    let mut f = start;
    let mut best = f64::INFINITY;
    for _ in 0..6 {
        let x = at(f);
        let r = x - y;
        best = best.min(r.norm());
        let mut jac = nalgebra::SMatrix::<f64, 3, N>::zeros();
        for k in 0..N {
            let (mut a, mut b) = (f, f);
            a[k] = (f[k] - H).max(0.0);
            b[k] = (f[k] + H).min(1.0);
            jac.set_column(k, &((at(b) - at(a)) / (b[k] - a[k])));
        }
        let Some(step) = (jac.transpose() * jac).try_inverse().map(|m| m * (jac.transpose() * r)) else {
            break;
        };
        let mut moved = 0.0f64;
        for k in 0..N {
            let nf = (f[k] - step[k]).clamp(0.0, 1.0);
            moved = moved.max((nf - f[k]).abs());
            f[k] = nf;
        }
        if moved < 1e-10 {
            break;
        }
    }
    best.min((at(f) - y).norm())
}

/// Physical lengths of a rectangle along its two parameter directions,
/// measured as two chords through the centre.
pub fn rect_lengths(map: &dyn Fn(f64, f64) -> Vec3, rect: &Rect) -> (f64, f64) {
    let (um, vm) = (0.5 * (rect.u0 + rect.u1), 0.5 * (rect.v0 + rect.v1));
    let c = map(um, vm);
    let lu = (map(rect.u0, vm) - c).norm() + (map(rect.u1, vm) - c).norm();
    let lv = (map(um, rect.v0) - c).norm() + (map(um, rect.v1) - c).norm();
    (lu, lv)
}

/// Splits `rect` until the proximity rule for source `y` fits under the cap
/// in both directions. `map` returns the physical position of a parameter.
pub fn quadtree_subdivide(
    map: &dyn Fn(f64, f64) -> Vec3,
    rect: &Rect,
    y: &Vec3,
    cfg: &QuadratureConfig,
) -> Vec<SubRegion> {
    let mut out = Vec::new();
    subdivide(map, rect, y, cfg, 0, &mut out);
    out
}

fn subdivide(
    map: &dyn Fn(f64, f64) -> Vec3,
    rect: &Rect,
    y: &Vec3,
    cfg: &QuadratureConfig,
    depth: usize,
    out: &mut Vec<SubRegion>,
) {
    let d = sample_distance(map, rect, y);
    let (lu, lv) = rect_lengths(map, rect);
    let nu = cfg.count(lu, d);
    let nv = cfg.count(lv, d);
    let cap = cfg.gauss_cap;
    if (nu <= cap && nv <= cap) || depth >= cfg.max_depth {
        out.push(SubRegion { rect: *rect, nu: nu.min(cap), nv: nv.min(cap) });
        return;
    }
    let parts: Vec<Rect> = match (nu > cap, nv > cap) {
        (true, true) => rect.split_u().iter().flat_map(|r| r.split_v()).collect(),
        (true, false) => rect.split_u().to_vec(),
        _ => rect.split_v().to_vec(),
    };
    for p in &parts {
        subdivide(map, p, y, cfg, depth + 1, out);
    }
}

/// Regular-integration points on a rectangle for source `y`.
pub fn regular_points(
    map: &dyn Fn(f64, f64) -> Vec3,
    rect: &Rect,
    y: &Vec3,
    cfg: &QuadratureConfig,
) -> Result<Vec<QPoint2>> {
    let mut pts = Vec::new();
    for s in quadtree_subdivide(map, rect, y, cfg) {
        rect_points(&s.rect, s.nu, s.nv, &mut pts)?;
    }
    Ok(pts)
}

/// Triangle fan around an apex on the closure of a rectangle.
#[derive(Debug, Clone)]
pub struct SingularRule {
    /// Triangles as (apex, a, b) in parameter space.
    pub triangles: Vec<[[f64; 2]; 3]>,
    pub points: Vec<QPoint2>,
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len = (ab[0] * ab[0] + ab[1] * ab[1]).sqrt();
    if cross2(ab, ap).abs() > CLOSURE_TOL * len {
        return false;
    }
    let t = (ab[0] * ap[0] + ab[1] * ap[1]) / (len * len);
    (-CLOSURE_TOL..=1.0 + CLOSURE_TOL).contains(&t)
}

/// Fan of triangles from the apex `(ua, va)` with a collapsed-square Gauss
/// rule on each; the Jacobian vanishes at the apex.
pub fn triangle_singular_rule(rect: &Rect, ua: f64, va: f64, order: usize) -> Result<SingularRule> {
    if !rect.contains(ua, va) {
        return Err(Error::Integration(format!("apex ({ua}, {va}) outside its region")));
    }
    let p = [ua, va];
    let c = [[rect.u0, rect.v0], [rect.u1, rect.v0], [rect.u1, rect.v1], [rect.u0, rect.v1]];
    let g = gauss_rule(order)?;
    let mut rule = SingularRule { triangles: Vec::new(), points: Vec::new() };
    for e in 0..4 {
        let (a, b) = (c[e], c[(e + 1) % 4]);
        if on_segment(p, a, b) {
            continue;
        }
        let ba = [b[0] - a[0], b[1] - a[1]];
        let area2 = cross2(ba, [a[0] - p[0], a[1] - p[1]]).abs();
        rule.triangles.push([p, a, b]);
        for (s, ws) in g.points.iter().zip(&g.weights) {
            let e_pt = [a[0] + 0.5 * (1.0 + s) * ba[0], a[1] + 0.5 * (1.0 + s) * ba[1]];
            for (t, wt) in g.points.iter().zip(&g.weights) {
                let f = 0.5 * (1.0 + t);
                rule.points.push(QPoint2 {
                    u: p[0] + f * (e_pt[0] - p[0]),
                    v: p[1] + f * (e_pt[1] - p[1]),
                    w: ws * wt * (1.0 + t) / 8.0 * area2,
                });
            }
        }
    }
    Ok(rule)
}

/// Integration points for a rectangle that contains the apex on its closure:
/// elongated rectangles are first split so that the apex sits in a piece of
/// bounded aspect ratio; the other pieces are integrated as regular regions.
pub fn singular_points(
    map: &dyn Fn(f64, f64) -> Vec3,
    rect: &Rect,
    apex: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<Vec<QPoint2>> {
    let mut out = Vec::new();
    singular_recurse(map, rect, apex, cfg, 0, &mut out)?;
    Ok(out)
}

fn singular_recurse(
    map: &dyn Fn(f64, f64) -> Vec3,
    rect: &Rect,
    apex: (f64, f64),
    cfg: &QuadratureConfig,
    depth: usize,
    out: &mut Vec<QPoint2>,
) -> Result<()> {
    let (lu, lv) = rect_lengths(map, rect);
    let halves = if lu > cfg.max_aspect * lv && depth < cfg.max_depth {
        Some(rect.split_u())
    } else if lv > cfg.max_aspect * lu && depth < cfg.max_depth {
        Some(rect.split_v())
    } else {
        None
    };
    match halves {
        None => out.extend(triangle_singular_rule(rect, apex.0, apex.1, cfg.singular_order)?.points),
        Some(parts) => {
            let y = map(apex.0, apex.1);
            for p in &parts {
                if p.contains(apex.0, apex.1) {
                    singular_recurse(map, p, apex, cfg, depth + 1, out)?;
                } else {
                    out.extend(regular_points(map, p, &y, cfg)?);
                }
            }
        }
    }
    Ok(())
}

/// Sorted, de-duplicated breakpoints on [0, 1] including both ends.
pub fn merge_lines(lines: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = lines.into_iter().filter(|x| (0.0..=1.0).contains(x)).collect();
    v.push(0.0);
    v.push(1.0);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    v
}

/// Tiles the parameter square with rectangles whose edges pass through the
/// given parameter lines, then splits rectangles whose physical aspect ratio
/// exceeds `max_aspect`. `aspect_ok` may exempt rectangles from splitting.
pub fn partition_regions(
    map: &dyn Fn(f64, f64) -> Vec3,
    u_lines: &[f64],
    v_lines: &[f64],
    max_aspect: f64,
    split: &dyn Fn(&Rect) -> bool,
) -> Vec<Rect> {
    let us = merge_lines(u_lines.iter().copied());
    let vs = merge_lines(v_lines.iter().copied());
    let mut out = Vec::new();
    for vw in vs.windows(2) {
        for uw in us.windows(2) {
            let r = Rect::new(uw[0], uw[1], vw[0], vw[1]);
            if !split(&r) {
                out.push(r);
                continue;
            }
            let corner = |u, v| map(u, v);
            let lu = 0.5
                * ((corner(r.u1, r.v0) - corner(r.u0, r.v0)).norm() + (corner(r.u1, r.v1) - corner(r.u0, r.v1)).norm());
            let lv = 0.5
                * ((corner(r.u0, r.v1) - corner(r.u0, r.v0)).norm() + (corner(r.u1, r.v1) - corner(r.u1, r.v0)).norm());
            let (mut ku, mut kv) = (1usize, 1usize);
            if lu > max_aspect * lv && lv > 0.0 {
                ku = (lu / (max_aspect * lv)).ceil() as usize;
            } else if lv > max_aspect * lu && lu > 0.0 {
                kv = (lv / (max_aspect * lu)).ceil() as usize;
            }
            for j in 0..kv {
                for i in 0..ku {
                    let u0 = r.u0 + (r.u1 - r.u0) * i as f64 / ku as f64;
                    let u1 = if i + 1 == ku { r.u1 } else { r.u0 + (r.u1 - r.u0) * (i + 1) as f64 / ku as f64 };
                    let v0 = r.v0 + (r.v1 - r.v0) * j as f64 / kv as f64;
                    let v1 = if j + 1 == kv { r.v1 } else { r.v0 + (r.v1 - r.v0) * (j + 1) as f64 / kv as f64 };
                    out.push(Rect::new(u0, u1, v0, v1));
                }
            }
        }
    }
    out
}

/// Parameter box in three local coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

/// Volume quadrature point in local coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint3 {
    pub s: [f64; 3],
    pub w: f64,
}

impl Box3 {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self { lo, hi }
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= self.lo[k] - CLOSURE_TOL && p[k] <= self.hi[k] + CLOSURE_TOL)
    }

    fn split(&self, dir: usize) -> [Box3; 2] {
        let m = 0.5 * (self.lo[dir] + self.hi[dir]);
        let mut a = *self;
        let mut b = *self;
        a.hi[dir] = m;
        b.lo[dir] = m;
        [a, b]
    }

    fn at(&self, f: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|k| self.lo[k] + f[k] * (self.hi[k] - self.lo[k]))
    }
}

/// Physical lengths of a box along its local directions (chords through the
/// centre).
pub fn box_lengths(map: &dyn Fn(&[f64; 3]) -> Vec3, b: &Box3) -> [f64; 3] {
    let c = map(&b.at([0.5; 3]));
    [0, 1, 2].map(|k| {
        let mut lo = [0.5; 3];
        let mut hi = [0.5; 3];
        lo[k] = 0.0;
        hi[k] = 1.0;
        (map(&b.at(lo)) - c).norm() + (map(&b.at(hi)) - c).norm()
    })
}

fn box_distance(map: &dyn Fn(&[f64; 3]) -> Vec3, b: &Box3, y: &Vec3) -> f64 {
    let at = |f: [f64; 3]| map(&b.at(f));
    let mut best = (f64::INFINITY, [0.0; 3]);
    for k in 0..27 {
        let f = [(k % 3) as f64 * 0.5, ((k / 3) % 3) as f64 * 0.5, (k / 9) as f64 * 0.5];
        let d = (at(f) - y).norm();
        if d < best.0 {
            best = (d, f);
        }
    }
    nearest_distance(&at, best.1, y).min(best.0)
}

/// Tensor Gauss points in a box.
pub fn box_points(b: &Box3, n: [usize; 3], out: &mut Vec<QPoint3>) -> Result<()> {
    let g = [gauss_rule(n[0])?, gauss_rule(n[1])?, gauss_rule(n[2])?];
    let h = [0, 1, 2].map(|k| 0.5 * (b.hi[k] - b.lo[k]));
    for (c, wc) in g[2].points.iter().zip(&g[2].weights) {
        for (bb, wb) in g[1].points.iter().zip(&g[1].weights) {
            for (a, wa) in g[0].points.iter().zip(&g[0].weights) {
                out.push(QPoint3 {
                    s: [b.lo[0] + h[0] * (1.0 + a), b.lo[1] + h[1] * (1.0 + bb), b.lo[2] + h[2] * (1.0 + c)],
                    w: wa * wb * wc * h[0] * h[1] * h[2],
                });
            }
        }
    }
    Ok(())
}

/// Octree analogue of [`quadtree_subdivide`] returning Gauss points.
pub fn octree_points(
    map: &dyn Fn(&[f64; 3]) -> Vec3,
    b: &Box3,
    y: &Vec3,
    cfg: &QuadratureConfig,
) -> Result<Vec<QPoint3>> {
    let mut out = Vec::new();
    octree(map, b, y, cfg, 0, &mut out)?;
    Ok(out)
}

fn octree(
    map: &dyn Fn(&[f64; 3]) -> Vec3,
    b: &Box3,
    y: &Vec3,
    cfg: &QuadratureConfig,
    depth: usize,
    out: &mut Vec<QPoint3>,
) -> Result<()> {
    let d = box_distance(map, b, y);
    let len = box_lengths(map, b);
    let n = len.map(|l| cfg.count(l, d));
    let over: Vec<usize> = (0..3).filter(|&k| n[k] > cfg.gauss_cap).collect();
    if over.is_empty() || depth >= cfg.max_depth {
        return box_points(b, n.map(|k| k.min(cfg.gauss_cap)), out);
    }
    let mut boxes = vec![*b];
    for &k in &over {
        boxes = boxes.iter().flat_map(|bx| bx.split(k)).collect();
    }
    for bx in &boxes {
        octree(map, bx, y, cfg, depth + 1, out)?;
    }
    Ok(())
}

/// Fan of pyramids from an apex in the closure of a box with a collapsed-cube
/// Gauss rule on each; the Jacobian vanishes quadratically at the apex.
pub fn pyramid_singular_rule(b: &Box3, apex: &[f64; 3], order: usize) -> Result<Vec<QPoint3>> {
    if !b.contains(apex) {
        return Err(Error::Integration("apex outside its cell".into()));
    }
    let g = gauss_rule(order)?;
    let mut out = Vec::new();
    for axis in 0..3 {
        let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
        for face in [b.lo[axis], b.hi[axis]] {
            let h = (face - apex[axis]).abs();
            if h < CLOSURE_TOL {
                continue;
            }
            let (da, db) = (b.hi[a1] - b.lo[a1], b.hi[a2] - b.lo[a2]);
            for (p, wp) in g.points.iter().zip(&g.weights) {
                for (q, wq) in g.points.iter().zip(&g.weights) {
                    let mut f = [0.0; 3];
                    f[axis] = face;
                    f[a1] = b.lo[a1] + 0.5 * (1.0 + p) * da;
                    f[a2] = b.lo[a2] + 0.5 * (1.0 + q) * db;
                    for (t, wt) in g.points.iter().zip(&g.weights) {
                        let w = 0.5 * (1.0 + t);
                        out.push(QPoint3 {
                            s: [0, 1, 2].map(|k| apex[k] + w * (f[k] - apex[k])),
                            w: wp * wq * wt * w * w * da * db * h / 8.0,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Integration points for a box containing the apex: the box is cut at the
/// apex, elongated pieces are split, pieces away from the apex are
/// integrated regularly.
pub fn singular_box_points(
    map: &dyn Fn(&[f64; 3]) -> Vec3,
    b: &Box3,
    apex: &[f64; 3],
    cfg: &QuadratureConfig,
) -> Result<Vec<QPoint3>> {
    let mut out = Vec::new();
    singular_box(map, b, apex, cfg, 0, &mut out)?;
    Ok(out)
}

fn singular_box(
    map: &dyn Fn(&[f64; 3]) -> Vec3,
    b: &Box3,
    apex: &[f64; 3],
    cfg: &QuadratureConfig,
    depth: usize,
    out: &mut Vec<QPoint3>,
) -> Result<()> {
    // an apex inside the box becomes a corner of the pieces
    if let Some(k) = (0..3).find(|&k| apex[k] > b.lo[k] + CLOSURE_TOL && apex[k] < b.hi[k] - CLOSURE_TOL) {
        let (mut lower, mut upper) = (*b, *b);
        lower.hi[k] = apex[k];
        upper.lo[k] = apex[k];
        singular_box(map, &lower, apex, cfg, depth, out)?;
        return singular_box(map, &upper, apex, cfg, depth, out);
    }
    let len = box_lengths(map, b);
    let (kmax, lmax) = (0..3).map(|k| (k, len[k])).fold((0, 0.0), |a, c| if c.1 > a.1 { c } else { a });
    let lmin = len.iter().cloned().fold(f64::INFINITY, f64::min);
    if lmax <= cfg.max_aspect * lmin || depth >= cfg.max_depth {
        out.extend(pyramid_singular_rule(b, apex, cfg.singular_order)?);
        return Ok(());
    }
    let y = map(apex);
    for part in b.split(kmax) {
        if part.contains(apex) {
            singular_box(map, &part, apex, cfg, depth + 1, out)?;
        } else {
            octree(map, &part, &y, cfg, depth + 1, out)?;
        }
    }
    Ok(())
}
