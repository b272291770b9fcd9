//! Coupled and condensed solution of the boundary/inclusion system, the
//! Mohr-Coulomb material, and the incremental elasto-plastic driver.
//!
//! Unknowns are the boundary displacement parameters `x` (3 per node) and
//! the Voigt strains at the inclusion grid points (6 per point). For a
//! linearised material `σ0 = s + D' ε` per point the system reads
//!
//! ```text
//! L x - B0 σ0 = Λ r
//! ε = Ĉ x + Λ c̄̄ + Ĉ0 σ0
//! ```

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, SymmetricEigen, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::voigt_to_tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MohrCoulomb {
    pub cohesion: f64,
    /// Friction angle in radians.
    pub friction: f64,
    /// Dilation angle in radians.
    pub dilation: f64,
    /// When set, yield uses the principal stresses in the plane normal to
    /// this axis (0 = x, 1 = y, 2 = z) and the axial stress is taken as the
    /// intermediate one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_axis: Option<usize>,
}

impl MohrCoulomb {
    pub fn validate(&self) -> Result<()> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.cohesion > 0.0) {
            return Err(Error::Validation("cohesion must be positive".into()));
        }
        if !(0.0 <= self.dilation && self.dilation <= self.friction && self.friction < half_pi) {
            return Err(Error::Validation("need 0 <= dilation <= friction < 90 degrees".into()));
        }
        if self.plane_axis.is_some_and(|a| a > 2) {
            return Err(Error::Validation("plane axis must be 0, 1 or 2".into()));
        }
        Ok(())
    }

    /// Yield tolerance used for "on the surface" decisions.
    pub fn tol(&self) -> f64 {
        1e-8 * self.cohesion * self.friction.cos()
    }

    /// Uniaxial compressive strength `2 c cos φ / (1 - sin φ)`.
    pub fn sigma_cm(&self) -> f64 {
        2.0 * self.cohesion * self.friction.cos() / (1.0 - self.friction.sin())
    }
}

/// Major and minor principal stresses with their directions.
#[derive(Debug, Clone, Copy)]
struct Principal {
    s1: f64,
    s3: f64,
    n1: [f64; 3],
    n3: [f64; 3],
}

fn principal(sigma: &Vector6<f64>, plane_axis: Option<usize>) -> Principal {
    match plane_axis {
        None => {
            let t = voigt_to_tensor(&[sigma[0], sigma[1], sigma[2], sigma[3], sigma[4], sigma[5]]);
            let eig = SymmetricEigen::new(t);
            let (mut i1, mut i3) = (0, 0);
            for i in 1..3 {
                if eig.eigenvalues[i] > eig.eigenvalues[i1] {
                    i1 = i;
                }
                if eig.eigenvalues[i] < eig.eigenvalues[i3] {
                    i3 = i;
                }
            }
            if i1 == i3 {
                i3 = (i1 + 1) % 3;
            }
            let col = |i: usize| [eig.eigenvectors[(0, i)], eig.eigenvectors[(1, i)], eig.eigenvectors[(2, i)]];
            Principal { s1: eig.eigenvalues[i1], s3: eig.eigenvalues[i3], n1: col(i1), n3: col(i3) }
        }
        Some(axis) => {
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let t = voigt_to_tensor(&[sigma[0], sigma[1], sigma[2], sigma[3], sigma[4], sigma[5]]);
            let (saa, sbb, sab) = (t[(a, a)], t[(b, b)], t[(a, b)]);
            let m = 0.5 * (saa + sbb);
            let rad = (0.25 * (saa - sbb).powi(2) + sab * sab).sqrt();
            let th = 0.5 * (2.0 * sab).atan2(saa - sbb);
            let mut n1 = [0.0; 3];
            let mut n3 = [0.0; 3];
            n1[a] = th.cos();
            n1[b] = th.sin();
            n3[a] = -th.sin();
            n3[b] = th.cos();
            Principal { s1: m + rad, s3: m - rad, n1, n3 }
        }
    }
}

/// Voigt form (engineering shear) of `n nᵀ` as a stress derivative.
fn dyad(n: &[f64; 3]) -> Vector6<f64> {
    Vector6::new(n[0] * n[0], n[1] * n[1], n[2] * n[2], 2.0 * n[0] * n[1], 2.0 * n[1] * n[2], 2.0 * n[0] * n[2])
}

/// `F = ½(σ1 - σ3) + ½(σ1 + σ3) sin φ - c cos φ`, tension positive.
pub fn mc_yield(sigma: &Vector6<f64>, mc: &MohrCoulomb) -> f64 {
    let p = principal(sigma, mc.plane_axis);
    0.5 * (p.s1 - p.s3) + 0.5 * (p.s1 + p.s3) * mc.friction.sin() - mc.cohesion * mc.friction.cos()
}

/// Gradients of the yield function and of the plastic potential.
pub fn mc_gradients(sigma: &Vector6<f64>, mc: &MohrCoulomb) -> (Vector6<f64>, Vector6<f64>) {
    let p = principal(sigma, mc.plane_axis);
    let (d1, d3) = (dyad(&p.n1), dyad(&p.n3));
    let grad = |angle: f64| d1 * (0.5 * (1.0 + angle.sin())) - d3 * (0.5 * (1.0 - angle.sin()));
    (grad(mc.friction), grad(mc.dilation))
}

/// Elasto-plastic tangent `D_e - (D_e b)(aᵀ D_e) / (aᵀ D_e b)` with `a` the
/// yield gradient and `b` the flow direction.
pub fn d_ep(sigma: &Vector6<f64>, d_e: &Matrix6<f64>, mc: &MohrCoulomb) -> Result<Matrix6<f64>> {
    let (a, b) = mc_gradients(sigma, mc);
    tangent(d_e, &a, &b)
}

pub fn tangent(d_e: &Matrix6<f64>, a: &Vector6<f64>, b: &Vector6<f64>) -> Result<Matrix6<f64>> {
    let db = d_e * b;
    let ad = a.transpose() * d_e;
    let h = (ad * b)[0];
    if !(h > 0.0) {
        return Err(Error::DegenerateTangent(h));
    }
    Ok(d_e - db * ad / h)
}

/// `f = F_new / (F_new - F_old)` clipped to [0, 1].
pub fn plastic_fraction(f_new: f64, f_old: f64) -> f64 {
    if f_new <= 0.0 {
        return 0.0;
    }
    if f_old >= 0.0 {
        return 1.0;
    }
    let den = f_new - f_old;
    if den == 0.0 {
        return 0.0;
    }
    (f_new / den).clamp(0.0, 1.0)
}

/// Returns a trial stress to the yield surface along `D_e b`.
pub fn return_map(trial: &Vector6<f64>, d_e: &Matrix6<f64>, mc: &MohrCoulomb) -> Result<Vector6<f64>> {
    let tol = mc.tol();
    let mut s = *trial;
    for _ in 0..50 {
        let f = mc_yield(&s, mc);
        if f <= tol {
            return Ok(s);
        }
        let (a, b) = mc_gradients(&s, mc);
        let db = d_e * b;
        let h = a.dot(&db);
        if !(h > 0.0) {
            return Err(Error::DegenerateTangent(h));
        }
        s -= db * (f / h);
    }
    if mc_yield(&s, mc) > tol {
        // beyond the apex: the only admissible state on this path
        let apex = mc.cohesion / mc.friction.tan().max(1e-12);
        s = apex_state(&s, apex, mc.plane_axis);
    }
    Ok(s)
}

fn apex_state(s: &Vector6<f64>, apex: f64, plane_axis: Option<usize>) -> Vector6<f64> {
    match plane_axis {
        None => Vector6::new(apex, apex, apex, 0.0, 0.0, 0.0),
        Some(axis) => {
            let mut out = *s;
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            out[a] = apex;
            out[b] = apex;
            let shear = match (a.min(b), a.max(b)) {
                (0, 1) => 3,
                (1, 2) => 4,
                _ => 5,
            };
            out[shear] = 0.0;
            out
        }
    }
}

/// Largest `λ ∈ (0, 1]` for which every point stays elastic under
/// `σv + λ Δσ`, found by bisection per point.
pub fn first_yield_factor(points: &[(Vector6<f64>, Vector6<f64>, MohrCoulomb)]) -> Result<f64> {
    let mut lambda: f64 = 1.0;
    for (virgin, delta, mc) in points {
        let g = |l: f64| mc_yield(&(virgin + delta * l), mc);
        if g(0.0) > mc.tol() {
            return Err(Error::Validation("virgin stress violates the yield condition".into()));
        }
        if g(1.0) <= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        lambda = lambda.min(lo);
    }
    Ok(lambda)
}

/// Operators of the coupled system; `M` grid points, `N` boundary nodes.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    /// 3N × 3N
    pub l: DMatrix<f64>,
    /// 3N
    pub r: DVector<f64>,
    /// 3N × 6M
    pub b0: DMatrix<f64>,
    /// `Ĉ = B̂ Â`, 6M × 3N
    pub c_hat: DMatrix<f64>,
    /// `Ĉ0 = B̂ B̄0`, 6M × 6M
    pub c0: DMatrix<f64>,
    /// `c̄̄ = B̂ c̄`, 6M
    pub cbb: DVector<f64>,
}

/// Linearised initial stress `σ0 = s + D' ε` at every grid point.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub d_prime: Vec<Matrix6<f64>>,
    pub s: DVector<f64>,
}

impl Linearization {
    pub fn active(&self) -> Vec<usize> {
        (0..self.d_prime.len()).filter(|&p| self.d_prime[p].iter().any(|v| *v != 0.0)).collect()
    }

    pub fn sigma0(&self, eps: &DVector<f64>) -> DVector<f64> {
        let mut out = self.s.clone();
        for (p, d) in self.d_prime.iter().enumerate() {
            let e = eps.fixed_rows::<6>(6 * p);
            let mut o = out.fixed_rows_mut::<6>(6 * p);
            o += d * e;
        }
        out
    }
}

/// Which linear solve to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    #[default]
    Condensed,
    Coupled,
}

fn gather_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

fn gather_cols(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

fn voigt_index(points: &[usize]) -> Vec<usize> {
    points.iter().flat_map(|&p| (0..6).map(move |k| 6 * p + k)).collect()
}

fn block_diag(d: &[Matrix6<f64>], points: &[usize]) -> DMatrix<f64> {
    let n = 6 * points.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, &p) in points.iter().enumerate() {
        m.fixed_view_mut::<6, 6>(6 * i, 6 * i).copy_from(&d[p]);
    }
    m
}

/// Solution of one linear solve: boundary parameters and grid strains.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: DVector<f64>,
    pub eps: DVector<f64>,
}

/// Solves the system at load factor `load` for a given linearisation.
pub fn solve_linear(sys: &CoupledSystem, lin: &Linearization, load: f64, path: SolvePath) -> Result<LinearSolution> {
    let n = sys.l.nrows();
    let act = lin.active();
    let idx = voigt_index(&act);
    let m = idx.len();
    // known parts: r1 = Λ r + B0 s, r2 = Λ c̄̄ + Ĉ0 s
    let r1 = &sys.r * load + &sys.b0 * &lin.s;
    let r2_all = &sys.cbb * load + &sys.c0 * &lin.s;
    let x;
    let mut eps_act = DVector::zeros(m);
    if m == 0 {
        x = sys.l.clone().lu().solve(&r1).ok_or(Error::SingularMatrix("boundary system"))?;
    } else {
        let dp = block_diag(&lin.d_prime, &act);
        let b0d = gather_cols(&sys.b0, &idx) * &dp;
        let c_s = gather_rows(&sys.c_hat, &idx);
        let k = DMatrix::identity(m, m) - gather_rows(&gather_cols(&sys.c0, &idx), &idx) * &dp;
        let r2 = DVector::from_fn(m, |i, _| r2_all[idx[i]]);
        match path {
            SolvePath::Coupled => {
                let mut a = DMatrix::zeros(n + m, n + m);
                a.view_mut((0, 0), (n, n)).copy_from(&sys.l);
                a.view_mut((0, n), (n, m)).copy_from(&(-&b0d));
                a.view_mut((n, 0), (m, n)).copy_from(&(-&c_s));
                a.view_mut((n, n), (m, m)).copy_from(&k);
                let mut rhs = DVector::zeros(n + m);
                rhs.rows_mut(0, n).copy_from(&r1);
                rhs.rows_mut(n, m).copy_from(&r2);
                let sol = a.lu().solve(&rhs).ok_or(Error::SingularMatrix("coupled system"))?;
                x = sol.rows(0, n).into_owned();
                eps_act = sol.rows(n, m).into_owned();
            }
            SolvePath::Condensed => {
                let klu = k.lu();
                let a_mat = klu.solve(&c_s).ok_or(Error::SingularMatrix("inclusion strain system"))?;
                let b_vec = klu.solve(&r2).ok_or(Error::SingularMatrix("inclusion strain system"))?;
                let l_mod = &sys.l - &b0d * &a_mat;
                let r_mod = &r1 + &b0d * &b_vec;
                x = l_mod.lu().solve(&r_mod).ok_or(Error::SingularMatrix("condensed system"))?;
                eps_act = &a_mat * &x + b_vec;
            }
        }
    }
    // strains everywhere from the active ones
    let mut sigma0 = lin.s.clone();
    for (i, &p) in act.iter().enumerate() {
        let e = eps_act.fixed_rows::<6>(6 * i);
        let mut o = sigma0.fixed_rows_mut::<6>(6 * p);
        o += lin.d_prime[p] * e;
    }
    let eps = &sys.c_hat * &x + &sys.cbb * load + &sys.c0 * &sigma0;
    Ok(LinearSolution { x, eps })
}

/// Constitutive description of one grid point, in the frame its strains
/// are expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct PointModel {
    /// Stiffness of the surrounding medium (the kernel material).
    pub d: Matrix6<f64>,
    /// Elastic stiffness of the inclusion material.
    pub d_e: Matrix6<f64>,
    pub virgin: Vector6<f64>,
    pub yield_: Option<MohrCoulomb>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub path: SolvePath,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self { steps: 10, tol: 0.01, max_iter: 50, path: SolvePath::Condensed }
    }
}

/// Converged state after the final increment.
#[derive(Debug, Clone)]
pub struct DriverResult {
    pub x: DVector<f64>,
    pub eps: DVector<f64>,
    /// Total stress per point.
    pub sigma: Vec<Vector6<f64>>,
    pub sigma0: DVector<f64>,
    pub yield_value: Vec<f64>,
    /// Plastic fraction of the last increment.
    pub fraction: Vec<f64>,
    /// Whether the point has yielded in any increment.
    pub yielded: Vec<bool>,
    /// First-yield load factor (1 when the response stays elastic).
    pub lambda: f64,
    /// Iterations per increment.
    pub iterations: Vec<usize>,
    /// Relative σ0 change per iteration, per increment.
    pub history: Vec<Vec<f64>>,
}

fn point_stress(eps: &DVector<f64>, p: usize) -> Vector6<f64> {
    eps.fixed_rows::<6>(6 * p).into_owned()
}

/// Elastic phase, first-yield scaling and load increments with initial
/// stress iterations.
pub fn incremental_solve(sys: &CoupledSystem, models: &[PointModel], cfg: &DriverConfig) -> Result<DriverResult> {
    let np = models.len();
    if cfg.steps == 0 || cfg.max_iter == 0 || !(cfg.tol > 0.0) {
        return Err(Error::Validation("steps, max_iter and tol must be positive".into()));
    }
    let elastic_d: Vec<Matrix6<f64>> = models.iter().map(|m| m.d - m.d_e).collect();
    let lin = Linearization { d_prime: elastic_d.clone(), s: DVector::zeros(6 * np) };
    let el = solve_linear(sys, &lin, 1.0, cfg.path)?;
    let induced: Vec<Vector6<f64>> = (0..np).map(|p| models[p].d_e * point_stress(&el.eps, p)).collect();

    let plastic: Vec<(Vector6<f64>, Vector6<f64>, MohrCoulomb)> =
        models.iter().zip(&induced).filter_map(|(m, d)| m.yield_.map(|mc| (m.virgin, *d, mc))).collect();
    let lambda = if plastic.is_empty() { 1.0 } else { first_yield_factor(&plastic)? };
    let yv = |sig: &[Vector6<f64>]| -> Vec<f64> {
        models.iter().zip(sig).map(|(m, s)| m.yield_.map_or(f64::NEG_INFINITY, |mc| mc_yield(s, &mc))).collect()
    };

    let mut x = &el.x * lambda;
    let mut eps = &el.eps * lambda;
    let mut sigma: Vec<Vector6<f64>> = (0..np).map(|p| models[p].virgin + induced[p] * lambda).collect();
    let mut sigma0 = lin.sigma0(&eps);
    let mut fraction = vec![0.0; np];
    let mut yielded = vec![false; np];
    let mut iterations = Vec::new();
    let mut history = Vec::new();

    if lambda < 1.0 {
        for inc in 1..=cfg.steps {
            let load = lambda + inc as f64 * (1.0 - lambda) / cfg.steps as f64;
            let eps_start = eps.clone();
            let sig_start = sigma.clone();
            let f_start = yv(&sig_start);
            let mut d_prime: Vec<Matrix6<f64>> = (0..np)
                .map(|p| match models[p].yield_ {
                    Some(mc) if f_start[p] >= -mc.tol() * 1e4 => {
                        Ok(models[p].d - d_ep(&sig_start[p], &models[p].d_e, &mc)?)
                    }
                    _ => Ok(elastic_d[p]),
                })
                .collect::<Result<_>>()?;
            let mut hist = Vec::new();
            let mut converged = false;
            for _ in 0..cfg.max_iter {
                let s = {
                    let mut s = sigma0.clone();
                    for p in 0..np {
                        let mut o = s.fixed_rows_mut::<6>(6 * p);
                        o -= d_prime[p] * eps.fixed_rows::<6>(6 * p);
                    }
                    s
                };
                let sol = solve_linear(sys, &Linearization { d_prime: d_prime.clone(), s }, load, cfg.path)?;
                let updates: Vec<(Vector6<f64>, f64, Matrix6<f64>)> = (0..np)
                    .into_par_iter()
                    .map(|p| {
                        let m = &models[p];
                        let de = point_stress(&sol.eps, p) - point_stress(&eps_start, p);
                        let trial = sig_start[p] + m.d_e * de;
                        match m.yield_ {
                            Some(mc) if mc_yield(&trial, &mc) > mc.tol() => {
                                let f = plastic_fraction(mc_yield(&trial, &mc), f_start[p]);
                                let s = return_map(&trial, &m.d_e, &mc)?;
                                let dep = d_ep(&s, &m.d_e, &mc)?;
                                Ok((s, f, (m.d - m.d_e) * (1.0 - f) + (m.d - dep) * f))
                            }
                            _ => Ok((trial, 0.0, elastic_d[p])),
                        }
                    })
                    .collect::<Result<_>>()?;
                let mut s0_new = DVector::zeros(6 * np);
                for p in 0..np {
                    let v = models[p].d * point_stress(&sol.eps, p) - (updates[p].0 - models[p].virgin);
                    s0_new.fixed_rows_mut::<6>(6 * p).copy_from(&v);
                }
                let norm = s0_new.norm();
                let change = if norm > 0.0 { (&s0_new - &sigma0).norm() / norm } else { 0.0 };
                hist.push(change);
                x = sol.x;
                eps = sol.eps;
                sigma0 = s0_new;
                for p in 0..np {
                    sigma[p] = updates[p].0;
                    fraction[p] = updates[p].1;
                    d_prime[p] = updates[p].2;
                }
                if change < cfg.tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence {
                    increment: inc,
                    iterations: hist.len(),
                    last_change: *hist.last().unwrap_or(&f64::NAN),
                    history: hist,
                });
            }
            for p in 0..np {
                yielded[p] |= fraction[p] > 0.0;
            }
            iterations.push(hist.len());
            history.push(hist);
        }
    }
    Ok(DriverResult { x, eps, yield_value: yv(&sigma), sigma, sigma0, fraction, yielded, lambda, iterations, history })
}

/// Principal-stress helper for reports: (σ1, σ3).
pub fn principal_extremes(sigma: &Vector6<f64>, plane_axis: Option<usize>) -> (f64, f64) {
    let p = principal(sigma, plane_axis);
    (p.s1, p.s3)
}

/// Normal stress along a unit axis.
pub fn axial_stress(sigma: &Vector6<f64>, axis: &nalgebra::Vector3<f64>) -> f64 {
    let t: Matrix3<f64> = voigt_to_tensor(&[sigma[0], sigma[1], sigma[2], sigma[3], sigma[4], sigma[5]]);
    (axis.transpose() * t * axis)[0]
}
