//! Kelvin fundamental solutions for the isotropic full space and the
//! initial-stress kernel in Voigt form.
//!
//! All kernels take the source `y` first and the field point `x` second and
//! use `r = x - y`. Voigt order is (11, 22, 33, 12, 23, 13) with engineering
//! shear strains.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nurbs::Vec3;

pub type Matrix3x6 = SMatrix<f64, 3, 6>;

/// Below this distance source and field point are treated as coincident.
pub const MIN_DISTANCE: f64 = 1e-14;

/// Voigt slot of each symmetric index pair.
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticConstants {
    pub young: f64,
    pub poisson: f64,
}

impl ElasticConstants {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        let k = Self { young, poisson };
        k.validate()?;
        Ok(k)
    }

    pub fn from_shear(shear: f64, poisson: f64) -> Result<Self> {
        Self::new(2.0 * shear * (1.0 + poisson), poisson)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.young > 0.0 && self.young.is_finite()) {
            return Err(Error::Validation(format!("Young's modulus {} must be positive", self.young)));
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(Error::Validation(format!("Poisson ratio {} outside (-1, 0.5)", self.poisson)));
        }
        Ok(())
    }

    pub fn shear(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }

    /// `C = 1 / (16 π G (1 - ν))`
    pub fn c(&self) -> f64 {
        1.0 / (16.0 * PI * self.shear() * (1.0 - self.poisson))
    }

    /// `C3 = 1 - 2ν`
    pub fn c3(&self) -> f64 {
        1.0 - 2.0 * self.poisson
    }

    /// Isotropic stiffness in Voigt form (engineering shear strains).
    pub fn stiffness(&self) -> Matrix6<f64> {
        isotropic_stiffness(self.young, self.poisson)
    }
}

pub fn isotropic_stiffness(young: f64, poisson: f64) -> Matrix6<f64> {
    let g = young / (2.0 * (1.0 + poisson));
    let lam = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mut d = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = lam;
        }
        d[(i, i)] = lam + 2.0 * g;
        d[(i + 3, i + 3)] = g;
    }
    d
}

pub fn voigt_to_tensor(s: &[f64; 6]) -> Matrix3<f64> {
    Matrix3::new(s[0], s[3], s[5], s[3], s[1], s[4], s[5], s[4], s[2])
}

pub fn tensor_to_voigt(t: &Matrix3<f64>) -> Vector6<f64> {
    Vector6::new(t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(0, 1)], t[(1, 2)], t[(0, 2)])
}

/// Rotation of Voigt stresses from a local frame whose axes are the columns
/// of `t` to the global frame: `σ = T σ' Tᵀ`.
pub fn stress_rotation(t: &Matrix3<f64>) -> Matrix6<f64> {
    let mut q = Matrix6::zeros();
    for (a, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        for (b, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
            q[(a, b)] = if k == l { t[(i, k)] * t[(j, l)] } else { t[(i, k)] * t[(j, l)] + t[(i, l)] * t[(j, k)] };
        }
    }
    q
}

fn unit_and_length(y: &Vec3, x: &Vec3) -> Result<(Vec3, f64)> {
    let r = x - y;
    let len = r.norm();
    if !(len > MIN_DISTANCE) {
        return Err(Error::Singularity(len));
    }
    Ok((r / len, len))
}

/// Displacement kernel `U_ij = C/r [(3 - 4ν) δij + r,i r,j]`.
pub fn kernel_u(y: &Vec3, x: &Vec3, k: &ElasticConstants) -> Result<Matrix3<f64>> {
    let (d, r) = unit_and_length(y, x)?;
    let c = k.c() / r;
    let mut u = d * d.transpose() * c;
    let diag = c * (3.0 - 4.0 * k.poisson);
    for i in 0..3 {
        u[(i, i)] += diag;
    }
    Ok(u)
}

/// Traction kernel for a field point with unit normal `n`.
pub fn kernel_t(y: &Vec3, x: &Vec3, n: &Vec3, k: &ElasticConstants) -> Result<Matrix3<f64>> {
    let (d, r) = unit_and_length(y, x)?;
    let c3 = k.c3();
    let f = -1.0 / (8.0 * PI * (1.0 - k.poisson) * r * r);
    let drdn = d.dot(n);
    let mut t = d * d.transpose() * (3.0 * drdn);
    for i in 0..3 {
        t[(i, i)] += c3 * drdn;
        for j in 0..3 {
            t[(i, j)] += c3 * (d[j] * n[i] - d[i] * n[j]);
        }
    }
    Ok(t * f)
}

/// Initial-stress kernel `E_ijk` packed as a 3×6 matrix; the shear columns
/// hold `E_ijk + E_ikj`.
pub fn kernel_e(y: &Vec3, x: &Vec3, k: &ElasticConstants) -> Result<Matrix3x6> {
    let (d, r) = unit_and_length(y, x)?;
    let c3 = k.c3();
    let f = -k.c() / (r * r);
    let e = |i: usize, j: usize, l: usize| -> f64 {
        let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        c3 * (d[l] * dl(i, j) + d[j] * dl(i, l)) - d[i] * dl(j, l) + 3.0 * d[i] * d[j] * d[l]
    };
    let mut m = Matrix3x6::zeros();
    for i in 0..3 {
        for (col, &(j, l)) in VOIGT_PAIRS.iter().enumerate() {
            m[(i, col)] = if j == l { f * e(i, j, l) } else { f * (e(i, j, l) + e(i, l, j)) };
        }
    }
    Ok(m)
}
