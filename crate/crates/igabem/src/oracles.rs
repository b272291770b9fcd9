//! Closed-form plane-strain references for circular tunnels.
//!
//! The tunnel axis is `y`; points are given in 3-D and only their `x` and
//! `z` coordinates matter. Stresses are compression-positive here, unlike
//! in the rest of the crate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nurbs::Vec3;

/// Displacement caused by excavating a circular hole of radius `radius` in
/// ground with vertical virgin stress `p0` and horizontal stress `k0 p0`
/// (both compressive for positive values).
pub fn kirsch_displacement(p0: f64, k0: f64, radius: f64, shear: f64, nu: f64, point: &Vec3) -> Result<Vec3> {
    let (x, z) = (point.x, point.z);
    let r = x.hypot(z);
    if r < radius * (1.0 - 1e-12) {
        return Err(Error::Validation(format!("point at radius {r} lies inside the hole")));
    }
    // tension-positive far field: σxx = -k0 p0, σzz = -p0
    let (sx, sz) = (-k0 * p0, -p0);
    let p = 0.5 * (sx + sz);
    let q = 0.5 * (sx - sz);
    let th = z.atan2(x);
    let a2 = radius * radius / (r * r);
    let f = radius * radius / (2.0 * shear * r);
    let ur = f * (p + q * (4.0 * (1.0 - nu) - a2) * (2.0 * th).cos());
    let ut = -f * q * (2.0 * (1.0 - 2.0 * nu) + a2) * (2.0 * th).sin();
    let (c, s) = (th.cos(), th.sin());
    Ok(Vec3::new(ur * c - ut * s, 0.0, ur * s + ut * c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuncanFamaResult {
    pub sigma_cm: f64,
    pub k: f64,
    pub p_cr: f64,
    /// Radius of the plastic zone.
    pub r_p: f64,
    /// Inward radial displacement of the wall.
    pub u_p: f64,
}

/// Elasto-plastic response of an unsupported circular tunnel in
/// Mohr-Coulomb ground under hydrostatic compression `p0`, with zero
/// dilation. `phi` is in radians.
pub fn duncan_fama(p0: f64, c: f64, phi: f64, young: f64, nu: f64, radius: f64) -> Result<DuncanFamaResult> {
    if !(p0 >= 0.0 && c > 0.0 && young > 0.0 && radius > 0.0) || !(0.0..std::f64::consts::FRAC_PI_2).contains(&phi) {
        return Err(Error::Validation("Duncan-Fama inputs out of range".into()));
    }
    let (s, cs) = (phi.sin(), phi.cos());
    let sigma_cm = 2.0 * c * cs / (1.0 - s);
    let k = (1.0 + s) / (1.0 - s);
    let p_cr = (2.0 * p0 - sigma_cm) / (1.0 + k);
    if p_cr <= 0.0 {
        let u_p = radius * (1.0 + nu) * p0 / young;
        return Ok(DuncanFamaResult { sigma_cm, k, p_cr, r_p: radius, u_p });
    }
    let r_p = if k - 1.0 < 1e-9 {
        // frictionless limit
        radius * (p0 / sigma_cm - 0.5).exp()
    } else {
        radius * (2.0 * (p0 * (k - 1.0) + sigma_cm) / ((1.0 + k) * sigma_cm)).powf(1.0 / (k - 1.0))
    };
    let rr = (r_p / radius).powi(2);
    let u_p = radius * (1.0 + nu) / young * (2.0 * (1.0 - nu) * (p0 - p_cr) * rr - (1.0 - 2.0 * nu) * p0);
    Ok(DuncanFamaResult { sigma_cm, k, p_cr, r_p, u_p })
}
