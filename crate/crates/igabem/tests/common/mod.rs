//! Quadrature oracles shared by the bolt tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use igabem::inclusion::SegmentEnd;
use igabem::kernels::{kernel_e, ElasticConstants, Matrix3x6};
use igabem::nurbs::Vec3;
use igabem::quadrature::gauss_rule;

/// `∫ E(y, x(z')) M_l(z') πR² dz'` along the segment axis with composite
/// Gauss rules graded towards the foot of the source.
pub fn line_oracle(h: f64, radius: f64, yt: f64, zt: f64, k: &ElasticConstants, l: usize) -> Matrix3x6 {
    let g = gauss_rule(64).unwrap();
    let y = Vec3::new(0.0, yt, zt);
    let foot = zt.clamp(0.0, h);
    let mut breaks = vec![0.0, h, foot];
    let mut d = yt;
    while d < h {
        breaks.extend([foot - d, foot + d]);
        d *= 2.0;
    }
    breaks.retain(|&b| (0.0..=h).contains(&b));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut sum = Matrix3x6::zeros();
    for w in breaks.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        for (t, wt) in g.points.iter().zip(&g.weights) {
            let z = w[0] + half * (t + 1.0);
            let m = if l == 1 { z / h } else { 1.0 - z / h };
            sum += kernel_e(&y, &Vec3::new(0.0, 0.0, z), k).unwrap() * (m * wt * half * PI * radius * radius);
        }
    }
    sum
}

/// Volume integral over the solid cylinder of radius `R` for a source on
/// the axis at one end, in spherical coordinates about the source. The
/// polar range splits where rays leave through the far disc or the mantle.
pub fn cone_oracle(h: f64, radius: f64, k: &ElasticConstants, l: usize, end: SegmentEnd) -> Matrix3x6 {
    // segment below the source for a top end, above it for a bottom end
    let dir = if end == SegmentEnd::Top { -1.0 } else { 1.0 };
    let shape = |dist: f64| if l == 1 { dist / h } else { 1.0 - dist / h };
    let g = gauss_rule(48).unwrap();
    let nth = 64;
    let split = (radius / h).atan();
    let mut sum = Matrix3x6::zeros();
    for (a0, a1) in [(0.0, split), (split, 0.5 * PI)] {
        for (ta, wa) in g.points.iter().zip(&g.weights) {
            let alpha = a0 + 0.5 * (a1 - a0) * (ta + 1.0);
            let rmax = if alpha <= split { h / alpha.cos() } else { radius / alpha.sin() };
            for (tr, wr) in g.points.iter().zip(&g.weights) {
                let r = 0.5 * rmax * (tr + 1.0);
                for m in 0..nth {
                    let theta = 2.0 * PI * m as f64 / nth as f64;
                    let x =
                        Vec3::new(r * alpha.sin() * theta.cos(), r * alpha.sin() * theta.sin(), dir * r * alpha.cos());
                    let w = 0.5 * (a1 - a0) * wa * 0.5 * rmax * wr * 2.0 * PI / nth as f64 * r * r * alpha.sin();
                    sum += kernel_e(&Vec3::zeros(), &x, k).unwrap() * (shape(r * alpha.cos()) * w);
                }
            }
        }
    }
    sum
}

pub fn rel_err(a: &Matrix3x6, b: &Matrix3x6) -> f64 {
    (a - b).abs().max() / b.abs().max()
}
