//! Closed-form bolt segment integrals against Gauss quadrature of the
//! strain kernel along the axis.

use igabem::inclusion::bolt_regular_analytic;
use igabem::kernels::{kernel_e, ElasticConstants, Matrix3x6};
use igabem::nurbs::Vec3;
use igabem::quadrature::gauss_rule;

fn main() -> igabem::Result<()> {
    let k = ElasticConstants::new(1.0, 0.25)?;
    let (h, radius) = (0.5, 0.025);
    let rule = gauss_rule(64)?;
    for (yt, zt) in [(0.3, 0.1), (0.05, 0.25), (0.2, -0.4), (1.0, 2.0)] {
        let y = Vec3::new(0.0, yt, zt);
        for l in [1, 2] {
            let exact = bolt_regular_analytic(h, radius, yt, zt, &k, l)?;
            let mut num = Matrix3x6::zeros();
            for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                let z = 0.5 * h * (t + 1.0);
                let m = if l == 1 { z / h } else { 1.0 - z / h };
                num += kernel_e(&y, &Vec3::new(0.0, 0.0, z), &k)?
                    * (m * w * 0.5 * h * std::f64::consts::PI * radius * radius);
            }
            println!(
                "source ({yt:>4}, {zt:>4}) l = {l}: largest entry {:.3e}, max difference {:.2e}",
                exact.abs().max(),
                (exact - num).abs().max()
            );
        }
    }
    Ok(())
}
