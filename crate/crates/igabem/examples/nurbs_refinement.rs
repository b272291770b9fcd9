//! Knot insertion and degree elevation leave a rational circle unchanged.

use igabem::nurbs::Direction;
use igabem::patch::{half_circle, half_cylinder};

fn main() -> igabem::Result<()> {
    let c = half_circle(1.0, 0.0, true);
    let refined = c.insert_knot(0.3)?.elevate();
    println!("degree {} -> {}", c.degree(), refined.degree());
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let u = i as f64 / 20.0;
        let (p, q) = (c.point(u)?, refined.point(u)?);
        worst = worst.max((p - q).norm()).max((p.norm() - 1.0).abs());
    }
    println!("largest deviation from the unit circle {worst:.2e}");

    let s = half_cylinder(1.0, 2.0, true);
    let r = s.insert_knot(Direction::U, 0.25)?.insert_knot(Direction::V, 0.25)?;
    println!("surface basis functions {} -> {}", s.n_basis(), r.n_basis());
    let p = s.point(0.37, 0.61)?;
    let q = r.point(0.37, 0.61)?;
    println!("point at (0.37, 0.61) moved by {:.2e}", (p - q).norm());
    Ok(())
}
