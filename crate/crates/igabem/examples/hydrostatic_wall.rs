//! Circular tunnel under hydrostatic compression: the wall moves inward
//! uniformly by p0 R / 2G.

use igabem::models;
use igabem::nurbs::Vec3;

fn main() -> igabem::Result<()> {
    let mut model = models::tunnel_elastic()?;
    let p0 = 1.0;
    model.virgin_stress = [-p0, -p0, -p0, 0.0, 0.0, 0.0];
    let analysis = model.build()?;
    let ops = analysis.operators()?;
    let sol = analysis.solve(&ops, &model.solver)?;

    let exact = p0 * models::RADIUS / (2.0 * model.elastic.shear());
    let wall: Vec<Vec3> = (0..8)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / 4.0;
            Vec3::new(th.cos(), 0.3, th.sin()) * models::RADIUS
        })
        .collect();
    for (p, u) in wall.iter().zip(analysis.displacement_at(&sol, &wall)?) {
        let radial = Vec3::new(p.x, 0.0, p.z).normalize();
        let ur = -u.dot(&radial);
        println!("angle {:>5.1}  u_r {:.6}  exact {:.6}", p.z.atan2(p.x).to_degrees(), ur, exact);
    }
    Ok(())
}
