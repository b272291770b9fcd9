//! Elastic circular tunnel under vertical compression, compared with the
//! Kirsch solution along the line above the crown.

use igabem::models;
use igabem::nurbs::Vec3;
use igabem::oracles::kirsch_displacement;

fn main() -> igabem::Result<()> {
    let model = models::tunnel_elastic()?;
    let analysis = model.build()?;
    let ops = analysis.operators()?;
    let sol = analysis.solve(&ops, &model.solver)?;

    let pts: Vec<Vec3> = (0..11).map(|i| Vec3::new(0.0, 0.0, 1.0 + 0.5 * i as f64)).collect();
    let u = analysis.displacement_at(&sol, &pts)?;
    println!("{} dof", analysis.mesh.n_dof());
    println!("{:>6} {:>12} {:>12} {:>10}", "z", "u_z", "Kirsch", "rel err");
    for (p, u) in pts.iter().zip(&u) {
        let e = kirsch_displacement(1.0, 0.0, models::RADIUS, model.elastic.shear(), model.elastic.poisson, p)?;
        println!("{:>6.2} {:>12.6} {:>12.6} {:>10.2e}", p.z, u.z, e.z, (u.z - e.z).abs() / e.z.abs());
    }
    Ok(())
}
