//! Three rock bolts in the crown region reduce the crown displacement of
//! the elastic tunnel.

use igabem::models;
use igabem::nurbs::Vec3;

fn crown(model: &igabem::io::Model) -> igabem::Result<(f64, Vec<f64>)> {
    let analysis = model.build()?;
    let ops = analysis.operators()?;
    let sol = analysis.solve(&ops, &model.solver)?;
    let u = analysis.displacement_at(&sol, &[Vec3::new(0.0, 0.0, models::RADIUS)])?;
    let axial = sol.driver.sigma.iter().map(|s| s[2]).collect();
    Ok((u[0].z, axial))
}

fn main() -> igabem::Result<()> {
    let (plain, _) = crown(&models::tunnel_bolts_unbolted()?)?;
    let (bolted, axial) = crown(&models::tunnel_bolts()?)?;
    println!("crown u_z without bolts {plain:.6}");
    println!("crown u_z with bolts    {bolted:.6} ({:.2}% less)", 100.0 * (1.0 - bolted / plain));
    for (b, chunk) in axial.chunks(models::BOLT_POINTS).enumerate() {
        let s: Vec<String> = chunk.iter().map(|v| format!("{v:+.4}")).collect();
        println!("bolt at {:>3} deg axial stress {}", models::BOLT_ANGLES[b], s.join(" "));
    }
    Ok(())
}
