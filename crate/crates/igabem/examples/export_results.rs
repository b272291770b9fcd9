//! Solves the bolted tunnel and writes CSV and VTK files to a temporary
//! directory (or the directory given as the first argument).

use std::path::PathBuf;

use igabem::io::export::{self, SampleRow};
use igabem::models;

fn main() -> igabem::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("igabem-export"));
    let model = models::tunnel_bolts()?;
    let analysis = model.build()?;
    let ops = analysis.operators()?;
    let sol = analysis.solve(&ops, &model.solver)?;

    let mut rows = Vec::new();
    for line in &model.samples {
        let pts = line.points(line.count);
        for (i, (p, u)) in pts.iter().zip(analysis.displacement_at(&sol, &pts)?).enumerate() {
            rows.push(SampleRow { line: line.name.clone(), index: i, position: *p, displacement: u });
        }
    }
    export::write(&dir.join("samples.csv"), &export::samples_csv(&rows))?;
    export::write(&dir.join("grid.csv"), &export::grid_csv(&analysis, &sol))?;
    export::write(&dir.join("results.vtk"), &export::vtk(&analysis, &sol, 8)?)?;
    println!("wrote {} sample rows and {} grid points to {}", rows.len(), analysis.n_grid(), dir.display());
    Ok(())
}
