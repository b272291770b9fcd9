use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{Analysis, Solution};
use crate::error::Result;
use crate::nurbs::Vec3;

/// Displacement at one sampled point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub line: String,
    pub index: usize,
    pub position: Vec3,
    pub displacement: Vec3,
}

/// Run summary written next to the CSV and VTK files.
#[derive(Debug, Clone, Serialize)]
pub struct ResultSummary {
    pub name: String,
    pub units: String,
    pub n_dof: usize,
    pub n_grid: usize,
    pub first_yield_factor: f64,
    pub iterations: Vec<usize>,
    pub history: Vec<Vec<f64>>,
    pub boundary_parameters: Vec<Vec3>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timings {
    pub assembly_s: f64,
    pub solve_s: f64,
    pub sampling_s: f64,
}

/// One row per sample point. An empty slice gives a header-only file.
pub fn samples_csv(rows: &[SampleRow]) -> String {
    let mut s = String::from("line,index,x,y,z,ux,uy,uz\n");
    for r in rows {
        let (p, u) = (&r.position, &r.displacement);
        writeln!(s, "{},{},{},{},{},{:e},{:e},{:e}", r.line, r.index, p.x, p.y, p.z, u.x, u.y, u.z).unwrap();
    }
    s
}

const VOIGT: [&str; 6] = ["11", "22", "33", "12", "23", "13"];

/// Grid-point results: displacement, strain, stress, initial stress, yield
/// value and plastic state.
pub fn grid_csv(analysis: &Analysis, sol: &Solution) -> String {
    let mut s = String::from("point,inclusion,node,x,y,z,ux,uy,uz");
    for tag in ["eps", "sigma", "sigma0"] {
        for v in VOIGT {
            write!(s, ",{tag}{v}").unwrap();
        }
    }
    s.push_str(",yield,fraction,yielded\n");
    let d = &sol.driver;
    for (i, g) in analysis.grid.iter().enumerate() {
        let (p, u) = (&g.position, &sol.grid_displacement[i]);
        write!(s, "{i},{},{},{},{},{},{:e},{:e},{:e}", g.inclusion, g.node, p.x, p.y, p.z, u.x, u.y, u.z).unwrap();
        for k in 0..6 {
            write!(s, ",{:e}", d.eps[6 * i + k]).unwrap();
        }
        for k in 0..6 {
            write!(s, ",{:e}", d.sigma[i][k]).unwrap();
        }
        for k in 0..6 {
            write!(s, ",{:e}", d.sigma0[6 * i + k]).unwrap();
        }
        let f = d.yield_value[i];
        let f = if f.is_finite() { format!("{f:e}") } else { String::new() };
        writeln!(s, ",{f},{},{}", d.fraction[i], d.yielded[i] as u8).unwrap();
    }
    s
}

/// Largest `eta` drawn for infinite patches.
const INFINITE_EXTENT: f64 = 0.5;

/// VTK legacy ASCII unstructured grid: every patch tessellated on an
/// `n × n` parameter grid (quads) plus the inclusion grid points
/// (vertices). Boundary displacements are interpolated from the solution.
pub fn vtk(analysis: &Analysis, sol: &Solution, n: usize) -> Result<String> {
    let n = n.max(1);
    let mesh = &analysis.mesh;
    let x = &sol.driver.x;
    let mut pts: Vec<(Vec3, Vec3)> = Vec::new();
    let mut quads: Vec<[usize; 4]> = Vec::new();
    for (pi, p) in mesh.patches.iter().enumerate() {
        let vmax = if p.is_infinite() { INFINITE_EXTENT } else { 1.0 };
        let base = pts.len();
        for j in 0..=n {
            for i in 0..=n {
                let (xi, eta) = (i as f64 / n as f64, vmax * j as f64 / n as f64);
                let pos = p.point(xi, eta)?;
                let mut u = Vec3::zeros();
                for (node, w) in mesh.interpolation_row(pi, xi, eta)? {
                    u += Vec3::new(x[3 * node], x[3 * node + 1], x[3 * node + 2]) * w;
                }
                pts.push((pos, u));
            }
        }
        for j in 0..n {
            for i in 0..n {
                let a = base + j * (n + 1) + i;
                quads.push([a, a + 1, a + n + 2, a + n + 1]);
            }
        }
    }
    let n_surface = pts.len();
    for (g, u) in analysis.grid.iter().zip(&sol.grid_displacement) {
        pts.push((g.position, *u));
    }
    let n_grid = pts.len() - n_surface;

    let mut s = String::from("# vtk DataFile Version 3.0\nigabem results\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", pts.len()).unwrap();
    for (p, _) in &pts {
        writeln!(s, "{} {} {}", p.x, p.y, p.z).unwrap();
    }
    let n_cells = quads.len() + n_grid;
    writeln!(s, "CELLS {} {}", n_cells, 5 * quads.len() + 2 * n_grid).unwrap();
    for q in &quads {
        writeln!(s, "4 {} {} {} {}", q[0], q[1], q[2], q[3]).unwrap();
    }
    for k in 0..n_grid {
        writeln!(s, "1 {}", n_surface + k).unwrap();
    }
    writeln!(s, "CELL_TYPES {n_cells}").unwrap();
    for _ in &quads {
        s.push_str("9\n");
    }
    for _ in 0..n_grid {
        s.push_str("1\n");
    }
    writeln!(s, "POINT_DATA {}", pts.len()).unwrap();
    s.push_str("VECTORS displacement double\n");
    for (_, u) in &pts {
        writeln!(s, "{:e} {:e} {:e}", u.x, u.y, u.z).unwrap();
    }
    s.push_str("SCALARS yielded int 1\nLOOKUP_TABLE default\n");
    for _ in 0..n_surface {
        s.push_str("0\n");
    }
    for y in &sol.driver.yielded {
        writeln!(s, "{}", *y as u8).unwrap();
    }
    s.push_str("TENSORS stress double\n");
    for _ in 0..n_surface {
        s.push_str("0 0 0\n0 0 0\n0 0 0\n");
    }
    for sg in &sol.driver.sigma {
        writeln!(
            s,
            "{:e} {:e} {:e}\n{:e} {:e} {:e}\n{:e} {:e} {:e}",
            sg[0], sg[3], sg[5], sg[3], sg[1], sg[4], sg[5], sg[4], sg[2]
        )
        .unwrap();
    }
    Ok(s)
}

pub fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, content)?;
    Ok(())
}
