//! Comparisons of the bundled models against the closed-form references.

use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::io::Model;
use crate::models;
use crate::nurbs::Vec3;
use crate::oracles::{duncan_fama, kirsch_displacement};
use crate::solver::DriverConfig;

/// Relative tolerance of the Kirsch crown-line comparison.
pub const KIRSCH_TOL: f64 = 0.02;
/// Relative tolerance of the hydrostatic wall displacement.
pub const HYDROSTATIC_TOL: f64 = 0.01;
/// Published wall displacement of the plastic tunnel and its tolerance.
pub const DUNCAN_FAMA_WALL: f64 = 1.262;
pub const DUNCAN_FAMA_TOL: f64 = 0.01;
/// Plastic radius target and absolute tolerance.
pub const PLASTIC_RADIUS: f64 = 1.3;
pub const PLASTIC_RADIUS_TOL: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    /// Relative error, or absolute where the tolerance is absolute.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn relative(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        let error = (computed - reference).abs() / reference.abs();
        Self { name: name.into(), computed, reference, error, tolerance, pass: error <= tolerance }
    }

    fn absolute(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        let error = (computed - reference).abs();
        Self { name: name.into(), computed, reference, error, tolerance, pass: error <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{}\n{:<28} {:>12} {:>12} {:>10} {:>8}  result\n",
            self.title, "check", "computed", "reference", "error", "tol"
        );
        for c in &self.checks {
            s += &format!(
                "{:<28} {:>12.6} {:>12.6} {:>10.2e} {:>8.2e}  {}\n",
                c.name,
                c.computed,
                c.reference,
                c.error,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        s + &format!("time {:.2} s\n", self.seconds)
    }
}

/// Vertical displacement along the line above the crown for the elastic
/// tunnel at `samples` points in `1 ≤ z ≤ 6`, plus the hydrostatic wall
/// displacement of the same mesh.
pub fn kirsch(samples: usize) -> Result<Report> {
    let t = Instant::now();
    let model = Model::from_json(models::TUNNEL_ELASTIC)?;
    let (k, r) = (model.elastic, models::RADIUS);
    let p0 = -model.virgin_stress[2];
    let k0 = -model.virgin_stress[0] / p0;
    let analysis = model.build()?;
    let ops = analysis.operators()?;
    let sol = analysis.solve(&ops, &model.solver)?;
    let n = samples.max(2);
    let pts: Vec<Vec3> = (0..n).map(|i| Vec3::new(0.0, 0.0, r * (1.0 + 5.0 * i as f64 / (n - 1) as f64))).collect();
    let u = analysis.displacement_at(&sol, &pts)?;
    let mut checks = Vec::new();
    for (p, u) in pts.iter().zip(&u) {
        let e = kirsch_displacement(p0, k0, r, k.shear(), k.poisson, p)?;
        checks.push(Check::relative(format!("u_z at z = {:.3}", p.z), u.z, e.z, KIRSCH_TOL));
    }

    let mut hydro = model.clone();
    hydro.virgin_stress = [-p0, -p0, -p0, 0.0, 0.0, 0.0];
    let a = hydro.build()?;
    let ops = a.operators()?;
    let sol = a.solve(&ops, &DriverConfig::default())?;
    let wall = [Vec3::new(r, 0.0, 0.0), Vec3::new(0.0, 0.0, r), Vec3::new(-r * 0.6, 0.0, -r * 0.8)];
    let reference = p0 * r / (2.0 * k.shear());
    for (p, u) in wall.iter().zip(a.displacement_at(&sol, &wall)?) {
        let ur = -u.dot(&(p / r));
        checks.push(Check::relative(
            format!("hydrostatic u_r at {:.1},{:.1}", p.x, p.z),
            ur,
            reference,
            HYDROSTATIC_TOL,
        ));
    }
    Ok(Report { title: "Kirsch elastic tunnel".into(), checks, seconds: t.elapsed().as_secs_f64() })
}

/// Result of the plastic tunnel, kept for reporting beyond the checks.
#[derive(Debug, Clone, Serialize)]
pub struct PlasticRun {
    pub wall_displacement: f64,
    pub plastic_radius: f64,
    pub iterations: Vec<usize>,
    pub first_yield_factor: f64,
}

/// Elasto-plastic tunnel against the closed-form plastic zone solution.
pub fn duncan_fama_check(cfg: Option<DriverConfig>) -> Result<(Report, PlasticRun)> {
    let t = Instant::now();
    let mut model = Model::from_json(models::TUNNEL_PLASTIC)?;
    if let Some(c) = cfg {
        model.solver = c;
    }
    let r = models::RADIUS;
    let p0 = -model.virgin_stress[0];
    let mc = models::plastic_ground();
    let oracle = duncan_fama(p0, mc.cohesion, mc.friction, model.elastic.young, model.elastic.poisson, r)?;
    let analysis = model.build()?;
    let ops = analysis.operators()?;
    let sol = analysis.solve(&ops, &model.solver)?;
    let wall = [Vec3::new(r, 0.0, 0.0), Vec3::new(0.0, 0.0, r)];
    let u = analysis.displacement_at(&sol, &wall)?;
    let ur: Vec<f64> = wall.iter().zip(&u).map(|(p, u)| -u.dot(&(p / r))).collect();
    let rp = analysis.plastic_radius(&sol, &Vec3::zeros(), &Vec3::y()).unwrap_or(r);
    let max_it = sol.driver.iterations.iter().copied().max().unwrap_or(0);
    let checks = vec![
        Check::relative("wall u_r springline", ur[0], DUNCAN_FAMA_WALL, DUNCAN_FAMA_TOL),
        Check::relative("wall u_r crown", ur[1], DUNCAN_FAMA_WALL, DUNCAN_FAMA_TOL),
        Check::relative("wall u_r vs closed form", ur[0], oracle.u_p, DUNCAN_FAMA_TOL),
        Check::absolute("plastic radius", rp, PLASTIC_RADIUS, PLASTIC_RADIUS_TOL),
        Check::absolute("max iterations", max_it as f64, MAX_ITERATIONS as f64, 0.0).at_most(),
    ];
    let run = PlasticRun {
        wall_displacement: ur[0],
        plastic_radius: rp,
        iterations: sol.driver.iterations.clone(),
        first_yield_factor: sol.driver.lambda,
    };
    Ok((Report { title: "Duncan-Fama plastic tunnel".into(), checks, seconds: t.elapsed().as_secs_f64() }, run))
}

impl Check {
    /// Turns the check into `computed ≤ reference`.
    fn at_most(mut self) -> Self {
        self.error = (self.computed - self.reference).max(0.0);
        self.pass = self.computed <= self.reference;
        self
    }
}
