//! Assembles the boundary and inclusion operators of a model and runs the
//! elastic or elasto-plastic solution.

use nalgebra::{DMatrix, DVector, Vector6};
use rayon::prelude::*;

use crate::assembly::{assemble, interior_row, BoundaryMesh, TractionMode, MATCH_TOL};
use crate::error::{Error, Result};
use crate::kernels::ElasticConstants;
use crate::nurbs::Vec3;
use crate::patch::Patch;
use crate::quadrature::QuadratureConfig;
use crate::recovery::{
    boundary_row, build_grid, point_models, strain_operator, volume_row, GridPoint, Inclusion, RecoveryConfig,
};
use crate::solver::{incremental_solve, CoupledSystem, DriverConfig, DriverResult, PointModel};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub mesh: BoundaryMesh,
    pub elastic: ElasticConstants,
    pub inclusions: Vec<Inclusion>,
    pub grid: Vec<GridPoint>,
    pub quad: QuadratureConfig,
    pub recovery: RecoveryConfig,
}

/// Discrete operators of a model.
#[derive(Debug, Clone)]
pub struct Operators {
    pub system: CoupledSystem,
    /// `Â`, 3M × 3N
    pub a_hat: DMatrix<f64>,
    /// `c̄`, 3M
    pub c_bar: DVector<f64>,
    /// `B̄0`, 3M × 6M
    pub b0_bar: DMatrix<f64>,
    /// `B̂`, 6M × 3M
    pub b_hat: DMatrix<f64>,
}

/// Points closer than this to a grid node take the node's displacement.
const NODE_TOL: f64 = 1e-9;

/// Solution of a model at full load.
#[derive(Debug, Clone)]
pub struct Solution {
    pub driver: DriverResult,
    /// Displacement of every grid point.
    pub grid_displacement: Vec<Vec3>,
}

impl Solution {
    /// Boundary displacement parameters, one vector per node.
    pub fn boundary_parameters(&self) -> Vec<Vec3> {
        self.driver.x.as_slice().chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
    }
}

impl Analysis {
    pub fn new(
        patches: Vec<Patch>,
        elastic: ElasticConstants,
        virgin: [f64; 6],
        inclusions: Vec<Inclusion>,
        quad: QuadratureConfig,
        traction_mode: TractionMode,
    ) -> Result<Self> {
        elastic.validate()?;
        quad.validate()?;
        if virgin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("virgin stress must be finite".into()));
        }
        for inc in &inclusions {
            if let Inclusion::General { material, .. } = inc {
                ElasticConstants::new(material.young, material.poisson)?;
                if let Some(mc) = &material.yield_ {
                    mc.validate()?;
                }
            }
        }
        let mesh = BoundaryMesh::new(patches, virgin, traction_mode, &quad)?;
        mesh.check_connectivity()?;
        let grid = build_grid(&inclusions, &mesh);
        Ok(Self { mesh, elastic, inclusions, grid, quad, recovery: RecoveryConfig::default() })
    }

    pub fn n_grid(&self) -> usize {
        self.grid.len()
    }

    fn grid_point_at(&self, y: &Vec3) -> Option<&GridPoint> {
        let tol = MATCH_TOL * self.mesh.scale;
        self.grid.iter().find(|g| (g.position - y).norm() <= tol)
    }

    fn volume(&self, y: &Vec3) -> Result<DMatrix<f64>> {
        volume_row(&self.inclusions, y, self.grid_point_at(y), &self.elastic, &self.quad)
    }

    /// Builds every operator of the coupled system.
    pub fn operators(&self) -> Result<Operators> {
        let k = &self.elastic;
        let sys = assemble(&self.mesh, k, &self.quad)?;
        let n = self.mesh.n_dof();
        let m = self.grid.len();

        let b0_rows: Vec<DMatrix<f64>> = if m == 0 {
            Vec::new()
        } else {
            self.mesh.nodes.par_iter().map(|node| self.volume(&node.position)).collect::<Result<_>>()?
        };
        let mut b0 = DMatrix::zeros(n, 6 * m);
        for (i, r) in b0_rows.iter().enumerate() {
            b0.view_mut((3 * i, 0), (3, 6 * m)).copy_from(r);
        }

        type Rows = (DMatrix<f64>, Vec3, DMatrix<f64>);
        let rows: Vec<Rows> = self
            .grid
            .par_iter()
            .map(|g| -> Result<Rows> {
                match &g.boundary {
                    Some(at) => Ok((boundary_row(&self.mesh, at)?, Vec3::zeros(), DMatrix::zeros(3, 6 * m))),
                    None => {
                        let (a, c) = interior_row(&self.mesh, &g.position, k, &self.quad)?;
                        Ok((a, c, self.volume(&g.position)?))
                    }
                }
            })
            .collect::<Result<_>>()?;
        let mut a_hat = DMatrix::zeros(3 * m, n);
        let mut c_bar = DVector::zeros(3 * m);
        let mut b0_bar = DMatrix::zeros(3 * m, 6 * m);
        for (i, (a, c, b)) in rows.iter().enumerate() {
            a_hat.view_mut((3 * i, 0), (3, n)).copy_from(a);
            c_bar.fixed_rows_mut::<3>(3 * i).copy_from(c);
            b0_bar.view_mut((3 * i, 0), (3, 6 * m)).copy_from(b);
        }
        let b_hat = strain_operator(&self.inclusions, self.recovery.stencil)?;
        let system = CoupledSystem {
            l: sys.l,
            r: sys.r,
            b0,
            c_hat: &b_hat * &a_hat,
            c0: &b_hat * &b0_bar,
            cbb: &b_hat * &c_bar,
        };
        Ok(Operators { system, a_hat, c_bar, b0_bar, b_hat })
    }

    pub fn point_models(&self) -> Vec<PointModel> {
        point_models(&self.inclusions, &self.grid, &self.elastic, &self.mesh.virgin)
    }

    /// Runs the load path to full excavation.
    pub fn solve(&self, ops: &Operators, cfg: &DriverConfig) -> Result<Solution> {
        let driver = incremental_solve(&ops.system, &self.point_models(), cfg)?;
        let u = &ops.a_hat * &driver.x + &ops.c_bar + &ops.b0_bar * &driver.sigma0;
        let grid_displacement = u.as_slice().chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        Ok(Solution { driver, grid_displacement })
    }

    /// Displacement at arbitrary points, on the boundary or in the ground.
    pub fn displacement_at(&self, sol: &Solution, points: &[Vec3]) -> Result<Vec<Vec3>> {
        let x = &sol.driver.x;
        let s0 = &sol.driver.sigma0;
        points
            .par_iter()
            .map(|p| {
                if let Some(at) = self.mesh.locate(p) {
                    let r = boundary_row(&self.mesh, &at)?;
                    return Ok(Vec3::from_column_slice((r * x).as_slice()));
                }
                if let Some(i) = self.grid.iter().position(|g| (g.position - p).norm() < NODE_TOL) {
                    return Ok(sol.grid_displacement[i]);
                }
                // The line model is log-singular on its own axis.
                for inc in &self.inclusions {
                    if let Inclusion::Linear(b) = inc {
                        if b.axis_distance(p) < b.radius {
                            return Err(Error::Validation(format!(
                                "sample point ({:.4}, {:.4}, {:.4}) lies inside a bolt",
                                p.x, p.y, p.z
                            )));
                        }
                    }
                }
                let (a, c) = interior_row(&self.mesh, p, &self.elastic, &self.quad)?;
                let mut u = Vec3::from_column_slice((a * x).as_slice()) + c;
                if !self.grid.is_empty() {
                    u += Vec3::from_column_slice((self.volume(p)? * s0).as_slice());
                }
                Ok(u)
            })
            .collect()
    }

    /// Outermost distance from `axis_point` (in the plane normal to `axis`)
    /// of a grid point that yielded.
    pub fn plastic_radius(&self, sol: &Solution, axis_point: &Vec3, axis: &Vec3) -> Option<f64> {
        let a = axis.normalize();
        self.grid
            .iter()
            .zip(&sol.driver.yielded)
            .filter(|(_, y)| **y)
            .map(|(g, _)| {
                let d = g.position - axis_point;
                (d - a * d.dot(&a)).norm()
            })
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))))
    }

    /// Total stress at a grid point.
    pub fn stress(&self, sol: &Solution, point: usize) -> Vector6<f64> {
        sol.driver.sigma[point]
    }
}
