//! Builders for the bundled example models. The JSON files under `models/`
//! are generated from these and checked against them in the tests.

use std::collections::BTreeMap;

use crate::assembly::TractionMode;
use crate::error::Result;
use crate::inclusion::{GridAxis, GridDegree};
use crate::io::{InclusionDef, Model, SampleLine, FORMAT_VERSION};
use crate::kernels::ElasticConstants;
use crate::nurbs::{Direction, NurbsSurface, Vec3};
use crate::patch::{build_circular_tunnel, half_circle, InfiniteMode};
use crate::quadrature::QuadratureConfig;
use crate::recovery::{Material, RecoveryConfig};
use crate::solver::{DriverConfig, MohrCoulomb};

pub const TUNNEL_ELASTIC: &str = include_str!("../models/tunnel_elastic.model");
pub const TUNNEL_BOLTS: &str = include_str!("../models/tunnel_bolts.model");
pub const TUNNEL_PLASTIC: &str = include_str!("../models/tunnel_plastic.model");

/// Radius of the bundled tunnels.
pub const RADIUS: f64 = 1.0;
/// Length of the finite barrel patches.
pub const BARREL_LENGTH: f64 = 2.0;
/// Axial half-extent of the plastic annulus.
pub const ANNULUS_HALF_LENGTH: f64 = 1000.0;
pub const BOLT_LENGTH: f64 = 1.0;
pub const BOLT_RADIUS: f64 = 0.025;
pub const BOLT_POINTS: usize = 5;
/// Bolt angles in degrees from `+x` in the x-z plane.
pub const BOLT_ANGLES: [f64; 3] = [45.0, 90.0, 135.0];

fn base(name: &str, virgin: [f64; 6]) -> Result<Model> {
    Ok(Model {
        version: FORMAT_VERSION,
        name: name.into(),
        units: "consistent (E = 1)".into(),
        elastic: ElasticConstants::new(1.0, 0.0)?,
        virgin_stress: virgin,
        patches: build_circular_tunnel(RADIUS, BARREL_LENGTH, InfiniteMode::PlaneStrain)?,
        materials: BTreeMap::new(),
        inclusions: Vec::new(),
        solver: DriverConfig::default(),
        quadrature: QuadratureConfig::default(),
        traction: TractionMode::default(),
        recovery: RecoveryConfig::default(),
        samples: vec![SampleLine {
            name: "crown".into(),
            from: [0.0, 0.0, RADIUS],
            to: [0.0, 0.0, 6.0 * RADIUS],
            count: 21,
        }],
    })
}

/// Unsupported circular tunnel under vertical compression: 6 patches,
/// 48 degrees of freedom.
pub fn tunnel_elastic() -> Result<Model> {
    base("tunnel_elastic", [0.0, 0.0, -1.0, 0.0, 0.0, 0.0])
}

/// Mesh of the bolted tunnel without the bolts (108 degrees of freedom).
pub fn tunnel_bolts_unbolted() -> Result<Model> {
    let mut m = base("tunnel_bolts_unbolted", [0.0, 0.0, -1.0, 0.0, 0.0, 0.0])?;
    for p in &mut m.patches {
        match p.label.as_str() {
            "barrel-upper" | "barrel-lower" => p.refine_field(Direction::V, 0.5)?,
            _ => {}
        }
        if p.label.ends_with("upper") {
            for u in [0.25, 0.25, 0.75, 0.75] {
                p.refine_field(Direction::U, u)?;
            }
        }
    }
    m.samples = bolt_lines();
    m.samples.insert(
        0,
        SampleLine {
            name: "crown".into(),
            from: [0.0, SAMPLE_OFFSET.y, RADIUS],
            to: [0.0, SAMPLE_OFFSET.y, 6.0 * RADIUS],
            count: 21,
        },
    );
    Ok(m)
}

fn bolt_axis(deg: f64) -> Vec<Vec3> {
    let (s, c) = deg.to_radians().sin_cos();
    let dir = Vec3::new(c, 0.0, s);
    (0..BOLT_POINTS).map(|i| dir * (RADIUS + BOLT_LENGTH * i as f64 / (BOLT_POINTS - 1) as f64)).collect()
}

/// Bolt-model sample lines run beside the bolts, shifted along the tunnel.
const SAMPLE_OFFSET: Vec3 = Vec3::new(0.0, 0.1, 0.0);

fn bolt_lines() -> Vec<SampleLine> {
    BOLT_ANGLES
        .iter()
        .map(|&a| {
            let axis = bolt_axis(a);
            let (p, q) = (axis[0] + SAMPLE_OFFSET, axis[BOLT_POINTS - 1] + SAMPLE_OFFSET);
            SampleLine { name: format!("bolt-{a}"), from: [p.x, p.y, p.z], to: [q.x, q.y, q.z], count: 21 }
        })
        .collect()
}

/// Tunnel with three rock bolts twice as stiff as the ground.
pub fn tunnel_bolts() -> Result<Model> {
    let mut m = tunnel_bolts_unbolted()?;
    m.name = "tunnel_bolts".into();
    m.inclusions = BOLT_ANGLES
        .iter()
        .map(|&a| InclusionDef::Linear {
            label: format!("bolt-{a}"),
            axis: bolt_axis(a),
            radius: BOLT_RADIUS,
            young: 2.0,
        })
        .collect();
    Ok(m)
}

fn annulus_half(upper: bool, inner: f64, outer: f64, half_length: f64) -> Result<(NurbsSurface, NurbsSurface)> {
    // reversed circles put s, t, r in right-handed order
    let ring = |r: f64| -> Result<NurbsSurface> {
        NurbsSurface::ruled(
            &half_circle(r, -half_length, upper).reversed(),
            &half_circle(r, half_length, upper).reversed(),
        )
    };
    Ok((ring(inner)?, ring(outer)?))
}

/// Mohr-Coulomb ground of the plastic model: c = 0.5, φ = 10°, ψ = 0,
/// yield in the cross-section plane.
pub fn plastic_ground() -> MohrCoulomb {
    MohrCoulomb { cohesion: 0.5, friction: 10f64.to_radians(), dilation: 0.0, plane_axis: Some(1) }
}

/// Tunnel in Mohr-Coulomb ground under hydrostatic compression 1, with
/// plasticity allowed in the annulus between R and 2R.
pub fn tunnel_plastic() -> Result<Model> {
    let mut m = base("tunnel_plastic", [-1.0, -1.0, -1.0, 0.0, 0.0, 0.0])?;
    m.materials.insert("ground".into(), Material { young: 1.0, poisson: 0.0, yield_: Some(plastic_ground()) });
    for (upper, tag) in [(true, "upper"), (false, "lower")] {
        let (bottom, top) = annulus_half(upper, RADIUS, 2.0 * RADIUS, ANNULUS_HALF_LENGTH)?;
        m.inclusions.push(InclusionDef::General {
            label: format!("annulus-{tag}"),
            bottom,
            top,
            grid: [
                GridAxis::new(GridDegree::Quadratic, 4)?,
                GridAxis::new(GridDegree::Constant, 1)?,
                GridAxis::new(GridDegree::Quadratic, 5)?,
            ],
            material: "ground".into(),
        });
    }
    m.samples = vec![
        SampleLine { name: "springline".into(), from: [RADIUS, 0.0, 0.0], to: [4.0 * RADIUS, 0.0, 0.0], count: 31 },
        SampleLine { name: "crown".into(), from: [0.0, 0.0, RADIUS], to: [0.0, 0.0, 4.0 * RADIUS], count: 31 },
    ];
    Ok(m)
}

/// Parses a bundled model by name.
pub fn bundled(name: &str) -> Option<Result<Model>> {
    let text = match name {
        "tunnel_elastic" => TUNNEL_ELASTIC,
        "tunnel_bolts" => TUNNEL_BOLTS,
        "tunnel_plastic" => TUNNEL_PLASTIC,
        _ => return None,
    };
    Some(Model::from_json(text))
}
