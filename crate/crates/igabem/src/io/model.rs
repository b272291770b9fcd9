use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::assembly::TractionMode;
use crate::error::{Error, Result};
use crate::inclusion::{GeneralInclusion, GridAxis, LinearInclusion};
use crate::kernels::ElasticConstants;
use crate::nurbs::{NurbsSurface, Vec3};
use crate::patch::Patch;
use crate::quadrature::QuadratureConfig;
use crate::recovery::{Inclusion, Material, RecoveryConfig};
use crate::solver::DriverConfig;

/// Model file format understood by this version.
pub const FORMAT_VERSION: u32 = 1;

/// Points sampled along a straight line for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleLine {
    pub name: String,
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub count: usize,
}

impl SampleLine {
    pub fn points(&self, count: usize) -> Vec<Vec3> {
        let (a, b) = (Vec3::from(self.from), Vec3::from(self.to));
        if count == 1 {
            return vec![a];
        }
        (0..count).map(|i| a + (b - a) * (i as f64 / (count - 1) as f64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InclusionDef {
    General {
        label: String,
        bottom: NurbsSurface,
        top: NurbsSurface,
        /// Stress grid along (s, t, r).
        grid: [GridAxis; 3],
        /// Key into the model's material table.
        material: String,
    },
    Linear {
        label: String,
        axis: Vec<Vec3>,
        radius: f64,
        young: f64,
    },
}

impl InclusionDef {
    pub fn label(&self) -> &str {
        match self {
            InclusionDef::General { label, .. } | InclusionDef::Linear { label, .. } => label,
        }
    }
}

/// A complete analysis input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    /// Free-form unit system, echoed to the results.
    #[serde(default)]
    pub units: String,
    pub elastic: ElasticConstants,
    /// Virgin stress in Voigt order (11, 22, 33, 12, 23, 13), tension positive.
    pub virgin_stress: [f64; 6],
    pub patches: Vec<Patch>,
    #[serde(default)]
    pub materials: BTreeMap<String, Material>,
    #[serde(default)]
    pub inclusions: Vec<InclusionDef>,
    #[serde(default)]
    pub solver: DriverConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub traction: TractionMode,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub samples: Vec<SampleLine>,
}

impl Model {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").map(|v| v.as_u64()) {
            None => return Err(Error::Validation("missing field `version`".into())),
            Some(Some(v)) if v == FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Validation(format!("unsupported model version {v:?}, expected {FORMAT_VERSION}")))
            }
        }
        let model: Model = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Checks everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Validation(format!("unsupported model version {}", self.version)));
        }
        self.elastic.validate()?;
        if self.virgin_stress.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("virgin_stress must be finite".into()));
        }
        if self.patches.is_empty() {
            return Err(Error::Validation("patches: at least one patch is required".into()));
        }
        for p in &self.patches {
            p.validate()?;
        }
        for (name, m) in &self.materials {
            ElasticConstants::new(m.young, m.poisson)
                .map_err(|e| Error::Validation(format!("material {name}: {e}")))?;
            if let Some(mc) = &m.yield_ {
                mc.validate().map_err(|e| Error::Validation(format!("material {name}: {e}")))?;
            }
        }
        for inc in &self.inclusions {
            self.inclusion(inc)?;
        }
        self.solver_validate()?;
        self.quadrature.validate()?;
        for s in &self.samples {
            if s.count == 0 || s.from.iter().chain(&s.to).any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("sample line {}: needs finite ends and count > 0", s.name)));
            }
        }
        Ok(())
    }

    fn solver_validate(&self) -> Result<()> {
        let s = &self.solver;
        if s.steps == 0 || s.max_iter == 0 || !(s.tol > 0.0) {
            return Err(Error::Validation("solver: steps, max_iter and tol must be positive".into()));
        }
        Ok(())
    }

    fn inclusion(&self, def: &InclusionDef) -> Result<Inclusion> {
        let ctx = |e: Error| Error::Validation(format!("inclusion {}: {e}", def.label()));
        match def {
            InclusionDef::General { bottom, top, grid, material, .. } => {
                bottom.validate().map_err(ctx)?;
                top.validate().map_err(ctx)?;
                for g in grid {
                    GridAxis::new(g.degree, g.cells).map_err(ctx)?;
                }
                let material = *self
                    .materials
                    .get(material)
                    .ok_or_else(|| ctx(Error::Validation(format!("unknown material `{material}`"))))?;
                let geometry = GeneralInclusion::new(bottom.clone(), top.clone(), *grid).map_err(ctx)?;
                Ok(Inclusion::General { geometry, material })
            }
            InclusionDef::Linear { axis, radius, young, .. } => {
                Ok(Inclusion::Linear(LinearInclusion::new(axis.clone(), *radius, *young).map_err(ctx)?))
            }
        }
    }

    /// Nonfatal remarks about the model.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for inc in &self.inclusions {
            if let InclusionDef::Linear { label, axis, radius, .. } = inc {
                for (s, w) in axis.windows(2).enumerate() {
                    let h = (w[1] - w[0]).norm();
                    if *radius > 0.2 * h {
                        out.push(format!("bolt {label}: radius {radius} is large against segment {s} of length {h}"));
                    }
                }
            }
        }
        out
    }

    /// Prepares the analysis: boundary mesh, inclusions and grid.
    pub fn build(&self) -> Result<Analysis> {
        self.validate()?;
        let inclusions = self.inclusions.iter().map(|d| self.inclusion(d)).collect::<Result<_>>()?;
        let mut a = Analysis::new(
            self.patches.clone(),
            self.elastic,
            self.virgin_stress,
            inclusions,
            self.quadrature,
            self.traction,
        )?;
        a.recovery = self.recovery;
        Ok(a)
    }
}
