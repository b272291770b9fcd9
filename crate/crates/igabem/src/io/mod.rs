//! JSON model files and result export.

pub mod export;
pub mod model;

pub use model::{InclusionDef, Model, SampleLine, FORMAT_VERSION};
