//! Isogeometric boundary element analysis of excavations in infinite elastic
//! and elasto-plastic ground, with volume inclusions and rock bolts.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod inclusion;
pub mod io;
pub mod kernels;
pub mod models;
pub mod nurbs;
pub mod oracles;
pub mod patch;
pub mod quadrature;
pub mod recovery;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
