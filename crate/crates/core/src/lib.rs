//! Verification toolkit for OT-FKM type isoparametric families: octonion
//! arithmetic, symmetric Clifford systems, focal submanifolds, normal scalar
//! curvature checks and the associated isoparametric functions.

pub mod clifford;
pub mod curvature;
pub mod error;
pub mod focal;
pub mod isofun;
pub mod linalg;
pub mod loci;
pub mod octonion;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
