//! Engine for finite-dimensional r-Nambu-Poisson structures: exterior algebra,
//! polynomial and numeric fields, Filippov-identity verifiers, Darboux charts,
//! Leibniz algebroid brackets, example galleries and limit towers.

pub mod algebroid;
pub mod cli;
pub mod error;
pub mod fields;
pub mod gallery;
pub mod linalg;
pub mod multilinear;
pub mod nambu;
pub mod normal_form;
pub mod poly;
pub mod replay;
pub mod report;
pub mod scalar;
pub mod specfile;
pub mod towers;

pub use error::{Error, Result};
pub use scalar::{Ring, Scalar, Q};
