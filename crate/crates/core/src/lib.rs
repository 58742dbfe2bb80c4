//! Two-level overlapping additive Schwarz preconditioners with adaptive
//! coarse spaces for P1 discretizations of `-div(α ∇u) = f` on the unit cube.
//!
//! Two coarse spaces are provided. The wirebasket space interpolates on subdomain
//! edges and vertices and is enriched with face eigenfunctions. The vertex space
//! interpolates only at subdomain vertices and is enriched with edge
//! eigenfunctions and interior-face eigenfunctions.

pub mod assembly;
pub mod coarse;
pub mod coeff;
pub mod decomp;
pub mod error;
pub mod experiment;
pub mod gevp;
pub mod harmonic;
pub mod iforms;
pub mod linalg;
pub mod mesh;
pub mod mtx;
pub mod pcg;
pub mod precond;
pub mod problem;
pub mod tables;

pub use error::{Error, Result};
