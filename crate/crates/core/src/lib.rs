//! Numerical and exact tools for products of singular distributions in
//! nonlinear PDEs: the boundary-value algebra, mollified products, radial
//! pseudofunctions, model solvers, ε-net asymptotics and singularity
//! forecasting.

pub mod dist_core;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod fit;
pub mod jet;
pub mod netlab;
pub mod pseudofun;
pub mod quad;
pub mod regularize;
pub mod singpred;
pub mod solvers;
pub mod testfn;

pub use error::{Error, Result};
