//! Exact cohomology of kernel sheaves on the reducible quadric surface
//! `X = H1 ∪ H2 ⊂ P^3`.

pub mod build;
pub mod descriptor;
pub mod exec;
pub mod error;
pub mod linalg;
pub mod mf;
pub mod monomial;
pub mod plane;
pub mod poly;
pub mod quadric;
pub mod report;
pub mod scan;

pub use error::{Error, Result};
