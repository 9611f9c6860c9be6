//! Numerical toolkit for the magnetic C*-algebra of the Landau Hamiltonian:
//! the Laguerre basis, the algebra of transition operators, its integral
//! kernels, the magnetic Dirac operator and its Fredholm module, singular
//! value and Dixmier trace machinery, and the cyclic cocycles that compute
//! the gap labels and Chern numbers of Landau projections.

pub mod algebra;
pub mod cocycle;
pub mod dirac;
pub mod error;
pub mod kernel;
pub mod laguerre;
pub mod report;
pub mod schatten;
pub mod sum;

pub use error::{Error, Result};
