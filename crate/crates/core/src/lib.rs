//! Numerical laboratory for the free orthogonal quantum groups `A_o(F)`:
//! representation theory, boundary estimates, the quantum random walk and
//! the spectral estimates behind factoriality of `L^∞(G)`.

pub mod error;
pub mod fmodel;
pub mod boundary;
pub mod cli;
pub mod linalg;
pub mod qlib;
pub mod sampling;
pub mod spectral;
pub mod suites;
pub mod tlrep;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use fmodel::FModel;
pub use qlib::QParam;
pub use tlrep::Category;
