pub mod analysis;
pub mod cache;
pub mod certificate;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod guides;
pub mod interp;
pub mod mesh;
pub mod quadrature;
pub mod reproduce;
pub mod sparse;
pub mod sturm;

pub use error::{Error, Result};
