pub mod assembly;
pub mod basis;
pub mod boundary;
pub mod eval;
pub mod helmholtz;
pub mod space;

pub use assembly::{assemble, AssembledSystem, Assembler, FullSystem, WeightSpec};
pub use basis::{BasisSpec, Lagrange1d, Tabulated1d};
pub use boundary::{boundary_integral, Trace};
pub use eval::{FeFunction, PointValue};
pub use helmholtz::HelmholtzSystem;
pub use space::Space;
