//! Waveguide and layer eigenvalue problems: Dirichlet/Mixed pairs, the
//! x3-dependent guide eigenvalue curve, derivative identities and the strip series.

pub mod curve;
pub mod pair;
pub mod reference;
pub mod series;

use serde::{Deserialize, Serialize};

use crate::geometry::GradingSpec;

pub use curve::{closed_form_lambda, lambda_of, sweep_lambda, LambdaCurve, LambdaSample};
pub use pair::{dirichlet_mixed_pair, PairResult, Problem, Solved};
pub use reference::{DerivativeReport, ReferenceGuide};
pub use series::SeriesSolution;

/// Discretization of a 2D guide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuideDisc {
    pub degree: usize,
    pub grading: GradingSpec,
    /// Cells per unit length away from the corner.
    pub base: usize,
    /// Cells along the quarter circle of the rounded guide.
    pub n_arc: usize,
}

impl GuideDisc {
    pub fn new(degree: usize, grading: GradingSpec, base: usize) -> Self {
        Self {
            degree,
            grading,
            base,
            n_arc: crate::mesh::guide::DEFAULT_N_ARC,
        }
    }

    /// Degree 16 on the 4-layer, ratio 0.1 graded mesh.
    pub fn fine() -> Self {
        Self::new(16, GradingSpec::new(4, 0.1), 1)
    }

    /// Degree 8 on the same mesh.
    pub fn quick() -> Self {
        Self::new(8, GradingSpec::new(4, 0.1), 1)
    }

    pub fn id(&self) -> String {
        format!(
            "p{}-l{}-q{}-b{}-a{}",
            self.degree, self.grading.layers, self.grading.ratio, self.base, self.n_arc
        )
    }
}

/// Discretization of a 3D layer: subdivision level of the tensor grid and degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDisc {
    pub level: usize,
    pub degree: usize,
    /// Largest admissible number of dofs.
    pub dof_limit: usize,
}

impl LayerDisc {
    pub fn new(level: usize, degree: usize) -> Self {
        Self {
            level,
            degree,
            dof_limit: 400_000,
        }
    }

    pub fn id(&self) -> String {
        format!("g{}-p{}", self.level, self.degree)
    }
}
