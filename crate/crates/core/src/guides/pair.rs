//! Directly meshed guides and layers solved with Dirichlet and Neumann truncation.

use serde::{Deserialize, Serialize};

use super::{GuideDisc, LayerDisc};
use crate::eigen::{solve, EigenConfig, EigenResult};
use crate::error::{Error, Result};
use crate::fem::assembly::{assemble, AssembledSystem};
use crate::fem::{BasisSpec, Space};
use crate::geometry::{Geometry2D, Geometry3D, GuideKind, LayerKind, Truncation};
use crate::mesh::guide::build_guide_mesh_with_arc;
use crate::mesh::layer::build_layer_grid;
use crate::mesh::Mesh;

/// A geometry family parameterized by the arm length, with its discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Problem {
    Guide { kind: GuideKind, disc: GuideDisc },
    Layer { kind: LayerKind, disc: LayerDisc },
}

/// Mesh, space, pencil and eigenpairs of one solve.
#[derive(Debug, Clone)]
pub struct Solved {
    pub mesh: Mesh,
    pub space: Space,
    pub sys: AssembledSystem,
    pub result: EigenResult,
}

impl Solved {
    /// Eigenvector `i` on all dofs.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.sys.expand(&self.result.vectors[i])
    }
}

/// Lowest eigenvalues with both truncations at one arm length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub r: f64,
    pub dir: Vec<f64>,
    pub mix: Vec<f64>,
    pub dir_residuals: Vec<f64>,
    pub mix_residuals: Vec<f64>,
    pub n_dofs: usize,
}

impl PairResult {
    pub fn mean(&self) -> f64 {
        0.5 * (self.dir[0] + self.mix[0])
    }

    pub fn half_gap(&self) -> f64 {
        0.5 * (self.dir[0] - self.mix[0])
    }
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Guide { kind, .. } => kind.name(),
            Problem::Layer { kind, .. } => match kind {
                LayerKind::Fichera => "fichera-layer",
                LayerKind::ScaledFichera => "scaled-layer",
            },
        }
    }

    pub fn disc_id(&self) -> String {
        match self {
            Problem::Guide { disc, .. } => disc.id(),
            Problem::Layer { disc, .. } => disc.id(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Problem::Guide { disc, .. } => disc.degree,
            Problem::Layer { disc, .. } => disc.degree,
        }
    }

    pub fn mesh(&self, r: f64, truncation: Truncation) -> Result<Mesh> {
        match *self {
            Problem::Guide { kind, disc } => {
                let g = Geometry2D::new(kind, r, truncation);
                build_guide_mesh_with_arc(&g, &disc.grading, disc.base, disc.n_arc)
            }
            Problem::Layer { kind, disc } => {
                let g = Geometry3D::new(kind, r, disc.level, truncation);
                build_layer_grid(&g)
            }
        }
    }

    pub fn solve(&self, r: f64, truncation: Truncation, eig: &EigenConfig) -> Result<Solved> {
        let mesh = self.mesh(r, truncation)?;
        if let Problem::Layer { disc, .. } = self {
            let n = Space::new(&mesh, disc.degree)?.n_dofs;
            if n > disc.dof_limit {
                return Err(Error::DofGuard {
                    dofs: n,
                    limit: disc.dof_limit,
                });
            }
        }
        let (space, sys) = assemble(&mesh, BasisSpec::new(self.degree()), None)?;
        let result = solve(&sys, eig)?;
        Ok(Solved {
            mesh,
            space,
            sys,
            result,
        })
    }
}

/// Solves with Dirichlet and with Neumann truncation faces.
pub fn dirichlet_mixed_pair(
    problem: &Problem,
    r: f64,
    count: usize,
    eig: &EigenConfig,
) -> Result<PairResult> {
    if !(r > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "arm length must be positive, got {r}"
        )));
    }
    let cfg = EigenConfig { count, ..*eig };
    let d = problem.solve(r, Truncation::Dir, &cfg)?;
    let m = problem.solve(r, Truncation::Mix, &cfg)?;
    Ok(PairResult {
        r,
        dir: d.result.values,
        mix: m.result.values,
        dir_residuals: d.result.raw_residuals,
        mix_residuals: m.result.raw_residuals,
        n_dofs: m.space.n_dofs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GradingSpec;
    use std::f64::consts::PI;

    #[test]
    fn pair_brackets_and_stays_below_threshold() {
        let p = Problem::Guide {
            kind: GuideKind::Broken,
            disc: GuideDisc::new(6, GradingSpec::new(3, 0.15), 1),
        };
        let pair = dirichlet_mixed_pair(&p, 3.0, 2, &EigenConfig::default()).unwrap();
        let pi2 = PI * PI;
        for l in 0..2 {
            assert!(pair.mix[l] <= pair.dir[l]);
        }
        assert!(pair.dir[0] < pi2 && pair.mix[1] > pi2 - 1e-6);
        assert!((pair.mean() / pi2 - 0.92912).abs() < 2e-3);
    }
}
