//! The unit-arm reference guide carrying every arm length through weighted forms.

use serde::{Deserialize, Serialize};

use super::GuideDisc;
use crate::eigen::{ground_state, solve, EigenConfig, EigenResult};
use crate::error::{Error, Result};
use crate::fem::assembly::{AssembledSystem, Assembler, Components, WeightSpec};
use crate::fem::boundary::{boundary_integral, Trace};
use crate::fem::eval::FeFunction;
use crate::fem::{BasisSpec, Space};
use crate::geometry::{Truncation, TAG_SIGMA};
use crate::mesh::guide::build_reference_guide_mesh;
use crate::mesh::Mesh;

/// Reference mesh, space and assembled pieces, shared by every arm length.
pub struct ReferenceGuide {
    pub disc: GuideDisc,
    pub truncation: Truncation,
    pub mesh: Mesh,
    pub space: Space,
    components: Components,
    constrained: Vec<bool>,
}

/// Ground state of the guide with arm length `r` computed on the reference mesh.
#[derive(Debug, Clone)]
pub struct ReferenceSolve {
    pub r: f64,
    pub lambda: f64,
    /// Ground state on all reference dofs; also the nodal vector on the stretched mesh.
    pub vector: Vec<f64>,
}

/// Boundary expressions of the derivative of the ground eigenvalue in the arm length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub r: f64,
    pub lambda: f64,
    /// `int_Sigma |d_tau v|^2 - lambda |v|^2`
    pub tangential: f64,
    /// `int_Sigma v d_n^2 v`
    pub normal: f64,
    /// `int_Sigma (pi^2 - lambda) |v|^2`
    pub lower_bound: f64,
}

impl ReferenceGuide {
    pub fn new(disc: GuideDisc, truncation: Truncation) -> Result<Self> {
        let mesh = build_reference_guide_mesh(&disc.grading, disc.base, truncation)?;
        let basis = BasisSpec::new(disc.degree);
        let space = Space::new(&mesh, disc.degree)?;
        let components = Assembler::new(&mesh, &space, basis)?.components(None)?;
        let constrained = space.dirichlet_mask(&mesh)?;
        Ok(Self {
            disc,
            truncation,
            mesh,
            space,
            components,
            constrained,
        })
    }

    /// Weighted pencil whose eigenvalues are those of the guide with arm length `r`.
    pub fn system(&self, r: f64) -> Result<AssembledSystem> {
        let w = WeightSpec::reference_guide(r)?;
        Ok(self
            .components
            .combine(Some(&w))?
            .restrict(&self.constrained))
    }

    pub fn eigenpairs(&self, r: f64, eig: &EigenConfig) -> Result<EigenResult> {
        solve(&self.system(r)?, eig)
    }

    pub fn solve(&self, r: f64, eig: &EigenConfig) -> Result<ReferenceSolve> {
        let sys = self.system(r)?;
        let (lambda, v) = ground_state(&sys, eig)?;
        Ok(ReferenceSolve {
            r,
            lambda,
            vector: sys.expand(&v),
        })
    }

    pub fn lambda(&self, r: f64, eig: &EigenConfig) -> Result<f64> {
        Ok(self.solve(r, eig)?.lambda)
    }

    /// The reference mesh mapped onto the guide with arm length `r`.
    pub fn stretched_mesh(&self, r: f64) -> Result<Mesh> {
        self.mesh.stretched_arms(r)
    }

    /// Boundary formulas for the arm-length derivative of the ground eigenvalue.
    pub fn eigen_derivative(&self, r: f64, eig: &EigenConfig) -> Result<DerivativeReport> {
        if self.truncation != Truncation::Mix {
            return Err(Error::InvalidArgument(
                "the derivative identity needs Neumann truncation faces".into(),
            ));
        }
        let sol = self.solve(r, eig)?;
        let mesh = self.stretched_mesh(r)?;
        let fe = FeFunction::new(&mesh, &self.space, &sol.vector)?;
        let n = self.disc.degree + 4;
        let grad = boundary_integral(&fe, TAG_SIGMA, Trace::TangentialGradSq, n)?;
        let mass = boundary_integral(&fe, TAG_SIGMA, Trace::ValueSq, n)?;
        let normal = boundary_integral(&fe, TAG_SIGMA, Trace::ValueNormalSecond, n)?;
        let pi2 = std::f64::consts::PI.powi(2);
        Ok(DerivativeReport {
            r,
            lambda: sol.lambda,
            tangential: grad - sol.lambda * mass,
            normal,
            lower_bound: (pi2 - sol.lambda) * mass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::assemble;
    use crate::geometry::{Geometry2D, GradingSpec};
    use crate::mesh::guide::build_guide_mesh;

    #[test]
    fn weighted_matches_stretched_mesh() {
        let disc = GuideDisc::new(6, GradingSpec::new(2, 0.2), 2);
        let reference = ReferenceGuide::new(disc, Truncation::Mix).unwrap();
        let eig = EigenConfig::default();
        for r in [0.5, 3.0] {
            let weighted = reference.lambda(r, &eig).unwrap();
            let mesh = reference.stretched_mesh(r).unwrap();
            let (_, sys) = assemble(&mesh, BasisSpec::new(6), None).unwrap();
            let direct = ground_state(&sys, &eig).unwrap().0;
            assert!((weighted - direct).abs() < 1e-10 * direct, "r={r}");
        }
    }

    #[test]
    fn unit_arms_match_direct_mesh() {
        let disc = GuideDisc::new(5, GradingSpec::new(2, 0.2), 2);
        let reference = ReferenceGuide::new(disc, Truncation::Dir).unwrap();
        let eig = EigenConfig::default();
        let g = Geometry2D::broken(1.0, Truncation::Dir);
        let m = build_guide_mesh(&g, &GradingSpec::new(2, 0.2), 2).unwrap();
        let (_, sys) = assemble(&m, BasisSpec::new(5), None).unwrap();
        let direct = ground_state(&sys, &eig).unwrap().0;
        assert!((reference.lambda(1.0, &eig).unwrap() - direct).abs() < 1e-11 * direct);
    }
}
