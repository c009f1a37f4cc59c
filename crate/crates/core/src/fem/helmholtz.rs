//! Shifted Helmholtz problems `-Delta u - s u = 0` with inhomogeneous Dirichlet data.

use super::assembly::{Assembler, FullSystem};
use super::basis::BasisSpec;
use super::space::Space;
use crate::eigen::ShiftedFactor;
use crate::error::{Error, Result};
use crate::geometry::BcKind;
use crate::mesh::Mesh;

/// Full stiffness and mass of a mesh with the Dirichlet lifting machinery.
pub struct HelmholtzSystem<'a> {
    pub mesh: &'a Mesh,
    pub space: Space,
    pub full: FullSystem,
    pub shift: f64,
    constrained: Vec<bool>,
}

impl<'a> HelmholtzSystem<'a> {
    pub fn new(mesh: &'a Mesh, basis: BasisSpec, shift: f64) -> Result<Self> {
        let space = Space::new(mesh, basis.degree)?;
        let full = Assembler::new(mesh, &space, basis)?
            .components(None)?
            .combine(None)?;
        let constrained = space.dirichlet_mask(mesh)?;
        Ok(Self {
            mesh,
            space,
            full,
            shift,
            constrained,
        })
    }

    /// Nodal interpolation of `g(tag, x)` on the Dirichlet facets, zero elsewhere.
    pub fn lift(&self, g: impl Fn(&str, [f64; 3]) -> f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.space.n_dofs];
        for tag in self.mesh.bc.keys() {
            if self.mesh.bc_of(tag)? != BcKind::Dirichlet || !self.mesh.has_tag(tag) {
                continue;
            }
            let mask = self.space.tag_mask(self.mesh, tag)?;
            for (d, &on) in mask.iter().enumerate() {
                if on {
                    out[d] = g(tag, self.space.coords[d]);
                }
            }
        }
        Ok(out)
    }

    /// Solution with Dirichlet values `lifted` on constrained dofs.
    pub fn solve(&self, lifted: &[f64]) -> Result<Vec<f64>> {
        let a = self.full.k.axpy(-self.shift, &self.full.m);
        let r = a.apply(lifted);
        let sys = self.full.restrict(&self.constrained);
        let mut rhs = vec![sys.free.iter().map(|&g| -r[g]).collect::<Vec<f64>>()];
        let factor = ShiftedFactor::new(&sys.k, &sys.m, self.shift).map_err(|e| {
            Error::FactorizationFailed(format!("shifted operator is not positive definite: {e}"))
        })?;
        factor.solve_columns(&mut rhs);
        let mut u = lifted.to_vec();
        for (i, &g) in sys.free.iter().enumerate() {
            u[g] = rhs[0][i];
        }
        Ok(u)
    }

    /// `int |grad u|^2 - s int u^2` and `int u^2`.
    pub fn energy(&self, u: &[f64]) -> (f64, f64) {
        let m = self.full.m.quad_form(u);
        (self.full.k.quad_form(u) - self.shift * m, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BcMap;
    use crate::mesh::simple::{rectangle, uniform_breaks};
    use std::f64::consts::PI;

    fn square() -> Mesh {
        let bc: BcMap = ["left", "right", "bottom", "top"]
            .iter()
            .map(|t| (t.to_string(), BcKind::Dirichlet))
            .collect();
        let b = uniform_breaks(0.0, 1.0, 2);
        rectangle(&b, &b, bc).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let m = square();
        let h = HelmholtzSystem::new(&m, BasisSpec::new(4), 0.0).unwrap();
        let g = h.lift(|_, _| 0.0).unwrap();
        let u = h.solve(&g).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reproduces_helmholtz_solution() {
        // u = sin(a x) e^{b y} solves -Delta u = (a^2 - b^2) u
        let m = square();
        let (a, b) = (2.0, 0.5);
        let s = a * a - b * b;
        let exact = |x: [f64; 3]| (a * x[0]).sin() * (b * x[1]).exp();
        let h = HelmholtzSystem::new(&m, BasisSpec::new(10), s).unwrap();
        let g = h.lift(|_, x| exact(x)).unwrap();
        let u = h.solve(&g).unwrap();
        for (d, x) in h.space.coords.iter().enumerate() {
            assert!((u[d] - exact(*x)).abs() < 1e-9);
        }
        // shift above the first Dirichlet eigenvalue is rejected
        let bad = HelmholtzSystem::new(&m, BasisSpec::new(4), 2.5 * PI * PI).unwrap();
        assert!(bad.solve(&g).is_err());
    }
}
