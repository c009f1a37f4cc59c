//! Trial function with Rayleigh quotient below `pi^2` for the rounded guide.
//!
//! The trial function is the `pi^2`-Helmholtz extension `psi0` of the strip
//! ground mode into the quarter disk, glued to `exp(-mu x) phi(y)` tails in
//! both arms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::eval::{integrate_mesh, FeFunction};
use crate::fem::{BasisSpec, FullSystem, HelmholtzSystem, Space};
use crate::mesh::guide::{build_quarter_disk_mesh, DEFAULT_N_ARC, TAG_EDGE1, TAG_EDGE2};
use crate::mesh::Mesh;
use crate::quadrature::gauss_legendre;

const PI2: f64 = PI * PI;

/// `int_{quarter disk} |f'(r)|^2 - pi^2 f(r)^2` for a radial function, `n` Gauss points in `r`.
pub fn radial_energy(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let s = rule.integrate(0.0, 1.0, |r| (df(r).powi(2) - PI2 * f(r).powi(2)) * r);
    0.5 * PI * s
}

/// Energy of `-sqrt(2) sin(pi r)`, which vanishes.
pub fn radial_testfn_energy() -> f64 {
    let a = 2f64.sqrt();
    radial_energy(|r| -a * (PI * r).sin(), |r| -a * PI * (PI * r).cos(), 64)
}

/// Energy of the control profile `sin(2 pi r)`.
pub fn radial_control_energy() -> f64 {
    radial_energy(
        |r| (2.0 * PI * r).sin(),
        |r| 2.0 * PI * (2.0 * PI * r).cos(),
        64,
    )
}

/// Dirichlet data on the two straight edges; zero on the arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeTrace {
    Zero,
    /// `sqrt(2) sin(k pi t)` across the strip; `k = 1` is the strip ground mode.
    Mode(u32),
}

impl EdgeTrace {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            EdgeTrace::Zero => 0.0,
            EdgeTrace::Mode(k) => 2f64.sqrt() * (k as f64 * PI * t).sin(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            EdgeTrace::Zero => 0.0,
            EdgeTrace::Mode(k) => {
                let kp = k as f64 * PI;
                2f64.sqrt() * kp * (kp * t).cos()
            }
        }
    }

    /// `(||phi||^2, ||phi'||^2)` on `(-1, 0)`.
    pub fn norms(self) -> (f64, f64) {
        match self {
            EdgeTrace::Zero => (0.0, 0.0),
            EdgeTrace::Mode(k) => (1.0, (k as f64 * PI).powi(2)),
        }
    }
}

/// Discretization of the quarter disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDisc {
    pub degree: usize,
    pub n_arc: usize,
}

impl Default for CertificateDisc {
    fn default() -> Self {
        Self {
            degree: 8,
            n_arc: DEFAULT_N_ARC,
        }
    }
}

impl CertificateDisc {
    pub fn id(&self) -> String {
        format!("quarter-disk-a{}-p{}", self.n_arc, self.degree)
    }
}

/// The extension `psi0` with its space and unconstrained matrices.
pub struct Extension {
    pub mesh: Mesh,
    pub disc: CertificateDisc,
    pub trace: EdgeTrace,
    pub space: Space,
    pub full: FullSystem,
    pub coeffs: Vec<f64>,
    pub j_psi0: f64,
    pub norm_psi0_sq: f64,
}

impl Extension {
    /// `int |grad u|^2 - pi^2 u^2` for any coefficient vector on the same space.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.full.k.quad_form(u) - PI2 * self.full.m.quad_form(u)
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.space.coords.iter().map(|&x| f(x)).collect()
    }

    pub fn function(&self) -> Result<FeFunction<'_>> {
        FeFunction::new(&self.mesh, &self.space, &self.coeffs)
    }
}

/// Solves `Delta psi0 + pi^2 psi0 = 0` in the quarter disk with the given edge data.
pub fn solve_helmholtz_extension(disc: CertificateDisc, trace: EdgeTrace) -> Result<Extension> {
    let mesh = build_quarter_disk_mesh(disc.n_arc)?;
    let (space, full, coeffs, j_psi0, norm_psi0_sq) = {
        let hs = HelmholtzSystem::new(&mesh, BasisSpec::new(disc.degree), PI2)?;
        let lifted = hs.lift(|tag, x| edge_value(trace, tag, x))?;
        let u = hs.solve(&lifted)?;
        let (j, n) = hs.energy(&u);
        (hs.space, hs.full, u, j, n)
    };
    Ok(Extension {
        mesh,
        disc,
        trace,
        space,
        full,
        coeffs,
        j_psi0,
        norm_psi0_sq,
    })
}

fn edge_value(trace: EdgeTrace, tag: &str, x: [f64; 3]) -> f64 {
    match tag {
        TAG_EDGE1 => trace.eval(x[1]),
        TAG_EDGE2 => trace.eval(x[0]),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "J_psi0")]
    pub j_psi0: f64,
    pub norm_psi0_sq: f64,
    pub mu_shift: f64,
    pub rayleigh: f64,
    pub rayleigh_over_pi2: f64,
    pub verdict: bool,
    pub discretization: String,
}

/// Rayleigh quotient of the glued function with tail rate `mu`.
///
/// Both tails together contribute `(mu^2 + |phi'|^2)/mu` to the gradient norm
/// and `1/mu` to the mass.
pub fn glued_rayleigh(j_psi0: f64, norm_psi0_sq: f64, mu: f64, trace: EdgeTrace) -> f64 {
    let (m, g) = trace.norms();
    let grad = j_psi0 + PI2 * norm_psi0_sq + (mu * mu * m + g) / mu;
    let mass = norm_psi0_sq + m / mu;
    grad / mass
}

/// Evaluates the quotient at `mu = |J(psi0)|/2`; the verdict needs `J(psi0) < 0`.
pub fn certify(ext: &Extension) -> Certificate {
    let j = ext.j_psi0;
    let n = ext.norm_psi0_sq;
    let mu = 0.5 * j.abs();
    let rayleigh = if mu > 0.0 {
        glued_rayleigh(j, n, mu, ext.trace)
    } else {
        PI2
    };
    Certificate {
        j_psi0: j,
        norm_psi0_sq: n,
        mu_shift: mu,
        rayleigh,
        rayleigh_over_pi2: rayleigh / PI2,
        verdict: j < 0.0 && rayleigh < PI2,
        discretization: ext.disc.id(),
    }
}

/// Norms of the glued function on the guide truncated at `r`, by direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectCheck {
    pub r: f64,
    pub grad_sq: f64,
    pub mass: f64,
    pub rayleigh: f64,
}

/// Smallest arm length at least `r_min` whose dropped tail mass is below `1e-10`.
pub fn tail_length(mu: f64, r_min: f64) -> f64 {
    r_min.max((1e10f64).ln() / (2.0 * mu))
}

/// Quadrature of the glued function: FE values in the quarter disk and the
/// closed-form tails on `(0, r) x (-1, 0)` and its mirror image.
pub fn direct_rayleigh(ext: &Extension, mu: f64, r: f64) -> Result<DirectCheck> {
    if !(mu > 0.0) {
        return Err(Error::CertificateFailed(
            "tail rate must be positive".into(),
        ));
    }
    let fe = ext.function()?;
    let n = ext.disc.degree + 6;
    let disk_grad = integrate_mesh(&ext.mesh, n, |e, xi, _| {
        let g = fe.at_reference(e, xi).grad;
        g[0] * g[0] + g[1] * g[1]
    });
    let disk_mass = integrate_mesh(&ext.mesh, n, |e, xi, _| {
        fe.at_reference(e, xi).value.powi(2)
    });
    let rule = gauss_legendre(24);
    let pieces = (r * mu.max(1.0)).ceil() as usize;
    let h = r / pieces as f64;
    let (mut sg, mut sm) = (0.0, 0.0);
    for i in 0..pieces {
        let a = i as f64 * h;
        for (&xp, &xw) in rule.points.iter().zip(&rule.weights) {
            let x = a + 0.5 * h * (xp + 1.0);
            let ex = (-mu * x).exp();
            for (&yp, &yw) in rule.points.iter().zip(&rule.weights) {
                let y = 0.5 * (yp - 1.0);
                let w = 0.25 * h * xw * yw;
                let v = ex * ext.trace.eval(y);
                let dy = ex * ext.trace.derivative(y);
                sg += w * (mu * mu * v * v + dy * dy);
                sm += w * v * v;
            }
        }
    }
    // the two arms are mirror images
    let grad_sq = disk_grad + 2.0 * sg;
    let mass = disk_mass + 2.0 * sm;
    Ok(DirectCheck {
        r,
        grad_sq,
        mass,
        rayleigh: grad_sq / mass,
    })
}

/// Extension, certificate and direct check with the strip ground mode as data.
pub fn run_certificate(disc: CertificateDisc) -> Result<(Certificate, Option<DirectCheck>)> {
    let ext = solve_helmholtz_extension(disc, EdgeTrace::Mode(1))?;
    let cert = certify(&ext);
    let direct = if cert.mu_shift > 0.0 {
        Some(direct_rayleigh(
            &ext,
            cert.mu_shift,
            tail_length(cert.mu_shift, 12.0),
        )?)
    } else {
        None
    };
    Ok((cert, direct))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_energies() {
        assert!(radial_testfn_energy().abs() < 1e-12);
        // sin(2 pi r): (pi/2) int (4 pi^2 cos^2 - pi^2 sin^2) r dr = (pi/2)(3 pi^2/4)
        let expect = 0.5 * PI * 0.75 * PI2;
        assert!((radial_control_energy() - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_data_is_rejected() {
        let ext = solve_helmholtz_extension(CertificateDisc::default(), EdgeTrace::Zero).unwrap();
        assert!(ext.coeffs.iter().all(|&c| c == 0.0));
        let cert = certify(&ext);
        assert_eq!(cert.j_psi0, 0.0);
        assert!(!cert.verdict);
    }

    #[test]
    fn glued_formula_for_the_ground_mode() {
        let (j, n, mu) = (-0.3, 0.4, 0.15);
        let r = glued_rayleigh(j, n, mu, EdgeTrace::Mode(1));
        assert!((r - (PI2 + mu * (mu + j) / (1.0 + mu * n))).abs() < 1e-13);
    }
}
