//! The one-dimensional reduction `-q'' + lambda(x3) q` on `(L, R)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{ground_state, EigenConfig};
use crate::error::{Error, Result};
use crate::fem::assembly::Assembler;
use crate::fem::eval::FeFunction;
use crate::fem::{BasisSpec, Space};
use crate::geometry::{BcKind, BcMap};
use crate::guides::LambdaCurve;
use crate::mesh::simple::{interval, TAG_LEFT, TAG_RIGHT};
use crate::mesh::Mesh;

/// Largest ratio `(1+x_{i+1})/(1+x_i)` of consecutive breaks below zero.
const NEGATIVE_GROWTH: f64 = 1.5;
/// Largest cell length past the last curve knot.
const FAR_CELL: f64 = 2.0;

/// The operator on `(l, r_trunc)` with a Neumann condition at `l`.
#[derive(Debug, Clone, Copy)]
pub struct SturmProblem<'a> {
    pub l: f64,
    pub r_trunc: f64,
    pub far_bc: BcKind,
    pub potential: &'a LambdaCurve,
    pub degree: usize,
}

impl<'a> SturmProblem<'a> {
    /// Half-line truncated at 40 with a Neumann far end, degree 10.
    pub fn new(l: f64, potential: &'a LambdaCurve) -> Self {
        Self {
            l,
            r_trunc: 40.0,
            far_bc: BcKind::Neumann,
            potential,
            degree: 10,
        }
    }

    pub fn at(&self, l: f64) -> Self {
        Self { l, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.l > -1.0) {
            return Err(Error::PotentialUndefined(self.l));
        }
        if !(self.l < self.r_trunc) {
            return Err(Error::InvalidGeometry(format!(
                "left end {} is not below the truncation {}",
                self.l, self.r_trunc
            )));
        }
        Ok(())
    }

    /// Breaks at `l`, `0`, the curve knots and `r_trunc`, graded towards `-1` below zero.
    pub fn breaks(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let (l, r) = (self.l, self.r_trunc);
        let mut b = vec![l];
        if l < 0.0 {
            let n = ((1.0 / (1.0 + l)).ln() / NEGATIVE_GROWTH.ln())
                .ceil()
                .max(2.0) as usize;
            for i in 1..n {
                b.push((1.0 + l).powf(1.0 - i as f64 / n as f64) - 1.0);
            }
            if r > 0.0 {
                b.push(0.0);
            }
        }
        let min_cell = 1e-9 * (r - l);
        for k in self.potential.knots() {
            if k > b[b.len() - 1] + min_cell && k < r - min_cell {
                b.push(k);
            }
        }
        let last = b[b.len() - 1];
        let n = ((r - last) / FAR_CELL).ceil().max(1.0) as usize;
        for i in 1..=n {
            b.push(if i == n {
                r
            } else {
                last + (r - last) * i as f64 / n as f64
            });
        }
        Ok(b)
    }

    pub fn mesh(&self) -> Result<Mesh> {
        let mut bc = BcMap::new();
        bc.insert(TAG_LEFT.into(), BcKind::Neumann);
        bc.insert(TAG_RIGHT.into(), self.far_bc);
        interval(&self.breaks()?, bc)
    }
}

/// Normalized ground state with `q(l) > 0`.
#[derive(Debug, Clone)]
pub struct SturmResult {
    pub l: f64,
    pub mu: f64,
    pub q: Vec<f64>,
    pub q_at_l: f64,
    pub mesh: Mesh,
    pub space: Space,
}

impl SturmResult {
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(FeFunction::new(&self.mesh, &self.space, &self.q)?
            .at([x, 0.0, 0.0])?
            .value)
    }
}

pub fn solve_sturm(prob: &SturmProblem) -> Result<SturmResult> {
    let mesh = prob.mesh()?;
    let space = Space::new(&mesh, prob.degree)?;
    let curve = prob.potential;
    // the potential is piecewise cubic between knots, so p + 4 points are exact there
    let basis = BasisSpec::with_quadrature(prob.degree, prob.degree + 4);
    let potential = |x: [f64; 3]| curve.eval(x[0]).unwrap_or(f64::NAN);
    let comps = Assembler::new(&mesh, &space, basis)?.components(Some(&potential))?;
    let sys = comps.combine(None)?.restrict(&space.dirichlet_mask(&mesh)?);
    let (mu, v) = ground_state(&sys, &EigenConfig::default())?;
    if !mu.is_finite() {
        return Err(Error::PotentialUndefined(prob.l));
    }
    let mut q = sys.expand(&v);
    let q_at_l = FeFunction::new(&mesh, &space, &q)?
        .at([prob.l, 0.0, 0.0])?
        .value;
    let q_at_l = if q_at_l < 0.0 {
        q.iter_mut().for_each(|c| *c = -*c);
        -q_at_l
    } else {
        q_at_l
    };
    Ok(SturmResult {
        l: prob.l,
        mu,
        q,
        q_at_l,
        mesh,
        space,
    })
}

/// One point of the `mu` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSample {
    pub l: f64,
    pub mu: f64,
    pub lambda_at_l: f64,
    pub q_at_l: f64,
}

impl MuSample {
    /// `mu'(L) = (mu - lambda(L)) q(L)^2`.
    pub fn derivative(&self) -> f64 {
        (self.mu - self.lambda_at_l) * self.q_at_l * self.q_at_l
    }
}

pub fn mu_sample(prob: &SturmProblem) -> Result<MuSample> {
    let res = solve_sturm(prob)?;
    Ok(MuSample {
        l: prob.l,
        mu: res.mu,
        lambda_at_l: prob.potential.eval(prob.l)?,
        q_at_l: res.q_at_l,
    })
}

/// `mu` at every sample, evaluated in parallel and returned in input order.
pub fn mu_curve(ls: &[f64], template: &SturmProblem) -> Result<Vec<MuSample>> {
    ls.par_iter()
        .map(|&l| mu_sample(&template.at(l)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Closed-form derivative of `mu` at `l`; the potential has a kink at zero.
pub fn mu_derivative(l: f64, template: &SturmProblem) -> Result<f64> {
    if l == 0.0 {
        return Err(Error::InvalidArgument(
            "the potential is not differentiable at x3 = 0".into(),
        ));
    }
    Ok(mu_sample(&template.at(l))?.derivative())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstarResult {
    pub l_star: f64,
    pub mu_star: f64,
    pub mu_star_over_pi2: f64,
    /// Width of the final bracket.
    pub bracket: f64,
    pub evaluations: usize,
}

/// Bisection on the sign of `mu - lambda` over `[lo, hi]`, negative at `lo`.
pub fn find_lstar_in(template: &SturmProblem, lo: f64, hi: f64, tol: f64) -> Result<LstarResult> {
    let sign = |l: f64| -> Result<f64> {
        let s = mu_sample(&template.at(l))?;
        Ok(s.mu - s.lambda_at_l)
    };
    let (mut a, mut b) = (lo, hi);
    if !(sign(a)? < 0.0 && sign(b)? > 0.0) {
        return Err(Error::NoSignChange);
    }
    let mut evaluations = 2;
    while b - a > tol {
        let c = 0.5 * (a + b);
        evaluations += 1;
        if sign(c)? < 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    let l_star = 0.5 * (a + b);
    let mu_star = solve_sturm(&template.at(l_star))?.mu;
    Ok(LstarResult {
        l_star,
        mu_star,
        mu_star_over_pi2: mu_star / (PI * PI),
        bracket: b - a,
        evaluations: evaluations + 1,
    })
}

/// The crossing of `mu` and `lambda` in `(-1, 0)`.
pub fn find_lstar(template: &SturmProblem, tol: f64) -> Result<LstarResult> {
    find_lstar_in(template, -0.9, 0.0, tol)
}

/// Number of sign changes of `mu - lambda` along the grid.
pub fn sign_changes(samples: &[MuSample]) -> usize {
    samples
        .windows(2)
        .filter(|w| (w[0].mu - w[0].lambda_at_l).signum() != (w[1].mu - w[1].lambda_at_l).signum())
        .count()
}

/// `1 + 2 int_L^inf t exp(-2 omega (t - L0)) dt` in closed form.
pub fn bargmann_bound(omega: f64, l: f64, l0: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let tw = 2.0 * omega;
    Ok(1.0 + 2.0 * (tw * (l0 - l)).exp() * (l / tw + 1.0 / (tw * tw)))
}

/// Minimum over `L` of the operator on `(L, R)` with a Dirichlet far end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteMinimum {
    pub r: f64,
    pub l_star: f64,
    pub mu_min: f64,
    pub mu_min_over_pi2: f64,
}

pub fn finite_interval_minima(
    curve: &LambdaCurve,
    rs: &[f64],
    degree: usize,
    tol: f64,
) -> Result<Vec<FiniteMinimum>> {
    rs.iter()
        .map(|&r| {
            let template = SturmProblem {
                l: 0.0,
                r_trunc: r,
                far_bc: BcKind::Dirichlet,
                potential: curve,
                degree,
            };
            let s = find_lstar(&template, tol)?;
            Ok(FiniteMinimum {
                r,
                l_star: s.l_star,
                mu_min: s.mu_star,
                mu_min_over_pi2: s.mu_star_over_pi2,
            })
        })
        .collect()
}

/// CSV with columns `L,mu,mu_over_pi2,lambda_at_L,q_at_L`.
pub fn mu_csv(samples: &[MuSample]) -> String {
    let mut out = String::from("L,mu,mu_over_pi2,lambda_at_L,q_at_L\n");
    for s in samples {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            s.l,
            s.mu,
            s.mu / (PI * PI),
            s.lambda_at_l,
            s.q_at_l
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guides::LambdaSample;

    fn flat(c: f64) -> LambdaCurve {
        LambdaCurve::from_samples(vec![LambdaSample {
            x3: 1e-3,
            lambda: c,
            degree: 1,
            mesh_id: "flat".into(),
        }])
        .unwrap()
    }

    #[test]
    fn constant_potential_on_positive_interval() {
        let c = 7.0;
        let curve = flat(c);
        let prob = SturmProblem {
            l: 0.5,
            ..SturmProblem::new(0.5, &curve)
        };
        let res = solve_sturm(&prob).unwrap();
        assert!((res.mu - c).abs() < 1e-10 * c);
        let norm = 1.0 / (prob.r_trunc - prob.l).sqrt();
        assert!((res.q_at_l - norm).abs() < 1e-8);
        assert!((res.eval(20.0).unwrap() - norm).abs() < 1e-8);
    }

    #[test]
    fn breaks_include_zero_and_knots() {
        let curve = flat(7.0);
        let b = SturmProblem::new(-0.95, &curve).breaks().unwrap();
        assert_eq!(b[0], -0.95);
        assert!(b.contains(&0.0) && b.contains(&1e-3));
        assert_eq!(*b.last().unwrap(), 40.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(SturmProblem::new(-1.0, &curve).breaks().is_err());
    }

    #[test]
    fn dirichlet_far_end_raises_mu() {
        let curve = flat(PI * PI / 2.0);
        let mut p = SturmProblem::new(0.5, &curve);
        p.r_trunc = 3.5;
        p.far_bc = BcKind::Dirichlet;
        let mu = solve_sturm(&p).unwrap().mu;
        let expect = PI * PI / 2.0 + (PI / 6.0).powi(2);
        assert!((mu - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn bargmann_closed_form() {
        let (w, l, l0) = (0.8364, 1.0, 1.0);
        let b = bargmann_bound(w, l, l0).unwrap();
        assert!((b - (1.0 + 2.0 * (1.0 / (2.0 * w) + 1.0 / (4.0 * w * w)))).abs() < 1e-14);
        assert!((bargmann_bound(1e8, l, l0).unwrap() - 1.0).abs() < 1e-7);
        assert!(bargmann_bound(0.0, l, l0).is_err());
    }
}
