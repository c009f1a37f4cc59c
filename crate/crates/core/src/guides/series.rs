//! Sine-mode expansion of the ground state on the arm `(0, R) x (-1, 0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::eval::{line_samples, FeFunction};

/// Mode expansion `v = sum_k g_k cosh((R-x1) w_k)/cosh(R w_k) s_k(x2)`, `w_k = sqrt(k^2 pi^2 - lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub r: f64,
    pub lambda: f64,
    /// `g_k`, k = 1..=k_max.
    pub coeffs: Vec<f64>,
    pub rates: Vec<f64>,
    pub k_max: usize,
}

/// `cosh((R-x) w)/cosh(R w)` or the `sinh` variant, without overflow.
fn profile(r: f64, x: f64, w: f64, odd: bool) -> f64 {
    let a = (-x * w).exp();
    let b = (-(2.0 * r - x) * w).exp();
    let d = 1.0 + (-2.0 * r * w).exp();
    if odd {
        (a - b) / d
    } else {
        (a + b) / d
    }
}

impl SeriesSolution {
    pub fn new(r: f64, lambda: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(lambda < PI * PI) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue {lambda} is not below pi^2; the modes do not decay"
            )));
        }
        let rates = (1..=coeffs.len())
            .map(|k| ((k * k) as f64 * PI * PI - lambda).sqrt())
            .collect();
        Ok(Self {
            r,
            lambda,
            k_max: coeffs.len(),
            coeffs,
            rates,
        })
    }

    /// `d1^l d2^m v (x1, x2)` from the truncated series.
    pub fn eval(&self, x1: f64, x2: f64, l: u32, m: u32) -> Result<f64> {
        if !(x1 > 0.0) || x1 > self.r + 1e-12 {
            return Err(Error::SeriesDomain(x1));
        }
        let odd_l = l % 2 == 1;
        let mut s = 0.0;
        for (i, (&g, &w)) in self.coeffs.iter().zip(&self.rates).enumerate() {
            let kp = (i + 1) as f64 * PI;
            let transverse = if m % 2 == 0 {
                let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign * kp.powi(m as i32) * 2f64.sqrt() * (kp * x2).sin()
            } else {
                let sign = if ((m - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign * kp.powi(m as i32) * 2f64.sqrt() * (kp * x2).cos()
            };
            let sign_l = if odd_l { -1.0 } else { 1.0 };
            s += g * sign_l * w.powi(l as i32) * profile(self.r, x1, w, odd_l) * transverse;
        }
        Ok(s)
    }

    /// `|| d1^l d2^m v ||` on the segment `{rho} x (-1, 0)`.
    pub fn trace_norm(&self, rho: f64, l: u32, m: u32) -> f64 {
        let odd_l = l % 2 == 1;
        self.coeffs
            .iter()
            .zip(&self.rates)
            .enumerate()
            .map(|(i, (&g, &w))| {
                let kp = (i + 1) as f64 * PI;
                (w.powi(l as i32) * kp.powi(m as i32) * profile(self.r, rho, w, odd_l) * g).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Size of the first omitted mode relative to the coefficient scale at `x1`.
    pub fn tail_bound(&self, x1: f64) -> f64 {
        let w = (((self.k_max + 1) * (self.k_max + 1)) as f64 * PI * PI - self.lambda).sqrt();
        (-x1 * w).exp()
    }
}

/// Expansion fitted to the trace of `fe` on `{0} x (-1, 0)`.
pub fn series_from_fem(
    fe: &FeFunction,
    r: f64,
    lambda: f64,
    k_max: usize,
    n_gauss: usize,
) -> Result<SeriesSolution> {
    let samples = line_samples(fe, [0.0, -1.0, 0.0], [0.0, 0.0, 0.0], n_gauss)?;
    let coeffs = (1..=k_max)
        .map(|k| {
            let kp = k as f64 * PI;
            samples
                .iter()
                .map(|(w, x, pv)| w * pv.value * 2f64.sqrt() * (kp * x[1]).sin())
                .sum()
        })
        .collect();
    SeriesSolution::new(r, lambda, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_behaviour() {
        let s = SeriesSolution::new(5.0, 0.9 * PI * PI, vec![0.8, -0.1, 0.02]).unwrap();
        for x1 in [0.3, 1.0, 4.0] {
            assert!(s.eval(x1, -1.0, 0, 0).unwrap().abs() < 1e-14);
            assert!(s.eval(x1, 0.0, 0, 0).unwrap().abs() < 1e-14);
        }
        assert!(s.eval(5.0, -0.4, 1, 0).unwrap().abs() < 1e-14);
        assert!(s.eval(0.0, -0.5, 0, 0).is_err());
        assert!(s
            .rates
            .iter()
            .enumerate()
            .all(|(i, &w)| w >= (i + 1) as f64 * s.rates[0]));
    }

    #[test]
    fn derivatives_match_differences() {
        let s = SeriesSolution::new(4.0, 0.92 * PI * PI, vec![0.7, 0.2, -0.05, 0.01]).unwrap();
        let (x1, x2, h) = (1.3, -0.37, 1e-5);
        let d1 =
            (s.eval(x1 + h, x2, 0, 0).unwrap() - s.eval(x1 - h, x2, 0, 0).unwrap()) / (2.0 * h);
        let d2 =
            (s.eval(x1, x2 + h, 0, 0).unwrap() - s.eval(x1, x2 - h, 0, 0).unwrap()) / (2.0 * h);
        assert!((d1 - s.eval(x1, x2, 1, 0).unwrap()).abs() < 1e-8);
        assert!((d2 - s.eval(x1, x2, 0, 1).unwrap()).abs() < 1e-8);
        let d22 = (s.eval(x1, x2, 0, 1).unwrap() - s.eval(x1, x2 - h, 0, 1).unwrap()) / h;
        assert!((d22 - s.eval(x1, x2 - 0.5 * h, 0, 2).unwrap()).abs() < 1e-5);
        // each mode solves the Helmholtz equation
        let lap = s.eval(x1, x2, 2, 0).unwrap() + s.eval(x1, x2, 0, 2).unwrap();
        assert!((lap + s.lambda * s.eval(x1, x2, 0, 0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_matches_quadrature() {
        let s = SeriesSolution::new(3.0, 0.9 * PI * PI, vec![0.6, 0.3]).unwrap();
        let rule = crate::quadrature::gauss_legendre(30);
        let q: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| 0.5 * w * s.eval(1.5, 0.5 * (p - 1.0), 0, 0).unwrap().powi(2))
            .sum();
        assert!((q.sqrt() - s.trace_norm(1.5, 0, 0)).abs() < 1e-12);
    }
}
