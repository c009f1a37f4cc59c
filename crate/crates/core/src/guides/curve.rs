//! The ground eigenvalue of the guide section as a function of the height x3.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reference::ReferenceGuide;
use crate::eigen::EigenConfig;
use crate::error::{Error, Result};
use crate::interp::Pchip;

/// `(pi^2/2) (1 + x3)^-2`, the mixed square of side `1 + x3`.
pub fn closed_form_lambda(x3: f64) -> Result<f64> {
    if !(x3 > -1.0) {
        return Err(Error::PotentialUndefined(x3));
    }
    Ok(0.5 * PI * PI / ((1.0 + x3) * (1.0 + x3)))
}

/// Guide eigenvalue at height `x3`: closed form below zero, reference pencil above.
pub fn lambda_of(x3: f64, guide: &ReferenceGuide, eig: &EigenConfig) -> Result<f64> {
    if x3 <= 0.0 {
        closed_form_lambda(x3)
    } else {
        guide.lambda(x3, eig)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSample {
    pub x3: f64,
    pub lambda: f64,
    pub degree: usize,
    pub mesh_id: String,
}

/// Sampled branch for `x3 > 0` with a monotone interpolant through `(0, pi^2/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaCurve {
    pub samples: Vec<LambdaSample>,
    pub interpolant: Pchip,
    pub lambda_inf: Option<f64>,
    pub omega: Option<f64>,
}

impl LambdaCurve {
    pub fn from_samples(mut samples: Vec<LambdaSample>) -> Result<Self> {
        samples.sort_by(|a, b| a.x3.partial_cmp(&b.x3).unwrap());
        if samples.iter().any(|s| !(s.x3 > 0.0)) {
            return Err(Error::InvalidArgument("curve samples need x3 > 0".into()));
        }
        let mut x = vec![0.0];
        let mut y = vec![0.5 * PI * PI];
        for s in &samples {
            x.push(s.x3);
            y.push(s.lambda);
        }
        let interpolant = Pchip::new(x, y)?;
        Ok(Self {
            samples,
            interpolant,
            lambda_inf: None,
            omega: None,
        })
    }

    /// Records the threshold estimate and `omega = sqrt(pi^2 - lambda_inf)`.
    pub fn with_threshold(mut self, lambda_inf: f64) -> Self {
        self.lambda_inf = Some(lambda_inf);
        self.omega = Some((PI * PI - lambda_inf).max(0.0).sqrt());
        self
    }

    /// The potential: closed form on `(-1, 0]`, interpolant above, constant past the last sample.
    pub fn eval(&self, x3: f64) -> Result<f64> {
        if x3 <= 0.0 {
            closed_form_lambda(x3)
        } else {
            Ok(self.interpolant.eval(x3))
        }
    }

    /// Knots of the interpolant above zero.
    pub fn knots(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x3).collect()
    }

    /// Checks monotonicity, the lower bound `pi^2/2` and, when known, the upper bound `lambda_inf`.
    pub fn check_invariants(&self, slack: f64) -> Result<()> {
        let half = 0.5 * PI * PI;
        for w in self.samples.windows(2) {
            if w[1].lambda < w[0].lambda - slack {
                return Err(Error::InvalidArgument(format!(
                    "curve decreases between x3={} and x3={}",
                    w[0].x3, w[1].x3
                )));
            }
        }
        for s in &self.samples {
            if s.lambda < half - slack {
                return Err(Error::InvalidArgument(format!(
                    "sample at x3={} below pi^2/2",
                    s.x3
                )));
            }
            if let Some(li) = self.lambda_inf {
                if s.lambda > li + slack {
                    return Err(Error::InvalidArgument(format!(
                        "sample at x3={} above the threshold",
                        s.x3
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV with columns `x3,lambda,lambda_over_pi2,p,mesh_id`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x3,lambda,lambda_over_pi2,p,mesh_id\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{},{}\n",
                s.x3,
                s.lambda,
                s.lambda / (PI * PI),
                s.degree,
                s.mesh_id
            ));
        }
        out
    }
}

/// `n` log-spaced heights between `lo` and `hi`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Samples the curve at the given heights; failures name the offending height.
pub fn sweep_lambda(x3: &[f64], guide: &ReferenceGuide, eig: &EigenConfig) -> Result<LambdaCurve> {
    if x3.windows(2).any(|w| !(w[1] > w[0])) || x3.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(
            "samples must be positive and increasing".into(),
        ));
    }
    let mesh_id = format!("reference-{}", guide.disc.id());
    let samples: Vec<Result<LambdaSample>> = x3
        .par_iter()
        .map(|&h| {
            let lambda = guide
                .lambda(h, eig)
                .map_err(|e| Error::InvalidArgument(format!("sample x3={h} failed: {e}")))?;
            Ok(LambdaSample {
                x3: h,
                lambda,
                degree: guide.disc.degree,
                mesh_id: mesh_id.clone(),
            })
        })
        .collect();
    LambdaCurve::from_samples(samples.into_iter().collect::<Result<Vec<_>>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GradingSpec, Truncation};
    use crate::guides::GuideDisc;

    #[test]
    fn closed_form_values() {
        let pi2 = PI * PI;
        assert!((closed_form_lambda(0.0).unwrap() - pi2 / 2.0).abs() < 1e-15);
        assert!((closed_form_lambda(-0.5).unwrap() - 2.0 * pi2).abs() < 1e-13);
        assert!(closed_form_lambda(-1.0).is_err());
    }

    #[test]
    fn single_sample_curve_extends_constantly() {
        let c = LambdaCurve::from_samples(vec![LambdaSample {
            x3: 1.0,
            lambda: 8.5,
            degree: 4,
            mesh_id: "m".into(),
        }])
        .unwrap();
        assert_eq!(c.eval(5.0).unwrap(), 8.5);
        assert!((c.eval(0.0).unwrap() - PI * PI / 2.0).abs() < 1e-15);
        c.check_invariants(0.0).unwrap();
    }

    #[test]
    fn coarse_sweep_is_monotone() {
        let disc = GuideDisc::new(5, GradingSpec::new(3, 0.15), 2);
        let guide = ReferenceGuide::new(disc, Truncation::Mix).unwrap();
        let eig = EigenConfig::default();
        let curve = sweep_lambda(&log_spaced(1e-3, 10.0, 6), &guide, &eig).unwrap();
        curve.check_invariants(1e-9).unwrap();
        let last = curve.samples.last().unwrap().lambda / (PI * PI);
        assert!((last - 0.92912).abs() < 2e-3);
        assert!(lambda_of(-0.5, &guide, &eig).unwrap() > lambda_of(0.0, &guide, &eig).unwrap());
    }
}
