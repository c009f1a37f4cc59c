//! Shape-preserving piecewise cubic Hermite interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone cubic interpolant with Fritsch-Carlson slopes; constant beyond the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pchip {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidArgument(
                "interpolation needs matching nonempty data".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "abscissae must be strictly increasing".into(),
            ));
        }
        let n = x.len();
        let mut slopes = vec![0.0; n];
        if n >= 2 {
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
            if n == 2 {
                slopes = vec![d[0], d[0]];
            } else {
                for i in 1..n - 1 {
                    if d[i - 1] * d[i] > 0.0 {
                        let w1 = 2.0 * h[i] + h[i - 1];
                        let w2 = h[i] + 2.0 * h[i - 1];
                        slopes[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                    }
                }
                slopes[0] = end_slope(h[0], h[1], d[0], d[1]);
                slopes[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
            }
        }
        Ok(Self { x, y, slopes })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i]
            + h10 * h * self.slopes[i]
            + h01 * self.y[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_preserves_monotonicity() {
        let x = vec![0.0, 0.1, 0.5, 2.0, 3.0, 10.0];
        let y = vec![0.0, 0.5, 0.6, 0.9, 0.95, 1.0];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(p.eval(*a), *b);
        }
        let mut last = f64::NEG_INFINITY;
        for k in 0..=2000 {
            let v = p.eval(10.0 * k as f64 / 2000.0);
            assert!(v >= last - 1e-15);
            last = v;
        }
        assert_eq!(p.eval(20.0), 1.0);
        assert_eq!(p.eval(-1.0), 0.0);
    }

    #[test]
    fn reproduces_lines_and_single_points() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 7.0]).unwrap();
        assert!((p.eval(2.2) - 5.4).abs() < 1e-14);
        let one = Pchip::new(vec![1.0], vec![4.0]).unwrap();
        assert_eq!(one.eval(0.3), 4.0);
        assert_eq!(one.eval(7.0), 4.0);
        assert!(Pchip::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
    }
}
