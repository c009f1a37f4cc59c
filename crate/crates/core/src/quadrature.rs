//! One-dimensional Gauss rules on the reference interval [-1, 1].

use std::f64::consts::PI;

/// Nodes and weights of a rule on [-1, 1], nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over [a, b] with the affinely mapped rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Legendre polynomial P_n and its derivative at `x`.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit P_n'(±1) = ±n(n+1)/2
        x.signum().powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points (exact for degree 2n-1).
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Rule { points, weights }
}

/// Gauss-Lobatto-Legendre rule with `n = p + 1` points, endpoints included.
pub fn gauss_lobatto(n: usize) -> Rule {
    assert!(n >= 2, "a Lobatto rule needs both endpoints");
    let p = n - 1;
    let pf = p as f64;
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    points[0] = -1.0;
    points[p] = 1.0;
    // interior nodes are the roots of P_p'
    for i in 1..n.div_ceil(2) {
        let mut x = -(PI * i as f64 / pf).cos();
        for _ in 0..100 {
            let (pv, dp) = legendre(p, x);
            // (1-x^2) P'' = 2x P' - p(p+1) P
            let d2p = (2.0 * x * dp - pf * (pf + 1.0) * pv) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        points[i] = x;
        points[p - i] = -x;
    }
    if p % 2 == 0 {
        points[p / 2] = 0.0;
    }
    for i in 0..n {
        let (pv, _) = legendre(p, points[i]);
        weights[i] = 2.0 / (pf * (pf + 1.0) * pv * pv);
    }
    Rule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn gauss_is_exact_to_degree_2n_minus_1() {
        for n in 1..=24 {
            let rule = gauss_legendre(n);
            for k in 0..2 * n {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                assert!((q - monomial_integral(k)).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn lobatto_is_exact_to_degree_2n_minus_3() {
        for n in 2..=20 {
            let rule = gauss_lobatto(n);
            assert_eq!(rule.points[0], -1.0);
            assert_eq!(rule.points[n - 1], 1.0);
            for k in 0..2 * n - 2 {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                assert!((q - monomial_integral(k)).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        for n in 2..=18 {
            for rule in [gauss_legendre(n), gauss_lobatto(n)] {
                for w in rule.points.windows(2) {
                    assert!(w[0] < w[1]);
                }
                for i in 0..n {
                    assert_eq!(rule.points[i], -rule.points[n - 1 - i]);
                }
            }
        }
    }

    #[test]
    fn integrate_maps_interval() {
        let rule = gauss_legendre(10);
        let v = rule.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
