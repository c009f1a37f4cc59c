use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, gauss_lobatto, Rule};

/// Degree and quadrature order of a tensor-product Lagrange element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub degree: usize,
    pub n_quad: usize,
}

impl BasisSpec {
    /// Degree `p` with the default `p + 2` Gauss points per direction.
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            n_quad: degree + 2,
        }
    }

    pub fn with_quadrature(degree: usize, n_quad: usize) -> Self {
        Self { degree, n_quad }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        if self.n_quad < self.degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} quadrature points cannot integrate degree {} mass terms",
                self.n_quad, self.degree
            )));
        }
        Ok(())
    }
}

/// Lagrange basis on the Gauss-Lobatto nodes of [-1, 1].
#[derive(Debug, Clone)]
pub struct Lagrange1d {
    pub nodes: Vec<f64>,
    bary: Vec<f64>,
    /// `diff[i][j]` = l_j'(x_i)
    diff: Vec<Vec<f64>>,
    diff2: Vec<Vec<f64>>,
}

impl Lagrange1d {
    pub fn new(degree: usize) -> Self {
        let nodes = gauss_lobatto(degree + 1).points;
        let n = nodes.len();
        let mut bary = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k != j {
                    bary[j] /= nodes[j] - nodes[k];
                }
            }
        }
        let mut diff = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                    diff[i][j] = d;
                    diag -= d;
                }
            }
            diff[i][i] = diag;
        }
        let mut diff2 = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                diff2[i][j] = (0..n).map(|k| diff[i][k] * diff[k][j]).sum();
            }
        }
        Self {
            nodes,
            bary,
            diff,
            diff2,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Values of all basis functions at `x`.
    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            let mut v = vec![0.0; n];
            v[j] = 1.0;
            return v;
        }
        let terms: Vec<f64> = (0..n).map(|j| self.bary[j] / (x - self.nodes[j])).collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }

    /// First derivatives of all basis functions at `x`.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        self.apply_nodal(&self.diff, x)
    }

    pub fn second_derivatives(&self, x: f64) -> Vec<f64> {
        self.apply_nodal(&self.diff2, x)
    }

    fn apply_nodal(&self, table: &[Vec<f64>], x: f64) -> Vec<f64> {
        let l = self.values(x);
        let n = self.len();
        (0..n)
            .map(|j| (0..n).map(|i| l[i] * table[i][j]).sum())
            .collect()
    }
}

/// Basis values and derivatives tabulated at the quadrature points.
#[derive(Debug, Clone)]
pub struct Tabulated1d {
    pub basis: Lagrange1d,
    pub rule: Rule,
    /// `value[q][i]`
    pub value: Vec<Vec<f64>>,
    pub deriv: Vec<Vec<f64>>,
    /// reference mass `sum_q w_q l_i l_j`
    pub mass: Vec<Vec<f64>>,
    /// reference stiffness `sum_q w_q l_i' l_j'`
    pub stiff: Vec<Vec<f64>>,
}

impl Tabulated1d {
    pub fn new(spec: BasisSpec) -> Self {
        let basis = Lagrange1d::new(spec.degree);
        let rule = gauss_legendre(spec.n_quad);
        let value: Vec<Vec<f64>> = rule.points.iter().map(|&x| basis.values(x)).collect();
        let deriv: Vec<Vec<f64>> = rule.points.iter().map(|&x| basis.derivatives(x)).collect();
        let n = basis.len();
        let mut mass = vec![vec![0.0; n]; n];
        let mut stiff = vec![vec![0.0; n]; n];
        for (q, &w) in rule.weights.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    mass[i][j] += w * value[q][i] * value[q][j];
                    stiff[i][j] += w * deriv[q][i] * deriv[q][j];
                }
            }
        }
        Self {
            basis,
            rule,
            value,
            deriv,
            mass,
            stiff,
        }
    }

    pub fn n_basis(&self) -> usize {
        self.basis.len()
    }

    pub fn n_quad(&self) -> usize {
        self.rule.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_delta_at_nodes() {
        for p in 1..=16 {
            let b = Lagrange1d::new(p);
            for (i, &x) in b.nodes.iter().enumerate() {
                let v = b.values(x);
                for (j, vj) in v.iter().enumerate() {
                    assert_eq!(*vj, if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_derivative_sum() {
        for p in 1..=16 {
            let b = Lagrange1d::new(p);
            for &x in &[-0.93, -0.31, 0.017, 0.5, 0.99] {
                let s: f64 = b.values(x).iter().sum();
                let ds: f64 = b.derivatives(x).iter().sum();
                let d2s: f64 = b.second_derivatives(x).iter().sum();
                assert!((s - 1.0).abs() < 1e-13, "p={p}");
                assert!(ds.abs() < 1e-9, "p={p} ds={ds}");
                assert!(d2s.abs() < 1e-6, "p={p} d2s={d2s}");
            }
        }
    }

    #[test]
    fn reproduces_polynomial_derivatives() {
        let b = Lagrange1d::new(6);
        let f = |x: f64| x.powi(5) - 2.0 * x * x;
        let nodal: Vec<f64> = b.nodes.iter().map(|&x| f(x)).collect();
        let x = 0.37;
        let d: f64 = b
            .derivatives(x)
            .iter()
            .zip(&nodal)
            .map(|(a, c)| a * c)
            .sum();
        let d2: f64 = b
            .second_derivatives(x)
            .iter()
            .zip(&nodal)
            .map(|(a, c)| a * c)
            .sum();
        assert!((d - (5.0 * x.powi(4) - 4.0 * x)).abs() < 1e-12);
        assert!((d2 - (20.0 * x.powi(3) - 4.0)).abs() < 1e-11);
    }

    #[test]
    fn reference_matrices_integrate_exactly() {
        let t = Tabulated1d::new(BasisSpec::new(4));
        let total: f64 = t.mass.iter().flatten().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let s: f64 = t.stiff.iter().flatten().sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn rejects_underintegration() {
        assert!(BasisSpec::with_quadrature(4, 4).validate().is_err());
        assert!(BasisSpec::with_quadrature(0, 4).validate().is_err());
        assert!(BasisSpec::new(8).validate().is_ok());
    }
}
