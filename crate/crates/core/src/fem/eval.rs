//! Pointwise evaluation and integration of finite element functions.

use super::basis::Lagrange1d;
use super::space::{split_index, Space};
use crate::error::{Error, Result};
use crate::mesh::{det, inverse, Mesh};
use crate::quadrature::{gauss_legendre, Rule};

/// A finite element function given by its values on all dofs.
#[derive(Debug, Clone)]
pub struct FeFunction<'a> {
    pub mesh: &'a Mesh,
    pub space: &'a Space,
    pub coeffs: &'a [f64],
    basis: Lagrange1d,
}

/// Value and physical gradient of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub grad: [f64; 3],
}

impl<'a> FeFunction<'a> {
    pub fn new(mesh: &'a Mesh, space: &'a Space, coeffs: &'a [f64]) -> Result<Self> {
        if coeffs.len() != space.n_dofs {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                space.n_dofs,
                coeffs.len()
            )));
        }
        Ok(Self {
            mesh,
            space,
            coeffs,
            basis: Lagrange1d::new(space.degree),
        })
    }

    /// Value and gradient at reference point `xi` of element `e`.
    pub fn at_reference(&self, e: usize, xi: &[f64]) -> PointValue {
        let dim = self.mesh.dim;
        let n1 = self.space.degree + 1;
        let vals: Vec<Vec<f64>> = (0..dim).map(|d| self.basis.values(xi[d])).collect();
        let ders: Vec<Vec<f64>> = (0..dim).map(|d| self.basis.derivatives(xi[d])).collect();
        let mut value = 0.0;
        let mut gref = [0.0; 3];
        for (l, &g) in self.space.elem_dofs[e].iter().enumerate() {
            let c = self.coeffs[g];
            if c == 0.0 {
                continue;
            }
            let idx = split_index(l, n1, dim);
            let mut v = c;
            for d in 0..dim {
                v *= vals[d][idx[d]];
            }
            value += v;
            for (a, ga) in gref.iter_mut().enumerate().take(dim) {
                let mut t = c;
                for d in 0..dim {
                    t *= if d == a {
                        ders[d][idx[d]]
                    } else {
                        vals[d][idx[d]]
                    };
                }
                *ga += t;
            }
        }
        let inv = inverse(&self.mesh.jacobian(e, xi), dim);
        let mut grad = [0.0; 3];
        for (d, gd) in grad.iter_mut().enumerate().take(dim) {
            for a in 0..dim {
                *gd += inv[a][d] * gref[a];
            }
        }
        PointValue { value, grad }
    }

    /// Value and gradient at a physical point.
    pub fn at(&self, x: [f64; 3]) -> Result<PointValue> {
        let (e, xi) = locate(self.mesh, x)?;
        Ok(self.at_reference(e, &xi[..self.mesh.dim]))
    }

    /// Second reference derivative along `axis` at `xi`, divided by the squared
    /// half length; exact second normal derivative on axis-aligned elements.
    pub fn second_derivative_aligned(&self, e: usize, xi: &[f64], axis: usize) -> Result<f64> {
        if !self.mesh.is_axis_aligned(e) {
            return Err(Error::InvalidArgument(format!(
                "element {e} is not axis aligned"
            )));
        }
        let dim = self.mesh.dim;
        let n1 = self.space.degree + 1;
        let h = self.mesh.half_lengths(e);
        let tabs: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                if d == axis {
                    self.basis.second_derivatives(xi[d])
                } else {
                    self.basis.values(xi[d])
                }
            })
            .collect();
        let mut s = 0.0;
        for (l, &g) in self.space.elem_dofs[e].iter().enumerate() {
            let idx = split_index(l, n1, dim);
            let mut t = self.coeffs[g];
            for d in 0..dim {
                t *= tabs[d][idx[d]];
            }
            s += t;
        }
        Ok(s / (h[axis] * h[axis]))
    }
}

/// Element containing `x` and the reference coordinates of `x` in it.
pub fn locate(mesh: &Mesh, x: [f64; 3]) -> Result<(usize, [f64; 3])> {
    let dim = mesh.dim;
    let tol = 1e-10;
    for e in 0..mesh.n_elements() {
        let vs = &mesh.elements[e].vertices;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &v in vs {
            for d in 0..dim {
                lo[d] = lo[d].min(mesh.nodes[v][d]);
                hi[d] = hi[d].max(mesh.nodes[v][d]);
            }
        }
        // arc elements bulge past their corners
        let pad = if mesh.elements[e].mapping.code() == 2 {
            0.25 * mesh.element_diameter(e)
        } else {
            tol
        };
        if (0..dim).any(|d| x[d] < lo[d] - pad || x[d] > hi[d] + pad) {
            continue;
        }
        if let Some(xi) = invert_map(mesh, e, x) {
            if xi[..dim].iter().all(|v| v.abs() <= 1.0 + 1e-9) {
                let mut c = xi;
                for v in c.iter_mut().take(dim) {
                    *v = v.clamp(-1.0, 1.0);
                }
                return Ok((e, c));
            }
        }
    }
    Err(Error::InvalidArgument(format!(
        "point {x:?} lies outside the mesh"
    )))
}

/// Newton inversion of the element map.
pub fn invert_map(mesh: &Mesh, e: usize, x: [f64; 3]) -> Option<[f64; 3]> {
    let dim = mesh.dim;
    let mut xi = [0.0; 3];
    let scale = mesh.element_diameter(e).max(1e-300);
    for _ in 0..50 {
        let y = mesh.map_point(e, &xi[..dim]);
        let r: Vec<f64> = (0..dim).map(|d| x[d] - y[d]).collect();
        let err = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if err <= 1e-14 * scale.max(1.0) {
            return Some(xi);
        }
        let j = mesh.jacobian(e, &xi[..dim]);
        if det(&j, dim).abs() < 1e-300 {
            return None;
        }
        let inv = inverse(&j, dim);
        for a in 0..dim {
            let mut s = 0.0;
            for d in 0..dim {
                s += inv[a][d] * r[d];
            }
            xi[a] += s;
        }
        if xi[..dim].iter().any(|v| v.abs() > 3.0) {
            return None;
        }
    }
    let y = mesh.map_point(e, &xi[..dim]);
    let err = (0..dim).map(|d| (x[d] - y[d]).abs()).fold(0.0, f64::max);
    (err <= 1e-10 * scale.max(1.0)).then_some(xi)
}

/// Tensor Gauss integral over the mesh of `f(element, x)`.
pub fn integrate_mesh(mesh: &Mesh, n: usize, f: impl Fn(usize, &[f64], [f64; 3]) -> f64) -> f64 {
    let dim = mesh.dim;
    let rule = gauss_legendre(n);
    let nq = n.pow(dim as u32);
    let mut total = 0.0;
    for e in 0..mesh.n_elements() {
        let mut s = 0.0;
        for q in 0..nq {
            let idx = split_index(q, n, dim);
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            for d in 0..dim {
                xi[d] = rule.points[idx[d]];
                w *= rule.weights[idx[d]];
            }
            let jd = det(&mesh.jacobian(e, &xi[..dim]), dim);
            s += w * jd * f(e, &xi[..dim], mesh.map_point(e, &xi[..dim]));
        }
        total += s;
    }
    total
}

/// Gauss points along the segment `a -> b`, split at element crossings with `n`
/// points per piece: `(weight, point, value)`.
pub fn line_samples(
    fe: &FeFunction,
    a: [f64; 3],
    b: [f64; 3],
    n: usize,
) -> Result<Vec<(f64, [f64; 3], PointValue)>> {
    let mesh = fe.mesh;
    let dim = mesh.dim;
    let len = (0..3).map(|d| (b[d] - a[d]).powi(2)).sum::<f64>().sqrt();
    let mut cuts = vec![0.0, 1.0];
    for el in &mesh.elements {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &v in &el.vertices {
            for d in 0..dim {
                lo[d] = lo[d].min(mesh.nodes[v][d]);
                hi[d] = hi[d].max(mesh.nodes[v][d]);
            }
        }
        for d in 0..dim {
            let dir = b[d] - a[d];
            if dir.abs() > 1e-14 {
                for bound in [lo[d], hi[d]] {
                    let t = (bound - a[d]) / dir;
                    if t > 0.0 && t < 1.0 {
                        cuts.push(t);
                    }
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    let rule: Rule = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * cuts.len());
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let half = 0.5 * (t1 - t0);
        for (p, wt) in rule.points.iter().zip(&rule.weights) {
            let t = t0 + half * (p + 1.0);
            let x = [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ];
            out.push((wt * half * len, x, fe.at(x)?));
        }
    }
    Ok(out)
}

/// Integral of `f(point value, x)` along the segment `a -> b`.
pub fn line_integral(
    fe: &FeFunction,
    a: [f64; 3],
    b: [f64; 3],
    n: usize,
    f: impl Fn(&PointValue, [f64; 3]) -> f64,
) -> Result<f64> {
    Ok(line_samples(fe, a, b, n)?
        .iter()
        .map(|(w, x, pv)| w * f(pv, *x))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BcKind, BcMap, Geometry2D, GradingSpec, Truncation};
    use crate::mesh::guide::build_guide_mesh_with_arc;
    use crate::mesh::simple::{rectangle, uniform_breaks};

    fn neumann_rect() -> Mesh {
        let bc: BcMap = ["left", "right", "bottom", "top"]
            .iter()
            .map(|t| (t.to_string(), BcKind::Neumann))
            .collect();
        rectangle(
            &uniform_breaks(0.0, 2.0, 3),
            &uniform_breaks(-1.0, 0.0, 2),
            bc,
        )
        .unwrap()
    }

    #[test]
    fn interpolated_polynomial_is_reproduced() {
        let m = neumann_rect();
        let s = Space::new(&m, 3).unwrap();
        let f = |x: &[f64; 3]| x[0].powi(3) - 2.0 * x[0] * x[1] + x[1] * x[1];
        let c: Vec<f64> = s.coords.iter().map(f).collect();
        let fe = FeFunction::new(&m, &s, &c).unwrap();
        let x = [1.234, -0.321, 0.0];
        let pv = fe.at(x).unwrap();
        assert!((pv.value - f(&x)).abs() < 1e-12);
        assert!((pv.grad[0] - (3.0 * x[0] * x[0] - 2.0 * x[1])).abs() < 1e-11);
        assert!((pv.grad[1] - (-2.0 * x[0] + 2.0 * x[1])).abs() < 1e-11);
        let li = line_integral(&fe, [0.0, -0.5, 0.0], [2.0, -0.5, 0.0], 6, |p, _| p.value).unwrap();
        // integral of x^3 + x + 1/4 over (0, 2)
        assert!((li - (4.0 + 2.0 + 0.5)).abs() < 1e-11);
    }

    #[test]
    fn locate_on_curved_mesh() {
        let g = Geometry2D::rounded(1.0, Truncation::Mix);
        let m = build_guide_mesh_with_arc(&g, &GradingSpec::new(2, 0.2), 1, 8).unwrap();
        for x in [
            [-0.5, -0.5, 0.0],
            [-0.7, -0.1, 0.0],
            [0.5, -0.5, 0.0],
            [-0.3, 0.9, 0.0],
        ] {
            let (e, xi) = locate(&m, x).unwrap();
            let y = m.map_point(e, &xi[..2]);
            assert!((y[0] - x[0]).abs() < 1e-10 && (y[1] - x[1]).abs() < 1e-10);
        }
        assert!(locate(&m, [-0.9, -0.9, 0.0]).is_err());
        let area = integrate_mesh(&m, 6, |_, _, _| 1.0);
        assert!((area - g.area()).abs() < 1e-9);
    }
}
