//! Integrals over tagged boundary facets of traces of finite element functions.

use serde::{Deserialize, Serialize};

use super::eval::FeFunction;
use super::space::split_index;
use crate::error::{Error, Result};
use crate::mesh::inverse;
use crate::quadrature::gauss_legendre;

/// Integrand of a boundary integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trace {
    /// `|grad_tau v|^2`
    TangentialGradSq,
    /// `|v|^2`
    ValueSq,
    /// `v * d_n^2 v`; axis-aligned elements only.
    ValueNormalSecond,
}

/// Integral of `integrand` over all facets tagged `tag`, `n` Gauss points per direction.
pub fn boundary_integral(fe: &FeFunction, tag: &str, integrand: Trace, n: usize) -> Result<f64> {
    let mesh = fe.mesh;
    if !mesh.has_tag(tag) {
        return Err(Error::UnknownTag(tag.into()));
    }
    let dim = mesh.dim;
    let faces = mesh.face_index();
    let rule = gauss_legendre(n);
    let nf = n.pow(dim as u32 - 1);
    let mut total = 0.0;
    for facet in mesh.facets.iter().filter(|f| f.tag == tag) {
        let mut key = facet.nodes.clone();
        key.sort_unstable();
        let &(e, axis, side) = faces
            .get(&key)
            .and_then(|o| o.first())
            .ok_or_else(|| Error::InvalidGeometry("facet is not an element face".into()))?;
        let others: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
        for q in 0..nf {
            let idx = split_index(q, n, dim - 1);
            let mut xi = [0.0; 3];
            xi[axis] = if side == 1 { 1.0 } else { -1.0 };
            let mut w = 1.0;
            for (k, &d) in others.iter().enumerate() {
                xi[d] = rule.points[idx[k]];
                w *= rule.weights[idx[k]];
            }
            let j = mesh.jacobian(e, &xi[..dim]);
            let col = |c: usize| [j[0][c], j[1][c], j[2][c]];
            let ds = if dim == 2 {
                let t = col(others[0]);
                (t[0] * t[0] + t[1] * t[1]).sqrt()
            } else {
                let (a, b) = (col(others[0]), col(others[1]));
                let c = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
            };
            let pv = fe.at_reference(e, &xi[..dim]);
            let val = match integrand {
                Trace::ValueSq => pv.value * pv.value,
                Trace::TangentialGradSq => {
                    let inv = inverse(&j, dim);
                    let mut nrm = [0.0; 3];
                    for d in 0..dim {
                        nrm[d] = inv[axis][d];
                    }
                    let len = nrm.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let gn: f64 = (0..dim).map(|d| pv.grad[d] * nrm[d] / len).sum();
                    (0..dim)
                        .map(|d| (pv.grad[d] - gn * nrm[d] / len).powi(2))
                        .sum::<f64>()
                }
                Trace::ValueNormalSecond => {
                    pv.value * fe.second_derivative_aligned(e, &xi[..dim], axis)?
                }
            };
            total += w * ds * val;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Space;
    use crate::geometry::{BcKind, BcMap};
    use crate::mesh::simple::{rectangle, uniform_breaks};
    use std::f64::consts::PI;

    #[test]
    fn traces_of_known_functions() {
        let bc: BcMap = ["left", "right", "bottom", "top"]
            .iter()
            .map(|t| (t.to_string(), BcKind::Neumann))
            .collect();
        let m = rectangle(
            &uniform_breaks(0.0, 2.0, 2),
            &uniform_breaks(-1.0, 0.0, 3),
            bc,
        )
        .unwrap();
        let s = Space::new(&m, 12).unwrap();
        let zero = vec![0.0; s.n_dofs];
        let fe0 = FeFunction::new(&m, &s, &zero).unwrap();
        for t in [
            Trace::ValueSq,
            Trace::TangentialGradSq,
            Trace::ValueNormalSecond,
        ] {
            assert_eq!(boundary_integral(&fe0, "right", t, 14).unwrap(), 0.0);
        }
        // v = cosh(x) sin(pi y) on the right side x = 2
        let c: Vec<f64> = s
            .coords
            .iter()
            .map(|x| x[0].cosh() * (PI * x[1]).sin())
            .collect();
        let fe = FeFunction::new(&m, &s, &c).unwrap();
        let ch2 = 2f64.cosh().powi(2);
        let v2 = boundary_integral(&fe, "right", Trace::ValueSq, 14).unwrap();
        assert!((v2 - 0.5 * ch2).abs() < 1e-8);
        let t2 = boundary_integral(&fe, "right", Trace::TangentialGradSq, 14).unwrap();
        assert!((t2 - 0.5 * PI * PI * ch2).abs() < 1e-6);
        let vn = boundary_integral(&fe, "right", Trace::ValueNormalSecond, 14).unwrap();
        assert!((vn - 0.5 * ch2).abs() < 1e-6);
        assert!(matches!(
            boundary_integral(&fe, "nowhere", Trace::ValueSq, 4),
            Err(Error::UnknownTag(_))
        ));
    }
}
