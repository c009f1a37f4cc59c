//! Quadrilateral and hexahedral meshes with tagged boundary facets.
//!
//! Element corners are stored in tensor order: corner `c` sits at reference
//! coordinate `xi_d = -1` if bit `d` of `c` is clear and `+1` otherwise.

mod builder;
pub mod guide;
pub mod layer;
pub mod simple;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BcKind, BcMap};
use crate::quadrature::gauss_legendre;

pub use builder::MeshBuilder;

/// Transfinite blend between a straight segment and a circular arc.
///
/// With `s = (xi+1)/2` and `t = t0 + (eta+1)/2 (t1-t0)` the map is
/// `(1-t)(p0 + s(p1-p0)) + t(center + radius e(theta0 + s(theta1-theta0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcBlend {
    pub p0: [f64; 2],
    pub p1: [f64; 2],
    pub center: [f64; 2],
    pub radius: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl ArcBlend {
    fn eval(&self, s: f64, t: f64) -> [f64; 2] {
        let th = self.theta0 + s * (self.theta1 - self.theta0);
        let lin = [
            self.p0[0] + s * (self.p1[0] - self.p0[0]),
            self.p0[1] + s * (self.p1[1] - self.p0[1]),
        ];
        let arc = [
            self.center[0] + self.radius * th.cos(),
            self.center[1] + self.radius * th.sin(),
        ];
        [
            (1.0 - t) * lin[0] + t * arc[0],
            (1.0 - t) * lin[1] + t * arc[1],
        ]
    }

    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        let s = 0.5 * (xi + 1.0);
        let t = self.t0 + 0.5 * (eta + 1.0) * (self.t1 - self.t0);
        self.eval(s, t)
    }

    /// Columns d x / d xi and d x / d eta.
    pub fn jacobian(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        let s = 0.5 * (xi + 1.0);
        let t = self.t0 + 0.5 * (eta + 1.0) * (self.t1 - self.t0);
        let dth = self.theta1 - self.theta0;
        let th = self.theta0 + s * dth;
        let ds = [
            (1.0 - t) * (self.p1[0] - self.p0[0]) - t * self.radius * dth * th.sin(),
            (1.0 - t) * (self.p1[1] - self.p0[1]) + t * self.radius * dth * th.cos(),
        ];
        let lin = [
            self.p0[0] + s * (self.p1[0] - self.p0[0]),
            self.p0[1] + s * (self.p1[1] - self.p0[1]),
        ];
        let dt = [
            self.center[0] + self.radius * th.cos() - lin[0],
            self.center[1] + self.radius * th.sin() - lin[1],
        ];
        let hs = 0.5;
        let ht = 0.5 * (self.t1 - self.t0);
        [[hs * ds[0], ht * dt[0]], [hs * ds[1], ht * dt[1]]]
    }

    /// The same blend traversed with `s` reversed.
    pub fn reversed(&self) -> Self {
        Self {
            p0: self.p1,
            p1: self.p0,
            theta0: self.theta1,
            theta1: self.theta0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mapping {
    /// Axis-aligned interval, rectangle or box.
    Affine,
    /// Bilinear quadrilateral or trilinear hexahedron.
    Multilinear,
    /// Polar-isoparametric blend touching a circular arc.
    Arc(ArcBlend),
}

impl Mapping {
    pub fn code(&self) -> u8 {
        match self {
            Mapping::Affine => 0,
            Mapping::Multilinear => 1,
            Mapping::Arc(_) => 2,
        }
    }
}

/// Sub-domain labels of the reference guide used by the weighted form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// The corner square.
    Corner,
    /// The horizontal arm `x1 > 0`.
    Arm1,
    /// The vertical arm `x2 > 0`.
    Arm2,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Corner => "gamma0",
            Region::Arm1 => "t1",
            Region::Arm2 => "t2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub vertices: Vec<usize>,
    pub mapping: Mapping,
    pub region: Option<Region>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Corner node ids in the tensor order of the facet.
    pub nodes: Vec<usize>,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<Element>,
    pub facets: Vec<Facet>,
    pub bc: BcMap,
}

/// Local corner indices of face `(axis, side)` of a `dim`-cube, in tensor order.
pub fn face_corners(dim: usize, axis: usize, side: usize) -> Vec<usize> {
    (0..1usize << dim)
        .filter(|c| (c >> axis) & 1 == side)
        .collect()
}

fn sorted_key(ids: &[usize]) -> Vec<usize> {
    let mut k = ids.to_vec();
    k.sort_unstable();
    k
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn bc_of(&self, tag: &str) -> Result<BcKind> {
        self.bc
            .get(tag)
            .copied()
            .ok_or_else(|| Error::UnknownTag(tag.to_string()))
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.facets.iter().any(|f| f.tag == tag)
    }

    /// Reference-to-physical map of element `e`.
    pub fn map_point(&self, e: usize, xi: &[f64]) -> [f64; 3] {
        let el = &self.elements[e];
        if let Mapping::Arc(a) = &el.mapping {
            let p = a.map(xi[0], xi[1]);
            return [p[0], p[1], 0.0];
        }
        let mut x = [0.0; 3];
        for (c, &v) in el.vertices.iter().enumerate() {
            let mut w = 1.0;
            for (d, &xd) in xi.iter().enumerate().take(self.dim) {
                w *= if (c >> d) & 1 == 1 {
                    0.5 * (1.0 + xd)
                } else {
                    0.5 * (1.0 - xd)
                };
            }
            for k in 0..3 {
                x[k] += w * self.nodes[v][k];
            }
        }
        x
    }

    /// Jacobian `J[i][j] = d x_i / d xi_j` of element `e`.
    pub fn jacobian(&self, e: usize, xi: &[f64]) -> [[f64; 3]; 3] {
        let el = &self.elements[e];
        let mut jac = [[0.0; 3]; 3];
        if let Mapping::Arc(a) = &el.mapping {
            let j = a.jacobian(xi[0], xi[1]);
            for i in 0..2 {
                for k in 0..2 {
                    jac[i][k] = j[i][k];
                }
            }
            return jac;
        }
        let dim = self.dim;
        for (c, &v) in el.vertices.iter().enumerate() {
            for j in 0..dim {
                let mut w = 1.0;
                for (d, &xd) in xi.iter().enumerate().take(dim) {
                    let up = (c >> d) & 1 == 1;
                    w *= if d == j {
                        if up {
                            0.5
                        } else {
                            -0.5
                        }
                    } else if up {
                        0.5 * (1.0 + xd)
                    } else {
                        0.5 * (1.0 - xd)
                    };
                }
                for i in 0..dim {
                    jac[i][j] += w * self.nodes[v][i];
                }
            }
        }
        jac
    }

    /// Half edge lengths of an affine (axis-aligned) element.
    pub fn half_lengths(&self, e: usize) -> [f64; 3] {
        let el = &self.elements[e];
        let v0 = self.nodes[el.vertices[0]];
        let mut h = [1.0; 3];
        for (d, hd) in h.iter_mut().enumerate().take(self.dim) {
            let v1 = self.nodes[el.vertices[1 << d]];
            *hd = 0.5 * (v1[d] - v0[d]);
        }
        h
    }

    /// Whether element `e` is an axis-aligned box with positive orientation.
    pub fn is_axis_aligned(&self, e: usize) -> bool {
        let el = &self.elements[e];
        if matches!(el.mapping, Mapping::Arc(_)) {
            return false;
        }
        let v0 = self.nodes[el.vertices[0]];
        for (c, &v) in el.vertices.iter().enumerate() {
            for d in 0..self.dim {
                let hi = self.nodes[el.vertices[1 << d]][d];
                let expect = if (c >> d) & 1 == 1 { hi } else { v0[d] };
                if self.nodes[v][d] != expect {
                    return false;
                }
            }
        }
        (0..self.dim).all(|d| self.nodes[el.vertices[1 << d]][d] > v0[d])
    }

    /// Measure of element `e` by tensor Gauss quadrature with `n` points per direction.
    pub fn element_measure(&self, e: usize, n: usize) -> f64 {
        let rule = gauss_legendre(n);
        let mut acc = 0.0;
        let dim = self.dim;
        let total = n.pow(dim as u32);
        for q in 0..total {
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            let mut r = q;
            for x in xi.iter_mut().take(dim) {
                let i = r % n;
                r /= n;
                *x = rule.points[i];
                w *= rule.weights[i];
            }
            acc += w * det(&self.jacobian(e, &xi[..dim]), dim);
        }
        acc
    }

    pub fn measure(&self, n: usize) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_measure(e, n))
            .sum()
    }

    pub fn region_measure(&self, region: Region, n: usize) -> f64 {
        (0..self.n_elements())
            .filter(|&e| self.elements[e].region == Some(region))
            .map(|e| self.element_measure(e, n))
            .sum()
    }

    /// Element diameter as the largest corner-to-corner distance.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let vs = &self.elements[e].vertices;
        let mut d: f64 = 0.0;
        for &a in vs {
            for &b in vs {
                let pa = self.nodes[a];
                let pb = self.nodes[b];
                let s = (0..3).map(|k| (pa[k] - pb[k]).powi(2)).sum::<f64>();
                d = d.max(s.sqrt());
            }
        }
        d
    }

    /// Map from sorted facet corner ids to `(element, axis, side)` for every element face.
    pub fn face_index(&self) -> HashMap<Vec<usize>, Vec<(usize, usize, usize)>> {
        let mut map: HashMap<Vec<usize>, Vec<(usize, usize, usize)>> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for axis in 0..self.dim {
                for side in 0..2 {
                    let ids: Vec<usize> = face_corners(self.dim, axis, side)
                        .into_iter()
                        .map(|c| el.vertices[c])
                        .collect();
                    map.entry(sorted_key(&ids))
                        .or_default()
                        .push((e, axis, side));
                }
            }
        }
        map
    }

    /// Checks conformity: interior facets shared by exactly two elements, every
    /// boundary facet tagged exactly once and no tag on an interior facet.
    pub fn check_conforming(&self) -> Result<()> {
        let faces = self.face_index();
        let mut tagged: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in &self.facets {
            *tagged.entry(sorted_key(&f.nodes)).or_default() += 1;
        }
        for (key, owners) in &faces {
            let t = tagged.get(key).copied().unwrap_or(0);
            match owners.len() {
                1 if t == 1 => {}
                2 if t == 0 => {}
                n => {
                    return Err(Error::InvalidGeometry(format!(
                        "facet {key:?} has {n} owners and {t} tags"
                    )))
                }
            }
        }
        for key in tagged.keys() {
            if !faces.contains_key(key) {
                return Err(Error::InvalidGeometry(format!(
                    "tagged facet {key:?} is not an element face"
                )));
            }
        }
        for f in &self.facets {
            if !self.bc.contains_key(&f.tag) {
                return Err(Error::UnknownTag(f.tag.clone()));
            }
        }
        Ok(())
    }

    /// Copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Mesh {
        let mut m = self.clone();
        for p in &mut m.nodes {
            for x in p.iter_mut() {
                *x *= factor;
            }
        }
        for el in &mut m.elements {
            if let Mapping::Arc(a) = &mut el.mapping {
                for k in 0..2 {
                    a.p0[k] *= factor;
                    a.p1[k] *= factor;
                    a.center[k] *= factor;
                }
                a.radius *= factor;
            }
        }
        m
    }

    /// Copy with the positive half-axes stretched: `x_d -> stretch * x_d` where `x_d > 0`.
    ///
    /// Maps the reference guide onto the guide with arm length `stretch`.
    pub fn stretched_arms(&self, stretch: f64) -> Result<Mesh> {
        if self
            .elements
            .iter()
            .any(|e| matches!(e.mapping, Mapping::Arc(_)))
        {
            return Err(Error::InvalidGeometry(
                "arm stretching is only defined for straight-sided meshes".into(),
            ));
        }
        let mut m = self.clone();
        for p in &mut m.nodes {
            for x in p.iter_mut() {
                if *x > 0.0 {
                    *x *= stretch;
                }
            }
        }
        Ok(m)
    }

    /// Counts of boundary facets per tag.
    pub fn tag_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for f in &self.facets {
            *out.entry(f.tag.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Plain-text dump with 17 significant digits.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.dim,
            self.nodes.len(),
            self.elements.len(),
            self.facets.len()
        );
        for p in &self.nodes {
            let parts: Vec<String> = p[..self.dim].iter().map(|x| format!("{x:.16e}")).collect();
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        for el in &self.elements {
            let mut parts = vec![el.mapping.code().to_string()];
            parts.extend(el.vertices.iter().map(|v| v.to_string()));
            if let Mapping::Arc(a) = &el.mapping {
                for x in [
                    a.p0[0],
                    a.p0[1],
                    a.p1[0],
                    a.p1[1],
                    a.center[0],
                    a.center[1],
                    a.radius,
                    a.theta0,
                    a.theta1,
                    a.t0,
                    a.t1,
                ] {
                    parts.push(format!("{x:.16e}"));
                }
            }
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        for f in &self.facets {
            let mut parts = vec![f.tag.clone()];
            parts.extend(f.nodes.iter().map(|v| v.to_string()));
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        s
    }
}

/// Determinant of the leading `dim x dim` block.
pub fn det(j: &[[f64; 3]; 3], dim: usize) -> f64 {
    match dim {
        1 => j[0][0],
        2 => j[0][0] * j[1][1] - j[0][1] * j[1][0],
        _ => {
            j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
        }
    }
}

/// Inverse of the leading `dim x dim` block.
pub fn inverse(j: &[[f64; 3]; 3], dim: usize) -> [[f64; 3]; 3] {
    let d = det(j, dim);
    let mut inv = [[0.0; 3]; 3];
    match dim {
        1 => inv[0][0] = 1.0 / d,
        2 => {
            inv[0][0] = j[1][1] / d;
            inv[0][1] = -j[0][1] / d;
            inv[1][0] = -j[1][0] / d;
            inv[1][1] = j[0][0] / d;
        }
        _ => {
            for r in 0..3 {
                for c in 0..3 {
                    let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                    let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                    inv[r][c] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / d;
                }
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_corner_sets() {
        assert_eq!(face_corners(2, 0, 0), vec![0, 2]);
        assert_eq!(face_corners(2, 1, 1), vec![2, 3]);
        assert_eq!(face_corners(3, 2, 1), vec![4, 5, 6, 7]);
        assert_eq!(face_corners(1, 0, 1), vec![1]);
    }

    #[test]
    fn inverse_3d() {
        let j = [[2.0, 0.3, 0.1], [0.0, 1.5, -0.2], [0.4, 0.0, 1.0]];
        let inv = inverse(&j, 3);
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| j[r][k] * inv[k][c]).sum();
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn arc_blend_jacobian_matches_finite_differences() {
        let a = ArcBlend {
            p0: [-0.5, -0.25],
            p1: [-0.5, 0.0],
            center: [0.0, 0.0],
            radius: 1.0,
            theta0: std::f64::consts::PI * 1.125,
            theta1: std::f64::consts::PI,
            t0: 0.0,
            t1: 0.5,
        };
        let (xi, eta) = (0.3, -0.4);
        let j = a.jacobian(xi, eta);
        let h = 1e-6;
        for (k, (dx, de)) in [(h, 0.0), (0.0, h)].into_iter().enumerate() {
            let p = a.map(xi + dx, eta + de);
            let m = a.map(xi - dx, eta - de);
            for i in 0..2 {
                let fd = (p[i] - m[i]) / (2.0 * h);
                assert!((fd - j[i][k]).abs() < 1e-8);
            }
        }
    }
}
