//! Global numbering of tensor-product Lagrange degrees of freedom.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::BcKind;
use crate::mesh::Mesh;

use super::basis::Lagrange1d;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Entity {
    Vertex(usize),
    Edge(usize, usize, usize),
    Face([usize; 4], usize, usize),
}

/// Continuous degree-`p` Lagrange space on a conforming mesh.
#[derive(Debug, Clone)]
pub struct Space {
    pub dim: usize,
    pub degree: usize,
    pub n_dofs: usize,
    /// Global dof of every local node, local index `i + (p+1) j + (p+1)^2 k`.
    pub elem_dofs: Vec<Vec<usize>>,
    /// Physical position of every global dof.
    pub coords: Vec<[f64; 3]>,
    pub nodes_1d: Vec<f64>,
}

/// Splits a local index into per-direction indices.
pub fn split_index(local: usize, n1: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    let mut r = local;
    for v in idx.iter_mut().take(dim) {
        *v = r % n1;
        r /= n1;
    }
    idx
}

impl Space {
    pub fn new(mesh: &Mesh, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        let dim = mesh.dim;
        let p = degree;
        let n1 = p + 1;
        let nloc = n1.pow(dim as u32);
        let nodes_1d = Lagrange1d::new(p).nodes;
        let mut lookup: HashMap<Entity, usize> = HashMap::new();
        let mut coords = Vec::new();
        let mut elem_dofs = Vec::with_capacity(mesh.n_elements());
        for (e, el) in mesh.elements.iter().enumerate() {
            let mut dofs = Vec::with_capacity(nloc);
            for local in 0..nloc {
                let idx = split_index(local, n1, dim);
                let interior: Vec<usize> = (0..dim).filter(|&d| idx[d] > 0 && idx[d] < p).collect();
                let corner_of = |fixed: &[usize; 3], free_bits: &[(usize, usize)]| -> usize {
                    // corner with the given end bits on the free axes
                    let mut c = 0;
                    for d in 0..dim {
                        let bit = match free_bits.iter().find(|(a, _)| *a == d) {
                            Some(&(_, b)) => b,
                            None => usize::from(fixed[d] == p),
                        };
                        c |= bit << d;
                    }
                    el.vertices[c]
                };
                let key = match interior.len() {
                    0 => Some(Entity::Vertex(corner_of(&idx, &[]))),
                    n if n == dim => None,
                    1 => {
                        let a = interior[0];
                        let v0 = corner_of(&idx, &[(a, 0)]);
                        let v1 = corner_of(&idx, &[(a, 1)]);
                        let t = idx[a];
                        Some(if v0 < v1 {
                            Entity::Edge(v0, v1, t)
                        } else {
                            Entity::Edge(v1, v0, p - t)
                        })
                    }
                    _ => {
                        let (a, b) = (interior[0], interior[1]);
                        let c = [
                            corner_of(&idx, &[(a, 0), (b, 0)]),
                            corner_of(&idx, &[(a, 1), (b, 0)]),
                            corner_of(&idx, &[(a, 0), (b, 1)]),
                            corner_of(&idx, &[(a, 1), (b, 1)]),
                        ];
                        let (o, _) = c.iter().enumerate().min_by_key(|(_, &v)| v).unwrap();
                        let (ua, ub) = (o & 1, o >> 1);
                        let s = if ua == 0 { idx[a] } else { p - idx[a] };
                        let t = if ub == 0 { idx[b] } else { p - idx[b] };
                        let along_a = c[o ^ 1];
                        let along_b = c[o ^ 2];
                        let mut sorted = c;
                        sorted.sort_unstable();
                        Some(if along_a < along_b {
                            Entity::Face(sorted, s, t)
                        } else {
                            Entity::Face(sorted, t, s)
                        })
                    }
                };
                let dof = match key {
                    Some(k) => match lookup.get(&k) {
                        Some(&d) => d,
                        None => {
                            let d = coords.len();
                            lookup.insert(k, d);
                            coords.push(Self::node_position(mesh, e, &idx, &nodes_1d));
                            d
                        }
                    },
                    None => {
                        let d = coords.len();
                        coords.push(Self::node_position(mesh, e, &idx, &nodes_1d));
                        d
                    }
                };
                dofs.push(dof);
            }
            elem_dofs.push(dofs);
        }
        Ok(Self {
            dim,
            degree,
            n_dofs: coords.len(),
            elem_dofs,
            coords,
            nodes_1d,
        })
    }

    fn node_position(mesh: &Mesh, e: usize, idx: &[usize; 3], nodes: &[f64]) -> [f64; 3] {
        let xi: Vec<f64> = (0..mesh.dim).map(|d| nodes[idx[d]]).collect();
        mesh.map_point(e, &xi)
    }

    pub fn n_local(&self) -> usize {
        (self.degree + 1).pow(self.dim as u32)
    }

    /// Local indices on face `(axis, side)` in the face's tensor order.
    pub fn face_local(&self, axis: usize, side: usize) -> Vec<usize> {
        let n1 = self.degree + 1;
        (0..self.n_local())
            .filter(|&l| split_index(l, n1, self.dim)[axis] == side * self.degree)
            .collect()
    }

    /// Mask of dofs lying on facets whose tag maps to Dirichlet.
    pub fn dirichlet_mask(&self, mesh: &Mesh) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n_dofs];
        let faces = mesh.face_index();
        for f in &mesh.facets {
            if mesh.bc_of(&f.tag)? != BcKind::Dirichlet {
                continue;
            }
            for l in self.facet_dofs(mesh, &faces, &f.nodes)? {
                mask[l] = true;
            }
        }
        Ok(mask)
    }

    /// Mask of dofs on facets carrying `tag`.
    pub fn tag_mask(&self, mesh: &Mesh, tag: &str) -> Result<Vec<bool>> {
        if !mesh.has_tag(tag) {
            return Err(Error::UnknownTag(tag.into()));
        }
        let mut mask = vec![false; self.n_dofs];
        let faces = mesh.face_index();
        for f in mesh.facets.iter().filter(|f| f.tag == tag) {
            for l in self.facet_dofs(mesh, &faces, &f.nodes)? {
                mask[l] = true;
            }
        }
        Ok(mask)
    }

    fn facet_dofs(
        &self,
        _mesh: &Mesh,
        faces: &HashMap<Vec<usize>, Vec<(usize, usize, usize)>>,
        nodes: &[usize],
    ) -> Result<Vec<usize>> {
        let mut key = nodes.to_vec();
        key.sort_unstable();
        let owners = faces.get(&key).ok_or_else(|| {
            Error::InvalidGeometry(format!("facet {nodes:?} is not an element face"))
        })?;
        let (e, axis, side) = owners[0];
        Ok(self
            .face_local(axis, side)
            .into_iter()
            .map(|l| self.elem_dofs[e][l])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Geometry2D, Geometry3D, GradingSpec, Truncation};
    use crate::mesh::guide::build_guide_mesh;
    use crate::mesh::layer::build_layer_grid;

    fn check_coords_consistent(mesh: &Mesh, space: &Space) {
        // every local node maps to the coordinates recorded for its global dof
        let n1 = space.degree + 1;
        for (e, dofs) in space.elem_dofs.iter().enumerate() {
            for (l, &g) in dofs.iter().enumerate() {
                let idx = split_index(l, n1, space.dim);
                let xi: Vec<f64> = (0..space.dim).map(|d| space.nodes_1d[idx[d]]).collect();
                let x = mesh.map_point(e, &xi);
                for k in 0..3 {
                    assert!((x[k] - space.coords[g][k]).abs() < 1e-12, "e={e} l={l}");
                }
            }
        }
    }

    #[test]
    fn guide_dofs_are_conforming() {
        let g = Geometry2D::rounded(2.0, Truncation::Mix);
        let m = build_guide_mesh(&g, &GradingSpec::new(2, 0.2), 1).unwrap();
        for p in [1, 3, 6] {
            let s = Space::new(&m, p).unwrap();
            check_coords_consistent(&m, &s);
        }
    }

    #[test]
    fn layer_dof_counts() {
        // (4N+1)^3 grid points minus those with all coordinates positive
        for (r, expect) in [(3.0, 36829usize), (4.0, 36829), (2.0, 20293)] {
            let g = Geometry3D::fichera(r, 1, Truncation::Dir);
            let m = build_layer_grid(&g).unwrap();
            let s = Space::new(&m, 4).unwrap();
            assert_eq!(s.n_dofs, expect, "R={r}");
            check_coords_consistent(&m, &s);
        }
    }

    #[test]
    fn broken_guide_dof_count() {
        let g = Geometry2D::broken(1.0, Truncation::Mix);
        let m = build_guide_mesh(&g, &GradingSpec::new(0, 0.1), 1).unwrap();
        let s = Space::new(&m, 2).unwrap();
        // three Q2 squares in an L: 5x3 + 3x2 grid points minus overlaps
        assert_eq!(s.n_dofs, 21);
    }
}
