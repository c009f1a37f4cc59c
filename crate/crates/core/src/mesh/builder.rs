use std::collections::HashMap;

use super::{det, face_corners, ArcBlend, Element, Facet, Mapping, Mesh, Region};
use crate::geometry::BcMap;

const QUANTUM: f64 = 1e-10;

/// Incremental mesh construction with coordinate-based node merging.
#[derive(Debug, Clone)]
pub struct MeshBuilder {
    dim: usize,
    nodes: Vec<[f64; 3]>,
    lookup: HashMap<[i64; 3], usize>,
    elements: Vec<Element>,
}

impl MeshBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            nodes: Vec::new(),
            lookup: HashMap::new(),
            elements: Vec::new(),
        }
    }

    /// Id of the node at `x`, creating it if needed.
    pub fn node(&mut self, mut x: [f64; 3]) -> usize {
        // trigonometric round-off off the axes
        for v in x.iter_mut() {
            if v.abs() < 1e-14 {
                *v = 0.0;
            }
        }
        let key = [
            (x[0] / QUANTUM).round() as i64,
            (x[1] / QUANTUM).round() as i64,
            (x[2] / QUANTUM).round() as i64,
        ];
        if let Some(&id) = self.lookup.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(x);
        self.lookup.insert(key, id);
        id
    }

    pub fn node2(&mut self, x: f64, y: f64) -> usize {
        self.node([x, y, 0.0])
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Interval `[a, b]`.
    pub fn segment(&mut self, a: f64, b: f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let v = vec![self.node([lo, 0.0, 0.0]), self.node([hi, 0.0, 0.0])];
        self.elements.push(Element {
            vertices: v,
            mapping: Mapping::Affine,
            region: None,
        });
    }

    /// Straight-sided quadrilateral from corners in tensor order; orientation is fixed up.
    pub fn quad(&mut self, corners: [[f64; 2]; 4], region: Option<Region>) {
        let [a, b, c, d] = corners;
        // signed area of the bilinear map at the element center
        let jx = [
            0.5 * ((b[0] - a[0]) + (d[0] - c[0])),
            0.5 * ((b[1] - a[1]) + (d[1] - c[1])),
        ];
        let jy = [
            0.5 * ((c[0] - a[0]) + (d[0] - b[0])),
            0.5 * ((c[1] - a[1]) + (d[1] - b[1])),
        ];
        let corners = if jx[0] * jy[1] - jx[1] * jy[0] < 0.0 {
            [b, a, d, c]
        } else {
            corners
        };
        let v: Vec<usize> = corners.iter().map(|p| self.node2(p[0], p[1])).collect();
        let aligned = corners[0][1] == corners[1][1]
            && corners[2][1] == corners[3][1]
            && corners[0][0] == corners[2][0]
            && corners[1][0] == corners[3][0];
        let mapping = if aligned {
            Mapping::Affine
        } else {
            Mapping::Multilinear
        };
        self.elements.push(Element {
            vertices: v,
            mapping,
            region,
        });
    }

    /// Axis-aligned rectangle `[x0,x1] x [y0,y1]`.
    pub fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, region: Option<Region>) {
        self.quad([[x0, y0], [x1, y0], [x0, y1], [x1, y1]], region);
    }

    /// Arc blend quadrilateral; orientation is fixed up.
    pub fn arc_quad(&mut self, blend: ArcBlend, region: Option<Region>) {
        let j = blend.jacobian(0.0, 0.0);
        let blend = if j[0][0] * j[1][1] - j[0][1] * j[1][0] < 0.0 {
            blend.reversed()
        } else {
            blend
        };
        let corners = [
            blend.map(-1.0, -1.0),
            blend.map(1.0, -1.0),
            blend.map(-1.0, 1.0),
            blend.map(1.0, 1.0),
        ];
        let v: Vec<usize> = corners.iter().map(|p| self.node2(p[0], p[1])).collect();
        self.elements.push(Element {
            vertices: v,
            mapping: Mapping::Arc(blend),
            region,
        });
    }

    /// Axis-aligned box from lower and upper corners.
    pub fn hex(&mut self, lo: [f64; 3], hi: [f64; 3]) {
        let mut v = Vec::with_capacity(8);
        for c in 0..8 {
            let mut p = [0.0; 3];
            for d in 0..3 {
                p[d] = if (c >> d) & 1 == 1 { hi[d] } else { lo[d] };
            }
            v.push(self.node(p));
        }
        self.elements.push(Element {
            vertices: v,
            mapping: Mapping::Affine,
            region: None,
        });
    }

    /// Finalizes the mesh; every boundary facet is tagged by `classify`, which
    /// receives the physical facet center.
    pub fn finish(self, bc: BcMap, classify: impl Fn([f64; 3]) -> String) -> Mesh {
        let mut mesh = Mesh {
            dim: self.dim,
            nodes: self.nodes,
            elements: self.elements,
            facets: Vec::new(),
            bc,
        };
        let faces = mesh.face_index();
        let mut boundary: Vec<(usize, usize, usize)> = faces
            .values()
            .filter(|o| o.len() == 1)
            .map(|o| o[0])
            .collect();
        boundary.sort_unstable();
        for (e, axis, side) in boundary {
            let el = &mesh.elements[e];
            let nodes: Vec<usize> = face_corners(mesh.dim, axis, side)
                .into_iter()
                .map(|c| el.vertices[c])
                .collect();
            let mut xi = [0.0; 3];
            xi[axis] = if side == 1 { 1.0 } else { -1.0 };
            let center = mesh.map_point(e, &xi[..mesh.dim]);
            mesh.facets.push(Facet {
                nodes,
                tag: classify(center),
            });
        }
        debug_assert!((0..mesh.n_elements()).all(|e| {
            let xi = [0.0; 3];
            det(&mesh.jacobian(e, &xi[..mesh.dim]), mesh.dim) > 0.0
        }));
        mesh
    }
}
