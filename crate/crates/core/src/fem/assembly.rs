//! Element integration and global assembly of stiffness and mass pencils.

use std::collections::BTreeMap;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{BasisSpec, Tabulated1d};
use super::space::{split_index, Space};
use crate::error::{Error, Result};
use crate::mesh::{det, inverse, Mesh, Region};
use crate::sparse::{SymCsc, SymPattern};

/// Coefficients of the weighted form on one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionWeight {
    /// Factor on `|d_i u|^2` for each physical direction.
    pub grad: [f64; 3],
    pub mass: f64,
}

/// Region-wise anisotropic weights of the stiffness and mass forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub regions: BTreeMap<Region, RegionWeight>,
}

impl WeightSpec {
    /// Weights that pull back a region stretched by `s_d` along each axis:
    /// mass `prod s`, gradient factor `prod s / s_d^2`.
    pub fn from_stretch(stretch: &[(Region, [f64; 3])], dim: usize) -> Self {
        let regions = stretch
            .iter()
            .map(|&(r, s)| {
                let vol: f64 = s[..dim].iter().product();
                let mut grad = [0.0; 3];
                for d in 0..dim {
                    grad[d] = vol / (s[d] * s[d]);
                }
                (r, RegionWeight { grad, mass: vol })
            })
            .collect();
        Self { regions }
    }

    /// Weights turning the unit-arm reference guide into the guide with arms of length `r`.
    pub fn reference_guide(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "arm length must be positive, got {r}"
            )));
        }
        Ok(Self::from_stretch(
            &[
                (Region::Corner, [1.0, 1.0, 1.0]),
                (Region::Arm1, [r, 1.0, 1.0]),
                (Region::Arm2, [1.0, r, 1.0]),
            ],
            2,
        ))
    }

    pub fn all_positive(&self, dim: usize) -> bool {
        self.regions
            .values()
            .all(|w| w.mass > 0.0 && w.grad[..dim].iter().all(|&g| g > 0.0))
    }
}

/// Pointwise potential added to the stiffness form as `int V u v`.
pub type Potential<'a> = &'a (dyn Fn([f64; 3]) -> f64 + Sync);

/// Per-region, per-direction pieces of the global matrices on a shared pattern.
#[derive(Debug, Clone)]
pub struct Components {
    pub dim: usize,
    pub pattern: Arc<SymPattern>,
    pub stiff: BTreeMap<(Option<Region>, usize), Vec<f64>>,
    pub mass: BTreeMap<Option<Region>, Vec<f64>>,
    pub potential: Option<Vec<f64>>,
}

/// Unconstrained stiffness and mass on all dofs.
#[derive(Debug, Clone)]
pub struct FullSystem {
    pub k: SymCsc,
    pub m: SymCsc,
}

/// Pencil restricted to the free dofs after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub k: SymCsc,
    pub m: SymCsc,
    pub n_total: usize,
    /// Global dof of each free dof.
    pub free: Vec<usize>,
    pub global_to_free: Vec<Option<usize>>,
}

impl AssembledSystem {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Embeds a free-dof vector into all dofs with zeros on constrained ones.
    pub fn expand(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_total];
        for (i, &g) in self.free.iter().enumerate() {
            out[g] = v[i];
        }
        out
    }

    /// `(K + c M, M)`.
    pub fn shifted(&self, c: f64) -> AssembledSystem {
        AssembledSystem {
            k: self.k.axpy(c, &self.m),
            ..self.clone()
        }
    }
}

impl FullSystem {
    /// Eliminates the dofs flagged in `constrained`.
    pub fn restrict(&self, constrained: &[bool]) -> AssembledSystem {
        let n = self.k.n();
        let mut global_to_free = vec![None; n];
        let mut free = Vec::new();
        for (g, &c) in constrained.iter().enumerate() {
            if !c {
                global_to_free[g] = Some(free.len());
                free.push(g);
            }
        }
        let (pattern, source) = self.k.pattern.restrict(&global_to_free, free.len());
        let pattern = Arc::new(pattern);
        let gather = |a: &SymCsc| SymCsc {
            pattern: pattern.clone(),
            values: source.iter().map(|&k| a.values[k]).collect(),
        };
        AssembledSystem {
            k: gather(&self.k),
            m: gather(&self.m),
            n_total: n,
            free,
            global_to_free,
        }
    }
}

impl Components {
    /// Sums the pieces with the given weights (all ones when `None`).
    pub fn combine(&self, weights: Option<&WeightSpec>) -> Result<FullSystem> {
        let nnz = self.pattern.nnz();
        let mut k = vec![0.0; nnz];
        let mut m = vec![0.0; nnz];
        let weight_of = |region: &Option<Region>| -> Result<Option<RegionWeight>> {
            match (weights, region) {
                (None, _) => Ok(None),
                (Some(w), Some(r)) => Ok(Some(*w.regions.get(r).ok_or(Error::MissingRegionTags)?)),
                (Some(_), None) => Err(Error::MissingRegionTags),
            }
        };
        for ((region, d), vals) in &self.stiff {
            let c = weight_of(region)?.map_or(1.0, |w| w.grad[*d]);
            for (a, v) in k.iter_mut().zip(vals) {
                *a += c * v;
            }
        }
        for (region, vals) in &self.mass {
            let c = weight_of(region)?.map_or(1.0, |w| w.mass);
            for (a, v) in m.iter_mut().zip(vals) {
                *a += c * v;
            }
        }
        if let Some(pv) = &self.potential {
            for (a, v) in k.iter_mut().zip(pv) {
                *a += v;
            }
        }
        Ok(FullSystem {
            k: SymCsc {
                pattern: self.pattern.clone(),
                values: k,
            },
            m: SymCsc {
                pattern: self.pattern.clone(),
                values: m,
            },
        })
    }
}

struct ElementMatrices {
    stiff: Vec<Vec<f64>>,
    mass: Vec<f64>,
    potential: Option<Vec<f64>>,
}

/// Reference basis tabulated on the tensor quadrature grid.
struct TensorTables {
    dim: usize,
    nb: usize,
    nq: usize,
    weights: Vec<f64>,
    points: Vec<[f64; 3]>,
    phi: Vec<f64>,
    /// `dphi[a][q * nb + i]`
    dphi: Vec<Vec<f64>>,
}

impl TensorTables {
    fn new(tab: &Tabulated1d, dim: usize) -> Self {
        let n1 = tab.n_basis();
        let q1 = tab.n_quad();
        let nb = n1.pow(dim as u32);
        let nq = q1.pow(dim as u32);
        let mut weights = vec![1.0; nq];
        let mut points = vec![[0.0; 3]; nq];
        let mut phi = vec![1.0; nq * nb];
        let mut dphi = vec![vec![1.0; nq * nb]; dim];
        for q in 0..nq {
            let qi = split_index(q, q1, dim);
            for d in 0..dim {
                weights[q] *= tab.rule.weights[qi[d]];
                points[q][d] = tab.rule.points[qi[d]];
            }
            for i in 0..nb {
                let ii = split_index(i, n1, dim);
                let mut v = 1.0;
                for d in 0..dim {
                    v *= tab.value[qi[d]][ii[d]];
                }
                phi[q * nb + i] = v;
                for (a, da) in dphi.iter_mut().enumerate() {
                    let mut g = 1.0;
                    for d in 0..dim {
                        g *= if d == a {
                            tab.deriv[qi[d]][ii[d]]
                        } else {
                            tab.value[qi[d]][ii[d]]
                        };
                    }
                    da[q * nb + i] = g;
                }
            }
        }
        Self {
            dim,
            nb,
            nq,
            weights,
            points,
            phi,
            dphi,
        }
    }
}

fn gram(b: &Mat<f64>) -> Vec<f64> {
    let g = b.transpose() * b;
    let n = g.nrows();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = g[(i, j)];
        }
    }
    out
}

fn kron_entry(mats: &[&Vec<Vec<f64>>], ii: &[usize; 3], jj: &[usize; 3], dim: usize) -> f64 {
    let mut v = 1.0;
    for d in 0..dim {
        v *= mats[d][ii[d]][jj[d]];
    }
    v
}

/// Element integrator for one mesh and basis.
pub struct Assembler<'a> {
    pub mesh: &'a Mesh,
    pub space: &'a Space,
    pub basis: BasisSpec,
    tab: Tabulated1d,
    tables: TensorTables,
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a Mesh, space: &'a Space, basis: BasisSpec) -> Result<Self> {
        basis.validate()?;
        if basis.degree != space.degree {
            return Err(Error::InvalidArgument(format!(
                "basis degree {} differs from space degree {}",
                basis.degree, space.degree
            )));
        }
        let tab = Tabulated1d::new(basis);
        let tables = TensorTables::new(&tab, mesh.dim);
        Ok(Self {
            mesh,
            space,
            basis,
            tab,
            tables,
        })
    }

    fn affine(&self, e: usize) -> ElementMatrices {
        let dim = self.mesh.dim;
        let h = self.mesh.half_lengths(e);
        let n1 = self.tab.n_basis();
        let nb = self.tables.nb;
        let vol: f64 = h[..dim].iter().product();
        let mut stiff = vec![vec![0.0; nb * nb]; dim];
        let mut mass = vec![0.0; nb * nb];
        let split: Vec<[usize; 3]> = (0..nb).map(|i| split_index(i, n1, dim)).collect();
        for d in 0..dim {
            let mats: Vec<&Vec<Vec<f64>>> = (0..dim)
                .map(|a| {
                    if a == d {
                        &self.tab.stiff
                    } else {
                        &self.tab.mass
                    }
                })
                .collect();
            let scale = vol / (h[d] * h[d]);
            for i in 0..nb {
                for j in 0..nb {
                    stiff[d][i * nb + j] = scale * kron_entry(&mats, &split[i], &split[j], dim);
                }
            }
        }
        let mats: Vec<&Vec<Vec<f64>>> = (0..dim).map(|_| &self.tab.mass).collect();
        for i in 0..nb {
            for j in 0..nb {
                mass[i * nb + j] = vol * kron_entry(&mats, &split[i], &split[j], dim);
            }
        }
        ElementMatrices {
            stiff,
            mass,
            potential: None,
        }
    }

    fn general(&self, e: usize, potential: Option<Potential>) -> Result<ElementMatrices> {
        let t = &self.tables;
        let dim = t.dim;
        let (nq, nb) = (t.nq, t.nb);
        let mut bd: Vec<Mat<f64>> = (0..dim).map(|_| Mat::zeros(nq, nb)).collect();
        let mut c = Mat::<f64>::zeros(nq, nb);
        let mut cv = potential.map(|_| Mat::<f64>::zeros(nq, nb));
        for q in 0..nq {
            let xi = &t.points[q][..dim];
            let jac = self.mesh.jacobian(e, xi);
            let dj = det(&jac, dim);
            if !(dj > 0.0) {
                return Err(Error::InvertedElement {
                    element: e,
                    det: dj,
                });
            }
            let inv = inverse(&jac, dim);
            let s = (t.weights[q] * dj).sqrt();
            let vq = potential.map(|f| f(self.mesh.map_point(e, xi)));
            for i in 0..nb {
                let ph = t.phi[q * nb + i];
                c[(q, i)] = s * ph;
                if let (Some(cv), Some(v)) = (cv.as_mut(), vq) {
                    cv[(q, i)] = s * v * ph;
                }
                for (d, b) in bd.iter_mut().enumerate() {
                    let mut g = 0.0;
                    for a in 0..dim {
                        g += inv[a][d] * t.dphi[a][q * nb + i];
                    }
                    b[(q, i)] = s * g;
                }
            }
        }
        let stiff = bd.iter().map(gram).collect();
        let mass = gram(&c);
        let potential = cv.map(|cv| {
            let g = c.transpose() * &cv;
            let mut out = vec![0.0; nb * nb];
            for i in 0..nb {
                for j in 0..nb {
                    // symmetrize the product of the two scaled tables
                    out[i * nb + j] = 0.5 * (g[(i, j)] + g[(j, i)]);
                }
            }
            out
        });
        Ok(ElementMatrices {
            stiff,
            mass,
            potential,
        })
    }

    fn element(&self, e: usize, potential: Option<Potential>) -> Result<ElementMatrices> {
        if potential.is_none() && self.mesh.is_axis_aligned(e) {
            Ok(self.affine(e))
        } else {
            self.general(e, potential)
        }
    }

    /// Sparsity pattern of the global matrices.
    pub fn pattern(&self) -> SymPattern {
        SymPattern::from_cliques(
            self.space.n_dofs,
            self.space.elem_dofs.iter().map(|d| d.as_slice()),
        )
    }

    /// Assembles all region/direction pieces; element work runs in parallel,
    /// the scatter runs in element order so the result is reproducible.
    pub fn components(&self, potential: Option<Potential>) -> Result<Components> {
        let pattern = Arc::new(self.pattern());
        let nnz = pattern.nnz();
        let dim = self.mesh.dim;
        let nb = self.tables.nb;
        let mut stiff: BTreeMap<(Option<Region>, usize), Vec<f64>> = BTreeMap::new();
        let mut mass: BTreeMap<Option<Region>, Vec<f64>> = BTreeMap::new();
        for el in &self.mesh.elements {
            for d in 0..dim {
                stiff
                    .entry((el.region, d))
                    .or_insert_with(|| vec![0.0; nnz]);
            }
            mass.entry(el.region).or_insert_with(|| vec![0.0; nnz]);
        }
        let mut pot = potential.map(|_| vec![0.0; nnz]);
        let n_el = self.mesh.n_elements();
        let chunk = 64;
        let mut start = 0;
        while start < n_el {
            let end = (start + chunk).min(n_el);
            let mats: Vec<Result<ElementMatrices>> = (start..end)
                .into_par_iter()
                .map(|e| self.element(e, potential))
                .collect();
            for (offset, em) in mats.into_iter().enumerate() {
                let em = em?;
                let e = start + offset;
                let region = self.mesh.elements[e].region;
                let dofs = &self.space.elem_dofs[e];
                let mut pos = Vec::with_capacity(nb * nb);
                for a in 0..nb {
                    for b in 0..nb {
                        let (r, c) = (dofs[a], dofs[b]);
                        pos.push(if r >= c {
                            pattern.position(r, c).expect("entry missing from pattern")
                        } else {
                            usize::MAX
                        });
                    }
                }
                let add = |target: &mut Vec<f64>, local: &[f64]| {
                    for (k, &p) in pos.iter().enumerate() {
                        if p != usize::MAX {
                            target[p] += local[k];
                        }
                    }
                };
                for d in 0..dim {
                    add(stiff.get_mut(&(region, d)).unwrap(), &em.stiff[d]);
                }
                add(mass.get_mut(&region).unwrap(), &em.mass);
                if let (Some(t), Some(l)) = (pot.as_mut(), em.potential.as_ref()) {
                    add(t, l);
                }
            }
            start = end;
        }
        Ok(Components {
            dim,
            pattern,
            stiff,
            mass,
            potential: pot,
        })
    }
}

/// Assembles the pencil of `mesh` with Dirichlet dofs eliminated per the mesh boundary map.
pub fn assemble(
    mesh: &Mesh,
    basis: BasisSpec,
    weights: Option<&WeightSpec>,
) -> Result<(Space, AssembledSystem)> {
    let space = Space::new(mesh, basis.degree)?;
    if let Some(w) = weights {
        if mesh.elements.iter().any(|e| e.region.is_none()) {
            return Err(Error::MissingRegionTags);
        }
        if !w.all_positive(mesh.dim) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
    }
    let comps = Assembler::new(mesh, &space, basis)?.components(None)?;
    let full = comps.combine(weights)?;
    let mask = space.dirichlet_mask(mesh)?;
    let sys = full.restrict(&mask);
    Ok((space, sys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BcKind, BcMap, GradingSpec, Truncation};
    use crate::mesh::guide::build_reference_guide_mesh;
    use crate::mesh::simple::{interval, rectangle, TAG_LEFT, TAG_RIGHT};

    fn all_dirichlet(tags: &[&str]) -> BcMap {
        tags.iter()
            .map(|t| (t.to_string(), BcKind::Dirichlet))
            .collect()
    }

    #[test]
    fn single_linear_interval_has_no_free_dofs() {
        let m = interval(&[0.0, 1.0], all_dirichlet(&[TAG_LEFT, TAG_RIGHT])).unwrap();
        let (_, sys) = assemble(&m, BasisSpec::new(1), None).unwrap();
        assert_eq!(sys.n_free(), 0);
    }

    #[test]
    fn affine_fast_path_matches_quadrature() {
        let mut bc = BcMap::new();
        for t in ["left", "right", "bottom", "top"] {
            bc.insert(t.into(), BcKind::Neumann);
        }
        let m = rectangle(&[0.0, 0.7], &[-0.2, 0.5], bc).unwrap();
        let space = Space::new(&m, 5).unwrap();
        let asm = Assembler::new(&m, &space, BasisSpec::new(5)).unwrap();
        let a = asm.affine(0);
        let g = asm.general(0, None).unwrap();
        for d in 0..2 {
            for (x, y) in a.stiff[d].iter().zip(&g.stiff[d]) {
                assert!((x - y).abs() < 1e-13);
            }
        }
        for (x, y) in a.mass.iter().zip(&g.mass) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn patch_test_linear_functions() {
        let m = build_reference_guide_mesh(&GradingSpec::new(2, 0.3), 2, Truncation::Mix).unwrap();
        let space = Space::new(&m, 3).unwrap();
        let comps = Assembler::new(&m, &space, BasisSpec::new(3))
            .unwrap()
            .components(None)
            .unwrap();
        let full = comps.combine(None).unwrap();
        let lin: Vec<f64> = space
            .coords
            .iter()
            .map(|x| 2.0 * x[0] - 0.5 * x[1] + 1.0)
            .collect();
        let ones = vec![1.0; space.n_dofs];
        let k_lin = full.k.apply(&lin);
        let e: f64 = k_lin.iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!(e.abs() < 1e-10);
        // energy of a linear function equals |grad|^2 times the area
        let energy = full.k.quad_form(&lin);
        assert!((energy - 4.25 * 3.0).abs() < 1e-9);
        let area = full.m.quad_form(&ones);
        assert!((area - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unit_weights_reproduce_plain_assembly() {
        let m = build_reference_guide_mesh(&GradingSpec::new(2, 0.2), 2, Truncation::Mix).unwrap();
        let (_, plain) = assemble(&m, BasisSpec::new(4), None).unwrap();
        let w = WeightSpec::reference_guide(1.0).unwrap();
        let (_, weighted) = assemble(&m, BasisSpec::new(4), Some(&w)).unwrap();
        assert_eq!(plain.k.values, weighted.k.values);
        assert_eq!(plain.m.values, weighted.m.values);
    }

    #[test]
    fn weights_need_regions() {
        let m = rectangle(
            &[0.0, 1.0],
            &[0.0, 1.0],
            all_dirichlet(&["left", "right", "bottom", "top"]),
        )
        .unwrap();
        let w = WeightSpec::reference_guide(2.0).unwrap();
        assert!(matches!(
            assemble(&m, BasisSpec::new(2), Some(&w)),
            Err(Error::MissingRegionTags)
        ));
        assert!(WeightSpec::reference_guide(0.0).is_err());
    }

    #[test]
    fn doubling_quadrature_leaves_affine_entries() {
        let m = rectangle(&[0.0, 0.5, 1.0], &[0.0, 1.0], all_dirichlet(&["left"])).unwrap();
        let mut bc = m.bc.clone();
        for t in ["right", "bottom", "top"] {
            bc.insert(t.into(), BcKind::Neumann);
        }
        let m = Mesh { bc, ..m };
        let p = 6;
        let (_, a) = assemble(&m, BasisSpec::new(p), None).unwrap();
        let (_, b) = assemble(&m, BasisSpec::with_quadrature(p, 2 * (p + 1)), None).unwrap();
        for (x, y) in a.k.values.iter().zip(&b.k.values) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
        }
    }
}
