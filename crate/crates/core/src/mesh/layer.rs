//! Tensor hexahedral grids of the truncated three-dimensional layers.

use super::{Mesh, MeshBuilder};
use crate::error::{Error, Result};
use crate::geometry::{Geometry3D, LayerKind, TAG_INNER, TAG_OUTER, TAG_SIGMA, TAG_WALL};

const EPS: f64 = 1e-9;

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < EPS);
    v
}

fn refine(breaks: &[f64], level: usize) -> Vec<f64> {
    let mut s = breaks.to_vec();
    for _ in 1..level {
        let mut next = Vec::with_capacity(2 * s.len());
        for w in s.windows(2) {
            next.push(w[0]);
            next.push(0.5 * (w[0] + w[1]));
        }
        next.push(*s.last().unwrap());
        s = next;
    }
    s
}

/// Subdivision of `[-1, R]` for the unit layer at refinement level `k`.
pub fn layer_subdivision(r: f64, level: usize) -> Result<Vec<f64>> {
    if r < 2.0 {
        return Err(Error::InvalidGeometry(format!(
            "the layer subdivision needs R >= 2, got {r}"
        )));
    }
    check_level(level)?;
    let s1 = dedup_sorted(vec![
        -1.0,
        -0.5,
        -0.25,
        0.0,
        0.25,
        0.5,
        1.0,
        2.0,
        0.5 * (r + 2.0),
        r,
    ]);
    Ok(refine(&s1, level))
}

/// Subdivision of `[-1, arm]` for the half-width layer, expressed in the doubled frame.
pub fn scaled_layer_subdivision(arm: f64, level: usize) -> Result<Vec<f64>> {
    if !(arm > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "arm length must be positive, got {arm}"
        )));
    }
    check_level(level)?;
    let a = arm.min(4.0);
    let b = a.max(arm);
    let mut v: Vec<f64> = [-1.0, -0.1, 0.0, 0.1, 1.0, a, b]
        .into_iter()
        .filter(|&x| x < arm + EPS)
        .collect();
    v.push(arm);
    Ok(refine(&dedup_sorted(v), level))
}

fn check_level(level: usize) -> Result<()> {
    if !(1..=3).contains(&level) {
        return Err(Error::InvalidGeometry(format!(
            "subdivision level must be 1, 2 or 3, got {level}"
        )));
    }
    Ok(())
}

fn grid(breaks: &[f64]) -> MeshBuilder {
    let mut b = MeshBuilder::new(3);
    let n = breaks.len() - 1;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let lo = [breaks[i], breaks[j], breaks[k]];
                let hi = [breaks[i + 1], breaks[j + 1], breaks[k + 1]];
                if lo.iter().all(|&x| x >= -EPS) {
                    continue;
                }
                b.hex(lo, hi);
            }
        }
    }
    b
}

/// Tensor grid of the truncated layer with the positive octant block removed.
pub fn build_layer_grid(geom: &Geometry3D) -> Result<Mesh> {
    let r = geom.arm_length;
    match geom.kind {
        LayerKind::Fichera => {
            let s = layer_subdivision(r, geom.subdivision_level)?;
            Ok(grid(&s).finish(geom.bc_map.clone(), |m| {
                if m.iter().any(|&x| (x - r).abs() < EPS) {
                    TAG_SIGMA.into()
                } else {
                    TAG_WALL.into()
                }
            }))
        }
        LayerKind::ScaledFichera => {
            let arm = 2.0 * r;
            let s = scaled_layer_subdivision(arm, geom.subdivision_level)?;
            let mesh = grid(&s).finish(geom.bc_map.clone(), |m| {
                if m.iter().any(|&x| (x - arm).abs() < EPS) {
                    TAG_SIGMA.into()
                } else if m.iter().any(|&x| (x + 1.0).abs() < EPS) {
                    TAG_OUTER.into()
                } else {
                    TAG_INNER.into()
                }
            });
            Ok(mesh.scaled(0.5))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Truncation;

    #[test]
    fn subdivision_examples() {
        let s = layer_subdivision(4.0, 1).unwrap();
        assert_eq!(
            s,
            vec![-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(layer_subdivision(4.0, 2).unwrap().len() - 1, 18);
        assert_eq!(layer_subdivision(4.0, 3).unwrap().len() - 1, 36);
        assert_eq!(layer_subdivision(2.0, 1).unwrap().len() - 1, 7);
        assert!(layer_subdivision(1.5, 1).is_err());
        assert!(layer_subdivision(4.0, 4).is_err());
        assert_eq!(
            scaled_layer_subdivision(3.0, 1).unwrap(),
            vec![-1.0, -0.1, 0.0, 0.1, 1.0, 3.0]
        );
        assert_eq!(
            scaled_layer_subdivision(10.0, 1).unwrap(),
            vec![-1.0, -0.1, 0.0, 0.1, 1.0, 4.0, 10.0]
        );
        assert_eq!(
            scaled_layer_subdivision(1.0, 1).unwrap(),
            vec![-1.0, -0.1, 0.0, 0.1, 1.0]
        );
    }

    #[test]
    fn hex_count_and_volume() {
        let g = Geometry3D::fichera(4.0, 1, Truncation::Dir);
        let m = build_layer_grid(&g).unwrap();
        assert_eq!(m.n_elements(), 513);
        assert!((m.measure(2) - g.volume()).abs() < 1e-10);
        m.check_conforming().unwrap();
        let sigma = m.tag_counts()[TAG_SIGMA];
        // each truncation face of the unit layer is tiled by the 9x9 grid minus the 6x6 block
        assert_eq!(sigma, 3 * (81 - 36));
    }

    #[test]
    fn scaled_layer_volume_and_tags() {
        let g = Geometry3D::scaled(2.0, 1, Truncation::Mix);
        let m = build_layer_grid(&g).unwrap();
        m.check_conforming().unwrap();
        assert!((m.measure(2) - g.volume()).abs() < 1e-10);
        let counts = m.tag_counts();
        assert!(counts[TAG_INNER] > 0 && counts[TAG_OUTER] > 0 && counts[TAG_SIGMA] > 0);
    }
}
