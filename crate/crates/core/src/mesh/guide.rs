//! Two-dimensional guides: broken, rounded, half-width, and the reference guide.

use std::f64::consts::PI;

use super::{ArcBlend, Mesh, MeshBuilder, Region};
use crate::error::{Error, Result};
use crate::geometry::{
    BcKind, BcMap, Geometry2D, GradingSpec, GuideKind, Truncation, TAG_ARC, TAG_INNER, TAG_OUTER,
    TAG_SIGMA, TAG_WALL,
};

/// Default number of arc elements of the rounded guide.
pub const DEFAULT_N_ARC: usize = 8;

const EPS: f64 = 1e-9;

fn region_of(cx: f64, cy: f64) -> Region {
    if cx > 0.0 {
        Region::Arm1
    } else if cy > 0.0 {
        Region::Arm2
    } else {
        Region::Corner
    }
}

/// L-shaped rings of geometrically shrinking width around the origin.
///
/// Covers `(-c,0)^2`, `(0,c) x (-c,0)` and `(-c,0) x (0,c)`.
fn corner_patch(b: &mut MeshBuilder, c: f64, grading: &GradingSpec) {
    let path = |r: f64| -> [[f64; 2]; 7] {
        [
            [r, 0.0],
            [r, -r],
            [0.0, -r],
            [-r, -r],
            [-r, 0.0],
            [-r, r],
            [0.0, r],
        ]
    };
    let mut r = c;
    for _ in 0..grading.layers {
        let inner_r = r * grading.ratio;
        let outer = path(r);
        let inner = path(inner_r);
        for j in 0..6 {
            let cx = 0.25 * (outer[j][0] + outer[j + 1][0] + inner[j][0] + inner[j + 1][0]);
            let cy = 0.25 * (outer[j][1] + outer[j + 1][1] + inner[j][1] + inner[j + 1][1]);
            b.quad(
                [inner[j], inner[j + 1], outer[j], outer[j + 1]],
                Some(region_of(cx, cy)),
            );
        }
        r = inner_r;
    }
    b.rect(-r, 0.0, -r, 0.0, Some(Region::Corner));
    b.rect(0.0, r, -r, 0.0, Some(Region::Arm1));
    b.rect(-r, 0.0, 0.0, r, Some(Region::Arm2));
}

/// Breaks of `[0, arm]`: the mirrored cross-section breaks up to 1, then steps of at most `step`.
fn arm_breaks(cross: &[f64], arm: f64, step: f64) -> Vec<f64> {
    let mut out: Vec<f64> = cross
        .iter()
        .rev()
        .map(|&y| -y)
        .filter(|&x| x < arm - EPS)
        .collect();
    if arm <= 1.0 + EPS {
        out.push(arm);
        return out;
    }
    let n = ((arm - 1.0) / step - EPS).ceil().max(1.0) as usize;
    for i in 1..=n {
        out.push(if i == n {
            arm
        } else {
            1.0 + (arm - 1.0) * i as f64 / n as f64
        });
    }
    out
}

fn cells(breaks: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    breaks.windows(2).map(|w| (w[0], w[1]))
}

/// Unit-width broken guide with arms of length `arm`, untagged.
fn broken_builder(arm: f64, grading: &GradingSpec, base: usize) -> MeshBuilder {
    let h = 1.0 / base as f64;
    let c = h.min(arm);
    let mut cross: Vec<f64> = (0..base).map(|i| -1.0 + i as f64 * h).collect();
    if c < h {
        cross.push(-c);
    }
    cross.push(0.0);
    let arm_b = arm_breaks(&cross, arm, h);
    let mut b = MeshBuilder::new(2);
    corner_patch(&mut b, c, grading);
    let is = |v: f64, w: f64| (v - w).abs() < EPS;
    for (x0, x1) in cells(&cross) {
        for (y0, y1) in cells(&cross) {
            if !(is(x0, -c) && is(y0, -c)) {
                b.rect(x0, x1, y0, y1, Some(Region::Corner));
            }
        }
    }
    for (x0, x1) in cells(&arm_b) {
        for (y0, y1) in cells(&cross) {
            if !(is(x0, 0.0) && is(y0, -c)) {
                b.rect(x0, x1, y0, y1, Some(Region::Arm1));
            }
        }
    }
    for (x0, x1) in cells(&cross) {
        for (y0, y1) in cells(&arm_b) {
            if !(is(x0, -c) && is(y0, 0.0)) {
                b.rect(x0, x1, y0, y1, Some(Region::Arm2));
            }
        }
    }
    b
}

fn check_inputs(grading: &GradingSpec, base: usize) -> Result<()> {
    grading.validate()?;
    if base == 0 {
        return Err(Error::InvalidArgument(
            "at least one element per unit length is required".into(),
        ));
    }
    Ok(())
}

/// Corner-graded quadrilateral mesh of a truncated guide.
pub fn build_guide_mesh(geom: &Geometry2D, grading: &GradingSpec, base: usize) -> Result<Mesh> {
    build_guide_mesh_with_arc(geom, grading, base, DEFAULT_N_ARC)
}

/// As [`build_guide_mesh`] with an explicit arc resolution for the rounded guide.
pub fn build_guide_mesh_with_arc(
    geom: &Geometry2D,
    grading: &GradingSpec,
    base: usize,
    n_arc: usize,
) -> Result<Mesh> {
    geom.validate()?;
    check_inputs(grading, base)?;
    let r = geom.arm_length;
    match geom.kind {
        GuideKind::Broken => {
            let b = broken_builder(r, grading, base);
            Ok(b.finish(geom.bc_map.clone(), |m| {
                if (m[0] - r).abs() < EPS || (m[1] - r).abs() < EPS {
                    TAG_SIGMA.into()
                } else {
                    TAG_WALL.into()
                }
            }))
        }
        GuideKind::ScaledBroken => {
            let arm = 2.0 * r;
            let b = broken_builder(arm, grading, base);
            let mesh = b.finish(geom.bc_map.clone(), |m| {
                if (m[0] - arm).abs() < EPS || (m[1] - arm).abs() < EPS {
                    TAG_SIGMA.into()
                } else if (m[0] + 1.0).abs() < EPS || (m[1] + 1.0).abs() < EPS {
                    TAG_OUTER.into()
                } else {
                    TAG_INNER.into()
                }
            });
            Ok(mesh.scaled(0.5))
        }
        GuideKind::Rounded => rounded_mesh(geom, grading, base, n_arc),
    }
}

/// Mesh of the reference guide with unit arms and region tags on every element.
///
/// The truncation faces carry the tag `sigma`.
pub fn build_reference_guide_mesh(
    grading: &GradingSpec,
    base: usize,
    truncation: Truncation,
) -> Result<Mesh> {
    check_inputs(grading, base)?;
    let geom = Geometry2D::broken(1.0, truncation);
    build_guide_mesh(&geom, grading, base)
}

const SQUARE: f64 = 0.5;

struct RoundedLayout {
    h: f64,
    cross: Vec<f64>,
    square: Vec<f64>,
    radial: usize,
}

fn rounded_layout(n_arc: usize) -> Result<RoundedLayout> {
    if n_arc < 2 || n_arc % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "arc resolution must be even and at least 2, got {n_arc}"
        )));
    }
    let half = n_arc / 2;
    let h = SQUARE / half as f64;
    let radial = (n_arc / 4).max(1);
    let square: Vec<f64> = (0..=half).map(|i| -SQUARE + i as f64 * h).collect();
    let mut cross: Vec<f64> = (0..radial)
        .map(|k| -1.0 + (1.0 - SQUARE) * k as f64 / radial as f64)
        .collect();
    cross.extend_from_slice(&square);
    Ok(RoundedLayout {
        h,
        cross,
        square,
        radial,
    })
}

/// Square `(-1/2,0)^2` plus the arc blend ring of the quarter disk.
fn quarter_disk_parts(b: &mut MeshBuilder, lay: &RoundedLayout, n_arc: usize, skip_corner: bool) {
    let half = n_arc / 2;
    let h = lay.h;
    for (x0, x1) in cells(&lay.square) {
        for (y0, y1) in cells(&lay.square) {
            if skip_corner && (x0 + h).abs() < EPS && (y0 + h).abs() < EPS {
                continue;
            }
            b.rect(x0, x1, y0, y1, Some(Region::Corner));
        }
    }
    let path = |j: usize| -> [f64; 2] {
        if j <= half {
            [-SQUARE, -(j as f64) * h]
        } else {
            [-SQUARE + (j - half) as f64 * h, -SQUARE]
        }
    };
    let theta = |j: usize| PI + 0.5 * PI * j as f64 / n_arc as f64;
    // straight quads between chords, then one blend layer touching the arc
    let point = |j: usize, t: f64| -> [f64; 2] {
        let q = path(j);
        let th = theta(j);
        [
            (1.0 - t) * q[0] + t * th.cos(),
            (1.0 - t) * q[1] + t * th.sin(),
        ]
    };
    let last = (lay.radial - 1) as f64 / lay.radial as f64;
    for j in 0..n_arc {
        for k in 0..lay.radial - 1 {
            let t0 = k as f64 / lay.radial as f64;
            let t1 = (k + 1) as f64 / lay.radial as f64;
            b.quad(
                [
                    point(j, t0),
                    point(j + 1, t0),
                    point(j, t1),
                    point(j + 1, t1),
                ],
                Some(Region::Corner),
            );
        }
        b.arc_quad(
            ArcBlend {
                p0: point(j, last),
                p1: point(j + 1, last),
                center: [0.0, 0.0],
                radius: 1.0,
                theta0: theta(j),
                theta1: theta(j + 1),
                t0: 0.0,
                t1: 1.0,
            },
            Some(Region::Corner),
        );
    }
}

fn rounded_mesh(
    geom: &Geometry2D,
    grading: &GradingSpec,
    base: usize,
    n_arc: usize,
) -> Result<Mesh> {
    let lay = rounded_layout(n_arc)?;
    let r = geom.arm_length;
    if r < lay.h {
        return Err(Error::InvalidGeometry(format!(
            "rounded guide arms must be at least {} long",
            lay.h
        )));
    }
    let c = lay.h;
    let mut b = MeshBuilder::new(2);
    corner_patch(&mut b, c, grading);
    quarter_disk_parts(&mut b, &lay, n_arc, true);
    let arm_b = arm_breaks(&lay.cross, r, 1.0 / base as f64);
    let is = |v: f64, w: f64| (v - w).abs() < EPS;
    for (x0, x1) in cells(&arm_b) {
        for (y0, y1) in cells(&lay.cross) {
            if !(is(x0, 0.0) && is(y0, -c)) {
                b.rect(x0, x1, y0, y1, Some(Region::Arm1));
            }
        }
    }
    for (x0, x1) in cells(&lay.cross) {
        for (y0, y1) in cells(&arm_b) {
            if !(is(x0, -c) && is(y0, 0.0)) {
                b.rect(x0, x1, y0, y1, Some(Region::Arm2));
            }
        }
    }
    Ok(b.finish(geom.bc_map.clone(), |m| {
        if (m[0] - r).abs() < EPS || (m[1] - r).abs() < EPS {
            TAG_SIGMA.into()
        } else if m[0] < -EPS && m[1] < -EPS {
            TAG_ARC.into()
        } else {
            TAG_WALL.into()
        }
    }))
}

pub const TAG_EDGE1: &str = "edge1";
pub const TAG_EDGE2: &str = "edge2";

/// Quarter disk `{x1 < 0, x2 < 0, |x| < 1}`, all sides Dirichlet.
///
/// Tags: `edge1` on `x1 = 0`, `edge2` on `x2 = 0`, `arc` on the circle.
pub fn build_quarter_disk_mesh(n_arc: usize) -> Result<Mesh> {
    let lay = rounded_layout(n_arc)?;
    let mut b = MeshBuilder::new(2);
    quarter_disk_parts(&mut b, &lay, n_arc, false);
    let mut bc = BcMap::new();
    for t in [TAG_ARC, TAG_EDGE1, TAG_EDGE2] {
        bc.insert(t.into(), BcKind::Dirichlet);
    }
    Ok(b.finish(bc, |m| {
        if m[0].abs() < EPS {
            TAG_EDGE1.into()
        } else if m[1].abs() < EPS {
            TAG_EDGE2.into()
        } else {
            TAG_ARC.into()
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mapping;
    use std::collections::HashSet;

    fn key(p: [f64; 3]) -> (i64, i64) {
        ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
    }

    #[test]
    fn coarsest_broken_guide() {
        let g = Geometry2D::broken(1.0, Truncation::Mix);
        let m = build_guide_mesh(&g, &GradingSpec::new(0, 0.1), 1).unwrap();
        assert_eq!(m.n_elements(), 3);
        assert_eq!(m.facets.len(), 8);
        assert_eq!(m.tag_counts()[TAG_SIGMA], 2);
        m.check_conforming().unwrap();
    }

    #[test]
    fn graded_corner_element_size() {
        let g = Geometry2D::broken(1.0, Truncation::Mix);
        let m = build_guide_mesh(&g, &GradingSpec::new(4, 0.1), 1).unwrap();
        assert_eq!(m.n_elements(), 3 + 6 * 4);
        let smallest = (0..m.n_elements())
            .map(|e| m.element_diameter(e))
            .fold(f64::INFINITY, f64::min);
        assert!((smallest - 1e-4 * 2f64.sqrt()).abs() < 1e-12);
        m.check_conforming().unwrap();
    }

    #[test]
    fn broken_guide_area_and_symmetry() {
        for (r, base) in [(1.0, 1), (3.5, 2), (10.0, 1), (0.3, 4)] {
            let g = Geometry2D::broken(r, Truncation::Dir);
            let m = build_guide_mesh(&g, &GradingSpec::new(3, 0.15), base).unwrap();
            m.check_conforming().unwrap();
            assert!((m.measure(4) - g.area()).abs() < 1e-12, "r={r}");
            let set: HashSet<_> = m.nodes.iter().map(|&p| key(p)).collect();
            for p in &m.nodes {
                assert!(set.contains(&key([p[1], p[0], 0.0])));
            }
        }
    }

    #[test]
    fn reference_mesh_regions() {
        let m = build_reference_guide_mesh(&GradingSpec::new(4, 0.1), 4, Truncation::Mix).unwrap();
        assert!(m.elements.iter().all(|e| e.region.is_some()));
        let a0 = m.region_measure(Region::Corner, 4);
        let a1 = m.region_measure(Region::Arm1, 4);
        let a2 = m.region_measure(Region::Arm2, 4);
        assert!((a0 - 1.0).abs() < 1e-13 && (a1 - 1.0).abs() < 1e-13 && (a2 - 1.0).abs() < 1e-13);
        let n0 = m
            .elements
            .iter()
            .filter(|e| e.region == Some(Region::Corner))
            .count();
        let n1 = m
            .elements
            .iter()
            .filter(|e| e.region == Some(Region::Arm1))
            .count();
        let n2 = m
            .elements
            .iter()
            .filter(|e| e.region == Some(Region::Arm2))
            .count();
        assert_eq!(n1, n2);
        assert_eq!(m.n_elements(), n0 + 2 * n1);
    }

    #[test]
    fn scaled_guide_tags() {
        let g = Geometry2D::scaled(2.0, Truncation::Mix);
        let m = build_guide_mesh(&g, &GradingSpec::new(2, 0.1), 1).unwrap();
        m.check_conforming().unwrap();
        assert!((m.measure(4) - g.area()).abs() < 1e-12);
        for f in &m.facets {
            if f.tag == TAG_OUTER {
                for &v in &f.nodes {
                    let p = m.nodes[v];
                    assert_eq!(p[0].min(p[1]), -0.5);
                }
            }
        }
        assert!(m.tag_counts()[TAG_OUTER] > 0 && m.tag_counts()[TAG_INNER] > 0);
    }

    #[test]
    fn rounded_guide_is_conforming() {
        let g = Geometry2D::rounded(1.0, Truncation::Mix);
        let m = build_guide_mesh(&g, &GradingSpec::new(4, 0.1), 1).unwrap();
        m.check_conforming().unwrap();
        assert!((m.measure(12) - g.area()).abs() < 1e-10);
        for el in &m.elements {
            if let Mapping::Arc(_) = el.mapping {
                let touches_arc = el.vertices.iter().any(|&v| {
                    let p = m.nodes[v];
                    ((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-12
                });
                assert!(touches_arc);
            }
        }
        // junction segments: nodes of both sides coincide exactly
        let on_junction: Vec<_> = m
            .nodes
            .iter()
            .filter(|p| p[0] == 0.0 && p[1] <= 0.0)
            .collect();
        assert!(on_junction.iter().any(|p| p[1] == -0.75));
        assert_eq!(m.tag_counts()[TAG_ARC], DEFAULT_N_ARC);
    }

    #[test]
    fn quarter_disk() {
        let m = build_quarter_disk_mesh(8).unwrap();
        m.check_conforming().unwrap();
        assert!((m.measure(12) - PI / 4.0).abs() < 1e-10);
        assert_eq!(m.tag_counts()[TAG_ARC], 8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Geometry2D::broken(0.0, Truncation::Mix);
        assert!(build_guide_mesh(&g, &GradingSpec::default(), 1).is_err());
        let g = Geometry2D::broken(2.0, Truncation::Mix);
        assert!(build_guide_mesh(&g, &GradingSpec::new(4, 1.5), 1).is_err());
        assert!(build_quarter_disk_mesh(3).is_err());
    }
}
