//! Intervals, rectangles and boxes with tagged sides.

use super::{Mesh, MeshBuilder};
use crate::error::{Error, Result};
use crate::geometry::BcMap;

pub const TAG_LEFT: &str = "left";
pub const TAG_RIGHT: &str = "right";
pub const TAG_BOTTOM: &str = "bottom";
pub const TAG_TOP: &str = "top";
pub const TAG_FRONT: &str = "front";
pub const TAG_BACK: &str = "back";

fn check_breaks(b: &[f64]) -> Result<()> {
    if b.len() < 2 || b.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGeometry(
            "breaks must be strictly increasing with at least two entries".into(),
        ));
    }
    Ok(())
}

/// `n` equal cells on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Interval mesh with end points tagged `left` and `right`.
pub fn interval(breaks: &[f64], bc: BcMap) -> Result<Mesh> {
    check_breaks(breaks)?;
    let mut b = MeshBuilder::new(1);
    for w in breaks.windows(2) {
        b.segment(w[0], w[1]);
    }
    let lo = breaks[0];
    Ok(b.finish(bc, |m| {
        if m[0] == lo {
            TAG_LEFT.into()
        } else {
            TAG_RIGHT.into()
        }
    }))
}

/// Rectangle grid tagged `left`, `right`, `bottom`, `top`.
pub fn rectangle(xb: &[f64], yb: &[f64], bc: BcMap) -> Result<Mesh> {
    check_breaks(xb)?;
    check_breaks(yb)?;
    let mut b = MeshBuilder::new(2);
    for wy in yb.windows(2) {
        for wx in xb.windows(2) {
            b.rect(wx[0], wx[1], wy[0], wy[1], None);
        }
    }
    let (x0, x1, y0) = (xb[0], *xb.last().unwrap(), yb[0]);
    Ok(b.finish(bc, |m| {
        if m[0] == x0 {
            TAG_LEFT.into()
        } else if m[0] == x1 {
            TAG_RIGHT.into()
        } else if m[1] == y0 {
            TAG_BOTTOM.into()
        } else {
            TAG_TOP.into()
        }
    }))
}

/// Box grid tagged `left`/`right` (x), `bottom`/`top` (y), `front`/`back` (z).
pub fn cuboid(xb: &[f64], yb: &[f64], zb: &[f64], bc: BcMap) -> Result<Mesh> {
    check_breaks(xb)?;
    check_breaks(yb)?;
    check_breaks(zb)?;
    let mut b = MeshBuilder::new(3);
    for wz in zb.windows(2) {
        for wy in yb.windows(2) {
            for wx in xb.windows(2) {
                b.hex([wx[0], wy[0], wz[0]], [wx[1], wy[1], wz[1]]);
            }
        }
    }
    let lo = [xb[0], yb[0], zb[0]];
    let hi = [
        *xb.last().unwrap(),
        *yb.last().unwrap(),
        *zb.last().unwrap(),
    ];
    Ok(b.finish(bc, |m| {
        let names = [
            (TAG_LEFT, TAG_RIGHT),
            (TAG_BOTTOM, TAG_TOP),
            (TAG_FRONT, TAG_BACK),
        ];
        for d in 0..3 {
            if m[d] == lo[d] {
                return names[d].0.into();
            }
            if m[d] == hi[d] {
                return names[d].1.into();
            }
        }
        unreachable!("boundary facet off the box faces")
    }))
}
