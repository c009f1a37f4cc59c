//! Parametric descriptions of the guides and layers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

pub type BcMap = BTreeMap<String, BcKind>;

/// Truncation condition on the artificial faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truncation {
    /// Dirichlet on the truncation faces.
    Dir,
    /// Neumann on the truncation faces.
    Mix,
}

impl Truncation {
    pub fn bc(self) -> BcKind {
        match self {
            Truncation::Dir => BcKind::Dirichlet,
            Truncation::Mix => BcKind::Neumann,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Truncation::Dir => "dir",
            Truncation::Mix => "mix",
        }
    }
}

pub const TAG_WALL: &str = "wall";
pub const TAG_SIGMA: &str = "sigma";
pub const TAG_ARC: &str = "arc";
pub const TAG_INNER: &str = "inner";
pub const TAG_OUTER: &str = "outer";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GuideKind {
    /// The L-shaped strip of width 1 around the positive quadrant.
    Broken,
    /// Quarter disk of radius 1 joined to two straight strips.
    Rounded,
    /// Half-width broken guide, Dirichlet inside and Neumann outside.
    ScaledBroken,
}

impl GuideKind {
    pub fn name(self) -> &'static str {
        match self {
            GuideKind::Broken => "broken",
            GuideKind::Rounded => "rounded",
            GuideKind::ScaledBroken => "scaled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "broken" => Ok(GuideKind::Broken),
            "rounded" => Ok(GuideKind::Rounded),
            "scaled" => Ok(GuideKind::ScaledBroken),
            _ => Err(Error::InvalidArgument(format!("unknown 2D geometry '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry2D {
    pub kind: GuideKind,
    pub arm_length: f64,
    pub width: f64,
    pub bc_map: BcMap,
}

impl Geometry2D {
    pub fn new(kind: GuideKind, arm_length: f64, truncation: Truncation) -> Self {
        let mut bc_map = BcMap::new();
        bc_map.insert(TAG_SIGMA.into(), truncation.bc());
        let width = match kind {
            GuideKind::Broken | GuideKind::Rounded => 1.0,
            GuideKind::ScaledBroken => 0.5,
        };
        match kind {
            GuideKind::Broken => {
                bc_map.insert(TAG_WALL.into(), BcKind::Dirichlet);
            }
            GuideKind::Rounded => {
                bc_map.insert(TAG_WALL.into(), BcKind::Dirichlet);
                bc_map.insert(TAG_ARC.into(), BcKind::Dirichlet);
            }
            GuideKind::ScaledBroken => {
                bc_map.insert(TAG_INNER.into(), BcKind::Dirichlet);
                bc_map.insert(TAG_OUTER.into(), BcKind::Neumann);
            }
        }
        Self {
            kind,
            arm_length,
            width,
            bc_map,
        }
    }

    pub fn broken(arm_length: f64, truncation: Truncation) -> Self {
        Self::new(GuideKind::Broken, arm_length, truncation)
    }

    pub fn rounded(arm_length: f64, truncation: Truncation) -> Self {
        Self::new(GuideKind::Rounded, arm_length, truncation)
    }

    pub fn scaled(arm_length: f64, truncation: Truncation) -> Self {
        Self::new(GuideKind::ScaledBroken, arm_length, truncation)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arm_length > 0.0) || !self.arm_length.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "arm length must be positive, got {}",
                self.arm_length
            )));
        }
        Ok(())
    }

    /// Exact area of the truncated domain.
    pub fn area(&self) -> f64 {
        let r = self.arm_length;
        match self.kind {
            GuideKind::Broken => 2.0 * r + 1.0,
            GuideKind::Rounded => PI / 4.0 + 2.0 * r,
            GuideKind::ScaledBroken => r + 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    Fichera,
    ScaledFichera,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Fichera => "fichera",
            LayerKind::ScaledFichera => "scaled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fichera" => Ok(LayerKind::Fichera),
            "scaled" => Ok(LayerKind::ScaledFichera),
            _ => Err(Error::InvalidArgument(format!("unknown 3D geometry '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry3D {
    pub kind: LayerKind,
    pub arm_length: f64,
    pub subdivision_level: usize,
    pub bc_map: BcMap,
}

impl Geometry3D {
    pub fn new(kind: LayerKind, arm_length: f64, level: usize, truncation: Truncation) -> Self {
        let mut bc_map = BcMap::new();
        bc_map.insert(TAG_SIGMA.into(), truncation.bc());
        match kind {
            LayerKind::Fichera => {
                bc_map.insert(TAG_WALL.into(), BcKind::Dirichlet);
            }
            LayerKind::ScaledFichera => {
                bc_map.insert(TAG_INNER.into(), BcKind::Dirichlet);
                bc_map.insert(TAG_OUTER.into(), BcKind::Neumann);
            }
        }
        Self {
            kind,
            arm_length,
            subdivision_level: level,
            bc_map,
        }
    }

    pub fn fichera(arm_length: f64, level: usize, truncation: Truncation) -> Self {
        Self::new(LayerKind::Fichera, arm_length, level, truncation)
    }

    pub fn scaled(arm_length: f64, level: usize, truncation: Truncation) -> Self {
        Self::new(LayerKind::ScaledFichera, arm_length, level, truncation)
    }

    /// Exact volume of the truncated layer.
    pub fn volume(&self) -> f64 {
        let r = self.arm_length;
        match self.kind {
            LayerKind::Fichera => (r + 1.0).powi(3) - r.powi(3),
            LayerKind::ScaledFichera => ((2.0 * r + 1.0).powi(3) - (2.0 * r).powi(3)) / 8.0,
        }
    }
}

/// Geometric refinement toward a corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradingSpec {
    pub layers: usize,
    pub ratio: f64,
    pub center: [f64; 2],
}

impl GradingSpec {
    pub fn new(layers: usize, ratio: f64) -> Self {
        Self {
            layers,
            ratio,
            center: [0.0, 0.0],
        }
    }

    pub fn uniform() -> Self {
        Self::new(0, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidGrading(format!(
                "ratio must lie in (0,1), got {}",
                self.ratio
            )));
        }
        if self.center != [0.0, 0.0] {
            return Err(Error::InvalidGrading(
                "refinement must accumulate at the nonconvex corner (0,0)".into(),
            ));
        }
        Ok(())
    }
}

impl Default for GradingSpec {
    fn default() -> Self {
        Self::new(4, 0.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bc_maps() {
        let g = Geometry2D::broken(3.0, Truncation::Mix);
        assert_eq!(g.bc_map[TAG_SIGMA], BcKind::Neumann);
        assert_eq!(g.bc_map[TAG_WALL], BcKind::Dirichlet);
        let s = Geometry2D::scaled(3.0, Truncation::Dir);
        assert_eq!(s.width, 0.5);
        assert_eq!(s.bc_map[TAG_OUTER], BcKind::Neumann);
        assert_eq!(s.bc_map[TAG_SIGMA], BcKind::Dirichlet);
    }

    #[test]
    fn measures() {
        assert_eq!(Geometry2D::broken(4.0, Truncation::Dir).area(), 9.0);
        assert_eq!(Geometry3D::fichera(4.0, 1, Truncation::Dir).volume(), 61.0);
        assert_eq!(
            Geometry3D::scaled(2.0, 1, Truncation::Dir).volume(),
            61.0 / 8.0
        );
    }

    #[test]
    fn validation() {
        assert!(Geometry2D::broken(0.0, Truncation::Dir).validate().is_err());
        assert!(Geometry2D::broken(-0.5, Truncation::Dir)
            .validate()
            .is_err());
        assert!(GradingSpec::new(4, 1.0).validate().is_err());
        assert!(GradingSpec::new(4, 0.0).validate().is_err());
        assert!(GradingSpec::new(4, 0.1).validate().is_ok());
    }
}
