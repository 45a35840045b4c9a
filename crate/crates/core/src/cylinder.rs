//! Points of the cylinder `R x R/Z`, circle arithmetic, the two-dimensional
//! solvable group `S = (R^2, *)`, and reduction of an induced system to the
//! canonical form `x' = u, y' = e^x - 1`.
//!
//! The circle coordinate is measured in full turns and always represented in
//! `[0, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Maps `y` to its representative in `[0, 1)`.
pub fn wrap(y: f64) -> Result<f64> {
    ensure_finite("circle coordinate", y)?;
    Ok(wrap_unchecked(y))
}

#[inline]
pub(crate) fn wrap_unchecked(y: f64) -> f64 {
    let r = y - y.floor();
    // y - floor(y) rounds up to exactly 1.0 for tiny negative y.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `y1 - y2` in `[0, 1)`.
pub fn circle_diff(y1: f64, y2: f64) -> Result<f64> {
    ensure_finite("circle coordinate", y1)?;
    ensure_finite("circle coordinate", y2)?;
    Ok(wrap_unchecked(y1 - y2))
}

/// Symmetric distance on the circle, in `[0, 0.5]`.
pub fn circle_distance(y1: f64, y2: f64) -> f64 {
    let d = wrap_unchecked(y1 - y2);
    d.min(1.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub x: f64,
    pub y: f64,
}

impl CylinderPoint {
    /// Builds a point, wrapping `y` onto the circle.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        ensure_finite("fiber coordinate x", x)?;
        Ok(Self { x, y: wrap(y)? })
    }

    pub fn origin() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    /// Circle distance between the `y` coordinates, ignoring `x`.
    pub fn fiber_distance(&self, other: &CylinderPoint) -> f64 {
        circle_distance(self.y, other.y)
    }
}

/// Canonical system parameters: control set `[-rho, rho]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    rho: f64,
}

impl SystemParams {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParam(format!(
                "rho must be positive and finite, got {rho}"
            )));
        }
        Ok(Self { rho })
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Checks `|u| <= rho`.
    pub fn check_admissible(&self, u: f64) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::NonFinite {
                what: "control",
                value: u,
            });
        }
        if u.abs() > self.rho {
            return Err(Error::Inadmissible { u, rho: self.rho });
        }
        Ok(())
    }
}

/// Parameters of a system on the cylinder induced by a linear system on `S`:
/// `x' = u alpha`, `y' = (e^x - 1) a + u e^x beta`, `u` in `[-rho, rho]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InducedSystemParams {
    pub alpha: f64,
    pub beta: f64,
    pub a_param: f64,
    pub rho: f64,
}

/// Lie algebra rank condition for the induced system: `a * alpha != 0`.
pub fn larc_holds(p: &InducedSystemParams) -> bool {
    p.a_param * p.alpha != 0.0
}

/// Reduces an induced system to the canonical form.
///
/// The conjugating diffeomorphism keeps `x` and absorbs `beta` and `a` into
/// the circle coordinate, so the canonical dynamics only retain the range of
/// the x-velocity, `[-|alpha| rho, |alpha| rho]`.
pub fn normalize_system(p: &InducedSystemParams) -> Result<SystemParams> {
    for (what, v) in [
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("a", p.a_param),
        ("rho", p.rho),
    ] {
        if !v.is_finite() {
            return Err(Error::InvalidParam(format!(
                "{what} must be finite, got {v}"
            )));
        }
    }
    if !larc_holds(p) {
        let failed = match (p.a_param == 0.0, p.alpha == 0.0) {
            (true, true) => "a = 0 and alpha = 0",
            (true, false) => "a = 0",
            _ => "alpha = 0",
        };
        return Err(Error::Larc(format!(
            "requires a * alpha != 0, but {failed}"
        )));
    }
    SystemParams::new(p.alpha.abs() * p.rho)
}

/// Element of the solvable group `S = (R^2, *)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub z: f64,
    pub w: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { z: 0.0, w: 0.0 };

    pub fn new(z: f64, w: f64) -> Result<Self> {
        ensure_finite("group coordinate z", z)?;
        ensure_finite("group coordinate w", w)?;
        Ok(Self { z, w })
    }
}

/// `(z1, w1) * (z2, w2) = (z1 + z2, w1 + e^{z1} w2)`.
pub fn group_product(g1: GroupElement, g2: GroupElement) -> Result<GroupElement> {
    let scale = g1.z.exp();
    let z = g1.z + g2.z;
    let w = g1.w + scale * g2.w;
    if !(scale.is_finite() && z.is_finite() && w.is_finite()) {
        return Err(Error::Range(format!(
            "group product overflows for z1 = {}",
            g1.z
        )));
    }
    Ok(GroupElement { z, w })
}
