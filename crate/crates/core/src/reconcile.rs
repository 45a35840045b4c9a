//! Minimal times computed through the race functions `f` and `g`, for
//! comparison with the flow-derived planner.
//!
//! With `a = delta / 2`, the dip crossing at target 0 is `f^-1(e^{x_min})`.
//! The hump crossing at target 1 is `g^-1(e^{x_max})` only when `g` carries
//! the constant `1/2`; the race form with constant `1` solves `D_G = 2` and
//! over-estimates the time whenever the hump plan is optimal.

use crate::error::Result;
use crate::switching::{f_inverse, g_flow_inverse, g_inverse, OffsetData};
use crate::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceConstant {
    /// `g(t) = rho (1 + t - a) / (e^{rho t} - 1)`, as in the race formulation.
    Verbatim,
    /// `rho (1/2 + t - a) / (e^{rho t} - 1)`, consistent with the flows.
    FlowConsistent,
}

/// `tau + 2 min(f^-1(e^{x_min}), g^-1(e^{x_max}))`, or `tau` when `delta = 0`.
pub fn race_time(off: &OffsetData, params: &SystemParams, constant: RaceConstant) -> Result<f64> {
    if off.delta == 0.0 {
        return Ok(off.tau);
    }
    let a = 0.5 * off.delta;
    let dip = f_inverse(off.x_min.exp(), a, params)?;
    let hump = match constant {
        RaceConstant::Verbatim => g_inverse(off.x_max.exp(), a, params)?,
        RaceConstant::FlowConsistent => g_flow_inverse(off.x_max.exp(), a, params)?,
    };
    Ok(off.tau + 2.0 * dip.min(hump))
}
