//! Switching analysis for one-switch bang-bang plans.
//!
//! Let `tau = |x1 - x0| / rho` be the direct transit time and `delta` the
//! circle offset between the direct endpoint and the target. A one-switch plan
//! of total time `tau + 2m` either makes an excursion of depth `rho m` below
//! `x_min` (a *dip*) or above `x_max` (a *hump*). Relative to the direct
//! endpoint its circle coordinate moves by
//!
//! ```text
//! dip:  D_F(m) = delta + 2 e^{x_min} (1 - e^{-rho m}) / rho - 2m
//! hump: D_G(m) = delta + 2 e^{x_max} (e^{rho m} - 1) / rho - 2m
//! ```
//!
//! and the plan reaches the target exactly when the discrepancy is an integer.
//! Each function has at most one critical point, so the first integer crossing
//! is found on a known monotone branch.
//!
//! The rescaled race functions `F(t, x) = a + e^x (1 - e^{-rho t}) / rho - t`,
//! `G(t, x) = a + e^x (e^{rho t} - 1) / rho - t` and their companions
//! `f(t) = rho (t - a) / (1 - e^{-rho t})`, `g(t) = rho (1 + t - a) / (e^{rho t} - 1)`
//! are provided as well. Note `g` as written targets `G = 1`, i.e. `D_G = 2`;
//! [`g_flow_eval`] is the variant whose inverse agrees with `D_G = 1`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cylinder::{circle_diff, CylinderPoint, SystemParams};
use crate::error::{Error, Result};
use crate::flow::flow_constant;
use crate::fmt::sig;
use crate::roots::solve_bracketed;

/// Offsets below this (in circle distance) are treated as an exact hit.
pub const DELTA_ZERO: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetData {
    pub tau: f64,
    pub delta: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub u_dir: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingKind {
    Dip,
    Hump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Descending,
    Ascending,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingResult {
    pub kind: CrossingKind,
    /// Half of the time spent beyond `tau`.
    pub m: f64,
    pub target: i32,
    pub branch: Branch,
}

/// Direct transit data between the fibers of `p0` and `p1`.
///
/// `u_dir` is `+rho` when `x1 >= x0`. `delta` is the circle difference between
/// the direct endpoint and `p1`; it is set to exactly 0 when the two are
/// closer than [`DELTA_ZERO`].
pub fn fiber_offset(
    p0: CylinderPoint,
    p1: CylinderPoint,
    params: &SystemParams,
) -> Result<OffsetData> {
    let rho = params.rho();
    let u_dir = if p1.x >= p0.x { rho } else { -rho };
    let tau = (p1.x - p0.x).abs() / rho;
    let q = flow_constant(tau, p0, u_dir, params)?;
    let mut delta = circle_diff(q.y, p1.y)?;
    if delta.min(1.0 - delta) < DELTA_ZERO {
        delta = 0.0;
    }
    Ok(OffsetData {
        tau,
        delta,
        x_min: p0.x.min(p1.x),
        x_max: p0.x.max(p1.x),
        u_dir,
    })
}

pub fn dip_discrepancy(m: f64, off: &OffsetData, params: &SystemParams) -> f64 {
    let rho = params.rho();
    off.delta - 2.0 * off.x_min.exp() * (-rho * m).exp_m1() / rho - 2.0 * m
}

pub fn hump_discrepancy(m: f64, off: &OffsetData, params: &SystemParams) -> Result<f64> {
    let v = hump_unchecked(m, off, params.rho());
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!(
            "hump discrepancy overflows at m = {m}"
        )))
    }
}

fn hump_unchecked(m: f64, off: &OffsetData, rho: f64) -> f64 {
    off.delta + 2.0 * off.x_max.exp() * (rho * m).exp_m1() / rho - 2.0 * m
}

pub fn discrepancy(
    kind: CrossingKind,
    m: f64,
    off: &OffsetData,
    params: &SystemParams,
) -> Result<f64> {
    match kind {
        CrossingKind::Dip => Ok(dip_discrepancy(m, off, params)),
        CrossingKind::Hump => hump_discrepancy(m, off, params),
    }
}

/// Smallest `m >= 0` at which the dip or hump discrepancy is an integer.
pub fn first_integer_crossing(
    kind: CrossingKind,
    off: &OffsetData,
    params: &SystemParams,
) -> Result<CrossingResult> {
    if !(0.0..1.0).contains(&off.delta) {
        return Err(Error::InvalidParam(format!(
            "delta must lie in [0, 1), got {}",
            off.delta
        )));
    }
    let rho = params.rho();
    if off.delta == 0.0 {
        let rising = match kind {
            CrossingKind::Dip => off.x_min > 0.0,
            CrossingKind::Hump => off.x_max >= 0.0,
        };
        let branch = if rising {
            Branch::Ascending
        } else {
            Branch::Descending
        };
        return Ok(CrossingResult {
            kind,
            m: 0.0,
            target: 0,
            branch,
        });
    }

    let result = match kind {
        CrossingKind::Dip => {
            let d = |m: f64| dip_discrepancy(m, off, params);
            let dd = |m: f64| 2.0 * ((off.x_min - rho * m).exp() - 1.0);
            // D_F(m) < delta + 2 e^{x_min} / rho - 2m, so this end is negative.
            let hi = 0.5 * (off.delta + 2.0 * off.x_min.exp() / rho);
            let peak = if off.x_min > 0.0 {
                off.x_min / rho
            } else {
                0.0
            };
            if off.x_min > 0.0 && d(peak) >= 1.0 {
                let m = solve_bracketed(|m| d(m) - 1.0, dd, 0.0, peak)?;
                CrossingResult {
                    kind,
                    m,
                    target: 1,
                    branch: Branch::Ascending,
                }
            } else {
                let m = solve_bracketed(d, dd, peak, hi.max(peak))?;
                CrossingResult {
                    kind,
                    m,
                    target: 0,
                    branch: Branch::Descending,
                }
            }
        }
        CrossingKind::Hump => {
            let d = |m: f64| hump_unchecked(m, off, rho);
            let dd = |m: f64| 2.0 * ((off.x_max + rho * m).exp() - 1.0);
            let trough = if off.x_max < 0.0 {
                -off.x_max / rho
            } else {
                0.0
            };
            if off.x_max < 0.0 && d(trough) <= 0.0 {
                let m = solve_bracketed(d, dd, 0.0, trough)?;
                CrossingResult {
                    kind,
                    m,
                    target: 0,
                    branch: Branch::Descending,
                }
            } else {
                let mut hi = trough.max(1.0);
                while d(hi) < 1.0 {
                    hi *= 2.0;
                    if !d(hi).is_finite() {
                        return Err(Error::Range(
                            "hump discrepancy overflows before reaching 1".into(),
                        ));
                    }
                }
                let m = solve_bracketed(|m| d(m) - 1.0, dd, trough, hi)?;
                CrossingResult {
                    kind,
                    m,
                    target: 1,
                    branch: Branch::Ascending,
                }
            }
        }
    };
    Ok(result)
}

/// Both crossings, dip first.
pub fn crossings(
    off: &OffsetData,
    params: &SystemParams,
) -> Result<(CrossingResult, CrossingResult)> {
    Ok((
        first_integer_crossing(CrossingKind::Dip, off, params)?,
        first_integer_crossing(CrossingKind::Hump, off, params)?,
    ))
}

fn check_race_a(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 && a < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "race offset a must satisfy 0 < 2a < 1, got a = {a}"
        )))
    }
}

fn check_positive_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "t must be positive (pole at t = 0), got {t}"
        )))
    }
}

/// Rescaled dip race function `F(t, x) = a + e^x (1 - e^{-rho t}) / rho - t`.
pub fn race_f(t: f64, x: f64, a: f64, params: &SystemParams) -> f64 {
    let rho = params.rho();
    a - x.exp() * (-rho * t).exp_m1() / rho - t
}

/// Rescaled hump race function `G(t, x) = a + e^x (e^{rho t} - 1) / rho - t`.
pub fn race_g(t: f64, x: f64, a: f64, params: &SystemParams) -> f64 {
    let rho = params.rho();
    a + x.exp() * (rho * t).exp_m1() / rho - t
}

/// `f(t) = rho (t - a) / (1 - e^{-rho t})`; `F(t, x) = 0` iff `e^x = f(t)`.
pub fn f_eval(t: f64, a: f64, params: &SystemParams) -> Result<f64> {
    check_race_a(a)?;
    check_positive_t(t)?;
    Ok(f_raw(t, a, params.rho()))
}

fn f_raw(t: f64, a: f64, rho: f64) -> f64 {
    -rho * (t - a) / (-rho * t).exp_m1()
}

fn f_deriv(t: f64, a: f64, rho: f64) -> f64 {
    let den = -(-rho * t).exp_m1();
    rho * (den - (t - a) * rho * (-rho * t).exp()) / (den * den)
}

/// `g(t) = rho (1 + t - a) / (e^{rho t} - 1)`, with the constant exactly as in
/// the race formulation (it corresponds to `G = 1`).
pub fn g_eval(t: f64, a: f64, params: &SystemParams) -> Result<f64> {
    check_race_a(a)?;
    check_positive_t(t)?;
    Ok(g_raw(t, a, 1.0, params.rho()))
}

/// `rho (1/2 + t - a) / (e^{rho t} - 1)`: `e^x` equals this iff the flow
/// discrepancy `D_G` with `delta = 2a` and `x_max = x` equals 1.
pub fn g_flow_eval(t: f64, a: f64, params: &SystemParams) -> Result<f64> {
    check_race_a(a)?;
    check_positive_t(t)?;
    Ok(g_raw(t, a, 0.5, params.rho()))
}

fn g_raw(t: f64, a: f64, k: f64, rho: f64) -> f64 {
    rho * (k + t - a) / (rho * t).exp_m1()
}

fn g_deriv(t: f64, a: f64, k: f64, rho: f64) -> f64 {
    let den = (rho * t).exp_m1();
    rho * (den - (k + t - a) * rho * (rho * t).exp()) / (den * den)
}

fn check_level(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "inverse defined for positive finite values only, got {c}"
        )))
    }
}

/// Inverse of `f` on `(a, inf)`.
pub fn f_inverse(c: f64, a: f64, params: &SystemParams) -> Result<f64> {
    check_race_a(a)?;
    check_level(c)?;
    let rho = params.rho();
    let mut hi = (2.0 * a).max(1.0);
    while f_raw(hi, a, rho) < c {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Range(format!("f never reaches {c}")));
        }
    }
    solve_bracketed(|t| f_raw(t, a, rho) - c, |t| f_deriv(t, a, rho), a, hi)
}

/// Inverse of `g` on `(0, inf)`.
pub fn g_inverse(c: f64, a: f64, params: &SystemParams) -> Result<f64> {
    check_race_a(a)?;
    check_level(c)?;
    decreasing_inverse(
        c,
        |t| g_raw(t, a, 1.0, params.rho()),
        |t| g_deriv(t, a, 1.0, params.rho()),
    )
}

/// Inverse of [`g_flow_eval`] on `(0, inf)`.
pub fn g_flow_inverse(c: f64, a: f64, params: &SystemParams) -> Result<f64> {
    check_race_a(a)?;
    check_level(c)?;
    decreasing_inverse(
        c,
        |t| g_raw(t, a, 0.5, params.rho()),
        |t| g_deriv(t, a, 0.5, params.rho()),
    )
}

fn decreasing_inverse<G, D>(c: f64, g: G, dg: D) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = 1.0;
    while g(lo) < c {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Range(format!("value {c} above the range of g")));
        }
    }
    let mut hi = 1.0;
    while g(hi) > c {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Range(format!(
                "value {c} below the representable range of g"
            )));
        }
    }
    solve_bracketed(|t| g(t) - c, dg, lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceRow {
    pub t: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    #[serde(rename = "G")]
    pub big_g: f64,
    pub f: f64,
    pub g: f64,
}

/// Samples `F(t, x0)`, `G(t, x1)`, `f(t)`, `g(t)` on a uniform grid of
/// `(0, t_max]`, with `t_max = 2 max(f^-1(e^x0), g^-1(e^x1), 1)`.
pub fn race_profile(
    a: f64,
    x0: f64,
    x1: f64,
    params: &SystemParams,
    grid: usize,
) -> Result<Vec<RaceRow>> {
    check_race_a(a)?;
    if grid < 2 {
        return Err(Error::InvalidParam(format!(
            "grid must be at least 2, got {grid}"
        )));
    }
    let t_f = f_inverse(x0.exp(), a, params)?;
    let t_g = g_inverse(x1.exp(), a, params)?;
    let t_max = 2.0 * t_f.max(t_g).max(1.0);
    (1..=grid)
        .map(|i| {
            let t = t_max * i as f64 / grid as f64;
            Ok(RaceRow {
                t,
                big_f: race_f(t, x0, a, params),
                big_g: race_g(t, x1, a, params),
                f: f_eval(t, a, params)?,
                g: g_eval(t, a, params)?,
            })
        })
        .collect()
}

/// CSV with header `t,F,G,f,g`.
pub fn write_race_csv<W: Write>(mut w: W, rows: &[RaceRow]) -> std::io::Result<()> {
    writeln!(w, "t,F,G,f,g")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            sig(r.t, 17),
            sig(r.big_f, 17),
            sig(r.big_g, 17),
            sig(r.f, 17),
            sig(r.g, 17)
        )?;
    }
    Ok(())
}
