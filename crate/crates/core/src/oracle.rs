//! Brute-force minimal-time estimator over bang-bang schedules.
//!
//! A schedule with `k` switches and first control `s rho` has `k + 1`
//! segments of alternating sign. Reaching the target fiber fixes the time
//! spent at each sign: `P - N = s (x1 - x0) / rho` and `P + N = T`. The oracle
//! steps the total time `T` over the grid `|x1 - x0| / rho + j h` and, for
//! every way of splitting `P` and `N` among their segments on a grid of
//! `shape_divisions` parts, tracks the unwrapped circle mismatch with the
//! target. A schedule family hits the target where that mismatch crosses an
//! integer between two grid times; the crossing is then bracketed and bisected
//! with exact flows. The smallest such time over all families is returned.
//!
//! None of this uses the dip/hump analysis of the planner.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cylinder::{circle_distance, CylinderPoint, SystemParams};
use crate::error::{Error, Result};
use crate::flow::{advance, ControlSchedule, Segment};
use crate::fmt::sig;
use crate::planner::{lower_bound, solve_min_time, PlanDocument};

/// A grid sample closer than this to the target counts as a hit by itself.
const EXACT_HIT: f64 = 1e-9;
const REFINE_ITERATIONS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub max_switches: usize,
    /// Grid step `h` of the total time.
    pub time_step: f64,
    pub horizon: f64,
    /// Largest accepted circle distance at a reported hit.
    pub hit_tolerance: f64,
    /// Grid resolution for splitting equal-sign time among segments when
    /// `max_switches >= 2`.
    pub shape_divisions: usize,
}

impl OracleConfig {
    pub const DEFAULT_STEP: f64 = 1e-3;
    pub const DEFAULT_HIT_TOLERANCE: f64 = 5e-3;
    pub const DEFAULT_SHAPE_DIVISIONS: usize = 16;

    /// `h = 1e-3`, horizon `4 (lower_bound + 4)`, hit tolerance `5e-3`.
    pub fn for_instance(
        p0: CylinderPoint,
        p1: CylinderPoint,
        params: &SystemParams,
        max_switches: usize,
    ) -> Self {
        Self {
            max_switches,
            time_step: Self::DEFAULT_STEP,
            horizon: 4.0 * (lower_bound(p0, p1, params) + 4.0),
            hit_tolerance: Self::DEFAULT_HIT_TOLERANCE,
            shape_divisions: Self::DEFAULT_SHAPE_DIVISIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_step.is_finite() && self.time_step > 0.0) {
            return Err(Error::InvalidParam(format!(
                "time_step must be positive, got {}",
                self.time_step
            )));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.time_step) {
            return Err(Error::InvalidParam(format!(
                "horizon {} must be at least the time step {}",
                self.horizon, self.time_step
            )));
        }
        if !(self.hit_tolerance > 0.0 && self.hit_tolerance < 0.5) {
            return Err(Error::InvalidParam(format!(
                "hit_tolerance must lie in (0, 0.5), got {}",
                self.hit_tolerance
            )));
        }
        if self.shape_divisions == 0 {
            return Err(Error::InvalidParam(
                "shape_divisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub time: f64,
    pub schedule: ControlSchedule,
    pub hit_distance: f64,
}

impl OracleResult {
    pub fn switches(&self) -> usize {
        self.schedule.switch_count()
    }

    pub fn to_document(
        &self,
        from: CylinderPoint,
        to: CylinderPoint,
        params: &SystemParams,
    ) -> PlanDocument {
        PlanDocument {
            rho: params.rho(),
            from,
            to,
            kind: "oracle".to_string(),
            total_time: self.time,
            segments: self.schedule.segments.clone(),
            certificate: None,
            tie: false,
            hit_distance: Some(self.hit_distance),
        }
    }
}

/// One schedule family: fixed switch count, first sign and split fractions.
#[derive(Debug, Clone)]
struct Family {
    first_sign: f64,
    /// Fraction of `P` (resp. `N`) given to each segment of that sign.
    pos_split: Vec<f64>,
    neg_split: Vec<f64>,
}

impl Family {
    fn durations(&self, total: f64, signed_transit: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let along = 0.5 * (total + self.first_sign * signed_transit).max(0.0);
        let against = 0.5 * (total - self.first_sign * signed_transit).max(0.0);
        let n = self.pos_split.len() + self.neg_split.len();
        (0..n).map(move |i| {
            if i % 2 == 0 {
                (along * self.pos_split[i / 2], self.first_sign)
            } else {
                (against * self.neg_split[i / 2], -self.first_sign)
            }
        })
    }

    fn schedule(&self, total: f64, signed_transit: f64, rho: f64) -> ControlSchedule {
        ControlSchedule {
            segments: self
                .durations(total, signed_transit)
                .map(|(duration, sign)| Segment {
                    duration,
                    u: sign * rho,
                })
                .collect(),
        }
    }
}

/// All ways of writing `units` as an ordered sum of `parts` nonnegative
/// integers, as fractions of `units`.
fn compositions(parts: usize, units: usize) -> Vec<Vec<f64>> {
    fn rec(
        parts: usize,
        left: usize,
        units: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<f64>>,
    ) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / units as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(parts - 1, left - c, units, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, units, units, &mut Vec::new(), &mut out);
    out
}

fn families(max_switches: usize, divisions: usize) -> Vec<Family> {
    let mut out = Vec::new();
    for k in 1..=max_switches.max(1) {
        let segments = k + 1;
        let pos = segments.div_ceil(2);
        let neg = segments / 2;
        let pos_splits = if pos == 1 {
            vec![vec![1.0]]
        } else {
            compositions(pos, divisions)
        };
        let neg_splits = if neg == 1 {
            vec![vec![1.0]]
        } else {
            compositions(neg, divisions)
        };
        for first_sign in [1.0, -1.0] {
            for ps in &pos_splits {
                for ns in &neg_splits {
                    out.push(Family {
                        first_sign,
                        pos_split: ps.clone(),
                        neg_split: ns.clone(),
                    });
                }
            }
        }
    }
    out
}

struct Problem {
    p0: CylinderPoint,
    target_y: f64,
    signed_transit: f64,
    rho: f64,
}

impl Problem {
    /// Unwrapped `y_end - y1` and the final `x`.
    fn residual(&self, fam: &Family, total: f64) -> Result<(f64, f64)> {
        let (mut x, mut y) = (self.p0.x, self.p0.y);
        for (d, sign) in fam.durations(total, self.signed_transit) {
            (x, y) = advance(x, y, sign * self.rho, d)?;
        }
        Ok((y - self.target_y, x))
    }

    /// Bisects a bracket `[lo, hi]` on which the residual crosses `level`.
    fn refine(&self, fam: &Family, mut lo: f64, mut hi: f64, level: f64) -> Result<f64> {
        let g = |t: f64| -> Result<f64> { Ok(self.residual(fam, t)?.0 - level) };
        let g_lo = g(lo)?;
        if g_lo == 0.0 {
            return Ok(lo);
        }
        for _ in 0..REFINE_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g_mid = g(mid)?;
            if g_mid == 0.0 {
                return Ok(mid);
            }
            if g_mid.signum() == g_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// First integer crossed when moving from `from` to `to` (inclusive of `to`).
fn crossed_level(from: f64, to: f64) -> Option<f64> {
    if to > from {
        let n = from.floor() + 1.0;
        (n <= to).then_some(n)
    } else if to < from {
        let n = from.ceil() - 1.0;
        (n >= to).then_some(n)
    } else {
        None
    }
}

/// Smallest grid-resolved time of a bang-bang schedule with at most
/// `cfg.max_switches` switches steering `p0` to `p1`.
pub fn oracle_min_time(
    p0: CylinderPoint,
    p1: CylinderPoint,
    params: &SystemParams,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    cfg.validate()?;
    let rho = params.rho();
    let problem = Problem {
        p0,
        target_y: p1.y,
        signed_transit: (p1.x - p0.x) / rho,
        rho,
    };
    let t0 = problem.signed_transit.abs();
    let fams = families(cfg.max_switches, cfg.shape_divisions);

    let direct_sign = if problem.signed_transit >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let direct = Family {
        first_sign: direct_sign,
        pos_split: vec![1.0],
        neg_split: vec![1.0],
    };
    let (r0, _) = problem.residual(&direct, t0)?;
    if circle_distance(r0, 0.0) <= EXACT_HIT {
        return finish(&problem, &direct, t0, p1, cfg);
    }

    let mut prev: Vec<f64> = vec![r0; fams.len()];
    let steps = ((cfg.horizon - t0) / cfg.time_step).floor() as usize;
    for j in 1..=steps {
        let t_prev = t0 + (j - 1) as f64 * cfg.time_step;
        let t = t0 + j as f64 * cfg.time_step;
        let mut best: Option<(f64, usize)> = None;
        for (i, fam) in fams.iter().enumerate() {
            let (r, _) = problem.residual(fam, t)?;
            let r_prev = prev[i];
            prev[i] = r;
            let level = if circle_distance(r, 0.0) <= EXACT_HIT {
                Some(r.round())
            } else {
                crossed_level(r_prev, r)
            };
            if let Some(level) = level {
                let tc = problem.refine(fam, t_prev, t, level)?;
                if best.map_or(true, |(bt, _)| tc < bt) {
                    best = Some((tc, i));
                }
            }
        }
        if let Some((tc, i)) = best {
            return finish(&problem, &fams[i], tc, p1, cfg);
        }
    }
    Err(Error::NotFound(format!(
        "no schedule with at most {} switches reaches the target within horizon {}",
        cfg.max_switches, cfg.horizon
    )))
}

fn finish(
    problem: &Problem,
    fam: &Family,
    time: f64,
    p1: CylinderPoint,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    let (r, x) = problem.residual(fam, time)?;
    let hit_distance = circle_distance(r, 0.0);
    if hit_distance > cfg.hit_tolerance || (x - p1.x).abs() > problem.rho * cfg.time_step {
        return Err(Error::NotFound(format!(
            "refined hit at t = {time} misses the target by {hit_distance:e} (x error {:e})",
            (x - p1.x).abs()
        )));
    }
    let mut schedule = fam.schedule(time, problem.signed_transit, problem.rho);
    schedule.segments.retain(|s| s.duration > 0.0);
    Ok(OracleResult {
        time,
        schedule,
        hit_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub x: f64,
    pub y: f64,
    pub time: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Minimal times from `p0` to every target on an `n x m` grid, row-major
/// with `x` as the outer index.
pub fn sweep(
    p0: CylinderPoint,
    params: &SystemParams,
    x_range: (f64, f64, usize),
    y_range: (f64, f64, usize),
) -> Result<Vec<SweepCell>> {
    if x_range.2 < 2 || y_range.2 < 2 {
        return Err(Error::InvalidParam(
            "sweep needs at least 2 samples per axis".into(),
        ));
    }
    let mut out = Vec::with_capacity(x_range.2 * y_range.2);
    for x in linspace(x_range.0, x_range.1, x_range.2) {
        for y in linspace(y_range.0, y_range.1, y_range.2) {
            let target = CylinderPoint::new(x, y)?;
            let time = solve_min_time(p0, target, params)?.total_time();
            out.push(SweepCell {
                x,
                y: target.y,
                time,
            });
        }
    }
    Ok(out)
}

/// CSV with header `x,y,time`.
pub fn write_sweep_csv<W: Write>(mut w: W, cells: &[SweepCell]) -> std::io::Result<()> {
    writeln!(w, "x,y,time")?;
    for c in cells {
        writeln!(w, "{},{},{}", sig(c.x, 17), sig(c.y, 17), sig(c.time, 17))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rho(r: f64) -> SystemParams {
        SystemParams::new(r).unwrap()
    }

    fn pt(x: f64, y: f64) -> CylinderPoint {
        CylinderPoint::new(x, y).unwrap()
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(2, 4).len(), 5);
        assert_eq!(compositions(3, 4).len(), 15);
        assert!(compositions(3, 4)
            .iter()
            .all(|c| (c.iter().sum::<f64>() - 1.0).abs() < 1e-15));
        assert_eq!(families(1, 16).len(), 2);
        assert_eq!(families(2, 16).len(), 2 + 2 * 17);
        assert_eq!(families(3, 16).len(), 2 + 2 * 17 + 2 * 17 * 17);
    }

    #[test]
    fn crossed_levels() {
        assert_eq!(crossed_level(0.2, 1.3), Some(1.0));
        assert_eq!(crossed_level(0.2, 0.9), None);
        assert_eq!(crossed_level(0.2, -0.1), Some(0.0));
        assert_eq!(crossed_level(-0.5, -2.5), Some(-1.0));
        assert_eq!(crossed_level(0.5, 1.0), Some(1.0));
    }

    #[test]
    fn same_point_is_zero() {
        let p = pt(0.3, 0.6);
        let cfg = OracleConfig::for_instance(p, p, &rho(1.0), 1);
        let r = oracle_min_time(p, p, &rho(1.0), &cfg).unwrap();
        assert_eq!(r.time, 0.0);
    }

    #[test]
    fn direct_instance() {
        let (p0, p1) = (pt(0.0, 0.0), pt(1.0, E - 2.0));
        let cfg = OracleConfig::for_instance(p0, p1, &rho(1.0), 1);
        let r = oracle_min_time(p0, p1, &rho(1.0), &cfg).unwrap();
        assert!((r.time - 1.0).abs() <= 2e-3, "{}", r.time);
    }

    #[test]
    fn same_fiber_instance_single_switch() {
        let (p0, p1) = (pt(0.0, 0.0), pt(0.0, 0.5));
        let cfg = OracleConfig::for_instance(p0, p1, &rho(1.0), 3);
        let r = oracle_min_time(p0, p1, &rho(1.0), &cfg).unwrap();
        let planner = solve_min_time(p0, p1, &rho(1.0)).unwrap().total_time();
        assert!((r.time - planner).abs() <= 4e-3, "{} vs {planner}", r.time);
        assert_eq!(r.switches(), 1);
        assert!(r.hit_distance <= cfg.hit_tolerance);
    }

    #[test]
    fn config_validation() {
        let base = OracleConfig::for_instance(pt(0.0, 0.0), pt(0.0, 0.5), &rho(1.0), 1);
        assert!(OracleConfig {
            time_step: 0.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(OracleConfig {
            horizon: 1e-4,
            ..base
        }
        .validate()
        .is_err());
        assert!(OracleConfig {
            hit_tolerance: 0.5,
            ..base
        }
        .validate()
        .is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn short_horizon_reports_not_found() {
        let (p0, p1) = (pt(0.0, 0.0), pt(0.0, 0.5));
        let cfg = OracleConfig {
            horizon: 0.5,
            ..OracleConfig::for_instance(p0, p1, &rho(1.0), 1)
        };
        assert!(matches!(
            oracle_min_time(p0, p1, &rho(1.0), &cfg),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn sweep_grid() {
        let p0 = pt(0.0, 0.0);
        let cells = sweep(p0, &rho(1.0), (-1.0, 1.0, 3), (0.0, 0.5, 4)).unwrap();
        assert_eq!(cells.len(), 12);
        let origin = cells.iter().find(|c| c.x == 0.0 && c.y == 0.0).unwrap();
        assert_eq!(origin.time, 0.0);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &cells).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 13);
        assert!(sweep(p0, &rho(1.0), (0.0, 1.0, 1), (0.0, 1.0, 2)).is_err());
    }
}
