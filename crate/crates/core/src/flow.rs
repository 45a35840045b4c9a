//! Closed-form propagation of `x' = u, y' = e^x - 1` under piecewise-constant
//! controls, and a fixed-step RK4 integrator kept only as an independent check.
//!
//! Within a schedule the circle coordinate is carried unwrapped and wrapped
//! only when a point is handed back to the caller.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cylinder::{wrap_unchecked, CylinderPoint, SystemParams};
use crate::error::{ensure_finite, Error, Result};
use crate::fmt::sig;

/// Below this value of `|u t|` the u != 0 formula switches to a series.
const SMALL_UT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub u: f64,
}

impl Segment {
    pub fn new(duration: f64, u: f64) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "segment duration must be finite and nonnegative, got {duration}"
            )));
        }
        ensure_finite("control", u)?;
        Ok(Self { duration, u })
    }
}

/// Open-loop input: segments applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            Segment::new(s.duration, s.u)?;
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Number of sign changes between consecutive nonzero-length segments.
    pub fn switch_count(&self) -> usize {
        let signs: Vec<f64> = self
            .segments
            .iter()
            .filter(|s| s.duration > 0.0)
            .map(|s| s.u.signum())
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn check_admissible(&self, params: &SystemParams) -> Result<()> {
        self.segments
            .iter()
            .try_for_each(|s| params.check_admissible(s.u))
    }
}

/// One sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
}

/// Exact flow on the unwrapped cover `R x R`.
pub(crate) fn advance(x: f64, y: f64, u: f64, t: f64) -> Result<(f64, f64)> {
    let dy = if u == 0.0 {
        t * x.exp_m1()
    } else {
        let ut = u * t;
        let ex = x.exp();
        let growth = if ut.abs() < SMALL_UT {
            // e^x (e^{ut} - 1) / u = e^x t (1 + ut/2 + (ut)^2/6 + ...)
            ex * t * (1.0 + ut / 2.0 + ut * ut / 6.0)
        } else {
            ex * ut.exp_m1() / u
        };
        growth - t
    };
    let x_end = x + u * t;
    if !dy.is_finite() || !x_end.exp().is_finite() {
        return Err(Error::Range(format!(
            "flow overflows: x = {x}, u = {u}, t = {t}"
        )));
    }
    Ok((x_end, y + dy))
}

/// `∫_0^t e^{x + u s} ds`, the adjoint increment along one bang arc.
pub(crate) fn exp_integral(x: f64, u: f64, t: f64) -> f64 {
    let ut = u * t;
    if ut.abs() < SMALL_UT {
        x.exp() * t * (1.0 + ut / 2.0 + ut * ut / 6.0)
    } else {
        x.exp() * ut.exp_m1() / u
    }
}

/// Flows `p` for time `t` under the constant control `u`.
///
/// Negative `t` is accepted and runs the flow backwards; schedules never
/// contain negative durations.
pub fn flow_constant(
    t: f64,
    p: CylinderPoint,
    u: f64,
    params: &SystemParams,
) -> Result<CylinderPoint> {
    ensure_finite("time", t)?;
    params.check_admissible(u)?;
    let (x, y) = advance(p.x, p.y, u, t)?;
    Ok(CylinderPoint {
        x,
        y: wrap_unchecked(y),
    })
}

/// Unwrapped state at every segment boundary, starting with `p`.
pub(crate) fn boundary_states(
    sched: &ControlSchedule,
    p: CylinderPoint,
    params: &SystemParams,
) -> Result<Vec<(f64, f64)>> {
    sched.check_admissible(params)?;
    let mut states = Vec::with_capacity(sched.segments.len() + 1);
    let mut state = (p.x, p.y);
    states.push(state);
    for s in &sched.segments {
        state = advance(state.0, state.1, s.u, s.duration)?;
        states.push(state);
    }
    Ok(states)
}

/// Composes the exact flows of every segment.
pub fn flow_schedule(
    sched: &ControlSchedule,
    p: CylinderPoint,
    params: &SystemParams,
) -> Result<CylinderPoint> {
    let (x, y) = flow_schedule_unwrapped(sched, p, params)?;
    Ok(CylinderPoint {
        x,
        y: wrap_unchecked(y),
    })
}

/// Endpoint with `y` left on the universal cover.
pub fn flow_schedule_unwrapped(
    sched: &ControlSchedule,
    p: CylinderPoint,
    params: &SystemParams,
) -> Result<(f64, f64)> {
    sched.check_admissible(params)?;
    sched
        .segments
        .iter()
        .try_fold((p.x, p.y), |(x, y), s| advance(x, y, s.u, s.duration))
}

/// Classical fixed-step RK4. Each segment is cut into steps of `h`, the last
/// one shortened so that segment boundaries fall on step boundaries.
pub fn integrate_rk4(
    sched: &ControlSchedule,
    p: CylinderPoint,
    h: f64,
    params: &SystemParams,
) -> Result<CylinderPoint> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParam(format!(
            "step size must be positive, got {h}"
        )));
    }
    sched.check_admissible(params)?;
    let rhs = |x: f64| x.exp_m1();
    let (mut x, mut y) = (p.x, p.y);
    for s in &sched.segments {
        let steps = (s.duration / h).ceil() as u64;
        let mut elapsed = 0.0;
        for i in 0..steps {
            let dt = if i + 1 == steps {
                s.duration - elapsed
            } else {
                h
            };
            // x' = u is integrated exactly by RK4; only y needs the stages.
            let k1 = rhs(x);
            let k2 = rhs(x + 0.5 * dt * s.u);
            let k4 = rhs(x + dt * s.u);
            y += dt / 6.0 * (k1 + 4.0 * k2 + k4);
            x += dt * s.u;
            elapsed += dt;
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Range("RK4 state overflowed".into()));
        }
    }
    Ok(CylinderPoint {
        x,
        y: wrap_unchecked(y),
    })
}

/// Samples the trajectory at `n_samples` uniform times on `[0, T]`, each by
/// exact flow from the enclosing segment's start.
pub fn trace(
    sched: &ControlSchedule,
    p: CylinderPoint,
    n_samples: usize,
    params: &SystemParams,
) -> Result<Vec<TracePoint>> {
    if n_samples < 2 {
        return Err(Error::InvalidParam(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let states = boundary_states(sched, p, params)?;
    let segs = &sched.segments;
    let total = sched.total_duration();

    let mut starts = Vec::with_capacity(segs.len());
    let mut acc = 0.0;
    for s in segs {
        starts.push(acc);
        acc += s.duration;
    }

    let mut out = Vec::with_capacity(n_samples);
    let mut k = 0usize;
    for i in 0..n_samples {
        let t = if i + 1 == n_samples {
            total
        } else {
            total * i as f64 / (n_samples - 1) as f64
        };
        if segs.is_empty() {
            out.push(TracePoint {
                t,
                x: p.x,
                y: p.y,
                u: 0.0,
            });
            continue;
        }
        // Advance to the segment containing t; boundary times belong to the
        // segment that starts there, except the final endpoint.
        while k + 1 < segs.len() && t >= starts[k] + segs[k].duration {
            k += 1;
        }
        let (x0, y0) = states[k];
        let (x, y) = if i + 1 == n_samples {
            *states.last().unwrap()
        } else {
            advance(x0, y0, segs[k].u, t - starts[k])?
        };
        out.push(TracePoint {
            t,
            x,
            y: wrap_unchecked(y),
            u: segs[k].u,
        });
    }
    Ok(out)
}

/// Writes a trace as CSV with header `t,x,y,u`.
pub fn write_trace_csv<W: Write>(mut w: W, points: &[TracePoint]) -> std::io::Result<()> {
    writeln!(w, "t,x,y,u")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            sig(p.t, 17),
            sig(p.x, 17),
            sig(p.y, 17),
            sig(p.u, 17)
        )?;
    }
    Ok(())
}
