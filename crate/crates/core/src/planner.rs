//! Minimal-time synthesis: candidate plans from the first integer crossings,
//! selection of the optimum (or both, on a tie), and a Pontryagin certificate.

use serde::{Deserialize, Serialize};

use crate::cylinder::{circle_distance, wrap, CylinderPoint, SystemParams};
use crate::error::{Error, Result};
use crate::flow::{advance, exp_integral, flow_schedule, ControlSchedule, Segment};
use crate::switching::{crossings, fiber_offset, CrossingKind, CrossingResult, OffsetData};

/// Two crossings closer than this in `m` are reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-11;
/// Endpoint tolerance (x and circle distance) for feasibility checks.
pub const REACH_TOLERANCE: f64 = 1e-9;
/// Grid size used to sample the Hamiltonian along a plan.
pub const HAMILTONIAN_GRID: usize = 1000;
/// Smallest admissible sampled Hamiltonian.
pub const HAMILTONIAN_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanKind {
    /// Constant control `u_dir` for time `tau`.
    #[serde(rename = "direct")]
    Direct,
    /// Excursion below `x_min`. For `x0 <= x1` the dip comes first; for
    /// `x0 > x1` the direct leg is flown first and the dip happens at `x1`.
    #[serde(rename = "dip-then-direct")]
    Dip,
    /// Excursion above `x_max`. For `x0 <= x1` the hump comes last; for
    /// `x0 > x1` it happens first, at `x0`.
    #[serde(rename = "direct-then-hump")]
    Hump,
}

impl PlanKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanKind::Direct => "direct",
            PlanKind::Dip => "dip-then-direct",
            PlanKind::Hump => "direct-then-hump",
        }
    }
}

impl From<CrossingKind> for PlanKind {
    fn from(k: CrossingKind) -> Self {
        match k {
            CrossingKind::Dip => PlanKind::Dip,
            CrossingKind::Hump => PlanKind::Hump,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub schedule: ControlSchedule,
    pub total_time: f64,
    pub kind: PlanKind,
    /// The target point the plan is meant to reach.
    pub endpoint: CylinderPoint,
    pub crossing: Option<CrossingResult>,
}

impl Plan {
    pub fn switch_time(&self) -> Option<f64> {
        match self.schedule.segments.as_slice() {
            [first, second]
                if first.u != second.u && first.duration > 0.0 && second.duration > 0.0 =>
            {
                Some(first.duration)
            }
            _ => None,
        }
    }
}

/// Output of [`solve_min_time`]: one plan, or two (dip, hump) on a tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub plans: Vec<Plan>,
}

impl Solution {
    pub fn is_tie(&self) -> bool {
        self.plans.len() == 2
    }

    pub fn best(&self) -> &Plan {
        &self.plans[0]
    }

    pub fn total_time(&self) -> f64 {
        self.plans[0].total_time
    }
}

/// Pontryagin data reconstructed along a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub p0: f64,
    pub q0: f64,
    pub switch_time: Option<f64>,
    pub hamiltonian_min: f64,
}

/// `|x1 - x0| / rho`: no admissible control changes fibers faster.
pub fn lower_bound(p0: CylinderPoint, p1: CylinderPoint, params: &SystemParams) -> f64 {
    (p1.x - p0.x).abs() / params.rho()
}

/// Direct plan for an offset with `delta = 0`.
fn direct_plan(off: &OffsetData, p1: CylinderPoint) -> Plan {
    let segments = if off.tau > 0.0 {
        vec![Segment {
            duration: off.tau,
            u: off.u_dir,
        }]
    } else {
        Vec::new()
    };
    Plan {
        schedule: ControlSchedule { segments },
        total_time: off.tau,
        kind: PlanKind::Direct,
        endpoint: p1,
        crossing: None,
    }
}

/// Assembles the one-switch plan realizing a crossing.
pub fn plan_from_crossing(
    crossing: &CrossingResult,
    off: &OffsetData,
    p1: CylinderPoint,
    rho: f64,
) -> Plan {
    let m = crossing.m;
    let long = off.tau + m;
    let ascending = off.u_dir > 0.0;
    let segments = match (crossing.kind, ascending) {
        (CrossingKind::Dip, true) => vec![(m, -rho), (long, rho)],
        (CrossingKind::Dip, false) => vec![(long, -rho), (m, rho)],
        (CrossingKind::Hump, true) => vec![(long, rho), (m, -rho)],
        (CrossingKind::Hump, false) => vec![(m, rho), (long, -rho)],
    };
    Plan {
        schedule: ControlSchedule {
            segments: segments
                .into_iter()
                .map(|(duration, u)| Segment { duration, u })
                .collect(),
        },
        total_time: off.tau + 2.0 * m,
        kind: crossing.kind.into(),
        endpoint: p1,
        crossing: Some(*crossing),
    }
}

/// Checks that the plan's schedule steers `p0` onto its endpoint.
pub fn check_reaches(plan: &Plan, p0: CylinderPoint, params: &SystemParams) -> Result<()> {
    let end = flow_schedule(&plan.schedule, p0, params)?;
    let dx = (end.x - plan.endpoint.x).abs();
    let dy = circle_distance(end.y, plan.endpoint.y);
    if dx > REACH_TOLERANCE || dy > REACH_TOLERANCE {
        return Err(Error::Certificate(format!(
            "schedule ends at ({}, {}), {dx:e} / {dy:e} away from the target ({}, {})",
            end.x, end.y, plan.endpoint.x, plan.endpoint.y
        )));
    }
    Ok(())
}

/// Minimal-time plan(s) from `p0` to `p1`.
pub fn solve_min_time(
    p0: CylinderPoint,
    p1: CylinderPoint,
    params: &SystemParams,
) -> Result<Solution> {
    let off = fiber_offset(p0, p1, params)?;
    let plans = if off.delta == 0.0 {
        vec![direct_plan(&off, p1)]
    } else {
        let (dip, hump) = crossings(&off, params)?;
        let dip_plan = plan_from_crossing(&dip, &off, p1, params.rho());
        let hump_plan = plan_from_crossing(&hump, &off, p1, params.rho());
        if (dip.m - hump.m).abs() <= TIE_TOLERANCE {
            vec![dip_plan, hump_plan]
        } else if dip.m < hump.m {
            vec![dip_plan]
        } else {
            vec![hump_plan]
        }
    };
    for plan in &plans {
        check_reaches(plan, p0, params)?;
    }
    Ok(Solution { plans })
}

/// Reconstructs an adjoint `(p, q)` along the plan and checks the
/// extremality conditions: `(p, q) != 0`, `u = rho sign(p)` away from the
/// switch, `p = 0` at the switch, a sampled Hamiltonian `p u + q (e^x - 1)`
/// that never drops below [`HAMILTONIAN_FLOOR`], and a state curve that
/// actually connects `p0` to the plan's endpoint.
pub fn pmp_certificate(
    plan: &Plan,
    p0: CylinderPoint,
    params: &SystemParams,
) -> Result<Certificate> {
    let rho = params.rho();
    let arcs: Vec<Segment> = plan
        .schedule
        .segments
        .iter()
        .copied()
        .filter(|s| s.duration > 0.0)
        .collect();
    if let Some(s) = arcs.iter().find(|s| s.u.abs() != rho) {
        return Err(Error::Certificate(format!(
            "control {} is not bang-bang (rho = {rho})",
            s.u
        )));
    }
    check_reaches(plan, p0, params)?;

    match arcs.as_slice() {
        [] => Ok(Certificate {
            p0: 1.0,
            q0: 0.0,
            switch_time: None,
            hamiltonian_min: rho,
        }),
        [arc] => {
            let p = arc.u.signum();
            // q = 0, p constant: H = p u = rho along the whole arc.
            Ok(Certificate {
                p0: p,
                q0: 0.0,
                switch_time: None,
                hamiltonian_min: p * arc.u,
            })
        }
        [first, second] if first.u != second.u => switched_certificate(first, second, p0, rho),
        _ => Err(Error::Certificate(format!(
            "{} bang arcs; an extremal switches at most once",
            arcs.len()
        ))),
    }
}

fn switched_certificate(
    first: &Segment,
    second: &Segment,
    start: CylinderPoint,
    rho: f64,
) -> Result<Certificate> {
    let t_switch = first.duration;
    let total = first.duration + second.duration;
    // p' = -q e^x: p decreases through zero for (+, -), increases for (-, +).
    let q0 = first.u.signum();
    let x_switch = start.x + first.u * t_switch;

    let adjoint = |t: f64| -> (f64, f64, f64) {
        if t <= t_switch {
            let x = start.x + first.u * t;
            (x, q0 * exp_integral(x, first.u, t_switch - t), first.u)
        } else {
            let dt = t - t_switch;
            (
                x_switch + second.u * dt,
                -q0 * exp_integral(x_switch, second.u, dt),
                second.u,
            )
        }
    };

    let p0 = adjoint(0.0).1;
    let (_, p_at_switch, _) = adjoint(t_switch);
    let scale = start.x.exp().max(x_switch.exp());
    if p_at_switch.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::Certificate(format!(
            "p(switch) = {p_at_switch}, expected 0"
        )));
    }
    if p0 == 0.0 && q0 == 0.0 {
        return Err(Error::Certificate("adjoint vanishes".into()));
    }

    let mut h_min = f64::INFINITY;
    for i in 0..=HAMILTONIAN_GRID {
        let t = total * i as f64 / HAMILTONIAN_GRID as f64;
        let (x, p, u) = adjoint(t);
        let p_tol = 1e-12 * scale.max(1.0);
        if p.abs() > p_tol && p.signum() != u.signum() {
            return Err(Error::Certificate(format!(
                "sign(p) = {} but u = {u} at t = {t}",
                p.signum()
            )));
        }
        let h = p * u + q0 * x.exp_m1();
        h_min = h_min.min(h);
    }
    if h_min < HAMILTONIAN_FLOOR {
        return Err(Error::Certificate(format!(
            "Hamiltonian reaches {h_min} < 0 (switch at x = {x_switch}, rho = {rho})"
        )));
    }
    Ok(Certificate {
        p0,
        q0,
        switch_time: Some(t_switch),
        hamiltonian_min: h_min,
    })
}

/// A same-fiber instance admitting two minimal-time plans.
#[derive(Debug, Clone, PartialEq)]
pub struct TieInstance {
    pub x: f64,
    pub from: CylinderPoint,
    pub to: CylinderPoint,
    /// Dip plan, then hump plan.
    pub plans: [Plan; 2],
    pub gap: f64,
}

const TIE_SCAN: (f64, f64, usize) = (-10.0, 10.0, 400);

/// Searches `x` in `[-10, 10]` for a point where the dip and hump crossings
/// of the same-fiber instance `(x, 0) -> (x, -delta)` coincide. The target is
/// placed so that the fiber offset equals `delta`.
pub fn find_tie_instance(delta: f64, params: &SystemParams) -> Result<TieInstance> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let gap_at = |x: f64| -> Result<f64> {
        let off = OffsetData {
            tau: 0.0,
            delta,
            x_min: x,
            x_max: x,
            u_dir: params.rho(),
        };
        let (dip, hump) = crossings(&off, params)?;
        Ok(dip.m - hump.m)
    };

    let (lo, hi, n) = TIE_SCAN;
    let mut bracket = None;
    let mut prev_x = lo;
    let mut prev_gap = gap_at(lo)?;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let gap = gap_at(x)?;
        if prev_gap == 0.0 || prev_gap.signum() != gap.signum() {
            bracket = Some((prev_x, prev_gap, x));
            break;
        }
        prev_x = x;
        prev_gap = gap;
    }
    let Some((mut left, left_gap, mut right)) = bracket else {
        return Err(Error::NotFound(format!(
            "no sign change of m_dip - m_hump for x in [{lo}, {hi}] at delta = {delta}"
        )));
    };

    let mut x = left;
    let mut gap = left_gap;
    for _ in 0..200 {
        if gap.abs() <= TIE_TOLERANCE {
            break;
        }
        x = 0.5 * (left + right);
        gap = gap_at(x)?;
        if gap.signum() == left_gap.signum() {
            left = x;
        } else {
            right = x;
        }
        if right - left <= f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    if gap.abs() > TIE_TOLERANCE {
        return Err(Error::NotFound(format!(
            "bisection stalled at x = {x} with |m_dip - m_hump| = {:e}",
            gap.abs()
        )));
    }

    let from = CylinderPoint::new(x, 0.0)?;
    let to = CylinderPoint::new(x, wrap(-delta)?)?;
    let off = fiber_offset(from, to, params)?;
    let (dip, hump) = crossings(&off, params)?;
    let plans = [
        plan_from_crossing(&dip, &off, to, params.rho()),
        plan_from_crossing(&hump, &off, to, params.rho()),
    ];
    for plan in &plans {
        check_reaches(plan, from, params)?;
    }
    Ok(TieInstance {
        x,
        from,
        to,
        plans,
        gap: dip.m - hump.m,
    })
}

/// Structured document for a plan (or an oracle result), JSON-compatible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub rho: f64,
    pub from: CylinderPoint,
    pub to: CylinderPoint,
    pub kind: String,
    pub total_time: f64,
    pub segments: Vec<Segment>,
    pub certificate: Option<Certificate>,
    pub tie: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hit_distance: Option<f64>,
}

impl PlanDocument {
    pub fn from_plan(
        plan: &Plan,
        from: CylinderPoint,
        params: &SystemParams,
        certificate: Option<Certificate>,
        tie: bool,
    ) -> Self {
        Self {
            rho: params.rho(),
            from,
            to: plan.endpoint,
            kind: plan.kind.as_str().to_string(),
            total_time: plan.total_time,
            segments: plan.schedule.segments.clone(),
            certificate,
            tie,
            hit_distance: None,
        }
    }
}

/// Solves and certifies every returned plan, producing their documents.
pub fn solve_documents(
    p0: CylinderPoint,
    p1: CylinderPoint,
    params: &SystemParams,
) -> Result<Vec<PlanDocument>> {
    let solution = solve_min_time(p0, p1, params)?;
    let tie = solution.is_tie();
    solution
        .plans
        .iter()
        .map(|plan| {
            let cert = pmp_certificate(plan, p0, params)?;
            Ok(PlanDocument::from_plan(plan, p0, params, Some(cert), tie))
        })
        .collect()
}

/// Unwrapped state at time `t` along a schedule (used in tests and reports).
pub fn state_at(schedule: &ControlSchedule, p0: CylinderPoint, t: f64) -> Result<(f64, f64)> {
    let mut state = (p0.x, p0.y);
    let mut elapsed = 0.0;
    for s in &schedule.segments {
        if t <= elapsed + s.duration {
            return advance(state.0, state.1, s.u, t - elapsed);
        }
        state = advance(state.0, state.1, s.u, s.duration)?;
        elapsed += s.duration;
    }
    Ok(state)
}
