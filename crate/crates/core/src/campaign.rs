//! Planner-versus-oracle verification over seeded random instances.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fmt::sig_trimmed;
use crate::instances::{instances, Instance};
use crate::oracle::{oracle_min_time, OracleConfig};
use crate::planner::{pmp_certificate, solve_min_time};
use crate::reconcile::{race_time, RaceConstant};
use crate::switching::fiber_offset;

/// Largest accepted `|planner - oracle|`.
pub const ORACLE_AGREEMENT: f64 = 4e-3;
/// Margin by which the race-form `g` must overshoot the oracle on at least
/// one instance for the discrepancy to count as reproduced.
pub const RECONCILIATION_MARGIN: f64 = 0.1;

/// Oracle settings shared by all instances; the horizon is per instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignSettings {
    pub max_switches: usize,
    pub time_step: f64,
    pub hit_tolerance: f64,
    pub shape_divisions: usize,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        Self {
            max_switches: 1,
            time_step: OracleConfig::DEFAULT_STEP,
            hit_tolerance: OracleConfig::DEFAULT_HIT_TOLERANCE,
            shape_divisions: OracleConfig::DEFAULT_SHAPE_DIVISIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    pub instance: Instance,
    pub planner_time: f64,
    pub oracle_time: Option<f64>,
    pub oracle_switches: Option<usize>,
    pub race_verbatim_time: f64,
    pub certificate_ok: bool,
    pub note: Option<String>,
}

impl InstanceReport {
    pub fn deviation(&self) -> Option<f64> {
        self.oracle_time.map(|o| self.planner_time - o)
    }

    pub fn passed(&self) -> bool {
        self.certificate_ok
            && self
                .deviation()
                .is_some_and(|d| d.abs() <= ORACLE_AGREEMENT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub settings: CampaignSettings,
    pub rows: Vec<InstanceReport>,
}

impl CampaignReport {
    pub fn max_abs_deviation(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.deviation())
            .fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Largest amount by which the oracle beat the planner.
    pub fn max_oracle_improvement(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.deviation())
            .fold(0.0, |m, d| m.max(d))
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    /// Instances where the race-form `g` overshoots the oracle by the margin.
    pub fn verbatim_overshoots(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| {
                r.oracle_time
                    .is_some_and(|o| r.race_verbatim_time >= o + RECONCILIATION_MARGIN)
            })
            .count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let s = &self.settings;
        writeln!(
            w,
            "verify: {} instances, seed {}, oracle h = {}, max_switches = {}",
            self.rows.len(),
            self.seed,
            sig_trimmed(s.time_step, 12),
            s.max_switches
        )?;
        for r in &self.rows {
            let status = if r.passed() { "ok  " } else { "FAIL" };
            let oracle = r
                .oracle_time
                .map_or("none".to_string(), |t| sig_trimmed(t, 12));
            let dev = r
                .deviation()
                .map_or("-".to_string(), |d| format!("{d:+.3e}"));
            writeln!(
                w,
                "{status} #{:<4} rho={} ({}, {}) -> ({}, {}) planner={} oracle={} dev={} race_g={}{}",
                r.index,
                sig_trimmed(r.instance.params.rho(), 12),
                sig_trimmed(r.instance.from.x, 12),
                sig_trimmed(r.instance.from.y, 12),
                sig_trimmed(r.instance.to.x, 12),
                sig_trimmed(r.instance.to.y, 12),
                sig_trimmed(r.planner_time, 12),
                oracle,
                dev,
                sig_trimmed(r.race_verbatim_time, 12),
                r.note.as_deref().map(|n| format!(" [{n}]")).unwrap_or_default(),
            )?;
        }
        writeln!(
            w,
            "max |planner - oracle| = {:.3e} (threshold {:.0e})",
            self.max_abs_deviation(),
            ORACLE_AGREEMENT
        )?;
        writeln!(
            w,
            "max oracle improvement over planner = {:.3e}",
            self.max_oracle_improvement()
        )?;
        writeln!(
            w,
            "race-form g (constant 1): {} of {} instances exceed the oracle time by >= {}; \
             the flow-consistent constant is 1/2",
            self.verbatim_overshoots(),
            self.rows.len(),
            RECONCILIATION_MARGIN
        )?;
        writeln!(w, "result: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub fn check_instance(
    index: usize,
    inst: &Instance,
    settings: &CampaignSettings,
) -> Result<InstanceReport> {
    let Instance { from, to, params } = *inst;
    let solution = solve_min_time(from, to, &params)?;
    let certificate_ok = solution
        .plans
        .iter()
        .all(|p| pmp_certificate(p, from, &params).is_ok());
    let off = fiber_offset(from, to, &params)?;
    let race_verbatim_time = race_time(&off, &params, RaceConstant::Verbatim)?;

    let cfg = OracleConfig {
        max_switches: settings.max_switches,
        time_step: settings.time_step,
        hit_tolerance: settings.hit_tolerance,
        shape_divisions: settings.shape_divisions,
        ..OracleConfig::for_instance(from, to, &params, settings.max_switches)
    };
    let (oracle_time, oracle_switches, note) = match oracle_min_time(from, to, &params, &cfg) {
        Ok(r) => (Some(r.time), Some(r.switches()), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    Ok(InstanceReport {
        index,
        instance: *inst,
        planner_time: solution.total_time(),
        oracle_time,
        oracle_switches,
        race_verbatim_time,
        certificate_ok,
        note,
    })
}

pub fn run_campaign(n: usize, seed: u64, settings: &CampaignSettings) -> Result<CampaignReport> {
    let rows = instances(seed, n)
        .iter()
        .enumerate()
        .map(|(i, inst)| check_instance(i, inst, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignReport {
        seed,
        settings: *settings,
        rows,
    })
}
