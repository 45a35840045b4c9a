//! Fixed inputs shared by the benchmarks.

use cylmin_core::instances::{instances, Instance};
use cylmin_core::{CylinderPoint, SystemParams};

pub const SEED: u64 = 42;

/// Random planner instances, identical on every run.
pub fn sample_instances(n: usize) -> Vec<Instance> {
    instances(SEED, n)
}

/// The one-switch instance `(0, 0) -> (0, 0.5)` at `rho = 1`.
pub fn worked_instance() -> (CylinderPoint, CylinderPoint, SystemParams) {
    (
        CylinderPoint::origin(),
        CylinderPoint { x: 0.0, y: 0.5 },
        SystemParams::new(1.0).expect("positive rho"),
    )
}
