//! Seeded random instances for verification campaigns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cylinder::{CylinderPoint, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub from: CylinderPoint,
    pub to: CylinderPoint,
    pub params: SystemParams,
}

/// Deterministic generator: `x` in `[-2, 2]`, `y` in `[0, 1)`, `rho` in `[0.5, 2]`.
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn point(&mut self) -> CylinderPoint {
        CylinderPoint {
            x: self.rng.gen_range(-2.0..=2.0),
            y: self.rng.gen_range(0.0..1.0),
        }
    }

    pub fn next_instance(&mut self) -> Instance {
        let from = self.point();
        let to = self.point();
        let rho = self.rng.gen_range(0.5..=2.0);
        Instance {
            from,
            to,
            params: SystemParams::new(rho).expect("rho sampled positive"),
        }
    }
}

impl Iterator for InstanceGenerator {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        Some(self.next_instance())
    }
}

/// The first `n` instances for `seed`.
pub fn instances(seed: u64, n: usize) -> Vec<Instance> {
    InstanceGenerator::new(seed).take(n).collect()
}
