//! Seeded benchmark instances: fixed input, outputs sampled in a strip with a
//! minimum pairwise separation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::scene::{CostTable, Floor, Output, RobotType, Scene};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub floor: Floor,
    pub input: Point,
    /// Rectangle the outputs are drawn from.
    pub strip: Floor,
    pub min_separation: f64,
    pub weight: f64,
}

impl BenchConfig {
    /// 8 m x 8 m floor with outputs in the far 2 m strip.
    pub fn full() -> Self {
        BenchConfig {
            floor: Floor {
                min: Point::new(0.0, -4.0),
                max: Point::new(8.0, 4.0),
            },
            input: Point::new(0.0, 0.0),
            strip: Floor {
                min: Point::new(6.0, -4.0),
                max: Point::new(8.0, 4.0),
            },
            min_separation: 1.0,
            weight: 1.0,
        }
    }

    /// 4 m x 4 m floor with outputs in the far 1 m strip.
    pub fn reduced() -> Self {
        BenchConfig {
            floor: Floor {
                min: Point::new(0.0, -2.0),
                max: Point::new(4.0, 2.0),
            },
            input: Point::new(0.0, 0.0),
            strip: Floor {
                min: Point::new(3.0, -2.0),
                max: Point::new(4.0, 2.0),
            },
            min_separation: 1.0,
            weight: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("could not place {0} outputs with the required separation")]
pub struct PlacementError(pub usize);

/// A UR5e-only scene with `n_outputs` outputs drawn by rejection sampling.
pub fn generate_scene(
    cfg: &BenchConfig,
    spacing: f64,
    n_outputs: usize,
    seed: u64,
) -> Result<Scene, PlacementError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outputs: Vec<Output> = Vec::with_capacity(n_outputs);
    let mut attempts = 0;
    while outputs.len() < n_outputs {
        attempts += 1;
        if attempts > 100_000 {
            return Err(PlacementError(n_outputs));
        }
        let p = Point::new(
            rng.gen_range(cfg.strip.min.x..=cfg.strip.max.x),
            rng.gen_range(cfg.strip.min.y..=cfg.strip.max.y),
        );
        if outputs.iter().all(|o| o.pos.dist(p) >= cfg.min_separation) {
            outputs.push(Output {
                pos: p,
                weight: cfg.weight,
            });
        }
    }
    Ok(Scene {
        floor: cfg.floor,
        spacing,
        input: cfg.input,
        outputs,
        catalog: vec![RobotType::ur5e()],
        costs: CostTable::default(),
    })
}
