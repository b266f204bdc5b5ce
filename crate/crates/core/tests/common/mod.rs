#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robolayout::scene::Floor;
use robolayout::{Output, Point, RobotType, Scene};

pub fn out(x: f64, y: f64, weight: f64) -> Output {
    Output {
        pos: Point::new(x, y),
        weight,
    }
}

fn pick_in(rng: &mut ChaCha8Rng, floor: &Floor, margin: f64) -> Point {
    let r = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        let v: f64 = rng.gen_range(lo - margin..=hi + margin);
        ((v * 20.0).round() / 20.0).clamp(lo - margin, hi + margin)
    };
    Point::new(r(rng, floor.min.x, floor.max.x), r(rng, floor.min.y, floor.max.y))
}

/// Coarse random scene with at most 12 candidate placements. Three shapes
/// rotate with the seed: UR5e on a 4 x 3 grid, UR5e plus IRB4600 on a 3 x 2
/// grid with some heavy boxes, and UR5e plus belts on a 3-point line.
pub fn coarse_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (max, spacing) = match seed % 3 {
        0 => (Point::new(1.5, 1.0), 0.5),
        1 => (Point::new(1.2, 0.6), 0.6),
        _ => (Point::new(1.0, 0.0), 0.5),
    };
    let floor = Floor {
        min: Point::new(0.0, 0.0),
        max,
    };
    let n_out = rng.gen_range(1..=3);
    let outputs = (0..n_out)
        .map(|_| {
            let pos = pick_in(&mut rng, &floor, 0.0);
            let weight = if seed % 3 == 1 && rng.gen_bool(0.3) { 10.0 } else { 1.0 };
            Output { pos, weight }
        })
        .collect();
    let input = match seed % 3 {
        2 => Point::new(rng.gen_range(-0.5..=1.5), rng.gen_range(-0.6..=0.6)),
        _ => pick_in(&mut rng, &floor, 0.3),
    };
    let mut s = Scene::new(floor.min, floor.max, spacing, input, outputs);
    match seed % 3 {
        1 => s.catalog.push(RobotType::irb4600()),
        2 => s.catalog.push(RobotType::belt(&s.costs)),
        _ => {}
    }
    s
}

/// Random floor, spacing and ports for structural properties.
pub fn random_scene(seed: u64, with_irb: bool, with_belt: bool) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = [0.4, 0.5, 0.6][rng.gen_range(0..3)];
    let w = spacing * rng.gen_range(1..=4) as f64;
    let h = spacing * rng.gen_range(0..=3) as f64;
    let floor = Floor {
        min: Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        max: Point::new(0.0, 0.0),
    };
    let floor = Floor {
        min: floor.min,
        max: floor.min + Point::new(w, h),
    };
    let n_out = rng.gen_range(1..=3);
    let outputs = (0..n_out).map(|_| Output { pos: pick_in(&mut rng, &floor, 0.0), weight: 1.0 }).collect();
    let input = pick_in(&mut rng, &floor, 0.5);
    let mut s = Scene::new(floor.min, floor.max, spacing, input, outputs);
    if with_irb {
        s.catalog.push(RobotType::irb4600());
    }
    if with_belt {
        s.catalog.push(RobotType::belt(&s.costs));
    }
    s
}
