//! End-to-end acceptance criteria. Every test prints one `[PASS]` or
//! `[FAIL]` line; run with `--nocapture` to see them.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use layout_milp::{MilpParams, MilpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robolayout::astar::{astar_layout, AstarParams};
use robolayout::bench::{generate_scene, BenchConfig};
use robolayout::layout::{Element, PlacedRobot};
use robolayout::motion::{build_motion_problem, solve_trajectories, MotionParams, MotionProblem};
use robolayout::netmodel::{optimize, ArcKind, Family, Optimized};
use robolayout::oracle::{brute_force_layout, finite_diff_gradient, verify_solution, DEFAULT_CAP};
use robolayout::{
    build_reachability_graph, parse_scene, schedule_layout, JunctionKind, Layout, Point, RobotType, Scene,
};

use common::{coarse_scene, out};

fn report(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn solve(s: &Scene) -> Optimized {
    optimize(s, &MilpParams::default()).expect("scene compiles")
}

/// Robots on a one-row floor between an input and an output `span` apart.
fn chain_scene(span: f64, catalog: Vec<RobotType>) -> Scene {
    let mut s = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(span, 0.0),
        0.5,
        Point::new(-0.25, 0.0),
        vec![out(span - 0.25, 0.0, 1.0)],
    );
    s.catalog = catalog;
    s
}

#[test]
fn oracle_optimality() {
    let start = Instant::now();
    let mut agree = 0;
    let mut feasible = 0;
    let mut worst = String::new();
    for seed in 0..30 {
        let s = coarse_scene(seed);
        let g = build_reachability_graph(&s);
        let oracle = brute_force_layout(&g, &s, DEFAULT_CAP).expect("within cap");
        let o = solve(&s);
        let ok = match (oracle.cost, o.solution.status) {
            (Some(c), MilpStatus::Optimal) => (c - o.solution.objective).abs() <= 1e-9,
            (None, MilpStatus::Infeasible) => true,
            _ => false,
        };
        feasible += usize::from(oracle.cost.is_some());
        if ok {
            agree += 1;
        } else if worst.is_empty() {
            worst = format!(" first mismatch seed {seed}: oracle {:?} milp {:?} {}", oracle.cost, o.solution.status, o.solution.objective);
        }
    }
    let t = start.elapsed();
    report(
        "oracle optimality",
        agree == 30 && t < Duration::from_secs(30),
        format!("{agree}/30 agree ({feasible} feasible) in {:.2}s{worst}", t.as_secs_f64()),
    );
}

#[test]
fn astar_milp_agreement() {
    let cfg = BenchConfig::reduced();
    let mut equal = 0;
    let mut tried = 0;
    let mut seed = 0;
    while tried < 20 {
        let s = generate_scene(&cfg, 0.5, 2, seed).expect("two outputs always fit");
        seed += 1;
        tried += 1;
        let g = build_reachability_graph(&s);
        let m = solve(&s);
        let a = astar_layout(&s, &g, &AstarParams::default());
        if let (MilpStatus::Optimal, Ok(a)) = (m.solution.status, &a) {
            if (a.layout.total_cost - m.solution.objective).abs() <= 1e-9 {
                equal += 1;
            }
        }
    }
    report("A*/MILP agreement", equal == 20, format!("{equal}/20 identical costs"));
}

#[test]
fn astar_success_trend() {
    let cfg = BenchConfig::reduced();
    let mut astar_rates = Vec::new();
    let mut milp_ok = true;
    let mut detail = Vec::new();
    for n in 2..=5 {
        let (mut total, mut a_ok, mut m_ok) = (0, 0, 0);
        for seed in 0..5 {
            let Ok(s) = generate_scene(&cfg, 0.5, n, seed) else { continue };
            total += 1;
            let g = build_reachability_graph(&s);
            if solve(&s).solution.status == MilpStatus::Optimal {
                m_ok += 1;
            }
            if astar_layout(&s, &g, &AstarParams::default()).is_ok() {
                a_ok += 1;
            }
        }
        milp_ok &= m_ok == total;
        astar_rates.push(a_ok as f64 / total.max(1) as f64);
        detail.push(format!("n={n}: A* {a_ok}/{total} MILP {m_ok}/{total}"));
    }
    let monotone = astar_rates.windows(2).all(|w| w[1] <= w[0]);
    report("A* success trend", monotone && milp_ok, detail.join(", "));
}

#[test]
fn flow_feasibility() {
    let mut solved = 0;
    let mut worst = 0.0f64;
    let mut scenes: Vec<Scene> = (0..30).map(coarse_scene).collect();
    for seed in 0..10 {
        scenes.push(generate_scene(&BenchConfig::reduced(), 0.5, 2 + (seed as usize % 3), seed).unwrap());
    }
    for s in &scenes {
        let o = solve(s);
        if o.solution.status == MilpStatus::Optimal {
            solved += 1;
            worst = worst.max(verify_solution(&o.milp, &o.solution.values).max_violation());
        }
    }

    // Fault injection on a two-robot chain.
    let o = solve(&chain_scene(3.0, vec![RobotType::ur5e()]));
    let values = &o.solution.values;
    let used = (0..o.net.arcs.len())
        .find(|&a| matches!(o.net.arcs[a].kind, ArcKind::Reach { .. }) && values[o.milp.f[a][0]] > 0.5)
        .expect("a used arc");
    let mut bad = values.clone();
    bad[o.milp.f[used][0]] += 0.5;
    let v = verify_solution(&o.milp, &bad);
    let c = v.get(Family::Conservation);
    let arc = &o.net.arcs[used];
    let conservation_flagged = c.max_violation > 0.4 && c.node.is_some_and(|n| n == arc.tail || n == arc.head);

    let element = (0..o.net.arcs.len())
        .find(|&a| matches!(o.net.arcs[a].kind, ArcKind::Element { .. }) && values[o.milp.s[a]] > 0.5)
        .expect("a selected element");
    let mut bad = values.clone();
    bad[o.milp.s[element]] = 0.0;
    let capacity_flagged = verify_solution(&o.milp, &bad).get(Family::Capacity).max_violation > 0.9;

    let mut bad = values.clone();
    bad[o.milp.s[element]] = 0.5;
    let integrality_flagged = verify_solution(&o.milp, &bad).get(Family::Integrality).max_violation >= 0.5;

    let pass = solved > 0 && worst <= 1e-6 && conservation_flagged && capacity_flagged && integrality_flagged;
    report(
        "flow feasibility",
        pass,
        format!(
            "{solved} solved, max residual {worst:.2e}; faults flagged: conservation {conservation_flagged}, capacity {capacity_flagged}, integrality {integrality_flagged}"
        ),
    );
}

fn robot_types(l: &Layout) -> Vec<&str> {
    let mut t: Vec<&str> = l.robots.iter().map(|r| r.robot_type.as_str()).collect();
    t.sort();
    t
}

#[test]
fn robot_cost_wiring() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (k, span) in [(1, 1.5), (2, 3.0), (3, 4.5)] {
        let o = solve(&chain_scene(span, vec![RobotType::ur5e()]));
        let l = o.layout.expect("chain is feasible");
        ok &= l.total_cost == k as f64 && robot_types(&l) == vec!["UR5e"; k];
        detail.push(format!("k={k}: {}", l.total_cost));
    }

    // Arms two meters apart: only the long-reach arm bridges the middle gap.
    let mut s = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(4.0, 0.0),
        2.0,
        Point::new(-0.5, 0.0),
        vec![out(4.5, 0.0, 1.0)],
    );
    // Output beyond the floor is not allowed, so move the floor end out.
    s.floor.max = Point::new(4.5, 0.0);
    s.catalog = vec![RobotType::ur5e(), RobotType::irb4600()];
    let mixed = solve(&s).layout.expect("mixed chain is feasible");
    let mixed_ok = robot_types(&mixed) == vec!["IRB4600", "UR5e", "UR5e"] && mixed.total_cost == 3.0 + 2.0;
    detail.push(format!("one IRB4600 in a 3-chain: {}", mixed.total_cost));

    let defaults = RobotType::ur5e().cost == 1.0 && RobotType::irb4600().cost == 3.0;
    report("robot cost wiring", ok && mixed_ok && defaults, detail.join(", "));
}

/// Two pairs of outputs at opposite corners of a 3 m x 2 m floor, fed
/// from just outside the third corner on a 1 m grid.
fn junction_scene() -> Scene {
    parse_scene(include_str!("data/junction_scene.json")).expect("valid scene")
}

#[test]
fn junction_cost_response() {
    let base = junction_scene();
    let o1 = solve(&base);
    let mut quad = base.clone();
    quad.costs = quad.costs.with_junction_factor(4.0);
    let o4 = solve(&quad);
    let (Some(l1), Some(l4)) = (&o1.layout, &o4.layout) else {
        report("junction cost response", false, "no layout".into());
        return;
    };
    let mw1 = l1.count_junctions(JunctionKind::MultiWay);
    let mw4 = l4.count_junctions(JunctionKind::MultiWay);
    let verified = verify_solution(&o1.milp, &o1.solution.values).passes(1e-6)
        && verify_solution(&o4.milp, &o4.solution.values).passes(1e-6)
        && l1.validate().is_ok()
        && l4.validate().is_ok();
    report(
        "junction cost response",
        mw1 >= 1 && mw4 == 0 && l4.total_cost >= l1.total_cost - 1e-9 && verified,
        format!(
            "default: {mw1} multi-way, cost {:.4}; quadrupled: {mw4} multi-way, cost {:.4}; verified {verified}",
            l1.total_cost, l4.total_cost
        ),
    );
}

fn element_payload(l: &Layout, s: &Scene, id: usize) -> Option<f64> {
    match l.element(id)? {
        Element::Robot(r) => s.robot(&r.robot_type).map(|t| t.payload),
        Element::Belt(_) => s.belt_type().map(|(_, b)| b.payload),
    }
}

#[test]
fn payload_respected() {
    let mut s = Scene::new(
        Point::new(0.0, -1.0),
        Point::new(2.0, 1.0),
        0.5,
        Point::new(-0.25, 0.0),
        vec![out(1.75, 1.0, 1.0), out(1.75, -1.0, 10.0)],
    );
    let without = solve(&s).solution.status;
    s.catalog.push(RobotType::irb4600());
    let o = solve(&s);
    let heavy_ok = o.layout.as_ref().is_some_and(|l| {
        l.paths[1][1..l.paths[1].len() - 1]
            .iter()
            .all(|&v| element_payload(l, &s, v).is_some_and(|p| p >= 10.0))
    });
    report(
        "payload",
        without == MilpStatus::Infeasible && heavy_ok,
        format!("UR5e only: {without:?}; with IRB4600: {:?}, heavy path payload-sufficient {heavy_ok}", o.solution.status),
    );
}

fn random_layout(rng: &mut ChaCha8Rng, disjoint: bool) -> Layout {
    let n_boxes = rng.gen_range(1..=5);
    let first = 1 + n_boxes;
    let pool: Vec<usize> = (first..first + rng.gen_range(2..=12)).collect();
    let mut free = pool.clone();
    let paths = (0..n_boxes)
        .map(|i| {
            let len = rng.gen_range(1..=4);
            let mut seq: Vec<usize> = Vec::new();
            while seq.len() < len {
                let source = if disjoint { &free } else { &pool };
                let open: Vec<usize> = source.iter().copied().filter(|r| !seq.contains(r)).collect();
                if open.is_empty() {
                    break;
                }
                let r = open[rng.gen_range(0..open.len())];
                free.retain(|&x| x != r);
                seq.push(r);
            }
            if seq.is_empty() {
                seq.push(first + pool.len() + i);
            }
            let mut p = vec![0];
            p.extend(seq);
            p.push(1 + i);
            p
        })
        .collect::<Vec<Vec<usize>>>();
    let ids: BTreeSet<usize> = paths.iter().flat_map(|p| p[1..p.len() - 1].iter().copied()).collect();
    Layout {
        robots: ids
            .into_iter()
            .map(|id| PlacedRobot { id, robot_type: "UR5e".into(), x: id as f64, y: 0.0 })
            .collect(),
        belts: Vec::new(),
        junctions: Vec::new(),
        paths,
        total_cost: 0.0,
    }
}

#[test]
fn scheduler_intervals() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut disjoint_ok, mut overlaps, mut disjoint_cases) = (true, 0, 0);
    for k in 0..100 {
        let l = random_layout(&mut rng, k % 2 == 0);
        l.validate().expect("well-formed layout");
        let dt = [0.5, 1.0, 2.0][k % 3];
        let s = schedule_layout(&l, dt);
        let mut per_robot: HashMap<usize, Vec<(f64, f64)>> = HashMap::new();
        for b in &s.boxes {
            for t in &b.tasks {
                per_robot.entry(t.robot).or_default().push((t.start, t.end));
            }
        }
        for iv in per_robot.values() {
            for i in 0..iv.len() {
                for j in 0..i {
                    if iv[i].0 < iv[j].1 && iv[j].0 < iv[i].1 {
                        overlaps += 1;
                    }
                }
            }
        }
        let seqs: Vec<&[usize]> = l.paths.iter().map(|p| &p[1..p.len() - 1]).collect();
        let mut seen = BTreeSet::new();
        if seqs.iter().all(|q| q.iter().all(|r| seen.insert(*r))) {
            disjoint_cases += 1;
            let expected = seqs.iter().map(|q| q.len()).max().unwrap_or(0) as f64 * dt;
            disjoint_ok &= s.makespan() == expected;
        }
    }
    report(
        "scheduler",
        overlaps == 0 && disjoint_ok && disjoint_cases > 0,
        format!("100 layouts, {overlaps} overlapping pairs, {disjoint_cases} robot-disjoint with exact makespan {disjoint_ok}"),
    );
}

/// One-box replays from optimized small UR5e scenes.
fn one_box_replays() -> Vec<(Scene, Layout)> {
    let mut found = Vec::new();
    let mut seed = 0;
    while found.len() < 10 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        seed += 1;
        let input = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(0.0..1.0));
        let output = out(rng.gen_range(0.6..1.5), rng.gen_range(0.0..1.0), 1.0);
        let s = Scene::new(Point::new(0.0, 0.0), Point::new(1.5, 1.0), 0.5, input, vec![output]);
        if let Some(l) = solve(&s).layout {
            found.push((s, l));
        }
    }
    found
}

/// Two boxes handed by robot-disjoint arms on opposite sides of the input.
fn two_box_replays() -> Vec<(Scene, Layout)> {
    (0..10)
        .map(|k| {
            let theta = 0.3 * k as f64;
            let d = 0.45 + 0.02 * k as f64;
            let u = Point::new(theta.cos(), theta.sin());
            let s = Scene::new(
                Point::new(-2.0, -2.0),
                Point::new(2.0, 2.0),
                0.5,
                Point::new(0.0, 0.0),
                vec![out(2.0 * d * u.x, 2.0 * d * u.y, 1.0), out(-2.0 * d * u.x, -2.0 * d * u.y, 1.0)],
            );
            let robots = vec![
                PlacedRobot { id: 3, robot_type: "UR5e".into(), x: d * u.x, y: d * u.y },
                PlacedRobot { id: 4, robot_type: "UR5e".into(), x: -d * u.x, y: -d * u.y },
            ];
            let l = Layout {
                robots,
                belts: Vec::new(),
                junctions: Vec::new(),
                paths: vec![vec![0, 3, 1], vec![0, 4, 2]],
                total_cost: 2.0,
            };
            (s, l)
        })
        .collect()
}

fn gradient_error(p: &MotionProblem, rng: &mut ChaCha8Rng) -> f64 {
    let x0 = p.initial_guess();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x: Vec<f64> = x0.iter().map(|v| v + rng.gen_range(-0.2..0.2)).collect();
        let mu = 100.0;
        let g = p.gradient(&x, mu);
        let fd = finite_diff_gradient(&|y| p.penalized(y, mu), &x, 1e-6);
        let scale = fd.iter().map(|v| v.abs()).fold(1e-12, f64::max);
        let err = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        worst = worst.max(err);
    }
    worst
}

#[test]
fn motion_replays() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut converged, mut monotone, mut worst_grad, mut worst_res) = (0, 0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    let replays: Vec<(Scene, Layout)> = one_box_replays().into_iter().chain(two_box_replays()).collect();
    for (k, (s, l)) in replays.iter().enumerate() {
        let sched = schedule_layout(l, 1.0);
        let p = build_motion_problem(&sched, l, s, 10).expect("arm-only replay");
        worst_grad = worst_grad.max(gradient_error(&p, &mut rng));
        match solve_trajectories(&p, &MotionParams::default()) {
            Ok(t) => {
                worst_res = worst_res.max(t.report.max_residual);
                converged += usize::from(t.report.max_residual <= 1e-3);
                monotone += usize::from(t.report.history.iter().all(|h| h.windows(2).all(|w| w[1] <= w[0])));
            }
            Err(e) => failures.push(format!("replay {k}: {e}")),
        }
    }
    let n = replays.len();
    report(
        "motion",
        n == 20 && converged == n && monotone == n && worst_grad <= 1e-4,
        format!(
            "{converged}/{n} within 1e-3 (worst {worst_res:.2e}), {monotone}/{n} monotone, gradient rel. error {worst_grad:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    );
}

#[test]
fn scale_smoke() {
    let s = generate_scene(&BenchConfig::full(), 0.5, 2, 0).expect("two outputs fit");
    assert_eq!(s.grid_shape(), (17, 17));
    let start = Instant::now();
    let o = solve(&s);
    let t = start.elapsed();
    report(
        "scale smoke",
        o.solution.status == MilpStatus::Optimal && t <= Duration::from_secs(300),
        format!("17x17 grid, 2 outputs: {:?} cost {} in {:.1}s", o.solution.status, o.solution.objective, t.as_secs_f64()),
    );
}
