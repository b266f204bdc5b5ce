use layout_milp::{solve_milp, MilpParams, MilpStatus};

use super::*;
use crate::geometry::Point;
use crate::layout::JunctionKind;
use crate::reach::Direction;
use crate::scene::{Output, RobotType, Scene};

fn out(x: f64, y: f64, w: f64) -> Output {
    Output {
        pos: Point::new(x, y),
        weight: w,
    }
}

fn chain_scene() -> Scene {
    Scene::new(
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        2.0,
        Point::new(-0.5, 0.0),
        vec![out(0.5, 0.0, 1.0)],
    )
}

fn belt_line_scene() -> Scene {
    // Three points on a line, belts only, plus one arm type.
    let mut s = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        0.5,
        Point::new(0.0, 0.5),
        vec![out(1.0, 0.0, 1.0)],
    );
    s.catalog.push(RobotType::belt(&s.costs));
    s
}

#[test]
fn split_chain() {
    let s = chain_scene();
    let g = build_reachability_graph(&s);
    let net = split_vertices(&g);
    assert_eq!(net.nodes.len(), 4);
    assert_eq!(net.arcs.len(), 3);
    assert_eq!(net.num_aux(), 1);
    let aux = net.element_arc[2].unwrap();
    assert_eq!(net.arcs[aux].weight, 1.0);
}

#[test]
fn split_without_placements() {
    let mut s = chain_scene();
    s.catalog.clear();
    let g = build_reachability_graph(&s);
    let net = split_vertices(&g);
    assert_eq!(net.nodes.len(), 2);
    assert!(net.arcs.is_empty());
}

#[test]
fn belt_element_weight() {
    let s = belt_line_scene();
    let g = build_reachability_graph(&s);
    let net = split_vertices(&g);
    let b = g.belt(0, Direction::E).unwrap();
    let w = net.arcs[net.element_arc[b].unwrap()].weight;
    assert!((w - 0.2).abs() < 1e-12);
}

#[test]
fn inline_and_gadget_counts() {
    let s = belt_line_scene();
    let g = build_reachability_graph(&s);
    let net = build_network(&g, &s);
    let inline_at = |p: usize| {
        net.arcs
            .iter()
            .filter(|a| matches!(a.kind, ArcKind::Inline { .. }) && a.coor == Some(p))
            .collect::<Vec<_>>()
    };
    // Middle point: east-east and west-west pairs.
    let mid = inline_at(1);
    assert_eq!(mid.len(), 2);
    assert!(mid.iter().all(|a| a.weight == -0.1));
    assert!(inline_at(0).is_empty());

    // A 3x3 grid centre has eight incident segments in each direction.
    let mut sq = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(1.0, 1.0),
        0.5,
        Point::new(0.0, 0.0),
        vec![out(1.0, 1.0, 1.0)],
    );
    sq.catalog = vec![RobotType::belt(&sq.costs)];
    let g = build_reachability_graph(&sq);
    let net = build_network(&g, &sq);
    let count = |pred: &dyn Fn(&ArcKind) -> bool| {
        net.arcs
            .iter()
            .filter(|a| a.coor == Some(4) && pred(&a.kind))
            .count()
    };
    assert_eq!(count(&|k| matches!(k, ArcKind::Entry { kind: JunctionKind::MultiWay, .. })), 8);
    assert_eq!(count(&|k| matches!(k, ArcKind::Exit { kind: JunctionKind::MultiWay, .. })), 8);
    assert_eq!(count(&|k| matches!(k, ArcKind::Core { .. })), 2);
}

#[test]
fn no_gadgets_without_belts() {
    let s = chain_scene();
    let g = build_reachability_graph(&s);
    let net = build_network(&g, &s);
    assert_eq!(net, split_vertices(&g));
}

#[test]
fn chain_model_and_layout() {
    let s = chain_scene();
    let g = build_reachability_graph(&s);
    let net = build_network(&g, &s);
    let mm = compile_milp(&net, &g, &s);
    assert_eq!(mm.model.num_vars(), 3 + 3);
    let sol = solve_milp(&mm.model, &MilpParams::default()).unwrap();
    assert_eq!(sol.status, MilpStatus::Optimal);
    for a in 0..3 {
        assert_eq!(sol.values[mm.f[a][0]], 1.0);
    }
    let layout = extract_layout(&net, &mm, &g, &s, &sol.values).unwrap();
    assert_eq!(layout.paths, vec![vec![0, 2, 1]]);
    assert_eq!(layout.total_cost, 1.0);
}

#[test]
fn heavy_box_fixes_light_arms() {
    let mut s = chain_scene();
    s.outputs[0].weight = 10.0;
    let g = build_reachability_graph(&s);
    let net = build_network(&g, &s);
    let mm = compile_milp(&net, &g, &s);
    let aux = net.element_arc[2].unwrap();
    assert!(mm.payload_fixings.contains(&mm.f[aux][0]));
    assert_eq!(mm.model.vars[mm.f[aux][0]].upper, 0.0);
    let sol = solve_milp(&mm.model, &MilpParams::default()).unwrap();
    assert_eq!(sol.status, MilpStatus::Infeasible);
}

#[test]
fn shared_point_occupancy_row() {
    let mut s = chain_scene();
    s.catalog.push(RobotType::irb4600());
    let g = build_reachability_graph(&s);
    let net = build_network(&g, &s);
    let mm = compile_milp(&net, &g, &s);
    let occ: Vec<usize> = mm.rows_of(Family::Occupancy).collect();
    assert_eq!(occ.len(), 1);
    let row = &mm.model.rows[occ[0]];
    assert_eq!(row.terms.len(), 2);
    assert_eq!(row.rhs, 1.0);
}

#[test]
fn diamond_tie_break() {
    // 0 -> {2, 3} -> 1: both two-hop, vertex 2 wins.
    let succ = vec![vec![3, 2], vec![], vec![1], vec![1]];
    assert_eq!(shortest_lexicographic(&succ, 0, 1), Some(vec![0, 2, 1]));
    assert_eq!(shortest_lexicographic(&succ, 1, 0), None);
}

#[test]
fn dead_end_successor_is_skipped() {
    // Vertex 2 cannot reach the target.
    let succ = vec![vec![2, 3], vec![], vec![], vec![1]];
    assert_eq!(shortest_lexicographic(&succ, 0, 1), Some(vec![0, 3, 1]));
}

#[test]
fn inline_merge_cost() {
    // Belt path along y = 0 with arms loading and unloading at both ends.
    let mut s = Scene::new(
        Point::new(0.0, -0.5),
        Point::new(2.0, 0.5),
        0.5,
        Point::new(0.0, 0.0),
        vec![out(2.0, 0.0, 1.0)],
    );
    s.catalog.push(RobotType::belt(&s.costs));
    let g = build_reachability_graph(&s);
    let net = build_network(&g, &s);
    let mm = compile_milp(&net, &g, &s);
    let e = |x: usize, y: usize| g.belt(y * 5 + x, Direction::E).unwrap();
    let b1 = e(1, 1);
    let b2 = e(2, 1);
    let inline = net
        .arcs
        .iter()
        .position(|a| a.kind == ArcKind::Inline { from: b1, to: b2 })
        .unwrap();
    let mut values = vec![0.0; mm.model.num_vars()];
    for v in [b1, b2] {
        values[mm.s[net.element_arc[v].unwrap()]] = 1.0;
    }
    values[mm.s[inline]] = 1.0;
    let sel = Selection::from_values(&net, &mm, &values);
    assert!((sel.cost - 0.3).abs() < 1e-12);
    assert_eq!(sel.transfers, vec![(b1, b2)]);
}
