use layout_milp::{
    parse_lp, solve_lp_with, solve_milp, write_lp, EngineChoice, LpStatus, MilpParams, MilpStatus,
    Model, Sense,
};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Shape {
    obj: Vec<i32>,
    cont_obj: Vec<i32>,
    rows: Vec<(Vec<i32>, Vec<i32>, u8, i32)>,
}

fn shape(max_bin: usize, max_cont: usize) -> impl Strategy<Value = Shape> {
    (1..=max_bin, 0..=max_cont).prop_flat_map(|(nb, nc)| {
        let row = (
            prop::collection::vec(-3i32..=3, nb),
            prop::collection::vec(-3i32..=3, nc),
            0u8..3,
            -3i32..=4,
        );
        (
            prop::collection::vec(-5i32..=5, nb),
            prop::collection::vec(-5i32..=5, nc),
            prop::collection::vec(row, 1..6),
        )
            .prop_map(|(obj, cont_obj, rows)| Shape { obj, cont_obj, rows })
    })
}

fn build(s: &Shape) -> Model {
    let mut m = Model::new();
    for (i, &c) in s.obj.iter().enumerate() {
        m.add_binary(format!("b{i}"), c as f64).unwrap();
    }
    for (i, &c) in s.cont_obj.iter().enumerate() {
        m.add_continuous(format!("x{i}"), 0.0, 2.0, c as f64).unwrap();
    }
    let nb = s.obj.len();
    for (k, (a, b, sense, rhs)) in s.rows.iter().enumerate() {
        let terms: Vec<(usize, f64)> = a
            .iter()
            .enumerate()
            .map(|(j, &v)| (j, v as f64))
            .chain(b.iter().enumerate().map(|(j, &v)| (nb + j, v as f64)))
            .collect();
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][*sense as usize];
        m.add_row(format!("c{k}"), terms, sense, *rhs as f64).unwrap();
    }
    m
}

/// Enumerates every binary assignment and solves the remaining LP.
fn brute_force(m: &Model) -> Option<f64> {
    let bins: Vec<usize> = (0..m.num_vars())
        .filter(|&j| m.vars[j].kind == layout_milp::VarKind::Binary)
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut fixed = m.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            fixed.set_bounds(j, v, v);
        }
        let lp = solve_lp_with(&fixed, EngineChoice::Dense).unwrap();
        if lp.status == LpStatus::Optimal {
            best = Some(best.map_or(lp.objective, |b: f64| b.min(lp.objective)));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn branch_and_bound_matches_enumeration(s in shape(8, 3)) {
        let m = build(&s);
        let expected = brute_force(&m);
        for engine in [EngineChoice::Dense, EngineChoice::Sparse] {
            let params = MilpParams { engine, ..MilpParams::default() };
            let sol = solve_milp(&m, &params).unwrap();
            match expected {
                None => prop_assert_eq!(sol.status, MilpStatus::Infeasible),
                Some(opt) => {
                    prop_assert_eq!(sol.status, MilpStatus::Optimal);
                    prop_assert!((sol.objective - opt).abs() < 1e-6, "{} vs {}", sol.objective, opt);
                    let (rows, bounds) = m.max_violations(&sol.values);
                    prop_assert!(rows < 1e-6 && bounds < 1e-6);
                }
            }
        }
    }

    #[test]
    fn dense_and_sparse_relaxations_agree(s in shape(10, 4)) {
        let m = build(&s);
        let d = solve_lp_with(&m, EngineChoice::Dense).unwrap();
        let sp = solve_lp_with(&m, EngineChoice::Sparse).unwrap();
        prop_assert_eq!(d.status, sp.status);
        if d.status == LpStatus::Optimal {
            prop_assert!((d.objective - sp.objective).abs() < 1e-6);
        }
    }

    #[test]
    fn presolve_keeps_the_optimum(s in shape(8, 3)) {
        let m = build(&s);
        let on = solve_milp(&m, &MilpParams::default()).unwrap();
        let off = solve_milp(&m, &MilpParams { presolve: false, ..MilpParams::default() }).unwrap();
        prop_assert_eq!(on.status, off.status);
        if on.has_incumbent() {
            prop_assert!((on.objective - off.objective).abs() < 1e-6);
        }
    }

    #[test]
    fn lp_text_round_trips(s in shape(10, 4)) {
        let m = build(&s);
        prop_assert_eq!(parse_lp(&write_lp(&m)).unwrap(), m);
    }

    #[test]
    fn lp_parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_lp(&text);
    }
}

#[test]
fn repeated_solves_are_identical() {
    let s = Shape {
        obj: vec![3, -2, 4, 1, -1, 2],
        cont_obj: vec![1, -1],
        rows: vec![
            (vec![1, 1, 1, 0, 0, 0], vec![1, 0], 1, 2),
            (vec![0, 1, 0, 1, 1, 0], vec![0, -1], 0, 1),
            (vec![1, 0, 0, 0, 1, 1], vec![1, 1], 1, 1),
        ],
    };
    let m = build(&s);
    let params = MilpParams { record_tree: true, ..MilpParams::default() };
    let a = solve_milp(&m, &params).unwrap();
    let b = solve_milp(&m, &params).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.tree, b.tree);
    assert_eq!(a.nodes, b.nodes);
}
