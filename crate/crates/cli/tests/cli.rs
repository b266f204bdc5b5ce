use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output as ProcOutput};

use robolayout::layout::PlacedRobot;
use robolayout::{parse_layout, parse_schedule, JunctionKind, Layout, Output, Point, RobotType, Scene};
use tempfile::TempDir;

fn run(args: &[&str]) -> ProcOutput {
    Command::new(env!("CARGO_BIN_EXE_robolayout"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &ProcOutput) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One UR5e between ports 1.5 m apart.
fn chain_scene(weight: f64) -> Scene {
    let mut sc = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(1.5, 0.0),
        0.5,
        Point::new(-0.25, 0.0),
        vec![Output {
            pos: Point::new(1.25, 0.0),
            weight,
        }],
    );
    sc.catalog = vec![RobotType::ur5e()];
    sc
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}

#[test]
fn optimize_trivial_chain() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", &chain_scene(1.0).to_json());
    let out = dir.path().join("layout.json");
    let o = run(&["optimize", "--scene", s(&scene), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(field(&text, "status"), Some("optimal"));
    assert_eq!(field(&text, "cost").unwrap().parse::<f64>().unwrap(), 1.0);
    let l = parse_layout(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(l.robots.len(), 1);
    assert!(l.validate().is_ok());
}

#[test]
fn optimize_methods_agree_on_chain() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", &chain_scene(1.0).to_json());
    for m in ["milp", "astar", "oracle"] {
        let out = dir.path().join(format!("{m}.json"));
        let o = run(&["optimize", "--scene", s(&scene), "--method", m, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0), "{m}");
        assert_eq!(field(&stdout(&o), "cost").unwrap().parse::<f64>().unwrap(), 1.0, "{m}");
    }
}

#[test]
fn optimize_infeasible_exit_code() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", &chain_scene(10.0).to_json());
    for m in ["milp", "astar"] {
        let o = run(&["optimize", "--scene", s(&scene), "--method", m]);
        assert_eq!(o.status.code(), Some(2), "{m}");
        assert_eq!(field(&stdout(&o), "status"), Some("infeasible"), "{m}");
    }
}

#[test]
fn malformed_input_exit_code() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", "{\"floor\": 3}");
    let o = run(&["optimize", "--scene", s(&scene)]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["optimize", "--scene", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["optimize"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn svg_has_one_glyph_per_element() {
    let dir = TempDir::new().unwrap();
    let mut sc = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(3.0, 0.0),
        0.5,
        Point::new(-0.25, 0.0),
        vec![Output {
            pos: Point::new(2.75, 0.0),
            weight: 1.0,
        }],
    );
    sc.catalog = vec![RobotType::ur5e()];
    let scene = write(&dir, "scene.json", &sc.to_json());
    let out = dir.path().join("layout.json");
    let svg = dir.path().join("layout.svg");
    let o = run(&["optimize", "--scene", s(&scene), "--out", s(&out), "--svg", s(&svg)]);
    assert_eq!(o.status.code(), Some(0));
    let l = parse_layout(&fs::read_to_string(&out).unwrap()).unwrap();
    let drawn = fs::read_to_string(&svg).unwrap();
    assert_eq!(drawn.matches("class=\"glyph").count(), l.element_count());
    assert_eq!(l.robots.len(), 2);

    let again = dir.path().join("again.svg");
    let o = run(&["render", "--scene", s(&scene), "--layout", s(&out), "--out", s(&again)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&again).unwrap(), drawn);
}

#[test]
fn solution_file_verifies() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", &chain_scene(1.0).to_json());
    let sol = dir.path().join("solution.txt");
    let o = run(&["optimize", "--scene", s(&scene), "--solution", s(&sol)]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "--scene", s(&scene), "--solution", s(&sol), "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "status"), Some("ok"));
}

#[test]
fn replay_one_box() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", &chain_scene(1.0).to_json());
    let layout = dir.path().join("layout.json");
    assert_eq!(run(&["optimize", "--scene", s(&scene), "--out", s(&layout)]).status.code(), Some(0));
    let out = dir.path().join("replay");
    let o = run(&["replay", "--scene", s(&scene), "--layout", s(&layout), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let arm_rows = rows.iter().filter(|r| &r[1] == "arm").count();
    assert_eq!(arm_rows, 11);
    assert!(out.join("storyboard.svg").exists());
    let sched = parse_schedule(&fs::read_to_string(out.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(sched.boxes.len(), 1);
}

#[test]
fn schedule_delays_conflicting_box() {
    let dir = TempDir::new().unwrap();
    let l = Layout {
        robots: vec![PlacedRobot {
            id: 3,
            robot_type: "UR5e".into(),
            x: 0.0,
            y: 0.0,
        }],
        belts: vec![],
        junctions: vec![],
        paths: vec![vec![0, 3, 1], vec![0, 3, 2]],
        total_cost: 1.0,
    };
    let layout = write(&dir, "layout.json", &l.to_json());
    let out = dir.path().join("schedule.json");
    let o = run(&["schedule", "--layout", s(&layout), "--out", s(&out), "--dt", "2.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sched = parse_schedule(&fs::read_to_string(&out).unwrap()).unwrap();
    let starts: Vec<f64> = sched.boxes.iter().map(|b| b.tasks[0].start).collect();
    assert_eq!(starts, vec![0.0, 2.0]);
    assert_eq!(field(&stdout(&o), "makespan").unwrap().parse::<f64>().unwrap(), 4.0);
}

#[test]
fn benchmark_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut tables = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("bench{k}.csv"));
        let o = run(&[
            "benchmark",
            "--out",
            s(&out),
            "--seed",
            "7",
            "--resolution",
            "0.5",
            "--outputs",
            "2",
            "--instances",
            "2",
            "--reduced",
            "--time-limit",
            "60",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut rdr = csv::Reader::from_path(&out).unwrap();
        assert_eq!(
            rdr.headers().unwrap().iter().collect::<Vec<_>>(),
            ["instance", "resolution", "n_outputs", "method", "time_ms", "cost", "status"]
        );
        let rows: Vec<Vec<String>> = rdr
            .records()
            .map(|r| {
                let r = r.unwrap();
                r.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != 4)
                    .map(|(_, v)| v.to_string())
                    .collect()
            })
            .collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r[5] == "optimal"), "{rows:?}");
        tables.push(rows);
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn junction_factor_removes_multiway() {
    let dir = TempDir::new().unwrap();
    let scene = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/junction_scene.json");
    let mut kinds = Vec::new();
    for k in ["1", "4"] {
        let out = dir.path().join(format!("k{k}.json"));
        let o = run(&["optimize", "--scene", scene, "--junction-factor", k, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let l = parse_layout(&fs::read_to_string(&out).unwrap()).unwrap();
        kinds.push(l.count_junctions(JunctionKind::MultiWay));
    }
    assert!(kinds[0] >= 1);
    assert_eq!(kinds[1], 0);
}

#[test]
fn replay_belt_grasps_are_constant() {
    let dir = TempDir::new().unwrap();
    let mut sc = Scene::new(
        Point::new(0.0, 0.0),
        Point::new(3.0, 0.0),
        0.5,
        Point::new(-0.25, 0.0),
        vec![Output {
            pos: Point::new(3.0, 0.0),
            weight: 1.0,
        }],
    );
    sc.catalog = vec![RobotType::ur5e(), RobotType::belt(&sc.costs)];
    let scene = write(&dir, "scene.json", &sc.to_json());
    let layout = dir.path().join("layout.json");
    assert_eq!(run(&["optimize", "--scene", s(&scene), "--out", s(&layout)]).status.code(), Some(0));
    assert!(!parse_layout(&fs::read_to_string(&layout).unwrap()).unwrap().belts.is_empty());
    let out = dir.path().join("replay");
    let o = run(&["replay", "--scene", s(&scene), "--layout", s(&layout), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let mut grasps: std::collections::BTreeMap<String, Vec<Vec<String>>> = Default::default();
    for r in rdr.records().map(Result::unwrap).filter(|r| &r[1] == "belt") {
        grasps
            .entry(r[0].to_string())
            .or_default()
            .push(r.iter().skip(4).map(str::to_string).collect());
    }
    assert!(!grasps.is_empty());
    for rows in grasps.values() {
        assert!(rows.len() > 1);
        assert!(rows.iter().all(|r| r == &rows[0]));
    }
}
