use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use layout_milp::{parse_solution, write_solution, MilpParams, MilpStatus};
use robolayout::astar::{astar_layout, AstarFailure, AstarParams};
use robolayout::bench::{generate_scene, BenchConfig};
use robolayout::motion::{build_motion_problem, solve_trajectories, MotionError, MotionParams, Trajectories};
use robolayout::netmodel::{build_network, compile_milp, optimize as solve_milp_layout};
use robolayout::oracle::{brute_force_layout, verify_solution, DEFAULT_CAP};
use robolayout::{build_reachability_graph, parse_layout, parse_scene, schedule_layout, Layout, Scene};

use crate::render::{render_layout, render_storyboard};
use crate::{Method, SolverArgs};

/// Failure classes with dedicated exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Infeasible,
    Violation,
    Timeout,
    Io,
}

impl Class {
    pub fn code(self) -> u8 {
        match self {
            Class::Infeasible | Class::Violation => 2,
            Class::Timeout => 3,
            Class::Io => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Infeasible => "infeasible",
            Class::Violation => "violation",
            Class::Timeout => "timeout",
            Class::Io => "io",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub class: Class,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.class.name(), self.message)
    }
}

impl std::error::Error for Failure {}

fn fail(class: Class, message: impl Into<String>) -> anyhow::Error {
    Failure {
        class,
        message: message.into(),
    }
    .into()
}

/// Errors not raised as a [`Failure`] are input or output problems.
pub fn classify(e: &anyhow::Error) -> Class {
    e.downcast_ref::<Failure>().map_or(Class::Io, |f| f.class)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_layout(path: &Path) -> Result<Layout> {
    parse_layout(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn limit(seconds: f64) -> Result<Duration> {
    if !(seconds.is_finite() && seconds > 0.0) {
        return Err(fail(Class::Io, "time limit must be positive"));
    }
    Ok(Duration::from_secs_f64(seconds))
}

fn milp_params(solver: &SolverArgs) -> Result<MilpParams> {
    Ok(MilpParams {
        time_limit: limit(solver.time_limit)?,
        abs_gap: solver.gap,
        ..MilpParams::default()
    })
}

pub struct OptimizeRun {
    pub scene: PathBuf,
    pub out: Option<PathBuf>,
    pub method: Method,
    pub svg: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub junction_factor: Option<f64>,
    pub solver: SolverArgs,
}

fn emit_layout(run: &OptimizeRun, scene: &Scene, layout: &Layout) -> Result<()> {
    match &run.out {
        Some(p) => write(p, &layout.to_json())?,
        None => println!("{}", layout.to_json()),
    }
    if let Some(p) = &run.svg {
        write(p, &render_layout(scene, layout))?;
    }
    Ok(())
}

pub fn optimize(run: &OptimizeRun) -> Result<()> {
    let mut scene = load_scene(&run.scene)?;
    if let Some(k) = run.junction_factor {
        scene.costs = scene.costs.with_junction_factor(k);
    }
    let start = Instant::now();
    match run.method {
        Method::Milp => {
            let o = solve_milp_layout(&scene, &milp_params(&run.solver)?)?;
            let ms = start.elapsed().as_millis();
            if let Some(p) = &run.solution {
                write(p, &write_solution(&o.milp.model, &o.solution))?;
            }
            if let Some(layout) = &o.layout {
                emit_layout(run, &scene, layout)?;
            }
            match o.solution.status {
                MilpStatus::Optimal => {
                    println!("status: optimal");
                    println!("cost: {}", o.solution.objective);
                    println!("time_ms: {ms}");
                    Ok(())
                }
                MilpStatus::Timeout => Err(fail(
                    Class::Timeout,
                    format!("no proof of optimality after {ms} ms (best {})", o.solution.objective),
                )),
                MilpStatus::Infeasible | MilpStatus::Unbounded => {
                    Err(fail(Class::Infeasible, format!("solver status {}", o.solution.status.as_str())))
                }
            }
        }
        Method::Astar => {
            let g = build_reachability_graph(&scene);
            let params = AstarParams {
                time_limit: limit(run.solver.time_limit)?,
                ..AstarParams::default()
            };
            match astar_layout(&scene, &g, &params) {
                Ok(r) => {
                    emit_layout(run, &scene, &r.layout)?;
                    println!("status: optimal");
                    println!("cost: {}", r.layout.total_cost);
                    println!("time_ms: {}", start.elapsed().as_millis());
                    Ok(())
                }
                Err(e) => Err(match e.failure {
                    AstarFailure::Infeasible => fail(Class::Infeasible, e.to_string()),
                    AstarFailure::Timeout | AstarFailure::OutOfMemory => fail(Class::Timeout, e.to_string()),
                }),
            }
        }
        Method::Oracle => {
            let g = build_reachability_graph(&scene);
            let report = brute_force_layout(&g, &scene, DEFAULT_CAP).map_err(|e| fail(Class::Io, e.to_string()))?;
            match &run.out {
                Some(p) => write(p, &report.to_json())?,
                None => println!("{}", report.to_json()),
            }
            match report.cost {
                Some(c) => {
                    println!("status: optimal");
                    println!("cost: {c}");
                    println!("time_ms: {}", start.elapsed().as_millis());
                    Ok(())
                }
                None => Err(fail(Class::Infeasible, "no placement subset connects every output")),
            }
        }
    }
}

pub fn benchmark(
    out: &Path,
    seed: u64,
    resolutions: &[f64],
    outputs: &[usize],
    instances: u64,
    reduced: bool,
    solver: &SolverArgs,
) -> Result<()> {
    let cfg = if reduced { BenchConfig::reduced() } else { BenchConfig::full() };
    let params = milp_params(solver)?;
    let astar = AstarParams {
        time_limit: limit(solver.time_limit)?,
        ..AstarParams::default()
    };
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["instance", "resolution", "n_outputs", "method", "time_ms", "cost", "status"])?;
        for &res in resolutions {
            for &n in outputs {
                for i in 0..instances {
                    let inst = seed + i;
                    let row = |w: &mut csv::Writer<&mut Vec<u8>>, method: &str, ms: u128, cost: Option<f64>, status: &str| {
                        w.write_record([
                            inst.to_string(),
                            res.to_string(),
                            n.to_string(),
                            method.to_string(),
                            ms.to_string(),
                            cost.map(|c| c.to_string()).unwrap_or_default(),
                            status.to_string(),
                        ])
                    };
                    let scene = match generate_scene(&cfg, res, n, inst) {
                        Ok(s) => s,
                        Err(_) => {
                            row(&mut w, "milp", 0, None, "placement_error")?;
                            row(&mut w, "astar", 0, None, "placement_error")?;
                            continue;
                        }
                    };
                    let t = Instant::now();
                    match solve_milp_layout(&scene, &params) {
                        Ok(o) => {
                            let cost = o.solution.has_incumbent().then_some(o.solution.objective);
                            row(&mut w, "milp", t.elapsed().as_millis(), cost, o.solution.status.as_str())?
                        }
                        Err(_) => row(&mut w, "milp", t.elapsed().as_millis(), None, "error")?,
                    }
                    let t = Instant::now();
                    let g = build_reachability_graph(&scene);
                    match astar_layout(&scene, &g, &astar) {
                        Ok(r) => row(&mut w, "astar", t.elapsed().as_millis(), Some(r.layout.total_cost), "optimal")?,
                        Err(e) => row(&mut w, "astar", t.elapsed().as_millis(), None, e.failure.as_str())?,
                    }
                    w.flush()?;
                }
            }
        }
        w.flush()?;
    }
    write(out, std::str::from_utf8(&buf).context("csv is utf-8")?)?;
    println!("status: ok");
    Ok(())
}

pub fn schedule(layout: &Path, out: Option<&Path>, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(fail(Class::Io, "dt must be positive"));
    }
    let l = load_layout(layout)?;
    let s = schedule_layout(&l, dt);
    match out {
        Some(p) => {
            write(p, &s.to_json())?;
            println!("status: ok");
            println!("makespan: {}", s.makespan());
        }
        None => println!("{}", s.to_json()),
    }
    Ok(())
}

fn trajectory_csv(t: &Trajectories) -> Result<String> {
    let rows = t.rows();
    let width = rows.iter().map(|r| r.3.len()).max().unwrap_or(0);
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["robot".to_string(), "kind".to_string(), "step".to_string()];
        header.extend((0..width).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for (robot, kind, step, values) in &rows {
            let mut rec = vec![robot.to_string(), kind.to_string(), step.to_string()];
            rec.extend(values.iter().map(|v| v.to_string()));
            rec.resize(3 + width, String::new());
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).context("csv is utf-8")?)
}

pub fn replay(scene: &Path, layout: &Path, out: &Path, dt: f64, steps_per_dt: usize, frame_every: usize) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) || steps_per_dt == 0 {
        return Err(fail(Class::Io, "dt and steps per dt must be positive"));
    }
    let scene = load_scene(scene)?;
    let l = load_layout(layout)?;
    let sched = schedule_layout(&l, dt);
    write(&out.join("schedule.json"), &sched.to_json())?;
    let problem = build_motion_problem(&sched, &l, &scene, steps_per_dt).map_err(|e| fail(Class::Infeasible, e.to_string()))?;
    let (traj, failure) = match solve_trajectories(&problem, &MotionParams::default()) {
        Ok(t) => (t, None),
        Err(MotionError::ResidualFailure {
            residual,
            constraint,
            trajectories,
        }) => (
            *trajectories,
            Some(fail(Class::Infeasible, format!("residual {residual:.3e} on {constraint}"))),
        ),
        Err(e) => return Err(fail(Class::Infeasible, e.to_string())),
    };
    write(&out.join("trajectory.csv"), &trajectory_csv(&traj)?)?;
    write(
        &out.join("storyboard.svg"),
        &render_storyboard(&scene, &l, &problem, &traj, frame_every),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    println!("status: ok");
    println!("makespan: {}", sched.makespan());
    println!("objective: {}", traj.report.objective);
    println!("max_residual: {:e}", traj.report.max_residual);
    Ok(())
}

pub fn verify(scene: &Path, solution: &Path, tolerance: f64, oracle: bool) -> Result<()> {
    let scene = load_scene(scene)?;
    let g = build_reachability_graph(&scene);
    let net = build_network(&g, &scene);
    let mm = compile_milp(&net, &g, &scene);
    let text = parse_solution(&read(solution)?).with_context(|| format!("parsing {}", solution.display()))?;
    let values = text
        .to_values(&mm.model)
        .with_context(|| format!("matching {} to the model", solution.display()))?;
    let verdicts = verify_solution(&mm, &values);
    println!("{}", verdicts.to_json());
    if !verdicts.passes(tolerance) {
        return Err(fail(
            Class::Violation,
            format!("max violation {:.3e} above {tolerance:.1e}", verdicts.max_violation()),
        ));
    }
    let objective = mm.model.objective_value(&values);
    if oracle {
        let report = brute_force_layout(&g, &scene, DEFAULT_CAP).map_err(|e| fail(Class::Io, e.to_string()))?;
        match report.cost {
            Some(c) if (c - objective).abs() <= 1e-9 => {}
            other => {
                return Err(fail(
                    Class::Violation,
                    format!("objective {objective} differs from exhaustive optimum {other:?}"),
                ))
            }
        }
    }
    println!("status: ok");
    println!("objective: {objective}");
    Ok(())
}

pub fn render(scene: &Path, layout: &Path, out: &Path) -> Result<()> {
    let scene = load_scene(scene)?;
    let l = load_layout(layout)?;
    write(out, &render_layout(&scene, &l))?;
    println!("status: ok");
    println!("glyphs: {}", l.element_count());
    Ok(())
}
