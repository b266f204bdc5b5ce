mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "robolayout", version, about = "Robot, conveyor and junction layout optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Milp,
    Astar,
    Oracle,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub time_limit: f64,
    /// Absolute optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a scene and write the layout document.
    Optimize {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Milp)]
        method: Method,
        /// Also draw the layout.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the raw solver values.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Multiply multi-way and turning junction costs.
        #[arg(long)]
        junction_factor: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve a scene with the A* baseline.
    Baseline {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
    },
    /// Run both methods on generated instances and write a CSV report.
    Benchmark {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid spacings in meters.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        resolution: Vec<f64>,
        /// Output counts.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        outputs: Vec<usize>,
        /// Instances per (resolution, outputs) cell.
        #[arg(long, default_value_t = 5)]
        instances: u64,
        /// Use the 4 m x 4 m floor instead of 8 m x 8 m.
        #[arg(long)]
        reduced: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Build the conflict-free task schedule of a layout.
    Schedule {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
    /// Schedule a layout and optimize the robot trajectories.
    Replay {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        /// Directory for schedule.json, trajectory.csv and storyboard.svg.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long, default_value_t = 10)]
        steps_per_dt: usize,
        /// Storyboard frame interval in steps.
        #[arg(long, default_value_t = 5)]
        frame_every: usize,
    },
    /// Check a solution file against the scene's model, row by row.
    Verify {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Also compare the objective with exhaustive search.
        #[arg(long)]
        oracle: bool,
    },
    /// Draw a layout as SVG.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(commands::Class::Io.code());
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Optimize {
            scene,
            out,
            method,
            svg,
            solution,
            junction_factor,
            solver,
        } => commands::optimize(&commands::OptimizeRun {
            scene,
            out,
            method,
            svg,
            solution,
            junction_factor,
            solver,
        }),
        Command::Baseline {
            scene,
            out,
            svg,
            time_limit,
        } => commands::optimize(&commands::OptimizeRun {
            scene,
            out,
            method: Method::Astar,
            svg,
            solution: None,
            junction_factor: None,
            solver: SolverArgs { time_limit, gap: 1e-6 },
        }),
        Command::Benchmark {
            out,
            seed,
            resolution,
            outputs,
            instances,
            reduced,
            solver,
        } => commands::benchmark(&out, seed, &resolution, &outputs, instances, reduced, &solver),
        Command::Schedule { layout, out, dt } => commands::schedule(&layout, out.as_deref(), dt),
        Command::Replay {
            scene,
            layout,
            out,
            dt,
            steps_per_dt,
            frame_every,
        } => commands::replay(&scene, &layout, &out, dt, steps_per_dt, frame_every),
        Command::Verify {
            scene,
            solution,
            tolerance,
            oracle,
        } => commands::verify(&scene, &solution, tolerance, oracle),
        Command::Render { scene, layout, out } => commands::render(&scene, &layout, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = commands::classify(&e);
            println!("status: {}", class.name());
            eprintln!("error: {e:#}");
            ExitCode::from(class.code())
        }
    }
}
