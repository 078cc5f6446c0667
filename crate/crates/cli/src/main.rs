//! Command-line front end: open-loop scenario runs, closed-loop control,
//! and design-space tuning. Every run writes its outputs together with a
//! manifest of content digests, so results can be archived and compared.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use gripper_core::control::{run_closed_loop, ClosedLoopError};
use gripper_core::scenario::{GoalSpec, Scenario};
use gripper_core::sim::{SimError, SimSession};
use gripper_core::trace::Trace;
use gripper_core::tune::{optimize, sweep, GridSpec, OptimizeConfig, TuneError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Built-in scenarios, resolvable by name wherever a path is accepted.
const PRESETS: &[(&str, &str)] = &[
    ("closing", include_str!("../scenarios/closing.scn")),
    ("chatter", include_str!("../scenarios/chatter.scn")),
    ("steep", include_str!("../scenarios/steep.scn")),
    ("clutch_bench", include_str!("../scenarios/clutch_bench.scn")),
    ("clutch_bench_tight", include_str!("../scenarios/clutch_bench_tight.scn")),
    ("clutch_bench_loose", include_str!("../scenarios/clutch_bench_loose.scn")),
    ("handback", include_str!("../scenarios/handback.scn")),
    ("retrieve", include_str!("../scenarios/retrieve.scn")),
    ("retrieve_short", include_str!("../scenarios/retrieve_short.scn")),
    ("retrieve_near", include_str!("../scenarios/retrieve_near.scn")),
    ("retrieve_far", include_str!("../scenarios/retrieve_far.scn")),
    ("soft_touch", include_str!("../scenarios/soft_touch.scn")),
    ("release", include_str!("../scenarios/release.scn")),
];

#[derive(Parser)]
#[command(name = "gripper", version)]
#[command(about = "Quasi-static simulation, control, and tuning for a \
single-motor three-mode gripper", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario open loop and write trace, events, and metadata.
    Simulate {
        /// Scenario file path, or the name of a built-in preset.
        #[arg(long)]
        scenario: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the sample step, seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the run length, seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Drop residual scatter and run with the fixed nominal residuals.
        #[arg(long)]
        deterministic: bool,
    },
    /// Drive the motor-side controller against the simulator.
    Control {
        /// Scenario file path, or the name of a built-in preset.
        #[arg(long)]
        scenario: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the bend goal, degrees.
        #[arg(long)]
        goal_theta_deg: Option<f64>,
        /// Override the grasp force goal, newtons.
        #[arg(long)]
        goal_f_tip: Option<f64>,
        /// Override the pull-in goal, metres.
        #[arg(long)]
        goal_d_pi: Option<f64>,
        /// Override the grasp→pull-in motor torque threshold, N·m.
        #[arg(long)]
        threshold: Option<f64>,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Drop residual scatter and run with the fixed nominal residuals.
        #[arg(long)]
        deterministic: bool,
    },
    /// Sweep lead angle and clutch tightening; report feasibility and the
    /// best point.
    Tune {
        /// Lead-angle grid in degrees, as low:high:steps.
        #[arg(long, default_value = "10:70:25")]
        lambda: String,
        /// Tightening-torque grid in N·m, as low:high:steps.
        #[arg(long, default_value = "0.1:1.5:15")]
        t_scw: String,
        /// Motor torque cap the grasp force is evaluated at, N·m.
        #[arg(long, default_value_t = 0.8)]
        torque_cap: f64,
        /// Minimum closing speed, metres per motor radian.
        #[arg(long, default_value_t = 0.0)]
        speed_floor: f64,
        /// Required driving/opposing residual ratio before a point is
        /// trusted not to chatter.
        #[arg(long, default_value_t = 2.0)]
        chatter_safety: f64,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the built-in scenario presets.
    Scenarios,
}

/// A failed run, carrying the process exit code.
enum Failure {
    /// Bad input: unknown preset, malformed scenario file. Exit 2.
    Usage(String),
    /// The scenario or design space cannot do what was asked. Exit 3.
    Infeasible(String),
    /// The closed-loop controller faulted or refused the goal. Exit 4.
    Control(String),
    /// Filesystem trouble. Exit 1.
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Control(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Infeasible(m) | Failure::Control(m) | Failure::Io(m) => m,
        }
    }
}

fn sim_failure(e: SimError) -> Failure {
    Failure::Infeasible(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Cmd::Simulate {
            scenario,
            out,
            seed,
            dt,
            duration,
            deterministic,
        } => {
            let (mut sc, label) = load_scenario(&scenario)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(v) = dt {
                sc.dt = v;
            }
            if let Some(v) = duration {
                sc.duration = v;
            }
            if deterministic {
                sc.noise = None;
            }
            let trace = SimSession::run(&sc).map_err(sim_failure)?;
            let files = vec![
                ("trace.csv".to_string(), trace.to_csv()),
                ("events.csv".to_string(), trace.events_csv()),
                ("meta.txt".to_string(), trace.meta(&sc, VERSION)),
            ];
            let written = write_outputs(&out, files, sc.seed)?;
            print_trace_summary(&label, &sc, &trace);
            println!("wrote {}", written.join(", "));
            Ok(())
        }
        Cmd::Control {
            scenario,
            out,
            goal_theta_deg,
            goal_f_tip,
            goal_d_pi,
            threshold,
            seed,
            deterministic,
        } => {
            let (mut sc, label) = load_scenario(&scenario)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            if deterministic {
                sc.noise = None;
            }
            let mut goal = sc.goal.unwrap_or(GoalSpec {
                theta_f: sc.params.theta_f_stop,
                f_tip: 0.0,
                d_pi: 0.0,
                tau_m_threshold: None,
            });
            if let Some(d) = goal_theta_deg {
                goal.theta_f = d.to_radians();
            }
            if let Some(f) = goal_f_tip {
                goal.f_tip = f;
            }
            if let Some(d) = goal_d_pi {
                goal.d_pi = d;
            }
            if let Some(t) = threshold {
                goal.tau_m_threshold = Some(t);
            }
            sc.goal = Some(goal);

            let run = run_closed_loop(&sc).map_err(|e| match e {
                ClosedLoopError::Sim(e) => sim_failure(e),
                ClosedLoopError::Control(e) => Failure::Control(e.to_string()),
            })?;

            let mut log = String::new();
            for (obs, cmd) in &run.log {
                log.push_str(&obs.to_line());
                log.push('\n');
                log.push_str(&cmd.to_line());
                log.push('\n');
            }
            let phases: Vec<&str> = run.phases.iter().map(|p| p.as_str()).collect();
            let mut summary = run.summary.render();
            let _ = writeln!(summary, "phases = {}", phases.join(" -> "));
            let _ = writeln!(summary, "stop = {}", run.trace.stop.as_str());

            let files = vec![
                ("trace.csv".to_string(), run.trace.to_csv()),
                ("events.csv".to_string(), run.trace.events_csv()),
                ("log.txt".to_string(), log),
                ("summary.txt".to_string(), summary.clone()),
                ("meta.txt".to_string(), run.trace.meta(&sc, VERSION)),
            ];
            let written = write_outputs(&out, files, sc.seed)?;
            println!("scenario {label} (closed loop)");
            print!("{summary}");
            println!("wrote {}", written.join(", "));
            Ok(())
        }
        Cmd::Tune {
            lambda,
            t_scw,
            torque_cap,
            speed_floor,
            chatter_safety,
            out,
        } => {
            let (lambda_deg, lambda_steps) = parse_grid_axis(&lambda, "--lambda")?;
            let (t_range, t_steps) = parse_grid_axis(&t_scw, "--t-scw")?;
            let grid = GridSpec::from_ranges(
                (lambda_deg.0.to_radians(), lambda_deg.1.to_radians()),
                lambda_steps,
                t_range,
                t_steps,
            );
            if grid.is_empty() {
                return Err(Failure::Usage("the tuning grid is empty".into()));
            }
            let base = gripper_core::MechParams::default();
            let report = sweep(&grid, &base, torque_cap);
            let files = vec![("feasibility.csv".to_string(), report.to_csv())];
            let written = write_outputs(&out, files, 0)?;
            println!(
                "evaluated {} grid points, {} valid",
                report.evaluated,
                report.rows.len()
            );
            let cfg = OptimizeConfig {
                torque_cap,
                speed_floor,
                chatter_safety,
            };
            let best = optimize(&grid, &base, &cfg).map_err(|e: TuneError| {
                println!("wrote {}", written.join(", "));
                Failure::Infeasible(e.to_string())
            })?;
            println!(
                "best: lambda = {:.3} deg, t_scw = {:.4} N·m, f_tip_at_cap = {:.3} N, \
                 closing_speed = {:.6} m/rad, chatter_margin = {:.3}",
                best.lambda.to_degrees(),
                best.t_scw,
                best.f_tip_at_cap,
                best.closing_speed,
                best.chatter_margin
            );
            println!("wrote {}", written.join(", "));
            Ok(())
        }
        Cmd::Scenarios => {
            for (name, text) in PRESETS {
                let sc = Scenario::parse(text)
                    .unwrap_or_else(|e| panic!("built-in preset {name} is invalid: {e}"));
                let desc = text
                    .lines()
                    .find_map(|l| l.trim().strip_prefix('#'))
                    .unwrap_or("")
                    .trim();
                println!("{:<20} {:<12} {}", name, sc.kind.as_str(), desc);
            }
            Ok(())
        }
    }
}

/// Resolves a `--scenario` argument: an existing file path wins, then a
/// preset name.
fn load_scenario(arg: &str) -> Result<(Scenario, String), Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
        let sc = Scenario::parse(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok((sc, path.display().to_string()));
    }
    if let Some((name, text)) = PRESETS.iter().find(|(n, _)| *n == arg) {
        let sc = Scenario::parse(text)
            .unwrap_or_else(|e| panic!("built-in preset {name} is invalid: {e}"));
        return Ok((sc, name.to_string()));
    }
    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    Err(Failure::Usage(format!(
        "`{arg}` is neither a file nor a preset; presets: {}",
        names.join(", ")
    )))
}

fn parse_grid_axis(arg: &str, flag: &str) -> Result<((f64, f64), usize), Failure> {
    let parts: Vec<&str> = arg.split(':').collect();
    let bad = || Failure::Usage(format!("{flag} expects low:high:steps, got `{arg}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(bad());
    }
    Ok(((lo, hi), steps))
}

fn print_trace_summary(label: &str, sc: &Scenario, trace: &Trace) {
    println!("scenario {label} ({})", sc.kind.as_str());
    let modes: Vec<&str> = trace.mode_sequence().iter().map(|m| m.as_str()).collect();
    println!("modes = {}", modes.join(" -> "));
    println!("stop = {}", trace.stop.as_str());
    println!(
        "rows = {}, events = {}, chatter = {}",
        trace.rows.len(),
        trace.events.len(),
        trace.chatter
    );
    println!(
        "motor_work = {} J, tip_work = {} J",
        trace.motor_work, trace.tip_work
    );
}

/// Builds the manifest, then writes every file (manifest last). Contents
/// are fully assembled before the first write, so a failed run leaves no
/// partial output set behind.
fn write_outputs(
    dir: &Path,
    files: Vec<(String, String)>,
    seed: u64,
) -> Result<Vec<String>, Failure> {
    let args: Vec<String> = std::env::args().collect();
    let mut manifest = String::new();
    let _ = writeln!(manifest, "tool = gripper {VERSION}");
    let _ = writeln!(manifest, "command = {}", args.join(" "));
    let _ = writeln!(manifest, "seed = {seed}");
    for (name, content) in &files {
        let digest = Sha256::digest(content.as_bytes());
        let _ = writeln!(
            manifest,
            "file {name} bytes={} sha256={:x}",
            content.len(),
            digest
        );
    }

    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Io(format!("creating {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, content) in files
        .into_iter()
        .chain(std::iter::once(("manifest.txt".to_string(), manifest)))
    {
        let path = dir.join(&name);
        std::fs::write(&path, content)
            .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
