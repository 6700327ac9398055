use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ddr_escape::game::{GameParams, ReducedState};
use ddr_escape::inverse::{rasterize_partition, synthesize};
use ddr_escape::io::{
    render_partition, render_trajectory, write_partition, write_retro_path, write_trajectory,
    ScenarioConfig,
};
use ddr_escape::simulator::{simulate, OptimalEvader, OptimalPursuer};
use ddr_escape::synthesis::{trajectory, FieldCurve};
use ddr_escape::verification::{run_sweep, SweepSpec};

const EXIT_CONFIG: u8 = 1;
const EXIT_TRUNCATED: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ddr-escape",
    version,
    about = "Time-optimal escape of a differential-drive robot from a moving detection disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-loop simulation of a scenario; writes the trajectory CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Overrides the config step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Rasterizes the reduced-space partition into a class-code grid.
    Partition {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Retro-time trajectory of a terminal angle, or the inverse at a point.
    Synthesize {
        #[command(flatten)]
        params: ParamArgs,
        /// Terminal angle on the usable part (rad).
        #[arg(long, conflicts_with_all = ["x", "y"])]
        s: Option<f64>,
        /// Retro-time horizon; defaults to the x-axis crossing.
        #[arg(long, requires = "s")]
        tau: Option<f64>,
        /// Reduced-space query point.
        #[arg(long, requires = "y")]
        x: Option<f64>,
        #[arg(long, requires = "x")]
        y: Option<f64>,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical verification sweep; writes a JSON report.
    Verify {
        #[arg(long, requires = "rho_l")]
        rho_v: Option<f64>,
        #[arg(long, requires = "rho_v")]
        rho_l: Option<f64>,
        /// Single terminal angle instead of the evenly spaced set.
        #[arg(long)]
        s: Option<f64>,
        /// Overrides both the position and the Hamiltonian tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Numeric integration step.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Scenario file to take the game parameters from.
    #[arg(long, conflicts_with_all = ["rho_v", "rho_l"])]
    config: Option<PathBuf>,
    /// Speed ratio V_d / V_r (with V_r = b = 1).
    #[arg(long, default_value_t = 0.6)]
    rho_v: f64,
    /// Length ratio r_d / b.
    #[arg(long, default_value_t = 2.0)]
    rho_l: f64,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: EXIT_CONFIG,
            err: e.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::parse(&text).with_context(|| format!("config {}", path.display()))
}

fn params_from(args: &ParamArgs) -> anyhow::Result<GameParams> {
    match &args.config {
        Some(path) => Ok(load_config(path)?.params),
        None => Ok(GameParams::from_ratios(args.rho_v, args.rho_l)?),
    }
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Simulate {
            config,
            out,
            svg,
            dt,
        } => {
            let cfg = load_config(&config)?;
            let dt = dt.unwrap_or(cfg.dt);
            if dt.is_nan() || dt <= 0.0 {
                bail_cfg("--dt must be > 0")?;
            }
            let start = cfg.initial_state()?;
            let tr = simulate(
                &start,
                &OptimalEvader,
                &OptimalPursuer,
                &cfg.params,
                dt,
                cfg.t_max,
            )?;
            write_trajectory(sink(&out)?, &tr)?;
            if let Some(path) = svg {
                write_text(&path, &render_trajectory(&tr, cfg.params.r_d()))?;
            }
            let switches = tr.switches().count();
            match tr.escape_time {
                Some(t) => {
                    eprintln!("escape at t = {t:.6} s, {switches} wheel switch(es)");
                    Ok(0)
                }
                None => {
                    eprintln!("no escape by t_max = {} s", cfg.t_max);
                    Ok(EXIT_TRUNCATED)
                }
            }
        }
        Command::Partition {
            params,
            resolution,
            out,
            svg,
        } => {
            let p = params_from(&params)?;
            let map = rasterize_partition(&p, resolution)?;
            write_partition(sink(&out)?, &map)?;
            if let Some(path) = svg {
                write_text(&path, &render_partition(&map))?;
            }
            Ok(0)
        }
        Command::Synthesize {
            params,
            s,
            tau,
            x,
            y,
            dt,
            out,
        } => {
            let p = params_from(&params)?;
            match (s, x, y) {
                (Some(s), _, _) => {
                    let tau = match tau {
                        Some(t) => t,
                        None => FieldCurve::new(s, &p)?.axis_time(),
                    };
                    let path = trajectory(s, tau, &p, dt)?;
                    write_retro_path(sink(&out)?, &path)?;
                }
                (None, Some(x), Some(y)) => {
                    let r = synthesize(ReducedState::new(x, y), &p)?;
                    let mut w = sink(&out)?;
                    serde_json::to_writer_pretty(&mut w, &r)?;
                    writeln!(w)?;
                }
                _ => bail_cfg("give --s, or --x and --y")?,
            }
            Ok(0)
        }
        Command::Verify {
            rho_v,
            rho_l,
            s,
            tolerance,
            dt,
            out,
        } => {
            let mut spec = SweepSpec::default();
            if let (Some(rv), Some(rl)) = (rho_v, rho_l) {
                spec.rho_v = vec![rv];
                spec.rho_l = vec![rl];
            }
            if let Some(s) = s {
                spec.angles = vec![s];
            }
            if let Some(tol) = tolerance {
                spec.position_tol = tol;
                spec.hamiltonian_tol = tol;
            }
            if let Some(dt) = dt {
                spec.numeric_dt = dt;
            }
            let report = run_sweep(&spec)?;
            let mut w = sink(&out)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            eprintln!(
                "{} trajectories, {} failures, max deviation {:.3e}, max |H| {:.3e}",
                report.trajectories.len(),
                report.failures,
                report.max_deviation,
                report.max_abs_hamiltonian
            );
            if report.passed {
                Ok(0)
            } else {
                Err(Failure {
                    code: EXIT_VERIFY,
                    err: anyhow::anyhow!("verification failed"),
                })
            }
        }
    }
}

fn bail_cfg(msg: &str) -> anyhow::Result<()> {
    bail!("{msg}")
}
