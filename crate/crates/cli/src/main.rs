use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpd_cli::error::CliError;
use cpd_cli::export;
use cpd_cli::pipeline::{self, Prepared};
use cpd_cli::scenario::{PhasedPlanner, ReflectorPlanner, Scenario};
use cpd_cli::sweep::{self, SweepAxes};
use cpd_core::geometry::{cr3bp, Cr3bpState};
use cpd_core::{evaluate, validate_reflector_plan};

/// Contact plan design for cislunar reflector / phased-array networks.
#[derive(Parser)]
#[command(name = "cpd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Use this visibility trace instead of computing geometry.
    #[arg(long)]
    visibility_trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one catalog orbit and print its states.
    Propagate {
        #[arg(long)]
        orbit: String,
        /// Start offset along the orbit, time units.
        #[arg(long, default_value_t = 0.0)]
        phase_tu: f64,
        /// Span to propagate, time units.
        #[arg(long, default_value_t = 1.0)]
        duration_tu: f64,
        /// Number of output intervals.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = cpd_core::geometry::DEFAULT_STEP)]
        step_tu: f64,
        /// Orbit catalog TOML instead of the built-in one.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the visibility trace of a scenario.
    Visibility {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan the reflector topology.
    PlanR {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, default_value = "rcpd")]
        planner: ReflectorPlanner,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan the phased-array topology against a reflector plan.
    PlanP {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long)]
        reflector_plan: PathBuf,
        #[arg(long, default_value = "pcpd")]
        planner: PhasedPlanner,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute metrics of a reflector plan and a phased-array plan.
    Evaluate {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long)]
        reflector_plan: PathBuf,
        #[arg(long)]
        phased_plan: PathBuf,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every scheme of a scenario end to end.
    Run {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario over a grid of |U_P|, |U_R| and L_G values.
    Sweep {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, value_delimiter = ',')]
        p_users: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        r_users: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        gs_links: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<Scenario, CliError> {
    let mut s = Scenario::load(path)?;
    s.apply_env()?;
    Ok(s)
}

fn prepare(input: &ScenarioArgs) -> Result<Prepared, CliError> {
    let scenario = load(&input.scenario)?;
    let trace = input.visibility_trace.as_deref().map(export::read_trace).transpose()?;
    pipeline::prepare(&scenario, trace.as_ref())
}

fn scenario_name(p: &Prepared) -> &str {
    if p.scenario.name.is_empty() {
        "scenario"
    } else {
        &p.scenario.name
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn propagate(
    orbit: &str,
    phase: f64,
    duration: f64,
    samples: usize,
    step: f64,
    catalog: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut s = Scenario::default();
    s.geometry.catalog = catalog.map(Path::to_path_buf);
    let catalog = s.catalog()?;
    let (x0, _) = catalog.initial_state(orbit)?;
    if samples == 0 {
        return Err(CliError::Validation("--samples must be positive".into()));
    }
    let mut state = Cr3bpState::from_array(x0, catalog.mu())?;
    if phase > 0.0 {
        state = cr3bp::propagate(&state, phase, step)?;
    }
    let mut text = String::from("t_tu,x,y,z,vx,vy,vz,jacobi\n");
    let dt = duration / samples as f64;
    for k in 0..=samples {
        if k > 0 {
            state = cr3bp::propagate(&state, dt, step)?;
        }
        let x = state.to_array();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            k as f64 * dt,
            x[0],
            x[1],
            x[2],
            x[3],
            x[4],
            x[5],
            state.jacobi()
        ));
    }
    write_out(out, &text)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Propagate {
            orbit,
            phase_tu,
            duration_tu,
            samples,
            step_tu,
            catalog,
            out,
        } => propagate(&orbit, phase_tu, duration_tu, samples, step_tu, catalog.as_deref(), out.as_deref()),
        Command::Visibility { scenario, out } => {
            let p = pipeline::prepare(&load(&scenario)?, None)?;
            export::write_trace(&out, &p.trace)
        }
        Command::PlanR { input, planner, out } => {
            let p = prepare(&input)?;
            let o = pipeline::plan_reflector(&p, planner)?;
            export::write_reflector_plan(&out.join(format!("reflector_{planner}.csv")), &o.plan, &p.nodes)?;
            let key = format!("{},{planner},none,", scenario_name(&p));
            let lines: Vec<String> = export::reflector_rows(&o, &p.nodes)
                .into_iter()
                .map(|(m, v)| format!("{key}{m},{v}"))
                .collect();
            export::write_lines(&out.join("reflector_summary.csv"), "scenario,reflector,phased,metric,value", &lines)
        }
        Command::PlanP {
            input,
            reflector_plan,
            planner,
            out,
        } => {
            let p = prepare(&input)?;
            let rplan = export::read_reflector_plan(&reflector_plan, &p.nodes, p.scenario.rcpd.plan_params(), p.vis.periods())?;
            let plan = pipeline::plan_phased(&p, &rplan, planner)?;
            export::write_phased_plan(&out.join(format!("phased_{planner}.csv")), &plan, &p.nodes)
        }
        Command::Evaluate {
            input,
            reflector_plan,
            phased_plan,
            out,
        } => {
            let p = prepare(&input)?;
            let rplan = export::read_reflector_plan(&reflector_plan, &p.nodes, p.scenario.rcpd.plan_params(), p.vis.periods())?;
            let structural: Vec<_> = validate_reflector_plan(&rplan, &p.vis, &p.nodes)?
                .into_iter()
                .filter(|v| v.is_structural())
                .collect();
            if let Some(v) = structural.first() {
                return Err(CliError::Validation(format!("reflector plan: {v}")));
            }
            let pplan = export::read_phased_plan(&phased_plan, &p.nodes, &p.grid, p.vis.periods())?;
            pipeline::check_phased(&p, &pplan, PhasedPlanner::Pcpd)?;
            let report = evaluate(&rplan, &pplan, &p.grid, &p.nodes)?;
            let mut text = String::from("scenario,metric,value\n");
            for (metric, value) in export::metric_rows(&report) {
                text.push_str(&format!("{},{metric},{value}\n", scenario_name(&p)));
            }
            write_out(out.as_deref(), &text)
        }
        Command::Run { input, out } => {
            let p = prepare(&input)?;
            let output = pipeline::run(&p)?;
            export::write_trace(&out.join("trace.csv"), &p.trace)?;
            export::write_run(&out, scenario_name(&p), &output, &p.nodes)
        }
        Command::Sweep {
            input,
            p_users,
            r_users,
            gs_links,
            out,
        } => {
            let scenario = load(&input.scenario)?;
            let trace = input.visibility_trace.as_deref().map(export::read_trace).transpose()?;
            let axes = SweepAxes {
                p_users,
                r_users,
                gs_links,
            };
            sweep::run_sweep(&scenario, &axes, trace.as_ref(), Some(&out)).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
