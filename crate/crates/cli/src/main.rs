//! `optoep`: exceptional points, sweeps, phase diagrams and stability of the
//! three-mode optomechanical system, from the command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible pseudo-Hermitian
//! constraints, 4 numeric failure.

mod config;
mod output;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optoep::com_model::{PhaseConvention, PhysicalParams, DEFAULT_OMEGA_B};
use optoep::pseudo_hermitian::{DetuningSign, ParamFamily, SweepAxis};
use optoep::sweep::{AxisSpec, PhaseMode, DEFAULT_PHASE_GRID, DEFAULT_SWEEP_POINTS};

use config::{Format, PointSpec, RunConfig, SweepTask, Task};
use run::{run, CliError, Rendered};

#[derive(Debug, Parser)]
#[command(name = "optoep", version, about = "Exceptional points of a three-mode optomechanical system")]
struct Cli {
    /// Run the configuration in this JSON file instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the run configuration as JSON and exit without running.
    #[arg(long, global = true)]
    emit_config: bool,
    /// Cavity-c loss rate; inputs are in its units and outputs are scaled by it.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa_c: Option<f64>,
    /// Output file (standard output by default).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Threshold on the scaled discriminant D.
    #[arg(long, global = true)]
    eps_d: Option<f64>,
    /// Threshold on the scaled A and B.
    #[arg(long, global = true)]
    eps_ab: Option<f64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form EP3 parameters for a gain/loss ratio eta.
    Ep3 {
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
    },
    /// Eigenvalue branches along one parameter.
    Sweep(SweepArgs),
    /// Sweep with the first pseudo-Hermitian condition broken by an offset.
    Broken {
        #[command(flatten)]
        sweep: SweepArgs,
        /// kappa_a + gamma_b + kappa_c.
        #[arg(long, allow_hyphen_values = true)]
        offset: f64,
    },
    /// Discriminant raster with zero contours and EP3 markers.
    Phase(PhaseArgs),
    /// Routh-Hurwitz and eigenvalue stability verdicts at one point.
    Stability(PointArgs),
    /// Classical steady state and reduced parameters from lab-frame inputs.
    Steady {
        /// JSON file with the lab-frame parameters.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum, default_value_t = ConventionArg::Magnitude)]
        convention: ConventionArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// eta = -1, lambda = 1, every point pseudo-Hermitian.
    Balanced,
    /// Given eta, lambda, G_a, Delta_a; only the linear conditions hold.
    Free,
    /// Delta_a follows G_a so that all three conditions hold.
    Enforced,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    GA,
    DeltaA,
    GC,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignArg {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Magnitude,
    SignedMagnitude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhaseModeArg {
    Balanced,
    Unbalanced,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Balanced)]
    mode: FamilyArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    eta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    g_a: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    delta_a: f64,
    /// Branch of Delta_a for the enforced family.
    #[arg(long, value_enum, default_value_t = SignArg::Positive)]
    sign: SignArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_OMEGA_B)]
    omega_b: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = AxisArg::GA)]
    axis: AxisArg,
    #[arg(long, allow_hyphen_values = true, visible_aliases = ["ga-from", "delta-from", "gc-from"])]
    from: f64,
    #[arg(long, allow_hyphen_values = true, visible_aliases = ["ga-to", "delta-to", "gc-to"])]
    to: f64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
    n: usize,
    /// Gap below which a minimum counts as a coalescence off the pseudo-Hermitian set.
    #[arg(long)]
    gap_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[arg(long, value_enum, default_value_t = PhaseModeArg::Balanced)]
    mode: PhaseModeArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.1)]
    eta: f64,
    #[arg(long, value_enum, default_value_t = SignArg::Positive)]
    sign: SignArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = -6.0)]
    p1_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 6.0)]
    p1_max: f64,
    #[arg(long, default_value_t = DEFAULT_PHASE_GRID)]
    nx: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    p2_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
    p2_max: f64,
    #[arg(long, default_value_t = DEFAULT_PHASE_GRID)]
    ny: usize,
    /// Write the D, A and B zero contours and EP3 markers to this CSV file.
    #[arg(long)]
    contours: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Offset of kappa_a + gamma_b + kappa_c from zero.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    offset: f64,
}

impl SignArg {
    fn sign(self) -> DetuningSign {
        match self {
            Self::Positive => DetuningSign::Positive,
            Self::Negative => DetuningSign::Negative,
        }
    }
}

impl FamilyArgs {
    fn family(&self) -> ParamFamily {
        match self.mode {
            FamilyArg::Balanced => ParamFamily::balanced(self.delta_a, self.g_a),
            FamilyArg::Free => {
                ParamFamily::Free { eta: self.eta, lambda: self.lambda, g_a: self.g_a, delta_a: self.delta_a }
            }
            FamilyArg::Enforced => ParamFamily::Enforced { eta: self.eta, lambda: self.lambda, sign: self.sign.sign() },
        }
    }
}

impl SweepArgs {
    fn task(&self) -> SweepTask {
        SweepTask {
            family: self.family.family(),
            axis: match self.axis {
                AxisArg::GA => SweepAxis::GA,
                AxisArg::DeltaA => SweepAxis::DeltaA,
                AxisArg::GC => SweepAxis::GC,
            },
            from: self.from,
            to: self.to,
            n: self.n,
            omega_b: self.family.omega_b,
            gap_threshold: self.gap_threshold,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn task_from(command: Command) -> Result<Task, CliError> {
    Ok(match command {
        Command::Ep3 { eta } => Task::Ep3 { eta },
        Command::Sweep(s) => Task::Sweep { sweep: s.task() },
        Command::Broken { sweep, offset } => Task::Broken { sweep: sweep.task(), offset },
        Command::Phase(p) => Task::Phase {
            mode: match p.mode {
                PhaseModeArg::Balanced => PhaseMode::Balanced,
                PhaseModeArg::Unbalanced => PhaseMode::Unbalanced { eta: p.eta, sign: p.sign.sign() },
            },
            p1: AxisSpec::new(p.p1_min, p.p1_max, p.nx),
            p2: AxisSpec::new(p.p2_min, p.p2_max, p.ny),
            contours: p.contours,
        },
        Command::Stability(p) => Task::Stability {
            point: PointSpec::Family {
                family: p.family.family(),
                g_a: p.family.g_a,
                offset: p.offset,
                omega_b: p.family.omega_b,
            },
        },
        Command::Steady { params, convention } => {
            let params: PhysicalParams = serde_json::from_str(&read(&params)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", params.display())))?;
            let convention = match convention {
                ConventionArg::Magnitude => PhaseConvention::Magnitude,
                ConventionArg::SignedMagnitude => PhaseConvention::SignedMagnitude,
            };
            Task::Steady { params, convention }
        }
    })
}

fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(CliError::Usage("a subcommand or --config is required; see --help".into())),
        (Some(path), None) => RunConfig::from_json(&read(&path)?).map_err(CliError::Usage)?,
        (None, Some(command)) => RunConfig {
            kappa_c: 1.0,
            tolerances: Default::default(),
            output: None,
            format: Format::Csv,
            task: task_from(command)?,
        },
    };
    if let Some(k) = cli.kappa_c {
        cfg.kappa_c = k;
    }
    if let Some(o) = cli.output {
        cfg.output = Some(o);
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(e) = cli.eps_d {
        cfg.tolerances.eps_d = e;
    }
    if let Some(e) = cli.eps_ab {
        cfg.tolerances.eps_a = e;
        cfg.tolerances.eps_b = e;
    }
    Ok(cfg)
}

fn write_all(outputs: &[Rendered]) -> Result<(), CliError> {
    for out in outputs {
        match &out.path {
            Some(path) => std::fs::write(path, &out.text)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
            None => std::io::stdout()
                .lock()
                .write_all(out.text.as_bytes())
                .map_err(|e| CliError::Usage(format!("cannot write to standard output: {e}")))?,
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let emit = cli.emit_config;
    let result = build_config(cli).and_then(|cfg| {
        if emit {
            println!("{}", cfg.to_json());
            return Ok(());
        }
        write_all(&run(&cfg)?)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
