//! The JSON run configuration. Every subcommand builds one of these from its
//! flags, so `--emit-config` followed by `--config` replays the same run.

use std::path::PathBuf;

use optoep::com_model::{PhaseConvention, PhysicalParams, ReducedParams, DEFAULT_OMEGA_B};
use optoep::ep_locator::Tolerances;
use optoep::pseudo_hermitian::{ParamFamily, SweepAxis};
use optoep::sweep::{AxisSpec, PhaseMode, DEFAULT_SWEEP_POINTS};
use serde::{Deserialize, Serialize};

/// One complete run. Rates and frequencies are in units of `kappa_c`;
/// outputs are multiplied by `kappa_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "unit")]
    pub kappa_c: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Main output file; standard output when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    pub task: Task,
}

fn unit() -> f64 {
    1.0
}

fn default_omega_b() -> f64 {
    DEFAULT_OMEGA_B
}

fn default_points() -> usize {
    DEFAULT_SWEEP_POINTS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Ep3 {
        eta: f64,
    },
    Sweep {
        sweep: SweepTask,
    },
    Broken {
        sweep: SweepTask,
        offset: f64,
    },
    Phase {
        mode: PhaseMode,
        p1: AxisSpec,
        p2: AxisSpec,
        /// Contour file; contours are only written when this is set.
        #[serde(default)]
        contours: Option<PathBuf>,
    },
    Stability {
        point: PointSpec,
    },
    Steady {
        params: PhysicalParams,
        #[serde(default)]
        convention: PhaseConvention,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTask {
    pub family: ParamFamily,
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_points")]
    pub n: usize,
    #[serde(default = "default_omega_b")]
    pub omega_b: f64,
    #[serde(default)]
    pub gap_threshold: Option<f64>,
}

/// A single parameter set, either on a family or given in full.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSpec {
    Family {
        family: ParamFamily,
        g_a: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default = "default_omega_b")]
        omega_b: f64,
    },
    Explicit {
        params: ReducedParams,
    },
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run configs always serialize")
    }
}
