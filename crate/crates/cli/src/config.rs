use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use trace_stability::transport::PhaseGrid;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TRACESTAB_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Spectrum,
    Constants,
    VerifyTrace,
    DualitySweep,
    Counterexample,
    TransportProbe,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Constants => "constants",
            CommandKind::VerifyTrace => "verify-trace",
            CommandKind::DualitySweep => "duality-sweep",
            CommandKind::Counterexample => "counterexample",
            CommandKind::TransportProbe => "transport-probe",
        }
    }

    /// File stem for reports: `verify-trace` → `verify_trace`.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    /// |ξ|^{-2s}
    Homogeneous,
    /// (1+|ξ|²)^{-s}
    Inhomogeneous,
    /// Pure power r^{-τ}; spectrum only.
    Watson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepArg {
    Cfl3,
    Cfl1,
    Aldaz,
    Transfer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every tunable of every command. The JSON config file uses the same keys
/// as the long flags, with `-` replaced by `_`, plus `command` and an
/// optional `grid` block {n, L, h, t_extent}.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    /// Dimension of the ambient space.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Smoothness exponent of the weight.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightArg>,
    /// Exponent of the Watson power weight.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Spectrum horizon K, or the largest harmonic degree in random profiles.
    #[arg(long = "k-max")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SweepArg>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Comma-separated, decreasing.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    /// Window extent L of a square n = 1 transport grid.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    /// Cells per axis of a square transport grid.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PhaseGrid>,
    /// Comma-separated perturbation sizes.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Number of probe directions.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// Probe the dual side (perturb G⋆, apply ρ*).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<bool>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Params {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config file: {e}"))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &Params) -> Params {
        overlay!(self, other; command, n, s, weight, tau, k_max, tol, seed, trials, kind, r, p, q, rows, cols,
            sigma, deltas, extent, cells, grid, eps, directions, dual, out, format);
        self
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: Params,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// Output directory: explicit setting, then the environment, then ".".
    pub fn resolve(params: Params) -> Result<Self, String> {
        let command = params.command.ok_or("no command given (flag or \"command\" key)")?;
        let out = params
            .out
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let format = params.format.unwrap_or_default();
        Ok(RunConfig { command, params, out, format })
    }
}
