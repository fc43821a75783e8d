use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "gaussgeo", version, about = "Geometry of fermionic Gaussian states: sweeps, scaling fits and self-checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate quantities on a parameter grid.
    Sweep(Flags),
    /// Fit power laws in the system size.
    Scaling(Flags),
    /// Metric, curvature and incompatibility at one point.
    Geometry(Flags),
    /// Dissipative spectrum and gaps at one point.
    Spectrum(Flags),
    /// Cross-check the Gaussian routes against the dense oracle.
    Oracle(Flags),
}

impl Command {
    pub fn section(&self) -> &'static str {
        match self {
            Self::Sweep(_) => "sweep",
            Self::Scaling(_) => "scaling",
            Self::Geometry(_) => "geometry",
            Self::Spectrum(_) => "spectrum",
            Self::Oracle(_) => "oracle",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Self::Sweep(f) | Self::Scaling(f) | Self::Geometry(f) | Self::Spectrum(f) | Self::Oracle(f) => f,
        }
    }
}

#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Model name (boundary-xy, xy, dicke, rotated-xy, reservoir, synthetic).
    #[arg(long)]
    pub model: Option<String>,
    /// Fix a model parameter.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Sweep axis; repeat for a multidimensional grid (first axis slowest).
    #[arg(long = "grid", value_name = "AXIS=START:STOP:STEP")]
    pub grid: Vec<String>,
    /// Comma-separated ascending system sizes.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Comma-separated quantities: gap, gmax, detg, muc, R, xi, purity, and
    /// model-specific extras.
    #[arg(long)]
    pub quantities: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter pair of the `muc` column, e.g. `h,theta`.
    #[arg(long)]
    pub pair: Option<String>,
    /// Sizes used in the power-law fit, `MIN:MAX` inclusive.
    #[arg(long = "fit-window", value_name = "MIN:MAX")]
    pub fit_window: Option<String>,
    /// quadrature or residue, for `muc` of translationally invariant chains.
    #[arg(long = "muc-mode")]
    pub muc_mode: Option<String>,
    /// Random instances per oracle suite.
    #[arg(long)]
    pub cases: Option<usize>,
    /// Test hook: conjugate the boundary jumps on the Gaussian side of the
    /// oracle suite.
    #[arg(long = "inject-flip", hide = true)]
    pub inject_flip: bool,
}

impl Flags {
    /// Config file section overlaid with the flags.
    pub fn settings(&self, section: &str) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path, section)?,
            None => Settings::default(),
        };
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                s.set(key, &v);
            }
        };
        put("model", self.model.clone());
        put("sizes", self.sizes.clone());
        put("quantities", self.quantities.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("format", self.format.clone());
        put("jobs", self.jobs.map(|j| j.to_string()));
        put("seed", self.seed.map(|j| j.to_string()));
        put("pair", self.pair.clone());
        put("fit", self.fit_window.clone());
        put("muc_mode", self.muc_mode.clone());
        put("cases", self.cases.map(|j| j.to_string()));
        if self.inject_flip {
            s.set("inject_flip", "true");
        }
        for (flag, list) in [("set", &self.set), ("grid", &self.grid)] {
            for item in list {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| CliError::bad(format!("--{flag} expects KEY=VALUE, got `{item}`")))?;
                s.set(&format!("{flag}.{}", k.trim()), v);
            }
        }
        Ok(s)
    }
}
