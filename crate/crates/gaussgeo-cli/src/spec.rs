//! Validated run specifications built from [`Settings`].

use std::path::PathBuf;

use gaussgeo::momentum::MucMode;

use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::models::{EvalOptions, Model, Quantity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub index: usize,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    /// `start + k·step` up to `stop` inclusive (with a relative slack of
    /// `1e-9` steps so that `0:1:0.1` ends at `1`).
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

/// Model, parameter values and evaluation options shared by every
/// subcommand that evaluates a model.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSpec {
    pub model: Model,
    /// One value per [`Model::params`] entry.
    pub values: Vec<f64>,
    pub options: EvalOptions,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub point: PointSpec,
    pub axes: Vec<Axis>,
    pub quantities: Vec<Quantity>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub point: PointSpec,
    pub sizes: Vec<usize>,
    pub quantities: Vec<Quantity>,
    /// Inclusive range of sizes entering the fit.
    pub window: (usize, usize),
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub seed: u64,
    pub cases: usize,
    pub flip: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CASES: usize = 8;

fn number(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| CliError::bad(format!("{key}: `{v}` is not a number")))
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| CliError::bad(format!("{key}: `{v}` is not a nonnegative integer")))
}

fn check_integer(model: Model, index: usize, v: f64) -> Result<()> {
    let p = model.params()[index];
    if p.integer && !(v >= 1.0 && v.fract() == 0.0 && v < 1e9) {
        return Err(CliError::bad(format!("{} must be a positive integer, got {v}", p.name)));
    }
    Ok(())
}

fn format(s: &Settings) -> Result<Format> {
    match s.get("format").unwrap_or("csv") {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(CliError::bad(format!("format must be csv or json, got `{other}`"))),
    }
}

fn jobs(s: &Settings) -> Result<Option<usize>> {
    match s.get("jobs") {
        None => Ok(None),
        Some(v) => match integer::<usize>("jobs", v)? {
            0 => Err(CliError::bad("jobs must be at least 1")),
            j => Ok(Some(j)),
        },
    }
}

fn seed(s: &Settings) -> Result<u64> {
    s.get("seed").map(|v| integer("seed", v)).transpose().map(|v| v.unwrap_or(DEFAULT_SEED))
}

fn quantities(s: &Settings, model: Model) -> Result<Vec<Quantity>> {
    let list = s.get("quantities").ok_or_else(|| CliError::bad("no quantities requested"))?;
    let qs = list.split(',').filter(|t| !t.trim().is_empty()).map(Quantity::parse).collect::<Result<Vec<_>>>()?;
    if qs.is_empty() {
        return Err(CliError::bad("no quantities requested"));
    }
    for q in &qs {
        if !model.supports(*q) {
            return Err(CliError::bad(format!("model {} does not provide {}", model.name(), q.name())));
        }
    }
    Ok(qs)
}

impl PointSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let model = Model::parse(s.get("model").ok_or_else(|| CliError::bad("no model given"))?)?;
        let mut values: Vec<f64> = model.params().iter().map(|p| p.default).collect();
        for (k, v) in s.prefixed("set") {
            let i = model
                .param_index(k)
                .ok_or_else(|| CliError::bad(format!("model {} has no parameter `{k}`", model.name())))?;
            values[i] = number(k, v)?;
            check_integer(model, i, values[i])?;
        }
        let labels = model.tangent_labels();
        let pair = match (s.get("pair"), model.default_pair()) {
            (Some(text), _) => {
                let (a, b) = text.split_once(',').ok_or_else(|| CliError::bad(format!("pair expects `mu,nu`, got `{text}`")))?;
                let find = |l: &str| {
                    labels.iter().position(|x| *x == l.trim()).ok_or_else(|| {
                        CliError::bad(format!("`{}` is not a tangent direction of {} ({})", l.trim(), model.name(), labels.join(", ")))
                    })
                };
                Some((find(a)?, find(b)?))
            }
            (None, Some((a, b))) => {
                Some((labels.iter().position(|x| *x == a).unwrap(), labels.iter().position(|x| *x == b).unwrap()))
            }
            (None, None) => None,
        };
        let muc_mode = match s.get("muc_mode").unwrap_or("quadrature") {
            "quadrature" => MucMode::Quadrature,
            "residue" => MucMode::Residue,
            other => return Err(CliError::bad(format!("muc_mode must be quadrature or residue, got `{other}`"))),
        };
        Ok(Self {
            model,
            values,
            options: EvalOptions { pair, muc_mode },
            out: s.get("out").map(PathBuf::from),
            format: format(s)?,
            seed: seed(s)?,
        })
    }

    /// `(name, value)` of the parameters not in `skip`.
    pub fn fixed(&self, skip: &[usize]) -> Vec<(&'static str, f64, bool)> {
        self.model
            .params()
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(i, p)| (p.name, self.values[i], p.integer))
            .collect()
    }
}

impl SweepSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let point = PointSpec::from_settings(s)?;
        let model = point.model;
        let mut axes = Vec::new();
        for (name, range) in s.prefixed("grid") {
            let index = model
                .param_index(name)
                .ok_or_else(|| CliError::bad(format!("model {} has no parameter `{name}`", model.name())))?;
            if axes.iter().any(|a: &Axis| a.index == index) {
                return Err(CliError::bad(format!("axis `{name}` given twice")));
            }
            let parts: Vec<&str> = range.split(':').collect();
            let [a, b, c] = parts[..] else {
                return Err(CliError::bad(format!("grid.{name} expects START:STOP:STEP, got `{range}`")));
            };
            let axis = Axis { name: name.to_string(), index, start: number(name, a)?, stop: number(name, b)?, step: number(name, c)? };
            if !(axis.step > 0.0) || !axis.start.is_finite() || !axis.stop.is_finite() {
                return Err(CliError::bad(format!("grid.{name}: step must be positive and bounds finite")));
            }
            if axis.stop < axis.start {
                return Err(CliError::bad(format!("grid.{name}: stop below start")));
            }
            for v in axis.values() {
                check_integer(model, index, v)?;
            }
            axes.push(axis);
        }
        if axes.is_empty() {
            return Err(CliError::bad("a sweep needs at least one grid axis"));
        }
        Ok(Self { quantities: quantities(s, model)?, jobs: jobs(s)?, point, axes })
    }

    /// Parameter vectors in row-major order, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.point.values.clone()];
        for axis in &self.axes {
            let vals = axis.values();
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q[axis.index] = v;
                        q
                    })
                })
                .collect();
        }
        out
    }
}

impl ScalingSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let point = PointSpec::from_settings(s)?;
        let model = point.model;
        let n_index = model.size_index().ok_or_else(|| CliError::bad(format!("model {} has no system size", model.name())))?;
        let list = s.get("sizes").ok_or_else(|| CliError::bad("no sizes given"))?;
        let sizes = list.split(',').map(|t| integer::<usize>("sizes", t)).collect::<Result<Vec<_>>>()?;
        if sizes.len() < 4 {
            return Err(CliError::bad(format!("need at least 4 sizes, got {}", sizes.len())));
        }
        if sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::bad("sizes must be strictly ascending"));
        }
        for &n in &sizes {
            check_integer(model, n_index, n as f64)?;
        }
        let window = match s.get("fit") {
            None => (sizes[0], sizes[sizes.len() - 1]),
            Some(text) => {
                let (a, b) = text.split_once(':').ok_or_else(|| CliError::bad(format!("fit window expects MIN:MAX, got `{text}`")))?;
                let w = (integer("fit", a)?, integer("fit", b)?);
                if w.1 < w.0 {
                    return Err(CliError::bad("fit window is empty"));
                }
                w
            }
        };
        if sizes.iter().filter(|&&n| n >= window.0 && n <= window.1).count() < 4 {
            return Err(CliError::bad("fewer than 4 sizes inside the fit window"));
        }
        Ok(Self { quantities: quantities(s, model)?, jobs: jobs(s)?, point, sizes, window })
    }
}

impl OracleSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let flip = match s.get("inject_flip") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(CliError::bad(format!("inject_flip must be true or false, got `{other}`"))),
        };
        Ok(Self {
            seed: seed(s)?,
            cases: s.get("cases").map(|v| integer("cases", v)).transpose()?.unwrap_or(DEFAULT_CASES),
            flip,
            out: s.get("out").map(PathBuf::from),
            format: format(s)?,
            jobs: jobs(s)?,
        })
    }
}
