//! Models reachable from the command line and the quantities each one
//! can produce at a parameter point.

use gaussgeo::geometry::GeometryResult;
use gaussgeo::liouvillian::{shape_matrices, NessSolver};
use gaussgeo::models::{
    boundary_xy_correlation_length, boundary_xy_report, build_boundary_driven_xy, dicke_berry_phase, xy_ground_berry_phase,
    xy_qgt_finite, xy_relative_phase, BoundaryXYParams, DickeParams, XYParams,
};
use gaussgeo::momentum::{
    build_reservoir_chain, build_rotated_xy_dissipative, correlation_length, gap_on_circle, muc_per_site, rationalize, MucMode,
    RotatedXyParams, SymbolModel,
};
use gaussgeo::RMat;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Gap,
    Gmax,
    Detg,
    Muc,
    R,
    Xi,
    Purity,
    /// Dicke Berry phase per qubit.
    Phi,
    /// Dicke `⟨S_x⟩/n`.
    Sx,
    /// Ground-state Berry phase of the closed XY chain.
    Berry,
    /// Ground/first-excited relative Berry phase of the closed XY chain.
    PhiEg,
}

impl Quantity {
    pub const ALL: [Quantity; 11] = [
        Self::Gap,
        Self::Gmax,
        Self::Detg,
        Self::Muc,
        Self::R,
        Self::Xi,
        Self::Purity,
        Self::Phi,
        Self::Sx,
        Self::Berry,
        Self::PhiEg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gap => "gap",
            Self::Gmax => "gmax",
            Self::Detg => "detg",
            Self::Muc => "muc",
            Self::R => "R",
            Self::Xi => "xi",
            Self::Purity => "purity",
            Self::Phi => "phi",
            Self::Sx => "sx",
            Self::Berry => "berry",
            Self::PhiEg => "phi_eg",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|q| q.name() == s || (s == "r" && *q == Self::R))
            .ok_or_else(|| CliError::bad(format!("unknown quantity `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub default: f64,
    /// Integer-valued, printed without an exponent.
    pub integer: bool,
}

const fn real(name: &'static str, default: f64) -> Param {
    Param { name, default, integer: false }
}

const fn int(name: &'static str, default: f64) -> Param {
    Param { name, default, integer: true }
}

const BOUNDARY_PARAMS: [Param; 7] = [
    real("delta", 1.25),
    real("h", 0.3),
    int("n", 20.0),
    real("kl_plus", 0.3),
    real("kl_minus", 0.5),
    real("kr_plus", 0.1),
    real("kr_minus", 0.5),
];
const XY_PARAMS: [Param; 4] = [real("delta", 0.5), real("h", 0.5), real("theta", 0.0), int("n", 100.0)];
const DICKE_PARAMS: [Param; 3] = [real("D", 10.0), real("alpha", 1.0), int("n", 100.0)];
const ROTATED_PARAMS: [Param; 6] = [
    real("delta", 0.5),
    real("h", 0.5),
    real("theta", 0.3),
    real("mu_minus", 1.0),
    real("mu_plus", 0.5),
    real("epsilon", 1.0),
];
const RESERVOIR_PARAMS: [Param; 2] = [real("lambda", 0.5), real("theta", 0.3)];
const SYNTHETIC_PARAMS: [Param; 3] = [real("a", 1.0), real("p", 2.0), int("n", 10.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Open XY chain driven at both ends.
    BoundaryXy,
    /// Closed XY chain ground state.
    Xy,
    /// Dicke model in the Born-Oppenheimer picture.
    Dicke,
    /// Translationally invariant XY chain with a gain/loss bath per site.
    RotatedXy,
    /// Chain coupled to a correlated reservoir.
    Reservoir,
    /// Every quantity equals `a n^p`; for checking the fitting pipeline.
    Synthetic,
}

impl Model {
    pub const ALL: [Model; 6] = [Self::BoundaryXy, Self::Xy, Self::Dicke, Self::RotatedXy, Self::Reservoir, Self::Synthetic];

    pub fn name(self) -> &'static str {
        match self {
            Self::BoundaryXy => "boundary-xy",
            Self::Xy => "xy",
            Self::Dicke => "dicke",
            Self::RotatedXy => "rotated-xy",
            Self::Reservoir => "reservoir",
            Self::Synthetic => "synthetic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|m| m.name()).collect();
            CliError::bad(format!("unknown model `{s}`, expected one of {}", names.join(", ")))
        })
    }

    pub fn params(self) -> &'static [Param] {
        match self {
            Self::BoundaryXy => &BOUNDARY_PARAMS,
            Self::Xy => &XY_PARAMS,
            Self::Dicke => &DICKE_PARAMS,
            Self::RotatedXy => &ROTATED_PARAMS,
            Self::Reservoir => &RESERVOIR_PARAMS,
            Self::Synthetic => &SYNTHETIC_PARAMS,
        }
    }

    pub fn param_index(self, name: &str) -> Option<usize> {
        self.params().iter().position(|p| p.name == name)
    }

    /// Index of the system size `n`, if the model has one.
    pub fn size_index(self) -> Option<usize> {
        self.param_index("n")
    }

    /// Parameters a `muc` pair may be drawn from.
    pub fn tangent_labels(self) -> &'static [&'static str] {
        match self {
            Self::BoundaryXy => &["delta", "h"],
            Self::Xy => &["theta", "h", "delta"],
            Self::RotatedXy => &["delta", "h", "theta", "mu_minus", "mu_plus", "epsilon"],
            Self::Reservoir => &["lambda", "theta"],
            Self::Dicke | Self::Synthetic => &[],
        }
    }

    pub fn default_pair(self) -> Option<(&'static str, &'static str)> {
        match self {
            Self::BoundaryXy => Some(("delta", "h")),
            Self::Xy => Some(("theta", "h")),
            Self::RotatedXy => Some(("h", "theta")),
            Self::Reservoir => Some(("lambda", "theta")),
            Self::Dicke | Self::Synthetic => None,
        }
    }

    pub fn supports(self, q: Quantity) -> bool {
        use Quantity::*;
        match self {
            Self::BoundaryXy => matches!(q, Gap | Gmax | Detg | Muc | R | Xi | Purity),
            Self::Xy => matches!(q, Gmax | Detg | Muc | R | Purity | Berry | PhiEg),
            Self::Dicke => matches!(q, Phi | Sx),
            Self::RotatedXy | Self::Reservoir => matches!(q, Gap | Muc | Xi),
            Self::Synthetic => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Indices into [`Model::tangent_labels`].
    pub pair: Option<(usize, usize)>,
    pub muc_mode: MucMode,
}

/// A computed value or the name of the error that prevented it.
pub type Cell = std::result::Result<f64, &'static str>;

fn fail(e: gaussgeo::Error, n: usize) -> Vec<Cell> {
    vec![Err(e.name()); n]
}

fn largest_eigenvalue(g: &RMat) -> f64 {
    g.clone().symmetric_eigenvalues().max()
}

fn from_geometry(geo: &GeometryResult, q: Quantity, opts: &EvalOptions) -> Option<Cell> {
    Some(match q {
        Quantity::Gmax => Ok(largest_eigenvalue(&geo.g)),
        Quantity::Detg => Ok(geo.g.determinant()),
        Quantity::Muc => {
            let (a, b) = opts.pair.unwrap_or((0, 1));
            Ok(geo.u[(a, b)])
        }
        Quantity::R => geo.r_ratio.ok_or("SingularFisher"),
        _ => return None,
    })
}

pub fn boundary_params(v: &[f64]) -> gaussgeo::Result<BoundaryXYParams> {
    BoundaryXYParams::new(v[0], v[1], v[2] as usize, [v[3], v[4], v[5], v[6]])
}

pub fn symbol_model(model: Model, v: &[f64]) -> gaussgeo::Result<SymbolModel> {
    match model {
        Model::RotatedXy => build_rotated_xy_dissipative(&RotatedXyParams::from_slice(v)?),
        Model::Reservoir => build_reservoir_chain(v[0], v[1]),
        _ => Err(gaussgeo::Error::DegenerateInput(format!("{} is not translationally invariant", model.name()))),
    }
}

/// Values of `qs` at the parameter point `v` (in [`Model::params`] order).
pub fn evaluate(model: Model, v: &[f64], qs: &[Quantity], opts: &EvalOptions) -> Vec<Cell> {
    match model {
        Model::BoundaryXy => {
            let p = match boundary_params(v) {
                Ok(p) => p,
                Err(e) => return fail(e, qs.len()),
            };
            let cheap = qs.iter().all(|q| matches!(q, Quantity::Xi | Quantity::Purity));
            let (gamma, report) = if cheap {
                let gamma = build_boundary_driven_xy(&p)
                    .and_then(|m| shape_matrices(&m))
                    .and_then(|s| NessSolver::new(&s)?.covariance(&s));
                match gamma {
                    Ok(c) => (c.gamma, None),
                    Err(e) => return fail(e, qs.len()),
                }
            } else {
                match boundary_xy_report(&p) {
                    Ok(r) => (r.gamma.clone(), Some(r)),
                    Err(e) => return fail(e, qs.len()),
                }
            };
            qs.iter()
                .map(|&q| match q {
                    Quantity::Xi => boundary_xy_correlation_length(&gamma).map_err(|e| e.name()),
                    Quantity::Purity => gaussgeo::gaussian::purity(&gamma).map_err(|e| e.name()),
                    Quantity::Gap => Ok(report.as_ref().map(|r| r.gap.delta).unwrap_or(f64::NAN)),
                    _ => report
                        .as_ref()
                        .and_then(|r| from_geometry(&r.geometry, q, opts))
                        .unwrap_or(Err("UnsupportedQuantity")),
                })
                .collect()
        }
        Model::Xy => {
            let p = match XYParams::new(v[0], v[1], v[2], v[3] as usize) {
                Ok(p) => p,
                Err(e) => return fail(e, qs.len()),
            };
            let needs_geometry = qs.iter().any(|q| matches!(q, Quantity::Gmax | Quantity::Detg | Quantity::Muc | Quantity::R));
            let geo = if needs_geometry { Some(xy_qgt_finite(&p)) } else { None };
            qs.iter()
                .map(|&q| match q {
                    Quantity::Purity => Ok(1.0),
                    Quantity::Berry => xy_ground_berry_phase(&p).map_err(|e| e.name()),
                    Quantity::PhiEg => xy_relative_phase(&p).map_err(|e| e.name()),
                    _ => match &geo {
                        Some(Ok(g)) => from_geometry(g, q, opts).unwrap_or(Err("UnsupportedQuantity")),
                        Some(Err(e)) => Err(e.name()),
                        None => Err("UnsupportedQuantity"),
                    },
                })
                .collect()
        }
        Model::Dicke => {
            let r = DickeParams::new(v[0], v[1], v[2] as usize).and_then(|p| dicke_berry_phase(&p));
            qs.iter()
                .map(|&q| match (&r, q) {
                    (Err(e), _) => Err(e.name()),
                    (Ok(r), Quantity::Phi) => Ok(r.phi_per_qubit),
                    (Ok(r), Quantity::Sx) => Ok(r.sx_per_qubit),
                    _ => Err("UnsupportedQuantity"),
                })
                .collect()
        }
        Model::RotatedXy | Model::Reservoir => {
            let m = match symbol_model(model, v) {
                Ok(m) => m,
                Err(e) => return fail(e, qs.len()),
            };
            qs.iter()
                .map(|&q| match q {
                    Quantity::Gap => Ok(gap_on_circle(&m)),
                    Quantity::Xi => rationalize(&m).and_then(|r| correlation_length(&r)).map(|c| c.xi).map_err(|e| e.name()),
                    Quantity::Muc => {
                        let (a, b) = opts.pair.unwrap_or((0, 1));
                        muc_per_site(&m, a, b, opts.muc_mode).map_err(|e| e.name())
                    }
                    _ => Err("UnsupportedQuantity"),
                })
                .collect()
        }
        Model::Synthetic => qs.iter().map(|_| Ok(v[0] * v[2].powf(v[1]))).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPTS: EvalOptions = EvalOptions { pair: None, muc_mode: MucMode::Quadrature };

    #[test]
    fn names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(Quantity::parse(q.name()).unwrap(), q);
        }
        for m in Model::ALL {
            assert_eq!(Model::parse(m.name()).unwrap(), m);
            if let Some((a, b)) = m.default_pair() {
                assert!(m.tangent_labels().contains(&a) && m.tangent_labels().contains(&b));
            }
        }
        assert!(Quantity::parse("volume").is_err());
        assert!(Model::parse("ising").is_err());
    }

    #[test]
    fn synthetic_is_a_power_law() {
        let v = [3.0, 2.0, 5.0];
        assert_eq!(evaluate(Model::Synthetic, &v, &[Quantity::Gap], &OPTS), vec![Ok(75.0)]);
    }

    #[test]
    fn failures_name_the_error() {
        let mut v: Vec<f64> = BOUNDARY_PARAMS.iter().map(|p| p.default).collect();
        v[2] = 1.0;
        assert_eq!(evaluate(Model::BoundaryXy, &v, &[Quantity::Gap, Quantity::Xi], &OPTS), vec![Err("DegenerateInput"); 2]);
        let v = [0.0, 0.3];
        let cells = evaluate(Model::Reservoir, &v, &[Quantity::Gap, Quantity::Purity], &OPTS);
        assert!((cells[0].unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(cells[1], Err("UnsupportedQuantity"));
    }

    #[test]
    fn boundary_chain_at_a_point() {
        let v: Vec<f64> = BOUNDARY_PARAMS.iter().map(|p| p.default).collect();
        let qs = [Quantity::Gap, Quantity::Gmax, Quantity::Detg, Quantity::Muc, Quantity::R, Quantity::Purity];
        let cells = evaluate(Model::BoundaryXy, &v, &qs, &OPTS);
        let vals: Vec<f64> = cells.iter().map(|c| c.unwrap()).collect();
        assert!(vals[0] > 0.0 && vals[1] > 0.0 && vals[2] > 0.0);
        assert!((0.0..=1.0).contains(&vals[4]));
        assert!(vals[5] > 0.0 && vals[5] <= 1.0);
        let swapped = evaluate(Model::BoundaryXy, &v, &[Quantity::Muc], &EvalOptions { pair: Some((1, 0)), ..OPTS });
        assert_eq!(swapped[0].unwrap(), -vals[3]);
    }
}
