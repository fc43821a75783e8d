use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the library can report. The variant name is what the CLI
/// prints in a failed table cell, see [`Error::name`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Sylvester operator singular: min |x_i + x_j| = {min_sum:e}")]
    SingularSylvester { min_sum: f64 },
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("quadrature did not converge, last estimate {re} + {im}i")]
    NoConvergence { re: f64, im: f64 },
    #[error("power-law fit needs positive values, got {0}")]
    NonPositiveValue(f64),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("covariance matrix is not antisymmetric (deviation {0:e})")]
    NotAntisymmetric(f64),
    #[error("covariance matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("covariance matrix has an eigenvalue of modulus {0} > 1")]
    NormExceedsOne(f64),
    #[error("a mode with |gamma| = {0} is pure, Omega diverges")]
    PureModePresent(f64),
    #[error("Majorana index {index} out of range for {len} operators")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{modes} modes exceed the dense limit of {max}")]
    TooManyModes { modes: usize, max: usize },
    #[error("state changes rank along the tangent (|1 - g_j g_k| = {0:e})")]
    RankChangeSingularity(f64),
    #[error("Fisher matrix is singular")]
    SingularFisher,
    #[error("model evaluation failed: {0}")]
    EvaluationFailure(String),
    #[error("dissipative gap is zero")]
    ZeroGap,
    #[error("jump list is empty")]
    EmptyJumps,
    #[error("eigenvalue with negative real part {0:e}")]
    InstabilityDetected(f64),
    #[error("steady state is not unique (min |x_i + x_j| = {0:e})")]
    NonUniqueSteadyState(f64),
    #[error("symbol Lyapunov operator singular at phi = {0}")]
    CriticalAngle(f64),
    #[error("symbol is not a finite trigonometric polynomial")]
    NotFiniteRange,
    #[error("rational symbol has no poles inside the unit disk")]
    NoPoles,
    #[error("clustered poles, residues are ill conditioned")]
    ClusteredPoles,
    #[error("state is singular")]
    SingularState,
    #[error("rank changes at the evaluation point")]
    RankChange,
    #[error("state is rank deficient on the loop")]
    RankDeficientOnLoop,
    #[error("null space of the Liouvillian has dimension {0}")]
    DegenerateNullSpace(usize),
    #[error("series does not converge")]
    SeriesDivergence,
    #[error("degenerate spectrum")]
    DegenerateSpectrum,
    #[error("gapless mode at k = {0}")]
    GaplessMode(usize),
    #[error("parameters lie on a critical set")]
    OnCriticalSet,
    #[error("loop passes through a degeneracy")]
    DegeneracyOnLoop,
    #[error("wavefunction reaches the grid boundary")]
    GridTooSmall,
}

impl Error {
    /// Bare variant name, e.g. `NonUniqueSteadyState`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularSylvester { .. } => "SingularSylvester",
            Error::ConvergenceFailure => "ConvergenceFailure",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NonPositiveValue(_) => "NonPositiveValue",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::NotAntisymmetric(_) => "NotAntisymmetric",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NormExceedsOne(_) => "NormExceedsOne",
            Error::PureModePresent(_) => "PureModePresent",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::TooManyModes { .. } => "TooManyModes",
            Error::RankChangeSingularity(_) => "RankChangeSingularity",
            Error::SingularFisher => "SingularFisher",
            Error::EvaluationFailure(_) => "EvaluationFailure",
            Error::ZeroGap => "ZeroGap",
            Error::EmptyJumps => "EmptyJumps",
            Error::InstabilityDetected(_) => "InstabilityDetected",
            Error::NonUniqueSteadyState(_) => "NonUniqueSteadyState",
            Error::CriticalAngle(_) => "CriticalAngle",
            Error::NotFiniteRange => "NotFiniteRange",
            Error::NoPoles => "NoPoles",
            Error::ClusteredPoles => "ClusteredPoles",
            Error::SingularState => "SingularState",
            Error::RankChange => "RankChange",
            Error::RankDeficientOnLoop => "RankDeficientOnLoop",
            Error::DegenerateNullSpace(_) => "DegenerateNullSpace",
            Error::SeriesDivergence => "SeriesDivergence",
            Error::DegenerateSpectrum => "DegenerateSpectrum",
            Error::GaplessMode(_) => "GaplessMode",
            Error::OnCriticalSet => "OnCriticalSet",
            Error::DegeneracyOnLoop => "DegeneracyOnLoop",
            Error::GridTooSmall => "GridTooSmall",
        }
    }
}
