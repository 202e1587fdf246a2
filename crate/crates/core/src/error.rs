use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("the environment must contain at least one spin")]
    EmptyBath,
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("system amplitudes (a, b) have zero norm")]
    ZeroNormSystem,
    #[error("site {site} amplitudes have zero norm")]
    ZeroNormSite { site: usize },
    #[error("site {site} coupling must be positive, got {g}")]
    NonPositiveCoupling { site: usize, g: f64 },
    #[error("{what} amplitudes are not normalized (|.|^2 sum = {norm_sqr})")]
    NotNormalized { what: String, norm_sqr: f64 },
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("site index {j} out of range 1..={n}")]
    SiteOutOfRange { j: usize, n: usize },
    #[error("observable has {observable} site parts but the model has {model} sites")]
    SizeMismatch { model: usize, observable: usize },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{n} sites exceeds the dense-state cap of {cap}")]
    OverCap { n: usize, cap: usize },
    #[error("dense state has {state} sites but the model has {model}")]
    StateMismatch { state: usize, model: usize },
    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("observable is not system-only (some site part is not the identity)")]
    NotEidForm,
    #[error("coupling of site {site} ({g}) is not a multiple of the recurrence frequency")]
    NotCommensurate { site: usize, g: f64 },
    #[error("hold window {window} exceeds half the trajectory span {span}")]
    WindowExceedsSpan { window: f64, span: f64 },
    #[error("degenerate averaging window [{0}, {1}]")]
    DegenerateWindow(f64, f64),
}
