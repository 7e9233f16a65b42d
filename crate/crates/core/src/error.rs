use num_complex::Complex64;

/// Crate-wide error type; variants are prefixed with the subsystem they
/// originate from so CLI messages stay attributable.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("riemann: jet at z = {0} has no finite representation")]
    UndefinedJet(Complex64),
    #[error("riemann: empty sample list")]
    EmptyInput,
    #[error("riemann: beta = {0} is below -1")]
    BetaRange(f64),
    #[error("catalog: degenerate lattice, omega2/omega1 = {0}")]
    DegenerateLattice(Complex64),
    #[error("catalog: denominator polynomial is identically zero")]
    ZeroDenominator,
    #[error("catalog: {0}")]
    Capability(String),
    #[error("catalog: unknown function '{0}'")]
    UnknownFunction(String),
    #[error("painleve: laurent order {0} outside supported range 4..=12")]
    OrderOutOfRange(usize),
    #[error("painleve: continuation failed near z = {at}: {reason}")]
    Continuation { at: Complex64, reason: String },
    #[error("painleve: step size underflow near z = {0}")]
    Stiffness(Complex64),
    #[error("painleve: evaluation point {0} inside a pole guard disc")]
    GuardedPoint(Complex64),
    #[error("locate: contour kept hitting special points after {0} jitter attempts")]
    ContourThroughSingularity(usize),
    #[error("locate: {0} set is empty")]
    EmptySet(&'static str),
    #[error("nevanlinna: {0}")]
    Quadrature(String),
    #[error("fit: need at least {need} rows, got {got}")]
    InsufficientRows { need: usize, got: usize },
    #[error("expansion: point z = {z} within {dist:.3e} of a listed zero/pole")]
    Proximity { z: Complex64, dist: f64 },
    #[error("expansion: {0}")]
    Radius(String),
    #[error("expansion: {0}")]
    Unsupported(String),
    #[error("rescale: exclusion discs removed every sample")]
    NoSamples,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
