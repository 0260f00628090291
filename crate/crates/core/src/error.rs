//! Error type shared across the library.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid environment law: {0}")]
    InvalidLaw(String),

    #[error("law is not transient to the right: E[log rho] = {elog:.6e} >= 0")]
    NotTransient { elog: f64 },

    #[error("quadrature failed to converge (requested tol {tol:.3e}, reached {reached:.3e})")]
    QuadratureNonConvergence { tol: f64, reached: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("site {x} outside window [{left}, {right}]")]
    OutOfWindow { x: i64, left: i64, right: i64 },

    #[error("block generation exceeded cap of {cap} sites; law is too close to recurrent")]
    BlockCap { cap: usize },

    #[error("step budget of {budget} exhausted after {used} steps")]
    StepBudgetExceeded { budget: u64, used: u64 },

    #[error("leftover mass {leftover:.3e} above tolerance {eps:.3e}; raise the horizon")]
    LeftoverMass { leftover: f64, eps: f64 },

    #[error("degenerate sample set: {0}")]
    DegenerateSamples(String),

    #[error("moment order {m} outside supported range [1, 5]")]
    MomentOrder { m: u32 },

    #[error("zero quenched variance over the requested interval")]
    ZeroVariance,

    #[error("n grid too small: {got} points, need at least {need}")]
    GridTooSmall { got: usize, need: usize },

    #[error("kappa = {kappa} outside the range required by this experiment: {need}")]
    KappaOutOfRange { kappa: f64, need: &'static str },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
