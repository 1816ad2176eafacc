use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variance must be finite and positive, got {0}")]
    InvalidVariance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} has no density (discrete law)")]
    NoDensity(&'static str),

    #[error("grid half-width {half_width} too narrow: {detail}")]
    GridTooNarrow { half_width: f64, detail: String },

    #[error(
        "grid too coarse: characteristic function is {magnitude:.3e} at the Nyquist frequency"
    )]
    GridTooCoarse { magnitude: f64 },

    #[error("grids do not match")]
    GridMismatch,

    #[error("density has no mass to normalize")]
    ZeroMass,

    #[error("density has non-positive variance {0}")]
    DegenerateDensity(f64),

    #[error("posterior denominator underflowed at y = {0}")]
    TailUnderflow(f64),

    #[error("decay rate undefined: {0}")]
    RateUndefined(String),

    #[error("numerical degradation: {0}")]
    NumericalDegradation(String),
}

impl Error {
    /// True for errors that signal an inadequate grid or accuracy loss rather
    /// than a caller mistake.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GridTooNarrow { .. }
                | Error::GridTooCoarse { .. }
                | Error::NumericalDegradation(_)
                | Error::TailUnderflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
