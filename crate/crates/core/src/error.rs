use thiserror::Error;

use crate::faux::{HalfLine, ReadoutEstimate};

/// Every failure the simulator can report.
///
/// Messages start with the variant name so that command-line users can grep
/// for the condition they hit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("DimensionMismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("DimensionTooSmall: system dimension {0} is below 2")]
    DimensionTooSmall(usize),

    #[error("NotNormalized: squared norm is {norm_sqr}, expected 1")]
    NotNormalized { norm_sqr: f64 },

    #[error("ZeroVector: cannot normalize a vector of zero norm")]
    ZeroVector,

    #[error("NotHermitian: largest entry deviation {0:e}")]
    NotHermitian(f64),

    #[error("NotIdempotent: largest entry deviation of P*P - P is {0:e}")]
    NotIdempotent(f64),

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),

    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),

    #[error("GridMismatch: pointer states live on different grids")]
    GridMismatch,

    #[error("OverlapTooSmall: |<psi_f|psi_i>| = {overlap:e} is below the floor {floor:e}")]
    OverlapTooSmall { overlap: f64, floor: f64 },

    #[error("GridTooNarrow: grid [{q_min}, {q_max}) does not span +/-8 sigma (sigma = {sigma})")]
    GridTooNarrow { q_min: f64, q_max: f64, sigma: f64 },

    #[error("WraparoundRisk: shift {gamma} moves {wrapped_mass:e} of probability across the periodic boundary")]
    WraparoundRisk { gamma: f64, wrapped_mass: f64 },

    #[error("DegenerateNorm: normalization M = {m:e} signals complete destructive interference (A_w = {a_re} + {a_im}i)")]
    DegenerateNorm { m: f64, a_re: f64, a_im: f64 },

    #[error("ResourceLimit: joint dimension {required} exceeds the cap {cap}")]
    ResourceLimit { required: usize, cap: usize },

    #[error(
        "InterferenceTooLarge: gamma/sigma = {ratio} is below the readout threshold {threshold}"
    )]
    InterferenceTooLarge { ratio: f64, threshold: f64 },

    #[error("PeakNotFound: no peak on the {side} half-line")]
    PeakNotFound {
        side: HalfLine,
        /// Degenerate estimate (A_w exactly 0 or 1) when the other half-line
        /// still carries a peak.
        estimate: Option<Box<ReadoutEstimate>>,
    },

    #[error("PostSelectionDark: the selected output port receives no light ({0})")]
    PostSelectionDark(String),
}

impl Error {
    /// Domain errors are well-formed inputs that hit a physical or numerical
    /// limit; everything else is malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OverlapTooSmall { .. }
                | Error::GridTooNarrow { .. }
                | Error::WraparoundRisk { .. }
                | Error::DegenerateNorm { .. }
                | Error::ResourceLimit { .. }
                | Error::InterferenceTooLarge { .. }
                | Error::PeakNotFound { .. }
                | Error::PostSelectionDark(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
