use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Complex;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transmit correlation and covariance are not simultaneously diagonalizable (off-diagonal residue {residue:e})")]
    NotSimultaneouslyDiagonalizable { residue: f64 },

    /// The fixed-point iteration hit its iteration cap. `last` holds the final
    /// iterate in solver layout, `trace` the residual after every sweep.
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
        trace: Vec<f64>,
    },

    #[error("numeric domain error: {0}")]
    Domain(String),

    #[error("channel is not in folded form (Q = I and diagonal T required); fold the transmit side first")]
    NotFolded,

    #[error("every transmit eigenvalue is zero; nothing to allocate power to")]
    NoChannel,

    #[error("no unique admissible root of the Rayleigh-product cubic ({admissible} admissible among {roots:?})")]
    RootSelection {
        roots: [Complex<f64>; 3],
        admissible: usize,
    },

    #[error("user {0} has no declared power budget")]
    MissingBudget(usize),

    #[error("iterative water-filling did not converge after {iterations} sweeps")]
    WaterfillNonConvergence {
        iterations: usize,
        trajectory: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::InvalidDimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::WaterfillNonConvergence { .. }
        )
    }
}
