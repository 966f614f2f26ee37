use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical routines.
///
/// Structured "no exceptional point" and "infeasible design" outcomes are
/// not errors; see [`crate::ep::EpOutcome`]. The variants here are genuine
/// failures: invalid input, lost convergence, or a certification mismatch.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{context}: no convergence after the iteration cap (last iterate {last}, residual {residual:.3e})")]
    NoConvergence {
        context: String,
        last: Complex64,
        residual: f64,
    },

    #[error("delay is not grid-aligned: tau/dt = {ratio} is not an integer; nearest valid dt = {nearest_dt}")]
    GridMisaligned { ratio: f64, nearest_dt: f64 },

    #[error("series solution needs {terms} terms (cap {cap}); use the residue or time-stepping methods for large t/tau")]
    SeriesOverflow { terms: usize, cap: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("incomplete spectrum: Newton refinement found {found} poles (with multiplicity) but the contour count is {expected}")]
    IncompleteSpectrum {
        found: usize,
        expected: usize,
        /// The poles that were located before the certification failed.
        poles: Vec<crate::spectral::Pole>,
    },

    #[error("|D| dips to {min_abs:.3e} near s = {s} on the contour; perturb the rectangle away from the zero")]
    ContourNearZero { s: Complex64, min_abs: f64 },

    #[error("pole at s = {s} carries multiplicity {multiplicity}; the residue sum assumes simple poles: use the pseudomode or time-domain integrator at an exceptional point")]
    MultiplePole { s: Complex64, multiplicity: usize },

    #[error("no real coupling set reproduces the requested delay-class weights ({detail})")]
    NoPhysicalCouplings { detail: String },

    #[error("I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
