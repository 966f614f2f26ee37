//! Relaxation dynamics, Laplace-domain pole spectra, and non-Markovian
//! exceptional points of waveguide-QED delay systems.
//!
//! A giant atom coupled to a one-dimensional waveguide at several spatially
//! separated points, or a pair of distant emitters radiating into a shared
//! waveguide, obeys a scalar linear delay-differential equation once the
//! field is traced out:
//!
//! ```text
//! da/dt = sum_m c_m a(t - m*tau) * Theta(t - m*tau)
//! ```
//!
//! The Laplace transform turns this into a transcendental characteristic
//! equation `D(s) = s - sum_m c_m exp(-s m tau) = 0` whose zeros are the
//! dynamical poles. When two or more poles coalesce together with their
//! modes, the system sits at an exceptional point and the decay acquires a
//! polynomial-times-exponential envelope.
//!
//! The crate is organized around that pipeline:
//!
//! - [`special`]: multi-branch complex Lambert W function, which solves the
//!   single-delay characteristic equation in closed form.
//! - [`models`]: physical parameterizations (giant atom, collective pair)
//!   and their reduction to the canonical [`models::DelaySystem`].
//! - [`dynamics`]: time-domain solvers: method-of-steps integration, the
//!   exact series solution, the microscopic field oracle, Markovian
//!   embeddings, and oscillation diagnostics.
//! - [`spectral`]: characteristic function and derivatives, closed-form and
//!   searched pole sets, argument-principle certification, residue-sum
//!   reconstruction, and scaling fits.
//! - [`ep`]: exceptional-point location and constructive design: the
//!   second-order point of the two-point atom, the third-order point of the
//!   three-point atom, arbitrary-order design by linear solve plus Hankel
//!   inversion, and the collective critical separation.
//! - [`cli`]: the `nmep` command-line front end (decay curves, pole tables,
//!   EP reports, figure presets).

// Numeric guards deliberately use negated comparisons (`!(x > 0.0)`) so NaN
// fails validation too, and integrator kernels index several parallel arrays
// from one loop counter.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod ep;
mod error;
mod linalg;
pub mod models;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
