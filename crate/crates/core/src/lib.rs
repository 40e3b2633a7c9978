//! Exact reduced dynamics of a qubit in a precessing magnetic field that is
//! coupled to a bath of non-interacting spins through an Ising interaction.
//!
//! The crate is organised bottom-up:
//!
//! * [`qubit`] – closed-form 2×2 complex linear algebra and density matrices.
//! * [`bath`] – model parameters, bath spectrum, thermal weights and the
//!   Hamming-class aggregation for uniform baths.
//! * [`riccati`] – the commuting-block Riccati solution and the per-mode
//!   similarity transforms it induces.
//! * [`dynamics`] – per-mode unitaries, the random-unitary channel of the
//!   reduced dynamics, and the special-case fast paths.
//! * [`adiabatic`] – fidelity of adiabatic following for the closed and open
//!   qubit.
//! * [`oracle`] – brute-force full-space propagators used to verify all of
//!   the above.

// `!(x <= tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod bath;
pub mod dynamics;
mod error;
pub mod oracle;
pub mod qubit;
pub mod riccati;

pub use error::{Error, Result};

pub use adiabatic::AdiabaticConfig;
pub use bath::{Drive, Mode, ModeSpectrum, ModelParams};
pub use dynamics::{QubitChannel, SpectrumPath, Trajectory};
pub use qubit::{Complex2x2, DensityMatrix2};
