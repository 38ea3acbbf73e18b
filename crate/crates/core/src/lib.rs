//! Simulation of two identical qubits coupled to a single-mode cavity through
//! a periodically modulated interaction, including energy dissipation.
//!
//! The interaction strength between the qubits and the cavity is modulated at
//! twice the resonance frequency. After time averaging, the dynamics is
//! governed by two Fourier components of the drive: a mean value `p = g·θ`
//! feeding the excitation-conserving (Tavis-Cummings) channel and a second
//! harmonic `q = g·(1−θ)` feeding the counterrotating channel that creates and
//! destroys excitation pairs. Decoherence enters through cavity decay `κ`,
//! qubit relaxation `γ`, and pure dephasing `γφ` in Lindblad form.
//!
//! The crate provides
//! - construction of the composite Hilbert space and embedded operators
//!   ([`hilbert`]),
//! - the effective and lab-frame Hamiltonians and collapse operators
//!   ([`model`]),
//! - master-equation time evolution and steady-state solvers ([`dynamics`]),
//! - concurrence, conditional concurrence, entropy, and mutual information
//!   ([`metrics`]),
//! - closed-form solutions of the solvable limits used as cross-checks
//!   ([`analytic`]),
//! - parameter sweeps producing 2-D maps of any metric ([`sweep`]).
//!
//! All quantities are expressed in units of the cavity frequency `ω = 1`;
//! time is in units of `1/ω`.
//!
//! Core routines are generic over the floating-point scalar via [`Real`];
//! the aliases below fix the common concrete choices.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod hilbert;
mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real, C};

/// Double-precision density matrix on the composite space.
pub type DensityMatrix64 = hilbert::DensityMatrix<f64>;
/// Single-precision density matrix on the composite space.
pub type DensityMatrix32 = hilbert::DensityMatrix<f32>;
/// Double-precision embedded operator.
pub type Operator64 = hilbert::Operator<f64>;
/// Single-precision embedded operator.
pub type Operator32 = hilbert::Operator<f32>;
/// Double-precision physical parameter set.
pub type SystemParams64 = model::SystemParams<f64>;
/// Single-precision physical parameter set.
pub type SystemParams32 = model::SystemParams<f32>;
/// Double-precision trajectory.
pub type Trajectory64 = dynamics::Trajectory<f64>;
/// Double-precision sweep grid.
pub type SweepGrid64 = sweep::SweepGrid<f64>;
