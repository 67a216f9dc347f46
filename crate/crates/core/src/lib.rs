//! Charging dynamics of a quantum battery made of `N` two-level atoms.
//!
//! The battery lives in the symmetric Dicke sector `S = N/2`, so every
//! operator is at most tridiagonal in the `|S, m⟩` basis and all kernels are
//! `O(N)` per application. The crate provides
//!
//! - [`spin_algebra`]: Dicke basis, banded collective spin operators, states;
//! - [`model`]: the free and interacting (LMG) battery Hamiltonians with a
//!   harmonic or static charger;
//! - [`propagate`]: fixed-step RK4 evolution and stored-energy traces under
//!   the fixed-frequency and period-locked (`T = 2π/ω`) charging protocols;
//! - [`closed_form`]: the rotating-frame approximation (Bessel functions, the
//!   self-consistent `ξ̄`, effective detuning/coupling, Rabi frequency) and the
//!   static-charger formulas;
//! - [`spectrum`]: exact LMG spectrum, ground-state diagnostics and the
//!   Holstein–Primakoff mean-field polarization;
//! - [`sweep`]: first-peak extraction and the parameter sweeps;
//! - [`cli`]: command implementations, config files and CSV output used by
//!   the `dicke-battery` binary.
//!
//! Energies are in units of the level splitting `Δ`, times in units of `1/Δ`.

// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
mod error;
pub mod model;
pub mod propagate;
pub mod selfcheck;
pub mod spectrum;
pub mod spin_algebra;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use closed_form::EffectiveParams;
pub use model::{BatteryParams, Drive, EnergyReference, HamiltonianTerms};
pub use propagate::{EvolveSettings, Protocol, TraceResult};
pub use spectrum::{GroundStateInfo, MeanFieldResult};
pub use spin_algebra::{CollectiveOps, DickeBasis, Observable, StateVector};
pub use sweep::{PeakResult, ScanResult};
