//! Finite-volume schemes for the one-dimensional abcd-Boussinesq systems
//!
//! ```text
//! (I - b dxx) eta_t + (I + a dxx) u_x + (eta u)_x = 0
//! (I - d dxx) u_t   + (I + c dxx) eta_x + (u^2 / 2)_x = 0
//! ```
//!
//! on a periodic domain. The crate is `no_std` (it needs `alloc`) and
//! provides the discrete operator calculus, a Fourier solver for the implicit
//! linear blocks, the two time steppers, the discrete energy functionals,
//! closed-form traveling waves, and the drivers for convergence, collision
//! and long-time experiments.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod energy;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod fft;
pub mod grid;
pub mod identities;
pub mod presets;
pub mod scheme;
pub mod spectral;

pub use energy::{energy, energy_error, EnergyKind};
pub use error::{Error, Result};
pub use exact::{CellAverageConfig, Family, TravelingWaveSpec};
pub use grid::{Grid, GridFunction};
pub use scheme::{AbcdParams, DtPolicy, Regime, RusanovConfig, SchemeConfig, SimState, Stepper};
pub use spectral::{CoupledSystemSpec, ModeSymbols, SpectralSolver};
