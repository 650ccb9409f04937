//! Sub-wavelength localization of an atom driven by a closed loop of
//! running-wave laser fields.
//!
//! The position `z` enters only through the closed-loop phase
//! `Φ = 2πξz/λ + φ₀` ([`geometry`]). The steady state of the driven diamond
//! ([`dynamics`]) turns `Φ` into a fluorescence ratio `R` ([`observables`]),
//! and [`localization`] inverts measured ratios back into candidate
//! positions with error intervals.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod localization;
pub mod numeric;
pub mod observables;

pub use dynamics::{DecayModel, DensityMatrix, DriveParams};
pub use error::{Error, Result};
pub use geometry::{Direction, FieldGeometry, LoopLayout};
pub use localization::{CandidateSet, Measurement, PositionInterval};
