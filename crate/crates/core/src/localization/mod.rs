//! Turning measured fluorescence ratios back into atomic positions.
//!
//! A ratio `R` fixes the loop phase only up to the evenness pair
//! `(Φ, 2π − Φ)`, and every phase maps to one position per `λ/ξ` winding, so
//! a single measurement yields a set of branch candidates. Error bands on `R`
//! become position intervals by inverting `R(Φ)` on the monotone segment
//! that holds each solution.
//!
//! Uncertainties are reported relative to the position estimate:
//! `(z_hi − z_lo)/z_hat`. This makes the figure of merit depend on where the
//! atom sits, which is intended: at `z_hat = 0.15λ` it gives about 20 % for
//! `ξ = 2`, 2 % for `ξ = 4`, and 2.5 % for `ξ = 2, φ₀ = π/4`.

mod candidates;
mod inversion;
mod phase;
mod protocol;

pub use candidates::{candidates, propagate_error};
pub use inversion::{curve_maximum, invert_ratio, monotone_extrema, ROOT_GRID_POINTS};
pub use phase::{coarse_relative_phase, optimize_phase};
pub use protocol::{
    coarse_to_fine, select_branch, simulate_measurement, MeasurementSource, Noise, ProtocolResult,
    SimulatedSource, Stage, StageResult,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::LoopLayout;

/// A measured ratio with a symmetric relative error band `R·(1 ± δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    ratio: f64,
    relative_error: f64,
}

impl Measurement {
    pub fn new(ratio: f64, relative_error: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(Error::invalid("measurement", format!("ratio must be >= 0, got {ratio}")));
        }
        if !(0.0..0.5).contains(&relative_error) {
            return Err(Error::invalid(
                "measurement",
                format!("relative error must be in [0, 0.5), got {relative_error}"),
            ));
        }
        Ok(Self {
            ratio,
            relative_error,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn relative_error(&self) -> f64 {
        self.relative_error
    }

    /// `[R(1 − δ), R(1 + δ)]`.
    pub fn band(&self) -> (f64, f64) {
        (
            self.ratio * (1.0 - self.relative_error),
            self.ratio * (1.0 + self.relative_error),
        )
    }
}

/// Half-open search window `[lo, hi)` in units of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

/// Longest window accepted by the candidate search, in `λ`.
pub const MAX_WINDOW_LENGTH: f64 = 10.0;

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid("window", format!("need lo < hi, got [{lo}, {hi})")));
        }
        if hi - lo > MAX_WINDOW_LENGTH {
            return Err(Error::invalid(
                "window",
                format!("length {} exceeds {MAX_WINDOW_LENGTH} wavelengths", hi - lo),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// `[0, λ)`.
    pub fn one_wavelength() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.lo && z < self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Conditions attached to an interval that callers should know about but
/// that do not invalidate it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IntervalFlags {
    /// The ratio band crossed an extremum of `R(Φ)`; the interval was widened
    /// to the end of the monotone segment.
    pub band_escapes_branch: bool,
    /// The interval was clipped to the search window.
    pub clipped_to_window: bool,
    /// Branch selection found no candidate inside the prior interval and
    /// fell back to the nearest one.
    pub outside_prior: bool,
}

impl IntervalFlags {
    pub fn any(&self) -> bool {
        self.band_escapes_branch || self.clipped_to_window || self.outside_prior
    }

    /// Names of the raised flags, in declaration order.
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.band_escapes_branch {
            out.push("band_escapes_branch");
        }
        if self.clipped_to_window {
            out.push("clipped_to_window");
        }
        if self.outside_prior {
            out.push("outside_prior");
        }
        out
    }
}

/// One candidate position with its error interval, in units of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionInterval {
    pub z_lo: f64,
    pub z_hat: f64,
    pub z_hi: f64,
    /// Winding index `m` in `z = (Φ* − φ₀ + 2πm)·λ/(2πξ)`. Non-negative for
    /// windows starting at or above zero.
    pub branch: i64,
    /// The phase solution `Φ*` in `[0, 2π)` this candidate came from.
    pub phi_solution: f64,
    pub flags: IntervalFlags,
}

impl PositionInterval {
    pub fn width(&self) -> f64 {
        self.z_hi - self.z_lo
    }

    /// `(z_hi − z_lo)/z_hat`; infinite when `z_hat` is zero.
    pub fn relative_uncertainty(&self) -> f64 {
        if self.z_hat == 0.0 {
            f64::INFINITY
        } else {
            self.width() / self.z_hat.abs()
        }
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.z_lo && z <= self.z_hi
    }
}

/// All branch candidates for one measurement, ascending in `z_hat`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub candidates: Vec<PositionInterval>,
    pub layout: LoopLayout,
    pub drive_x: f64,
    pub window: Window,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidate whose estimate is closest to `z`.
    pub fn nearest(&self, z: f64) -> Option<&PositionInterval> {
        self.candidates
            .iter()
            .min_by(|a, b| (a.z_hat - z).abs().total_cmp(&(b.z_hat - z).abs()))
    }

    pub fn z_hats(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.z_hat).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_invariants() {
        assert!(Measurement::new(-0.1, 0.0).is_err());
        assert!(Measurement::new(0.5, 0.5).is_err());
        assert!(Measurement::new(0.5, -0.01).is_err());
        let m = Measurement::new(0.8, 0.05).unwrap();
        let (lo, hi) = m.band();
        assert!((lo - 0.76).abs() < 1e-15 && (hi - 0.84).abs() < 1e-15);
    }

    #[test]
    fn window_invariants() {
        assert!(Window::new(1.0, 1.0).is_err());
        assert!(Window::new(0.0, 10.5).is_err());
        let w = Window::new(0.0, 1.0).unwrap();
        assert!(w.contains(0.0) && !w.contains(1.0));
    }

    #[test]
    fn relative_uncertainty_of_degenerate_estimate() {
        let p = PositionInterval {
            z_lo: -0.1,
            z_hat: 0.0,
            z_hi: 0.1,
            branch: 0,
            phi_solution: 0.0,
            flags: IntervalFlags::default(),
        };
        assert!(p.relative_uncertainty().is_infinite());
    }
}
