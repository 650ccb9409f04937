//! Driving-field geometry around the closed loop and the phase algebra that
//! turns an atomic position into a loop phase.
//!
//! Units: wavenumbers are measured in `2π/λ`, positions in `λ`, detunings in
//! `γ`. With those units the magnification `ξ` and the `z` component of the
//! wave-vector mismatch are the same number.
//!
//! Legs are indexed along the loop path: leg `i` couples `|i⟩` and `|i+1⟩`,
//! with `|2N+1⟩ ≡ |1⟩`. The ascending half of the loop (legs `1..=N`) enters
//! the mismatch as `+ε·k`, the descending half (legs `N+1..=2N`) as `−ε·k`.
//! For the diamond this is `ξ = k₂₁ + k₃₂ − ε₃₄k₃₄ − ε₄₁k₄₁`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::wrap_phase;

/// Absolute tolerance (in `γ`) below which the multiphoton detuning counts as zero.
pub const STATIC_PHASE_TOLERANCE: f64 = 1e-12;

/// Propagation direction of a driving field along the quantization axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Direction::Forward),
            -1 => Ok(Direction::Backward),
            other => Err(format!("propagation sign must be -1 or +1, got {other}")),
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        match d {
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }
}

/// One driving field of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGeometry {
    /// `|k|` in units of `2π/λ`.
    pub wavenumber: f64,
    #[serde(rename = "sign")]
    pub direction: Direction,
    /// Detuning `Δ_{i+1,i}` of this leg, in units of `γ`.
    #[serde(default)]
    pub detuning: f64,
}

impl FieldGeometry {
    pub fn new(wavenumber: f64, direction: Direction, detuning: f64) -> Result<Self> {
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(Error::invalid(
                "field geometry",
                format!("wavenumber must be positive, got {wavenumber}"),
            ));
        }
        if !detuning.is_finite() {
            return Err(Error::invalid("field geometry", "detuning must be finite"));
        }
        Ok(Self {
            wavenumber,
            direction,
            detuning,
        })
    }

    /// Resonant unit-wavenumber field.
    pub fn unit(direction: Direction) -> Self {
        Self {
            wavenumber: 1.0,
            direction,
            detuning: 0.0,
        }
    }
}

/// The `2N` driving fields of a closed loop plus their relative phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopLayout {
    transitions: Vec<FieldGeometry>,
    relative_phase: f64,
    wavelength: f64,
}

impl LoopLayout {
    pub fn new(transitions: Vec<FieldGeometry>, relative_phase: f64, wavelength: f64) -> Result<Self> {
        let n = transitions.len();
        if n % 2 != 0 || n < 4 {
            return Err(Error::invalid(
                "loop layout",
                format!("need an even number of at least 4 transitions, got {n}"),
            ));
        }
        for t in &transitions {
            FieldGeometry::new(t.wavenumber, t.direction, t.detuning)?;
        }
        if !relative_phase.is_finite() {
            return Err(Error::invalid("loop layout", "relative phase must be finite"));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::invalid(
                "loop layout",
                format!("wavelength must be positive, got {wavelength}"),
            ));
        }
        Ok(Self {
            transitions,
            relative_phase: wrap_phase(relative_phase),
            wavelength,
        })
    }

    /// Resonant diamond with unit wavenumbers, forward `|1⟩→|2⟩→|3⟩` legs and
    /// the given directions of the `3–4` and `4–1` legs.
    pub fn diamond(eps34: Direction, eps41: Direction, relative_phase: f64) -> Result<Self> {
        Self::new(
            vec![
                FieldGeometry::unit(Direction::Forward),
                FieldGeometry::unit(Direction::Forward),
                FieldGeometry::unit(eps34),
                FieldGeometry::unit(eps41),
            ],
            relative_phase,
            1.0,
        )
    }

    /// Resonant diamond realizing an arbitrary real magnification.
    ///
    /// `ξ ∈ {0, 2, 4}` uses unit wavenumbers and flips propagation
    /// directions. Other values shorten (or lengthen) the `3–4` and `4–1`
    /// wavenumbers equally, which is how small coarse-stage values such as
    /// `ξ = 0.25` arise from unequal transition frequencies.
    pub fn diamond_with_magnification(xi: f64, relative_phase: f64) -> Result<Self> {
        use Direction::*;
        if !xi.is_finite() {
            return Err(Error::invalid("loop layout", "magnification must be finite"));
        }
        let (e34, e41, k) = if xi == 0.0 {
            (Forward, Forward, 1.0)
        } else if xi == 2.0 {
            (Backward, Forward, 1.0)
        } else if xi == 4.0 {
            (Backward, Backward, 1.0)
        } else if xi < 2.0 {
            (Forward, Forward, (2.0 - xi) / 2.0)
        } else {
            (Backward, Backward, (xi - 2.0) / 2.0)
        };
        Self::new(
            vec![
                FieldGeometry::unit(Forward),
                FieldGeometry::unit(Forward),
                FieldGeometry::new(k, e34, 0.0)?,
                FieldGeometry::new(k, e41, 0.0)?,
            ],
            relative_phase,
            1.0,
        )
    }

    pub fn transitions(&self) -> &[FieldGeometry] {
        &self.transitions
    }

    /// `N` for a loop of `2N` states.
    pub fn half_len(&self) -> usize {
        self.transitions.len() / 2
    }

    /// `φ₀` in `[0, 2π)`.
    pub fn relative_phase(&self) -> f64 {
        self.relative_phase
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn with_relative_phase(&self, relative_phase: f64) -> Self {
        let mut out = self.clone();
        out.relative_phase = wrap_phase(relative_phase);
        out
    }

    /// Orientation of leg `i` (0-based) in the loop sum.
    fn orientation(&self, i: usize) -> f64 {
        if i < self.half_len() {
            1.0
        } else {
            -1.0
        }
    }

    /// `Δ = Σ Δ_{i+1,i}` in units of `γ`.
    pub fn multiphoton_detuning(&self) -> f64 {
        self.transitions.iter().map(|t| t.detuning).sum()
    }

    /// `z` component of the loop wave-vector sum in units of `2π/λ`.
    pub fn wavevector_mismatch(&self) -> f64 {
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| self.orientation(i) * t.direction.sign() * t.wavenumber)
            .sum()
    }

    /// `ξ`: number of `2π` windings of the loop phase per wavelength of
    /// displacement.
    pub fn magnification(&self) -> f64 {
        self.wavevector_mismatch()
    }

    fn check_static(&self) -> Result<()> {
        let d = self.multiphoton_detuning();
        if d.abs() > STATIC_PHASE_TOLERANCE {
            return Err(Error::NonStaticPhase { detuning: d });
        }
        Ok(())
    }

    /// `Φ(z) = 2πξz + φ₀` for `z` in units of `λ`, not reduced.
    pub fn loop_phase(&self, z: f64) -> Result<f64> {
        self.check_static()?;
        Ok(TAU * self.magnification() * z + self.relative_phase)
    }

    /// [`loop_phase`](Self::loop_phase) reduced to `[0, 2π)`.
    pub fn loop_phase_reduced(&self, z: f64) -> Result<f64> {
        self.loop_phase(z).map(wrap_phase)
    }

    /// Detunings `(Δ₂₁, Δ₃₂, Δ₄₁)` entering the diamond generator.
    ///
    /// Legs store `Δ_{i+1,i}`, so the `4–1` leg holds `Δ₁₄ = −Δ₄₁`.
    pub fn diamond_detunings(&self) -> Result<[f64; 3]> {
        if self.transitions.len() != 4 {
            return Err(Error::invalid(
                "loop layout",
                "diamond dynamics need exactly four transitions",
            ));
        }
        let t = &self.transitions;
        Ok([t[0].detuning, t[1].detuning, -t[3].detuning])
    }
}

/// One magnification reachable with unit wavenumbers, with a sign pattern
/// that produces it.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnificationWitness {
    pub xi: f64,
    pub directions: Vec<Direction>,
}

fn directions_for(n: usize, pattern: u64) -> Vec<Direction> {
    // ascending legs stay forward; bit j of `pattern` reverses descending leg j
    (0..2 * n)
        .map(|i| {
            if i >= n && pattern >> (i - n) & 1 == 1 {
                Direction::Backward
            } else {
                Direction::Forward
            }
        })
        .collect()
}

fn unit_layout(directions: &[Direction]) -> LoopLayout {
    LoopLayout {
        transitions: directions.iter().map(|&d| FieldGeometry::unit(d)).collect(),
        relative_phase: 0.0,
        wavelength: 1.0,
    }
}

/// Magnifications of all `2^N` direction patterns of the descending legs, in
/// pattern order (bit `j` set reverses descending leg `j`).
pub fn magnification_spectrum(n: usize) -> Result<Vec<MagnificationWitness>> {
    if !(2..=30).contains(&n) {
        return Err(Error::invalid("loop size", format!("N must be in 2..=30, got {n}")));
    }
    Ok((0..1u64 << n)
        .map(|p| {
            let directions = directions_for(n, p);
            let xi = unit_layout(&directions).magnification();
            MagnificationWitness { xi, directions }
        })
        .collect())
}

/// The distinct magnifications `{0, 2, …, 2N}` with one witness each, ascending.
pub fn admissible_magnifications(n: usize) -> Result<Vec<MagnificationWitness>> {
    let mut out: Vec<MagnificationWitness> = Vec::new();
    for w in magnification_spectrum(n)? {
        if !out.iter().any(|o| o.xi == w.xi) {
            out.push(w);
        }
    }
    out.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    Ok(out)
}
