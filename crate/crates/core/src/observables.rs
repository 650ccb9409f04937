//! Fluorescence-ratio observable `R = I(3→2)/I(2→1)`.

use std::f64::consts::{PI, TAU};

use crate::dynamics::{Channel, DecayModel, DensityMatrix};
use crate::error::{Error, Result};
use crate::numeric::linspace;

/// Smallest `ρ₂₂` for which the ratio is considered measurable.
pub const MIN_DENOMINATOR_POPULATION: f64 = 1e-14;
/// Central-difference step for [`slope`], in radians.
pub const SLOPE_STEP: f64 = 1e-6;
/// Half-width of the window excluded around `Φ ∈ {0, π, 2π}` by [`drive_quality`].
pub const SLOPE_EXCLUSION: f64 = TAU / 256.0;

/// `R` from a state: `(2γ₃₂ρ₃₃)/(2γ₂₁ρ₂₂)`.
pub fn ratio_numeric(rho: &DensityMatrix, decay: &DecayModel) -> Result<f64> {
    let p = rho.populations();
    if p[1] <= MIN_DENOMINATOR_POPULATION {
        return Err(Error::VanishingDenominator { population: p[1] });
    }
    Ok(decay.rate(Channel::ThreeToTwo) * p[2] / (decay.rate(Channel::TwoToOne) * p[1]))
}

/// Closed-form resonant ratio for equal rates `γ` and equal couplings `xγ`.
pub fn ratio_analytic(x: f64, phi: f64) -> f64 {
    let x2 = x * x;
    let x4 = x2 * x2;
    let x6 = x4 * x2;
    let c = phi.cos();
    let half = (0.5 * phi).cos();
    let num = 2.0 * x2 * half * half * (-(3.0 + 2.0 * x2).powi(2) + 4.0 * x4 * c);
    let den = -18.0 - 51.0 * x2 - 28.0 * x4 - 2.0 * x6
        + x2 * (9.0 + 4.0 * x2) * c
        + 2.0 * x6 * (2.0 * phi).cos();
    num / den
}

/// `dR/dΦ` by central difference on [`ratio_analytic`].
pub fn slope(x: f64, phi: f64) -> f64 {
    let h = SLOPE_STEP;
    (ratio_analytic(x, phi + h) - ratio_analytic(x, phi - h)) / (2.0 * h)
}

/// `dR/dΦ` from the quotient rule on the closed form. Agrees with [`slope`]
/// to finite-difference accuracy and is free of its rounding noise, which
/// matters when maximizing `|dR/dΦ|`.
pub fn slope_analytic(x: f64, phi: f64) -> f64 {
    let x2 = x * x;
    let x4 = x2 * x2;
    let x6 = x4 * x2;
    let (s, c) = phi.sin_cos();
    let half = (0.5 * phi).cos();
    let p = -(3.0 + 2.0 * x2).powi(2) + 4.0 * x4 * c;
    let num = 2.0 * x2 * half * half * p;
    let dnum = 2.0 * x2 * (-0.5 * s * p - half * half * 4.0 * x4 * s);
    let den = -18.0 - 51.0 * x2 - 28.0 * x4 - 2.0 * x6
        + x2 * (9.0 + 4.0 * x2) * c
        + 2.0 * x6 * (2.0 * phi).cos();
    let dden = -x2 * (9.0 + 4.0 * x2) * s - 4.0 * x6 * (2.0 * phi).sin();
    (dnum * den - num * dden) / (den * den)
}

/// `R(Φ = 0) = (18x² + 24x⁴)/(18 + 42x² + 24x⁴)`, the curve maximum.
pub fn ratio_at_zero_phase(x: f64) -> f64 {
    let x2 = x * x;
    let x4 = x2 * x2;
    (18.0 * x2 + 24.0 * x4) / (18.0 + 42.0 * x2 + 24.0 * x4)
}

/// Extremes of `|dR/dΦ|` over a period, used to compare drive strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveQuality {
    pub x: f64,
    pub min_slope: f64,
    pub max_slope: f64,
}

/// Min and max of `|dR/dΦ|` on a uniform grid of `[0, 2π)`, skipping a
/// window of half-width [`SLOPE_EXCLUSION`] around the symmetry-forced zeros
/// at `0`, `π` and `2π`. The window edges are always sampled so the minimum
/// does not depend on where the grid happens to fall.
pub fn drive_quality(x: f64, grid_points: usize) -> Result<DriveQuality> {
    if grid_points < 256 {
        return Err(Error::invalid("grid", format!("need at least 256 points, got {grid_points}")));
    }
    let w = SLOPE_EXCLUSION;
    let excluded = |phi: f64| [0.0, PI, TAU].iter().any(|c| (phi - c).abs() < w);
    let edges = [w, PI - w, PI + w, TAU - w];
    let samples = (0..grid_points)
        .map(|i| TAU * i as f64 / grid_points as f64)
        .filter(|p| !excluded(*p))
        .chain(edges);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for phi in samples {
        let s = slope(x, phi).abs();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok(DriveQuality {
        x,
        min_slope: lo,
        max_slope: hi,
    })
}

/// Orders drive strengths best-first: largest worst-case sensitivity
/// (`min |dR/dΦ|`), ties broken by the larger maximum slope.
pub fn rank_drives(xs: &[f64], grid_points: usize) -> Result<Vec<DriveQuality>> {
    let mut q = xs
        .iter()
        .map(|&x| drive_quality(x, grid_points))
        .collect::<Result<Vec<_>>>()?;
    q.sort_by(|a, b| {
        b.min_slope
            .total_cmp(&a.min_slope)
            .then(b.max_slope.total_cmp(&a.max_slope))
    });
    Ok(q)
}

/// `R(Φ)` and `dR/dΦ` sampled on a uniform grid of `[0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioCurve {
    pub x: f64,
    pub phi_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl RatioCurve {
    pub fn len(&self) -> usize {
        self.phi_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi_grid.is_empty()
    }
}

pub fn ratio_curve(x: f64, points: usize) -> Result<RatioCurve> {
    if points < 2 {
        return Err(Error::invalid("grid", format!("need at least 2 points, got {points}")));
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid("drive", format!("x must be positive, got {x}")));
    }
    let phi_grid = linspace(0.0, TAU, points);
    let values = phi_grid.iter().map(|&p| ratio_analytic(x, p)).collect();
    let slopes = phi_grid.iter().map(|&p| slope(x, p)).collect();
    Ok(RatioCurve {
        x,
        phi_grid,
        values,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use num_complex::Complex64 as C64;

    #[test]
    fn worked_point() {
        let r = ratio_analytic(5.0, 0.6 * PI);
        assert!((r - 0.812).abs() < 1e-3, "{r}");
    }

    #[test]
    fn dark_point_is_exact_zero() {
        for x in [0.1, 1.0, 5.0, 10.0, 20.0] {
            assert!(ratio_analytic(x, PI).abs() < 1e-30);
        }
    }

    #[test]
    fn shifted_operating_point() {
        let r = ratio_analytic(5.0, 0.85 * PI);
        assert!((r - 0.4).abs() < 0.01, "{r}");
    }

    #[test]
    fn slope_examples() {
        assert!(slope(5.0, 0.0).abs() < 1e-4);
        assert!(slope(5.0, PI).abs() < 1e-4);
        let secant = (ratio_analytic(5.0, 0.8 * PI) - ratio_analytic(5.0, 0.9 * PI)) / (0.1 * PI);
        let s = slope(5.0, 0.85 * PI).abs();
        assert!((secant - 0.987).abs() < 0.01, "{secant}");
        assert!((s - 1.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn analytic_slope_matches_finite_difference() {
        for x in [0.5, 1.0, 5.0, 10.0] {
            for k in 0..64 {
                let phi = TAU * k as f64 / 64.0 + 0.01;
                assert!((slope_analytic(x, phi) - slope(x, phi)).abs() < 1e-6, "{x} {phi}");
            }
        }
    }

    #[test]
    fn ratio_numeric_equal_populations() {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.25, 0.0);
        m[(2, 2)] = C64::new(0.25, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        assert_eq!(ratio_numeric(&rho, &DecayModel::unit()).unwrap(), 1.0);
        let d = DecayModel::new([2.0, 1.0, 4.0, 1.0]).unwrap();
        assert_eq!(ratio_numeric(&rho, &d).unwrap(), 0.5);
    }

    #[test]
    fn ratio_numeric_vanishing_denominator() {
        let rho = DensityMatrix::pure_level(0);
        assert!(matches!(
            ratio_numeric(&rho, &DecayModel::unit()),
            Err(Error::VanishingDenominator { .. })
        ));
    }

    #[test]
    fn curve_endpoints_and_extremes() {
        let c = ratio_curve(5.0, 721).unwrap();
        assert_eq!(c.len(), 721);
        assert!((c.values[0] - c.values[720]).abs() < 1e-15);
        assert!(c.values[360] < 1e-10);
        assert!((c.values[0] - ratio_at_zero_phase(5.0)).abs() < 1e-15);
        let max = c.values.iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 0.961_538_461_538_461_6).abs() < 1e-12);
        assert!(ratio_curve(5.0, 1).is_err());
    }

    #[test]
    fn drive_quality_prefers_moderate_drive() {
        let ranked = rank_drives(&[1.0, 5.0, 10.0], 4096).unwrap();
        assert_eq!(ranked[0].x, 5.0);
        let q1 = drive_quality(1.0, 4096).unwrap();
        let q5 = drive_quality(5.0, 4096).unwrap();
        assert!(q5.max_slope > q1.max_slope);
        assert!(drive_quality(5.0, 100).is_err());
    }

    #[test]
    fn drive_quality_grid_converged() {
        let a = drive_quality(5.0, 2048).unwrap();
        let b = drive_quality(5.0, 4096).unwrap();
        assert!(((a.min_slope - b.min_slope) / b.min_slope).abs() < 0.01);
        assert!(((a.max_slope - b.max_slope) / b.max_slope).abs() < 0.01);
    }
}
