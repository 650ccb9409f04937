use std::f64::consts::{PI, TAU};

use super::Window;
use crate::error::{Error, Result};
use crate::geometry::LoopLayout;
use crate::numeric::{golden_max, wrap_phase};
use crate::observables::slope_analytic;

/// Grid of relative phases scanned before refinement.
pub const PHASE_GRID_POINTS: usize = 1024;
/// Golden-section stopping width, in radians.
pub const PHASE_OPT_TOLERANCE: f64 = 1e-6;
/// Peaks whose `|dR/dΦ|` agree to this relative tolerance count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// Relative phase `φ₀*` that puts the expected position `z_est` on the
/// steepest point of `R(Φ)`, so that `|∂z/∂R|` is smallest there.
///
/// The symmetric curve has two equally steep operating points per period;
/// ties go to the smaller operating phase, which keeps the answer stable
/// under `z_est → z_est + λ/ξ`.
pub fn optimize_phase(z_est: f64, layout: &LoopLayout, x: f64) -> Result<f64> {
    let xi = layout.magnification();
    if xi == 0.0 {
        return Err(Error::ZeroMagnification);
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid("drive", format!("x must be positive, got {x}")));
    }
    if !z_est.is_finite() {
        return Err(Error::invalid("position", "z_est must be finite"));
    }
    let base = wrap_phase(layout.with_relative_phase(0.0).loop_phase(z_est)?);
    let objective = |phi0: f64| slope_analytic(x, base + phi0).abs();

    let n = PHASE_GRID_POINTS;
    let h = TAU / n as f64;
    let values: Vec<f64> = (0..n).map(|k| objective(h * k as f64)).collect();

    // refine every grid-local maximum, then choose among the refined peaks
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let (prev, here, next) = (values[(k + n - 1) % n], values[k], values[(k + 1) % n]);
        if here >= prev && here >= next {
            let c = h * k as f64;
            let p = golden_max(objective, c - h, c + h, PHASE_OPT_TOLERANCE);
            peaks.push((wrap_phase(p), objective(p)));
        }
    }
    let best = peaks.iter().map(|p| p.1).fold(0.0, f64::max);
    let chosen = peaks
        .iter()
        .filter(|p| p.1 >= best * (1.0 - TIE_TOLERANCE))
        .min_by(|a, b| wrap_phase(base + a.0).total_cmp(&wrap_phase(base + b.0)))
        .expect("a periodic function has a maximum on the grid");
    Ok(chosen.0)
}

/// Relative phase that maps the top of `window` onto the dark point `Φ = π`
/// at magnification `xi`.
///
/// When the window spans at most `λ/(2ξ)` its whole phase image lies on the
/// falling half of `R(Φ)`, so a coarse measurement has a single branch and
/// sits on the steep side of the curve rather than on its flat top.
pub fn coarse_relative_phase(window: Window, xi: f64) -> f64 {
    wrap_phase(PI - TAU * xi * window.hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::slope;

    fn layout(xi: f64) -> LoopLayout {
        LoopLayout::diamond_with_magnification(xi, 0.0).unwrap()
    }

    fn slope_at(z: f64, xi: f64, phi0: f64) -> f64 {
        slope(5.0, TAU * xi * z + phi0).abs()
    }

    #[test]
    fn beats_the_illustrative_phase() {
        let p = optimize_phase(0.15, &layout(2.0), 5.0).unwrap();
        assert!(slope_at(0.15, 2.0, p) > slope_at(0.15, 2.0, PI / 4.0));
        assert!(slope_at(0.15, 2.0, p) >= slope_at(0.15, 2.0, 0.0));
    }

    #[test]
    fn periodic_in_position() {
        for xi in [2.0, 4.0, 0.25] {
            let a = optimize_phase(0.15, &layout(xi), 5.0).unwrap();
            let b = optimize_phase(0.15 + 1.0 / xi, &layout(xi), 5.0).unwrap();
            assert!((a - b).abs() < 1e-6, "xi={xi}: {a} vs {b}");
        }
    }

    #[test]
    fn ignores_layout_relative_phase() {
        let a = optimize_phase(0.3, &layout(2.0), 5.0).unwrap();
        let b = optimize_phase(0.3, &layout(2.0).with_relative_phase(1.0), 5.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_magnification() {
        assert_eq!(optimize_phase(0.1, &layout(0.0), 5.0), Err(Error::ZeroMagnification));
    }

    #[test]
    fn coarse_phase_maps_window_top_to_pi() {
        let w = Window::one_wavelength();
        let p = coarse_relative_phase(w, 0.25);
        assert!((p - PI / 2.0).abs() < 1e-15);
    }
}
