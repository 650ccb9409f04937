use std::f64::consts::TAU;

use super::inversion::{invert_ratio, monotone_extrema, phase_band};
use super::{CandidateSet, IntervalFlags, Measurement, PositionInterval, Window};
use crate::error::{Error, Result};
use crate::geometry::LoopLayout;

/// Every position in `window` consistent with the measured ratio, each with
/// the interval spanned by the measurement's error band.
///
/// For integer `ξ` and the window `[0, λ)` there are `ξ` candidates per phase
/// solution.
pub fn candidates(meas: &Measurement, layout: &LoopLayout, x: f64, window: Window) -> Result<CandidateSet> {
    let xi = layout.magnification();
    if xi == 0.0 {
        return Err(Error::ZeroMagnification);
    }
    // checks that the loop phase is static
    layout.loop_phase(0.0)?;
    Window::new(window.lo, window.hi)?;

    let phi0 = layout.relative_phase();
    let solutions = invert_ratio(meas.ratio(), x)?;
    let extrema = monotone_extrema(x)?;
    let (r_lo, r_hi) = meas.band();
    let scale = TAU * xi;

    let mut out = Vec::new();
    for &phi_star in &solutions {
        let (band_lo, band_hi, escaped) = if meas.relative_error() > 0.0 {
            phase_band(x, &extrema, phi_star, r_lo, r_hi)
        } else {
            (phi_star, phi_star, false)
        };

        // z = (Φ* − φ₀ + 2πm)/(2πξ) ∈ [lo, hi)
        let m_a = (window.lo * scale - phi_star + phi0) / TAU;
        let m_b = (window.hi * scale - phi_star + phi0) / TAU;
        let m_first = m_a.min(m_b).floor() as i64 - 1;
        let m_last = m_a.max(m_b).ceil() as i64 + 1;
        for m in m_first..=m_last {
            let z_hat = (phi_star - phi0 + TAU * m as f64) / scale;
            if !window.contains(z_hat) {
                continue;
            }
            let za = z_hat + (band_lo - phi_star) / scale;
            let zb = z_hat + (band_hi - phi_star) / scale;
            let mut flags = IntervalFlags {
                band_escapes_branch: escaped,
                ..IntervalFlags::default()
            };
            let mut z_lo = za.min(zb).min(z_hat);
            let mut z_hi = za.max(zb).max(z_hat);
            if z_lo < window.lo {
                z_lo = window.lo;
                flags.clipped_to_window = true;
            }
            if z_hi > window.hi {
                z_hi = window.hi;
                flags.clipped_to_window = true;
            }
            out.push(PositionInterval {
                z_lo,
                z_hat,
                z_hi,
                branch: m,
                phi_solution: phi_star,
                flags,
            });
        }
    }
    out.sort_by(|a, b| a.z_hat.total_cmp(&b.z_hat));
    out.dedup_by(|a, b| (a.z_hat - b.z_hat).abs() < 1e-12);

    Ok(CandidateSet {
        candidates: out,
        layout: layout.clone(),
        drive_x: x,
        window,
    })
}

/// [`candidates`] for a measurement that carries a nonzero error band.
pub fn propagate_error(meas: &Measurement, layout: &LoopLayout, x: f64, window: Window) -> Result<CandidateSet> {
    if meas.relative_error() <= 0.0 {
        return Err(Error::invalid(
            "measurement",
            "error propagation needs a positive relative error",
        ));
    }
    candidates(meas, layout, x, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::ratio_analytic;
    use std::f64::consts::PI;

    fn layout(xi: f64, phi0: f64) -> LoopLayout {
        LoopLayout::diamond_with_magnification(xi, phi0).unwrap()
    }

    #[test]
    fn worked_case_four_candidates() {
        let m = Measurement::new(0.812, 0.0).unwrap();
        let c = candidates(&m, &layout(2.0, 0.0), 5.0, Window::one_wavelength()).unwrap();
        let z = c.z_hats();
        assert_eq!(z.len(), 4);
        for (got, want) in z.iter().zip([0.15, 0.35, 0.65, 0.85]) {
            assert!((got - want).abs() < 1e-3, "{z:?}");
        }
        for p in &c.candidates {
            assert_eq!(p.z_lo, p.z_hat);
            assert_eq!(p.z_hi, p.z_hat);
        }
    }

    #[test]
    fn doubled_magnification_doubles_count() {
        let m = Measurement::new(0.812, 0.0).unwrap();
        let c = candidates(&m, &layout(4.0, 0.0), 5.0, Window::one_wavelength()).unwrap();
        assert_eq!(c.len(), 8);
    }

    #[test]
    fn relative_phase_shifts_candidates() {
        let m = Measurement::new(0.812, 0.0).unwrap();
        let w = Window::one_wavelength();
        let a = candidates(&m, &layout(2.0, 0.0), 5.0, w).unwrap().z_hats();
        let b = candidates(&m, &layout(2.0, PI / 4.0), 5.0, w).unwrap().z_hats();
        assert_eq!(a.len(), b.len());
        for zb in b {
            let back = (zb + 1.0 / 16.0).rem_euclid(0.5);
            assert!(a.iter().any(|za| (za.rem_euclid(0.5) - back).abs() < 1e-10), "{zb}");
        }
    }

    #[test]
    fn zero_magnification_rejected() {
        let m = Measurement::new(0.5, 0.0).unwrap();
        let r = candidates(&m, &layout(0.0, 0.0), 5.0, Window::one_wavelength());
        assert_eq!(r.unwrap_err(), Error::ZeroMagnification);
    }

    #[test]
    fn worked_case_uncertainty_about_twenty_percent() {
        let r = ratio_analytic(5.0, 0.6 * PI);
        let m = Measurement::new(r, 0.05).unwrap();
        let c = propagate_error(&m, &layout(2.0, 0.0), 5.0, Window::one_wavelength()).unwrap();
        let p = c.nearest(0.15).unwrap();
        assert!((p.z_hat - 0.15).abs() < 1e-9);
        assert!((p.z_lo - 0.1316).abs() < 1e-3 && (p.z_hi - 0.1629).abs() < 1e-3, "{p:?}");
        assert!((p.relative_uncertainty() - 0.2086).abs() < 1e-3);
        assert!(!p.flags.any());
    }

    #[test]
    fn propagate_error_needs_band() {
        let m = Measurement::new(0.5, 0.0).unwrap();
        assert!(propagate_error(&m, &layout(2.0, 0.0), 5.0, Window::one_wavelength()).is_err());
    }

    #[test]
    fn window_clipping_is_flagged() {
        // shift φ₀ so the worked-point branch sits just above z = 0
        let m = Measurement::new(ratio_analytic(5.0, 0.6 * PI), 0.05).unwrap();
        let c = candidates(&m, &layout(2.0, 0.6 * PI - 0.008 * PI), 5.0, Window::one_wavelength()).unwrap();
        let first = c.candidates[0];
        assert!((first.z_hat - 0.002).abs() < 1e-9, "{first:?}");
        assert!(first.flags.clipped_to_window);
        assert!(!first.flags.band_escapes_branch);
        assert_eq!(first.z_lo, 0.0);
    }

    #[test]
    fn band_crossing_the_maximum_is_flagged() {
        let m = Measurement::new(ratio_analytic(5.0, 0.05), 0.05).unwrap();
        let c = candidates(&m, &layout(2.0, 0.0), 5.0, Window::one_wavelength()).unwrap();
        let first = c.candidates[0];
        assert!(first.flags.band_escapes_branch);
        assert_eq!(first.z_lo, 0.0);
    }
}
