//! Phase-level inversion of the closed-form ratio curve.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numeric::{bisect, circular_distance, golden_max, golden_min, wrap_phase};
use crate::observables::{ratio_analytic, slope_analytic};

/// Uniform grid used to isolate roots and extrema of `R(Φ)` on `[0, 2π)`.
pub const ROOT_GRID_POINTS: usize = 4096;
/// Bracket width at which bisection stops, in radians.
pub const PHASE_TOLERANCE: f64 = 1e-10;
/// Residual accepted for tangent roots and for ratios just above the maximum.
pub const RATIO_TOLERANCE: f64 = 1e-9;
/// Roots closer than this (on the circle) are reported once.
const MERGE_DISTANCE: f64 = 1e-6;

fn grid_phase(i: usize) -> f64 {
    TAU * i as f64 / ROOT_GRID_POINTS as f64
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("drive", format!("x must be positive, got {x}")))
    }
}

/// Location in `[0, 2π)` and value of the maximum of `R(·)` for drive `x`.
pub fn curve_maximum(x: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    let h = grid_phase(1);
    let best = (0..ROOT_GRID_POINTS)
        .max_by(|&a, &b| ratio_analytic(x, grid_phase(a)).total_cmp(&ratio_analytic(x, grid_phase(b))))
        .unwrap();
    let c = grid_phase(best);
    let phi = golden_max(|p| ratio_analytic(x, p), c - h, c + h, PHASE_TOLERANCE);
    let (phi, value) = [(phi, ratio_analytic(x, phi)), (c, ratio_analytic(x, c))]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    Ok((snap(wrap_phase(phi)), value))
}

/// Sorted phases in `[0, 2π)` where `dR/dΦ` changes sign. Consecutive
/// entries (cyclically) bound the monotone segments of the curve.
pub fn monotone_extrema(x: f64) -> Result<Vec<f64>> {
    check_x(x)?;
    let n = ROOT_GRID_POINTS;
    let s: Vec<f64> = (0..n).map(|i| slope_analytic(x, grid_phase(i))).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (grid_phase(i), grid_phase(i + 1));
        let (sa, sb) = (s[i], s[(i + 1) % n]);
        if sa == 0.0 {
            out.push(a);
        } else if sa * sb < 0.0 {
            out.push(bisect(|p| slope_analytic(x, p), a, b, PHASE_TOLERANCE));
        }
    }
    Ok(merge_on_circle(out))
}

/// Representative in `[0, 2π)` with values a hair below `2π` sent to zero.
fn snap(p: f64) -> f64 {
    if TAU - p < 1e-9 {
        0.0
    } else {
        p
    }
}

fn merge_on_circle(roots: Vec<f64>) -> Vec<f64> {
    let mut roots: Vec<f64> = roots.into_iter().map(|r| snap(wrap_phase(r))).collect();
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&last) if circular_distance(last, r) < MERGE_DISTANCE => {}
            _ => out.push(r),
        }
    }
    // the first and last entries may be neighbours across 2π
    if out.len() > 1 && circular_distance(out[0], *out.last().unwrap()) < MERGE_DISTANCE {
        out.pop();
    }
    out
}

/// All `Φ ∈ [0, 2π)` with `R(x, Φ) = target`, ascending.
///
/// Sign changes of the residual on a [`ROOT_GRID_POINTS`] grid are refined by
/// bisection. Tangent roots, where the residual touches zero without
/// crossing, are found as local minima of `|R − target|` and reported once.
pub fn invert_ratio(target: f64, x: f64) -> Result<Vec<f64>> {
    check_x(x)?;
    if !(target.is_finite() && target >= 0.0) {
        return Err(Error::invalid("ratio", format!("must be >= 0, got {target}")));
    }
    let (_, max) = curve_maximum(x)?;
    if target > max + RATIO_TOLERANCE {
        return Err(Error::NoSolution { ratio: target, max });
    }

    let n = ROOT_GRID_POINTS;
    let f = |p: f64| ratio_analytic(x, p) - target;
    let r: Vec<f64> = (0..n).map(|i| f(grid_phase(i))).collect();
    let at = |i: isize| r[i.rem_euclid(n as isize) as usize];

    let mut roots = Vec::new();
    for i in 0..n {
        let (ri, rn) = (r[i], at(i as isize + 1));
        if ri == 0.0 {
            roots.push(grid_phase(i));
        } else if ri * rn < 0.0 {
            roots.push(bisect(f, grid_phase(i), grid_phase(i + 1), PHASE_TOLERANCE));
        }
    }

    for i in 0..n as isize {
        let (rp, ri, rn) = (at(i - 1), at(i), at(i + 1));
        let same_sign = rp.signum() == ri.signum() && ri.signum() == rn.signum() && ri != 0.0;
        if same_sign && ri.abs() <= rp.abs() && ri.abs() <= rn.abs() {
            let c = TAU * i as f64 / n as f64;
            let h = grid_phase(1);
            let p = golden_min(|p| f(p).abs(), c - h, c + h, PHASE_TOLERANCE);
            if f(p).abs() <= RATIO_TOLERANCE {
                roots.push(p);
            }
        }
    }

    Ok(merge_on_circle(roots))
}

/// Phase range `[lo, hi]` (unwrapped around `phi_star`) of the ratio band
/// `[r_lo, r_hi]` on the monotone segment holding `phi_star`. The flag is
/// raised when a band edge falls outside the segment's range of values.
///
/// A solution sitting on an extremum belongs to both neighbouring segments;
/// the union of the two ranges is returned.
pub(crate) fn phase_band(x: f64, extrema: &[f64], phi_star: f64, r_lo: f64, r_hi: f64) -> (f64, f64, bool) {
    if extrema.is_empty() {
        return (phi_star, phi_star, false);
    }
    let k = extrema.len();
    // extrema extended cyclically so that some pair brackets phi_star
    let ext = |j: isize| -> f64 {
        let q = j.div_euclid(k as isize);
        let r = j.rem_euclid(k as isize) as usize;
        extrema[r] + TAU * q as f64
    };
    let mut j = -1isize;
    while ext(j + 1) <= phi_star {
        j += 1;
    }
    // ext(j) <= phi_star < ext(j + 1)
    let segments: Vec<(f64, f64)> = if (phi_star - ext(j)).abs() <= 1e-9 {
        vec![(ext(j - 1), ext(j)), (ext(j), ext(j + 1))]
    } else if (ext(j + 1) - phi_star).abs() <= 1e-9 {
        vec![(ext(j), ext(j + 1)), (ext(j + 1), ext(j + 2))]
    } else {
        vec![(ext(j), ext(j + 1))]
    };

    let mut lo = phi_star;
    let mut hi = phi_star;
    let mut escaped = false;
    for (a, b) in segments {
        let (ra, rb) = (ratio_analytic(x, a), ratio_analytic(x, b));
        let (seg_min, seg_max) = (ra.min(rb), ra.max(rb));
        for t in [r_lo, r_hi] {
            let p = if t > seg_max {
                escaped = true;
                if ra >= rb { a } else { b }
            } else if t < seg_min {
                escaped = true;
                if ra <= rb { a } else { b }
            } else {
                bisect(|p| ratio_analytic(x, p) - t, a, b, PHASE_TOLERANCE)
            };
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    (lo, hi, escaped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::ratio_at_zero_phase;
    use std::f64::consts::PI;

    #[test]
    fn dark_ratio_has_single_root() {
        let r = invert_ratio(0.0, 5.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - PI).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn worked_ratio_gives_evenness_pair() {
        let r = invert_ratio(0.812, 5.0).unwrap();
        assert_eq!(r.len(), 2);
        // brute-force residual scan on a 10⁶-point grid: 1.886306(5)
        assert!((r[0] - 1.886_306_5).abs() < 1e-5, "{r:?}");
        assert!((r[0] - 0.6 * PI).abs() < 2e-3);
        assert!((r[1] - 1.4 * PI).abs() < 2e-3);
        assert!((r[0] + r[1] - TAU).abs() < 1e-9);
    }

    #[test]
    fn maximum_is_reported_once() {
        let r = invert_ratio(ratio_at_zero_phase(5.0), 5.0).unwrap();
        assert_eq!(r.len(), 1, "{r:?}");
        assert!(circular_distance(r[0], 0.0) < 1e-6);
    }

    #[test]
    fn above_maximum_fails() {
        assert!(matches!(invert_ratio(0.97, 5.0), Err(Error::NoSolution { .. })));
        // within tolerance is accepted
        assert!(invert_ratio(ratio_at_zero_phase(5.0) + 5e-10, 5.0).is_ok());
    }

    #[test]
    fn roots_reproduce_the_target() {
        for x in [1.0, 5.0, 10.0] {
            let (_, max) = curve_maximum(x).unwrap();
            for k in 1..20 {
                let t = max * k as f64 / 20.0;
                let roots = invert_ratio(t, x).unwrap();
                assert_eq!(roots.len(), 2, "x={x} t={t}");
                for p in roots {
                    assert!((ratio_analytic(x, p) - t).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn curve_maximum_at_zero_phase() {
        for x in [1.0, 5.0, 10.0] {
            let (p, v) = curve_maximum(x).unwrap();
            assert!(circular_distance(p, 0.0) < 1e-6);
            assert!((v - ratio_at_zero_phase(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn extrema_at_zero_and_pi() {
        for x in [1.0, 5.0, 10.0] {
            let e = monotone_extrema(x).unwrap();
            assert_eq!(e.len(), 2, "{e:?}");
            assert!(circular_distance(e[0], 0.0) < 1e-8);
            assert!((e[1] - PI).abs() < 1e-8);
        }
    }

    #[test]
    fn phase_band_brackets_solution() {
        let e = monotone_extrema(5.0).unwrap();
        let phi = 0.6 * PI;
        let r = ratio_analytic(5.0, phi);
        let (lo, hi, esc) = phase_band(5.0, &e, phi, r * 0.95, r * 1.05);
        assert!(!esc);
        assert!(lo < phi && phi < hi);
        assert!((ratio_analytic(5.0, lo) - r * 1.05).abs() < 1e-9);
        assert!((ratio_analytic(5.0, hi) - r * 0.95).abs() < 1e-9);
    }

    #[test]
    fn phase_band_escapes_at_top() {
        let e = monotone_extrema(5.0).unwrap();
        let phi = 0.05;
        let r = ratio_analytic(5.0, phi);
        let (lo, _, esc) = phase_band(5.0, &e, phi, r * 0.95, r * 1.05);
        assert!(esc);
        assert!(lo.abs() < 1e-8);
        // just below 2π the segment wraps through zero
        let (_, hi, esc) = phase_band(5.0, &e, TAU - 0.05, r * 0.95, r * 1.05);
        assert!(esc);
        assert!((hi - TAU).abs() < 1e-8);
    }
}
