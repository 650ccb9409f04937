//! Synthetic measurements and the coarse-to-fine magnification protocol.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{candidates, CandidateSet, Measurement, PositionInterval, Window};
use crate::error::{Error, Result};
use crate::geometry::LoopLayout;
use crate::observables::ratio_analytic;

/// Multiplicative Gaussian noise on the ratio, `R·(1 + σu)`, `u ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

/// Ratio an atom at `z_true` would produce, optionally with seeded noise.
///
/// The returned relative error is `band` when given, else the noise `σ`,
/// else zero.
pub fn simulate_measurement(
    z_true: f64,
    layout: &LoopLayout,
    x: f64,
    noise: Option<Noise>,
    band: Option<f64>,
) -> Result<Measurement> {
    let phi = layout.loop_phase(z_true)?;
    let mut ratio = ratio_analytic(x, phi);
    if let Some(n) = noise {
        if !(n.sigma.is_finite() && n.sigma >= 0.0) {
            return Err(Error::invalid("noise", format!("sigma must be >= 0, got {}", n.sigma)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
        let u: f64 = StandardNormal.sample(&mut rng);
        ratio = (ratio * (1.0 + n.sigma * u)).max(0.0);
    }
    let relative_error = band.or(noise.map(|n| n.sigma)).unwrap_or(0.0);
    Measurement::new(ratio, relative_error)
}

/// One magnification step: the layout to drive with, the drive strength, and
/// optionally the error band the measurement is expected to carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub layout: LoopLayout,
    pub x: f64,
    pub band: Option<f64>,
}

impl Stage {
    pub fn new(layout: LoopLayout, x: f64) -> Self {
        Self {
            layout,
            x,
            band: None,
        }
    }

    pub fn with_band(mut self, band: f64) -> Self {
        self.band = Some(band);
        self
    }

    pub fn xi(&self) -> f64 {
        self.layout.magnification()
    }
}

/// Anything that can produce a ratio measurement for a given stage.
pub trait MeasurementSource {
    fn measure(&mut self, index: usize, stage: &Stage) -> Result<Measurement>;
}

impl<F> MeasurementSource for F
where
    F: FnMut(usize, &Stage) -> Result<Measurement>,
{
    fn measure(&mut self, index: usize, stage: &Stage) -> Result<Measurement> {
        self(index, stage)
    }
}

/// Simulated atom at a fixed position. Stage `i` draws its noise from
/// `seed + i`, so runs are reproducible stage by stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSource {
    pub z_true: f64,
    pub band: f64,
    pub noise: Option<Noise>,
}

impl SimulatedSource {
    pub fn noiseless(z_true: f64, band: f64) -> Self {
        Self {
            z_true,
            band,
            noise: None,
        }
    }
}

impl MeasurementSource for SimulatedSource {
    fn measure(&mut self, index: usize, stage: &Stage) -> Result<Measurement> {
        let noise = self.noise.map(|n| Noise {
            sigma: n.sigma,
            seed: n.seed.wrapping_add(index as u64),
        });
        simulate_measurement(
            self.z_true,
            &stage.layout,
            stage.x,
            noise,
            Some(stage.band.unwrap_or(self.band)),
        )
    }
}

/// The candidate inside `prior` when there is exactly one. With none inside,
/// the candidate nearest the prior estimate is returned and flagged.
pub fn select_branch(cands: &CandidateSet, prior: &PositionInterval) -> Result<PositionInterval> {
    if cands.is_empty() {
        return Err(Error::invalid("candidate set", "no candidates to select from"));
    }
    let inside: Vec<&PositionInterval> = cands
        .candidates
        .iter()
        .filter(|c| prior.contains(c.z_hat))
        .collect();
    match inside.as_slice() {
        [one] => Ok(**one),
        [] => {
            let mut c = *cands.nearest(prior.z_hat).unwrap();
            c.flags.outside_prior = true;
            Ok(c)
        }
        many => Err(Error::AmbiguousBranch {
            count: many.len(),
            lo: prior.z_lo,
            hi: prior.z_hi,
            stage: None,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub xi: f64,
    pub phi0: f64,
    pub x: f64,
    pub measurement: Measurement,
    pub interval: PositionInterval,
    pub candidate_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolResult {
    pub stages: Vec<StageResult>,
    pub final_interval: PositionInterval,
}

impl ProtocolResult {
    pub fn z_hat(&self) -> f64 {
        self.final_interval.z_hat
    }

    pub fn relative_uncertainty(&self) -> f64 {
        self.final_interval.relative_uncertainty()
    }
}

fn check_stages(stages: &[Stage]) -> Result<()> {
    let first = stages
        .first()
        .ok_or_else(|| Error::invalid("protocol", "need at least one stage"))?;
    let xi0 = first.xi();
    if xi0 == 0.0 {
        return Err(Error::ZeroMagnification);
    }
    if !(xi0 > 0.0 && xi0 <= 1.0) {
        return Err(Error::invalid(
            "protocol",
            format!("coarse stage needs 0 < xi <= 1, got {xi0}"),
        ));
    }
    for (i, pair) in stages.windows(2).enumerate() {
        if !(pair[1].xi() > pair[0].xi()) {
            return Err(Error::invalid(
                "protocol",
                format!(
                    "magnification must increase strictly: stage {} has xi {} after {}",
                    i + 1,
                    pair[1].xi(),
                    pair[0].xi()
                ),
            ));
        }
    }
    Ok(())
}

/// Localize with increasing magnification.
///
/// The first (coarse) stage must find exactly one candidate in `window`.
/// Every later stage picks, among its candidates in `window`, the single one
/// inside the previous stage's interval.
pub fn coarse_to_fine<S: MeasurementSource>(
    source: &mut S,
    stages: &[Stage],
    window: Window,
) -> Result<ProtocolResult> {
    check_stages(stages)?;
    let tag = |i: usize, e: Error| match e {
        Error::AmbiguousBranch { count, lo, hi, .. } => Error::AmbiguousBranch {
            count,
            lo,
            hi,
            stage: Some(i),
        },
        other => other,
    };

    let mut results: Vec<StageResult> = Vec::with_capacity(stages.len());
    for (i, stage) in stages.iter().enumerate() {
        let meas = source.measure(i, stage)?;
        let cands = candidates(&meas, &stage.layout, stage.x, window)?;
        let interval = match results.last() {
            None => match cands.candidates.as_slice() {
                [one] => *one,
                [] => {
                    return Err(Error::invalid(
                        "protocol",
                        "coarse stage found no candidate in the window",
                    ))
                }
                many => {
                    return Err(Error::AmbiguousBranch {
                        count: many.len(),
                        lo: window.lo,
                        hi: window.hi,
                        stage: Some(0),
                    })
                }
            },
            Some(prev) => select_branch(&cands, &prev.interval).map_err(|e| tag(i, e))?,
        };
        results.push(StageResult {
            xi: stage.xi(),
            phi0: stage.layout.relative_phase(),
            x: stage.x,
            measurement: meas,
            interval,
            candidate_count: cands.len(),
        });
    }
    let final_interval = results.last().unwrap().interval;
    Ok(ProtocolResult {
        stages: results,
        final_interval,
    })
}
