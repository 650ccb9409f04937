//! Command implementations behind the `runwave` binary.
//!
//! Each command takes a validated [`ScenarioConfig`] and returns the complete
//! output text, so nothing is written when a command fails.

pub mod config;
pub mod output;

use std::path::Path;

pub use config::{Overrides, ScenarioConfig, SCHEMA_VERSION};
use output::{float, Csv, Json};

use crate::dynamics::diamond_steady_state;
use crate::error::{Error, Result};
use crate::localization::{
    candidates, coarse_to_fine, curve_maximum, optimize_phase, simulate_measurement, Measurement,
    PositionInterval, SimulatedSource,
};
use crate::numeric::linspace;
use crate::observables::{ratio_analytic, ratio_curve, ratio_numeric, slope};

pub const DEFAULT_CURVE_POINTS: usize = 721;
pub const POSITION_CURVE_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RatioCurve,
    PositionCurve,
    Invert,
    Protocol,
    OptimizePhi0,
    SteadyState,
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const ZERO_MAGNIFICATION: i32 = 3;
    pub const NO_SOLUTION: i32 = 4;
    pub const AMBIGUOUS: i32 = 5;
    pub const DEGENERATE: i32 = 6;
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid { .. } | Error::NonStaticPhase { .. } => exit::CONFIG,
        Error::ZeroMagnification => exit::ZERO_MAGNIFICATION,
        Error::NoSolution { .. } => exit::NO_SOLUTION,
        Error::AmbiguousBranch { .. } => exit::AMBIGUOUS,
        Error::DegenerateSteadyState { .. } | Error::NoConvergence { .. } => exit::DEGENERATE,
        Error::VanishingDenominator { .. } => exit::OTHER,
    }
}

/// Reads the config file (if any) and applies the flag overrides.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ScenarioConfig> {
    let mut cfg = match path {
        None => ScenarioConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Invalid {
                what: "config",
                reason: format!("{}: {e}", p.display()),
            })?;
            ScenarioConfig::from_json(&text)?
        }
    };
    cfg.apply(overrides);
    Ok(cfg)
}

pub fn run(cmd: Command, cfg: &ScenarioConfig) -> Result<String> {
    match cmd {
        Command::RatioCurve => cmd_ratio_curve(cfg),
        Command::PositionCurve => cmd_position_curve(cfg),
        Command::Invert => cmd_invert(cfg),
        Command::Protocol => cmd_protocol(cfg),
        Command::OptimizePhi0 => cmd_optimize_phi0(cfg),
        Command::SteadyState => cmd_steady_state(cfg),
    }
}

/// CSV `phi_rad,R,dR_dPhi` over `[0, 2π]`.
pub fn cmd_ratio_curve(cfg: &ScenarioConfig) -> Result<String> {
    let x = cfg.drive()?.x();
    let curve = ratio_curve(x, cfg.points(DEFAULT_CURVE_POINTS))?;
    let mut csv = Csv::new(&["phi_rad", "R", "dR_dPhi"]);
    for i in 0..curve.len() {
        csv.row(&[
            float(curve.phi_grid[i]),
            float(curve.values[i]),
            float(curve.slopes[i]),
        ]);
    }
    Ok(csv.finish())
}

/// CSV `R,branch,z_lambda`: every candidate position in the window for
/// ratios spanning `[0, R_max]`. `branch` numbers the candidates of one
/// ratio in ascending `z`.
pub fn cmd_position_curve(cfg: &ScenarioConfig) -> Result<String> {
    let x = cfg.drive()?.x();
    let layout = cfg.layout()?;
    let window = cfg.window()?;
    if layout.magnification() == 0.0 {
        return Err(Error::ZeroMagnification);
    }
    let (_, max) = curve_maximum(x)?;
    let mut csv = Csv::new(&["R", "branch", "z_lambda"]);
    for r in linspace(0.0, max, cfg.points(POSITION_CURVE_POINTS)) {
        let set = candidates(&Measurement::new(r, 0.0)?, &layout, x, window)?;
        for (b, c) in set.candidates.iter().enumerate() {
            csv.row(&[float(r), b.to_string(), float(c.z_hat)]);
        }
    }
    Ok(csv.finish())
}

fn interval_json(p: &PositionInterval) -> Json {
    Json::obj([
        ("branch", Json::Int(p.branch)),
        ("z_hat", Json::Num(p.z_hat)),
        ("z_lo", Json::Num(p.z_lo)),
        ("z_hi", Json::Num(p.z_hi)),
        ("phi_solution", Json::Num(p.phi_solution)),
    ])
}

fn flags_json(i: usize, p: &PositionInterval) -> impl Iterator<Item = Json> {
    p.flags.names().into_iter().map(move |name| {
        Json::obj([
            ("candidate", Json::Int(i as i64)),
            ("flag", Json::Str(name.into())),
        ])
    })
}

fn measurement_for(cfg: &ScenarioConfig, layout: &crate::LoopLayout, x: f64) -> Result<Measurement> {
    let m = cfg.measurement()?;
    let rel = m.relative_error.unwrap_or(0.0);
    match (m.ratio, m.z_true) {
        (Some(r), _) => Measurement::new(r, rel),
        (None, Some(z)) => simulate_measurement(z, layout, x, m.noise(), Some(rel)),
        (None, None) => unreachable!("validated by ScenarioConfig::measurement"),
    }
}

/// JSON with every candidate interval, their relative uncertainties and
/// the raised flags.
pub fn cmd_invert(cfg: &ScenarioConfig) -> Result<String> {
    let x = cfg.drive()?.x();
    let layout = cfg.layout()?;
    let window = cfg.window()?;
    if layout.magnification() == 0.0 {
        return Err(Error::ZeroMagnification);
    }
    let meas = measurement_for(cfg, &layout, x)?;
    let set = candidates(&meas, &layout, x, window)?;
    let c = &set.candidates;
    Ok(Json::document([
        ("candidates", Json::Arr(c.iter().map(interval_json).collect())),
        (
            "relative_uncertainty",
            Json::nums(&c.iter().map(|p| p.relative_uncertainty()).collect::<Vec<_>>()),
        ),
        (
            "flags",
            Json::Arr(c.iter().enumerate().flat_map(|(i, p)| flags_json(i, p)).collect()),
        ),
    ])
    .render())
}

/// JSON with one entry per magnification stage and the final interval.
pub fn cmd_protocol(cfg: &ScenarioConfig) -> Result<String> {
    let x = cfg.drive()?.x();
    let window = cfg.window()?;
    let stages = cfg.stages(x, window)?;
    let m = cfg.measurement()?;
    let z_true = m.z_true.ok_or_else(|| Error::Invalid {
        what: "config",
        reason: "measurement.z_true: the protocol simulates an atom and needs z_true".into(),
    })?;
    let mut source = SimulatedSource {
        z_true,
        band: m.relative_error.unwrap_or(0.0),
        noise: m.noise(),
    };
    let res = coarse_to_fine(&mut source, &stages, window)?;
    let stage_json = res
        .stages
        .iter()
        .map(|s| {
            Json::obj([
                ("xi", Json::Num(s.xi)),
                ("phi0", Json::Num(s.phi0)),
                ("interval", interval_json(&s.interval)),
                ("ratio", Json::Num(s.measurement.ratio())),
                ("relative_error", Json::Num(s.measurement.relative_error())),
                ("candidate_count", Json::Int(s.candidate_count as i64)),
                (
                    "flags",
                    Json::Arr(s.interval.flags.names().into_iter().map(|n| Json::Str(n.into())).collect()),
                ),
            ])
        })
        .collect();
    let f = &res.final_interval;
    Ok(Json::document([
        ("stages", Json::Arr(stage_json)),
        (
            "final",
            Json::obj([
                ("z_hat", Json::Num(f.z_hat)),
                ("z_lo", Json::Num(f.z_lo)),
                ("z_hi", Json::Num(f.z_hi)),
                ("relative_uncertainty", Json::Num(f.relative_uncertainty())),
            ]),
        ),
    ])
    .render())
}

/// JSON with the optimal relative phase for `z_est` and the slopes it buys.
pub fn cmd_optimize_phi0(cfg: &ScenarioConfig) -> Result<String> {
    let x = cfg.drive()?.x();
    let layout = cfg.layout()?;
    let z_est = cfg.z_est.ok_or_else(|| Error::Invalid {
        what: "config",
        reason: "z_est: missing (set z_est or --z-est)".into(),
    })?;
    let phi0 = optimize_phase(z_est, &layout, x)?;
    let at = |p: f64| -> Result<f64> { Ok(slope(x, layout.with_relative_phase(p).loop_phase(z_est)?)) };
    Ok(Json::document([
        ("phi0_star", Json::Num(phi0)),
        ("slope_at_operating_point", Json::Num(at(phi0)?)),
        ("slope_at_phi0_zero", Json::Num(at(0.0)?)),
    ])
    .render())
}

/// JSON with the numerical steady-state populations and ratio, compared
/// with the closed form when the drive is uniform, the decay rates are
/// equal and the fields are resonant.
pub fn cmd_steady_state(cfg: &ScenarioConfig) -> Result<String> {
    let drives = cfg.drive()?;
    let decay = cfg.decay()?;
    let layout = cfg.layout.as_ref().map(|_| cfg.layout()).transpose()?;
    let detunings = match &layout {
        Some(l) => l.diamond_detunings()?,
        None => [0.0; 3],
    };
    let phi = match (cfg.phi, cfg.measurement.as_ref().and_then(|m| m.z_true)) {
        (Some(p), _) => p,
        (None, Some(z)) => layout
            .as_ref()
            .ok_or_else(|| Error::Invalid {
                what: "config",
                reason: "layout: needed to turn measurement.z_true into a loop phase".into(),
            })?
            .loop_phase(z)?,
        (None, None) => {
            return Err(Error::Invalid {
                what: "config",
                reason: "phi: missing (set phi, --phi or measurement.z_true)".into(),
            })
        }
    };
    let rho = diamond_steady_state(phi, &drives, detunings, &decay)?;
    let numeric = match ratio_numeric(&rho, &decay) {
        Ok(r) => Some(r),
        Err(Error::VanishingDenominator { .. }) => None,
        Err(e) => return Err(e),
    };
    let analytic = (drives.is_uniform() && decay.is_equal_rates() && detunings == [0.0; 3])
        .then(|| ratio_analytic(drives.x() / decay.rates()[0], phi));
    let diff = numeric.zip(analytic).map(|(a, b)| (a - b).abs());
    let opt = |v: Option<f64>| v.map_or(Json::Null, Json::Num);
    Ok(Json::document([
        ("phi", Json::Num(phi)),
        ("populations", Json::nums(&rho.populations())),
        ("ratio_numeric", opt(numeric)),
        ("ratio_analytic", opt(analytic)),
        ("abs_difference", opt(diff)),
    ])
    .render())
}
