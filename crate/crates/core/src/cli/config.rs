//! JSON scenario files and command-line overrides.

use serde::Deserialize;

use crate::dynamics::{DecayModel, DriveParams};
use crate::error::{Error, Result};
use crate::geometry::{FieldGeometry, LoopLayout};
use crate::localization::{coarse_relative_phase, Noise, Stage, Window};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub layout: Option<LayoutConfig>,
    #[serde(default)]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub decay: Option<DecayConfig>,
    #[serde(default)]
    pub measurement: Option<MeasurementConfig>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Loop phase for `steady-state`, in radians.
    #[serde(default)]
    pub phi: Option<f64>,
    /// Position estimate for `optimize-phi0`, in `λ`.
    #[serde(default)]
    pub z_est: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub stages: Option<Vec<StageConfig>>,
}

/// Either an explicit list of `2N` transitions or the magnification of a
/// resonant diamond.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    #[serde(default)]
    pub transitions: Option<Vec<FieldGeometry>>,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default = "one")]
    pub wavelength: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default)]
    pub x: Option<f64>,
    /// `(g₂₁, g₃₂, g₃₄, g₄₁)` in units of `γ`.
    #[serde(default)]
    pub g: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    /// `(γ₃₂, γ₃₄, γ₂₁, γ₄₁)`.
    pub rates: [f64; 4],
}

/// A measured ratio, or a simulated atom at `z_true`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub z_true: Option<f64>,
    #[serde(default)]
    pub relative_error: Option<f64>,
    #[serde(default)]
    pub noise_sigma: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PhaseSetting {
    Radians(f64),
    /// `"coarse"`: map the window onto the falling half of `R(Φ)`.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub transitions: Option<Vec<FieldGeometry>>,
    #[serde(default)]
    pub phi0: Option<PhaseSetting>,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub relative_error: Option<f64>,
}

/// Flag values that replace the corresponding config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub x: Option<f64>,
    pub xi: Option<f64>,
    pub phi0: Option<f64>,
    pub ratio: Option<f64>,
    pub rel_err: Option<f64>,
    pub z_true: Option<f64>,
    pub points: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub seed: Option<u64>,
    pub phi: Option<f64>,
    pub z_est: Option<f64>,
}

fn config_error(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Invalid {
        what: "config",
        reason: format!("{field}: {reason}"),
    }
}

/// Parses `--window LO:HI`.
pub fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad LO in {s:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad HI in {s:?}: {e}"))?;
    Ok((lo, hi))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Invalid {
            what: "config",
            reason: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(config_error("schema_version", format!("unsupported version {v}")));
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(x) = o.x {
            self.drive.get_or_insert_with(Default::default).x = Some(x);
        }
        if o.xi.is_some() || o.phi0.is_some() {
            let layout = self.layout.get_or_insert_with(|| LayoutConfig {
                wavelength: 1.0,
                ..Default::default()
            });
            if let Some(xi) = o.xi {
                layout.xi = Some(xi);
                layout.transitions = None;
            }
            if let Some(phi0) = o.phi0 {
                layout.phi0 = phi0;
            }
        }
        if o.ratio.is_some() || o.rel_err.is_some() || o.z_true.is_some() || o.seed.is_some() {
            let m = self.measurement.get_or_insert_with(Default::default);
            if let Some(r) = o.ratio {
                m.ratio = Some(r);
                m.z_true = None;
            }
            if let Some(z) = o.z_true {
                m.z_true = Some(z);
                m.ratio = None;
            }
            if let Some(d) = o.rel_err {
                m.relative_error = Some(d);
            }
            if let Some(s) = o.seed {
                m.seed = Some(s);
            }
        }
        if let Some(p) = o.points {
            self.points = Some(p);
        }
        if let Some((lo, hi)) = o.window {
            self.window = Some([lo, hi]);
        }
        if let Some(p) = o.phi {
            self.phi = Some(p);
        }
        if let Some(z) = o.z_est {
            self.z_est = Some(z);
        }
    }

    pub fn drive(&self) -> Result<DriveParams> {
        let d = self
            .drive
            .as_ref()
            .ok_or_else(|| config_error("drive", "missing (set drive.x or --x)"))?;
        let x = d.x.ok_or_else(|| config_error("drive.x", "missing"))?;
        match d.g {
            None => DriveParams::uniform(x),
            Some(g) => DriveParams::per_transition(x, g),
        }
        .map_err(|e| config_error("drive", e))
    }

    pub fn decay(&self) -> Result<DecayModel> {
        match &self.decay {
            None => Ok(DecayModel::unit()),
            Some(d) => DecayModel::new(d.rates).map_err(|e| config_error("decay.rates", e)),
        }
    }

    pub fn layout(&self) -> Result<LoopLayout> {
        let l = self
            .layout
            .as_ref()
            .ok_or_else(|| config_error("layout", "missing (set layout or --xi)"))?;
        build_layout("layout", l.transitions.as_ref(), l.xi, l.phi0, l.wavelength)
    }

    pub fn window(&self) -> Result<Window> {
        let [lo, hi] = self.window.unwrap_or([0.0, 1.0]);
        Window::new(lo, hi).map_err(|e| config_error("window", e))
    }

    pub fn points(&self, default: usize) -> usize {
        self.points.unwrap_or(default)
    }

    pub fn measurement(&self) -> Result<&MeasurementConfig> {
        let m = self
            .measurement
            .as_ref()
            .ok_or_else(|| config_error("measurement", "missing (set --R or --z-true)"))?;
        match (m.ratio, m.z_true) {
            (Some(_), Some(_)) => Err(config_error("measurement", "give either ratio or z_true, not both")),
            (None, None) => Err(config_error("measurement", "needs ratio or z_true")),
            _ => Ok(m),
        }
    }

    /// Stages for the protocol command, validated for increasing magnification.
    pub fn stages(&self, default_x: f64, window: Window) -> Result<Vec<Stage>> {
        let list = self
            .stages
            .as_ref()
            .ok_or_else(|| config_error("stages", "missing"))?;
        if list.is_empty() {
            return Err(config_error("stages", "empty"));
        }
        let mut out = Vec::with_capacity(list.len());
        for (i, s) in list.iter().enumerate() {
            let field = format!("stages[{i}]");
            let placeholder = build_layout("stages", s.transitions.as_ref(), s.xi, 0.0, 1.0)
                .map_err(|e| config_error(&field, e))?;
            let phi0 = match &s.phi0 {
                None => 0.0,
                Some(PhaseSetting::Radians(p)) => *p,
                Some(PhaseSetting::Named(name)) if name == "coarse" => {
                    coarse_relative_phase(window, placeholder.magnification())
                }
                Some(PhaseSetting::Named(other)) => {
                    return Err(config_error(&format!("{field}.phi0"), format!("unknown setting {other:?}")))
                }
            };
            let layout = placeholder.with_relative_phase(phi0);
            let x = s.x.unwrap_or(default_x);
            DriveParams::uniform(x).map_err(|e| config_error(&format!("{field}.x"), e))?;
            let mut stage = Stage::new(layout, x);
            if let Some(b) = s.relative_error {
                if !(0.0..0.5).contains(&b) {
                    return Err(config_error(&format!("{field}.relative_error"), "must be in [0, 0.5)"));
                }
                stage = stage.with_band(b);
            }
            out.push(stage);
        }
        let xi0 = out[0].xi();
        if !(xi0 > 0.0 && xi0 <= 1.0) {
            return Err(config_error("stages[0].xi", format!("coarse stage needs 0 < xi <= 1, got {xi0}")));
        }
        for i in 1..out.len() {
            if !(out[i].xi() > out[i - 1].xi()) {
                return Err(config_error(
                    &format!("stages[{i}].xi"),
                    format!("must exceed the previous stage's {}", out[i - 1].xi()),
                ));
            }
        }
        Ok(out)
    }
}

impl MeasurementConfig {
    pub fn noise(&self) -> Option<Noise> {
        match (self.noise_sigma, self.seed) {
            (Some(sigma), seed) if sigma > 0.0 => Some(Noise {
                sigma,
                seed: seed.unwrap_or(0),
            }),
            _ => None,
        }
    }
}

fn build_layout(
    field: &str,
    transitions: Option<&Vec<FieldGeometry>>,
    xi: Option<f64>,
    phi0: f64,
    wavelength: f64,
) -> Result<LoopLayout> {
    match (transitions, xi) {
        (Some(_), Some(_)) => Err(config_error(field, "give either transitions or xi, not both")),
        (None, None) => Err(config_error(field, "needs transitions or xi")),
        (Some(t), None) => LoopLayout::new(t.clone(), phi0, wavelength).map_err(|e| config_error(field, e)),
        (None, Some(xi)) => {
            let l = LoopLayout::diamond_with_magnification(xi, phi0).map_err(|e| config_error(field, e))?;
            LoopLayout::new(l.transitions().to_vec(), phi0, wavelength).map_err(|e| config_error(field, e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let e = ScenarioConfig::from_json(r#"{"drive": {"x": 5, "y": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        assert!(ScenarioConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn schema_version_checked() {
        assert!(ScenarioConfig::from_json(r#"{"schema_version": 2}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"schema_version": 1}"#).is_ok());
    }

    #[test]
    fn explicit_transitions() {
        let cfg = ScenarioConfig::from_json(
            r#"{"layout": {"transitions": [
                {"wavenumber": 1, "sign": 1}, {"wavenumber": 1, "sign": 1},
                {"wavenumber": 0.9, "sign": 1}, {"wavenumber": 0.85, "sign": 1}], "phi0": 0.5}}"#,
        )
        .unwrap();
        let l = cfg.layout().unwrap();
        assert!((l.magnification() - 0.25).abs() < 1e-15);
        assert_eq!(l.relative_phase(), 0.5);
        let bad = ScenarioConfig::from_json(
            r#"{"layout": {"transitions": [{"wavenumber": 1, "sign": 0}]}}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn overrides_replace_config() {
        let mut cfg = ScenarioConfig::from_json(r#"{"drive": {"x": 1}, "measurement": {"z_true": 0.2}}"#).unwrap();
        cfg.apply(&Overrides {
            x: Some(5.0),
            xi: Some(4.0),
            ratio: Some(0.5),
            window: Some((0.0, 2.0)),
            ..Default::default()
        });
        assert_eq!(cfg.drive().unwrap().x(), 5.0);
        assert_eq!(cfg.layout().unwrap().magnification(), 4.0);
        let m = cfg.measurement().unwrap();
        assert_eq!(m.ratio, Some(0.5));
        assert_eq!(m.z_true, None);
        assert_eq!(cfg.window().unwrap().hi, 2.0);
    }

    #[test]
    fn window_flag_parsing() {
        assert_eq!(parse_window("0:1").unwrap(), (0.0, 1.0));
        assert_eq!(parse_window("-0.5:4").unwrap(), (-0.5, 4.0));
        assert!(parse_window("0,1").is_err());
    }

    #[test]
    fn stages_must_increase() {
        let cfg = ScenarioConfig::from_json(
            r#"{"stages": [{"xi": 0.25, "phi0": "coarse"}, {"xi": 4}, {"xi": 2}]}"#,
        )
        .unwrap();
        let e = cfg.stages(5.0, Window::one_wavelength()).unwrap_err();
        assert!(e.to_string().contains("stages[2].xi"), "{e}");
        let cfg = ScenarioConfig::from_json(r#"{"stages": [{"xi": 2}]}"#).unwrap();
        assert!(cfg.stages(5.0, Window::one_wavelength()).is_err());
    }

    #[test]
    fn coarse_phase_setting() {
        let cfg = ScenarioConfig::from_json(
            r#"{"stages": [{"xi": 0.25, "phi0": "coarse", "relative_error": 0.01}, {"xi": 2, "phi0": 0.3}]}"#,
        )
        .unwrap();
        let s = cfg.stages(5.0, Window::one_wavelength()).unwrap();
        assert!((s[0].layout.relative_phase() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s[0].band, Some(0.01));
        assert_eq!(s[1].layout.relative_phase(), 0.3);
        let cfg = ScenarioConfig::from_json(r#"{"stages": [{"xi": 0.25, "phi0": "best"}]}"#).unwrap();
        assert!(cfg.stages(5.0, Window::one_wavelength()).is_err());
    }
}
