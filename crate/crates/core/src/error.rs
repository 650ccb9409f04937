use thiserror::Error;

/// Everything that can go wrong between a layout description and a
/// localization result.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A domain value violated its invariants at construction time.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The multiphoton detuning is nonzero, so the loop phase drifts in time.
    #[error("multiphoton detuning {detuning} is nonzero; the loop phase is time dependent")]
    NonStaticPhase { detuning: f64 },

    /// The generator has more than one stationary state.
    #[error("steady state is not unique (singular values {smallest:e} and {second:e})")]
    DegenerateSteadyState { smallest: f64, second: f64 },

    /// The linear solve did not satisfy the residual tolerance.
    #[error("steady-state residual {residual:e} exceeds tolerance")]
    NoConvergence { residual: f64 },

    /// The denominator population of the fluorescence ratio vanishes.
    #[error("population of |2> is {population:e}; the ratio is undefined")]
    VanishingDenominator { population: f64 },

    /// The measured ratio lies above every value the curve can reach.
    #[error("ratio {ratio} exceeds the curve maximum {max}")]
    NoSolution { ratio: f64, max: f64 },

    /// A phase-matched layout carries no position information.
    #[error("magnification is zero; the loop phase does not depend on position")]
    ZeroMagnification,

    /// More than one candidate fell inside the prior interval. `stage` is
    /// set when the failure happened inside a multi-stage protocol.
    #[error("{count} candidates lie inside the prior interval [{lo}, {hi}]{}", stage_suffix(*.stage))]
    AmbiguousBranch {
        count: usize,
        lo: f64,
        hi: f64,
        stage: Option<usize>,
    },
}

fn stage_suffix(stage: Option<usize>) -> String {
    stage.map(|s| format!(" at stage {s}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
