use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A mode whose non-resonance margin `|1 + M Ū₀(T)|` fell below tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonantMode {
    pub k: usize,
    pub margin: f64,
    /// The forbidden weight `-1/Ū₀(T)`; infinite when `Ū₀(T) = 0`.
    pub forbidden_m: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{func}: argument out of domain ({msg})")]
    Domain { func: &'static str, msg: String },

    #[error("could not bracket zero #{index} of J_{nu}")]
    ZeroBracket { nu: f64, index: usize },

    #[error(
        "Mittag-Leffler series did not converge: {layers} layers used, \
         last layer magnitude {last_layer:e} ({reason})"
    )]
    MlNonConvergence { layers: usize, last_layer: f64, reason: &'static str },

    #[error("non-resonance condition violated on modes {:?}", .modes.iter().map(|m| m.k).collect::<Vec<_>>())]
    Resonance { modes: Vec<ResonantMode> },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { func, msg: msg.into() }
    }
}
