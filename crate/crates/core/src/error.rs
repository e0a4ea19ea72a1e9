use thiserror::Error;

use crate::fock::ModeLabel;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: every mode needs at least two Fock levels")]
    InvalidDimension(usize),

    #[error("layout conflict: mode {0} appears more than once")]
    LayoutConflict(ModeLabel),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("degenerate herald: outcome probability {0:e} is below the detection floor")]
    DegenerateHerald(f64),

    #[error("truncation risk: {0}")]
    TruncationRisk(String),

    #[error("leakage guard: mode {mode} holds population {population:e} in its top Fock level")]
    Leakage { mode: ModeLabel, population: f64 },

    #[error("operator is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("configuration inconsistency: {0}")]
    ConfigInconsistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that come from the numerics rather than from the user's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateHerald(_) | Error::Leakage { .. } | Error::TruncationRisk(_) | Error::NotPsd(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
