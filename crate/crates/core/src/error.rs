use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scenario generation failed: could not place agent {agent} after {attempts} attempts (overcrowded configuration)")]
    ScenarioGeneration { agent: usize, attempts: usize },
    #[error(
        "policy contract violated by agent {agent}: velocity ({x}, {y}) is non-finite or exceeds speed limit {limit}"
    )]
    PolicyContract { agent: usize, x: f64, y: f64, limit: f64 },
    #[error("velocity ({x}, {y}) is not on the action grid")]
    UnknownAction { x: f64, y: f64 },
    #[error("shape mismatch: expected input width {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("non-finite gradient entry in layer {layer}")]
    NonFiniteGradient { layer: &'static str },
    #[error("numeric failure during training episode {episode}: {source}")]
    Numeric {
        episode: usize,
        source: alloc::boxed::Box<Error>,
    },
    #[error("demonstrator produced no successful episode out of {episodes}")]
    DemonstratorQuality { episodes: usize },
    #[error("demonstration memory is empty")]
    EmptyDemonstrations,
}
