use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobotError {
    #[error("orientation singularity in constraint map (arm {arm})")]
    OrientationSingularity { arm: usize },
    #[error("kinematic singularity")]
    KinematicSingularity,
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("pose outside workspace: {0}")]
    OutOfWorkspace(String),
    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,
    #[error("invalid robot parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error(transparent)]
    Fuzzy(#[from] t2fuzzy::FuzzyError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training data: {0}")]
    Training(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
