use crate::lattice::LatticePoint;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("coordinate overflow")]
    Overflow,
    #[error("coverage incomplete: {0:?} is never visited")]
    IncompleteCoverage(LatticePoint),
    #[error("join beyond the plan horizon: {0}")]
    JoinBeyondHorizon(String),
    #[error("malformed grid: {0}")]
    Grid(String),
    #[error("unbalanced ledger: losses {losses} != gains {gains}")]
    Unbalanced { losses: u64, gains: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
