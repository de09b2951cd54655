use thiserror::Error;

use crate::grid::Coord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("coordinate {coord} outside {width}x{height} grid")]
    OutOfBounds { coord: Coord, width: u16, height: u16 },
    #[error("start or goal {0} lies on a wall")]
    EndpointOnWall(Coord),
    #[error("start and goal coincide at {0}")]
    StartIsGoal(Coord),
    #[error("no pair of connected free cells")]
    NoConnectedPair,
    #[error("invalid sokoban layout: {0}")]
    Sokoban(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("rejection budget of {0} attempts exhausted")]
    BudgetExhausted(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("goal unreachable after {expanded} expansions")]
    Unsolvable { expanded: usize },
    #[error("node budget of {0} expansions exceeded")]
    BudgetExceeded(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("coordinate {0} has no vocabulary token")]
    Coordinate(u16),
    #[error("cost {0} has no vocabulary token")]
    Cost(u32),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("record {index}: {source}")]
    Generation { index: u64, source: GenerationError },
    #[error("record {index}: {source}")]
    Search { index: u64, source: SearchError },
    #[error("record {index}: {source}")]
    Encode { index: u64, source: EncodeError },
    #[error("record {id}: {message}")]
    Record { id: u64, message: String },
    #[error("dataset must contain at least {needed} records, found {found}")]
    TooSmall { needed: usize, found: usize },
    #[error("grammar version mismatch: dataset has {found}, this build speaks {expected}")]
    GrammarVersion { expected: String, found: String },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
