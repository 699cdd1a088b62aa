use thiserror::Error;

use crate::game::Defect;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid game: {}", join_defects(.0))]
    InvalidGame(Vec<Defect>),

    #[error("game too large: {profiles} pure profiles exceeds the limit of {limit}")]
    GameTooLarge { profiles: usize, limit: usize },

    #[error("player index {player} out of range for a {players}-player game")]
    PlayerOutOfRange { player: usize, players: usize },

    #[error("strategy index {index} out of range for player {player} with {count} strategies")]
    StrategyOutOfRange {
        player: usize,
        index: usize,
        count: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("off-simplex: {0}")]
    OffSimplex(String),

    #[error("empty vector")]
    EmptyVector,

    #[error("not jointly affine")]
    NotJointlyAffine,

    #[error("not zero-sum")]
    NotZeroSum,

    #[error("boundary point: {0}")]
    BoundaryPoint(String),

    #[error("irregular start: Jacobian rank {rank} differs from generic rank {generic}")]
    IrregularStart { rank: usize, generic: usize },

    #[error("invalid direction {index}: nullspace has dimension {dimension}")]
    InvalidDirection { index: usize, dimension: usize },

    #[error("not a 2-player game ({players} players)")]
    NotTwoPlayer { players: usize },

    #[error("supports too large: strategy counts {counts:?} exceed {limit} per player")]
    SupportsTooLarge { counts: Vec<usize>, limit: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown builtin game '{0}'")]
    UnknownBuiltin(String),

    #[error("invalid generator arguments: {0}")]
    Generator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_defects(defects: &[Defect]) -> String {
    defects
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
