use thiserror::Error;

use crate::word::Word;

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter {letter} is not a generator of the rank-{rank} free group")]
    InvalidGenerator { letter: i32, rank: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{word} is not in the subgroup")]
    NotAMember { word: Word },
    #[error("{word} is elliptic")]
    Elliptic { word: Word },
    #[error("the subgroup acts trivially on the tree")]
    TrivialAction,
    #[error("orbit cap of {cap} cells exceeded")]
    BudgetExceeded { cap: usize },
    #[error("row {row} of the homomorphism matrix is zero")]
    ZeroRow { row: usize },
    #[error("the image lattice has rank {rank} < 2")]
    RankDeficient { rank: usize },
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("bad reference: {0}")]
    BadReference(String),
}

pub type Result<T> = std::result::Result<T, Error>;
