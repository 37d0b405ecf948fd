use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which metric axiom an explicit distance matrix breaks.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NotSquare { row: usize, len: usize, expected: usize },
    TooSmall(usize),
    NotFinite { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    NonPositive { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected} (not square)")
            }
            Self::TooSmall(n) => write!(f, "need at least 2 points, got {n}"),
            Self::NotFinite { i, j } => write!(f, "entry ({i},{j}) is not finite"),
            Self::NonzeroDiagonal { i } => write!(f, "diagonal entry ({i},{i}) is not zero"),
            Self::Asymmetric { i, j } => write!(f, "symmetry fails: d({i},{j}) != d({j},{i})"),
            Self::NonPositive { i, j } => {
                write!(f, "distinct points {i} and {j} are at non-positive distance")
            }
            Self::Triangle { i, j, k } => {
                write!(f, "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid resolution {0} out of range (need at least 2)")]
    Resolution(usize),
    #[error("alphabet size {0} out of range (need 2..=256)")]
    Alphabet(usize),
    #[error("symbolic depth {0} out of range (need 1..=32)")]
    Depth(usize),
    #[error("point cloud would have {0} points, above the supported maximum")]
    CloudTooLarge(u64),
    #[error("invalid distance matrix: {0}")]
    DistanceMatrix(MetricViolation),
    #[error("points do not belong to the same kind of space")]
    SpaceMismatch,
    #[error("cloud points must be pairwise distinct (points {0} and {1} coincide)")]
    DuplicatePoint(usize, usize),
    #[error("map `{map}` cannot act on {space} points")]
    MapDomain { map: &'static str, space: &'static str },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("potential: {0}")]
    Potential(String),
    #[error("generation index must be at least 1")]
    GenerationIndex,
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("word: {0}")]
    Word(String),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("`{0}` must be at least 1")]
    ZeroParameter(&'static str),
    #[error("exact {method} solver handles at most {limit} points, got {points}")]
    TooLargeForExact { method: &'static str, limit: usize, points: usize },
    #[error("index sets differ at generation {generation}: {source_size} maps vs {target_size}")]
    IndexSetMismatch { generation: usize, source_size: usize, target_size: usize },
    #[error("factor map: {0}")]
    Factor(String),
    #[error("semiconjugacy check failed (max deviation {deviation:e}, surjective: {surjective})")]
    Semiconjugacy { deviation: f64, surjective: bool },
    #[error("potential takes a negative value ({0}); the power-rule check needs a non-negative potential")]
    NegativePotential(f64),
    #[error("schedule fails the equicontinuity check at eps = {eps}")]
    NotEquicontinuous { eps: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}
