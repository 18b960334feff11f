use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("non-finite value while evaluating at {x}")]
    NonFinite { x: f64 },
    #[error("ladder piece {piece} exceeds the cap of {cap}")]
    PieceDepthExceeded { piece: u64, cap: u64 },
    #[error("one-sided derivatives disagree at {x}: left {left}, right {right}")]
    NonDifferentiablePoint { x: f64, left: f64, right: f64 },
    #[error("could not bracket a preimage of {y}")]
    NoBracket { y: f64 },
    #[error("crossing undecidable near {point}: margin {margin:e} inside the inconclusive band")]
    Inconclusive { point: f64, margin: f64 },
    #[error("derived-set rank exceeds the cap of {cap}")]
    RankCapExceeded { cap: usize },
    #[error("malformed set descriptor: {0}")]
    MalformedDescriptor(String),
    #[error("stage map f{index} needs depth >= {index}, got {depth}")]
    BadStage { index: u32, depth: u32 },
    #[error("{0}")]
    Precondition(String),
    #[error("no seed element: {0}")]
    NoSeedElement(String),
    #[error("series violation: {0}")]
    SeriesViolation(String),
    #[error("lexicographic order violated between {first:?} and {second:?}")]
    OrderViolation { first: Vec<i64>, second: Vec<i64> },
    #[error("images {first} and {second} overlap")]
    DisjointnessFailure { first: usize, second: usize },
    #[error("map has a fixed point near {x}")]
    HasFixedPoints { x: f64 },
    #[error("iterate {iterate} left the window at {x}")]
    WindowEscape { iterate: usize, x: f64 },
    #[error("action is not free: {word} has a fixed point")]
    NotFree { word: String },
    #[error("every generator has translation number below {floor:e}")]
    DegenerateTau { floor: f64 },
    #[error("generator {generator} does not permute the gaps: ({lo}, {hi}) is not sent to a gap")]
    GapsNotInvariant { generator: String, lo: f64, hi: f64 },
    #[error("orbit accumulates: points {a} and {b} closer than the separation threshold")]
    OrbitAccumulates { a: f64, b: f64 },
}
