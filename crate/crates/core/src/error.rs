use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("offset {offset} out of range for level {level} (must be < 2^{level})")]
    OffsetOutOfRange { level: u32, offset: u64 },

    #[error("level {0} exceeds the maximum supported level 63")]
    LevelOutOfRange(u32),

    #[error("rectangle id {id} out of range (there are {count} rectangles)")]
    IdOutOfRange { id: u64, count: u64 },

    #[error("rectangle has volume 2^-{got}, expected 2^-{expected}")]
    WrongVolume { got: u32, expected: u32 },

    #[error("cell index {index} out of range (grid side is {side})")]
    IndexOutOfRange { index: u64, side: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("volume exponent mismatch: expected n={expected}, got n={got}")]
    ExponentMismatch { expected: u32, got: u32 },

    #[error("grid too large: {bits} grid bits exceed the {limit}-bit budget")]
    GridTooLarge { bits: u32, limit: u32 },

    #[error("region level {level} is finer than the cell level {cell_level}")]
    RegionTooFine { level: u32, cell_level: u32 },

    #[error(
        "region too small: level sum {level_sum} exceeds n+1 = {limit}; \
         the binomial law needs |Q| >= 2^-(n+1) and the bound is tight"
    )]
    RegionTooSmall { level_sum: u32, limit: u32 },

    #[error("layer {layer} is outside the range allowed for this side ({lo}..={hi})")]
    LayerOutOfRange { layer: u32, lo: i64, hi: i64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("exhaustive search over 2^{rects} assignments exceeds the cap of 2^{cap}")]
    SearchSpaceTooLarge { rects: u64, cap: u32 },

    #[error("p must be a positive even integer, got {0}")]
    InvalidExponent(u32),

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
