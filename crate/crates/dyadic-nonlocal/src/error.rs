use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid points have different resolutions ({0} vs {1})")]
    ResolutionMismatch(u32, u32),

    #[error("integral diverges for exponent alpha = {0}; requires alpha > -1")]
    DivergentIntegral(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires a zero coarse part (P0 f = 0); max unit mean = {0:.3e}")]
    NonzeroCoarse(f64),

    #[error("ratio undefined for zero input")]
    ZeroInput,

    #[error("cell at resolution {resolution} straddles the halves of a level-{level} interval")]
    StraddlingCell { resolution: u32, level: i32 },

    #[error("empty t-grid")]
    EmptyTGrid,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
