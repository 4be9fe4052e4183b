use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("document has no characters")]
    NoCharacters,
    #[error("degenerate box {w}x{h}")]
    DegenerateBox { w: u32, h: u32 },
    #[error("box {0} lies outside the image")]
    OutOfBounds(crate::Rect),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero-norm vector")]
    ZeroVector,
    #[error("no feasible text scale for a {w}x{h} region")]
    NoFeasibleScale { w: u32, h: u32 },
    #[error("unknown font '{0}'")]
    UnknownFont(String),
    #[error("empty text")]
    EmptyText,
    #[error("no score stored for crop {0}")]
    MissingScore(u64),
    #[error("no embedding available for crop {0}")]
    MissingEmbedding(u64),
    #[error("embedding for crop {0} holds a non-finite value")]
    NonFinite(u64),
    #[error("duplicate crop id {0}")]
    DuplicateCrop(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("empty image")]
    EmptyImage,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
