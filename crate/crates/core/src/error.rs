use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid pyramid geometry: {0}")]
    Geometry(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(
        "naive and simplified outputs diverge: max |delta| = {max_abs_diff:e} at scale {scale}, \
         channel {channel}, y {y}, x {x} (naive {naive}, simplified {simplified})"
    )]
    Equivalence {
        max_abs_diff: f64,
        scale: usize,
        channel: usize,
        y: usize,
        x: usize,
        naive: f64,
        simplified: f64,
    },
}

macro_rules! shape_err {
    ($($arg:tt)*) => {
        $crate::Error::Shape(format!($($arg)*))
    };
}
pub(crate) use shape_err;
