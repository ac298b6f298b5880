use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid layer system: {0}")]
    InvalidSystem(String),

    #[error("window [{x_lo}, {x_hi}] too narrow: edge value {value:e} violates the {tol:e} adequacy margin")]
    WindowTooNarrow {
        x_lo: f64,
        x_hi: f64,
        value: f64,
        tol: f64,
    },

    #[error(
        "window adequacy lost at t = {time}: layer {layer} has {value} at the {side} edge (offset {offset})"
    )]
    WindowInadequate {
        time: f64,
        layer: usize,
        side: Side,
        value: f64,
        offset: f64,
    },

    #[error("singular tridiagonal system: zero pivot at row {row} (layer {layer})")]
    SingularSystem { layer: usize, row: usize },

    #[error("front not bracketed in window: mean profile never crosses 0.5")]
    FrontNotBracketed,

    #[error("mismatched windows: {0}")]
    WindowMismatch(String),

    #[error("time range [{lo}, {hi}] not covered by trace [{start}, {end}]")]
    TraceRange { lo: f64, hi: f64, start: f64, end: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config {path}:{line}: {msg}")]
    Config { path: String, line: usize, msg: String },

    #[error("run failed for A = {a}, kappa = {kappa}: {source}")]
    RunFailed {
        a: f64,
        kappa: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}
