use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Neither evaluation route can reach the requested accuracy at `t`.
    #[error("Z({t}) error bound {bound:e} exceeds target {target:e}")]
    Accuracy { t: f64, bound: f64, target: f64 },

    #[error("root not bracketed on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e})")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("no convergence after {iterations} iterations, bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("quadrature tolerance not met on panel [{lo}, {hi}] (error estimate {err:e})")]
    Tolerance { lo: f64, hi: f64, err: f64 },

    #[error("checkpoint was written with config {found}, current config is {expected}")]
    CheckpointMismatch { expected: String, found: String },

    #[error("checkpoint is locked by another writer ({0}); remove the lock file if stale")]
    CheckpointLocked(String),

    #[error("degenerate set: {0}")]
    Degenerate(String),

    #[error("singular area system: |eta1 - eta2| = {gap:e}")]
    Singular { gap: f64 },

    #[error("evaluation budget exceeded: {0}")]
    Budget(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
