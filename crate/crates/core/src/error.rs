use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error(
        "tail closure failed for component {comp}, mode (l={l}, m={m}): fitted decay {kappa_hat:.6} \
         does not exceed lambda = {lambda:.6}"
    )]
    TailNotIntegrable {
        comp: usize,
        l: usize,
        m: i64,
        kappa_hat: f64,
        lambda: f64,
    },

    #[error("no contraction after {iterations} iterations (last ratio {last_ratio:.4}); raise t0")]
    NonContraction { iterations: usize, last_ratio: f64 },

    #[error("solution left the chart: |u - origin| = {radius:.4} > {limit} at t = {t:.4}")]
    ChartExit { radius: f64, limit: f64, t: f64 },

    #[error("first iterate does not decay (fitted rate {rate:.4}): critical case without gain")]
    NoFirstIterateGain { rate: f64 },

    #[error("radial integration blew up at r = {r:.6}")]
    BlowUp { r: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("trajectory file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
