use thiserror::Error;

/// Errors raised across the oracle, the composition engine and the reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("two-mode photon total {total} exceeds the cap of {cap}")]
    CapacityExceeded { total: u32, cap: u32 },

    /// Detecting `n` photons would remove more photons than the signal beam
    /// has gained so far, truncating the lowest coefficients.
    #[error("lossy branch: detecting {n} with {k} injected at offset {input_offset} truncates the signal state")]
    LossyBranch { input_offset: u32, k: u32, n: u32 },

    #[error("cannot detect {n} photons when at most {available} are present")]
    InvalidDetection { n: u32, available: u32 },

    #[error("transmitivity {eta} outside (0, 1]")]
    EtaDomain { eta: f64 },

    #[error("transmission amplitude {t} outside [-1, 1]")]
    AmplitudeDomain { t: f64 },

    #[error("element (k={k}) is outside the domain of this closed form")]
    ClosedFormDomain { k: u32 },

    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(
        "net photon offset {net_offset} is not zero; the map is not a gate on the input subspace"
    )]
    NotAGate { net_offset: i64 },

    #[error("composed map has F0 = 0")]
    Degenerate,

    #[error(
        "NS residual norm {norm:e} exceeds {tol:e}; success probability would depend on the input"
    )]
    NotNsSolution { norm: f64, tol: f64 },

    #[error("state is not normalized (norm² = {norm_sq})")]
    Unnormalized { norm_sq: f64 },

    #[error("correction pair {pair} does not remove exactly one photon (net offset {net_offset})")]
    NotACorrection { pair: String, net_offset: i64 },

    #[error("branches disagree on the first splitter: {main_eta} vs {correction_eta}")]
    IncompatibleBranches { main_eta: f64, correction_eta: f64 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
