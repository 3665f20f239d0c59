use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("observable undefined: {0}")]
    UndefinedObservable(String),

    #[error("seed function nearly vanishes (|u| = {magnitude:e}) at x = {x}, t = {t}")]
    Singular { x: f64, t: f64, magnitude: f64 },

    #[error("singularity risk: {0}")]
    SingularityRisk(String),

    #[error("unsupported potential variant: {0}")]
    UnsupportedVariant(String),

    #[error("numerical blow-up (non-finite amplitude) at step {step}")]
    Blowup { step: usize },

    #[error("edge leak at step {step}: outer-window fraction {fraction:e} exceeds {tolerance:e}")]
    EdgeLeak {
        step: usize,
        fraction: f64,
        tolerance: f64,
    },

    #[error("non-Hermitian overflow guard: max|Im V|*dt = {value} >= 1")]
    GainGuard { value: f64 },

    #[error("harmonic truncation at M = {m_max}: resynthesis residual {residual:e} exceeds {tolerance:e}")]
    HarmonicTruncation {
        m_max: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("channel truncation at N = {n_channels}: edge-channel power {edge_power:e}, change on N+2 {change:e}")]
    ChannelTruncation {
        n_channels: usize,
        edge_power: f64,
        change: f64,
    },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("packet has not cleared the well: fraction {fraction:e} of the norm remains within {halfwidth} of x = {center}")]
    PrematureAnalysis {
        fraction: f64,
        center: f64,
        halfwidth: f64,
    },

    #[error("sideband bands not resolved: {0}; use a wider packet (larger w)")]
    BandResolution(String),

    #[error("no analytic oracle available: {0}")]
    NoOracle(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
