use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),

    #[error("times must be strictly increasing (index {index})")]
    NonMonotoneTimes { index: usize },

    #[error("trajectory has {states} states for {times} time stamps")]
    LengthMismatch { times: usize, states: usize },

    #[error("wavepacket too close to the grid boundary (tail mass {mass:.3e})")]
    PacketNearBoundary { mass: f64 },

    #[error("propagated mass near the grid boundary exceeds threshold ({mass:.3e} > {threshold:.3e}) at t = {t}")]
    BoundaryContamination { mass: f64, threshold: f64, t: f64 },

    #[error("caustic: propagator block L is singular at dt = {dt}")]
    Caustic { dt: f64 },

    #[error("wavefunction is numerically zero: every grid point fell below the density floor")]
    AllMasked,

    #[error("insufficient unmasked support: {count} points on axis {axis}, need at least {needed}")]
    InsufficientSupport {
        axis: usize,
        count: usize,
        needed: usize,
    },

    #[error("trajectory entered a masked (node) region at t = {t}; last valid time {last_valid}")]
    NodeCollision { t: f64, last_valid: f64 },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zeno interval {interval} failed: {source}")]
    ZenoInterval {
        interval: usize,
        #[source]
        source: Box<SimError>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
