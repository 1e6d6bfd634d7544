use thiserror::Error;

/// Errors returned by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid order {order} for {family}: {constraint}")]
    InvalidOrder {
        family: String,
        order: usize,
        constraint: &'static str,
    },
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),
    #[error("quadrature order {0} is below the minimum of 8 nodes per panel")]
    QuadratureOrder(usize),
    #[error("mmse derivative requested at gamma = 0; only gamma > 0 is supported")]
    DerivativeAtZero,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mutual information did not saturate by zeta = {zeta} nats (deficit {deficit:.3e} nats)")]
    NoSaturation { zeta: f64, deficit: f64 },
    #[error("input has no convex region (delta_x = 0); the minimum-difference channel is undefined")]
    NoConvexRegion,
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
