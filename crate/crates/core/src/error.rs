use thiserror::Error;

/// Errors produced by the kernels, the simulator and the cost model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported modulus {q}: {reason}")]
    UnsupportedModulus { q: u64, reason: &'static str },

    #[error("{value} has no inverse modulo {q}")]
    NoInverse { value: u64, q: u64 },

    #[error("modulus {q} is not NTT-friendly for order {order}")]
    NotNttFriendly { q: u64, order: usize },

    #[error("invalid root of unity {root}: expected order {order} modulo {q}")]
    InvalidRoot { root: u64, order: usize, q: u64 },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid moduli: {0}")]
    InvalidModuli(String),

    #[error("no closed form for {0} dataflow; use the simulator")]
    NoClosedForm(&'static str),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("internal check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
