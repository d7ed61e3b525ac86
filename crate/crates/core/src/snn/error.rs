use thiserror::Error;

use super::Tick;

/// Errors from network construction and simulation.
#[derive(Debug, Error)]
pub enum SnnError {
    #[error("invalid neuron parameters: {0}")]
    BadParams(String),

    #[error("connection {index} references missing {side} endpoint ({pop}, {neuron})")]
    DanglingEndpoint {
        index: usize,
        side: &'static str,
        pop: String,
        neuron: u32,
    },

    #[error("connection {index} ({src} -> {dst}): {reason}")]
    IllegalConnection {
        index: usize,
        src: String,
        dst: String,
        reason: String,
    },

    #[error("scheduled source '{pop}' spike list not sorted by tick")]
    UnsortedSchedule { pop: String },

    #[error("non-finite state in population '{pop}' neuron {index} at tick {tick}")]
    NonFinite { pop: String, index: u32, tick: Tick },

    #[error("pending-delivery queue exceeded {cap} entries at tick {tick}")]
    QueueOverflow { cap: usize, tick: Tick },

    #[error("injection target ({pop}, {neuron}) does not exist")]
    BadInjection { pop: String, neuron: u32 },
}
