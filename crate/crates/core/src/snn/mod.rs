//! Fixed-timestep kernel for current-based exponential LIF neurons, TDE
//! synapse units, Poisson and scheduled spike sources, and delayed weighted
//! connections.
//!
//! The timestep is pinned to 0.1 ms, the smallest synaptic delay in the
//! avoidance network, so every delay is an integer tick count. Membrane and
//! synaptic dynamics advance with the exact exponential propagator of the
//! linear subsystem; there is no integration-scheme error to tune.

mod clock;
mod error;
mod lif;
mod network;
mod record;
mod tde;

pub use clock::{ms_to_ticks, SimClock, Tick, DT_MS};
pub use error::SnnError;
pub use lif::{lif_step, LifKernel, LifParams, LifState};
pub use network::{
    Connection, Network, NetworkSpec, NeuronModel, PoissonSource, PopulationSpec, SynKind,
    WiringEntry, DEFAULT_PENDING_CAP,
};
pub use record::{SpikeEvent, SpikeRecord};
pub use tde::{tde_step, TdeKernel, TdeParams, TdeState};
