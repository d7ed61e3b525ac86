//! Deterministic, fixed-timestep spiking neural network simulator built around
//! an insect-inspired collision-avoidance loop: a simulated event camera feeds
//! a spatio-temporal correlation layer and two time-difference-encoder (TDE)
//! populations, an inverse soft winner-take-all picks an obstacle-free heading,
//! and motor populations translate the winner into saccadic turns of a planar
//! differential-drive agent.
//!
//! Crate layout mirrors the subsystems:
//!
//! * [`snn`] — the simulation kernel: exact-exponential LIF neurons, TDE units,
//!   Poisson/scheduled sources, delayed connections, deterministic scheduler.
//! * [`vision`] — 2.5D world renderer, frame-difference event camera, event
//!   file I/O.
//! * [`net`] — assembly of the full avoidance network, event-to-input mapping,
//!   motor decode.
//! * [`world`] — planar agent kinematics, environment generators, metrics and
//!   the closed-loop episode driver.
//! * [`characterize`] — drifting-grating stimulus synthesis and velocity /
//!   contrast tuning of the motion pathway.
//! * [`validate`] — runtime invariant suite shared by the CLI `validate`
//!   command and the acceptance tests.

pub mod characterize;
pub mod config;
pub mod net;
pub mod snn;
pub mod validate;
pub mod vision;
pub mod world;

pub use snn::{
    Connection, LifParams, LifState, Network, NetworkSpec, PopulationSpec, SimClock, SpikeRecord,
    SynKind, Tick, DT_MS,
};
