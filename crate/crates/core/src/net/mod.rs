//! Assembly of the full collision-avoidance network on top of the kernel:
//! population sizes and connection rows from the parameter tables, camera
//! event to input-spike mapping, and motor decode.

pub mod assemble;
pub mod config;
pub mod events;
pub mod motor;

pub use assemble::{AvoidanceNet, NetError, Pops, RecordPlan};
pub use config::{Mot2Mapping, NetConfig, PopSizes, Weights};
pub use events::{map_events_to_sptc, sptc_target};
pub use motor::{
    decode_motor, gap_min_deg, intersaccade_velocity_au_s, intersaccade_velocity_m_s,
    MotorCommand, MotorMode, MotorParams, Winner, ROBOT_SIZE_M,
};
