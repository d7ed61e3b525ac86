//! Planar world: differential-drive agent kinematics, environment
//! generators, collision and clearance metrics, and the closed-loop episode
//! state machine.

mod agent;
mod env;
mod episode;
mod geom;
mod metrics;

pub use agent::{detect_collision, step_agent, AgentMode, AgentState, ROBOT_HALF_M};
pub use env::{
    generate_environment, obstacle_density, Block, EnvKind, Environment, ExitRule, GapSpec,
    WorldConfig, WorldError,
};
pub use episode::{
    run_episode, EpisodeError, EpisodeOptions, EpisodeResult, Outcome, VelocityMode,
};
pub use geom::{Obb, Rect, Segment};
pub use metrics::{compute_metrics, write_trajectory_csv, MetricsBundle, TrajSample};
