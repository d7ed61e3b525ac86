use serde::{Deserialize, Serialize};

use crate::net::{MotorCommand, MotorMode, ROBOT_SIZE_M};

use super::env::Environment;
use super::geom::Obb;

pub const ROBOT_HALF_M: f64 = ROBOT_SIZE_M / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    Intersaccade,
    Saccade,
}

/// Planar agent pose plus behavioural mode. Distances in meters, heading in
/// radians (counter-clockwise positive; a left turn increases heading).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
    pub mode: AgentMode,
}

impl AgentState {
    pub fn footprint(&self) -> Obb {
        Obb { cx: self.x_m, cy: self.y_m, half: ROBOT_HALF_M, heading: self.heading_rad }
    }
}

/// Integrate the pose over one camera cycle. Straight mode translates along
/// the heading at the commanded speed; turn mode rotates at the commanded
/// angular velocity with the fixed saccadic forward speed. Commands carry
/// speeds in robot lengths per second.
pub fn step_agent(state: &AgentState, cmd: &MotorCommand, dt_s: f64) -> AgentState {
    let v_m_s = cmd.v_forward_au_s * ROBOT_SIZE_M;
    let mut next = *state;
    match cmd.mode {
        MotorMode::Straight => {
            next.mode = AgentMode::Intersaccade;
            next.x_m += v_m_s * state.heading_rad.cos() * dt_s;
            next.y_m += v_m_s * state.heading_rad.sin() * dt_s;
        }
        MotorMode::TurnLeft | MotorMode::TurnRight => {
            next.mode = AgentMode::Saccade;
            // Rotate, then advance along the mid-step heading.
            let omega = cmd.omega_deg_s.to_radians();
            let mid = state.heading_rad + 0.5 * omega * dt_s;
            next.heading_rad = state.heading_rad + omega * dt_s;
            next.x_m += v_m_s * mid.cos() * dt_s;
            next.y_m += v_m_s * mid.sin() * dt_s;
        }
    }
    next
}

/// True iff the robot footprint intersects any obstacle block or wall
/// (closed test: touching collides).
pub fn detect_collision(state: &AgentState, env: &Environment) -> bool {
    let fp = state.footprint();
    env.blocks
        .iter()
        .any(|b| fp.intersects_aabb(b.cx, b.cy, b.hx, b.hy))
        || env.walls.iter().any(|w| fp.intersects_segment(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::env::{generate_environment, Block, EnvKind, WorldConfig};

    fn straight(v_au: f64) -> MotorCommand {
        MotorCommand::straight(v_au)
    }

    #[test]
    fn full_speed_for_one_second_moves_one_meter() {
        let s = AgentState { x_m: 0.0, y_m: 0.0, heading_rad: 0.0, mode: AgentMode::Intersaccade };
        let mut cur = s;
        for _ in 0..200 {
            cur = step_agent(&cur, &straight(2.5), 0.005);
        }
        assert!((cur.x_m - 1.0).abs() < 1e-9, "moved {}", cur.x_m);
        assert_eq!(cur.y_m, 0.0);
    }

    #[test]
    fn four_degrees_per_second_turn() {
        let s = AgentState { x_m: 0.0, y_m: 0.0, heading_rad: 0.0, mode: AgentMode::Intersaccade };
        let cmd = MotorCommand {
            mode: MotorMode::TurnLeft,
            v_forward_au_s: 0.38,
            omega_deg_s: 4.0,
            remaining_ticks: 10_000,
        };
        let mut cur = s;
        for _ in 0..200 {
            cur = step_agent(&cur, &cmd, 0.005);
        }
        assert!((cur.heading_rad.to_degrees() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn saturated_turn_heading_change() {
        // 460 ms at the default 187.5 deg/s: 86.25 degrees.
        let cmd = MotorCommand {
            mode: MotorMode::TurnRight,
            v_forward_au_s: 0.38,
            omega_deg_s: -187.5,
            remaining_ticks: 4600,
        };
        let mut cur = AgentState { x_m: 0.0, y_m: 0.0, heading_rad: 0.0, mode: AgentMode::Saccade };
        for _ in 0..92 {
            cur = step_agent(&cur, &cmd, 0.005);
        }
        assert!((cur.heading_rad.to_degrees() + 86.25).abs() < 1e-9);
    }

    #[test]
    fn pose_never_teleports() {
        let cmd = straight(2.5);
        let mut cur = AgentState { x_m: 0.0, y_m: 0.0, heading_rad: 1.0, mode: AgentMode::Intersaccade };
        for _ in 0..100 {
            let next = step_agent(&cur, &cmd, 0.005);
            let d = ((next.x_m - cur.x_m).powi(2) + (next.y_m - cur.y_m).powi(2)).sqrt();
            assert!(d <= 2.5 * ROBOT_SIZE_M * 0.005 + 1e-12);
            cur = next;
        }
    }

    #[test]
    fn collision_detection_against_blocks_and_walls() {
        let mut env = generate_environment(EnvKind::EmptyBox, 3, WorldConfig::default()).unwrap();
        env.blocks.push(Block { cx: 2.0, cy: 0.0, hx: 0.5, hy: 0.5 });
        let far = AgentState { x_m: -3.0, y_m: 0.0, heading_rad: 0.0, mode: AgentMode::Intersaccade };
        assert!(!detect_collision(&far, &env));
        let on_block = AgentState { x_m: 2.0, y_m: 0.0, heading_rad: 0.4, mode: AgentMode::Intersaccade };
        assert!(detect_collision(&on_block, &env));
        let grazing = AgentState { x_m: 1.3, y_m: 0.0, heading_rad: 0.0, mode: AgentMode::Intersaccade };
        assert!(detect_collision(&grazing, &env), "corner graze at distance zero");
        let at_wall = AgentState { x_m: 7.9, y_m: 0.0, heading_rad: 0.0, mode: AgentMode::Intersaccade };
        assert!(detect_collision(&at_wall, &env));
    }
}
