use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{
    decode_motor, intersaccade_velocity_au_s, AvoidanceNet, MotorCommand, MotorParams, NetConfig,
    NetError, RecordPlan, Winner,
};
use crate::snn::{SpikeRecord, Tick, DT_MS};
use crate::vision::{generate_events, render_frame, render_frame_into, CameraModel};

use super::agent::{detect_collision, step_agent, AgentMode, AgentState};
use super::env::{Environment, ExitRule};
use super::metrics::{compute_metrics, MetricsBundle, TrajSample};

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Net(#[from] NetError),

    #[error("camera cycle ({0} ms) is not an integer number of ticks")]
    BadCycle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityMode {
    /// Intersaccade speed modulated by the OFI rate.
    Adaptive,
    /// Constant intersaccade speed in robot lengths per second.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct EpisodeOptions {
    pub net: NetConfig,
    pub camera: CameraModel,
    pub motor: MotorParams,
    pub budget_s: f64,
    pub velocity: VelocityMode,
    /// Record every population instead of just the decision layer.
    pub record_all: bool,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        EpisodeOptions {
            net: NetConfig::default(),
            camera: CameraModel::default(),
            motor: MotorParams::default(),
            budget_s: 600.0,
            velocity: VelocityMode::Adaptive,
            record_all: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Collided,
    Exited,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub trajectory: Vec<TrajSample>,
    pub outcome: Outcome,
    pub collision_time_s: Option<f64>,
    pub metrics: MetricsBundle,
    pub rasters: SpikeRecord,
    pub rejected_events: usize,
    pub saccade_count: u32,
    pub escape_turn_count: u32,
}

impl EpisodeResult {
    pub fn success(&self) -> bool {
        self.outcome != Outcome::Collided
    }
}

/// Run one closed-loop episode: per 5 ms camera cycle, render, generate
/// events, feed the network, advance it one cycle of ticks, decode motor
/// activity, step the agent, and test for collision or exit.
pub fn run_episode(env: &Environment, opts: &EpisodeOptions) -> Result<EpisodeResult, EpisodeError> {
    let cam = opts.camera;
    let cycle_ticks_f = cam.cycle_ms() / DT_MS;
    if (cycle_ticks_f - cycle_ticks_f.round()).abs() > 1e-9 {
        return Err(EpisodeError::BadCycle(cam.cycle_ms()));
    }
    let cycle_ticks = cycle_ticks_f.round() as u64;
    let dt_s = cam.cycle_ms() * 1e-3;

    let plan = if opts.record_all { RecordPlan::all() } else { RecordPlan::decision() };
    let mut net = AvoidanceNet::assemble(&opts.net, plan)?;
    let scene = env.scene();

    let mut agent = AgentState {
        x_m: env.start.0,
        y_m: env.start.1,
        heading_rad: env.start.2,
        mode: AgentMode::Intersaccade,
    };

    let mut prev = render_frame(&scene, (agent.x_m, agent.y_m, agent.heading_rad), &cam);
    let mut cur = prev.clone();

    let mut wta_cursor = 0usize;
    let mut et_cursor = 0usize;
    let mut ofi_cursor = 0usize;

    let n_cycles = (opts.budget_s / dt_s).round() as u64;
    let mut traj = Vec::with_capacity(n_cycles as usize + 1);
    traj.push(TrajSample {
        t_s: 0.0,
        x_m: agent.x_m,
        y_m: agent.y_m,
        heading_rad: agent.heading_rad,
        mode: agent.mode,
    });

    let mut outcome = Outcome::Timeout;
    let mut collision_time_s = None;
    let mut rejected_events = 0usize;
    let mut saccade_count = 0u32;
    let mut escape_turn_count = 0u32;

    // Motor state machine.
    let mut saccade_remaining: Tick = 0;
    let mut intersaccade_start_s = 0.0f64;
    let mut ofi_spikes_in_window = 0u64;
    let mut cmd = MotorCommand::straight(initial_speed(opts));

    for cycle in 0..n_cycles {
        let t_s = cycle as f64 * dt_s;

        render_frame_into(&scene, (agent.x_m, agent.y_m, agent.heading_rad), &cam, &mut cur);
        let events = generate_events(&prev, &cur, (t_s * 1e6) as u64, &cam);
        std::mem::swap(&mut prev, &mut cur);
        rejected_events += net.inject_camera_events(&events)?;

        net.advance(cycle_ticks)?;

        let wta_first = net
            .drain_spikes(net.pops.wta, &mut wta_cursor)
            .first()
            .map(|s| (s.tick, s.index));
        let et_first = net
            .drain_spikes(net.pops.et, &mut et_cursor)
            .first()
            .map(|s| s.tick);
        let ofi_new = net.drain_spikes(net.pops.ofi, &mut ofi_cursor).len() as u64;

        if saccade_remaining > 0 {
            saccade_remaining = saccade_remaining.saturating_sub(cycle_ticks);
            if saccade_remaining == 0 {
                // Saccade ends: a fresh intersaccade window for the OFI mean.
                intersaccade_start_s = t_s + dt_s;
                ofi_spikes_in_window = 0;
                cmd = MotorCommand::straight(initial_speed(opts));
            }
        } else {
            ofi_spikes_in_window += ofi_new;
            // An escape-turn or winner spike starts a saccade; the earlier
            // event wins, ties go to the WTA.
            let winner = match (wta_first, et_first) {
                (Some((wt, wi)), Some(et)) => {
                    if et < wt {
                        Some(Winner::EscapeTurn)
                    } else {
                        Some(Winner::Wta(wi))
                    }
                }
                (Some((_, wi)), None) => Some(Winner::Wta(wi)),
                (None, Some(_)) => Some(Winner::EscapeTurn),
                (None, None) => None,
            };
            if let Some(w) = winner {
                cmd = decode_motor(w, &opts.motor);
                saccade_remaining = cmd.remaining_ticks;
                saccade_count += 1;
                if w == Winner::EscapeTurn {
                    escape_turn_count += 1;
                }
            } else {
                let elapsed = (t_s + dt_s - intersaccade_start_s).max(dt_s);
                let f_ofi = ofi_spikes_in_window as f64 / elapsed;
                cmd = MotorCommand::straight(speed_for(opts, f_ofi));
            }
        }

        agent = step_agent(&agent, &cmd, dt_s);
        let t_next = t_s + dt_s;
        traj.push(TrajSample {
            t_s: t_next,
            x_m: agent.x_m,
            y_m: agent.y_m,
            heading_rad: agent.heading_rad,
            mode: agent.mode,
        });

        if detect_collision(&agent, env) {
            outcome = Outcome::Collided;
            collision_time_s = Some(t_next);
            break;
        }
        let exited = match env.exit {
            ExitRule::None => false,
            ExitRule::BeyondX(x) => agent.x_m > x,
            ExitRule::BeforeX(x) => agent.x_m < x,
        };
        if exited {
            outcome = Outcome::Exited;
            break;
        }
    }

    let metrics = compute_metrics(&traj, env);
    Ok(EpisodeResult {
        trajectory: traj,
        outcome,
        collision_time_s,
        metrics,
        rasters: net.net.record().clone(),
        rejected_events,
        saccade_count,
        escape_turn_count,
    })
}

fn initial_speed(opts: &EpisodeOptions) -> f64 {
    match opts.velocity {
        VelocityMode::Adaptive => intersaccade_velocity_au_s(0.0),
        VelocityMode::Fixed(v) => v,
    }
}

fn speed_for(opts: &EpisodeOptions, f_ofi_hz: f64) -> f64 {
    match opts.velocity {
        VelocityMode::Adaptive => intersaccade_velocity_au_s(f_ofi_hz),
        VelocityMode::Fixed(v) => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::env::{generate_environment, EnvKind, WorldConfig};

    fn short_opts() -> EpisodeOptions {
        EpisodeOptions { budget_s: 2.0, ..EpisodeOptions::default() }
    }

    #[test]
    fn empty_box_short_budget_times_out() {
        let env = generate_environment(EnvKind::EmptyBox, 11, WorldConfig::default()).unwrap();
        let r = run_episode(&env, &short_opts()).unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.trajectory.len(), 401);
    }

    #[test]
    fn episodes_are_deterministic() {
        let env =
            generate_environment(EnvKind::Clutter { density_pct: 10.0 }, 3, WorldConfig::default())
                .unwrap();
        let opts = EpisodeOptions { budget_s: 3.0, ..EpisodeOptions::default() };
        let a = run_episode(&env, &opts).unwrap();
        let b = run_episode(&env, &opts).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.rasters, b.rasters);
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn metrics_are_recomputable_from_trajectory_and_env() {
        let env =
            generate_environment(EnvKind::Clutter { density_pct: 8.0 }, 4, WorldConfig::default())
                .unwrap();
        let r = run_episode(&env, &short_opts()).unwrap();
        assert_eq!(r.metrics, compute_metrics(&r.trajectory, &env));
    }
}
