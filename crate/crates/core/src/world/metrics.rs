use serde::{Deserialize, Serialize};

use crate::net::ROBOT_SIZE_M;

use super::agent::AgentMode;
use super::env::{EnvKind, Environment};

/// One trajectory sample per camera cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajSample {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
    pub mode: AgentMode,
}

/// Derived per-episode metrics. Everything here is recomputable from the
/// trajectory and the environment alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub density_pct: f64,
    /// Mean distance to the centre of the closest obstacle, robot lengths.
    pub mean_clearance_au: Option<f64>,
    /// Mean distance to the nearest wall, robot lengths.
    pub mean_wall_clearance_au: f64,
    /// Mean translation speed over intersaccade samples, robot lengths/s.
    pub mean_intersaccade_velocity_au_s: f64,
    pub max_distance_from_start_au: f64,
    pub gap_crossings_fixed: u32,
    pub gap_crossings_variable: u32,
    /// Lateral offset from the corridor centreline per sample, robot lengths.
    pub lateral_deviation_au: Vec<f64>,
    pub lateral_mean_au: f64,
    pub lateral_std_au: f64,
    /// Deepest advance along the narrowing corridor, robot lengths.
    pub penetration_depth_au: f64,
    pub saccade_fraction: f64,
}

pub fn compute_metrics(traj: &[TrajSample], env: &Environment) -> MetricsBundle {
    let au = 1.0 / ROBOT_SIZE_M;
    let density_pct = super::env::obstacle_density(env);

    let mean_clearance_au = if env.blocks.is_empty() || traj.is_empty() {
        None
    } else {
        let sum: f64 = traj
            .iter()
            .map(|s| {
                env.blocks
                    .iter()
                    .map(|b| ((s.x_m - b.cx).powi(2) + (s.y_m - b.cy).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        Some(sum / traj.len() as f64 * au)
    };

    let mean_wall_clearance_au = if traj.is_empty() || env.walls.is_empty() {
        0.0
    } else {
        traj.iter()
            .map(|s| {
                env.walls
                    .iter()
                    .map(|w| w.distance_to(s.x_m, s.y_m))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / traj.len() as f64
            * au
    };

    // Realised intersaccade speed from consecutive samples.
    let mut v_sum = 0.0;
    let mut v_n = 0usize;
    for w in traj.windows(2) {
        if w[0].mode == AgentMode::Intersaccade && w[1].mode == AgentMode::Intersaccade {
            let dt = w[1].t_s - w[0].t_s;
            if dt > 0.0 {
                let d = ((w[1].x_m - w[0].x_m).powi(2) + (w[1].y_m - w[0].y_m).powi(2)).sqrt();
                v_sum += d / dt * au;
                v_n += 1;
            }
        }
    }
    let mean_intersaccade_velocity_au_s = if v_n > 0 { v_sum / v_n as f64 } else { 0.0 };

    let (sx, sy) = traj.first().map_or((0.0, 0.0), |s| (s.x_m, s.y_m));
    let max_distance_from_start_au = traj
        .iter()
        .map(|s| ((s.x_m - sx).powi(2) + (s.y_m - sy).powi(2)).sqrt())
        .fold(0.0, f64::max)
        * au;

    // Gap crossings: the centre crossing the divider plane inside a gap.
    let mut gap_crossings_fixed = 0u32;
    let mut gap_crossings_variable = 0u32;
    if !env.gaps.is_empty() {
        let divider_x = (env.arena.min_x + env.arena.max_x) / 2.0;
        for w in traj.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if (a.x_m < divider_x) != (b.x_m < divider_x) {
                let t = (divider_x - a.x_m) / (b.x_m - a.x_m);
                let y = a.y_m + t * (b.y_m - a.y_m);
                for g in &env.gaps {
                    if y >= g.y_min && y <= g.y_max {
                        if g.fixed {
                            gap_crossings_fixed += 1;
                        } else {
                            gap_crossings_variable += 1;
                        }
                    }
                }
            }
        }
    }

    // Lateral deviation from the corridor centreline (y = 0 for corridors).
    let lateral_deviation_au: Vec<f64> = match env.kind {
        EnvKind::Corridor { .. } | EnvKind::NarrowingCorridor => {
            traj.iter().map(|s| s.y_m * au).collect()
        }
        _ => Vec::new(),
    };
    let (lateral_mean_au, lateral_std_au) = if lateral_deviation_au.is_empty() {
        (0.0, 0.0)
    } else {
        let n = lateral_deviation_au.len() as f64;
        let mean = lateral_deviation_au.iter().sum::<f64>() / n;
        let var = lateral_deviation_au.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };

    let penetration_depth_au = match env.kind {
        EnvKind::NarrowingCorridor => traj.iter().map(|s| s.x_m).fold(0.0, f64::max) * au,
        _ => 0.0,
    };

    let saccade_fraction = if traj.is_empty() {
        0.0
    } else {
        traj.iter().filter(|s| s.mode == AgentMode::Saccade).count() as f64 / traj.len() as f64
    };

    MetricsBundle {
        density_pct,
        mean_clearance_au,
        mean_wall_clearance_au,
        mean_intersaccade_velocity_au_s,
        max_distance_from_start_au,
        gap_crossings_fixed,
        gap_crossings_variable,
        lateral_deviation_au,
        lateral_mean_au,
        lateral_std_au,
        penetration_depth_au,
        saccade_fraction,
    }
}

/// Trajectory CSV: `t_s,x_m,y_m,heading_rad,mode`.
pub fn write_trajectory_csv<W: std::io::Write>(
    traj: &[TrajSample],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "t_s,x_m,y_m,heading_rad,mode")?;
    for s in traj {
        let mode = match s.mode {
            AgentMode::Intersaccade => "intersaccade",
            AgentMode::Saccade => "saccade",
        };
        writeln!(w, "{},{},{},{},{}", s.t_s, s.x_m, s.y_m, s.heading_rad, mode)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::env::{generate_environment, EnvKind, WorldConfig};

    fn sample(t: f64, x: f64, y: f64, mode: AgentMode) -> TrajSample {
        TrajSample { t_s: t, x_m: x, y_m: y, heading_rad: 0.0, mode }
    }

    #[test]
    fn gap_crossings_counted_per_gap() {
        let env = generate_environment(
            EnvKind::GapArena { w_var_au: 5.0 },
            1,
            WorldConfig::default(),
        )
        .unwrap();
        // One pass through the variable gap (y near 3.2), one through the
        // fixed gap (y near 8.8), one bounce off the wall (y near 6.3).
        let traj = vec![
            sample(0.0, 9.0, 3.2, AgentMode::Intersaccade),
            sample(1.0, 10.0, 3.2, AgentMode::Intersaccade),
            sample(2.0, 9.0, 8.8, AgentMode::Intersaccade),
            sample(3.0, 9.0, 6.3, AgentMode::Intersaccade),
            sample(4.0, 9.5, 8.8, AgentMode::Intersaccade),
            sample(5.0, 10.0, 8.8, AgentMode::Intersaccade),
        ];
        let m = compute_metrics(&traj, &env);
        assert_eq!(m.gap_crossings_variable, 1);
        assert_eq!(m.gap_crossings_fixed, 1);
    }

    #[test]
    fn intersaccade_velocity_excludes_saccades() {
        let env = generate_environment(EnvKind::EmptyBox, 1, WorldConfig::default()).unwrap();
        let traj = vec![
            sample(0.0, 0.0, 0.0, AgentMode::Intersaccade),
            sample(1.0, 0.4, 0.0, AgentMode::Intersaccade), // 1 au/s
            sample(2.0, 3.0, 0.0, AgentMode::Saccade),      // ignored
            sample(3.0, 3.4, 0.0, AgentMode::Saccade),
        ];
        let m = compute_metrics(&traj, &env);
        assert!((m.mean_intersaccade_velocity_au_s - 1.0).abs() < 1e-9);
        assert_eq!(m.saccade_fraction, 0.5);
    }

    #[test]
    fn metrics_recompute_bit_identically() {
        let env = generate_environment(
            EnvKind::Clutter { density_pct: 10.0 },
            5,
            WorldConfig::default(),
        )
        .unwrap();
        let traj: Vec<TrajSample> = (0..500)
            .map(|i| sample(i as f64 * 0.005, (i as f64 * 0.01).sin(), 0.3, AgentMode::Intersaccade))
            .collect();
        assert_eq!(compute_metrics(&traj, &env), compute_metrics(&traj, &env));
    }
}
