use serde::{Deserialize, Serialize};

use crate::snn::{ms_to_ticks, Tick};

/// Robot side length; arbitrary units divide distances by this.
pub const ROBOT_SIZE_M: f64 = 0.4;

/// Horizontal field of view in degrees and the WTA/INT column count it is
/// spread over; one column of perception is 140/64 degrees.
pub const FOV_DEG: f64 = 140.0;
pub const COLUMNS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotorMode {
    Straight,
    TurnLeft,
    TurnRight,
}

/// A decoded motor command. `mode == Straight` implies `omega == 0`; the two
/// turn modes are mutually exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    pub mode: MotorMode,
    pub v_forward_au_s: f64,
    pub omega_deg_s: f64,
    pub remaining_ticks: Tick,
}

impl MotorCommand {
    pub fn straight(v_au_s: f64) -> Self {
        MotorCommand {
            mode: MotorMode::Straight,
            v_forward_au_s: v_au_s,
            omega_deg_s: 0.0,
            remaining_ticks: 0,
        }
    }
}

/// Decoder input: a winning inverse-WTA neuron or an escape-turn spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Wta(u32),
    EscapeTurn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotorParams {
    /// Saccade angular speed. The quoted 4 deg/s cannot turn the agent away
    /// within a motor-wave duration; the default makes the maximal 960 ms
    /// escape wave a half turn. The literal value remains configurable.
    pub omega_deg_s: f64,
    /// Forward speed during a saccade.
    pub saccade_forward_au_s: f64,
    /// Motor-wave hop delay, i.e. milliseconds of turn per chain neuron.
    pub hop_ms: f64,
    pub chain_len: u32,
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams {
            omega_deg_s: 187.5,
            saccade_forward_au_s: 0.38,
            hop_ms: 10.0,
            chain_len: 96,
        }
    }
}

/// Motor chain injection index for a winner, per the connection table:
/// WTA 0-8 -> MOT1 at 50; 9-31 -> MOT1 at 2i+32; 32-53 -> MOT2 mirrored;
/// 54-63 -> MOT2 at 50. An escape turn injects MOT1 at 0 (maximal duration).
/// Returns (left_side, injection_index).
pub fn injection_index(winner: Winner) -> (bool, u32) {
    match winner {
        Winner::EscapeTurn => (true, 0),
        Winner::Wta(i) => {
            debug_assert!(i < 64);
            if i < 32 {
                let inj = if i <= 8 { 50 } else { 2 * i + 32 };
                (true, inj)
            } else {
                let m = 63 - i;
                let inj = if m <= 8 { 50 } else { 2 * m + 32 };
                (false, inj)
            }
        }
    }
}

/// Map a winner to a turn command. Duration is the wave traversal time,
/// (chain_len - injection) * hop delay, saturating at injection index 50.
pub fn decode_motor(winner: Winner, p: &MotorParams) -> MotorCommand {
    let (left, inj) = injection_index(winner);
    let duration_ms = f64::from(p.chain_len - inj) * p.hop_ms;
    MotorCommand {
        mode: if left {
            MotorMode::TurnLeft
        } else {
            MotorMode::TurnRight
        },
        v_forward_au_s: p.saccade_forward_au_s,
        omega_deg_s: if left { p.omega_deg_s } else { -p.omega_deg_s },
        remaining_ticks: ms_to_ticks(duration_ms),
    }
}

/// Intersaccade forward speed from the mean OFI rate: v = 1 - f * 0.001 m/s,
/// clamped at zero.
pub fn intersaccade_velocity_m_s(f_ofi_hz: f64) -> f64 {
    (1.0 - f_ofi_hz * 0.001).max(0.0)
}

/// Same, expressed in robot lengths per second (2.5 au/s at full speed).
pub fn intersaccade_velocity_au_s(f_ofi_hz: f64) -> f64 {
    intersaccade_velocity_m_s(f_ofi_hz) / ROBOT_SIZE_M
}

/// Minimum gap angle the network will steer into:
/// (2 n_connect + 1) * (140/64) degrees.
pub fn gap_min_deg(n_connect: u32) -> f64 {
    f64::from(2 * n_connect + 1) * (FOV_DEG / f64::from(COLUMNS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_adjacent_to_centre_is_two_hops() {
        let p = MotorParams::default();
        let c = decode_motor(Winner::Wta(31), &p);
        assert_eq!(c.mode, MotorMode::TurnLeft);
        assert_eq!(injection_index(Winner::Wta(31)), (true, 94));
        assert_eq!(c.remaining_ticks, ms_to_ticks(20.0));
    }

    #[test]
    fn decode_far_left_saturates() {
        let p = MotorParams::default();
        let c = decode_motor(Winner::Wta(0), &p);
        assert_eq!(injection_index(Winner::Wta(0)), (true, 50));
        assert_eq!(c.remaining_ticks, ms_to_ticks(460.0));
    }

    #[test]
    fn decode_escape_turn_is_full_wave() {
        let p = MotorParams::default();
        let c = decode_motor(Winner::EscapeTurn, &p);
        assert_eq!(c.mode, MotorMode::TurnLeft);
        assert_eq!(c.remaining_ticks, ms_to_ticks(960.0));
    }

    #[test]
    fn decode_is_mirror_symmetric() {
        let p = MotorParams::default();
        for i in 0..32 {
            let l = decode_motor(Winner::Wta(i), &p);
            let r = decode_motor(Winner::Wta(63 - i), &p);
            assert_eq!(l.remaining_ticks, r.remaining_ticks);
            assert_eq!(l.omega_deg_s, -r.omega_deg_s);
            assert_eq!(r.mode, MotorMode::TurnRight);
        }
    }

    #[test]
    fn velocity_law() {
        assert_eq!(intersaccade_velocity_m_s(0.0), 1.0);
        assert_eq!(intersaccade_velocity_au_s(0.0), 2.5);
        assert_eq!(intersaccade_velocity_m_s(1000.0), 0.0);
        assert!((intersaccade_velocity_m_s(400.0) - 0.6).abs() < 1e-12);
        assert!((intersaccade_velocity_au_s(400.0) - 1.5).abs() < 1e-12);
        assert_eq!(intersaccade_velocity_m_s(2000.0), 0.0);
    }

    #[test]
    fn gap_min_matches_closed_form() {
        assert!((gap_min_deg(0) - 2.1875).abs() < 1e-12);
        assert!((gap_min_deg(4) - 19.6875).abs() < 1e-12);
        assert!((gap_min_deg(3) - 15.3125).abs() < 1e-12);
    }
}
