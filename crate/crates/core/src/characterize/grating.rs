use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::vision::{CameraEvent, CameraModel, Polarity};

/// Michelson contrast of a grating printed at `c_printed` grey level:
/// (I_max - I_min) / (I_max + I_min) = c / (2 - c).
pub fn michelson_contrast(c_printed: f64) -> f64 {
    c_printed / (2.0 - c_printed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    /// Pattern moves towards increasing column index; drives the
    /// left-to-right TDE population as its preferred direction.
    LeftToRight,
    RightToLeft,
}

/// One grating stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub wavelength_deg: f64,
    pub temporal_frequency_hz: f64,
    pub printed_contrast: f64,
    pub drift: Drift,
    pub duration_s: f64,
}

impl GratingSpec {
    pub fn new(freq_hz: f64, printed_contrast: f64, drift: Drift) -> Self {
        GratingSpec {
            wavelength_deg: 20.0,
            temporal_frequency_hz: freq_hz,
            printed_contrast,
            drift,
            duration_s: 4.0,
        }
    }

    /// Angular drift speed, degrees per second.
    pub fn velocity_deg_s(&self) -> f64 {
        self.temporal_frequency_hz * self.wavelength_deg
    }
}

/// Sensor front end for synthetic recordings, modelling the slow-biased
/// recording camera. Each pixel area-samples the pattern over its footprint,
/// low-passes it with a cascade of first-order stages (the photoreceptor),
/// and emits one event whenever the filtered brightness has moved more than
/// its threshold away from a per-pixel reference level, which then resets to
/// the current brightness. Pixel thresholds scatter log-normally around the
/// mean (transistor mismatch), which is what grades the response with
/// stimulus contrast.
///
/// With instantaneous pixels and plain frame differencing, a drifting
/// grating produces a response that can only grow with temporal frequency
/// (edge crossings per second scale with it); the recorded pathway instead
/// peaks mid-band because the slow photoreceptor swallows the swing of fast
/// gratings before it reaches the event thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSensor {
    pub stages: u32,
    pub tau_px_ms: f64,
    /// Median event threshold (brightness units).
    pub threshold: f64,
    /// Log-normal scatter of per-pixel thresholds.
    pub threshold_sigma: f64,
    /// Per-pixel dead time between events (slow-bias setting).
    pub refractory_ms: f64,
}

impl Default for SynthSensor {
    fn default() -> Self {
        SynthSensor {
            stages: 3,
            tau_px_ms: 45.0,
            threshold: 0.09,
            threshold_sigma: 0.1,
            refractory_ms: 170.0,
        }
    }
}

/// Mean of the unit square wave (1 on [0, 1/2), 0 on [1/2, 1)) over [a, b],
/// in wave periods.
fn square_mean(a: f64, b: f64) -> f64 {
    debug_assert!(b > a);
    let anti = |x: f64| -> f64 {
        let k = x.floor();
        let f = x - k;
        k * 0.5 + f.min(0.5)
    };
    (anti(b) - anti(a)) / (b - a)
}

/// Synthesise the event stream for one grating presentation. The pattern is
/// sampled at the camera's 200 Hz update rate; `seed` randomises the initial
/// phase (recording repetitions differ by phase).
pub fn synth_grating_events(
    spec: &GratingSpec,
    sensor: &SynthSensor,
    cam: &CameraModel,
    seed: u64,
) -> Vec<CameraEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase0: f64 = rng.gen::<f64>();

    let contrast = michelson_contrast(spec.printed_contrast);
    let bright = 0.5 + contrast / 2.0;
    let dark = 0.5 - contrast / 2.0;

    let pitch = cam.pixel_pitch_deg();
    let lambda = spec.wavelength_deg;
    let v = match spec.drift {
        Drift::LeftToRight => spec.velocity_deg_s(),
        Drift::RightToLeft => -spec.velocity_deg_s(),
    };

    let n_frames = (spec.duration_s * cam.rate_hz).round() as u64;
    let dt_s = 1.0 / cam.rate_hz;
    let alpha = 1.0 - (-(dt_s * 1e3) / sensor.tau_px_ms).exp();

    let w = cam.width as usize;
    // Per-column LP cascade state, initialised to the t=0 pattern so the
    // onset transient doesn't generate a spurious burst.
    let mut lp = vec![vec![0.0f64; w]; sensor.stages.max(1) as usize];
    let column_input = |col: usize, t_s: f64| -> f64 {
        let a_deg = col as f64 * pitch - v * t_s + phase0 * lambda;
        let b_deg = a_deg + pitch;
        let frac = square_mean(a_deg / lambda, b_deg / lambda);
        dark + frac * (bright - dark)
    };
    for col in 0..w {
        let b0 = column_input(col, 0.0);
        for stage in lp.iter_mut() {
            stage[col] = b0;
        }
    }

    // Columns share the (vertically uniform) signal; each row is still its
    // own pixel with its own threshold and reference level.
    let h = cam.height as usize;
    let mut threshold_px = vec![0.0f64; w * h];
    for t in threshold_px.iter_mut() {
        // Box-Muller from the seeded stream keeps runs reproducible.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen::<f64>();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        *t = sensor.threshold * (sensor.threshold_sigma * z).exp();
    }
    let mut reference: Vec<f64> = (0..w * h).map(|i| lp.last().unwrap()[i % w]).collect();
    let refractory_frames = (sensor.refractory_ms / (dt_s * 1e3)).round() as u64;
    let mut last_event = vec![0i64; w * h];

    let mut events = Vec::new();
    let mut col_value = vec![0.0f64; w];
    for k in 1..=n_frames {
        let t_s = k as f64 * dt_s;
        let t_us = (t_s * 1e6).round() as u64;
        for (col, value) in col_value.iter_mut().enumerate() {
            let mut x = column_input(col, t_s);
            for stage in lp.iter_mut() {
                stage[col] += alpha * (x - stage[col]);
                x = stage[col];
            }
            *value = x;
        }
        let mut cycle_events = 0usize;
        'raster: for y in 0..h {
            for (col, &x) in col_value.iter().enumerate() {
                let i = y * w + col;
                let d = x - reference[i];
                let free = k as i64 - last_event[i] >= refractory_frames as i64;
                if free && d.abs() >= threshold_px[i] {
                    reference[i] = x;
                    last_event[i] = k as i64;
                    events.push(CameraEvent {
                        t_us,
                        x: col as u16,
                        y: y as u16,
                        polarity: if d > 0.0 { Polarity::On } else { Polarity::Off },
                    });
                    cycle_events += 1;
                    if cycle_events >= cam.event_cap {
                        break 'raster;
                    }
                }
            }
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn michelson_values() {
        assert_eq!(michelson_contrast(1.0), 1.0);
        assert_eq!(michelson_contrast(0.0), 0.0);
        assert!((michelson_contrast(0.6) - 0.42857142857).abs() < 1e-9);
    }

    #[test]
    fn square_mean_is_duty_cycle() {
        assert!((square_mean(0.0, 1.0) - 0.5).abs() < 1e-12);
        assert!((square_mean(0.0, 0.5) - 1.0).abs() < 1e-12);
        assert!((square_mean(0.5, 1.0) - 0.0).abs() < 1e-12);
        assert!((square_mean(-0.25, 0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_contrast_yields_zero_events() {
        let spec = GratingSpec::new(5.0, 0.0, Drift::LeftToRight);
        let ev = synth_grating_events(&spec, &SynthSensor::default(), &CameraModel::default(), 1);
        assert!(ev.is_empty());
    }

    #[test]
    fn grating_advances_one_wavelength_per_period() {
        // At 1 Hz the pattern moves exactly one wavelength per second, so
        // the (ideal) column input is 1 s periodic.
        let spec = GratingSpec::new(1.0, 1.0, Drift::LeftToRight);
        let pitch = CameraModel::default().pixel_pitch_deg();
        let col_input = |t_s: f64| {
            let a = 10.0 * pitch - spec.velocity_deg_s() * t_s;
            square_mean(a / 20.0, (a + pitch) / 20.0)
        };
        for k in 0..10 {
            let t = k as f64 * 0.1;
            assert!((col_input(t) - col_input(t + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn event_count_grows_from_half_to_five_hz() {
        let cam = CameraModel::default();
        let sensor = SynthSensor::default();
        let count = |f: f64| {
            synth_grating_events(&GratingSpec::new(f, 1.0, Drift::LeftToRight), &sensor, &cam, 3)
                .len()
        };
        assert!(count(5.0) > count(0.5), "5 Hz should out-produce 0.5 Hz");
    }

    #[test]
    fn timestamps_non_decreasing_and_capped_per_cycle() {
        let spec = GratingSpec::new(5.0, 1.0, Drift::LeftToRight);
        let cam = CameraModel::default();
        let ev = synth_grating_events(&spec, &SynthSensor::default(), &cam, 7);
        assert!(!ev.is_empty());
        let mut per_cycle = std::collections::HashMap::new();
        let mut prev_t = 0;
        for e in &ev {
            assert!(e.t_us >= prev_t);
            prev_t = e.t_us;
            *per_cycle.entry(e.t_us).or_insert(0usize) += 1;
        }
        assert!(per_cycle.values().all(|&n| n <= cam.event_cap));
    }
}
