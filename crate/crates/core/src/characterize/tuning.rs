use serde::{Deserialize, Serialize};

use crate::net::{AvoidanceNet, NetConfig, NetError, PopSizes, RecordPlan};
use crate::snn::DT_MS;
use crate::vision::{CameraEvent, CameraModel};

use super::grating::{michelson_contrast, synth_grating_events, Drift, GratingSpec, SynthSensor};

/// Characterization grid; defaults follow the grating-recording protocol
/// (minus the illumination axis): six temporal frequencies, six printed
/// contrasts, three repetitions of four seconds each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CharacterizeConfig {
    pub frequencies_hz: Vec<f64>,
    pub contrasts_printed: Vec<f64>,
    pub repetitions: u32,
    pub duration_s: f64,
    pub sensor: SynthSensor,
    pub seed: u64,
}

impl Default for CharacterizeConfig {
    fn default() -> Self {
        CharacterizeConfig {
            frequencies_hz: vec![0.1, 0.5, 1.0, 2.5, 5.0, 10.0],
            contrasts_printed: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            repetitions: 3,
            duration_s: 4.0,
            sensor: SynthSensor::default(),
            seed: 7,
        }
    }
}

/// Response of one grating presentation: mean rate (spikes/neuron/s) of each
/// TDE population over interior columns, with the across-neuron standard
/// deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResponse {
    pub frequency_hz: f64,
    pub contrast_printed: f64,
    pub contrast_michelson: f64,
    pub drift: Drift,
    pub rep: u32,
    pub event_count: usize,
    pub rate_lr_hz: f64,
    pub rate_rl_hz: f64,
    pub std_lr_hz: f64,
    pub std_rl_hz: f64,
    /// A non-zero-contrast stimulus that produced no events at all.
    pub degenerate: bool,
}

impl RunResponse {
    /// Response of the population whose preferred direction matches the
    /// drift, and of the opposing one.
    pub fn aligned(&self) -> f64 {
        match self.drift {
            Drift::LeftToRight => self.rate_lr_hz,
            Drift::RightToLeft => self.rate_rl_hz,
        }
    }

    pub fn opposed(&self) -> f64 {
        match self.drift {
            Drift::LeftToRight => self.rate_rl_hz,
            Drift::RightToLeft => self.rate_lr_hz,
        }
    }
}

/// One aggregated tuning-curve point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub frequency_hz: f64,
    pub contrast_michelson: f64,
    pub mean_norm: f64,
    pub std_norm: f64,
    pub n_reps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningCurve {
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationResult {
    pub runs: Vec<RunResponse>,
}

impl CharacterizationResult {
    fn mean_over(&self, f: impl Fn(&RunResponse) -> bool, v: impl Fn(&RunResponse) -> f64) -> f64 {
        let sel: Vec<f64> = self.runs.iter().filter(|r| f(r)).map(v).collect();
        if sel.is_empty() {
            0.0
        } else {
            sel.iter().sum::<f64>() / sel.len() as f64
        }
    }

    /// Velocity tuning at a fixed printed contrast: (preferred, null)
    /// curves over the frequency grid, both normalised to the preferred
    /// maximum.
    pub fn velocity_tuning(&self, contrast_printed: f64) -> (TuningCurve, TuningCurve) {
        let mut freqs: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.contrast_printed == contrast_printed)
            .map(|r| r.frequency_hz)
            .collect();
        freqs.sort_by(f64::total_cmp);
        freqs.dedup();
        let raw: Vec<(f64, f64, f64, f64, f64, u32)> = freqs
            .iter()
            .map(|&f| {
                let sel = |r: &&RunResponse| {
                    r.contrast_printed == contrast_printed && r.frequency_hz == f
                };
                let n = self.runs.iter().filter(sel).count() as u32;
                let pref = self.mean_over(|r| sel(&r), RunResponse::aligned);
                let null = self.mean_over(|r| sel(&r), RunResponse::opposed);
                let pref_std = self.mean_over(
                    |r| sel(&r),
                    |r| match r.drift {
                        Drift::LeftToRight => r.std_lr_hz,
                        Drift::RightToLeft => r.std_rl_hz,
                    },
                );
                let null_std = self.mean_over(
                    |r| sel(&r),
                    |r| match r.drift {
                        Drift::LeftToRight => r.std_rl_hz,
                        Drift::RightToLeft => r.std_lr_hz,
                    },
                );
                (f, pref, null, pref_std, null_std, n)
            })
            .collect();
        let max = raw.iter().map(|r| r.1).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mk = |vals: Vec<CurvePoint>| TuningCurve { points: vals };
        let cm = michelson_contrast(contrast_printed);
        (
            mk(raw
                .iter()
                .map(|&(f, p, _, ps, _, n)| CurvePoint {
                    frequency_hz: f,
                    contrast_michelson: cm,
                    mean_norm: p / max,
                    std_norm: ps / max,
                    n_reps: n,
                })
                .collect()),
            mk(raw
                .iter()
                .map(|&(f, _, nl, _, ns, n)| CurvePoint {
                    frequency_hz: f,
                    contrast_michelson: cm,
                    mean_norm: nl / max,
                    std_norm: ns / max,
                    n_reps: n,
                })
                .collect()),
        )
    }

    /// Preferred-direction response over Michelson contrast at a fixed
    /// frequency, normalised to the sweep maximum.
    pub fn contrast_response(&self, frequency_hz: f64) -> Vec<(f64, f64)> {
        let mut contrasts: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.frequency_hz == frequency_hz)
            .map(|r| r.contrast_michelson)
            .collect();
        contrasts.sort_by(f64::total_cmp);
        contrasts.dedup();
        let raw: Vec<(f64, f64)> = contrasts
            .iter()
            .map(|&c| {
                (
                    c,
                    self.mean_over(
                        |r| r.frequency_hz == frequency_hz && r.contrast_michelson == c,
                        RunResponse::aligned,
                    ),
                )
            })
            .collect();
        let max = raw.iter().map(|r| r.1).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        raw.into_iter().map(|(c, v)| (c, v / max)).collect()
    }

    /// Michelson contrast at which the normalised response first crosses
    /// one half, linearly interpolated between grid points.
    pub fn half_contrast_crossing(&self, frequency_hz: f64) -> Option<f64> {
        let resp = self.contrast_response(frequency_hz);
        for w in resp.windows(2) {
            let (c0, r0) = w[0];
            let (c1, r1) = w[1];
            if r0 < 0.5 && r1 >= 0.5 {
                return Some(c0 + (0.5 - r0) / (r1 - r0) * (c1 - c0));
            }
        }
        None
    }
}

/// Reduced network for characterization: the motion pathway only.
fn pathway_config(base: &NetConfig) -> NetConfig {
    NetConfig {
        sizes: PopSizes {
            wta: 0,
            gi: 0,
            et: 0,
            ofi: 0,
            mot: 0,
            pois1: 0,
            pois2: 0,
            ..base.sizes
        },
        ..base.clone()
    }
}

/// Feed one event stream through the SPTC + TDE pathway and measure mean
/// population activity (spikes per neuron per second) over interior columns.
pub fn pathway_response(
    net_cfg: &NetConfig,
    events: &[CameraEvent],
    duration_s: f64,
    cam: &CameraModel,
) -> Result<(f64, f64, f64, f64), NetError> {
    let cfg = pathway_config(net_cfg);
    let mut net = AvoidanceNet::assemble(&cfg, RecordPlan::motion_pathway())?;
    let cycle_ticks = (cam.cycle_ms() / DT_MS).round() as u64;
    let cycle_us = cam.cycle_us();

    let n_cycles = (duration_s * cam.rate_hz).round() as u64;
    let mut idx = 0usize;
    for cycle in 0..n_cycles {
        let t_lo = cycle * cycle_us;
        let mut chunk_end = idx;
        while chunk_end < events.len() && events[chunk_end].t_us <= t_lo + cycle_us / 2 {
            chunk_end += 1;
        }
        net.inject_camera_events(&events[idx..chunk_end])?;
        idx = chunk_end;
        net.advance(cycle_ticks)?;
    }
    // Flush trailing bursts.
    net.advance(2000)?;

    let cols = cfg.sizes.sptc_cols as usize;
    let rows = cfg.sizes.sptc_rows as usize;
    let interior = |pop: Option<usize>| -> (f64, f64) {
        let Some(p) = pop else { return (0.0, 0.0) };
        let mut counts = vec![0u32; cols * rows];
        for s in net.net.record().spikes(p) {
            counts[s.index as usize] += 1;
        }
        let mut rates = Vec::with_capacity((cols - 2) * rows);
        for r in 0..rows {
            for c in 1..cols - 1 {
                rates.push(f64::from(counts[r * cols + c]) / duration_s);
            }
        }
        let n = rates.len() as f64;
        let mean = rates.iter().sum::<f64>() / n;
        let var = rates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let (lr, lr_std) = interior(net.pops.tde_lr);
    let (rl, rl_std) = interior(net.pops.tde_rl);
    Ok((lr, rl, lr_std, rl_std))
}

/// Run the full characterization grid. Each grid point is an independent
/// presentation; repetitions differ by stimulus phase.
pub fn run_characterization(
    cfg: &CharacterizeConfig,
    net_cfg: &NetConfig,
    cam: &CameraModel,
) -> Result<CharacterizationResult, NetError> {
    let mut runs = Vec::new();
    for &freq in &cfg.frequencies_hz {
        for &contrast in &cfg.contrasts_printed {
            for drift in [Drift::LeftToRight, Drift::RightToLeft] {
                for rep in 0..cfg.repetitions {
                    let spec = GratingSpec {
                        temporal_frequency_hz: freq,
                        printed_contrast: contrast,
                        drift,
                        duration_s: cfg.duration_s,
                        ..GratingSpec::new(freq, contrast, drift)
                    };
                    let seed = cfg
                        .seed
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add((rep as u64) << 32)
                        .wrapping_add((freq * 1000.0) as u64)
                        .wrapping_add((contrast * 100.0) as u64);
                    let events = synth_grating_events(&spec, &cfg.sensor, cam, seed);
                    let (lr, rl, lr_std, rl_std) =
                        pathway_response(net_cfg, &events, cfg.duration_s, cam)?;
                    runs.push(RunResponse {
                        frequency_hz: freq,
                        contrast_printed: contrast,
                        contrast_michelson: michelson_contrast(contrast),
                        drift,
                        rep,
                        event_count: events.len(),
                        rate_lr_hz: lr,
                        rate_rl_hz: rl,
                        std_lr_hz: lr_std,
                        std_rl_hz: rl_std,
                        degenerate: events.is_empty() && contrast > 0.0,
                    });
                }
            }
        }
    }
    Ok(CharacterizationResult { runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_crossing_interpolates() {
        let mk = |c: f64, v: f64| RunResponse {
            frequency_hz: 5.0,
            contrast_printed: c,
            contrast_michelson: c,
            drift: Drift::LeftToRight,
            rep: 0,
            event_count: 1,
            rate_lr_hz: v,
            rate_rl_hz: 0.0,
            std_lr_hz: 0.0,
            std_rl_hz: 0.0,
            degenerate: false,
        };
        let res = CharacterizationResult {
            runs: vec![mk(0.2, 0.0), mk(0.4, 4.0), mk(0.6, 8.0), mk(1.0, 10.0)],
        };
        let x = res.half_contrast_crossing(5.0).unwrap();
        // Normalised: 0.0, 0.4, 0.8, 1.0 -> crossing halfway through
        // the 0.4..0.6 contrast interval.
        assert!((x - 0.45).abs() < 1e-9, "got {x}");
    }
}
