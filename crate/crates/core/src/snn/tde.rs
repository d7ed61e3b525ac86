use serde::{Deserialize, Serialize};

use super::{LifKernel, LifParams, LifState, SnnError, Tick, DT_MS};

/// Parameters of a time-difference-encoder unit: the output LIF neuron plus
/// the facilitation decay constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdeParams {
    pub lif: LifParams,
    pub tau_fac_ms: f64,
}

impl TdeParams {
    pub fn validate(&self) -> Result<(), SnnError> {
        self.lif.validate()?;
        if !(self.tau_fac_ms > 0.0) {
            return Err(SnnError::BadParams(format!(
                "tau_fac_ms must be > 0, got {}",
                self.tau_fac_ms
            )));
        }
        Ok(())
    }
}

/// TDE unit state. The gain is not stored explicitly: it is fully determined
/// by the last facilitatory arrival, `exp(-(t - last_fac) * dt / tau_fac)`,
/// and zero before the first facilitatory spike. A facilitatory arrival
/// resets the gain to 1 (non-accumulating); a trigger arrival injects
/// `weight * gain` into the output neuron's excitatory current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdeState {
    pub armed: bool,
    pub last_fac_tick: Tick,
    pub lif: LifState,
}

#[derive(Debug, Clone, Copy)]
pub struct TdeKernel {
    pub lif: LifKernel,
    pub tau_fac_ms: f64,
}

impl TdeKernel {
    pub fn new(params: TdeParams) -> Result<Self, SnnError> {
        params.validate()?;
        Ok(TdeKernel {
            lif: LifKernel::new(params.lif)?,
            tau_fac_ms: params.tau_fac_ms,
        })
    }

    pub fn initial_state(&self) -> TdeState {
        TdeState {
            armed: false,
            last_fac_tick: 0,
            lif: self.lif.initial_state(),
        }
    }

    /// Gain seen by a trigger arriving at `tick`.
    #[inline]
    pub fn gain(&self, s: &TdeState, tick: Tick) -> f64 {
        if !s.armed {
            return 0.0;
        }
        let dt_ms = (tick - s.last_fac_tick) as f64 * DT_MS;
        (-dt_ms / self.tau_fac_ms).exp()
    }

    /// Facilitatory arrival: re-arm the gain at 1.
    #[inline]
    pub fn arm(&self, s: &mut TdeState, tick: Tick) {
        s.armed = true;
        s.last_fac_tick = tick;
    }

    /// Trigger arrival: inject an EPSC of amplitude `weight * gain`.
    #[inline]
    pub fn trigger(&self, s: &mut TdeState, weight_na: f64, tick: Tick) {
        s.lif.i_exc_na += weight_na * self.gain(s, tick);
    }

    #[inline]
    pub fn step(&self, s: &mut TdeState, tick: Tick) -> bool {
        self.lif.step(&mut s.lif, tick)
    }
}

/// One-tick TDE update; the spec-level operation shape. Facilitation is
/// applied before triggers, so a same-tick fac+trig pair sees gain 1.
pub fn tde_step(
    state: &TdeState,
    kernel: &TdeKernel,
    fac_arrival: bool,
    trig_arrivals: &[f64],
    tick: Tick,
) -> (TdeState, bool) {
    let mut s = *state;
    if fac_arrival {
        kernel.arm(&mut s, tick);
    }
    for &w in trig_arrivals {
        kernel.trigger(&mut s, w, tick);
    }
    let spiked = kernel.step(&mut s, tick);
    (s, spiked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::config::table4;
    use crate::snn::ms_to_ticks;

    fn kernel() -> TdeKernel {
        TdeKernel::new(TdeParams {
            lif: table4::tde(),
            tau_fac_ms: 60.0,
        })
        .unwrap()
    }

    /// Burst size for a single fac -> trig pair separated by `dt_ms`
    /// (negative separation means trigger first).
    pub(crate) fn burst_for_dt(k: &TdeKernel, dt_ms: f64, trig_w: f64) -> usize {
        let mut s = k.initial_state();
        let (fac_tick, trig_tick) = if dt_ms >= 0.0 {
            (0, ms_to_ticks(dt_ms))
        } else {
            (ms_to_ticks(-dt_ms), 0)
        };
        let horizon = fac_tick.max(trig_tick) + ms_to_ticks(200.0);
        let mut spikes = 0;
        for t in 0..horizon {
            if t == fac_tick {
                k.arm(&mut s, t);
            }
            if t == trig_tick {
                k.trigger(&mut s, trig_w, t);
            }
            if k.step(&mut s, t) {
                spikes += 1;
            }
        }
        spikes
    }

    #[test]
    fn trigger_without_facilitation_is_silent() {
        let k = kernel();
        let mut s = k.initial_state();
        k.trigger(&mut s, 4.0, 0);
        assert_eq!(s.lif.i_exc_na, 0.0);
        for t in 0..ms_to_ticks(100.0) {
            assert!(!k.step(&mut s, t));
        }
    }

    #[test]
    fn negative_dt_yields_no_output() {
        let k = kernel();
        for dt in [-1.0, -5.0, -20.0, -100.0] {
            assert_eq!(burst_for_dt(&k, dt, 4.0), 0);
        }
    }

    #[test]
    fn burst_count_non_increasing_in_dt() {
        let k = kernel();
        let grid = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
        let bursts: Vec<usize> = grid.iter().map(|&dt| burst_for_dt(&k, dt, 4.0)).collect();
        assert!(bursts[0] >= 1, "short dt must burst, got {bursts:?}");
        for w in bursts.windows(2) {
            assert!(w[1] <= w[0], "burst counts not monotone: {bursts:?}");
        }
        assert!(
            burst_for_dt(&k, 5.0, 4.0) > burst_for_dt(&k, 50.0, 4.0),
            "5 ms response must exceed 50 ms response"
        );
    }

    #[test]
    fn facilitation_resets_instead_of_accumulating() {
        let k = kernel();
        let mut s = k.initial_state();
        k.arm(&mut s, 0);
        k.arm(&mut s, 10);
        // Gain right after the second fac is exactly 1, not more.
        assert!((k.gain(&s, 10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_tick_fac_and_trig_sees_full_gain() {
        let k = kernel();
        let (_, _spiked) = tde_step(&k.initial_state(), &k, true, &[4.0], 0);
        let mut s = k.initial_state();
        k.arm(&mut s, 0);
        k.trigger(&mut s, 4.0, 0);
        assert!((s.lif.i_exc_na - 4.0).abs() < 1e-12);
    }
}
