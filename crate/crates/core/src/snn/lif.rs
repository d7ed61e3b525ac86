use serde::{Deserialize, Serialize};

use super::{ms_to_ticks, SnnError, SynKind, Tick, DT_MS};

/// Parameters of a current-based exponential leaky-integrate-and-fire neuron.
///
/// Units follow the NEST/PyNN convention the parameter tables use: voltages in
/// mV, capacitance in pF, times in ms, currents in nA. Internally currents in
/// nA pair with capacitance in nF (`c_m_pf / 1000`), which makes nA/nF come
/// out as mV/ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    pub e_l_mv: f64,
    pub c_m_pf: f64,
    pub tau_m_ms: f64,
    pub t_ref_ms: f64,
    pub tau_syn_exc_ms: f64,
    pub tau_syn_inh_ms: f64,
    pub v_th_mv: f64,
    pub v_reset_mv: f64,
    pub v_init_mv: f64,
    #[serde(default)]
    pub i_offset_na: f64,
}

impl LifParams {
    pub fn validate(&self) -> Result<(), SnnError> {
        let pos = [
            ("c_m_pf", self.c_m_pf),
            ("tau_m_ms", self.tau_m_ms),
            ("tau_syn_exc_ms", self.tau_syn_exc_ms),
            ("tau_syn_inh_ms", self.tau_syn_inh_ms),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SnnError::BadParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.t_ref_ms < 0.0 {
            return Err(SnnError::BadParams(format!(
                "t_ref_ms must be >= 0, got {}",
                self.t_ref_ms
            )));
        }
        if !(self.v_reset_mv < self.v_th_mv) {
            return Err(SnnError::BadParams(format!(
                "require v_reset < v_th, got {} >= {}",
                self.v_reset_mv, self.v_th_mv
            )));
        }
        Ok(())
    }
}

/// Dynamic state of one LIF neuron.
///
/// `i_exc_na` stays >= 0 and `i_inh_na` stays <= 0; the connection kind, not
/// the weight sign, picks the current an arrival lands in (weights are
/// validated to match their kind at build time). While `tick <
/// refractory_until` the membrane is clamped to `v_reset` and only the
/// synaptic currents evolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifState {
    pub v_mv: f64,
    pub i_exc_na: f64,
    pub i_inh_na: f64,
    pub refractory_until: Tick,
}

/// Precomputed one-tick exact exponential propagator for a LIF neuron.
///
/// For the linear subsystem
///   dV/dt = -(V - E_L)/tau_m + (I_exc + I_inh + I_offset)/C_m,
///   dI_x/dt = -I_x/tau_x,
/// one tick advances as
///   V' = E_L + (V - E_L) p_m + I_exc k_exc + I_inh k_inh + I_offset k_off,
///   I_x' = I_x p_x,
/// with p = exp(-dt/tau) and k the exact convolution coefficients. No Euler
/// error; the only approximation anywhere is the tick-quantised spike time.
#[derive(Debug, Clone, Copy)]
pub struct LifKernel {
    pub params: LifParams,
    p_m: f64,
    p_exc: f64,
    p_inh: f64,
    k_exc: f64,
    k_inh: f64,
    k_off: f64,
    ref_ticks: Tick,
}

fn current_coeff(tau_syn: f64, tau_m: f64, c_nf: f64, p_syn: f64, p_m: f64) -> f64 {
    if (tau_syn - tau_m).abs() < 1e-12 {
        DT_MS * p_m / c_nf
    } else {
        (p_syn - p_m) / (1.0 / tau_m - 1.0 / tau_syn) / c_nf
    }
}

impl LifKernel {
    pub fn new(params: LifParams) -> Result<Self, SnnError> {
        params.validate()?;
        let c_nf = params.c_m_pf / 1000.0;
        let p_m = (-DT_MS / params.tau_m_ms).exp();
        let p_exc = (-DT_MS / params.tau_syn_exc_ms).exp();
        let p_inh = (-DT_MS / params.tau_syn_inh_ms).exp();
        Ok(LifKernel {
            params,
            p_m,
            p_exc,
            p_inh,
            k_exc: current_coeff(params.tau_syn_exc_ms, params.tau_m_ms, c_nf, p_exc, p_m),
            k_inh: current_coeff(params.tau_syn_inh_ms, params.tau_m_ms, c_nf, p_inh, p_m),
            k_off: params.tau_m_ms * (1.0 - p_m) / c_nf,
            ref_ticks: ms_to_ticks(params.t_ref_ms),
        })
    }

    pub fn initial_state(&self) -> LifState {
        LifState {
            v_mv: self.params.v_init_mv,
            i_exc_na: 0.0,
            i_inh_na: 0.0,
            refractory_until: 0,
        }
    }

    #[inline]
    pub fn refractory_ticks(&self) -> Tick {
        self.ref_ticks
    }

    /// Deposit one spike arrival into the matching synaptic current.
    #[inline]
    pub fn apply_arrival(&self, s: &mut LifState, weight_na: f64, kind: SynKind) {
        match kind {
            SynKind::Excitatory | SynKind::Trigger => s.i_exc_na += weight_na,
            SynKind::Inhibitory => s.i_inh_na += weight_na,
            // Facilitatory arrivals arm a TDE gain; they carry no current.
            SynKind::Facilitatory => {}
        }
    }

    /// Advance one tick from `tick` to `tick + 1`. Arrivals due at `tick` must
    /// already be applied. Returns whether the neuron fired during this tick.
    #[inline]
    pub fn step(&self, s: &mut LifState, tick: Tick) -> bool {
        let in_ref = tick < s.refractory_until;
        if in_ref {
            s.v_mv = self.params.v_reset_mv;
            s.i_exc_na *= self.p_exc;
            s.i_inh_na *= self.p_inh;
            return false;
        }
        let dv = (s.v_mv - self.params.e_l_mv) * self.p_m
            + s.i_exc_na * self.k_exc
            + s.i_inh_na * self.k_inh
            + self.params.i_offset_na * self.k_off;
        s.v_mv = self.params.e_l_mv + dv;
        s.i_exc_na *= self.p_exc;
        s.i_inh_na *= self.p_inh;
        if s.v_mv >= self.params.v_th_mv {
            s.v_mv = self.params.v_reset_mv;
            s.refractory_until = tick + self.ref_ticks;
            true
        } else {
            false
        }
    }
}

/// One-tick update with explicit arrivals; the spec-level operation shape.
///
/// Returns the advanced state and whether the neuron spiked. `tick` is the
/// tick being simulated (the arrivals' due tick).
pub fn lif_step(
    state: &LifState,
    kernel: &LifKernel,
    arrivals: &[(f64, SynKind)],
    tick: Tick,
) -> (LifState, bool) {
    let mut s = *state;
    for &(w, kind) in arrivals {
        kernel.apply_arrival(&mut s, w, kind);
    }
    let spiked = kernel.step(&mut s, tick);
    (s, spiked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::config::table4;

    #[test]
    fn resting_neuron_is_a_fixed_point() {
        let k = LifKernel::new(table4::sptc()).unwrap();
        let mut s = k.initial_state();
        for t in 0..10_000 {
            let spiked = k.step(&mut s, t);
            assert!(!spiked);
            assert!((s.v_mv - k.params.e_l_mv).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_arrival_spikes_within_two_ms() {
        // SPTC row of the parameter table: 0.5 mV gap, 4 nA drive.
        let k = LifKernel::new(table4::sptc()).unwrap();
        let mut s = k.initial_state();
        k.apply_arrival(&mut s, 4.0, SynKind::Excitatory);
        let mut fired_at = None;
        for t in 0..ms_to_ticks(2.0) {
            if k.step(&mut s, t) {
                fired_at = Some(t);
                break;
            }
        }
        let t = fired_at.expect("4 nA into a 0.5 mV gap must spike within 2 ms");
        assert!(t as f64 * DT_MS <= 2.0);
    }

    #[test]
    fn refractory_clamp_absorbs_huge_arrival() {
        let k = LifKernel::new(table4::sptc()).unwrap();
        let mut s = k.initial_state();
        k.apply_arrival(&mut s, 4.0, SynKind::Excitatory);
        let mut t = 0;
        while !k.step(&mut s, t) {
            t += 1;
        }
        let spike_tick = t;
        // Huge arrival right after the spike: V must stay clamped.
        k.apply_arrival(&mut s, 1000.0, SynKind::Excitatory);
        for dt in 1..k.refractory_ticks() {
            let spiked = k.step(&mut s, spike_tick + dt);
            assert!(!spiked);
            assert_eq!(s.v_mv, k.params.v_reset_mv);
        }
    }

    #[test]
    fn refractory_bounds_interspike_interval() {
        let k = LifKernel::new(table4::sptc()).unwrap();
        let mut s = k.initial_state();
        let mut spikes = vec![];
        for t in 0..2000 {
            // Constant bombardment.
            k.apply_arrival(&mut s, 2.0, SynKind::Excitatory);
            if k.step(&mut s, t) {
                spikes.push(t);
            }
        }
        assert!(spikes.len() > 3);
        for w in spikes.windows(2) {
            assert!(w[1] - w[0] >= k.refractory_ticks());
        }
    }

    #[test]
    fn current_sign_routing() {
        let k = LifKernel::new(table4::wta()).unwrap();
        let mut s = k.initial_state();
        k.apply_arrival(&mut s, 1.0, SynKind::Excitatory);
        k.apply_arrival(&mut s, -10.0, SynKind::Inhibitory);
        assert!(s.i_exc_na >= 0.0);
        assert!(s.i_inh_na <= 0.0);
        for t in 0..1000 {
            k.step(&mut s, t);
            assert!(s.i_exc_na >= 0.0);
            assert!(s.i_inh_na <= 0.0);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = table4::sptc();
        p.tau_m_ms = 0.0;
        assert!(LifKernel::new(p).is_err());
        let mut p = table4::sptc();
        p.v_reset_mv = p.v_th_mv;
        assert!(LifKernel::new(p).is_err());
    }
}
