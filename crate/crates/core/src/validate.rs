//! Runtime invariant suite: the release gate behind the CLI `validate`
//! command and the structural acceptance criteria. Each check is
//! self-contained and reports one pass/fail line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::net::config::table4;
use crate::net::{AvoidanceNet, NetConfig, PopSizes, RecordPlan};
use crate::snn::{
    ms_to_ticks, LifKernel, LifParams, LifState, SynKind, TdeKernel, TdeParams, Tick, DT_MS,
};
use crate::vision::{CameraModel, Frame};
use crate::world::{generate_environment, run_episode, EnvKind, EpisodeOptions, WorldConfig};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        CheckOutcome { name, pass, detail }
    }
}

// ---------------------------------------------------------------------------
// Reference integration (independent of the exact-propagator kernel)
// ---------------------------------------------------------------------------

/// Adaptive Dormand-Prince 5(4) integration of the LIF ODE system. This is
/// the oracle the kernel is checked against: it shares the spike/refractory
/// conventions (decisions at tick boundaries) but integrates the interior of
/// every tick numerically instead of using the closed-form propagator.
pub mod reference {
    use super::*;

    type State = [f64; 3]; // v, i_exc, i_inh

    fn deriv(p: &LifParams, y: &State) -> State {
        let c_nf = p.c_m_pf / 1000.0;
        [
            -(y[0] - p.e_l_mv) / p.tau_m_ms + (y[1] + y[2] + p.i_offset_na) / c_nf,
            -y[1] / p.tau_syn_exc_ms,
            -y[2] / p.tau_syn_inh_ms,
        ]
    }

    fn dp45_step(p: &LifParams, y: &State, h: f64) -> (State, State, f64) {
        const A: [[f64; 6]; 6] = [
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
            ],
            [
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
            ],
            [
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        const B5: [f64; 7] = [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
            0.0,
        ];
        const B4: [f64; 7] = [
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ];
        let mut k = [[0.0f64; 3]; 7];
        k[0] = deriv(p, y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                if a != 0.0 {
                    for d in 0..3 {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            k[s] = deriv(p, &ys);
        }
        let mut y5 = *y;
        let mut y4 = *y;
        for (j, kj) in k.iter().enumerate() {
            for d in 0..3 {
                y5[d] += h * B5[j] * kj[d];
                y4[d] += h * B4[j] * kj[d];
            }
        }
        let err = (0..3)
            .map(|d| (y5[d] - y4[d]).abs())
            .fold(0.0f64, f64::max);
        (y5, y4, err)
    }

    /// Integrate one tick (length `DT_MS`) adaptively to ~1e-12 tolerance.
    fn integrate_tick(p: &LifParams, mut y: State) -> State {
        let mut t = 0.0f64;
        let mut h = DT_MS;
        let tol = 1e-12;
        let mut guard = 0;
        while t < DT_MS - 1e-15 {
            h = h.min(DT_MS - t);
            let (y5, _y4, err) = dp45_step(p, &y, h);
            if err <= tol || h <= 1e-9 {
                y = y5;
                t += h;
                h *= if err > 0.0 { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) } else { 5.0 };
            } else {
                h *= (0.9 * (tol / err).powf(0.2)).clamp(0.2, 1.0);
            }
            guard += 1;
            if guard > 10_000 {
                break;
            }
        }
        y
    }

    /// Membrane trace at every tick boundary for a fixed arrival schedule,
    /// replicating the kernel's spike and refractory conventions.
    pub fn membrane_trace(
        p: &LifParams,
        arrivals: &[(Tick, f64, SynKind)],
        n_ticks: Tick,
    ) -> Vec<f64> {
        let mut y: State = [p.v_init_mv, 0.0, 0.0];
        let mut refr_until: Tick = 0;
        let ref_ticks = ms_to_ticks(p.t_ref_ms);
        let mut out = Vec::with_capacity(n_ticks as usize);
        let mut ai = 0;
        for t in 0..n_ticks {
            while ai < arrivals.len() && arrivals[ai].0 == t {
                let (_, w, kind) = arrivals[ai];
                match kind {
                    SynKind::Excitatory | SynKind::Trigger => y[1] += w,
                    SynKind::Inhibitory => y[2] += w,
                    SynKind::Facilitatory => {}
                }
                ai += 1;
            }
            if t < refr_until {
                // Clamped membrane; currents keep evolving.
                let cur = integrate_tick(p, [p.v_reset_mv, y[1], y[2]]);
                y = [p.v_reset_mv, cur[1], cur[2]];
            } else {
                y = integrate_tick(p, y);
                if y[0] >= p.v_th_mv {
                    y[0] = p.v_reset_mv;
                    refr_until = t + ref_ticks;
                }
            }
            out.push(y[0]);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// Kernel-versus-oracle membrane fidelity over random arrival sequences.
pub fn check_kernel_fidelity(seed: u64, sequences: u32, tol_mv: f64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let param_sets = [
        table4::sptc(),
        table4::tde(),
        table4::int(),
        table4::wta(),
        table4::gi(),
        table4::ofi(),
    ];
    let n_ticks = ms_to_ticks(100.0);
    let mut worst = 0.0f64;
    for _ in 0..sequences {
        let p = param_sets[rng.gen_range(0..param_sets.len())];
        let n_arr = rng.gen_range(5..40);
        let mut arrivals: Vec<(Tick, f64, SynKind)> = (0..n_arr)
            .map(|_| {
                let t = rng.gen_range(0..n_ticks);
                if rng.gen_bool(0.7) {
                    (t, rng.gen_range(0.05..5.0), SynKind::Excitatory)
                } else {
                    (t, -rng.gen_range(0.05..5.0), SynKind::Inhibitory)
                }
            })
            .collect();
        arrivals.sort_by_key(|a| a.0);

        let oracle = reference::membrane_trace(&p, &arrivals, n_ticks);

        let kernel = LifKernel::new(p).unwrap();
        let mut s = kernel.initial_state();
        let mut ai = 0;
        for t in 0..n_ticks {
            while ai < arrivals.len() && arrivals[ai].0 == t {
                kernel.apply_arrival(&mut s, arrivals[ai].1, arrivals[ai].2);
                ai += 1;
            }
            kernel.step(&mut s, t);
            let d = (s.v_mv - oracle[t as usize]).abs();
            worst = worst.max(d);
        }
    }
    CheckOutcome::new(
        "kernel_fidelity",
        worst < tol_mv,
        format!("max |dV| = {worst:.3e} mV over {sequences} sequences (tol {tol_mv} mV)"),
    )
}

/// TDE burst counts non-increasing over positive dt; zero for negative dt.
/// Accepts the kernel to check so a sabotaged decay is catchable.
pub fn check_tde_monotonicity(kernel: &TdeKernel, trig_weight_na: f64) -> CheckOutcome {
    let burst = |dt_ms: f64| -> usize {
        let mut s = kernel.initial_state();
        let (fac_tick, trig_tick) = if dt_ms >= 0.0 {
            (0, ms_to_ticks(dt_ms))
        } else {
            (ms_to_ticks(-dt_ms), 0)
        };
        let horizon = fac_tick.max(trig_tick) + ms_to_ticks(200.0);
        let mut n = 0;
        for t in 0..horizon {
            if t == fac_tick {
                kernel.arm(&mut s, t);
            }
            if t == trig_tick {
                kernel.trigger(&mut s, trig_weight_na, t);
            }
            if kernel.step(&mut s, t) {
                n += 1;
            }
        }
        n
    };
    let grid = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
    let counts: Vec<usize> = grid.iter().map(|&dt| burst(dt)).collect();
    let negatives: Vec<usize> = grid.iter().map(|&dt| burst(-dt)).collect();
    let monotone = counts.windows(2).all(|w| w[1] <= w[0]);
    let responsive = counts[0] >= 1;
    let causal = negatives.iter().all(|&n| n == 0);
    CheckOutcome::new(
        "tde_monotonicity",
        monotone && responsive && causal,
        format!("bursts over dt grid {grid:?} ms: {counts:?}; negative-dt bursts {negatives:?}"),
    )
}

/// Sustained INT drive at a column vetoes that WTA direction and its
/// neighbours while winners keep appearing elsewhere.
pub fn check_wta_veto(cfg: &NetConfig, seconds: f64) -> CheckOutcome {
    let mut net = match AvoidanceNet::assemble(cfg, RecordPlan::decision()) {
        Ok(n) => n,
        Err(e) => return CheckOutcome::new("wta_veto", false, e.to_string()),
    };
    let col = 32u32;
    let ticks = (seconds * 1000.0 / DT_MS) as u64;
    let drive_period = ms_to_ticks(2.0);
    let mut t = 0;
    while t < ticks {
        if let Some(int_lr) = net.pops.int_lr {
            net.net.inject(int_lr, col, 5.0, SynKind::Excitatory, 1).unwrap();
        }
        net.net.advance(drive_period).unwrap();
        t += drive_period;
    }
    let wta = net.pops.wta.unwrap();
    let mut hist = [0u32; 64];
    for s in net.net.record().spikes(wta) {
        hist[s.index as usize] += 1;
    }
    let vetoed: u32 = (29..=35).map(|i| hist[i]).sum();
    let elsewhere: u32 = (0..64).filter(|i| !(29..=35).contains(i)).map(|i| hist[i]).sum();
    CheckOutcome::new(
        "wta_veto",
        vetoed == 0 && elsewhere > 0,
        format!("winners in vetoed band 29..=35: {vetoed}; elsewhere: {elsewhere}"),
    )
}

/// Free-running inverse WTA (no vision): the winner wanders; the histogram
/// entropy over a minute exceeds 3 bits.
pub fn check_free_wta_entropy(cfg: &NetConfig, seconds: f64) -> CheckOutcome {
    let reduced = NetConfig {
        sizes: PopSizes {
            sptc_cols: 0,
            sptc_rows: 0,
            et: 0,
            ofi: 0,
            mot: 0,
            pois2: 0,
            ..cfg.sizes
        },
        ..cfg.clone()
    };
    let mut net = match AvoidanceNet::assemble(&reduced, RecordPlan::decision()) {
        Ok(n) => n,
        Err(e) => return CheckOutcome::new("free_wta_entropy", false, e.to_string()),
    };
    net.net.advance((seconds * 1000.0 / DT_MS) as u64).unwrap();
    let wta = net.pops.wta.unwrap();
    let mut hist = [0f64; 64];
    let mut total = 0f64;
    for s in net.net.record().spikes(wta) {
        hist[s.index as usize] += 1.0;
        total += 1.0;
    }
    if total == 0.0 {
        return CheckOutcome::new("free_wta_entropy", false, "no winner spikes".into());
    }
    let entropy: f64 = hist
        .iter()
        .filter(|&&n| n > 0.0)
        .map(|&n| {
            let p = n / total;
            -p * p.log2()
        })
        .sum();
    CheckOutcome::new(
        "free_wta_entropy",
        entropy > 3.0,
        format!("winner entropy {entropy:.2} bits over {total} spikes"),
    )
}

/// During a motor wave the WTA is silent and the SPTC output rate collapses
/// by at least 90% versus the preceding intersaccade.
pub fn check_saccadic_suppression(cfg: &NetConfig) -> CheckOutcome {
    let mut net = match AvoidanceNet::assemble(cfg, RecordPlan::all()) {
        Ok(n) => n,
        Err(e) => return CheckOutcome::new("saccadic_suppression", false, e.to_string()),
    };
    let sptc = net.pops.sptc.unwrap();
    let wta = net.pops.wta.unwrap();
    let cols = cfg.sizes.sptc_cols;
    let rows = cfg.sizes.sptc_rows;
    // Steady visual drive: a vertical edge sweeping the field, one
    // macropixel column pair every 10 ms.
    let drive = |net: &mut AvoidanceNet, span_ms: f64| {
        let mut t = 0u64;
        let span = ms_to_ticks(span_ms);
        let mut col = 0u32;
        while t < span {
            for r in 0..rows {
                for c in [col % cols, (col + 1) % cols] {
                    let idx = r * cols + c;
                    net.net.inject(sptc, idx, cfg.sptc_input_na, SynKind::Excitatory, 1).unwrap();
                }
            }
            col = (col + 1) % cols;
            net.net.advance(ms_to_ticks(10.0)).unwrap();
            t += ms_to_ticks(10.0);
        }
    };
    // Phase 1: 1 s of intersaccade-like drive.
    drive(&mut net, 1000.0);
    let sptc_before = net.net.record().spikes(sptc).len();
    let t_wave_start = net.net.tick();
    // Phase 2: force a winner; its motor wave suppresses everything.
    net.force_wta_spike(10).unwrap();
    net.net.advance(ms_to_ticks(20.0)).unwrap();
    let wta_at_wave = net.net.record().spikes(wta).len();
    let sptc_at_wave = net.net.record().spikes(sptc).len();
    drive(&mut net, 500.0);
    let sptc_during = net.net.record().spikes(sptc).len() - sptc_at_wave;
    let wta_during = net
        .net
        .record()
        .spikes(wta)
        .iter()
        .filter(|s| s.tick > t_wave_start + ms_to_ticks(20.0))
        .count()
        .min(net.net.record().spikes(wta).len() - wta_at_wave);
    let before_rate = sptc_before as f64 / 1.0;
    let during_rate = sptc_during as f64 / 0.5;
    let suppressed = during_rate <= 0.1 * before_rate;
    CheckOutcome::new(
        "saccadic_suppression",
        suppressed && wta_during == 0 && sptc_before > 0,
        format!(
            "SPTC rate {before_rate:.0}/s before vs {during_rate:.0}/s during wave; \
             WTA spikes during wave: {wta_during}"
        ),
    )
}

/// MOT1 and MOT2 never both spike within the same 50 ms window.
pub fn check_motor_exclusivity(cfg: &NetConfig, seconds: f64) -> CheckOutcome {
    let mut net = match AvoidanceNet::assemble(cfg, RecordPlan::decision()) {
        Ok(n) => n,
        Err(e) => return CheckOutcome::new("motor_exclusivity", false, e.to_string()),
    };
    net.net.advance((seconds * 1000.0 / DT_MS) as u64).unwrap();
    let m1 = net.net.record().spikes(net.pops.mot1.unwrap());
    let m2 = net.net.record().spikes(net.pops.mot2.unwrap());
    let window = ms_to_ticks(50.0);
    let mut i = 0usize;
    let mut violations = 0usize;
    for s1 in m1 {
        while i < m2.len() && m2[i].tick + window < s1.tick {
            i += 1;
        }
        if i < m2.len() && m2[i].tick <= s1.tick + window {
            violations += 1;
        }
    }
    CheckOutcome::new(
        "motor_exclusivity",
        violations == 0 && (!m1.is_empty() || !m2.is_empty()),
        format!(
            "{} MOT1 / {} MOT2 spikes over {seconds} s, {} co-active 50 ms windows",
            m1.len(),
            m2.len(),
            violations
        ),
    )
}

/// Wave propagation: injection at the chain head visits every neuron with a
/// constant per-hop interval of one synaptic delay plus the (fixed) firing
/// latency, jitter below one tick.
pub fn check_wave_timing(cfg: &NetConfig) -> CheckOutcome {
    let quiet = NetConfig {
        sizes: PopSizes { pois1: 0, pois2: 0, ..cfg.sizes },
        ..cfg.clone()
    };
    let mut net = match AvoidanceNet::assemble(&quiet, RecordPlan::decision()) {
        Ok(n) => n,
        Err(e) => return CheckOutcome::new("mot_wave_timing", false, e.to_string()),
    };
    let mot1 = net.pops.mot1.unwrap();
    net.net.inject(mot1, 0, 10.0, SynKind::Excitatory, 1).unwrap();
    net.net.advance(ms_to_ticks(1100.0)).unwrap();
    let spikes = net.net.record().spikes(mot1);
    if spikes.len() != cfg.sizes.mot as usize {
        return CheckOutcome::new(
            "mot_wave_timing",
            false,
            format!("expected {} chain spikes, got {}", cfg.sizes.mot, spikes.len()),
        );
    }
    let intervals: Vec<Tick> = spikes.windows(2).map(|w| w[1].tick - w[0].tick).collect();
    let min = *intervals.iter().min().unwrap();
    let max = *intervals.iter().max().unwrap();
    let hop_ms = min as f64 * DT_MS;
    let ordered = spikes.iter().enumerate().all(|(k, s)| s.index == k as u32);
    CheckOutcome::new(
        "mot_wave_timing",
        ordered && max - min <= 1 && (10.0..=11.0).contains(&hop_ms),
        format!(
            "hop interval {:.1}..{:.1} ms (delay 10 ms + threshold rise), jitter {} tick(s)",
            min as f64 * DT_MS,
            max as f64 * DT_MS,
            max - min
        ),
    )
}

/// No update cycle emits more than the event cap.
pub fn check_event_cap() -> CheckOutcome {
    let cam = CameraModel::default();
    let a = Frame::filled(cam.width, cam.height, 0.0);
    let b = Frame::filled(cam.width, cam.height, 1.0);
    let ev = crate::vision::generate_events(&a, &b, 0, &cam);
    CheckOutcome::new(
        "event_cap",
        ev.len() == cam.event_cap,
        format!("full-frame change produced {} events (cap {})", ev.len(), cam.event_cap),
    )
}

/// Bit-exact reruns: identical seeds and config give identical rasters and
/// trajectories.
pub fn check_determinism(cfg: &NetConfig) -> CheckOutcome {
    let env = generate_environment(EnvKind::Clutter { density_pct: 10.0 }, 3, WorldConfig::default())
        .unwrap();
    let opts = EpisodeOptions {
        net: cfg.clone(),
        budget_s: 3.0,
        ..EpisodeOptions::default()
    };
    let a = run_episode(&env, &opts);
    let b = run_episode(&env, &opts);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let same = a.trajectory == b.trajectory
                && a.rasters == b.rasters
                && a.outcome == b.outcome;
            CheckOutcome::new(
                "determinism",
                same,
                format!(
                    "3 s episode rerun: {} trajectory samples, {} spikes, bit-identical = {same}",
                    a.trajectory.len(),
                    a.rasters.total_spikes()
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => CheckOutcome::new("determinism", false, e.to_string()),
    }
}

/// Assembled census within 20% of ~4k neurons / ~300k synapses.
pub fn check_census(cfg: &NetConfig) -> CheckOutcome {
    match AvoidanceNet::assemble(cfg, RecordPlan::decision()) {
        Ok(net) => {
            let n = net.net.neuron_count() as f64;
            let s = net.net.synapse_count() as f64;
            let ok = (n - 4000.0).abs() / 4000.0 < 0.2 && (s - 300_000.0).abs() / 300_000.0 < 0.2;
            CheckOutcome::new("network_census", ok, format!("{n} neurons, {s} synapses"))
        }
        Err(e) => CheckOutcome::new("network_census", false, e.to_string()),
    }
}

/// Refractory floor on inter-spike intervals, checked on a driven neuron.
pub fn check_refractory() -> CheckOutcome {
    let p = table4::wta();
    let kernel = LifKernel::new(p).unwrap();
    let mut s: LifState = kernel.initial_state();
    let mut spikes = Vec::new();
    for t in 0..ms_to_ticks(500.0) {
        kernel.apply_arrival(&mut s, 3.0, SynKind::Excitatory);
        if kernel.step(&mut s, t) {
            spikes.push(t);
        }
    }
    let min_isi = spikes.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(Tick::MAX);
    CheckOutcome::new(
        "refractory_floor",
        !spikes.is_empty() && min_isi >= ms_to_ticks(p.t_ref_ms),
        format!("min ISI {} ticks (t_ref {} ticks)", min_isi, ms_to_ticks(p.t_ref_ms)),
    )
}

/// The full release gate.
pub fn run_all(cfg: &NetConfig) -> Vec<CheckOutcome> {
    let tde = TdeKernel::new(TdeParams { lif: table4::tde(), tau_fac_ms: cfg.tau_fac_ms }).unwrap();
    vec![
        check_kernel_fidelity(17, 50, 0.1),
        check_tde_monotonicity(&tde, cfg.weights.sptc_tde_na),
        check_refractory(),
        check_event_cap(),
        check_census(cfg),
        check_wave_timing(cfg),
        check_free_wta_entropy(cfg, 60.0),
        check_wta_veto(cfg, 60.0),
        check_saccadic_suppression(cfg),
        check_motor_exclusivity(cfg, 60.0),
        check_determinism(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_kernel_on_random_sequences() {
        let out = check_kernel_fidelity(5, 10, 0.1);
        assert!(out.pass, "{}", out.detail);
    }

    #[test]
    fn tde_check_passes_with_table_params() {
        let tde =
            TdeKernel::new(TdeParams { lif: table4::tde(), tau_fac_ms: 60.0 }).unwrap();
        let out = check_tde_monotonicity(&tde, 4.0);
        assert!(out.pass, "{}", out.detail);
    }

    #[test]
    fn tde_check_catches_wrong_decay_sign() {
        // A gain that grows with dt (negative tau) inverts the burst order.
        let tde = TdeKernel {
            lif: LifKernel::new(table4::tde()).unwrap(),
            tau_fac_ms: -60.0,
        };
        let out = check_tde_monotonicity(&tde, 4.0);
        assert!(!out.pass, "sabotaged decay must fail: {}", out.detail);
    }

    #[test]
    fn event_cap_check() {
        assert!(check_event_cap().pass);
    }

    #[test]
    fn refractory_check() {
        let out = check_refractory();
        assert!(out.pass, "{}", out.detail);
    }
}
