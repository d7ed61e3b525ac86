// Calibration workbench (dev only): prints tuning curves and latencies for
// candidate parameter sets so defaults can be frozen.
use oflow_core::characterize::*;
use oflow_core::net::{config::table4, AvoidanceNet, NetConfig, PopSizes, RecordPlan};
use oflow_core::snn::{ms_to_ticks, SynKind};
use oflow_core::vision::CameraModel;

fn velocity_scan(tau_px: f64, theta: f64, tau_fac: f64, w_sptc: f64, stages: u32) {
    let cam = CameraModel::default();
    let net_cfg = NetConfig { tau_fac_ms: tau_fac, sptc_input_na: w_sptc, ..NetConfig::default() };
    let cfg = CharacterizeConfig {
        contrasts_printed: vec![1.0],
        repetitions: 2,
        sensor: SynthSensor { stages, tau_px_ms: tau_px, threshold: theta, ..SynthSensor::default() },
        ..CharacterizeConfig::default()
    };
    let res = run_characterization(&cfg, &net_cfg, &cam).unwrap();
    let (pref, null) = res.velocity_tuning(1.0);
    print!("tau_px={tau_px} th={theta} tau_fac={tau_fac} w={w_sptc} st={stages} | pref: ");
    for p in &pref.points {
        print!("{:.0}:{:.3} ", p.frequency_hz * 10.0, p.mean_norm);
    }
    print!("| null: ");
    for p in &null.points {
        print!("{:.3} ", p.mean_norm);
    }
    let events: Vec<usize> = res
        .runs
        .iter()
        .filter(|r| r.rep == 0 && matches!(r.drift, Drift::LeftToRight))
        .map(|r| r.event_count)
        .collect();
    println!("| events {events:?}");
}

fn contrast_scan(tau_px: f64, theta: f64, tau_fac: f64, w_sptc: f64, stages: u32) {
    let cam = CameraModel::default();
    let net_cfg = NetConfig { tau_fac_ms: tau_fac, sptc_input_na: w_sptc, ..NetConfig::default() };
    let cfg = CharacterizeConfig {
        frequencies_hz: vec![5.0],
        repetitions: 2,
        sensor: SynthSensor { stages, tau_px_ms: tau_px, threshold: theta, ..SynthSensor::default() },
        ..CharacterizeConfig::default()
    };
    let res = run_characterization(&cfg, &net_cfg, &cam).unwrap();
    let resp = res.contrast_response(5.0);
    print!("  contrast@5Hz: ");
    for (c, v) in &resp {
        print!("{c:.3}:{v:.3} ");
    }
    println!("| 50% at {:?}", res.half_contrast_crossing(5.0));
}

fn et_latency(scale: f64) {
    // ET free-running from reset with only POIS2 drive: time to first spike.
    let cfg = NetConfig {
        sizes: PopSizes {
            sptc_cols: 0,
            sptc_rows: 0,
            wta: 0,
            gi: 0,
            ofi: 0,
            mot: 0,
            pois1: 0,
            ..PopSizes::default()
        },
        et_drive_scale: scale,
        ..NetConfig::default()
    };
    let mut lat = vec![];
    for seed in 0..20u64 {
        let mut net = AvoidanceNet::assemble(
            &NetConfig { seed, ..cfg.clone() },
            RecordPlan::decision(),
        )
        .unwrap();
        net.net.advance(ms_to_ticks(4000.0)).unwrap();
        let et = net.pops.et.unwrap();
        let t = net.net.record().spikes(et).first().map(|s| s.tick as f64 * 0.1);
        lat.push(t.unwrap_or(4000.0));
    }
    let mean = lat.iter().sum::<f64>() / lat.len() as f64;
    let mn = lat.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = lat.iter().cloned().fold(0.0f64, f64::max);
    println!("et scale {scale}: mean first-spike {mean:.0} ms (min {mn:.0}, max {mx:.0})");
}

fn sptc_volley_check(w: f64) {
    // Does the SPTC fire for the canonical volley patterns?
    use oflow_core::snn::{lif_step, LifKernel};
    let k = LifKernel::new(table4::sptc()).unwrap();
    let run = |pattern: &[(u64, usize)]| -> usize {
        let mut s = k.initial_state();
        let mut spikes = 0;
        for t in 0..2000u64 {
            let arr: Vec<(f64, SynKind)> = pattern
                .iter()
                .filter(|&&(pt, _)| pt == t)
                .flat_map(|&(_, n)| std::iter::repeat((w, SynKind::Excitatory)).take(n))
                .collect();
            let (ns, sp) = lif_step(&s, &k, &arr, t);
            s = ns;
            if sp {
                spikes += 1;
            }
        }
        spikes
    };
    println!(
        "w={w}: 1ev={} 2ev@0={} 3ev@0={} 2+2@5ms={} 2+2@10ms={} 2+2@15ms={} (2,2,2,2)@5ms-steps={}",
        run(&[(0, 1)]),
        run(&[(0, 2)]),
        run(&[(0, 3)]),
        run(&[(0, 2), (50, 2)]),
        run(&[(0, 2), (100, 2)]),
        run(&[(0, 2), (150, 2)]),
        run(&[(0, 2), (50, 2), (100, 2), (150, 2)]),
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("sptc");
    match mode {
        "sptc" => {
            for w in [0.0008, 0.001, 0.0011, 0.0012, 0.0015] {
                sptc_volley_check(w);
            }
        }
        "vel" => {
            let tau_px: f64 = args[2].parse().unwrap();
            let theta: f64 = args[3].parse().unwrap();
            let tau_fac: f64 = args[4].parse().unwrap();
            let w: f64 = args[5].parse().unwrap();
            let stages: u32 = args.get(6).map_or(3, |s| s.parse().unwrap());
            velocity_scan(tau_px, theta, tau_fac, w, stages);
        }
        "con" => {
            let tau_px: f64 = args[2].parse().unwrap();
            let theta: f64 = args[3].parse().unwrap();
            let tau_fac: f64 = args[4].parse().unwrap();
            let w: f64 = args[5].parse().unwrap();
            let stages: u32 = args.get(6).map_or(3, |s| s.parse().unwrap());
            contrast_scan(tau_px, theta, tau_fac, w, stages);
        }
        "et" => {
            for scale in [0.5, 0.55, 0.6, 0.62, 0.65, 0.7, 0.8, 1.0] {
                et_latency(scale);
            }
        }
        "trace" => {
            // Event raster of a few columns, one rep, for volley inspection.
            let freq: f64 = args[2].parse().unwrap();
            let tau_px: f64 = args[3].parse().unwrap();
            let theta: f64 = args[4].parse().unwrap();
            let cam = CameraModel::default();
            let sensor = SynthSensor {
                tau_px_ms: tau_px,
                threshold: theta,
                ..SynthSensor::default()
            };
            let spec = GratingSpec::new(freq, 1.0, Drift::LeftToRight);
            let events = synth_grating_events(&spec, &sensor, &cam, 99);
            for col in 60..66u16 {
                let times: Vec<f64> = events
                    .iter()
                    .filter(|e| e.x == col && e.y == 0)
                    .map(|e| e.t_us as f64 / 1000.0)
                    .collect();
                println!("col {col} row0 events (ms): {times:?}");
            }
            println!("total events {}", events.len());
        }
        "swing" => {
            // Peak-to-peak filtered amplitude per frequency (steady state).
            let tau_px: f64 = args[2].parse().unwrap();
            let stages: usize = args.get(3).map_or(3, |s| s.parse().unwrap());
            for f in [0.1, 0.5, 1.0, 2.5, 5.0, 10.0] {
                let dt = 0.005f64;
                let alpha = 1.0 - (-(dt * 1e3) / tau_px).exp();
                let mut lp = vec![0.5f64; stages];
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                let n = (8.0 / dt) as usize;
                for k in 0..n {
                    let t = k as f64 * dt;
                    let phase = (t * f).rem_euclid(1.0);
                    let mut x = if phase < 0.5 { 1.0 } else { 0.0 };
                    for s in lp.iter_mut() {
                        *s += alpha * (x - *s);
                        x = *s;
                    }
                    if t > 4.0f64.min(4.0 / f) {
                        lo = lo.min(x);
                        hi = hi.max(x);
                    }
                }
                println!("f={f}: swing {:.4}", hi - lo);
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}
