use thiserror::Error;

use crate::snn::{
    ms_to_ticks, Connection, Network, NetworkSpec, NeuronModel, PoissonSource, PopulationSpec,
    SnnError, SpikeEvent, SynKind, TdeParams,
};
use crate::vision::CameraEvent;

use super::config::{Mot2Mapping, NetConfig};
use super::events::map_events_to_sptc;
use super::motor::{injection_index, Winner};

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Snn(#[from] SnnError),

    #[error("connection row '{row}': {reason}")]
    Assembly { row: &'static str, reason: String },
}

/// Population indices of an assembled avoidance network. Populations sized
/// zero in the config are absent.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pops {
    pub sptc: Option<usize>,
    pub tde_lr: Option<usize>,
    pub tde_rl: Option<usize>,
    pub int_lr: Option<usize>,
    pub int_rl: Option<usize>,
    pub wta: Option<usize>,
    pub gi: Option<usize>,
    pub et: Option<usize>,
    pub ofi: Option<usize>,
    pub mot1: Option<usize>,
    pub mot2: Option<usize>,
    pub pois1: Option<usize>,
    pub pois2: Option<usize>,
}

/// Which populations to record.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecordPlan {
    pub sptc: bool,
    pub tde: bool,
    pub int: bool,
    pub decision: bool,
    pub sources: bool,
}

impl RecordPlan {
    /// Decision layer only: WTA, GI, ET, OFI, MOT. The default for episodes.
    pub fn decision() -> Self {
        RecordPlan { decision: true, ..Default::default() }
    }

    /// Motion pathway: SPTC and TDE, for characterization runs.
    pub fn motion_pathway() -> Self {
        RecordPlan { sptc: true, tde: true, ..Default::default() }
    }

    pub fn all() -> Self {
        RecordPlan { sptc: true, tde: true, int: true, decision: true, sources: true }
    }
}

/// The assembled collision-avoidance network.
pub struct AvoidanceNet {
    pub net: Network,
    pub pops: Pops,
    pub cfg: NetConfig,
}

struct Builder {
    populations: Vec<PopulationSpec>,
    connections: Vec<Connection>,
}

impl Builder {
    fn add_pop(
        &mut self,
        name: &str,
        cols: u32,
        rows: u32,
        model: NeuronModel,
        record: bool,
    ) -> Option<usize> {
        if cols * rows == 0 {
            return None;
        }
        self.populations.push(PopulationSpec {
            name: name.to_string(),
            cols,
            rows,
            model,
            record,
        });
        Some(self.populations.len() - 1)
    }

    /// Emit one connection row. Skipped silently when either endpoint
    /// population is absent (reduced networks); an error when both exist but
    /// the generator produced nothing.
    fn row<F>(
        &mut self,
        name: &'static str,
        src: Option<usize>,
        dst: Option<usize>,
        gen: F,
    ) -> Result<(), NetError>
    where
        F: FnOnce(usize, usize, &mut Vec<Connection>),
    {
        let (Some(s), Some(d)) = (src, dst) else {
            return Ok(());
        };
        let before = self.connections.len();
        gen(s, d, &mut self.connections);
        if self.connections.len() == before {
            return Err(NetError::Assembly {
                row: name,
                reason: "row produced no connections".into(),
            });
        }
        Ok(())
    }
}

fn one_to_one(w: f64, kind: SynKind, delay: u32, n: u32) -> impl Fn(usize, usize, &mut Vec<Connection>) {
    move |s, d, out| {
        for i in 0..n {
            out.push(Connection {
                source: (s, i),
                target: (d, i),
                weight_na: w,
                delay_ticks: delay,
                kind,
            });
        }
    }
}

fn all_to_all(
    w: f64,
    kind: SynKind,
    delay: u32,
    ns: u32,
    nd: u32,
) -> impl Fn(usize, usize, &mut Vec<Connection>) {
    move |s, d, out| {
        for i in 0..ns {
            for j in 0..nd {
                out.push(Connection {
                    source: (s, i),
                    target: (d, j),
                    weight_na: w,
                    delay_ticks: delay,
                    kind,
                });
            }
        }
    }
}

impl AvoidanceNet {
    pub fn assemble(cfg: &NetConfig, plan: RecordPlan) -> Result<Self, NetError> {
        cfg.validate()?;
        let spec = build_spec(cfg, plan)?;
        let net = Network::build(spec.0)?;
        Ok(AvoidanceNet { net, pops: spec.1, cfg: cfg.clone() })
    }

    /// Feed one camera cycle's events into the SPTC layer as weighted input
    /// spikes, delivered one tick after the current one (the table's 0.1 ms
    /// camera-to-SPTC delay). Returns the count of rejected (out-of-range)
    /// events.
    pub fn inject_camera_events(&mut self, events: &[CameraEvent]) -> Result<usize, NetError> {
        let Some(sptc) = self.pops.sptc else {
            return Ok(events.len());
        };
        let (targets, rejected) =
            map_events_to_sptc(events, self.cfg.sizes.sptc_cols, self.cfg.sizes.sptc_rows);
        let w = self.cfg.sptc_input_na;
        for t in targets {
            self.net.inject(sptc, t, w, SynKind::Excitatory, 1)?;
        }
        Ok(rejected)
    }

    pub fn advance(&mut self, ticks: u64) -> Result<(), NetError> {
        self.net.advance(ticks)?;
        Ok(())
    }

    /// Spikes of a population appended since `cursor`; advances the cursor.
    pub fn drain_spikes(&self, pop: Option<usize>, cursor: &mut usize) -> &[SpikeEvent] {
        let Some(p) = pop else { return &[] };
        let all = self.net.record().spikes(p);
        let start = (*cursor).min(all.len());
        *cursor = all.len();
        &all[start..]
    }

    /// Force a winner by injecting a strong excitatory arrival.
    pub fn force_wta_spike(&mut self, index: u32) -> Result<(), NetError> {
        if let Some(w) = self.pops.wta {
            self.net.inject(w, index, 50.0, SynKind::Excitatory, 1)?;
        }
        Ok(())
    }
}

type SpecAndPops = (NetworkSpec, Pops);

fn build_spec(cfg: &NetConfig, plan: RecordPlan) -> Result<SpecAndPops, NetError> {
    let s = cfg.sizes;
    let cols = s.sptc_cols;
    let rows = s.sptc_rows;
    let n_sptc = cols * rows;
    let tde_params = TdeParams { lif: cfg.tde, tau_fac_ms: cfg.tau_fac_ms };
    let seed = cfg.seed;

    let mut b = Builder { populations: Vec::new(), connections: Vec::new() };
    let mut pops = Pops::default();

    pops.sptc = b.add_pop("SPTC", cols, rows, NeuronModel::Lif(cfg.sptc), plan.sptc);
    pops.tde_lr = b.add_pop("TDE_LR", cols, rows, NeuronModel::Tde(tde_params), plan.tde);
    pops.tde_rl = b.add_pop("TDE_RL", cols, rows, NeuronModel::Tde(tde_params), plan.tde);
    pops.int_lr = b.add_pop("INT_LR", cols.min(64), 1, NeuronModel::Lif(cfg.int), plan.int);
    pops.int_rl = b.add_pop("INT_RL", cols.min(64), 1, NeuronModel::Lif(cfg.int), plan.int);
    pops.wta = b.add_pop("WTA", s.wta, 1, NeuronModel::Lif(cfg.wta), plan.decision);
    pops.gi = b.add_pop("GI", s.gi, 1, NeuronModel::Lif(cfg.gi), plan.decision);
    pops.et = b.add_pop("ET", s.et, 1, NeuronModel::Lif(cfg.et), plan.decision);
    pops.ofi = b.add_pop("OFI", s.ofi, 1, NeuronModel::Lif(cfg.ofi), plan.decision);
    pops.mot1 = b.add_pop("MOT1", s.mot, 1, NeuronModel::Lif(cfg.mot), plan.decision);
    pops.mot2 = b.add_pop("MOT2", s.mot, 1, NeuronModel::Lif(cfg.mot), plan.decision);
    pops.pois1 = b.add_pop(
        "POIS1",
        s.pois1,
        1,
        NeuronModel::Poisson(PoissonSource {
            rate_hz: cfg.pois1_rate_hz,
            rng_seed: seed ^ 0x5051_0000_0000_0001,
        }),
        plan.sources,
    );
    pops.pois2 = b.add_pop(
        "POIS2",
        s.pois2,
        1,
        NeuronModel::Poisson(PoissonSource {
            rate_hz: cfg.pois2_rate_hz,
            rng_seed: seed ^ 0x5051_0000_0000_0002,
        }),
        plan.sources,
    );

    let w = cfg.weights;
    let d1 = 1u32; // 0.1 ms
    let d_chain = ms_to_ticks(10.0) as u32;

    // sEMD wiring: each TDE takes its trigger one-to-one and facilitation
    // from the neighbouring column (left neighbour for the left-right
    // population, right neighbour for right-left), within rows.
    b.row("SPTC->TDE_LR trigger one_to_one", pops.sptc, pops.tde_lr, |s1, d, out| {
        one_to_one(w.sptc_tde_na, SynKind::Trigger, d1, n_sptc)(s1, d, out)
    })?;
    b.row("SPTC->TDE_LR facilitator i to i+1", pops.sptc, pops.tde_lr, |s1, d, out| {
        for r in 0..rows {
            for c in 0..cols - 1 {
                out.push(Connection {
                    source: (s1, r * cols + c),
                    target: (d, r * cols + c + 1),
                    weight_na: w.sptc_tde_na,
                    delay_ticks: d1,
                    kind: SynKind::Facilitatory,
                });
            }
        }
    })?;
    b.row("SPTC->TDE_RL trigger one_to_one", pops.sptc, pops.tde_rl, |s1, d, out| {
        one_to_one(w.sptc_tde_na, SynKind::Trigger, d1, n_sptc)(s1, d, out)
    })?;
    b.row("SPTC->TDE_RL facilitator i+1 to i", pops.sptc, pops.tde_rl, |s1, d, out| {
        for r in 0..rows {
            for c in 0..cols - 1 {
                out.push(Connection {
                    source: (s1, r * cols + c + 1),
                    target: (d, r * cols + c),
                    weight_na: w.sptc_tde_na,
                    delay_ticks: d1,
                    kind: SynKind::Facilitatory,
                });
            }
        }
    })?;

    // Column integrators: i mod 64 to i.
    for (name, tde, int) in [
        ("TDE_LR->INT_LR i mod 64 to i", pops.tde_lr, pops.int_lr),
        ("TDE_RL->INT_RL i mod 64 to i", pops.tde_rl, pops.int_rl),
    ] {
        b.row(name, tde, int, |s1, d, out| {
            for i in 0..n_sptc {
                out.push(Connection {
                    source: (s1, i),
                    target: (d, i % cols),
                    weight_na: w.tde_int_na,
                    delay_ticks: d1,
                    kind: SynKind::Excitatory,
                });
            }
        })?;
    }

    // Obstacle veto: each INT column inhibits its WTA column and 'n_connect'
    // neighbours to each side, weights decaying -5, -3, -2, -1.5, ...
    for (name, int) in [
        ("INT_LR->WTA neighbourhood", pops.int_lr),
        ("INT_RL->WTA neighbourhood", pops.int_rl),
    ] {
        b.row(name, int, pops.wta, |s1, d, out| {
            for c in 0..cols as i64 {
                for k in 0..=cfg.n_connect as i64 {
                    let weight = cfg.int_wta_weight(k as u32);
                    for t in [c - k, c + k] {
                        if t < 0 || t >= s.wta as i64 || (k == 0 && t != c) {
                            continue;
                        }
                        out.push(Connection {
                            source: (s1, c as u32),
                            target: (d, t as u32),
                            weight_na: weight,
                            delay_ticks: d1,
                            kind: SynKind::Inhibitory,
                        });
                        if k == 0 {
                            break;
                        }
                    }
                }
            }
        })?;
    }

    // Global optic-flow integrator.
    let ofi_w = w.int_ofi_na * cfg.ofi_input_scale;
    b.row("INT_LR->OFI all_to_all", pops.int_lr, pops.ofi, |s1, d, out| {
        all_to_all(ofi_w, SynKind::Excitatory, d1, cols, s.ofi)(s1, d, out)
    })?;
    b.row("INT_RL->OFI all_to_all", pops.int_rl, pops.ofi, |s1, d, out| {
        all_to_all(ofi_w, SynKind::Excitatory, d1, cols, s.ofi)(s1, d, out)
    })?;

    // Winner to motor-chain injection.
    if cfg.mot2_mapping == Mot2Mapping::RawElementwise && s.wta > 0 && s.mot > 0 {
        return Err(NetError::Assembly {
            row: "WTA(32-53)->MOT2 63-i to 2i+32",
            reason: "element-wise reading maps WTA 32..=53 to motor indices 96..=138, \
                     outside the 96-neuron chain; use the mirrored mapping"
                .into(),
        });
    }
    b.row("WTA->MOT1 injection map", pops.wta, pops.mot1, |s1, d, out| {
        for i in 0..32u32 {
            let (_, inj) = injection_index(Winner::Wta(i));
            out.push(Connection {
                source: (s1, i),
                target: (d, inj),
                weight_na: w.wta_mot_na,
                delay_ticks: d1,
                kind: SynKind::Excitatory,
            });
        }
    })?;
    b.row("WTA->MOT2 injection map", pops.wta, pops.mot2, |s1, d, out| {
        for i in 32..64u32 {
            let (_, inj) = injection_index(Winner::Wta(i));
            out.push(Connection {
                source: (s1, i),
                target: (d, inj),
                weight_na: w.wta_mot_na,
                delay_ticks: d1,
                kind: SynKind::Excitatory,
            });
        }
    })?;

    // Soft-WTA machinery.
    b.row("WTA->GI all_to_all", pops.wta, pops.gi, |s1, d, out| {
        all_to_all(w.wta_gi_na, SynKind::Excitatory, d1, s.wta, s.gi)(s1, d, out)
    })?;
    b.row("ET->GI all_to_all", pops.et, pops.gi, |s1, d, out| {
        all_to_all(w.et_gi_na, SynKind::Excitatory, d1, s.et, s.gi)(s1, d, out)
    })?;
    b.row("GI->WTA all_to_all", pops.gi, pops.wta, |s1, d, out| {
        all_to_all(w.gi_wta_na, SynKind::Inhibitory, d1, s.gi, s.wta)(s1, d, out)
    })?;
    b.row("GI->ET all_to_all", pops.gi, pops.et, |s1, d, out| {
        all_to_all(w.gi_et_na, SynKind::Inhibitory, d1, s.gi, s.et)(s1, d, out)
    })?;
    b.row("ET->MOT1 0 to 0", pops.et, pops.mot1, |s1, d, out| {
        out.push(Connection {
            source: (s1, 0),
            target: (d, 0),
            weight_na: w.et_mot_na,
            delay_ticks: d1,
            kind: SynKind::Excitatory,
        });
    })?;
    // Local recurrent excitation keeps a winner alive over the GI feedback
    // (not shown in the connection table; self + nearest neighbour).
    b.row("WTA recurrent excitation", pops.wta, pops.wta, |s1, d, out| {
        let delay = ms_to_ticks(cfg.wta_recurrent_delay_ms).max(1) as u32;
        for i in 0..s.wta as i64 {
            for t in [i - 1, i, i + 1] {
                if t < 0 || t >= s.wta as i64 {
                    continue;
                }
                out.push(Connection {
                    source: (s1, i as u32),
                    target: (d, t as u32),
                    weight_na: cfg.wta_recurrent_na,
                    delay_ticks: delay,
                    kind: SynKind::Excitatory,
                });
            }
        }
    })?;

    // Motor populations: saccadic suppression, opponency, the delay-line
    // wave, and one-to-one self inhibition so each chain neuron fires once.
    for (mot, opp, tag) in [
        (pops.mot1, pops.mot2, 0usize),
        (pops.mot2, pops.mot1, 1usize),
    ] {
        let names: [[&'static str; 6]; 2] = [
            [
                "MOT1->WTA all_to_all",
                "MOT1->ET all_to_all",
                "MOT1->MOT2 all_to_all",
                "MOT1->Sensors all_to_all",
                "MOT1->MOT1 chain i to i+1",
                "MOT1->MOT1 self inhibition",
            ],
            [
                "MOT2->WTA all_to_all",
                "MOT2->ET all_to_all",
                "MOT2->MOT1 all_to_all",
                "MOT2->Sensors all_to_all",
                "MOT2->MOT2 chain i to i+1",
                "MOT2->MOT2 self inhibition",
            ],
        ];
        b.row(names[tag][0], mot, pops.wta, |s1, d, out| {
            all_to_all(w.mot_wta_na, SynKind::Inhibitory, d1, s.mot, s.wta)(s1, d, out)
        })?;
        b.row(names[tag][1], mot, pops.et, |s1, d, out| {
            all_to_all(w.mot_et_na, SynKind::Inhibitory, d1, s.mot, s.et)(s1, d, out)
        })?;
        b.row(names[tag][2], mot, opp, |s1, d, out| {
            all_to_all(w.mot_opponent_na, SynKind::Inhibitory, d1, s.mot, s.mot)(s1, d, out)
        })?;
        b.row(names[tag][3], mot, pops.sptc, |s1, d, out| {
            all_to_all(w.mot_sensors_na, SynKind::Inhibitory, d1, s.mot, n_sptc)(s1, d, out)
        })?;
        b.row(names[tag][4], mot, mot, |s1, d, out| {
            for i in 0..s.mot - 1 {
                out.push(Connection {
                    source: (s1, i),
                    target: (d, i + 1),
                    weight_na: w.mot_chain_na,
                    delay_ticks: d_chain,
                    kind: SynKind::Excitatory,
                });
            }
        })?;
        b.row(names[tag][5], mot, mot, |s1, d, out| {
            one_to_one(w.mot_self_inh_na, SynKind::Inhibitory, d1, s.mot)(s1, d, out)
        })?;
    }

    // Poisson drive.
    b.row("POIS1->WTA one_to_one", pops.pois1, pops.wta, |s1, d, out| {
        one_to_one(w.pois1_wta_na, SynKind::Excitatory, d1, s.pois1)(s1, d, out)
    })?;
    b.row("POIS2->ET one_to_one", pops.pois2, pops.et, |s1, d, out| {
        one_to_one(w.pois2_et_na * cfg.et_drive_scale, SynKind::Excitatory, d1, s.pois2)(
            s1, d, out,
        )
    })?;

    Ok((
        NetworkSpec {
            populations: b.populations,
            connections: b.connections,
            pending_cap: None,
        },
        pops,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_network_census_matches_reported_totals() {
        let net = AvoidanceNet::assemble(&NetConfig::default(), RecordPlan::decision()).unwrap();
        let neurons = net.net.neuron_count() as f64;
        let synapses = net.net.synapse_count() as f64;
        // Within 20% of ~4k neurons and ~300k synapses.
        assert!((neurons - 4000.0).abs() / 4000.0 < 0.20, "neurons = {neurons}");
        assert!((synapses - 300_000.0).abs() / 300_000.0 < 0.20, "synapses = {synapses}");
    }

    #[test]
    fn empty_spec_yields_empty_network() {
        let cfg = NetConfig {
            sizes: crate::net::PopSizes {
                sptc_cols: 0,
                sptc_rows: 0,
                wta: 0,
                gi: 0,
                et: 0,
                ofi: 0,
                mot: 0,
                pois1: 0,
                pois2: 0,
            },
            ..NetConfig::default()
        };
        let mut net = AvoidanceNet::assemble(&cfg, RecordPlan::all()).unwrap();
        assert_eq!(net.net.neuron_count(), 0);
        let rec = net.net.run(1000).unwrap();
        assert!(rec.is_empty());
    }

    #[test]
    fn raw_mot2_mapping_is_rejected_as_out_of_range() {
        let cfg = NetConfig {
            mot2_mapping: Mot2Mapping::RawElementwise,
            ..NetConfig::default()
        };
        match AvoidanceNet::assemble(&cfg, RecordPlan::decision()) {
            Err(NetError::Assembly { .. }) => {}
            Err(other) => panic!("unexpected error {other}"),
            Ok(_) => panic!("raw element-wise mapping must be rejected"),
        }
    }

    #[test]
    fn wiring_dump_contains_every_table_row_kind() {
        let net = AvoidanceNet::assemble(&NetConfig::default(), RecordPlan::decision()).unwrap();
        let entries: Vec<_> = net.net.wiring().collect();
        assert_eq!(entries.len(), net.net.synapse_count());
        let has = |sp: &str, dp: &str, w: f64, kind: SynKind| {
            entries.iter().any(|e| {
                e.src_pop == sp && e.dst_pop == dp && (e.weight_na - w).abs() < 1e-12 && e.kind == kind
            })
        };
        assert!(has("SPTC", "TDE_LR", 4.0, SynKind::Trigger));
        assert!(has("SPTC", "TDE_RL", 4.0, SynKind::Facilitatory));
        assert!(has("TDE_LR", "INT_LR", 1.0, SynKind::Excitatory));
        assert!(has("INT_LR", "WTA", -5.0, SynKind::Inhibitory));
        assert!(has("INT_LR", "WTA", -1.5, SynKind::Inhibitory));
        assert!(has("INT_RL", "OFI", 1e-4 * NetConfig::default().ofi_input_scale, SynKind::Excitatory));
        assert!(has("WTA", "GI", 10.0, SynKind::Excitatory));
        assert!(has("GI", "WTA", -10.0, SynKind::Inhibitory));
        assert!(has("MOT1", "SPTC", -30.0, SynKind::Inhibitory));
        assert!(has("MOT1", "MOT1", 10.0, SynKind::Excitatory));
        assert!(has("MOT2", "MOT1", -10.0, SynKind::Inhibitory));
        assert!(has("POIS1", "WTA", 1.0, SynKind::Excitatory));
        assert!(has("ET", "MOT1", 10.0, SynKind::Excitatory));
    }

    #[test]
    fn wta_to_mot_mapping_rows() {
        let net = AvoidanceNet::assemble(&NetConfig::default(), RecordPlan::decision()).unwrap();
        let entries: Vec<_> = net.net.wiring().collect();
        let inj = |i: u32| {
            entries
                .iter()
                .find(|e| e.src_pop == "WTA" && e.src_idx == i && e.dst_pop.starts_with("MOT"))
                .map(|e| (e.dst_pop.clone(), e.dst_idx))
                .unwrap()
        };
        assert_eq!(inj(0), ("MOT1".to_string(), 50));
        assert_eq!(inj(8), ("MOT1".to_string(), 50));
        assert_eq!(inj(9), ("MOT1".to_string(), 50));
        assert_eq!(inj(31), ("MOT1".to_string(), 94));
        assert_eq!(inj(32), ("MOT2".to_string(), 94));
        assert_eq!(inj(54), ("MOT2".to_string(), 50));
        assert_eq!(inj(63), ("MOT2".to_string(), 50));
    }
}
