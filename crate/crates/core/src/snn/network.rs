use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LifKernel, LifParams, SimClock, SnnError, SpikeRecord, TdeParams, Tick, DT_MS};

/// Synapse kind. Facilitatory and trigger synapses are only legal onto TDE
/// populations; excitatory weights are non-negative, inhibitory non-positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynKind {
    Excitatory,
    Inhibitory,
    Facilitatory,
    Trigger,
}

impl SynKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SynKind::Excitatory => "excitatory",
            SynKind::Inhibitory => "inhibitory",
            SynKind::Facilitatory => "facilitatory",
            SynKind::Trigger => "trigger",
        }
    }
}

/// Poisson spike source: an independent Bernoulli draw per tick with
/// p = rate * dt, realised by sampling inter-spike gaps geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSource {
    pub rate_hz: f64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone)]
pub enum NeuronModel {
    Lif(LifParams),
    Tde(TdeParams),
    Poisson(PoissonSource),
    /// Spike list (tick, neuron index), sorted by tick.
    Scheduled(Vec<(Tick, u32)>),
}

#[derive(Debug, Clone)]
pub struct PopulationSpec {
    pub name: String,
    pub cols: u32,
    pub rows: u32,
    pub model: NeuronModel,
    pub record: bool,
}

impl PopulationSpec {
    pub fn size(&self) -> u32 {
        self.cols * self.rows
    }
}

/// A single delayed, weighted connection between two neurons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub source: (usize, u32),
    pub target: (usize, u32),
    pub weight_na: f64,
    pub delay_ticks: u32,
    pub kind: SynKind,
}

pub const DEFAULT_PENDING_CAP: usize = 50_000_000;

#[derive(Debug, Clone, Default)]
pub struct NetworkSpec {
    pub populations: Vec<PopulationSpec>,
    pub connections: Vec<Connection>,
    /// Upper bound on in-flight deliveries before the simulation aborts.
    pub pending_cap: Option<usize>,
}

/// One realised connection, for wiring audits.
#[derive(Debug, Clone, PartialEq)]
pub struct WiringEntry {
    pub src_pop: String,
    pub src_idx: u32,
    pub dst_pop: String,
    pub dst_idx: u32,
    pub weight_na: f64,
    pub delay_ms: f64,
    pub kind: SynKind,
}

// ---------------------------------------------------------------------------
// Runtime storage
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Edge {
    tpop: u32,
    tidx: u32,
    kind: SynKind,
    delay: u32,
    weight: f64,
}

#[derive(Clone, Copy)]
struct Delivery {
    tpop: u32,
    tidx: u32,
    kind: SynKind,
    weight: f64,
}

struct TdeArrays {
    tau_fac_ms: f64,
    armed: Vec<bool>,
    fac_tick: Vec<Tick>,
}

struct NeuronPop {
    kernel: LifKernel,
    tde: Option<TdeArrays>,
    v: Vec<f64>,
    i_exc: Vec<f64>,
    i_inh: Vec<f64>,
    refr: Vec<Tick>,
    /// Bitmask of neurons that are not provably at rest.
    active: Vec<u64>,
}

const EPS_QUIESCENT: f64 = 1e-9;

impl NeuronPop {
    fn new(kernel: LifKernel, tde: Option<TdeArrays>, size: usize) -> Self {
        let at_rest = kernel.params.v_init_mv == kernel.params.e_l_mv;
        let words = size.div_ceil(64);
        let mut active = vec![0u64; words];
        if !at_rest {
            // Mark every existing neuron active; mask the tail word.
            for (wi, word) in active.iter_mut().enumerate() {
                let bits = (size - wi * 64).min(64);
                *word = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
            }
        }
        NeuronPop {
            v: vec![kernel.params.v_init_mv; size],
            i_exc: vec![0.0; size],
            i_inh: vec![0.0; size],
            refr: vec![0; size],
            active,
            kernel,
            tde,
        }
    }

    #[inline]
    fn activate(&mut self, idx: u32) {
        self.active[(idx / 64) as usize] |= 1u64 << (idx % 64);
    }

    #[inline]
    fn gain(&self, idx: usize, tick: Tick) -> f64 {
        let tde = self.tde.as_ref().expect("trigger onto non-TDE population");
        if !tde.armed[idx] {
            return 0.0;
        }
        let dt_ms = (tick - tde.fac_tick[idx]) as f64 * DT_MS;
        (-dt_ms / tde.tau_fac_ms).exp()
    }
}

enum SourcePop {
    Poisson {
        p: f64,
        rngs: Vec<ChaCha8Rng>,
        next: Vec<Tick>,
        ln_1mp: f64,
    },
    Scheduled {
        spikes: Vec<(Tick, u32)>,
        cursor: usize,
    },
}

enum PopRt {
    Neurons(NeuronPop),
    Source(SourcePop),
}

struct Population {
    name: String,
    size: u32,
    record: bool,
    rt: PopRt,
}

/// A runnable, fully-deterministic network instance.
///
/// Single-threaded; instances are self-contained and safe to run on
/// different threads with no shared mutable state.
pub struct Network {
    clock: SimClock,
    pops: Vec<Population>,
    // CSR adjacency by global source id, for O(out-degree) fan-out.
    offsets: Vec<u32>,
    edges: Vec<Edge>,
    pop_base: Vec<u32>,
    ring: Vec<Vec<Delivery>>,
    ring_mask: usize,
    pending: usize,
    pending_cap: usize,
    record: SpikeRecord,
    scratch: Vec<(u32, u32)>,
}

fn sample_gap(rng: &mut ChaCha8Rng, ln_1mp: f64) -> Tick {
    // Geometric inter-spike gap (in ticks, >= 1) equivalent to independent
    // per-tick Bernoulli draws.
    let u: f64 = rng.gen();
    ((1.0 - u).ln() / ln_1mp).floor() as Tick + 1
}

impl Network {
    /// Build a runnable network from a declarative spec.
    pub fn build(spec: NetworkSpec) -> Result<Self, SnnError> {
        let n_pops = spec.populations.len();
        let mut pops = Vec::with_capacity(n_pops);
        let mut pop_base = Vec::with_capacity(n_pops + 1);
        let mut base = 0u32;
        for ps in &spec.populations {
            pop_base.push(base);
            base += ps.size();
            let size = ps.size() as usize;
            let rt = match &ps.model {
                NeuronModel::Lif(p) => PopRt::Neurons(NeuronPop::new(LifKernel::new(*p)?, None, size)),
                NeuronModel::Tde(p) => {
                    p.validate()?;
                    let tde = TdeArrays {
                        tau_fac_ms: p.tau_fac_ms,
                        armed: vec![false; size],
                        fac_tick: vec![0; size],
                    };
                    PopRt::Neurons(NeuronPop::new(LifKernel::new(p.lif)?, Some(tde), size))
                }
                NeuronModel::Poisson(src) => {
                    let p = src.rate_hz * DT_MS * 1e-3;
                    if !(0.0..1.0).contains(&p) {
                        return Err(SnnError::BadParams(format!(
                            "poisson rate {} Hz out of range for dt {}",
                            src.rate_hz, DT_MS
                        )));
                    }
                    let ln_1mp = (1.0 - p).ln();
                    let mut rngs = Vec::with_capacity(size);
                    let mut next = Vec::with_capacity(size);
                    for i in 0..size {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            src.rng_seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        );
                        let first = if p > 0.0 {
                            sample_gap(&mut rng, ln_1mp) - 1
                        } else {
                            Tick::MAX
                        };
                        rngs.push(rng);
                        next.push(first);
                    }
                    PopRt::Source(SourcePop::Poisson { p, rngs, next, ln_1mp })
                }
                NeuronModel::Scheduled(spikes) => {
                    if spikes.windows(2).any(|w| w[1].0 < w[0].0) {
                        return Err(SnnError::UnsortedSchedule { pop: ps.name.clone() });
                    }
                    if let Some(&(_, idx)) = spikes.iter().find(|&&(_, i)| i >= ps.size()) {
                        return Err(SnnError::BadParams(format!(
                            "scheduled spike index {idx} out of range in '{}'",
                            ps.name
                        )));
                    }
                    PopRt::Source(SourcePop::Scheduled { spikes: spikes.clone(), cursor: 0 })
                }
            };
            pops.push(Population {
                name: ps.name.clone(),
                size: ps.size(),
                record: ps.record,
                rt,
            });
        }
        pop_base.push(base);

        // Validate + bucket connections into CSR.
        let mut max_delay = 1u32;
        for (ci, c) in spec.connections.iter().enumerate() {
            let check = |side: &'static str, (p, i): (usize, u32)| -> Result<(), SnnError> {
                if p >= n_pops || i >= pops[p].size {
                    return Err(SnnError::DanglingEndpoint {
                        index: ci,
                        side,
                        pop: if p < n_pops {
                            pops[p].name.clone()
                        } else {
                            format!("#{p}")
                        },
                        neuron: i,
                    });
                }
                Ok(())
            };
            check("source", c.source)?;
            check("target", c.target)?;
            let src_name = pops[c.source.0].name.clone();
            let dst_name = pops[c.target.0].name.clone();
            let illegal = |reason: String| SnnError::IllegalConnection {
                index: ci,
                src: src_name.clone(),
                dst: dst_name.clone(),
                reason,
            };
            if c.delay_ticks < 1 {
                return Err(illegal("delay must be >= 1 tick".into()));
            }
            let dst_is_tde = matches!(
                &pops[c.target.0].rt,
                PopRt::Neurons(np) if np.tde.is_some()
            );
            let dst_is_source = matches!(&pops[c.target.0].rt, PopRt::Source(_));
            if dst_is_source {
                return Err(illegal("spike sources cannot receive connections".into()));
            }
            match c.kind {
                SynKind::Facilitatory | SynKind::Trigger if !dst_is_tde => {
                    return Err(illegal(format!(
                        "{} synapse onto non-TDE population",
                        c.kind.as_str()
                    )));
                }
                SynKind::Excitatory | SynKind::Trigger if c.weight_na < 0.0 => {
                    return Err(illegal("negative weight on excitatory/trigger synapse".into()));
                }
                SynKind::Inhibitory if c.weight_na > 0.0 => {
                    return Err(illegal("positive weight on inhibitory synapse".into()));
                }
                _ => {}
            }
            max_delay = max_delay.max(c.delay_ticks);
        }

        let total = base as usize;
        let mut counts = vec![0u32; total + 1];
        for c in &spec.connections {
            counts[(pop_base[c.source.0] + c.source.1) as usize + 1] += 1;
        }
        let mut offsets = vec![0u32; total + 1];
        for i in 0..total {
            offsets[i + 1] = offsets[i] + counts[i + 1];
        }
        let mut cursor = offsets.clone();
        let mut edges = vec![
            Edge {
                tpop: 0,
                tidx: 0,
                kind: SynKind::Excitatory,
                delay: 1,
                weight: 0.0
            };
            spec.connections.len()
        ];
        for c in &spec.connections {
            let g = (pop_base[c.source.0] + c.source.1) as usize;
            edges[cursor[g] as usize] = Edge {
                tpop: c.target.0 as u32,
                tidx: c.target.1,
                kind: c.kind,
                delay: c.delay_ticks,
                weight: c.weight_na,
            };
            cursor[g] += 1;
        }

        let ring_len = ((max_delay as usize) + 1).next_power_of_two();
        let names = pops.iter().map(|p| p.name.clone()).collect();
        Ok(Network {
            clock: SimClock::new(),
            pops,
            offsets,
            edges,
            pop_base,
            ring: (0..ring_len).map(|_| Vec::new()).collect(),
            ring_mask: ring_len - 1,
            pending: 0,
            pending_cap: spec.pending_cap.unwrap_or(DEFAULT_PENDING_CAP),
            record: SpikeRecord::new(names),
            scratch: Vec::new(),
        })
    }

    #[inline]
    pub fn tick(&self) -> Tick {
        self.clock.tick()
    }

    pub fn record(&self) -> &SpikeRecord {
        &self.record
    }

    pub fn population_count(&self) -> usize {
        self.pops.len()
    }

    pub fn population_name(&self, pop: usize) -> &str {
        &self.pops[pop].name
    }

    pub fn population_size(&self, pop: usize) -> u32 {
        self.pops[pop].size
    }

    pub fn population_by_name(&self, name: &str) -> Option<usize> {
        self.pops.iter().position(|p| p.name == name)
    }

    /// Total units across all populations, spike sources included.
    pub fn neuron_count(&self) -> usize {
        self.pops.iter().map(|p| p.size as usize).sum()
    }

    pub fn synapse_count(&self) -> usize {
        self.edges.len()
    }

    /// Membrane potential, for probes and tests.
    pub fn membrane_mv(&self, pop: usize, idx: u32) -> Option<f64> {
        match &self.pops[pop].rt {
            PopRt::Neurons(np) => np.v.get(idx as usize).copied(),
            _ => None,
        }
    }

    /// Schedule an external spike arrival onto a neuron, `delay_ticks >= 1`
    /// after the current tick. This is how camera events enter the network.
    pub fn inject(
        &mut self,
        pop: usize,
        idx: u32,
        weight_na: f64,
        kind: SynKind,
        delay_ticks: u32,
    ) -> Result<(), SnnError> {
        if pop >= self.pops.len() || idx >= self.pops[pop].size {
            return Err(SnnError::BadInjection {
                pop: self
                    .pops
                    .get(pop)
                    .map(|p| p.name.clone())
                    .unwrap_or_else(|| format!("#{pop}")),
                neuron: idx,
            });
        }
        let delay = delay_ticks.max(1) as usize;
        debug_assert!(delay <= self.ring_mask);
        let slot = (self.clock.tick() as usize + delay) & self.ring_mask;
        self.ring[slot].push(Delivery {
            tpop: pop as u32,
            tidx: idx,
            kind,
            weight: weight_na,
        });
        self.pending += 1;
        if self.pending > self.pending_cap {
            return Err(SnnError::QueueOverflow {
                cap: self.pending_cap,
                tick: self.clock.tick(),
            });
        }
        Ok(())
    }

    /// Advance the network by `n_ticks`. Per tick: (1) due deliveries are
    /// applied (facilitation before triggers, otherwise in enqueue order),
    /// (2) sources advance, (3) neurons advance, (4) emitted spikes are
    /// enqueued with their per-connection delays, (5) recorded populations
    /// are appended to the spike record.
    pub fn advance(&mut self, n_ticks: u64) -> Result<(), SnnError> {
        for _ in 0..n_ticks {
            self.step_tick()?;
        }
        Ok(())
    }

    /// Convenience wrapper: advance and borrow the accumulated record.
    pub fn run(&mut self, n_ticks: u64) -> Result<&SpikeRecord, SnnError> {
        self.advance(n_ticks)?;
        Ok(&self.record)
    }

    fn step_tick(&mut self) -> Result<(), SnnError> {
        let t = self.clock.tick();

        // Phase 1: deliveries due this tick. Two passes so that triggers see
        // any facilitation arriving on the same tick.
        let slot = (t as usize) & self.ring_mask;
        let mut due = std::mem::take(&mut self.ring[slot]);
        self.pending -= due.len();
        for d in &due {
            if d.kind != SynKind::Trigger {
                Self::apply_delivery(&mut self.pops, d, t);
            }
        }
        for d in &due {
            if d.kind == SynKind::Trigger {
                Self::apply_delivery(&mut self.pops, d, t);
            }
        }
        due.clear();
        self.ring[slot] = due;

        // Phase 2: sources.
        let mut scratch = std::mem::take(&mut self.scratch);
        for p in 0..self.pops.len() {
            scratch.clear();
            let record = self.pops[p].record;
            if let PopRt::Source(src) = &mut self.pops[p].rt {
                match src {
                    SourcePop::Poisson { p: prob, rngs, next, ln_1mp } => {
                        if *prob > 0.0 {
                            for i in 0..next.len() {
                                while next[i] == t {
                                    scratch.push((p as u32, i as u32));
                                    next[i] = t + sample_gap(&mut rngs[i], *ln_1mp);
                                }
                            }
                        }
                    }
                    SourcePop::Scheduled { spikes, cursor } => {
                        while *cursor < spikes.len() && spikes[*cursor].0 == t {
                            scratch.push((p as u32, spikes[*cursor].1));
                            *cursor += 1;
                        }
                    }
                }
            }
            for &(sp, si) in scratch.iter() {
                if record {
                    self.record.push(sp as usize, t, si);
                }
                self.fan_out(sp, si, t)?;
            }
        }

        // Phase 3: neurons (population order, index order within).
        for p in 0..self.pops.len() {
            scratch.clear();
            let record = self.pops[p].record;
            if let PopRt::Neurons(np) = &mut self.pops[p].rt {
                let e_l = np.kernel.params.e_l_mv;
                let always_on = np.kernel.params.i_offset_na != 0.0;
                for wi in 0..np.active.len() {
                    let mut word = np.active[wi];
                    if word == 0 {
                        continue;
                    }
                    while word != 0 {
                        let bit = word.trailing_zeros();
                        word &= word - 1;
                        let i = wi * 64 + bit as usize;
                        let mut st = super::LifState {
                            v_mv: np.v[i],
                            i_exc_na: np.i_exc[i],
                            i_inh_na: np.i_inh[i],
                            refractory_until: np.refr[i],
                        };
                        let spiked = np.kernel.step(&mut st, t);
                        if !(st.v_mv + st.i_exc_na + st.i_inh_na).is_finite() {
                            return Err(SnnError::NonFinite {
                                pop: self.pops[p].name.clone(),
                                index: i as u32,
                                tick: t,
                            });
                        }
                        if spiked {
                            scratch.push((p as u32, i as u32));
                        }
                        let quiescent = !always_on
                            && st.refractory_until <= t
                            && st.i_exc_na.abs() < EPS_QUIESCENT
                            && st.i_inh_na.abs() < EPS_QUIESCENT
                            && (st.v_mv - e_l).abs() < EPS_QUIESCENT;
                        if quiescent {
                            np.v[i] = e_l;
                            np.i_exc[i] = 0.0;
                            np.i_inh[i] = 0.0;
                            np.refr[i] = st.refractory_until;
                            np.active[wi] &= !(1u64 << bit);
                        } else {
                            np.v[i] = st.v_mv;
                            np.i_exc[i] = st.i_exc_na;
                            np.i_inh[i] = st.i_inh_na;
                            np.refr[i] = st.refractory_until;
                        }
                    }
                }
            }
            for &(sp, si) in scratch.iter() {
                if record {
                    self.record.push(sp as usize, t, si);
                }
                self.fan_out(sp, si, t)?;
            }
        }
        self.scratch = scratch;

        self.clock.advance();
        Ok(())
    }

    #[inline]
    fn fan_out(&mut self, pop: u32, idx: u32, t: Tick) -> Result<(), SnnError> {
        let g = (self.pop_base[pop as usize] + idx) as usize;
        let (lo, hi) = (self.offsets[g] as usize, self.offsets[g + 1] as usize);
        for e in &self.edges[lo..hi] {
            let slot = (t as usize + e.delay as usize) & self.ring_mask;
            self.ring[slot].push(Delivery {
                tpop: e.tpop,
                tidx: e.tidx,
                kind: e.kind,
                weight: e.weight,
            });
        }
        self.pending += hi - lo;
        if self.pending > self.pending_cap {
            return Err(SnnError::QueueOverflow {
                cap: self.pending_cap,
                tick: t,
            });
        }
        Ok(())
    }

    #[inline]
    fn apply_delivery(pops: &mut [Population], d: &Delivery, t: Tick) {
        let pop = &mut pops[d.tpop as usize];
        if let PopRt::Neurons(np) = &mut pop.rt {
            let i = d.tidx as usize;
            match d.kind {
                SynKind::Excitatory => np.i_exc[i] += d.weight,
                SynKind::Inhibitory => np.i_inh[i] += d.weight,
                SynKind::Facilitatory => {
                    let tde = np.tde.as_mut().expect("fac onto non-TDE");
                    tde.armed[i] = true;
                    tde.fac_tick[i] = t;
                }
                SynKind::Trigger => {
                    let g = np.gain(i, t);
                    np.i_exc[i] += d.weight * g;
                }
            }
            np.activate(d.tidx);
        }
    }

    /// Every realised connection, in source order, for `dump-wiring`.
    pub fn wiring(&self) -> impl Iterator<Item = WiringEntry> + '_ {
        let mut pop_of_global = Vec::with_capacity(self.neuron_count());
        for (pi, p) in self.pops.iter().enumerate() {
            pop_of_global.extend(std::iter::repeat(pi).take(p.size as usize));
        }
        (0..self.neuron_count()).flat_map(move |g| {
            let (lo, hi) = (self.offsets[g] as usize, self.offsets[g + 1] as usize);
            let src_pop = pop_of_global[g];
            let src_idx = g as u32 - self.pop_base[src_pop];
            self.edges[lo..hi].iter().map(move |e| WiringEntry {
                src_pop: self.pops[src_pop].name.clone(),
                src_idx,
                dst_pop: self.pops[e.tpop as usize].name.clone(),
                dst_idx: e.tidx,
                weight_na: e.weight,
                delay_ms: e.delay as f64 * DT_MS,
                kind: e.kind,
            })
        })
    }
}
