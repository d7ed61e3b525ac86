use std::io::{self, Write};

use super::Tick;

/// A recorded spike: the universal currency between layers is
/// (tick, population, neuron index); the population is the enclosing
/// record's index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeEvent {
    pub tick: Tick,
    pub index: u32,
}

/// Per-population ordered spike lists. Within a population, entries are
/// pushed in (tick, index) order by construction; reruns with identical
/// seeds and config are bit-identical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpikeRecord {
    names: Vec<String>,
    spikes: Vec<Vec<SpikeEvent>>,
}

impl SpikeRecord {
    pub fn new(names: Vec<String>) -> Self {
        let spikes = names.iter().map(|_| Vec::new()).collect();
        SpikeRecord { names, spikes }
    }

    #[inline]
    pub fn push(&mut self, pop: usize, tick: Tick, index: u32) {
        self.spikes[pop].push(SpikeEvent { tick, index });
    }

    pub fn population_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, pop: usize) -> &str {
        &self.names[pop]
    }

    pub fn spikes(&self, pop: usize) -> &[SpikeEvent] {
        &self.spikes[pop]
    }

    pub fn total_spikes(&self) -> usize {
        self.spikes.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_spikes() == 0
    }

    /// All spikes sorted by (tick, population, index).
    pub fn sorted(&self) -> Vec<(Tick, usize, u32)> {
        let mut all: Vec<(Tick, usize, u32)> = Vec::with_capacity(self.total_spikes());
        for (p, list) in self.spikes.iter().enumerate() {
            all.extend(list.iter().map(|s| (s.tick, p, s.index)));
        }
        all.sort_unstable();
        all
    }

    /// CSV export, `tick,population,index`, sorted by (tick, population,
    /// index). Population is exported by name.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "tick,population,index")?;
        for (tick, pop, index) in self.sorted() {
            writeln!(w, "{},{},{}", tick, self.names[pop], index)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_sorted_by_tick_then_population_then_index() {
        let mut r = SpikeRecord::new(vec!["B".into(), "A".into()]);
        r.push(1, 5, 2);
        r.push(0, 5, 1);
        r.push(0, 2, 7);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "tick,population,index");
        assert_eq!(lines[1], "2,B,7");
        // Same tick: population 0 ("B") before population 1 ("A").
        assert_eq!(lines[2], "5,B,1");
        assert_eq!(lines[3], "5,A,2");
    }
}
