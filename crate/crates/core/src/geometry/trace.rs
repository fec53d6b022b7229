//! Slot-level visibility traces: the interchange format between geometry and
//! the planners.
//!
//! One row per interval: `node_i,node_j,start_slot,end_slot,terminal`, with
//! nodes given by name, `end_slot` exclusive and `terminal` one of `rl`,
//! `pl` or `both`.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::types::{all_pairs, NodeSet, Pair, TimeGrid, VisibilitySet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    Rl,
    Pl,
    Both,
}

impl Terminal {
    pub fn from_flags(rl: bool, pl: bool) -> Option<Terminal> {
        match (rl, pl) {
            (true, true) => Some(Terminal::Both),
            (true, false) => Some(Terminal::Rl),
            (false, true) => Some(Terminal::Pl),
            (false, false) => None,
        }
    }

    pub fn rl(self) -> bool {
        matches!(self, Terminal::Rl | Terminal::Both)
    }

    pub fn pl(self) -> bool {
        matches!(self, Terminal::Pl | Terminal::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceInterval {
    pub node_i: String,
    pub node_j: String,
    pub start_slot: usize,
    pub end_slot: usize,
    pub terminal: Terminal,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VisibilityTrace {
    pub intervals: Vec<TraceInterval>,
}

impl VisibilityTrace {
    /// Every capable pair visible on both terminals for the whole grid.
    pub fn full(nodes: &NodeSet, grid: &TimeGrid) -> Self {
        let intervals = all_pairs(nodes.len())
            .filter_map(|p| {
                let terminal =
                    Terminal::from_flags(nodes.reflector_capable(p), nodes.phased_array_capable(p))?;
                Some(TraceInterval {
                    node_i: nodes.get(p.lo()).name.clone(),
                    node_j: nodes.get(p.hi()).name.clone(),
                    start_slot: 0,
                    end_slot: grid.total_slots(),
                    terminal,
                })
            })
            .collect();
        VisibilityTrace { intervals }
    }

    /// Intervals whose endpoints are both nodes of `nodes`.
    pub fn restricted_to(&self, nodes: &NodeSet) -> Self {
        let intervals = self
            .intervals
            .iter()
            .filter(|iv| nodes.by_name(&iv.node_i).is_some() && nodes.by_name(&iv.node_j).is_some())
            .cloned()
            .collect();
        VisibilityTrace { intervals }
    }

    pub fn read<R: io::Read>(reader: R) -> Result<Self, GeometryError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut intervals = Vec::new();
        for (line, row) in rdr.deserialize::<TraceInterval>().enumerate() {
            let row = row.map_err(|e| GeometryError::Trace(format!("row {}: {e}", line + 1)))?;
            intervals.push(row);
        }
        Ok(VisibilityTrace { intervals })
    }

    pub fn write<W: io::Write>(&self, writer: W) -> Result<(), GeometryError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| GeometryError::Trace(e.to_string());
        if self.intervals.is_empty() {
            wtr.write_record(["node_i", "node_j", "start_slot", "end_slot", "terminal"])
                .map_err(err)?;
        }
        for row in &self.intervals {
            wtr.serialize(row).map_err(err)?;
        }
        wtr.flush().map_err(|e| GeometryError::Trace(e.to_string()))
    }

    /// Lifts slot intervals to period and superframe visibility: a pair is
    /// visible in a period (superframe) only if the trace covers every slot
    /// of it. Terminal flags on pairs that cannot hold that link kind are
    /// ignored.
    pub fn to_visibility(&self, nodes: &NodeSet, grid: &TimeGrid) -> Result<VisibilitySet, GeometryError> {
        let n = nodes.len();
        let total = grid.total_slots();
        let pair_count = n * n.saturating_sub(1) / 2;
        let mut rl: Vec<Vec<(usize, usize)>> = vec![Vec::new(); pair_count];
        let mut pl: Vec<Vec<(usize, usize)>> = vec![Vec::new(); pair_count];
        for iv in &self.intervals {
            let lookup = |name: &str| {
                nodes
                    .by_name(name)
                    .ok_or_else(|| GeometryError::Trace(format!("unknown node `{name}`")))
            };
            let (a, b) = (lookup(&iv.node_i)?, lookup(&iv.node_j)?);
            if a == b {
                return Err(GeometryError::Trace(format!("self-pair on `{}`", iv.node_i)));
            }
            if iv.start_slot >= iv.end_slot || iv.end_slot > total {
                return Err(GeometryError::Trace(format!(
                    "interval {}..{} for ({}, {}) outside 0..{total} or empty",
                    iv.start_slot, iv.end_slot, iv.node_i, iv.node_j
                )));
            }
            let pair = Pair::new(a, b);
            let idx = pair.index(n);
            if iv.terminal.rl() && nodes.reflector_capable(pair) {
                rl[idx].push((iv.start_slot, iv.end_slot));
            }
            if iv.terminal.pl() && nodes.phased_array_capable(pair) {
                pl[idx].push((iv.start_slot, iv.end_slot));
            }
        }

        let spp = grid.slots_per_period();
        let t = grid.slots_per_superframe();
        let k_per = grid.superframes_per_period as usize;
        let mut vis = VisibilitySet::empty(n, grid.period_count, k_per);
        for pair in all_pairs(n) {
            let idx = pair.index(n);
            for (s, e) in merge(&mut rl[idx]) {
                for m in s.div_ceil(spp)..e / spp {
                    vis.set_period(m, pair, true);
                }
            }
            for (s, e) in merge(&mut pl[idx]) {
                for g in s.div_ceil(t)..e / t {
                    vis.set_superframe(g / k_per, g % k_per, pair, true);
                }
            }
        }
        Ok(vis)
    }
}

fn merge(spans: &mut [(usize, usize)]) -> Vec<(usize, usize)> {
    spans.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &(s, e) in spans.iter() {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::NodeId;

    fn small_grid() -> TimeGrid {
        TimeGrid {
            period_count: 2,
            period_seconds: 60,
            superframes_per_period: 2,
            switching_superframes: 1,
            slot_seconds: 10,
        }
    }

    fn row(a: &str, b: &str, s: usize, e: usize, t: Terminal) -> TraceInterval {
        TraceInterval {
            node_i: a.into(),
            node_j: b.into(),
            start_slot: s,
            end_slot: e,
            terminal: t,
        }
    }

    #[test]
    fn period_needs_uninterrupted_cover() {
        // 6 slots per period, 3 per superframe
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 0);
        let trace = VisibilityTrace {
            intervals: vec![
                row("S0", "S1", 0, 5, Terminal::Both),
                row("S1", "S0", 5, 7, Terminal::Both),
                row("S0", "S1", 8, 12, Terminal::Both),
            ],
        };
        let vis = trace.to_visibility(&nodes, &small_grid()).unwrap();
        let (a, b) = (NodeId(0), NodeId(1));
        assert!(vis.period_visible(0, a, b));
        assert!(!vis.period_visible(1, a, b), "slot 7 missing");
        assert!(vis.superframe_visible(0, 0, a, b));
        assert!(vis.superframe_visible(0, 1, a, b));
        assert!(!vis.superframe_visible(1, 0, a, b));
        assert!(vis.superframe_visible(1, 1, a, b));
    }

    #[test]
    fn terminal_flags_respect_capability() {
        let nodes = NodeSet::anonymous(2, 1, 1, 1, 0);
        let trace = VisibilityTrace {
            intervals: vec![
                row("S0", "R0", 0, 12, Terminal::Both),
                row("S0", "P0", 0, 12, Terminal::Rl),
            ],
        };
        let vis = trace.to_visibility(&nodes, &small_grid()).unwrap();
        assert!(vis.period_visible(0, NodeId(0), NodeId(1)));
        assert!(!vis.superframe_visible(0, 0, NodeId(0), NodeId(1)));
        assert!(!vis.period_visible(0, NodeId(0), NodeId(2)));
        assert!(!vis.superframe_visible(0, 0, NodeId(0), NodeId(2)));
    }

    #[test]
    fn bad_rows_are_rejected() {
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 0);
        let grid = small_grid();
        for iv in [
            row("S0", "S9", 0, 1, Terminal::Rl),
            row("S0", "S0", 0, 1, Terminal::Rl),
            row("S0", "S1", 3, 3, Terminal::Rl),
            row("S0", "S1", 0, 13, Terminal::Rl),
        ] {
            let t = VisibilityTrace { intervals: vec![iv] };
            assert!(t.to_visibility(&nodes, &grid).is_err());
        }
    }

    #[test]
    fn csv_round_trip() {
        let nodes = NodeSet::anonymous(2, 2, 1, 1, 1);
        let grid = small_grid();
        let trace = VisibilityTrace::full(&nodes, &grid);
        let mut buf = Vec::new();
        trace.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("node_i,node_j,start_slot,end_slot,terminal\n"));
        assert!(text.contains("S0,R0,0,12,rl"));
        let back = VisibilityTrace::read(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
        assert_eq!(
            back.to_visibility(&nodes, &grid).unwrap(),
            VisibilitySet::full(&nodes, 2, 2)
        );
    }
}
