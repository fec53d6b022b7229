//! Plan metrics: store-and-forward to-ground delays, ranging partners, link
//! utilization and link composition.
//!
//! Delay conventions: bulk R-user traffic is counted in periods, delivery
//! in the generating period counting 1. Small phased-array traffic is
//! generated at slot 1 of every superframe and counted in slots as
//! (arrival slot - 1), so a bundle already on a grounded component has
//! delay 0. Within a period (or slot) a bundle crosses any number of
//! reflector links; it crosses at most one phased-array link per slot.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::types::{LinkSet, NodeId, NodeKind, NodeSet, PhasedArrayPlan, ReflectorPlan, SuperframePlan, TimeGrid};

/// Delivered / censored tallies of one bundle class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayStats {
    pub delivered: u64,
    pub censored: u64,
    /// Sum of delays over delivered bundles.
    pub total: u64,
}

impl DelayStats {
    pub fn record(&mut self, delay: Option<u64>) {
        match delay {
            Some(d) => {
                self.delivered += 1;
                self.total += d;
            }
            None => self.censored += 1,
        }
    }

    pub fn merge(&mut self, other: &DelayStats) {
        self.delivered += other.delivered;
        self.censored += other.censored;
        self.total += other.total;
    }

    pub fn generated(&self) -> u64 {
        self.delivered + self.censored
    }

    /// Mean over delivered bundles.
    pub fn mean(&self) -> Option<f64> {
        (self.delivered > 0).then(|| self.total as f64 / self.delivered as f64)
    }
}

/// Reflector connectivity of one period or superframe: component label per
/// node under satellite-satellite and satellite-ground links, and whether
/// each component holds a ground station.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub label: Vec<usize>,
    pub grounded: Vec<bool>,
    members: Vec<Vec<usize>>,
}

impl Components {
    pub fn new(links: &LinkSet, nodes: &NodeSet) -> Self {
        let n = nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in links {
            let relays = nodes.kind(p.lo()) == NodeKind::Satellite
                && matches!(nodes.kind(p.hi()), NodeKind::Satellite | NodeKind::GroundStation);
            if relays {
                let (a, b) = (find(&mut parent, p.lo().0), find(&mut parent, p.hi().0));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut root_label = vec![usize::MAX; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            if root_label[r] == usize::MAX {
                root_label[r] = members.len();
                members.push(Vec::new());
            }
            label[v] = root_label[r];
            members[label[v]].push(v);
        }
        let mut grounded = vec![false; members.len()];
        for g in nodes.ground_stations() {
            grounded[label[g.0]] = true;
        }
        Components {
            label,
            grounded,
            members,
        }
    }

    pub fn is_grounded(&self, node: NodeId) -> bool {
        self.grounded[self.label[node.0]]
    }

    /// Adds every node sharing a component with a holder; returns whether a
    /// ground station is now held.
    fn close(&self, holders: &mut [bool]) -> bool {
        let mut seen = vec![false; self.members.len()];
        let mut hit = false;
        for v in 0..holders.len() {
            if holders[v] && !seen[self.label[v]] {
                seen[self.label[v]] = true;
                hit |= self.grounded[self.label[v]];
            }
        }
        for (c, _) in seen.iter().enumerate().filter(|(_, s)| **s) {
            for &v in &self.members[c] {
                holders[v] = true;
            }
        }
        hit
    }
}

/// One bulk bundle: generated when `user` accesses `satellite` in `period`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RBundle {
    pub user: NodeId,
    pub satellite: NodeId,
    pub period: usize,
    /// Periods to reach a ground station, None if never within the plan.
    pub delay: Option<u64>,
}

/// Earliest-arrival delays of every R-user access in the plan.
pub fn r_delay(rplan: &ReflectorPlan, nodes: &NodeSet) -> Vec<RBundle> {
    let comps: Vec<Components> = (0..rplan.periods())
        .into_par_iter()
        .map(|m| Components::new(rplan.links(m), nodes))
        .collect();
    let mut bundles = Vec::new();
    for m in 0..rplan.periods() {
        for p in rplan.links(m) {
            if nodes.kind(p.hi()) != NodeKind::RUser {
                continue;
            }
            let mut holders = vec![false; nodes.len()];
            holders[p.lo().0] = true;
            let delay = (m..rplan.periods())
                .find(|&d| comps[d].close(&mut holders))
                .map(|d| (d - m + 1) as u64);
            bundles.push(RBundle {
                user: p.hi(),
                satellite: p.lo(),
                period: m,
                delay,
            });
        }
    }
    bundles
}

/// Slot delays of one superframe's bundles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperframeDelays {
    pub gsat: DelayStats,
    pub ugsat: DelayStats,
    pub puser: DelayStats,
}

impl SuperframeDelays {
    pub fn merge(&mut self, other: &SuperframeDelays) {
        self.gsat.merge(&other.gsat);
        self.ugsat.merge(&other.ugsat);
        self.puser.merge(&other.puser);
    }
}

fn flood(origin: NodeId, sf: &SuperframePlan, comps: &Components, nodes: &NodeSet) -> Option<u64> {
    let mut holders = vec![false; nodes.len()];
    holders[origin.0] = true;
    if nodes.kind(origin) == NodeKind::Satellite && comps.close(&mut holders) {
        return Some(0);
    }
    for (t, matching) in sf.slots.iter().enumerate() {
        let mut next = holders.clone();
        for p in matching {
            for (a, b) in [(p.lo(), p.hi()), (p.hi(), p.lo())] {
                if holders[a.0] && nodes.kind(b) != NodeKind::PUser {
                    next[b.0] = true;
                }
            }
        }
        holders = next;
        if comps.close(&mut holders) {
            return Some(t as u64);
        }
    }
    None
}

/// Small-bundle delays of one superframe given the reflector links
/// operational in it.
pub fn superframe_delays(sf: &SuperframePlan, operational: &LinkSet, nodes: &NodeSet) -> SuperframeDelays {
    let comps = Components::new(operational, nodes);
    let mut out = SuperframeDelays::default();
    for s in nodes.satellites() {
        let d = flood(s, sf, &comps, nodes);
        if comps.is_grounded(s) {
            out.gsat.record(d);
        } else {
            out.ugsat.record(d);
        }
    }
    for u in nodes.p_users() {
        out.puser.record(flood(u, sf, &comps, nodes));
    }
    out
}

/// Delays of every superframe in `pplan`, merged in plan order.
pub fn p_delay(pplan: &PhasedArrayPlan, rplan: &ReflectorPlan, grid: &TimeGrid, nodes: &NodeSet) -> SuperframeDelays {
    let parts: Vec<SuperframeDelays> = pplan
        .superframes
        .par_iter()
        .map(|sf| superframe_delays(sf, &rplan.operational_links(grid, sf.period, sf.superframe), nodes))
        .collect();
    let mut out = SuperframeDelays::default();
    for p in &parts {
        out.merge(p);
    }
    out
}

/// Distinct satellite partners of each satellite within one superframe,
/// through phased-array links or the period's reflector links; indexed by
/// satellite id.
pub fn ranging_partners(sf: &SuperframePlan, reflector_links: &LinkSet, nodes: &NodeSet) -> Vec<usize> {
    let n = nodes.satellite_count();
    let mut seen = vec![false; n * n];
    let sat_pairs = sf
        .slots
        .iter()
        .flatten()
        .chain(reflector_links.iter())
        .filter(|p| nodes.kind(p.lo()) == NodeKind::Satellite && nodes.kind(p.hi()) == NodeKind::Satellite);
    for p in sat_pairs {
        let (a, b) = (p.lo().0, p.hi().0);
        seen[a * n + b] = true;
        seen[b * n + a] = true;
    }
    (0..n).map(|a| seen[a * n..(a + 1) * n].iter().filter(|&&x| x).count()).collect()
}

/// Phased-array link counts of one superframe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCounts {
    pub sat_sat: u64,
    pub user_sat: u64,
    /// Satellite slot-endpoints engaged in a link.
    pub sat_endpoints: u64,
}

pub fn link_counts(sf: &SuperframePlan, nodes: &NodeSet) -> LinkCounts {
    let mut c = LinkCounts::default();
    for p in sf.slots.iter().flatten() {
        match nodes.kind(p.hi()) {
            NodeKind::Satellite => {
                c.sat_sat += 1;
                c.sat_endpoints += 2;
            }
            _ => {
                c.user_sat += 1;
                c.sat_endpoints += 1;
            }
        }
    }
    c
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Mean R-user to-ground delay, periods.
    pub r_user_delay: Option<f64>,
    pub r_bundles: DelayStats,
    /// Mean UG-Sat to-ground delay, slots.
    pub ugsat_delay: Option<f64>,
    pub ugsat_bundles: DelayStats,
    /// Mean P-user to-ground delay, slots.
    pub puser_delay: Option<f64>,
    pub puser_bundles: DelayStats,
    pub gsat_bundles: DelayStats,
    /// Mean distinct ranging partners per satellite per superframe.
    pub ranging_links_per_sat: f64,
    /// Share of satellite phased-array slot capacity in use.
    pub link_utilization: f64,
    /// Mean PL(Sat,Sat) per superframe.
    pub pl_sat_sat: f64,
    /// Mean PL(User,Sat) per superframe.
    pub pl_user_sat: f64,
}

/// All metrics of one (reflector plan, phased-array plan) combination.
pub fn evaluate(
    rplan: &ReflectorPlan,
    pplan: &PhasedArrayPlan,
    grid: &TimeGrid,
    nodes: &NodeSet,
) -> Result<MetricReport, PlanError> {
    let slots = grid.slots_per_superframe();
    for sf in &pplan.superframes {
        if sf.period >= rplan.periods() {
            return Err(PlanError::Dimension(format!(
                "phased-array plan reaches period {}, reflector plan has {}",
                sf.period,
                rplan.periods()
            )));
        }
        if sf.slots.len() != slots {
            return Err(PlanError::Dimension(format!(
                "superframe ({}, {}) has {} slots, grid has {}",
                sf.period,
                sf.superframe,
                sf.slots.len(),
                slots
            )));
        }
    }

    let mut r_bundles = DelayStats::default();
    for b in r_delay(rplan, nodes) {
        r_bundles.record(b.delay);
    }
    let delays = p_delay(pplan, rplan, grid, nodes);

    let per_sf: Vec<(usize, LinkCounts)> = pplan
        .superframes
        .par_iter()
        .map(|sf| {
            let partners = ranging_partners(sf, rplan.links(sf.period), nodes);
            (partners.iter().sum(), link_counts(sf, nodes))
        })
        .collect();
    let count = per_sf.len() as f64;
    let sats = nodes.satellite_count() as f64;
    let (mut partners, mut c) = (0usize, LinkCounts::default());
    for (p, l) in &per_sf {
        partners += p;
        c.sat_sat += l.sat_sat;
        c.user_sat += l.user_sat;
        c.sat_endpoints += l.sat_endpoints;
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };

    Ok(MetricReport {
        r_user_delay: r_bundles.mean(),
        r_bundles,
        ugsat_delay: delays.ugsat.mean(),
        ugsat_bundles: delays.ugsat,
        puser_delay: delays.puser.mean(),
        puser_bundles: delays.puser,
        gsat_bundles: delays.gsat,
        ranging_links_per_sat: ratio(partners as f64, sats * count),
        link_utilization: ratio(c.sat_endpoints as f64, sats * slots as f64 * count),
        pl_sat_sat: ratio(c.sat_sat as f64, count),
        pl_user_sat: ratio(c.user_sat as f64, count),
    })
}
