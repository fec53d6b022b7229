//! Phased-array planning (P-CPD): one maximum weight matching per slot, with
//! edge weights driven by user service, UG-Sat grounding and ranging needs.
//!
//! All tendency state lives inside one superframe; superframes are planned
//! independently (in parallel) and collected in time order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::matching::{max_weight_matching, WeightedEdge};
use crate::partition::{partition_topology, representative_seed, TopologyPartition};
use crate::types::{
    LinkSet, NodeId, NodeKind, NodeSet, Pair, PhasedArrayPlan, ReflectorPlan, SuperframePlan,
    TimeGrid, VisibilitySet,
};

/// What the user weight compares against the visible-satellite count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityRule {
    /// The user's total PL count so far this superframe.
    #[default]
    TotalLinks,
    /// The number of distinct satellites the user has linked with.
    DistinctPartners,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightParams {
    /// C_u
    pub service: i64,
    /// C_c
    pub comm: i64,
    /// C_r
    pub ranging: i64,
    /// L^u, required PLs per superframe for users not listed in `user_quotas`.
    pub quota: u32,
    /// Per-user L^u by node name.
    pub user_quotas: BTreeMap<String, u32>,
    pub diversity: DiversityRule,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            service: 1,
            comm: 8,
            ranging: 30,
            quota: 4,
            user_quotas: BTreeMap::new(),
            diversity: DiversityRule::TotalLinks,
        }
    }
}

impl WeightParams {
    pub fn validate(&self, nodes: &NodeSet) -> Result<(), PlanError> {
        for (name, v) in [("service", self.service), ("comm", self.comm), ("ranging", self.ranging)] {
            if v <= 0 {
                return Err(PlanError::Params(format!("weight constant `{name}` must be positive, got {v}")));
            }
        }
        for name in self.user_quotas.keys() {
            match nodes.by_name(name) {
                Some(id) if nodes.kind(id) == NodeKind::PUser => {}
                _ => return Err(PlanError::Params(format!("user_quotas names `{name}`, which is not a P-user"))),
            }
        }
        Ok(())
    }

    pub fn quota_of(&self, nodes: &NodeSet, user: NodeId) -> u32 {
        self.user_quotas
            .get(&nodes.get(user).name)
            .copied()
            .unwrap_or(self.quota)
    }
}

/// Counters of one superframe, indexed by P-user (offset from the first
/// P-user id), UG-Sat set, or pair index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TendencyState {
    node_count: usize,
    first_user: usize,
    /// I_u per P-user.
    pub access: Vec<u64>,
    /// I_c per UG-Sat set of the partition; members share one value.
    pub grounding: Vec<u64>,
    /// L_{i,j,t} by pair index.
    pub pair_links: Vec<u32>,
    /// L_{i,s,t} per P-user.
    pub user_links: Vec<u32>,
    /// Distinct satellites each P-user has linked with.
    pub partners: Vec<u32>,
    /// Distinct satellites visible to each P-user this superframe.
    pub gbar: Vec<u32>,
    /// L^u per P-user.
    pub quota: Vec<u32>,
}

impl TendencyState {
    /// Fresh state for a superframe whose visible phased-array pairs are
    /// `pairs`.
    pub fn new(nodes: &NodeSet, wp: &WeightParams, part: &TopologyPartition, pairs: &[Pair]) -> Self {
        let users = nodes.p_user_range();
        let n = nodes.len();
        let mut gbar = vec![0; users.len()];
        for p in pairs {
            if nodes.kind(p.hi()) == NodeKind::PUser {
                gbar[p.hi().0 - users.start] += 1;
            }
        }
        TendencyState {
            node_count: n,
            first_user: users.start,
            access: vec![1; users.len()],
            grounding: vec![1; part.ugsat_sets.len()],
            pair_links: vec![0; n * n.saturating_sub(1) / 2],
            user_links: vec![0; users.len()],
            partners: vec![0; users.len()],
            gbar,
            quota: nodes.p_users().map(|u| wp.quota_of(nodes, u)).collect(),
        }
    }

    fn user(&self, id: NodeId) -> usize {
        id.0 - self.first_user
    }

    pub fn links_between(&self, a: NodeId, b: NodeId) -> u32 {
        self.pair_links[Pair::new(a, b).index(self.node_count)]
    }

    /// Commits one slot's matching and updates the tendencies.
    pub fn commit(&mut self, nodes: &NodeSet, part: &TopologyPartition, matching: &[Pair]) {
        let mut served = vec![false; self.access.len()];
        let mut grounded = vec![false; self.grounding.len()];
        for &p in matching {
            let idx = p.index(self.node_count);
            if nodes.kind(p.hi()) == NodeKind::PUser {
                let u = self.user(p.hi());
                served[u] = true;
                if self.pair_links[idx] == 0 {
                    self.partners[u] += 1;
                }
                self.user_links[u] += 1;
            } else {
                for (s, other) in [(p.lo(), p.hi()), (p.hi(), p.lo())] {
                    if let Some(c) = part.component_of(s) {
                        if part.is_gsat(other) {
                            grounded[c] = true;
                        }
                    }
                }
            }
            self.pair_links[idx] += 1;
        }
        for (i, s) in self.access.iter_mut().zip(served) {
            *i = if s { 1 } else { *i + 1 };
        }
        for (i, g) in self.grounding.iter_mut().zip(grounded) {
            *i = if g { 1 } else { *i + 1 };
        }
    }
}

/// Weight of a P-user to satellite edge.
pub fn user_weight(st: &TendencyState, wp: &WeightParams, user: NodeId, sat: NodeId) -> i64 {
    let u = st.user(user);
    let (quota, total) = (st.quota[u], st.user_links[u]);
    if total >= quota {
        return 0;
    }
    let diversity = match wp.diversity {
        DiversityRule::TotalLinks => total,
        DiversityRule::DistinctPartners => st.partners[u],
    };
    if diversity < st.gbar[u] && st.links_between(user, sat) > 0 {
        return 1;
    }
    st.access[u] as i64 * i64::from(quota - total) * wp.service
}

/// Grounding part of a satellite-satellite weight: I_c * C_c on the edge
/// between a UG-Sat set's representative and a G-Sat, otherwise 0.
pub fn comm_weight(part: &TopologyPartition, st: &TendencyState, wp: &WeightParams, i: NodeId, j: NodeId) -> i64 {
    for (rep, g) in [(i, j), (j, i)] {
        if part.is_gsat(g) && part.is_representative(rep) {
            if let Some(c) = part.component_of(rep) {
                return st.grounding[c] as i64 * wp.comm;
            }
        }
    }
    0
}

/// Ranging part of a satellite-satellite weight: C_r for a pair with no PL
/// yet this superframe and no reflector link this period.
pub fn ranging_weight(reflector_links: &LinkSet, st: &TendencyState, wp: &WeightParams, i: NodeId, j: NodeId) -> i64 {
    if st.links_between(i, j) == 0 && !reflector_links.contains(&Pair::new(i, j)) {
        wp.ranging
    } else {
        0
    }
}

pub fn sat_weight(
    part: &TopologyPartition,
    reflector_links: &LinkSet,
    st: &TendencyState,
    wp: &WeightParams,
    i: NodeId,
    j: NodeId,
) -> i64 {
    comm_weight(part, st, wp, i, j) + ranging_weight(reflector_links, st, wp, i, j)
}

/// Everything one superframe's schedule depends on.
#[derive(Clone, Debug)]
pub struct SuperframeInput<'a> {
    pub nodes: &'a NodeSet,
    pub period: usize,
    pub superframe: usize,
    /// Visible phased-array-capable pairs, in pair-index order.
    pub pairs: Vec<Pair>,
    pub partition: TopologyPartition,
    /// Reflector links of the period (ranging exemption).
    pub reflector_links: &'a LinkSet,
    pub slots: usize,
}

/// Runs the slot loop for one superframe and returns the plan and the
/// final tendency state.
pub fn step_superframe(input: &SuperframeInput<'_>, wp: &WeightParams) -> (SuperframePlan, TendencyState) {
    let nodes = input.nodes;
    let part = &input.partition;
    let mut st = TendencyState::new(nodes, wp, part, &input.pairs);
    let mut slots = Vec::with_capacity(input.slots);
    for _ in 0..input.slots {
        let edges: Vec<WeightedEdge> = input
            .pairs
            .iter()
            .map(|p| {
                let w = match nodes.kind(p.hi()) {
                    NodeKind::PUser => user_weight(&st, wp, p.hi(), p.lo()),
                    _ => sat_weight(part, input.reflector_links, &st, wp, p.lo(), p.hi()),
                };
                (p.lo().0, p.hi().0, w)
            })
            .collect();
        let matching: Vec<Pair> = max_weight_matching(nodes.len(), &edges)
            .into_iter()
            .map(|k| input.pairs[k])
            .collect();
        st.commit(nodes, part, &matching);
        slots.push(matching);
    }
    let plan = SuperframePlan {
        period: input.period,
        superframe: input.superframe,
        slots,
    };
    (plan, st)
}

/// Checks that visibility, nodes, grid and reflector plan line up.
pub fn check_alignment(
    vis: &VisibilitySet,
    nodes: &NodeSet,
    grid: &TimeGrid,
    rplan: Option<&ReflectorPlan>,
) -> Result<(), PlanError> {
    grid.validate().map_err(|e| PlanError::Params(e.to_string()))?;
    if vis.node_count() != nodes.len() {
        return Err(PlanError::Dimension(format!(
            "visibility has {} nodes, scenario has {}",
            vis.node_count(),
            nodes.len()
        )));
    }
    if vis.superframes_per_period() != grid.superframes_per_period as usize {
        return Err(PlanError::Dimension(format!(
            "visibility has {} superframes per period, grid has {}",
            vis.superframes_per_period(),
            grid.superframes_per_period
        )));
    }
    if let Some(r) = rplan {
        if r.periods() != vis.periods() {
            return Err(PlanError::Dimension(format!(
                "reflector plan has {} periods, visibility {}",
                r.periods(),
                vis.periods()
            )));
        }
    }
    Ok(())
}

/// Visible phased-array pairs of one superframe.
pub fn phased_array_pairs(vis: &VisibilitySet, nodes: &NodeSet, period: usize, superframe: usize) -> Vec<Pair> {
    vis.superframe_pairs(period, superframe)
        .into_iter()
        .filter(|&p| nodes.phased_array_capable(p))
        .collect()
}

/// (period, superframe) for every superframe of the visibility horizon.
pub fn superframe_index(vis: &VisibilitySet) -> Vec<(usize, usize)> {
    let k = vis.superframes_per_period();
    (0..vis.periods())
        .flat_map(|m| (0..k).map(move |s| (m, s)))
        .collect()
}

/// Plans every superframe against the reflector plan `rplan`. The UG-Sat
/// partition of each superframe uses the reflector links operational in
/// it; representatives are drawn from `seed`.
pub fn plan_phased_array(
    vis: &VisibilitySet,
    nodes: &NodeSet,
    grid: &TimeGrid,
    rplan: &ReflectorPlan,
    wp: &WeightParams,
    seed: u64,
) -> Result<PhasedArrayPlan, PlanError> {
    check_alignment(vis, nodes, grid, Some(rplan))?;
    wp.validate(nodes)?;
    let slots = grid.slots_per_superframe();
    let superframes = superframe_index(vis)
        .into_par_iter()
        .map(|(m, k)| {
            let operational = rplan.operational_links(grid, m, k);
            let input = SuperframeInput {
                nodes,
                period: m,
                superframe: k,
                pairs: phased_array_pairs(vis, nodes, m, k),
                partition: partition_topology(&operational, nodes, representative_seed(seed, m, k)),
                reflector_links: rplan.links(m),
                slots,
            };
            step_superframe(&input, wp).0
        })
        .collect();
    Ok(PhasedArrayPlan { superframes })
}
