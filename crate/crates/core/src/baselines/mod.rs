//! Comparison planners reconstructed from their published behaviour:
//! LAA-PMM for the reflector topology and DFCP for the phased-array
//! topology.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::matching::{max_weight_matching, max_weight_matching_mates, WeightedEdge};
use crate::pcpd::{check_alignment, phased_array_pairs, superframe_index, WeightParams};
use crate::types::{
    LinkSet, NodeKind, NodeSet, Pair, PhasedArrayPlan, ReflectorPlan, ReflectorPlanParams,
    SuperframePlan, TimeGrid, VisibilitySet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// DFCP weight per slot of pair age.
    pub fairness_gain: i64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { fairness_gain: 1 }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.fairness_gain <= 0 {
            return Err(PlanError::Params(format!(
                "fairness_gain must be positive, got {}",
                self.fairness_gain
            )));
        }
        Ok(())
    }
}

/// One period of LAA-PMM: ground links attached greedily (satellites in id
/// order, first visible station, at most one each) up to L_G, then a
/// maximum-cardinality b-matching over the remaining satellite terminals
/// and R-users. Among maximum-cardinality matchings user links are
/// preferred.
pub fn laa_pmm_period(vis: &VisibilitySet, nodes: &NodeSet, params: &ReflectorPlanParams, period: usize) -> (LinkSet, u32) {
    let n = nodes.len();
    let mut links = LinkSet::new();
    let mut cap: Vec<u32> = nodes
        .iter()
        .map(|node| match node.kind {
            NodeKind::Satellite => params.terminals,
            NodeKind::RUser => 1,
            _ => 0,
        })
        .collect();
    let mut ground = 0;
    for s in nodes.satellites() {
        if ground >= params.gs_links || cap[s.0] == 0 {
            break;
        }
        if let Some(g) = nodes.ground_stations().find(|&g| vis.period_visible(period, s, g)) {
            links.insert(Pair::new(s, g));
            cap[s.0] -= 1;
            ground += 1;
        }
    }

    let candidates: Vec<Pair> = vis
        .period_pairs(period)
        .filter(|&p| {
            nodes.reflector_capable(p)
                && nodes.kind(p.hi()) != NodeKind::GroundStation
                && cap[p.lo().0] > 0
                && cap[p.hi().0] > 0
        })
        .collect();
    if !candidates.is_empty() {
        // Gadget: every node becomes cap copies; link e = (u, v) becomes two
        // vertices eu, ev joined to each other and to the copies of u and v.
        // Taking e scores 2(B + x_e), leaving it 2B, so the optimum is a
        // b-matching of maximum total x_e.
        let mut first_copy = vec![0; n];
        let mut vertices = 0;
        for v in 0..n {
            first_copy[v] = vertices;
            vertices += cap[v] as usize;
        }
        let k = candidates.len() as i64 + 1;
        let big = 2 * k + 2;
        let mut edges: Vec<WeightedEdge> = Vec::new();
        let mut ends = Vec::with_capacity(candidates.len());
        for p in &candidates {
            let x = if nodes.kind(p.hi()) == NodeKind::RUser { k + 1 } else { k };
            let (eu, ev) = (vertices, vertices + 1);
            vertices += 2;
            ends.push((eu, ev));
            edges.push((eu, ev, 2 * big));
            for (end, node) in [(eu, p.lo().0), (ev, p.hi().0)] {
                for c in 0..cap[node] as usize {
                    edges.push((first_copy[node] + c, end, big + x));
                }
            }
        }
        let mates = max_weight_matching_mates(vertices, &edges, false);
        for (p, &(eu, ev)) in candidates.iter().zip(&ends) {
            let taken = matches!(mates[eu], Some(m) if m != ev) && matches!(mates[ev], Some(m) if m != eu);
            if taken {
                links.insert(*p);
            }
        }
    }
    (links, params.gs_links.saturating_sub(ground))
}

/// LAA-PMM over every period of `vis`. No access-window or ground-floor
/// constraint is enforced; the deficit column records L_G shortfalls.
pub fn laa_pmm_plan(vis: &VisibilitySet, nodes: &NodeSet, params: &ReflectorPlanParams) -> Result<ReflectorPlan, PlanError> {
    if vis.node_count() != nodes.len() {
        return Err(PlanError::Dimension(format!(
            "visibility has {} nodes, scenario has {}",
            vis.node_count(),
            nodes.len()
        )));
    }
    if params.terminals == 0 {
        return Err(PlanError::Params("terminals must be at least 1".into()));
    }
    let (links, deficits): (Vec<LinkSet>, Vec<u32>) = (0..vis.periods())
        .into_par_iter()
        .map(|m| laa_pmm_period(vis, nodes, params, m))
        .unzip();
    Ok(ReflectorPlan::from_links(*params, links, deficits))
}

/// One superframe of DFCP: weight = gain * slots since the pair was last
/// matched (1 at the start), the same for every edge class; a user's edges
/// drop to 0 once its L^u quota is met.
pub fn dfcp_superframe(
    nodes: &NodeSet,
    pairs: &[Pair],
    slots: usize,
    wp: &WeightParams,
    config: &BaselineConfig,
    period: usize,
    superframe: usize,
) -> SuperframePlan {
    let users = nodes.p_user_range();
    let quota: Vec<u32> = nodes.p_users().map(|u| wp.quota_of(nodes, u)).collect();
    let mut served = vec![0u32; users.len()];
    let mut age = vec![1i64; pairs.len()];
    let mut out = Vec::with_capacity(slots);
    for _ in 0..slots {
        let edges: Vec<WeightedEdge> = pairs
            .iter()
            .zip(&age)
            .map(|(p, &a)| {
                let open = match nodes.kind(p.hi()) {
                    NodeKind::PUser => {
                        let u = p.hi().0 - users.start;
                        served[u] < quota[u]
                    }
                    _ => true,
                };
                (p.lo().0, p.hi().0, if open { config.fairness_gain * a } else { 0 })
            })
            .collect();
        let chosen = max_weight_matching(nodes.len(), &edges);
        for a in age.iter_mut() {
            *a += 1;
        }
        let mut matching = Vec::with_capacity(chosen.len());
        for k in chosen {
            let p = pairs[k];
            age[k] = 1;
            if nodes.kind(p.hi()) == NodeKind::PUser {
                served[p.hi().0 - users.start] += 1;
            }
            matching.push(p);
        }
        out.push(matching);
    }
    SuperframePlan {
        period,
        superframe,
        slots: out,
    }
}

/// DFCP over every superframe. It never sees a reflector plan, so its
/// output depends on visibility alone.
pub fn dfcp_plan(
    vis: &VisibilitySet,
    nodes: &NodeSet,
    grid: &TimeGrid,
    wp: &WeightParams,
    config: &BaselineConfig,
) -> Result<PhasedArrayPlan, PlanError> {
    check_alignment(vis, nodes, grid, None)?;
    wp.validate(nodes)?;
    config.validate()?;
    let slots = grid.slots_per_superframe();
    let superframes = superframe_index(vis)
        .into_par_iter()
        .map(|(m, k)| dfcp_superframe(nodes, &phased_array_pairs(vis, nodes, m, k), slots, wp, config, m, k))
        .collect();
    Ok(PhasedArrayPlan { superframes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::NodeId;
    use crate::validate::validate_reflector_plan;

    fn params(gs_links: u32) -> ReflectorPlanParams {
        ReflectorPlanParams {
            gs_links,
            ..ReflectorPlanParams::default()
        }
    }

    fn terminal_use(links: &LinkSet, nodes: &NodeSet) -> u32 {
        nodes
            .satellites()
            .map(|s| links.iter().filter(|p| p.contains(s)).count() as u32)
            .sum()
    }

    #[test]
    fn two_satellites_two_users_saturate() {
        let nodes = NodeSet::anonymous(2, 2, 2, 0, 0);
        let vis = VisibilitySet::full(&nodes, 3, 1);
        let plan = laa_pmm_plan(&vis, &nodes, &params(0)).unwrap();
        for m in 0..3 {
            assert_eq!(terminal_use(plan.links(m), &nodes), 4);
            assert_eq!(plan.links(m).len(), 3);
        }
    }

    #[test]
    fn without_users_pairs_satellites_and_grounds() {
        let nodes = NodeSet::anonymous(2, 4, 0, 0, 1);
        let vis = VisibilitySet::full(&nodes, 1, 1);
        let plan = laa_pmm_plan(&vis, &nodes, &params(2)).unwrap();
        let links = plan.links(0);
        assert!(links.contains(&Pair::of(0, 4)) && links.contains(&Pair::of(1, 4)));
        // 8 terminals - 2 ground = 6 = three inter-satellite links
        assert_eq!(links.len(), 5);
        assert_eq!(plan.deficit(0), 0);
        let violations = validate_reflector_plan(&plan, &vis, &nodes).unwrap();
        assert!(violations.iter().all(|v| !v.is_structural()));
    }

    #[test]
    fn ground_shortfall_is_recorded() {
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 1);
        let mut vis = VisibilitySet::full(&nodes, 1, 1);
        vis.set_period(0, Pair::of(1, 2), false);
        let plan = laa_pmm_plan(&vis, &nodes, &params(2)).unwrap();
        assert_eq!(plan.deficit(0), 1);
    }

    #[test]
    fn dfcp_disjoint_pairs_always_matched() {
        let nodes = NodeSet::anonymous(2, 4, 0, 0, 0);
        let pairs = vec![Pair::of(0, 1), Pair::of(2, 3)];
        let sf = dfcp_superframe(&nodes, &pairs, 5, &WeightParams::default(), &BaselineConfig::default(), 0, 0);
        assert!(sf.slots.iter().all(|m| m == &pairs));
    }

    #[test]
    fn dfcp_stops_serving_satisfied_user() {
        let nodes = NodeSet::anonymous(2, 1, 0, 1, 0);
        let pairs = vec![Pair::of(0, 1)];
        let wp = WeightParams {
            quota: 2,
            ..WeightParams::default()
        };
        let sf = dfcp_superframe(&nodes, &pairs, 6, &wp, &BaselineConfig::default(), 0, 0);
        let served: Vec<usize> = sf.slots.iter().map(|m| m.len()).collect();
        assert_eq!(served, vec![1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn dfcp_rotates_contended_pairs() {
        // a star around S0: aging hands the terminal to each leaf in turn
        let nodes = NodeSet::anonymous(2, 3, 0, 0, 0);
        let pairs = vec![Pair::of(0, 1), Pair::of(0, 2)];
        let sf = dfcp_superframe(&nodes, &pairs, 4, &WeightParams::default(), &BaselineConfig::default(), 0, 0);
        let partners: Vec<NodeId> = sf.slots.iter().map(|m| m[0].hi()).collect();
        assert_ne!(partners[0], partners[1]);
        assert_eq!(partners[0], partners[2]);
    }
}
