//! Independent checkers for emitted plans.
//!
//! These re-derive every constraint from the raw plan instead of trusting the
//! planner's bookkeeping.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ValidationError;
use crate::types::{
    AccessWindow, NodeId, NodeKind, NodeSet, Pair, PhasedArrayPlan, ReflectorPlan, SuperframePlan,
    TimeGrid, VisibilitySet,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// x(i,j,m) = 1 while y(i,j,m) = 0.
    NotVisible { period: usize, pair: Pair },
    /// Reflector link between node kinds that cannot hold one (user-user,
    /// user-GS, anything touching a P-user). y is identically zero there, so
    /// this is also a visibility breach.
    LinkKind { period: usize, pair: Pair },
    /// Satellite degree above r.
    SatelliteDegree { period: usize, node: NodeId, degree: u32, bound: u32 },
    /// R-user with more than one link.
    UserDegree { period: usize, node: NodeId, degree: u32 },
    /// R-user without access in a length-f window.
    AccessWindow { window: AccessWindow },
    /// Fewer than L_G - p(m) satellite-ground links.
    GroundFloor { period: usize, links: u32, required: u32, deficit: u32 },
    /// Deficit vector length differs from the link tensor.
    DeficitShape { periods: usize, deficits: usize },
}

impl Violation {
    /// Short name of the violated constraint.
    pub fn constraint(&self) -> &'static str {
        match self {
            Violation::NotVisible { .. } | Violation::LinkKind { .. } => "visibility",
            Violation::SatelliteDegree { .. } => "satellite-degree",
            Violation::UserDegree { .. } => "user-degree",
            Violation::AccessWindow { .. } => "access-window",
            Violation::GroundFloor { .. } => "ground-floor",
            Violation::DeficitShape { .. } => "deficit-shape",
        }
    }

    /// Physical constraints every reflector plan must meet. The others
    /// (access frequency, ground floor) are policy of the ILP planner and are
    /// only reported for the baseline.
    pub fn is_structural(&self) -> bool {
        !matches!(
            self,
            Violation::AccessWindow { .. } | Violation::GroundFloor { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eq = self.constraint();
        match self {
            Violation::NotVisible { period, pair } => {
                write!(f, "{eq}: link {pair} in period {period} without visibility")
            }
            Violation::LinkKind { period, pair } => {
                write!(f, "{eq}: link {pair} in period {period} joins incompatible nodes")
            }
            Violation::SatelliteDegree { period, node, degree, bound } => write!(
                f,
                "{eq}: satellite {node} holds {degree} links in period {period}, bound {bound}"
            ),
            Violation::UserDegree { period, node, degree } => {
                write!(f, "{eq}: R-user {node} holds {degree} links in period {period}")
            }
            Violation::AccessWindow { window } => write!(
                f,
                "{eq}: R-user {} has no access in periods {}..{}",
                window.user,
                window.start,
                window.start + window.len
            ),
            Violation::GroundFloor { period, links, required, deficit } => write!(
                f,
                "{eq}: period {period} has {links} ground links, needs {required} minus deficit {deficit}"
            ),
            Violation::DeficitShape { periods, deficits } => {
                write!(f, "{eq}: {deficits} deficits recorded for {periods} periods")
            }
        }
    }
}

/// Checks every link-program constraint on a reflector plan. An empty list
/// means all hold; windows listed in `plan.waived` are exempt from the
/// access-frequency check.
pub fn validate_reflector_plan(
    plan: &ReflectorPlan,
    vis: &VisibilitySet,
    nodes: &NodeSet,
) -> Result<Vec<Violation>, ValidationError> {
    if vis.node_count() != nodes.len() {
        return Err(ValidationError::Dimension(format!(
            "visibility has {} nodes, scenario has {}",
            vis.node_count(),
            nodes.len()
        )));
    }
    if plan.periods() > vis.periods() {
        return Err(ValidationError::Dimension(format!(
            "plan has {} periods, visibility only {}",
            plan.periods(),
            vis.periods()
        )));
    }
    let mut out = Vec::new();
    if plan.deficits().len() != plan.periods() {
        out.push(Violation::DeficitShape {
            periods: plan.periods(),
            deficits: plan.deficits().len(),
        });
    }
    let n = nodes.len();
    let params = plan.params;
    let mut access = vec![vec![false; plan.periods()]; n];

    for m in 0..plan.periods() {
        let mut degree = vec![0u32; n];
        let mut gs_links = 0u32;
        for &pair in plan.links(m) {
            if pair.hi().0 >= n {
                return Err(ValidationError::UnknownNode(pair.hi()));
            }
            if !nodes.reflector_capable(pair) {
                out.push(Violation::LinkKind { period: m, pair });
            } else if !vis.period_visible(m, pair.lo(), pair.hi()) {
                out.push(Violation::NotVisible { period: m, pair });
            }
            degree[pair.lo().0] += 1;
            degree[pair.hi().0] += 1;
            let kinds = (nodes.kind(pair.lo()), nodes.kind(pair.hi()));
            match kinds {
                (NodeKind::Satellite, NodeKind::GroundStation) => gs_links += 1,
                (NodeKind::Satellite, NodeKind::RUser) => access[pair.hi().0][m] = true,
                _ => {}
            }
        }
        for node in nodes.iter() {
            let d = degree[node.id.0];
            match node.kind {
                NodeKind::Satellite if d > params.terminals => {
                    out.push(Violation::SatelliteDegree {
                        period: m,
                        node: node.id,
                        degree: d,
                        bound: params.terminals,
                    })
                }
                NodeKind::RUser if d > 1 => out.push(Violation::UserDegree {
                    period: m,
                    node: node.id,
                    degree: d,
                }),
                _ => {}
            }
        }
        let deficit = plan.deficits().get(m).copied().unwrap_or(0);
        if gs_links + deficit < params.gs_links {
            out.push(Violation::GroundFloor {
                period: m,
                links: gs_links,
                required: params.gs_links,
                deficit,
            });
        }
    }

    let f = params.access_window;
    let waived: BTreeSet<_> = plan.waived.iter().copied().collect();
    if f >= 1 && plan.periods() >= f {
        for user in nodes.r_users() {
            for start in 0..=plan.periods() - f {
                let window = AccessWindow { user, start, len: f };
                if !access[user.0][start..start + f].iter().any(|&a| a) && !waived.contains(&window) {
                    out.push(Violation::AccessWindow { window });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingViolation {
    NodeReused { period: usize, superframe: usize, slot: usize, node: NodeId },
    NotVisible { period: usize, superframe: usize, slot: usize, pair: Pair },
    NotPhasedArray { period: usize, superframe: usize, slot: usize, pair: Pair },
    SlotCount { period: usize, superframe: usize, slots: usize, expected: usize },
}

impl fmt::Display for MatchingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingViolation::NodeReused { period, superframe, slot, node } => write!(
                f,
                "node {node} matched twice at period {period} superframe {superframe} slot {slot}"
            ),
            MatchingViolation::NotVisible { period, superframe, slot, pair } => write!(
                f,
                "pair {pair} not visible at period {period} superframe {superframe} slot {slot}"
            ),
            MatchingViolation::NotPhasedArray { period, superframe, slot, pair } => write!(
                f,
                "pair {pair} lacks phased arrays at period {period} superframe {superframe} slot {slot}"
            ),
            MatchingViolation::SlotCount { period, superframe, slots, expected } => write!(
                f,
                "period {period} superframe {superframe} has {slots} slots, expected {expected}"
            ),
        }
    }
}

/// Matching validity for one superframe: disjoint pairs, visible,
/// phased-array capable.
pub fn validate_matching(
    sf: &SuperframePlan,
    vis: &VisibilitySet,
    nodes: &NodeSet,
) -> Vec<MatchingViolation> {
    let (period, superframe) = (sf.period, sf.superframe);
    let mut out = Vec::new();
    for (slot, matching) in sf.slots.iter().enumerate() {
        let mut used = BTreeSet::new();
        for &pair in matching {
            for node in [pair.lo(), pair.hi()] {
                if !used.insert(node) {
                    out.push(MatchingViolation::NodeReused { period, superframe, slot, node });
                }
            }
            if !nodes.phased_array_capable(pair) {
                out.push(MatchingViolation::NotPhasedArray { period, superframe, slot, pair });
            } else if !vis.superframe_visible(period, superframe, pair.lo(), pair.hi()) {
                out.push(MatchingViolation::NotVisible { period, superframe, slot, pair });
            }
        }
    }
    out
}

/// [`validate_matching`] over a whole plan, plus a slot-count check per
/// superframe.
pub fn validate_phased_array_plan(
    plan: &PhasedArrayPlan,
    vis: &VisibilitySet,
    nodes: &NodeSet,
    grid: &TimeGrid,
) -> Vec<MatchingViolation> {
    let expected = grid.slots_per_superframe();
    let mut out = Vec::new();
    for sf in &plan.superframes {
        if sf.slots.len() != expected {
            out.push(MatchingViolation::SlotCount {
                period: sf.period,
                superframe: sf.superframe,
                slots: sf.slots.len(),
                expected,
            });
        }
        out.extend(validate_matching(sf, vis, nodes));
    }
    out
}
