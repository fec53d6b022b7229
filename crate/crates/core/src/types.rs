//! Domain types shared by the planners and the evaluator.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Dense node identifier. Satellites come first, then R-users, P-users and
/// ground stations, so comparing ids gives a reproducible tie-break order.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Satellite,
    RUser,
    PUser,
    GroundStation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalCount {
    Finite(u32),
    /// Ground stations can host as many reflector links as needed.
    Unbounded,
}

impl TerminalCount {
    pub fn allows(self, degree: u32) -> bool {
        match self {
            TerminalCount::Finite(n) => degree <= n,
            TerminalCount::Unbounded => true,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            TerminalCount::Finite(n) => Some(n),
            TerminalCount::Unbounded => None,
        }
    }
}

/// Where a node is: an orbit in the catalog (with a phase offset in
/// nondimensional time) or a geodetic site on the rotating Earth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Trajectory {
    Orbit { orbit: String, phase: f64 },
    Ground { lat_deg: f64, lon_deg: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub kind: NodeKind,
    pub reflector_terminals: TerminalCount,
    pub has_phased_array: bool,
    pub trajectory: Option<Trajectory>,
}

impl Node {
    pub fn is_satellite(&self) -> bool {
        self.kind == NodeKind::Satellite
    }
}

/// An immutable, id-ordered node population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    nodes: Vec<Node>,
    satellites: usize,
    r_users: usize,
    p_users: usize,
}

/// Named node description used to build a [`NodeSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    pub trajectory: Option<Trajectory>,
}

impl NodeSpec {
    pub fn new(name: impl Into<String>, trajectory: Option<Trajectory>) -> Self {
        NodeSpec {
            name: name.into(),
            trajectory,
        }
    }

    pub fn bare(name: impl Into<String>) -> Self {
        Self::new(name, None)
    }
}

impl NodeSet {
    /// Assigns dense ids: satellites, then R-users, P-users, ground stations.
    pub fn new(
        reflector_terminals: u32,
        satellites: Vec<NodeSpec>,
        r_users: Vec<NodeSpec>,
        p_users: Vec<NodeSpec>,
        ground_stations: Vec<NodeSpec>,
    ) -> Self {
        let counts = (satellites.len(), r_users.len(), p_users.len());
        let groups = [
            (NodeKind::Satellite, satellites),
            (NodeKind::RUser, r_users),
            (NodeKind::PUser, p_users),
            (NodeKind::GroundStation, ground_stations),
        ];
        let mut nodes = Vec::new();
        for (kind, specs) in groups {
            for spec in specs {
                let (terminals, pa) = match kind {
                    NodeKind::Satellite => (TerminalCount::Finite(reflector_terminals), true),
                    NodeKind::RUser => (TerminalCount::Finite(1), false),
                    NodeKind::PUser => (TerminalCount::Finite(0), true),
                    NodeKind::GroundStation => (TerminalCount::Unbounded, false),
                };
                nodes.push(Node {
                    id: NodeId(nodes.len()),
                    name: spec.name,
                    kind,
                    reflector_terminals: terminals,
                    has_phased_array: pa,
                    trajectory: spec.trajectory,
                });
            }
        }
        NodeSet {
            nodes,
            satellites: counts.0,
            r_users: counts.1,
            p_users: counts.2,
        }
    }

    /// Anonymous population, handy in tests: names are `S0`, `R0`, `P0`, `G0`...
    pub fn anonymous(
        reflector_terminals: u32,
        satellites: usize,
        r_users: usize,
        p_users: usize,
        ground_stations: usize,
    ) -> Self {
        let names = |prefix: &str, n: usize| {
            (0..n)
                .map(|i| NodeSpec::bare(format!("{prefix}{i}")))
                .collect::<Vec<_>>()
        };
        Self::new(
            reflector_terminals,
            names("S", satellites),
            names("R", r_users),
            names("P", p_users),
            names("G", ground_stations),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.0].kind
    }

    pub fn by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn satellite_range(&self) -> Range<usize> {
        0..self.satellites
    }

    pub fn r_user_range(&self) -> Range<usize> {
        self.satellites..self.satellites + self.r_users
    }

    pub fn p_user_range(&self) -> Range<usize> {
        let s = self.satellites + self.r_users;
        s..s + self.p_users
    }

    pub fn ground_range(&self) -> Range<usize> {
        self.satellites + self.r_users + self.p_users..self.nodes.len()
    }

    pub fn satellites(&self) -> impl Iterator<Item = NodeId> {
        self.satellite_range().map(NodeId)
    }

    pub fn r_users(&self) -> impl Iterator<Item = NodeId> {
        self.r_user_range().map(NodeId)
    }

    pub fn p_users(&self) -> impl Iterator<Item = NodeId> {
        self.p_user_range().map(NodeId)
    }

    pub fn ground_stations(&self) -> impl Iterator<Item = NodeId> {
        self.ground_range().map(NodeId)
    }

    pub fn satellite_count(&self) -> usize {
        self.satellites
    }

    /// Reflector terminals per satellite (uniform across the constellation).
    pub fn reflector_terminals(&self) -> u32 {
        self.nodes
            .first()
            .filter(|n| n.is_satellite())
            .and_then(|n| n.reflector_terminals.finite())
            .unwrap_or(0)
    }

    /// Whether a reflector link may join these two nodes at all.
    pub fn reflector_capable(&self, pair: Pair) -> bool {
        use NodeKind::*;
        matches!(
            (self.kind(pair.lo()), self.kind(pair.hi())),
            (Satellite, Satellite) | (Satellite, RUser) | (Satellite, GroundStation)
        )
    }

    /// Whether a phased-array link may join these two nodes at all.
    pub fn phased_array_capable(&self, pair: Pair) -> bool {
        use NodeKind::*;
        matches!(
            (self.kind(pair.lo()), self.kind(pair.hi())),
            (Satellite, Satellite) | (Satellite, PUser)
        )
    }
}

/// Unordered node pair, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair(NodeId, NodeId);

impl Pair {
    /// Panics on a self-pair.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        assert_ne!(a, b, "a pair needs two distinct nodes");
        if a < b {
            Pair(a, b)
        } else {
            Pair(b, a)
        }
    }

    pub fn of(a: usize, b: usize) -> Self {
        Self::new(NodeId(a), NodeId(b))
    }

    pub fn lo(self) -> NodeId {
        self.0
    }

    pub fn hi(self) -> NodeId {
        self.1
    }

    pub fn contains(self, n: NodeId) -> bool {
        self.0 == n || self.1 == n
    }

    pub fn other(self, n: NodeId) -> Option<NodeId> {
        if self.0 == n {
            Some(self.1)
        } else if self.1 == n {
            Some(self.0)
        } else {
            None
        }
    }

    /// Position in the row-major upper-triangular enumeration of `n` nodes.
    pub fn index(self, n: usize) -> usize {
        let (i, j) = (self.0 .0, self.1 .0);
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

pub type LinkSet = BTreeSet<Pair>;

/// Reflector period / superframe / slot hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub period_count: usize,
    pub period_seconds: u64,
    pub superframes_per_period: u32,
    pub switching_superframes: u32,
    pub slot_seconds: u64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            period_count: 720,
            period_seconds: 3600,
            superframes_per_period: 12,
            switching_superframes: 2,
            slot_seconds: 10,
        }
    }
}

impl TimeGrid {
    pub fn with_periods(period_count: usize) -> Self {
        TimeGrid {
            period_count,
            ..TimeGrid::default()
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.period_count == 0 {
            return Err(GridError::NonPositive {
                field: "period_count",
            });
        }
        if self.period_seconds == 0 {
            return Err(GridError::NonPositive {
                field: "period_seconds",
            });
        }
        if self.superframes_per_period == 0 {
            return Err(GridError::NonPositive {
                field: "superframes_per_period",
            });
        }
        if self.slot_seconds == 0 {
            return Err(GridError::NonPositive {
                field: "slot_seconds",
            });
        }
        if self.switching_superframes >= self.superframes_per_period {
            return Err(GridError::SwitchingTooLong {
                switching: self.switching_superframes,
                total: self.superframes_per_period,
            });
        }
        let sf = u64::from(self.superframes_per_period);
        if !self.period_seconds.is_multiple_of(sf) {
            return Err(GridError::NotDivisible {
                what: "period",
                len: self.period_seconds,
                unit: "superframe count",
                unit_len: sf,
            });
        }
        if !self.superframe_seconds().is_multiple_of(self.slot_seconds) {
            return Err(GridError::NotDivisible {
                what: "superframe",
                len: self.superframe_seconds(),
                unit: "slot",
                unit_len: self.slot_seconds,
            });
        }
        Ok(())
    }

    pub fn superframe_seconds(&self) -> u64 {
        self.period_seconds / u64::from(self.superframes_per_period)
    }

    /// T, the number of slots in one superframe.
    pub fn slots_per_superframe(&self) -> usize {
        (self.superframe_seconds() / self.slot_seconds) as usize
    }

    pub fn slots_per_period(&self) -> usize {
        self.slots_per_superframe() * self.superframes_per_period as usize
    }

    pub fn total_slots(&self) -> usize {
        self.slots_per_period() * self.period_count
    }

    pub fn superframe_count(&self) -> usize {
        self.period_count * self.superframes_per_period as usize
    }

    /// Global slot range covered by one superframe.
    pub fn superframe_slots(&self, period: usize, superframe: usize) -> Range<usize> {
        let t = self.slots_per_superframe();
        let start = period * self.slots_per_period() + superframe * t;
        start..start + t
    }

    pub fn period_slots(&self, period: usize) -> Range<usize> {
        let n = self.slots_per_period();
        period * n..(period + 1) * n
    }

    /// Midpoint of a global slot, in seconds from the scenario epoch.
    pub fn slot_midpoint_seconds(&self, slot: usize) -> f64 {
        (slot as f64 + 0.5) * self.slot_seconds as f64
    }

    pub fn is_switching(&self, superframe: usize) -> bool {
        (superframe as u32) < self.switching_superframes
    }
}

/// Period-level (reflector) and superframe-level (phased-array) visibility.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilitySet {
    node_count: usize,
    periods: usize,
    superframes_per_period: usize,
    period: Vec<Vec<bool>>,
    superframe: Vec<Vec<bool>>,
}

impl VisibilitySet {
    pub fn empty(node_count: usize, periods: usize, superframes_per_period: usize) -> Self {
        let pairs = node_count * node_count.saturating_sub(1) / 2;
        VisibilitySet {
            node_count,
            periods,
            superframes_per_period,
            period: vec![vec![false; pairs]; periods],
            superframe: vec![vec![false; pairs]; periods * superframes_per_period],
        }
    }

    /// Every reflector-capable pair visible every period, every phased-array
    /// capable pair visible every superframe.
    pub fn full(nodes: &NodeSet, periods: usize, superframes_per_period: usize) -> Self {
        let mut vis = Self::empty(nodes.len(), periods, superframes_per_period);
        for pair in all_pairs(nodes.len()) {
            for m in 0..periods {
                if nodes.reflector_capable(pair) {
                    vis.set_period(m, pair, true);
                }
                for k in 0..superframes_per_period {
                    if nodes.phased_array_capable(pair) {
                        vis.set_superframe(m, k, pair, true);
                    }
                }
            }
        }
        vis
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn superframes_per_period(&self) -> usize {
        self.superframes_per_period
    }

    pub fn set_period(&mut self, period: usize, pair: Pair, visible: bool) {
        let idx = pair.index(self.node_count);
        self.period[period][idx] = visible;
    }

    pub fn set_superframe(&mut self, period: usize, superframe: usize, pair: Pair, visible: bool) {
        let idx = pair.index(self.node_count);
        self.superframe[period * self.superframes_per_period + superframe][idx] = visible;
    }

    /// y(i, j, m). Always false for i == j.
    pub fn period_visible(&self, period: usize, a: NodeId, b: NodeId) -> bool {
        a != b && self.period[period][Pair::new(a, b).index(self.node_count)]
    }

    pub fn superframe_visible(
        &self,
        period: usize,
        superframe: usize,
        a: NodeId,
        b: NodeId,
    ) -> bool {
        a != b
            && self.superframe[period * self.superframes_per_period + superframe]
                [Pair::new(a, b).index(self.node_count)]
    }

    pub fn period_pairs(&self, period: usize) -> impl Iterator<Item = Pair> + '_ {
        let n = self.node_count;
        all_pairs(n).filter(move |p| self.period[period][p.index(n)])
    }

    /// Edge set E of the phased-array graph G(V, E, W) for one superframe.
    pub fn superframe_pairs(&self, period: usize, superframe: usize) -> Vec<Pair> {
        let n = self.node_count;
        let row = &self.superframe[period * self.superframes_per_period + superframe];
        all_pairs(n).filter(|p| row[p.index(n)]).collect()
    }
}

/// All unordered pairs of `n` nodes in pair-index order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = Pair> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| Pair::of(i, j)))
}

/// Parameters a reflector plan was produced with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectorPlanParams {
    /// r, reflector terminals per satellite.
    pub terminals: u32,
    /// f, every R-user must be served at least once in any f consecutive periods.
    pub access_window: usize,
    /// L_G, desired number of satellite-ground links per period.
    pub gs_links: u32,
    /// P, penalty per missing satellite-ground link.
    pub penalty: i64,
}

impl Default for ReflectorPlanParams {
    fn default() -> Self {
        ReflectorPlanParams {
            terminals: 2,
            access_window: 2,
            gs_links: 2,
            penalty: 1000,
        }
    }
}

/// One length-f access window of an R-user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AccessWindow {
    pub user: NodeId,
    pub start: usize,
    pub len: usize,
}

impl AccessWindow {
    pub fn periods(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// The R-Topo: reflector links per period plus the ground-link deficit p(m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectorPlan {
    pub params: ReflectorPlanParams,
    links: Vec<LinkSet>,
    deficits: Vec<u32>,
    /// Access windows that could not be honoured (no visible satellite, or a
    /// soft window left uncovered). They are exempt from validation and
    /// reported instead.
    pub waived: Vec<AccessWindow>,
}

impl ReflectorPlan {
    pub fn new(params: ReflectorPlanParams, periods: usize) -> Self {
        ReflectorPlan {
            params,
            links: vec![LinkSet::new(); periods],
            deficits: vec![0; periods],
            waived: Vec::new(),
        }
    }

    pub fn from_links(params: ReflectorPlanParams, links: Vec<LinkSet>, deficits: Vec<u32>) -> Self {
        assert_eq!(links.len(), deficits.len());
        ReflectorPlan {
            params,
            links,
            deficits,
            waived: Vec::new(),
        }
    }

    pub fn periods(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self, period: usize) -> &LinkSet {
        &self.links[period]
    }

    pub fn links_mut(&mut self, period: usize) -> &mut LinkSet {
        &mut self.links[period]
    }

    pub fn has_link(&self, period: usize, a: NodeId, b: NodeId) -> bool {
        a != b && self.links[period].contains(&Pair::new(a, b))
    }

    pub fn deficit(&self, period: usize) -> u32 {
        self.deficits[period]
    }

    pub fn deficits(&self) -> &[u32] {
        &self.deficits
    }

    pub fn set_deficit(&mut self, period: usize, deficit: u32) {
        self.deficits[period] = deficit;
    }

    /// Reflector links carrying traffic during a superframe. While terminals
    /// re-point (the switching superframes) only links kept from the previous
    /// period stay up.
    pub fn operational_links(&self, grid: &TimeGrid, period: usize, superframe: usize) -> LinkSet {
        if !grid.is_switching(superframe) {
            return self.links[period].clone();
        }
        match period.checked_sub(1) {
            Some(prev) => self.links[period]
                .intersection(&self.links[prev])
                .copied()
                .collect(),
            None => LinkSet::new(),
        }
    }

    /// Objective of the link program: inter-satellite links minus the
    /// ground-link deficit penalty.
    pub fn objective(&self, nodes: &NodeSet) -> i64 {
        let ss: usize = self
            .links
            .iter()
            .map(|l| {
                l.iter()
                    .filter(|p| nodes.get(p.lo()).is_satellite() && nodes.get(p.hi()).is_satellite())
                    .count()
            })
            .sum();
        let deficit: i64 = self.deficits.iter().map(|&d| i64::from(d)).sum();
        ss as i64 - self.params.penalty * deficit
    }
}

/// Phased-array matchings M_1..M_T of one superframe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperframePlan {
    pub period: usize,
    pub superframe: usize,
    pub slots: Vec<Vec<Pair>>,
}

/// The P-Topo: every superframe's matching sequence, in time order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasedArrayPlan {
    pub superframes: Vec<SuperframePlan>,
}

impl PhasedArrayPlan {
    pub fn superframe(&self, period: usize, superframe: usize) -> Option<&SuperframePlan> {
        self.superframes
            .iter()
            .find(|s| s.period == period && s.superframe == superframe)
    }
}
