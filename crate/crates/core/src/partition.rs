//! Grounded / ungrounded satellite partition of a reflector topology.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::{LinkSet, NodeId, NodeKind, NodeSet};

/// G-Sats and the connected groups of UG-Sats for one reflector topology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologyPartition {
    /// Satellites with a reflector path to some ground station.
    pub gsats: BTreeSet<NodeId>,
    /// Components of the remaining satellites under satellite-satellite
    /// reflector links, ordered by smallest member; members sorted.
    pub ugsat_sets: Vec<Vec<NodeId>>,
    /// One representative per UG-Sat set, same order as `ugsat_sets`.
    pub representatives: Vec<NodeId>,
}

impl TopologyPartition {
    pub fn is_gsat(&self, sat: NodeId) -> bool {
        self.gsats.contains(&sat)
    }

    /// Index of the UG-Sat set containing `sat`.
    pub fn component_of(&self, sat: NodeId) -> Option<usize> {
        self.ugsat_sets
            .iter()
            .position(|set| set.binary_search(&sat).is_ok())
    }

    pub fn is_representative(&self, sat: NodeId) -> bool {
        self.representatives.contains(&sat)
    }

    pub fn ugsats(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ugsat_sets.iter().flatten().copied()
    }
}

/// Mixes the scenario seed with a (period, superframe) position so every
/// superframe draws its representatives from an independent stream.
pub fn representative_seed(scenario_seed: u64, period: usize, superframe: usize) -> u64 {
    let mut z = scenario_seed
        ^ (period as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (superframe as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so roots are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Splits the satellites of `links` (one period's reflector links) into
/// G-Sats and UG-Sat components. Satellite-user links play no part: users
/// only access, they never relay.
pub fn partition_topology(links: &LinkSet, nodes: &NodeSet, seed: u64) -> TopologyPartition {
    let mut uf = UnionFind::new(nodes.len());
    for pair in links {
        let (a, b) = (nodes.kind(pair.lo()), nodes.kind(pair.hi()));
        let relays = matches!(
            (a, b),
            (NodeKind::Satellite, NodeKind::Satellite)
                | (NodeKind::Satellite, NodeKind::GroundStation)
        );
        if relays {
            uf.union(pair.lo().0, pair.hi().0);
        }
    }
    let grounded_roots: BTreeSet<usize> = nodes.ground_stations().map(|g| uf.find(g.0)).collect();

    let mut gsats = BTreeSet::new();
    let mut ugsat_sets: Vec<Vec<NodeId>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; nodes.len()];
    for sat in nodes.satellites() {
        let root = uf.find(sat.0);
        if grounded_roots.contains(&root) {
            gsats.insert(sat);
            continue;
        }
        match root_slot[root] {
            Some(i) => ugsat_sets[i].push(sat),
            None => {
                root_slot[root] = Some(ugsat_sets.len());
                ugsat_sets.push(vec![sat]);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let representatives = ugsat_sets
        .iter()
        .map(|set| *set.choose(&mut rng).expect("components are non-empty"))
        .collect();

    TopologyPartition {
        gsats,
        ugsat_sets,
        representatives,
    }
}
