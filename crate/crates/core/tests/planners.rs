mod common;

use cpd_core::baselines::{dfcp_plan, laa_pmm_period, BaselineConfig};
use cpd_core::eval::ranging_partners;
use cpd_core::pcpd::{phased_array_pairs, ranging_weight, step_superframe, SuperframeInput};
use cpd_core::{
    partition_topology, plan_phased_array, validate_phased_array_plan, validate_reflector_plan, LinkSet, NodeId,
    NodeKind, NodeSet, Pair, ReflectorPlan, ReflectorPlanParams, TimeGrid, VisibilitySet, WeightParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn input<'a>(nodes: &'a NodeSet, pairs: Vec<Pair>, rl: &'a LinkSet, slots: usize, seed: u64) -> SuperframeInput<'a> {
    SuperframeInput {
        nodes,
        period: 0,
        superframe: 0,
        pairs,
        partition: partition_topology(rl, nodes, seed),
        reflector_links: rl,
        slots,
    }
}

fn all_pa_pairs(nodes: &NodeSet) -> Vec<Pair> {
    let n = nodes.len();
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| Pair::of(a, b)))
        .filter(|&p| nodes.phased_array_capable(p))
        .collect()
}

#[test]
fn complete_four_satellite_slot_weighs_sixty() {
    let nodes = NodeSet::anonymous(2, 4, 0, 0, 0);
    let rl = LinkSet::new();
    let pairs = all_pa_pairs(&nodes);
    let (plan, _) = step_superframe(&input(&nodes, pairs.clone(), &rl, 1, 0), &WeightParams::default());
    assert_eq!(plan.slots[0].len(), 2);
    // every fresh pair carries C_r = 30 and nothing else
    let edges: Vec<_> = pairs.iter().map(|p| (p.lo().0, p.hi().0, 30)).collect();
    assert_eq!(common::brute_matching_weight(4, &edges), 60);
    assert_eq!(plan.slots[0].len() as i64 * 30, 60);
}

#[test]
fn ranging_reaches_every_visible_satellite_without_users() {
    let nodes = NodeSet::anonymous(2, 4, 0, 0, 1);
    let rl = LinkSet::new();
    let (plan, _) = step_superframe(&input(&nodes, all_pa_pairs(&nodes), &rl, 30, 0), &WeightParams::default());
    assert_eq!(ranging_partners(&plan, &rl, &nodes), vec![3, 3, 3, 3]);
}

#[test]
fn reflector_links_count_as_ranging() {
    let nodes = NodeSet::anonymous(2, 4, 0, 0, 1);
    let rl: LinkSet = [Pair::of(0, 1), Pair::of(2, 3), Pair::of(1, 4)].into_iter().collect();
    let (plan, _) = step_superframe(&input(&nodes, all_pa_pairs(&nodes), &rl, 30, 0), &WeightParams::default());
    assert_eq!(ranging_partners(&plan, &rl, &nodes), vec![3, 3, 3, 3]);
    // the RL pairs never needed a phased-array link for ranging
    assert!(plan.slots.iter().flatten().all(|p| *p != Pair::of(0, 1)));
}

fn random_superframe(rng: &mut ChaCha8Rng) -> (NodeSet, Vec<Pair>, LinkSet) {
    let nodes = NodeSet::anonymous(2, rng.gen_range(2..=5), 0, rng.gen_range(0..=6), 1);
    let pairs: Vec<Pair> = all_pa_pairs(&nodes).into_iter().filter(|_| rng.gen_bool(0.7)).collect();
    let mut rl = LinkSet::new();
    let mut deg = vec![0; nodes.len()];
    let g = nodes.ground_range().start;
    let sats = nodes.satellite_range();
    for a in sats.clone() {
        for b in (a + 1..sats.end).chain([g]) {
            if deg[a] < 2 && (b == g || deg[b] < 2) && rng.gen_bool(0.3) {
                rl.insert(Pair::of(a, b));
                deg[a] += 1;
                deg[b] += 1;
            }
        }
    }
    (nodes, pairs, rl)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn superframe_invariants(seed in any::<u64>(), slots in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nodes, pairs, rl) = random_superframe(&mut rng);
        let wp = WeightParams { quota: rng.gen_range(0..=4), ..WeightParams::default() };
        let inp = input(&nodes, pairs.clone(), &rl, slots, seed);
        let (plan, _) = step_superframe(&inp, &wp);
        let users = nodes.p_user_range();
        let mut served = vec![0u32; nodes.len()];
        let mut prev = step_superframe(&input(&nodes, pairs.clone(), &rl, 0, seed), &wp).1;
        for (t, m) in plan.slots.iter().enumerate() {
            let mut used = vec![false; nodes.len()];
            for p in m {
                prop_assert!(pairs.contains(p), "invisible pair {p:?}");
                prop_assert!(!used[p.lo().0] && !used[p.hi().0], "node matched twice");
                used[p.lo().0] = true;
                used[p.hi().0] = true;
                // quota: once met, no further links
                if nodes.kind(p.hi()) == NodeKind::PUser {
                    prop_assert!(served[p.hi().0] < wp.quota);
                    served[p.hi().0] += 1;
                }
                // RL pairs never gain a ranging weight
                if rl.contains(p) {
                    prop_assert_eq!(ranging_weight(&rl, &prev, &wp, p.lo(), p.hi()), 0);
                }
            }
            let next = step_superframe(&input(&nodes, pairs.clone(), &rl, t + 1, seed), &wp).1;
            for u in users.clone() {
                let k = u - users.start;
                let expect = if used[u] { 1 } else { prev.access[k] + 1 };
                prop_assert_eq!(next.access[k], expect);
            }
            for (c, members) in inp.partition.ugsat_sets.iter().enumerate() {
                let grounded = m.iter().any(|p| {
                    let (a, b) = (p.lo(), p.hi());
                    (members.contains(&a) && inp.partition.is_gsat(b)) || (members.contains(&b) && inp.partition.is_gsat(a))
                });
                let expect = if grounded { 1 } else { prev.grounding[c] + 1 };
                prop_assert_eq!(next.grounding[c], expect);
            }
            prev = next;
        }
    }
}

#[test]
fn zero_quota_users_are_never_served() {
    let nodes = NodeSet::anonymous(2, 3, 0, 4, 1);
    let grid = TimeGrid::with_periods(2);
    let vis = VisibilitySet::full(&nodes, 2, grid.superframes_per_period as usize);
    let rplan = ReflectorPlan::new(ReflectorPlanParams::default(), 2);
    let wp = WeightParams {
        quota: 0,
        ..WeightParams::default()
    };
    let plan = plan_phased_array(&vis, &nodes, &grid, &rplan, &wp, 1).unwrap();
    assert!(validate_phased_array_plan(&plan, &vis, &nodes, &grid).is_empty());
    for sf in &plan.superframes {
        for p in sf.slots.iter().flatten() {
            assert_ne!(nodes.kind(p.hi()), NodeKind::PUser);
        }
    }
}

#[test]
fn dfcp_ignores_the_reflector_topology() {
    let nodes = NodeSet::anonymous(2, 4, 2, 8, 2);
    let grid = TimeGrid::with_periods(2);
    let mut vis = VisibilitySet::full(&nodes, 2, grid.superframes_per_period as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in all_pa_pairs(&nodes) {
        if rng.gen_bool(0.3) {
            vis.set_superframe(0, 3, p, false);
        }
    }
    let a = dfcp_plan(&vis, &nodes, &grid, &WeightParams::default(), &BaselineConfig::default()).unwrap();
    let b = dfcp_plan(&vis, &nodes, &grid, &WeightParams::default(), &BaselineConfig::default()).unwrap();
    assert_eq!(a, b);
    assert!(validate_phased_array_plan(&a, &vis, &nodes, &grid).is_empty());
}

/// Maximum (links, user links) over every b-matching of the satellite-
/// satellite and satellite-user candidates, with the ground links fixed.
fn brute_laa(nodes: &NodeSet, candidates: &[Pair], cap: &mut Vec<u32>) -> (u32, u32) {
    fn go(k: usize, nodes: &NodeSet, c: &[Pair], cap: &mut Vec<u32>) -> (u32, u32) {
        if k == c.len() {
            return (0, 0);
        }
        let mut best = go(k + 1, nodes, c, cap);
        let (a, b) = (c[k].lo().0, c[k].hi().0);
        if cap[a] > 0 && cap[b] > 0 {
            cap[a] -= 1;
            cap[b] -= 1;
            let (l, u) = go(k + 1, nodes, c, cap);
            let user = u32::from(nodes.kind(c[k].hi()) == NodeKind::RUser);
            best = best.max((l + 1, u + user));
            cap[a] += 1;
            cap[b] += 1;
        }
        best
    }
    go(0, nodes, candidates, cap)
}

#[test]
fn laa_pmm_is_optimal_and_sheds_satellite_links_as_users_grow() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let params = ReflectorPlanParams::default();
    for case in 0..25 {
        let max_users = 5;
        let full = NodeSet::anonymous(2, 4, max_users, 0, 2);
        let mut vis_full = VisibilitySet::full(&full, 1, 1);
        for a in 0..full.len() {
            for b in a + 1..full.len() {
                if rng.gen_bool(0.35) {
                    vis_full.set_period(0, Pair::of(a, b), false);
                }
            }
        }
        let mut previous_ss = u32::MAX;
        for users in 0..=max_users {
            let nodes = NodeSet::anonymous(2, 4, users, 0, 2);
            // map ids: satellites 0..4, users 4..4+users, stations after
            let map = |i: usize| if i < 4 + users { i } else { i + max_users - users };
            let mut vis = VisibilitySet::empty(nodes.len(), 1, 1);
            for a in 0..nodes.len() {
                for b in a + 1..nodes.len() {
                    if vis_full.period_visible(0, NodeId(map(a)), NodeId(map(b))) {
                        vis.set_period(0, Pair::of(a, b), true);
                    }
                }
            }
            let (links, _) = laa_pmm_period(&vis, &nodes, &params, 0);
            let plan = ReflectorPlan::from_links(params, vec![links.clone()], vec![0]);
            assert!(validate_reflector_plan(&plan, &vis, &nodes)
                .unwrap()
                .iter()
                .all(|v| !v.is_structural()));
            let mut cap: Vec<u32> = nodes
                .iter()
                .map(|n| match n.kind {
                    NodeKind::Satellite => 2,
                    NodeKind::RUser => 1,
                    _ => 0,
                })
                .collect();
            for p in links.iter().filter(|p| nodes.kind(p.hi()) == NodeKind::GroundStation) {
                cap[p.lo().0] -= 1;
            }
            let candidates: Vec<Pair> = vis
                .period_pairs(0)
                .filter(|&p| nodes.reflector_capable(p) && nodes.kind(p.hi()) != NodeKind::GroundStation)
                .collect();
            let oracle = brute_laa(&nodes, &candidates, &mut cap);
            let kind_count = |k: NodeKind| links.iter().filter(|p| nodes.kind(p.hi()) == k).count() as u32;
            let ss = kind_count(NodeKind::Satellite);
            let ru = kind_count(NodeKind::RUser);
            assert_eq!((ss + ru, ru), oracle, "case {case}, {users} users");
            assert!(ss <= previous_ss, "case {case}: {ss} > {previous_ss} at {users} users");
            previous_ss = ss;
        }
    }
}

#[test]
fn phased_plans_align_with_partition_seed() {
    let nodes = NodeSet::anonymous(2, 4, 0, 6, 1);
    let grid = TimeGrid::with_periods(1);
    let vis = VisibilitySet::full(&nodes, 1, grid.superframes_per_period as usize);
    let links: LinkSet = [Pair::of(0, 1), Pair::of(0, 4 + 6), Pair::of(2, 3)].into_iter().collect();
    let rplan = ReflectorPlan::from_links(ReflectorPlanParams::default(), vec![links], vec![1]);
    let a = plan_phased_array(&vis, &nodes, &grid, &rplan, &WeightParams::default(), 3).unwrap();
    let b = plan_phased_array(&vis, &nodes, &grid, &rplan, &WeightParams::default(), 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(phased_array_pairs(&vis, &nodes, 0, 0).len(), 6 + 4 * 6);
}
