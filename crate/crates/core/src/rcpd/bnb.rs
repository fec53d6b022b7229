//! LP-free branch and bound for [`IlpModel`].
//!
//! Depth-first over variables in model order (period-major, pair index
//! minor), value 1 before 0. A subtree is cut when its combinatorial upper
//! bound cannot beat the incumbent strictly. Once the optimum is proven, a
//! second pass (value 0 before 1, cutting subtrees whose bound falls below
//! the optimum) returns the lexicographically smallest optimal assignment.
//!
//! Upper bound on a partial assignment:
//! * inter-satellite links decided so far, plus per undecided period
//!   min(open pairs, half the satellite terminal supply, half the supply
//!   left after the ground links that are still attainable);
//! * the sum capped by half of all remaining satellite terminals minus the
//!   attainable ground links and a lower bound on the user accesses still
//!   owed (greedy interval stabbing over uncovered windows);
//! * minus P per ground link that can no longer be built and per window
//!   that can no longer be covered.

use std::time::{Duration, Instant};

use crate::error::RcpdError;
use crate::types::NodeKind;

use super::model::{IlpModel, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    /// Search nodes before giving up on the optimality proof.
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            node_limit: 200_000,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub values: Vec<bool>,
    pub objective: i64,
    /// The search space was exhausted, so `objective` is the optimum.
    pub optimal: bool,
    pub nodes: u64,
}

const NONE: usize = usize::MAX;

struct Var {
    a: usize,
    b: usize,
    period: usize,
    kind: VarKind,
    fixed: Option<bool>,
    /// Local R-user index for access variables.
    user: usize,
}

struct Search<'m> {
    model: &'m IlpModel,
    vars: Vec<Var>,
    periods: usize,
    period_start: Vec<usize>,
    node_count: usize,
    /// Per node: Some(bound) for satellites and R-users, None when unbounded.
    cap: Vec<Option<u32>>,
    sats: Vec<usize>,
    /// Windows per user as (start, end, soft) in local periods, by start.
    windows: Vec<Vec<(usize, usize, bool)>>,
    user_node: Vec<usize>,
    required: u32,
    penalty: i64,

    // Bound terms of fully undecided periods, suffix-summed from the back.
    fresh_ss: Vec<i64>,
    fresh_supply: Vec<i64>,
    fresh_ground: Vec<i64>,
    fresh_deficit: Vec<i64>,
    fresh_candidate: Vec<Vec<bool>>,

    // State.
    values: Vec<bool>,
    degree: Vec<u32>,
    ground: Vec<u32>,
    ss: i64,

    best: Option<(i64, Vec<bool>)>,
    nodes: u64,
    limits: SolveLimits,
    started: Instant,
    aborted: bool,
}

impl<'m> Search<'m> {
    fn new(model: &'m IlpModel, kinds: &[NodeKind], terminals: u32, limits: SolveLimits) -> Self {
        let periods = model.periods.len();
        let node_count = kinds.len();
        let mut user_of = vec![NONE; node_count];
        let mut user_node = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            if *k == NodeKind::RUser {
                user_of[i] = user_node.len();
                user_node.push(i);
            }
        }
        let cap = kinds
            .iter()
            .map(|k| match k {
                NodeKind::Satellite => Some(terminals),
                NodeKind::RUser => Some(1),
                _ => None,
            })
            .collect();
        let sats = (0..node_count).filter(|&i| kinds[i] == NodeKind::Satellite).collect();

        let mut period_start = vec![0; periods + 1];
        let vars: Vec<Var> = model
            .vars
            .iter()
            .zip(&model.fixed)
            .map(|(v, &fixed)| {
                let p = v.period - model.periods.start;
                period_start[p + 1] += 1;
                Var {
                    a: v.pair.lo().0,
                    b: v.pair.hi().0,
                    period: p,
                    kind: v.kind,
                    fixed,
                    user: if v.kind == VarKind::SatUser { user_of[v.pair.hi().0] } else { NONE },
                }
            })
            .collect();
        for p in 0..periods {
            period_start[p + 1] += period_start[p];
        }

        let mut windows = vec![Vec::new(); user_node.len()];
        for w in &model.windows {
            let s = w.window.start - model.periods.start;
            windows[user_of[w.window.user.0]].push((s, s + w.window.len, w.soft));
        }
        for list in &mut windows {
            list.sort_unstable();
        }

        let required = model.floors.first().map_or(0, |f| f.required);
        let mut s = Search {
            model,
            vars,
            periods,
            period_start,
            node_count,
            cap,
            sats,
            windows,
            user_node,
            required,
            penalty: model.penalty,
            fresh_ss: vec![0; periods + 1],
            fresh_supply: vec![0; periods + 1],
            fresh_ground: vec![0; periods + 1],
            fresh_deficit: vec![0; periods + 1],
            fresh_candidate: Vec::new(),
            values: vec![false; model.vars.len()],
            degree: vec![0; periods * node_count],
            ground: vec![0; periods],
            ss: 0,
            best: None,
            nodes: 0,
            limits,
            started: Instant::now(),
            aborted: false,
        };
        s.precompute();
        s
    }

    fn rem(&self, p: usize, node: usize) -> u32 {
        match self.cap[node] {
            Some(c) => c.saturating_sub(self.degree[p * self.node_count + node]),
            None => u32::MAX,
        }
    }

    /// Bound terms of period `p` counting only variables from index `from`.
    /// Returns (ss bound, satellite supply, attainable ground links, deficit).
    fn period_terms(&self, p: usize, from: usize, candidate: &mut [bool]) -> (i64, i64, i64, i64) {
        let end = self.period_start[p + 1];
        let mut open_ss = vec![0u32; self.node_count];
        let mut open_any = vec![0u32; self.node_count];
        let mut open_gs = vec![0u32; self.node_count];
        let mut pairs = 0i64;
        for v in &self.vars[from..end] {
            if v.fixed == Some(false) || self.rem(p, v.a) == 0 || self.rem(p, v.b) == 0 {
                continue;
            }
            open_any[v.a] += 1;
            open_any[v.b] += 1;
            match v.kind {
                VarKind::SatSat => {
                    pairs += 1;
                    open_ss[v.a] += 1;
                    open_ss[v.b] += 1;
                }
                VarKind::SatGround => open_gs[v.a] += 1,
                VarKind::SatUser => candidate[v.user] = true,
            }
        }
        let (mut supply, mut ss_supply, mut gs_supply) = (0i64, 0i64, 0i64);
        for &s in &self.sats {
            let r = self.rem(p, s);
            supply += i64::from(r.min(open_any[s]));
            ss_supply += i64::from(r.min(open_ss[s]));
            gs_supply += i64::from(r.min(open_gs[s]));
        }
        let owed = i64::from(self.required.saturating_sub(self.ground[p]));
        let ground = gs_supply.min(owed);
        let ss = pairs.min(ss_supply / 2).min((supply - ground) / 2);
        (ss, supply, ground, owed - ground)
    }

    fn precompute(&mut self) {
        let users = self.user_node.len();
        self.fresh_candidate = vec![vec![false; self.periods]; users];
        for p in (0..self.periods).rev() {
            let mut cand = vec![false; users];
            let (ss, supply, ground, deficit) = self.period_terms(p, self.period_start[p], &mut cand);
            self.fresh_ss[p] = self.fresh_ss[p + 1] + ss;
            self.fresh_supply[p] = self.fresh_supply[p + 1] + supply;
            self.fresh_ground[p] = self.fresh_ground[p + 1] + ground;
            self.fresh_deficit[p] = self.fresh_deficit[p + 1] + deficit;
            for u in 0..users {
                self.fresh_candidate[u][p] = cand[u];
            }
        }
    }

    fn accessed(&self, u: usize, p: usize) -> bool {
        self.degree[p * self.node_count + self.user_node[u]] > 0
    }

    /// Upper bound on any completion of the assignment of variables
    /// `0..k`, or `None` when no completion satisfies the hard windows.
    fn bound(&self, k: usize) -> Option<i64> {
        let cur = if k < self.vars.len() { self.vars[k].period } else { self.periods };
        let mut deficit: i64 = (0..cur.min(self.periods))
            .map(|p| i64::from(self.required.saturating_sub(self.ground[p])))
            .sum();
        let users = self.user_node.len();
        let mut cand_cur = vec![false; users];
        let (mut ss_open, mut supply, mut ground) = (0i64, 0i64, 0i64);
        if cur < self.periods {
            let (ss, sup, g, d) = self.period_terms(cur, k, &mut cand_cur);
            for (u, c) in cand_cur.iter_mut().enumerate() {
                *c &= !self.accessed(u, cur);
            }
            ss_open = ss + self.fresh_ss[cur + 1];
            supply = sup + self.fresh_supply[cur + 1];
            ground = g + self.fresh_ground[cur + 1];
            deficit += d + self.fresh_deficit[cur + 1];
        }

        let candidate = |u: usize, p: usize| -> bool {
            if p < cur {
                false
            } else if p == cur {
                cand_cur[u]
            } else {
                self.fresh_candidate[u][p]
            }
        };
        let mut owed = 0i64;
        let mut lost = 0i64;
        for u in 0..users {
            let mut stab: Option<usize> = None;
            for &(start, end, soft) in &self.windows[u] {
                let hit = (start..end.min(cur + 1)).any(|p| p <= cur && self.accessed(u, p));
                if hit || stab.is_some_and(|s| s >= start) {
                    continue;
                }
                match (start.max(cur)..end).rev().find(|&p| candidate(u, p)) {
                    Some(p) => {
                        owed += 1;
                        stab = Some(p);
                    }
                    None if soft => lost += 1,
                    None => return None,
                }
            }
        }
        if owed > supply {
            return None;
        }
        let ss_cap = (supply - ground - owed).max(0) / 2;
        Some(self.ss + ss_open.min(ss_cap) - self.penalty * (deficit + lost))
    }

    fn incumbent(&self) -> Option<i64> {
        self.best.as_ref().map(|b| b.0)
    }

    fn promising(&self, k: usize) -> bool {
        match (self.bound(k), self.incumbent()) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(b), Some(inc)) => b > inc,
        }
    }

    fn set(&mut self, k: usize, on: bool) {
        let v = &self.vars[k];
        let (a, b, p, kind) = (v.a, v.b, v.period, v.kind);
        self.values[k] = on;
        if !on {
            return;
        }
        self.degree[p * self.node_count + a] += 1;
        self.degree[p * self.node_count + b] += 1;
        match kind {
            VarKind::SatSat => self.ss += 1,
            VarKind::SatGround => self.ground[p] += 1,
            VarKind::SatUser => {}
        }
    }

    fn unset(&mut self, k: usize) {
        if !self.values[k] {
            return;
        }
        let v = &self.vars[k];
        let (a, b, p, kind) = (v.a, v.b, v.period, v.kind);
        self.values[k] = false;
        self.degree[p * self.node_count + a] -= 1;
        self.degree[p * self.node_count + b] -= 1;
        match kind {
            VarKind::SatSat => self.ss -= 1,
            VarKind::SatGround => self.ground[p] -= 1,
            VarKind::SatUser => {}
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.nodes >= self.limits.node_limit {
            self.aborted = true;
        } else if let Some(t) = self.limits.time_limit {
            if self.nodes.is_multiple_of(1024) && self.started.elapsed() >= t {
                self.aborted = true;
            }
        }
        self.aborted
    }

    fn dfs(&mut self, k: usize) {
        self.nodes += 1;
        if k == self.vars.len() {
            let value = self.bound(k).expect("leaf passed its parent's feasibility check");
            if self.incumbent().is_none_or(|inc| value > inc) {
                self.best = Some((value, self.values.clone()));
            }
            return;
        }
        if self.out_of_budget() {
            return;
        }
        let v = &self.vars[k];
        let p = v.period;
        let can_set = v.fixed != Some(false) && self.rem(p, v.a) > 0 && self.rem(p, v.b) > 0;
        let can_clear = v.fixed != Some(true);
        if can_set {
            self.set(k, true);
            if self.promising(k + 1) {
                self.dfs(k + 1);
            }
            self.unset(k);
        }
        if can_clear && !self.aborted && self.promising(k + 1) {
            self.dfs(k + 1);
        }
    }

    /// Zero-first search for the first assignment reaching `target`.
    /// Returns true once found.
    fn dfs_lex(&mut self, k: usize, target: i64) -> bool {
        self.nodes += 1;
        if k == self.vars.len() {
            let value = self.bound(k).expect("leaf passed its parent's feasibility check");
            if value == target {
                self.best = Some((value, self.values.clone()));
                return true;
            }
            return false;
        }
        if self.out_of_budget() {
            return false;
        }
        let v = &self.vars[k];
        let p = v.period;
        let can_set = v.fixed != Some(false) && self.rem(p, v.a) > 0 && self.rem(p, v.b) > 0;
        let can_clear = v.fixed != Some(true);
        let reaches = |s: &Self| s.bound(k + 1).is_some_and(|b| b >= target);
        if can_clear && reaches(self) && self.dfs_lex(k + 1, target) {
            return true;
        }
        if can_set && !self.aborted {
            self.set(k, true);
            let found = reaches(self) && self.dfs_lex(k + 1, target);
            self.unset(k);
            return found;
        }
        false
    }

    /// Replaces a proven optimum by the lexicographically smallest optimal
    /// assignment. Keeps the current one if the budget runs out.
    fn lex_smallest(&mut self) {
        let Some((target, _)) = self.best.clone() else {
            return;
        };
        let kept = self.best.take();
        self.nodes = 0;
        if !self.dfs_lex(0, target) {
            self.best = kept;
        }
    }

    /// Period-by-period greedy completion used as the first incumbent:
    /// overdue users first, then ground links, then inter-satellite links.
    fn greedy(&mut self) {
        let f = self.model.windows.first().map_or(0, |w| w.window.len);
        let users = self.user_node.len();
        let mut last_access: Vec<Option<usize>> = vec![None; users];
        let mut values = vec![false; self.vars.len()];
        for p in 0..self.periods {
            let range = self.period_start[p]..self.period_start[p + 1];
            let mut deg = vec![0u32; self.node_count];
            let take = |k: usize, deg: &mut Vec<u32>, values: &mut Vec<bool>| {
                let v = &self.vars[k];
                let fits = |n: usize, deg: &Vec<u32>| self.cap[n].is_none_or(|c| deg[n] < c);
                if v.fixed != Some(false) && !values[k] && fits(v.a, deg) && fits(v.b, deg) {
                    values[k] = true;
                    deg[v.a] += 1;
                    deg[v.b] += 1;
                    true
                } else {
                    false
                }
            };
            for k in range.clone() {
                if self.vars[k].fixed == Some(true) {
                    take(k, &mut deg, &mut values);
                }
            }
            // overdue: no access in the previous f - 1 periods
            for k in range.clone() {
                let v = &self.vars[k];
                if v.kind != VarKind::SatUser || deg[v.b] > 0 {
                    continue;
                }
                let overdue = last_access[v.user].is_none_or(|l| p + 1 >= l + f);
                if overdue {
                    take(k, &mut deg, &mut values);
                }
            }
            let mut g = range.clone().filter(|&k| values[k] && self.vars[k].kind == VarKind::SatGround).count() as u32;
            for k in range.clone() {
                if g >= self.required {
                    break;
                }
                if self.vars[k].kind == VarKind::SatGround && take(k, &mut deg, &mut values) {
                    g += 1;
                }
            }
            for k in range.clone() {
                if self.vars[k].kind == VarKind::SatSat {
                    take(k, &mut deg, &mut values);
                }
            }
            for (u, &node) in self.user_node.iter().enumerate() {
                if deg[node] > 0 {
                    last_access[u] = Some(p);
                }
            }
        }
        if let Some(value) = self.model.evaluate(&values) {
            self.best = Some((value, values));
        }
    }
}

/// Solves `model` exactly unless `limits` run out first. `kinds` gives the
/// node kind per node id and `terminals` the satellite terminal count.
pub fn solve_with(
    model: &IlpModel,
    kinds: &[NodeKind],
    terminals: u32,
    limits: SolveLimits,
) -> Result<Solution, RcpdError> {
    let mut search = Search::new(model, kinds, terminals, limits);
    search.greedy();
    if search.promising(0) {
        search.dfs(0);
    }
    let optimal = !search.aborted;
    let mut nodes = search.nodes;
    if optimal {
        search.lex_smallest();
        nodes += search.nodes;
    }
    match search.best {
        Some((objective, values)) => Ok(Solution {
            values,
            objective,
            optimal,
            nodes,
        }),
        None => {
            // Name the windows that cannot all be met by solving the soft
            // variant, where every window may be dropped at cost P.
            let soft = model.softened();
            let mut relaxed = Search::new(&soft, kinds, terminals, limits);
            relaxed.greedy();
            if relaxed.promising(0) {
                relaxed.dfs(0);
            }
            let windows = match relaxed.best {
                Some((_, values)) => soft.uncovered(&values),
                None => model.windows.iter().filter(|w| !w.soft).map(|w| w.window).collect(),
            };
            Err(RcpdError::Infeasible { windows })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcpd::{build_model, RcpdParams};
    use crate::types::{NodeSet, Pair, VisibilitySet};

    fn kinds(nodes: &NodeSet) -> Vec<NodeKind> {
        nodes.iter().map(|n| n.kind).collect()
    }

    fn brute(model: &IlpModel) -> Option<i64> {
        let n = model.var_count();
        assert!(n <= 22);
        (0u64..1 << n)
            .filter_map(|mask| {
                let values: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                model.evaluate(&values)
            })
            .max()
    }

    #[test]
    fn empty_model() {
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 1);
        let vis = VisibilitySet::empty(nodes.len(), 3, 1);
        let params = RcpdParams::default();
        let model = build_model(&vis, &nodes, &params, 0..3, &[]).unwrap();
        let sol = solve_with(&model, &kinds(&nodes), 2, SolveLimits::default()).unwrap();
        assert_eq!(sol.objective, -1000 * 2 * 3);
        assert!(sol.optimal);
        assert_eq!(model.deficits(&sol.values), vec![2, 2, 2]);
    }

    #[test]
    fn tiny_instance_matches_brute_force() {
        // 2 satellites, 1 R-user, 1 GS, L_G = 1, f = 2
        let nodes = NodeSet::anonymous(2, 2, 1, 0, 1);
        let vis = VisibilitySet::full(&nodes, 2, 1);
        let params = RcpdParams {
            gs_links: 1,
            ..RcpdParams::default()
        };
        let model = build_model(&vis, &nodes, &params, 0..2, &[]).unwrap();
        let sol = solve_with(&model, &kinds(&nodes), 2, SolveLimits::default()).unwrap();
        assert!(sol.optimal);
        assert_eq!(Some(sol.objective), brute(&model));
        // one inter-satellite link per period, no deficit
        assert_eq!(sol.objective, 2);
        assert_eq!(model.deficits(&sol.values), vec![0, 0]);
    }

    #[test]
    fn contention_is_reported_as_infeasible() {
        // one satellite with r = 1 cannot serve two users in a single period
        let nodes = NodeSet::anonymous(1, 1, 2, 0, 0);
        let mut vis = VisibilitySet::empty(nodes.len(), 1, 1);
        vis.set_period(0, Pair::of(0, 1), true);
        vis.set_period(0, Pair::of(0, 2), true);
        let params = RcpdParams {
            terminals: 1,
            access_window: 1,
            gs_links: 0,
            ..RcpdParams::default()
        };
        let model = build_model(&vis, &nodes, &params, 0..1, &[]).unwrap();
        match solve_with(&model, &kinds(&nodes), 1, SolveLimits::default()) {
            Err(RcpdError::Infeasible { windows }) => assert_eq!(windows.len(), 1),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn node_limit_reports_non_optimal() {
        let nodes = NodeSet::anonymous(2, 4, 2, 0, 1);
        let vis = VisibilitySet::full(&nodes, 3, 1);
        let model = build_model(&vis, &nodes, &RcpdParams::default(), 0..3, &[]).unwrap();
        let limits = SolveLimits {
            node_limit: 3,
            time_limit: None,
        };
        let sol = solve_with(&model, &kinds(&nodes), 2, limits).unwrap();
        assert!(!sol.optimal);
        assert!(model.evaluate(&sol.values).is_some());
    }
}
