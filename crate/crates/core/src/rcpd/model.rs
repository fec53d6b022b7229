//! The reflector-link integer program over a range of periods.
//!
//! One binary variable per visible, reflector-capable unordered pair and
//! period, so link symmetry and the visibility precondition hold by
//! construction. The ground-link slack p(m) is implicit:
//! p(m) = max(0, L_G - satellite-ground links in m).

use std::ops::Range;

use crate::error::RcpdError;
use crate::types::{AccessWindow, LinkSet, NodeKind, NodeSet, Pair, VisibilitySet};

use super::{AccessMode, RcpdParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    SatSat,
    SatUser,
    SatGround,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IlpVar {
    /// Global period index.
    pub period: usize,
    pub pair: Pair,
    pub kind: VarKind,
}

/// Node degree bound in one period: sum of `vars` <= `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeConstraint {
    pub period: usize,
    pub node: crate::types::NodeId,
    pub vars: Vec<usize>,
    pub bound: u32,
}

/// At least one access for `window.user` among `vars`. Soft windows may be
/// left uncovered at a cost of P each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowConstraint {
    pub window: AccessWindow,
    pub vars: Vec<usize>,
    pub soft: bool,
}

/// Satellite-ground links in one period: sum of `vars` + p(m) >= L_G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundFloor {
    pub period: usize,
    pub vars: Vec<usize>,
    pub required: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IlpModel {
    pub periods: Range<usize>,
    /// Period-major, pair index minor.
    pub vars: Vec<IlpVar>,
    /// Values pinned by an earlier rolling window.
    pub fixed: Vec<Option<bool>>,
    pub degrees: Vec<DegreeConstraint>,
    pub windows: Vec<WindowConstraint>,
    pub floors: Vec<GroundFloor>,
    pub penalty: i64,
    /// Windows that can never be covered (no candidate satellite, no pinned
    /// access); always soft.
    pub starved: Vec<AccessWindow>,
}

impl IlpModel {
    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Number of slack variables p(m), one per period.
    pub fn slack_count(&self) -> usize {
        self.floors.len()
    }

    /// Objective of a full assignment, or `None` if it breaks a hard
    /// constraint: inter-satellite links minus P per unit of ground-link
    /// deficit and per uncovered soft window.
    pub fn evaluate(&self, values: &[bool]) -> Option<i64> {
        assert_eq!(values.len(), self.vars.len());
        for (v, f) in values.iter().zip(&self.fixed) {
            if let Some(f) = f {
                if v != f {
                    return None;
                }
            }
        }
        for d in &self.degrees {
            let used = d.vars.iter().filter(|&&i| values[i]).count() as u32;
            if used > d.bound {
                return None;
            }
        }
        let mut objective = 0i64;
        for w in &self.windows {
            if !w.vars.iter().any(|&i| values[i]) {
                if w.soft {
                    objective -= self.penalty;
                } else {
                    return None;
                }
            }
        }
        for f in &self.floors {
            let links = f.vars.iter().filter(|&&i| values[i]).count() as u32;
            objective -= self.penalty * i64::from(f.required.saturating_sub(links));
        }
        let ss = self
            .vars
            .iter()
            .zip(values)
            .filter(|(v, &x)| x && v.kind == VarKind::SatSat)
            .count();
        Some(objective + ss as i64)
    }

    /// Deficit p(m) implied by an assignment, per period of the range.
    pub fn deficits(&self, values: &[bool]) -> Vec<u32> {
        self.floors
            .iter()
            .map(|f| {
                let links = f.vars.iter().filter(|&&i| values[i]).count() as u32;
                f.required.saturating_sub(links)
            })
            .collect()
    }

    /// Soft windows an assignment leaves uncovered.
    pub fn uncovered(&self, values: &[bool]) -> Vec<AccessWindow> {
        self.windows
            .iter()
            .filter(|w| !w.vars.iter().any(|&i| values[i]))
            .map(|w| w.window)
            .collect()
    }

    /// Link sets per period of the range.
    pub fn links(&self, values: &[bool]) -> Vec<LinkSet> {
        let mut out = vec![LinkSet::new(); self.periods.len()];
        for (v, &x) in self.vars.iter().zip(values) {
            if x {
                out[v.period - self.periods.start].insert(v.pair);
            }
        }
        out
    }

    /// Copy of the model with every access window soft.
    pub fn softened(&self) -> IlpModel {
        let mut m = self.clone();
        for w in &mut m.windows {
            w.soft = true;
        }
        m
    }
}

/// Builds the program for `window` (a range of periods). `pinned` gives the
/// link sets of the leading periods already decided by an earlier solve;
/// their variables are fixed.
pub fn build_model(
    vis: &VisibilitySet,
    nodes: &NodeSet,
    params: &RcpdParams,
    window: Range<usize>,
    pinned: &[LinkSet],
) -> Result<IlpModel, RcpdError> {
    params.validate(nodes)?;
    if vis.node_count() != nodes.len() {
        return Err(RcpdError::Params(format!(
            "visibility has {} nodes, scenario has {}",
            vis.node_count(),
            nodes.len()
        )));
    }
    if window.end > vis.periods() {
        return Err(RcpdError::Dimension {
            visibility: vis.periods(),
            needed: window.end,
        });
    }
    if pinned.len() > window.len() {
        return Err(RcpdError::Params(format!(
            "{} pinned periods exceed the {}-period range",
            pinned.len(),
            window.len()
        )));
    }

    let mut vars = Vec::new();
    let mut fixed = Vec::new();
    let mut degrees = Vec::new();
    let mut floors = Vec::new();
    // access[user][period] -> var indices
    let r_users: Vec<_> = nodes.r_users().collect();
    let first_user = nodes.r_user_range().start;
    let mut access: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); window.len()]; r_users.len()];

    for (local, m) in window.clone().enumerate() {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let mut ground = Vec::new();
        for pair in vis.period_pairs(m) {
            if !nodes.reflector_capable(pair) {
                continue;
            }
            let kind = match nodes.kind(pair.hi()) {
                NodeKind::Satellite => VarKind::SatSat,
                NodeKind::RUser => VarKind::SatUser,
                NodeKind::GroundStation => VarKind::SatGround,
                NodeKind::PUser => unreachable!("P-users hold no reflector"),
            };
            let idx = vars.len();
            vars.push(IlpVar { period: m, pair, kind });
            fixed.push(pinned.get(local).map(|links| links.contains(&pair)));
            incident[pair.lo().0].push(idx);
            incident[pair.hi().0].push(idx);
            match kind {
                VarKind::SatUser => access[pair.hi().0 - first_user][local].push(idx),
                VarKind::SatGround => ground.push(idx),
                VarKind::SatSat => {}
            }
        }
        for node in nodes.iter() {
            let bound = match node.kind {
                NodeKind::Satellite => params.terminals,
                NodeKind::RUser => 1,
                _ => continue,
            };
            degrees.push(DegreeConstraint {
                period: m,
                node: node.id,
                vars: std::mem::take(&mut incident[node.id.0]),
                bound,
            });
        }
        floors.push(GroundFloor {
            period: m,
            vars: ground,
            required: params.gs_links,
        });
    }

    // Pinned accesses, to tell starved windows from merely undecided ones.
    let f = params.access_window;
    let mut windows = Vec::new();
    let mut starved = Vec::new();
    if window.len() >= f {
        for (u, &user) in r_users.iter().enumerate() {
            for start in 0..=window.len() - f {
                let w = AccessWindow {
                    user,
                    start: window.start + start,
                    len: f,
                };
                let wvars: Vec<usize> = (start..start + f).flat_map(|p| access[u][p].clone()).collect();
                let pinned_hit = wvars.iter().any(|&i| fixed[i] == Some(true));
                let open = wvars.iter().any(|&i| fixed[i].is_none());
                let hopeless = !pinned_hit && !open;
                let soft = match params.access_mode {
                    AccessMode::Soft => true,
                    _ if !hopeless => false,
                    AccessMode::Strict => return Err(RcpdError::StarvedWindow { window: w }),
                    AccessMode::Relaxed => true,
                };
                if hopeless {
                    starved.push(w);
                }
                windows.push(WindowConstraint {
                    window: w,
                    vars: wvars,
                    soft,
                });
            }
        }
    }

    Ok(IlpModel {
        periods: window,
        vars,
        fixed,
        degrees,
        windows,
        floors,
        penalty: params.penalty,
        starved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gs_links: u32) -> RcpdParams {
        RcpdParams {
            gs_links,
            ..RcpdParams::default()
        }
    }

    #[test]
    fn counts_on_a_tiny_instance() {
        // 2 satellites, 1 R-user, 1 GS, M = 2, full visibility
        let nodes = NodeSet::anonymous(2, 2, 1, 0, 1);
        let vis = VisibilitySet::full(&nodes, 2, 1);
        let m = build_model(&vis, &nodes, &params(2), 0..2, &[]).unwrap();
        // 6 pairs minus user-GS = 5 per period
        assert_eq!(m.var_count(), 10);
        assert_eq!(m.slack_count(), 2);
        assert_eq!(m.windows.len(), 1);
        assert_eq!(m.windows[0].vars.len(), 4);
        assert!(m.vars.windows(2).all(|w| (w[0].period, w[0].pair.index(4)) < (w[1].period, w[1].pair.index(4))));
    }

    #[test]
    fn no_visibility_means_no_variables() {
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 1);
        let vis = VisibilitySet::empty(nodes.len(), 3, 1);
        let m = build_model(&vis, &nodes, &params(2), 0..3, &[]).unwrap();
        assert_eq!(m.var_count(), 0);
        assert_eq!(m.evaluate(&[]), Some(-1000 * 2 * 3));
    }

    #[test]
    fn starved_window_handling() {
        let nodes = NodeSet::anonymous(2, 1, 1, 0, 0);
        let vis = VisibilitySet::empty(nodes.len(), 2, 1);
        let strict = RcpdParams {
            access_mode: AccessMode::Strict,
            ..params(0)
        };
        assert!(matches!(
            build_model(&vis, &nodes, &strict, 0..2, &[]),
            Err(RcpdError::StarvedWindow { .. })
        ));
        let m = build_model(&vis, &nodes, &params(0), 0..2, &[]).unwrap();
        assert_eq!(m.starved.len(), 1);
        assert!(m.windows[0].soft);
    }

    #[test]
    fn pinned_values_are_fixed() {
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 0);
        let vis = VisibilitySet::full(&nodes, 2, 1);
        let pinned: LinkSet = [Pair::of(0, 1)].into_iter().collect();
        let m = build_model(&vis, &nodes, &params(0), 0..2, &[pinned]).unwrap();
        assert_eq!(m.fixed, vec![Some(true), None]);
        assert_eq!(m.evaluate(&[false, true]), None);
        assert_eq!(m.evaluate(&[true, true]), Some(2));
    }
}
