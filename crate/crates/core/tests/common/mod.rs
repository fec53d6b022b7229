//! Independent oracles shared by the integration tests and the acceptance
//! suite: exhaustive matching and link-program search, random instances and
//! integrator measurements.
#![allow(dead_code)]

use cpd_core::geometry::cr3bp::{self, libration_point, LibrationPoint};
use cpd_core::rcpd::{build_model, IlpModel};
use cpd_core::{AccessMode, NodeSet, OrbitCatalog, Pair, RcpdParams, VisibilitySet, WeightedEdge};
use rand::Rng;

/// Best total weight over all matchings, by exhaustive recursion on the
/// lowest free vertex.
pub fn brute_matching_weight(n: usize, edges: &[WeightedEdge]) -> i64 {
    let mut w = vec![vec![None; n]; n];
    for &(a, b, x) in edges {
        w[a][b] = Some(x);
        w[b][a] = Some(x);
    }
    fn go(free: u32, w: &[Vec<Option<i64>>]) -> i64 {
        if free == 0 {
            return 0;
        }
        let v = free.trailing_zeros() as usize;
        let rest = free & !(1 << v);
        let mut best = go(rest, w);
        for u in 0..w.len() {
            if rest >> u & 1 == 1 {
                if let Some(x) = w[v][u] {
                    best = best.max(x + go(rest & !(1 << u), w));
                }
            }
        }
        best
    }
    go(if n == 32 { u32::MAX } else { (1u32 << n) - 1 }, &w)
}

/// Random simple graph on `n` vertices, weights in `0..=max_w`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, max_w: i64) -> Vec<WeightedEdge> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b, rng.gen_range(0..=max_w)));
            }
        }
    }
    edges
}

/// Optimum of the link program by enumerating every assignment, with the
/// lexicographically smallest optimal assignment (false < true, variable 0
/// most significant). `None` when no assignment is feasible.
pub fn brute_ilp(model: &IlpModel) -> Option<(i64, Vec<bool>)> {
    let n = model.var_count();
    assert!(n <= 22, "{n} variables is too many to enumerate");
    let mut best: Option<(i64, Vec<bool>)> = None;
    for mask in 0u64..1 << n {
        let values: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if let Some(obj) = model.evaluate(&values) {
            let better = match &best {
                None => true,
                Some((b, v)) => obj > *b || (obj == *b && values < *v),
            };
            if better {
                best = Some((obj, values));
            }
        }
    }
    best
}

/// A random small link-program instance.
pub struct IlpInstance {
    pub nodes: NodeSet,
    pub vis: VisibilitySet,
    pub params: RcpdParams,
    pub model: IlpModel,
}

/// Draws instances until one has between 1 and `max_vars` variables.
pub fn random_ilp<R: Rng>(rng: &mut R, max_vars: usize) -> IlpInstance {
    loop {
        let sats = rng.gen_range(1..=3);
        let users = rng.gen_range(0..=2);
        let gs = rng.gen_range(0..=2);
        let periods = rng.gen_range(1..=3);
        let nodes = NodeSet::anonymous(rng.gen_range(1..=2), sats, users, 0, gs);
        let density = rng.gen_range(0.3..0.9);
        let mut vis = VisibilitySet::empty(nodes.len(), periods, 1);
        for m in 0..periods {
            for a in 0..nodes.len() {
                for b in a + 1..nodes.len() {
                    let pair = Pair::of(a, b);
                    if nodes.reflector_capable(pair) && rng.gen_bool(density) {
                        vis.set_period(m, pair, true);
                    }
                }
            }
        }
        let access_window = rng.gen_range(1..=2);
        let params = RcpdParams {
            terminals: nodes.reflector_terminals(),
            access_window,
            gs_links: rng.gen_range(0..=2),
            horizon: periods.max(access_window),
            access_mode: [AccessMode::Strict, AccessMode::Relaxed, AccessMode::Soft][rng.gen_range(0..3)],
            ..RcpdParams::default()
        };
        let Ok(model) = build_model(&vis, &nodes, &params, 0..periods, &[]) else {
            continue;
        };
        if (1..=max_vars).contains(&model.var_count()) {
            return IlpInstance {
                nodes,
                vis,
                params,
                model,
            };
        }
    }
}

pub fn mu() -> f64 {
    cr3bp::earth_moon_mu()
}

/// Largest position deviation from L4 over `duration` time units, sampled
/// once per time unit, for a state released at rest at L4.
pub fn l4_residual(duration: f64) -> f64 {
    let p = libration_point(mu(), LibrationPoint::L4);
    let x0 = [p[0], p[1], p[2], 0.0, 0.0, 0.0];
    let mut state = x0;
    let mut worst = 0.0f64;
    for k in 0..duration.ceil() as usize {
        state = cr3bp::advance(mu(), &state, k as f64, 1.0, cpd_core::geometry::DEFAULT_STEP).unwrap();
        for i in 0..3 {
            worst = worst.max((state[i] - x0[i]).abs());
        }
    }
    worst
}

/// Largest relative Jacobi-constant drift along the catalog's DRO over
/// `duration` time units at the default step.
pub fn dro_jacobi_drift(duration: f64) -> f64 {
    let (x0, _) = OrbitCatalog::builtin().initial_state("DRO").unwrap();
    let c0 = cr3bp::jacobi_constant(mu(), &x0);
    let mut state = x0;
    let mut worst = 0.0f64;
    let chunks = (duration * 10.0).round() as usize;
    for k in 0..chunks {
        state = cr3bp::advance(mu(), &state, k as f64 * 0.1, 0.1, cpd_core::geometry::DEFAULT_STEP).unwrap();
        worst = worst.max(((cr3bp::jacobi_constant(mu(), &state) - c0) / c0).abs());
    }
    worst
}

/// Least-squares slope of log(error) against log(step) for the DRO state
/// propagated 2 time units, errors taken against a run at 1/64 of the
/// coarsest step.
pub fn rk4_convergence_slope() -> f64 {
    let (x0, _) = OrbitCatalog::builtin().initial_state("DRO").unwrap();
    let dt = 2.0;
    let coarse = 0.04;
    let reference = cr3bp::advance(mu(), &x0, 0.0, dt, coarse / 64.0).unwrap();
    let points: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|div| {
            let h = coarse / div;
            let x = cr3bp::advance(mu(), &x0, 0.0, dt, h).unwrap();
            let err = (0..3).map(|i| (x[i] - reference[i]).powi(2)).sum::<f64>().sqrt();
            (h.ln(), err.ln())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Distance between the catalog DRO state and itself one period later.
pub fn dro_closure() -> f64 {
    let (x0, period) = OrbitCatalog::builtin().initial_state("DRO").unwrap();
    let x = cr3bp::advance(mu(), &x0, 0.0, period.unwrap(), cpd_core::geometry::DEFAULT_STEP).unwrap();
    (0..6).map(|i| (x[i] - x0[i]).powi(2)).sum::<f64>().sqrt()
}
