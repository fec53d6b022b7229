//! Plain-text tables, one header line each.
//!
//! * reflector plan: `period,node_i,node_j,link`
//! * phased-array plan: `period,superframe,slot,node_i,node_j` (slot counts
//!   from 1 within the superframe)
//! * report: `<key columns>,reflector,phased,metric,value`

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cpd_core::{
    LinkSet, MetricReport, NodeKind, NodeSet, Pair, PhasedArrayPlan, ReflectorPlan,
    ReflectorPlanParams, SuperframePlan, TimeGrid, VisibilityTrace,
};
use serde::Deserialize;

use crate::error::CliError;
use crate::pipeline::{ReflectorOutcome, RunOutput};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, result: io::Result<()>) -> Result<(), CliError> {
    result.map_err(|e| CliError::io(path, e))
}

fn link_kind(nodes: &NodeSet, p: Pair) -> &'static str {
    match nodes.kind(p.hi()) {
        NodeKind::Satellite => "sat-sat",
        NodeKind::RUser => "sat-ruser",
        NodeKind::PUser => "sat-puser",
        NodeKind::GroundStation => "sat-gs",
    }
}

pub fn write_trace(path: &Path, trace: &VisibilityTrace) -> Result<(), CliError> {
    let w = create(path)?;
    trace.write(w).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: io::Error::other(e.to_string()),
    })
}

pub fn read_trace(path: &Path) -> Result<VisibilityTrace, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    VisibilityTrace::read(f).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_reflector_plan(path: &Path, plan: &ReflectorPlan, nodes: &NodeSet) -> Result<(), CliError> {
    let mut w = create(path)?;
    let result = (|| {
        writeln!(w, "period,node_i,node_j,link")?;
        for m in 0..plan.periods() {
            for &p in plan.links(m) {
                writeln!(
                    w,
                    "{m},{},{},{}",
                    nodes.get(p.lo()).name,
                    nodes.get(p.hi()).name,
                    link_kind(nodes, p)
                )?;
            }
        }
        w.flush()
    })();
    finish(path, result)
}

fn resolve(nodes: &NodeSet, path: &Path, line: u64, a: &str, b: &str) -> Result<Pair, CliError> {
    let id = |name: &str| {
        nodes
            .by_name(name)
            .ok_or_else(|| CliError::Parse(format!("{}:{line}: unknown node `{name}`", path.display())))
    };
    let (a, b) = (id(a)?, id(b)?);
    if a == b {
        return Err(CliError::Parse(format!("{}:{line}: self-link on `{}`", path.display(), nodes.get(a).name)));
    }
    Ok(Pair::new(a, b))
}

fn reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(f))
}

#[derive(Deserialize)]
struct ReflectorRow {
    period: usize,
    node_i: String,
    node_j: String,
}

/// Reads a reflector plan; ground-link deficits are recomputed from
/// `params.gs_links`.
pub fn read_reflector_plan(
    path: &Path,
    nodes: &NodeSet,
    params: ReflectorPlanParams,
    periods: usize,
) -> Result<ReflectorPlan, CliError> {
    let mut links = vec![LinkSet::new(); periods];
    let mut rdr = reader(path)?;
    for (k, row) in rdr.deserialize::<ReflectorRow>().enumerate() {
        let line = k as u64 + 2;
        let row = row.map_err(|e| CliError::Parse(format!("{}:{line}: {e}", path.display())))?;
        if row.period >= periods {
            return Err(CliError::Parse(format!(
                "{}:{line}: period {} outside the {periods}-period grid",
                path.display(),
                row.period
            )));
        }
        links[row.period].insert(resolve(nodes, path, line, &row.node_i, &row.node_j)?);
    }
    let deficits = links
        .iter()
        .map(|l| {
            let gs = l.iter().filter(|p| nodes.kind(p.hi()) == NodeKind::GroundStation).count() as u32;
            params.gs_links.saturating_sub(gs)
        })
        .collect();
    Ok(ReflectorPlan::from_links(params, links, deficits))
}

pub fn write_phased_plan(path: &Path, plan: &PhasedArrayPlan, nodes: &NodeSet) -> Result<(), CliError> {
    let mut w = create(path)?;
    let result = (|| {
        writeln!(w, "period,superframe,slot,node_i,node_j")?;
        for sf in &plan.superframes {
            for (t, matching) in sf.slots.iter().enumerate() {
                for p in matching {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        sf.period,
                        sf.superframe,
                        t + 1,
                        nodes.get(p.lo()).name,
                        nodes.get(p.hi()).name
                    )?;
                }
            }
        }
        w.flush()
    })();
    finish(path, result)
}

#[derive(Deserialize)]
struct PhasedRow {
    period: usize,
    superframe: usize,
    slot: usize,
    node_i: String,
    node_j: String,
}

/// Reads a phased-array plan covering every superframe of `periods`.
pub fn read_phased_plan(path: &Path, nodes: &NodeSet, grid: &TimeGrid, periods: usize) -> Result<PhasedArrayPlan, CliError> {
    let k = grid.superframes_per_period as usize;
    let t = grid.slots_per_superframe();
    let mut superframes: Vec<SuperframePlan> = (0..periods * k)
        .map(|i| SuperframePlan {
            period: i / k,
            superframe: i % k,
            slots: vec![Vec::new(); t],
        })
        .collect();
    let mut rdr = reader(path)?;
    for (n, row) in rdr.deserialize::<PhasedRow>().enumerate() {
        let line = n as u64 + 2;
        let row = row.map_err(|e| CliError::Parse(format!("{}:{line}: {e}", path.display())))?;
        if row.period >= periods || row.superframe >= k || row.slot == 0 || row.slot > t {
            return Err(CliError::Parse(format!(
                "{}:{line}: (period {}, superframe {}, slot {}) outside the grid",
                path.display(),
                row.period,
                row.superframe,
                row.slot
            )));
        }
        let pair = resolve(nodes, path, line, &row.node_i, &row.node_j)?;
        superframes[row.period * k + row.superframe].slots[row.slot - 1].push(pair);
    }
    Ok(PhasedArrayPlan { superframes })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// (metric, value) rows of one report.
pub fn metric_rows(r: &MetricReport) -> Vec<(&'static str, String)> {
    vec![
        ("r_user_delay", fmt_opt(r.r_user_delay)),
        ("r_delivered", r.r_bundles.delivered.to_string()),
        ("r_censored", r.r_bundles.censored.to_string()),
        ("ugsat_delay", fmt_opt(r.ugsat_delay)),
        ("ugsat_delivered", r.ugsat_bundles.delivered.to_string()),
        ("ugsat_censored", r.ugsat_bundles.censored.to_string()),
        ("puser_delay", fmt_opt(r.puser_delay)),
        ("puser_delivered", r.puser_bundles.delivered.to_string()),
        ("puser_censored", r.puser_bundles.censored.to_string()),
        ("ranging_links_per_sat", r.ranging_links_per_sat.to_string()),
        ("link_utilization", r.link_utilization.to_string()),
        ("pl_sat_sat", r.pl_sat_sat.to_string()),
        ("pl_user_sat", r.pl_user_sat.to_string()),
    ]
}

/// (metric, value) rows describing a reflector plan on its own.
pub fn reflector_rows(o: &ReflectorOutcome, nodes: &NodeSet) -> Vec<(&'static str, String)> {
    let deficit: u64 = o.plan.deficits().iter().map(|&d| u64::from(d)).sum();
    let mut rows = vec![
        ("objective", o.plan.objective(nodes).to_string()),
        ("ground_deficit", deficit.to_string()),
        ("waived_windows", o.plan.waived.len().to_string()),
        ("unenforced_violations", o.unenforced.len().to_string()),
    ];
    if let Some(r) = &o.report {
        rows.push(("solves", r.solves.to_string()));
        rows.push(("proven_optimal", u8::from(r.optimal).to_string()));
        rows.push(("search_nodes", r.nodes.to_string()));
    }
    rows
}

/// Report rows of a whole run, prefixed by `key` columns.
pub fn report_lines(key: &str, out: &RunOutput, nodes: &NodeSet) -> Vec<String> {
    let mut lines = Vec::new();
    for (planner, o) in &out.reflector {
        for (metric, value) in reflector_rows(o, nodes) {
            lines.push(format!("{key}{planner},none,{metric},{value}"));
        }
    }
    for s in &out.schemes {
        for (metric, value) in metric_rows(&s.report) {
            lines.push(format!("{key}{},{},{metric},{value}", s.scheme.reflector, s.scheme.phased));
        }
    }
    lines
}

pub fn write_lines(path: &Path, header: &str, lines: &[String]) -> Result<(), CliError> {
    let mut w = create(path)?;
    let result = (|| {
        writeln!(w, "{header}")?;
        for l in lines {
            writeln!(w, "{l}")?;
        }
        w.flush()
    })();
    finish(path, result)
}

/// Writes every plan of a run plus `report.csv` into `dir`.
pub fn write_run(dir: &Path, name: &str, out: &RunOutput, nodes: &NodeSet) -> Result<(), CliError> {
    for (planner, o) in &out.reflector {
        write_reflector_plan(&dir.join(format!("reflector_{planner}.csv")), &o.plan, nodes)?;
    }
    for s in &out.schemes {
        let file = format!("phased_{}_{}.csv", s.scheme.reflector, s.scheme.phased);
        write_phased_plan(&dir.join(file), &s.plan, nodes)?;
    }
    let key = format!("{name},");
    write_lines(
        &dir.join("report.csv"),
        "scenario,reflector,phased,metric,value",
        &report_lines(&key, out, nodes),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = NodeSet::anonymous(2, 2, 1, 1, 1);
        let grid = TimeGrid {
            period_count: 2,
            period_seconds: 40,
            superframes_per_period: 2,
            switching_superframes: 0,
            slot_seconds: 10,
        };
        let params = ReflectorPlanParams {
            gs_links: 1,
            ..ReflectorPlanParams::default()
        };
        let links = vec![
            [Pair::of(0, 1), Pair::of(0, 4)].into_iter().collect(),
            [Pair::of(1, 2)].into_iter().collect(),
        ];
        let rplan = ReflectorPlan::from_links(params, links, vec![0, 1]);
        let path = dir.path().join("r.csv");
        write_reflector_plan(&path, &rplan, &nodes).unwrap();
        assert_eq!(read_reflector_plan(&path, &nodes, params, 2).unwrap(), rplan);

        let mut pplan = read_phased_plan(&path_with(&dir, "empty.csv", "period,superframe,slot,node_i,node_j\n"), &nodes, &grid, 2).unwrap();
        pplan.superframes[3].slots[1].push(Pair::of(0, 3));
        let path = dir.path().join("p.csv");
        write_phased_plan(&path, &pplan, &nodes).unwrap();
        assert_eq!(read_phased_plan(&path, &nodes, &grid, 2).unwrap(), pplan);
    }

    fn path_with(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn bad_rows_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 0);
        let p = path_with(&dir, "r.csv", "period,node_i,node_j,link\n0,S0,S9,sat-sat\n");
        let err = read_reflector_plan(&p, &nodes, ReflectorPlanParams::default(), 1).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("S9"), "{err}");
    }
}
