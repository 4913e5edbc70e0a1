//! Brute-force checks of every guarantee, built only from BFS, components
//! and diameters. Failures carry a witness written in identifiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::clustering::{diameter_bound, Clustering};
use crate::decomposition::{color_bound, Decomposition};
use crate::forest::RootedForest;
use crate::graph::{
    connected_components, id_bit, induced_diameter, multi_source_bfs, Diameter, Graph,
    IdAssignment, NodeSet,
};
use crate::phase::{ruling_radius, Decision, PhaseResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Records a check; `witness` is the first violation found, if any.
    pub fn record(&mut self, name: impl Into<String>, witness: Option<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass: witness.is_none(),
            witness,
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            match &c.witness {
                None => writeln!(out, "PASS {}", c.name).unwrap(),
                Some(w) => writeln!(out, "FAIL {}: {}", c.name, w).unwrap(),
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "all_pass": self.all_pass(),
            "checks": self.checks,
        })
    }
}

fn node(ids: &IdAssignment, v: usize) -> String {
    format!("node {}", ids.id(v))
}

fn edge(ids: &IdAssignment, u: usize, v: usize) -> String {
    format!("edge ({}, {})", ids.id(u), ids.id(v))
}

/// Every node of `alive` within distance `r_bound` of `q` inside `G[alive]`.
pub fn check_ruling(
    g: &Graph,
    ids: &IdAssignment,
    alive: &NodeSet,
    q: &NodeSet,
    r_bound: u64,
) -> Report {
    let mut report = Report::default();
    let witness = match multi_source_bfs(g, ids, alive, q) {
        Err(e) => Some(e.to_string()),
        Ok(dm) => alive.iter().find_map(|v| match dm.dist[v] {
            None => Some(format!("{} unreachable", node(ids, v))),
            Some(_) => None,
        }),
    }
    .or_else(|| {
        let dm = multi_source_bfs(g, ids, alive, q).ok()?;
        let (v, d) = dm.farthest()?;
        (d as u64 > r_bound).then(|| format!("{} at distance {d} > {r_bound}", node(ids, v)))
    });
    report.record("ruling", witness);
    report
}

/// Structural validity of a clustering of the whole graph.
pub fn check_clustering(g: &Graph, ids: &IdAssignment, c: &Clustering) -> Report {
    let n = g.node_count();
    let mut report = Report::default();
    report.record(
        "shape",
        (c.n != n || c.b != ids.bits()).then(|| {
            format!(
                "artifact has n={} b={}, graph has n={n} b={}",
                c.n,
                c.b,
                ids.bits()
            )
        }),
    );
    if c.n != n {
        return report;
    }

    // Each node in exactly one cluster or in the unclustered list.
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut disjoint = None;
    let mut out_of_range = None;
    for (k, cl) in c.clusters.iter().enumerate() {
        for &v in &cl.nodes {
            if v >= n {
                out_of_range
                    .get_or_insert(format!("index {v} in cluster of terminal {}", cl.terminal));
                continue;
            }
            if owner[v].is_some() {
                disjoint.get_or_insert(format!("{} in two clusters", node(ids, v)));
            }
            owner[v] = Some(k);
        }
    }
    let mut listed = vec![false; n];
    for &v in &c.unclustered {
        if v >= n {
            out_of_range.get_or_insert(format!("unclustered index {v}"));
        } else if owner[v].is_some() || listed[v] {
            disjoint.get_or_insert(format!("{} both clustered and unclustered", node(ids, v)));
        } else {
            listed[v] = true;
        }
    }
    report.record("in-range", out_of_range);
    report.record("disjoint", disjoint);
    report.record(
        "accounted",
        (0..n)
            .find(|&v| owner[v].is_none() && !listed[v])
            .map(|v| format!("{} neither clustered nor unclustered", node(ids, v))),
    );

    let covered = owner.iter().filter(|o| o.is_some()).count();
    let need = n.div_ceil(2);
    report.record(
        "coverage",
        (covered < need).then(|| format!("{covered} clustered nodes, need {need}")),
    );

    let mut terminal = None;
    let mut connected = None;
    let mut diameter = None;
    let bound = diameter_bound(c.b);
    let mut seen_terminals = BTreeSet::new();
    for cl in &c.clusters {
        if cl.terminal >= n || !cl.nodes.contains(&cl.terminal) {
            terminal.get_or_insert(format!(
                "terminal index {} outside its cluster",
                cl.terminal
            ));
            continue;
        }
        if !seen_terminals.insert(cl.terminal) {
            terminal.get_or_insert(format!(
                "{} is terminal of two clusters",
                node(ids, cl.terminal)
            ));
        }
        let set = NodeSet::from_nodes(n, cl.nodes.iter().copied().filter(|&v| v < n));
        match induced_diameter(g, &set) {
            Ok(Diameter::Finite(d)) if d as u64 > bound => {
                diameter.get_or_insert(format!(
                    "cluster of {} has diameter {d} > {bound}",
                    node(ids, cl.terminal)
                ));
            }
            Ok(Diameter::Finite(_)) => {}
            _ => {
                connected.get_or_insert(format!(
                    "cluster of {} is disconnected",
                    node(ids, cl.terminal)
                ));
            }
        }
    }
    report.record("terminal", terminal);
    report.record("connected", connected);
    report.record("diameter", diameter);

    let adjacent = g.edges().find_map(|(u, v)| match (owner[u], owner[v]) {
        (Some(a), Some(b)) if a != b => Some(edge(ids, u, v)),
        _ => None,
    });
    report.record(
        "non-adjacent",
        adjacent.map(|e| format!("{e} joins two clusters")),
    );
    report
}

/// Replays `F_0` and the step traces of one phase, checking the depth
/// bounds, growth factor, blame totals and frozen declined trees. Needs a
/// reference-executor phase (simulated phases carry no traces).
pub fn check_step_invariants(g: &Graph, ids: &IdAssignment, phase: &PhaseResult) -> Report {
    let n = g.node_count();
    let b = phase.b as u64;
    let p = phase.phase;
    let f0 = &phase.initial_forest;
    let d0: Vec<u32> = (0..n).map(|v| f0.depth(v).unwrap_or(0)).collect();
    let mut root: Vec<Option<usize>> = (0..n).map(|v| f0.root_of(v)).collect();
    let mut depth = d0.clone();
    let red = |r: usize| !id_bit(ids.id(r), phase.b, p);

    let mut bad_blue = None;
    let mut bad_red = None;
    let mut bad_growth = None;
    let mut bad_blame = None;
    let mut bad_frozen = None;
    let mut bad_trace = None;
    // Trees that declined; only the trace changes membership, so a change
    // touching one of them is a violation.
    let mut frozen: BTreeSet<usize> = BTreeSet::new();

    for (k, st) in phase.step_traces.iter().enumerate() {
        let j = st.step;
        if j != k {
            bad_trace.get_or_insert(format!("trace {k} labelled step {j}"));
        }
        let mut size: BTreeMap<usize, u64> = BTreeMap::new();
        for r in root.iter().flatten() {
            *size.entry(*r).or_default() += 1;
        }
        for dcs in &st.decisions {
            if size.get(&dcs.root).copied().unwrap_or(0) != dcs.size as u64 {
                bad_trace.get_or_insert(format!(
                    "step {j}: recorded size of tree {} disagrees with replay",
                    ids.id(dcs.root)
                ));
            }
        }

        frozen.extend(
            st.decisions
                .iter()
                .filter(|d| d.decision == Decision::Decline)
                .map(|d| d.root),
        );
        let mut touch_frozen = |r: Option<usize>, v: usize| {
            if r.is_some_and(|r| frozen.contains(&r)) {
                bad_frozen.get_or_insert(format!(
                    "step {j}: declined tree of {} changed at {}",
                    node(ids, r.unwrap()),
                    node(ids, v)
                ));
            }
        };

        let mut blame: BTreeMap<usize, u64> = BTreeMap::new();
        for del in &st.deleted {
            if root[del.node].is_none() {
                bad_trace.get_or_insert(format!(
                    "step {j}: deleted {} is not alive",
                    node(ids, del.node)
                ));
            }
            touch_frozen(root[del.node], del.node);
            root[del.node] = None;
            *blame.entry(del.blamed_root).or_default() += 1;
        }
        for (&r, &count) in &blame {
            let s = size.get(&r).copied().unwrap_or(0);
            if count * 2 * b >= s {
                bad_blame.get_or_insert(format!(
                    "step {j}: tree of {} blamed for {count} deletions, size {s}",
                    node(ids, r)
                ));
            }
        }
        for rh in &st.rehung {
            if root[rh.node].is_none() {
                bad_trace.get_or_insert(format!(
                    "step {j}: rehung {} is not alive",
                    node(ids, rh.node)
                ));
            }
            touch_frozen(root[rh.node], rh.node);
            touch_frozen(Some(rh.root), rh.node);
            root[rh.node] = Some(rh.root);
            depth[rh.node] = rh.depth;
        }

        let mut size_after: BTreeMap<usize, u64> = BTreeMap::new();
        for r in root.iter().flatten() {
            *size_after.entry(*r).or_default() += 1;
        }
        for dcs in st.decisions.iter().filter(|d| d.decision == Decision::Grow) {
            let before = size.get(&dcs.root).copied().unwrap_or(0);
            let after = size_after.get(&dcs.root).copied().unwrap_or(0);
            if after * 2 * b < before * (2 * b + 1) {
                bad_growth.get_or_insert(format!(
                    "step {j}: tree of {} grew from {before} to {after}",
                    node(ids, dcs.root)
                ));
            }
        }
        for v in 0..n {
            let Some(r) = root[v] else { continue };
            if red(r) {
                let limit = d0[v] as u64 + 2 * (j as u64 + 1);
                if depth[v] as u64 > limit {
                    bad_red.get_or_insert(format!(
                        "step {j}: red {} at depth {} > {limit}",
                        node(ids, v),
                        depth[v]
                    ));
                }
            } else if depth[v] != d0[v] {
                bad_blue.get_or_insert(format!(
                    "step {j}: blue {} moved from depth {} to {}",
                    node(ids, v),
                    d0[v],
                    depth[v]
                ));
            }
        }
    }

    let fin = &phase.final_forest;
    let replay_ok = (0..n).all(|v| {
        root[v] == fin.root_of(v) && (root[v].is_none() || depth[v] == fin.depth(v).unwrap())
    });
    if !replay_ok {
        bad_trace.get_or_insert("replayed forest differs from the recorded final forest".into());
    }

    let mut report = Report::default();
    let tag = |s: &str| format!("phase {p} {s}");
    report.record(tag("trace-consistency"), bad_trace);
    report.record(tag("blue-depth"), bad_blue);
    report.record(tag("red-depth"), bad_red);
    report.record(tag("growth"), bad_growth);
    report.record(tag("blame"), bad_blame);
    report.record(tag("declined-frozen"), bad_frozen);
    report
}

/// Phase-level invariants over a whole run on `G[domain]`.
pub fn check_phases(
    g: &Graph,
    ids: &IdAssignment,
    domain: &NodeSet,
    phases: &[PhaseResult],
) -> Report {
    let b = ids.bits() as u64;
    let n0 = domain.len() as u64;
    let mut report = Report::default();
    let mut deletion = None;
    let mut cumulative = None;
    let mut ruling = None;
    let mut separation = None;
    let mut chain = None;
    let mut prev = domain.clone();
    for ph in phases {
        let p = ph.phase as u64;
        if ph.alive_in != prev || !ph.survivors.is_subset(&ph.alive_in) {
            chain.get_or_insert(format!("phase {p} does not continue from the previous one"));
        }
        let alive_in = ph.alive_in.len() as u64;
        let deleted = alive_in - ph.survivors.len() as u64;
        if deleted * 2 * b > alive_in {
            deletion.get_or_insert(format!("phase {p} deleted {deleted} of {alive_in}"));
        }
        let kept = ph.survivors.len() as u64;
        if kept * 2 * b < (2 * b - (p + 1)) * n0 {
            cumulative.get_or_insert(format!("{kept} of {n0} alive after phase {p}"));
        }
        let r = ruling_radius(ids.bits(), ph.phase + 1);
        if let Some(w) = check_ruling(g, ids, &ph.survivors, &ph.terminals_out, r).checks[0]
            .witness
            .clone()
        {
            ruling.get_or_insert(format!("after phase {p}: {w}"));
        }
        for comp in connected_components(g, &ph.survivors) {
            let mut ts = comp
                .iter()
                .copied()
                .filter(|&v| ph.terminals_out.contains(v));
            let Some(first) = ts.next() else {
                separation.get_or_insert(format!(
                    "after phase {p}: component of {} has no terminal",
                    node(ids, comp[0])
                ));
                continue;
            };
            let prefix = |v: usize| {
                (0..=ph.phase)
                    .map(|q| id_bit(ids.id(v), ids.bits(), q))
                    .collect::<Vec<_>>()
            };
            if let Some(other) = ts.find(|&t| prefix(t) != prefix(first)) {
                separation.get_or_insert(format!(
                    "after phase {p}: terminals {} and {} share a component",
                    ids.id(first),
                    ids.id(other)
                ));
            }
        }
        prev = ph.survivors.clone();
    }
    if phases.len() as u64 != b {
        chain.get_or_insert(format!("{} phases recorded, expected {b}", phases.len()));
    }
    report.record("phase-chain", chain);
    report.record("phase-deletion", deletion);
    report.record("alive-fraction", cumulative);
    report.record("phase-ruling", ruling);
    report.record("phase-separation", separation);
    report
}

/// Replays the colors in order against the shrinking residual graph.
pub fn check_decomposition(g: &Graph, ids: &IdAssignment, d: &Decomposition) -> Report {
    let n = g.node_count();
    let mut report = Report::default();
    let uncolored = (0..n).find(|&v| d.color_of.get(v).copied().flatten().is_none());
    report.record(
        "all-colored",
        uncolored.map(|v| format!("{} has no color", node(ids, v))),
    );
    let colors = d.colors_used();
    report.record(
        "length",
        (d.color_of.len() != n).then(|| format!("{} colors for {n} nodes", d.color_of.len())),
    );
    let bad_color =
        (0..n.min(d.color_of.len())).find(|&v| matches!(d.color_of[v], Some(c) if c >= colors));
    report.record(
        "color-range",
        bad_color.map(|v| {
            format!(
                "{} has color {} of {colors}",
                node(ids, v),
                d.color_of[v].unwrap()
            )
        }),
    );
    let bound = color_bound(n);
    report.record(
        "color-count",
        (colors > bound).then(|| format!("{colors} colors, bound {bound}")),
    );

    let mut clusters_ok = None;
    let mut diameter = None;
    let limit = diameter_bound(d.b);
    for c in 0..colors {
        let class = NodeSet::from_nodes(
            n,
            (0..n.min(d.color_of.len())).filter(|&v| d.color_of[v] == Some(c)),
        );
        let terminals: BTreeSet<usize> = d.terminals[c].iter().copied().collect();
        // Components of a color class are pairwise non-adjacent, so merged
        // clusters show up as components holding several terminals.
        let comps = connected_components(g, &class);
        for comp in &comps {
            let held: Vec<usize> = comp
                .iter()
                .copied()
                .filter(|v| terminals.contains(v))
                .collect();
            if held.len() != 1 {
                clusters_ok.get_or_insert(format!(
                    "color {c}: cluster containing {} holds {} terminals",
                    node(ids, comp[0]),
                    held.len()
                ));
            }
            let set = NodeSet::from_nodes(n, comp.iter().copied());
            if let Ok(Diameter::Finite(dm)) = induced_diameter(g, &set) {
                if dm as u64 > limit {
                    diameter.get_or_insert(format!(
                        "color {c}: cluster of {} has diameter {dm} > {limit}",
                        node(ids, comp[0])
                    ));
                }
            }
        }
        if let Some(&t) = terminals.iter().find(|&&t| t >= n || !class.contains(t)) {
            clusters_ok.get_or_insert(format!("color {c}: terminal index {t} not of this color"));
        }
    }
    report.record("clusters", clusters_ok);
    report.record("diameter", diameter);
    report
}

pub fn check_mis(g: &Graph, ids: &IdAssignment, s: &[usize]) -> Report {
    let n = g.node_count();
    let mut report = Report::default();
    if let Some(&v) = s.iter().find(|&&v| v >= n) {
        report.record("in-range", Some(format!("index {v} out of range")));
        return report;
    }
    let set = NodeSet::from_nodes(n, s.iter().copied());
    let inside = g.edges().find(|&(u, v)| set.contains(u) && set.contains(v));
    report.record(
        "independent",
        inside.map(|(u, v)| format!("{} inside the set", edge(ids, u, v))),
    );
    let undominated =
        (0..n).find(|&v| !set.contains(v) && !g.neighbors(v).iter().any(|&w| set.contains(w)));
    report.record(
        "maximal",
        undominated.map(|v| format!("{} has no neighbor in the set", node(ids, v))),
    );
    report
}

/// Audits a forest against the graph; used on simulated snapshots.
pub fn check_forest(g: &Graph, ids: &IdAssignment, f: &RootedForest) -> Report {
    let mut report = Report::default();
    report.record(
        "forest",
        f.audit(g).err().map(|e| match e {
            crate::forest::ForestError::Audit { node: v, msg } => {
                format!("{}: {msg}", node(ids, v))
            }
            other => other.to_string(),
        }),
    );
    report
}
