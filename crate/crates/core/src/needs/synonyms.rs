//! Synonym graph built from assessor groupings, and density/periphery
//! clustering of that graph.
//!
//! The clustering grows one cluster at a time from the heaviest remaining
//! node. A neighbor `n` joins cluster `C` while
//!
//! * its cluster property `cp(n, C) = w(n, C) / (density(C) * |C|)` is at
//!   least `cp_min`, where `w(n, C)` is the total edge weight between `n`
//!   and `C`, and
//! * the enlarged cluster keeps `density >= density_min`, with
//!   `density(C) = 2 * sum(weights) / (|C| * (|C| - 1))` (1 for a single node).
//!
//! Among candidates with equal `cp`, the one sharing more neighbors with the
//! cluster members is preferred, then the smaller term. A finished cluster is
//! removed from the graph and the procedure repeats until no node is left.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{tsv, Error, Result};

/// One assessor's partition of (part of) the term set into synonym groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessorGrouping {
    pub assessor: String,
    pub groups: Vec<Vec<String>>,
}

pub fn parse_groupings(text: &str, file: &str) -> Result<Vec<AssessorGrouping>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::malformed(file, i + 1, e.to_string())))
        .collect()
}

/// Reads `synonyms_input.jsonl`: `{"assessor": id, "groups": [[term, ...], ...]}`.
pub fn load_groupings(path: &Path) -> Result<Vec<AssessorGrouping>> {
    parse_groupings(&tsv::read(path)?, &tsv::file_name(path))
}

/// Undirected weighted graph over terms; an edge's weight is the number of
/// assessors that put both ends in the same group.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymGraph {
    nodes: BTreeSet<String>,
    adj: BTreeMap<String, BTreeMap<String, u32>>,
}

impl SynonymGraph {
    pub fn add_node(&mut self, term: impl Into<String>) {
        self.nodes.insert(term.into());
    }

    /// Adds `w` to the weight of edge `{u, v}`. Self-edges are ignored.
    pub fn add_edge(&mut self, u: &str, v: &str, w: u32) {
        if u == v {
            return;
        }
        self.add_node(u);
        self.add_node(v);
        *self
            .adj
            .entry(u.to_owned())
            .or_default()
            .entry(v.to_owned())
            .or_default() += w;
        *self
            .adj
            .entry(v.to_owned())
            .or_default()
            .entry(u.to_owned())
            .or_default() += w;
    }

    pub fn weight(&self, u: &str, v: &str) -> u32 {
        self.adj.get(u).and_then(|r| r.get(v)).copied().unwrap_or(0)
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    /// Each undirected edge once, as `(smaller, larger, weight)`.
    pub fn edges(&self) -> Vec<(&str, &str, u32)> {
        self.adj
            .iter()
            .flat_map(|(u, row)| {
                row.iter()
                    .filter(move |(v, _)| u < *v)
                    .map(move |(v, w)| (u.as_str(), v.as_str(), *w))
            })
            .collect()
    }

    fn neighbors(&self, u: &str) -> impl Iterator<Item = (&String, u32)> {
        self.adj.get(u).into_iter().flat_map(|r| r.iter().map(|(v, w)| (v, *w)))
    }
}

/// Adds one unit of weight between every pair of terms sharing a group, per
/// assessor. A term in two groups of the same assessor is an error.
pub fn build_synonym_graph(assessors: &[AssessorGrouping]) -> Result<SynonymGraph> {
    let mut g = SynonymGraph::default();
    for a in assessors {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (gi, group) in a.groups.iter().enumerate() {
            for term in group {
                if let Some(prev) = seen.insert(term.as_str(), gi) {
                    if prev != gi {
                        return Err(Error::InvalidArgument(format!(
                            "assessor `{}` puts `{term}` in more than one group",
                            a.assessor
                        )));
                    }
                }
            }
            let members: BTreeSet<&str> = group.iter().map(String::as_str).collect();
            for t in &members {
                g.add_node(*t);
            }
            let members: Vec<&str> = members.into_iter().collect();
            for (i, u) in members.iter().enumerate() {
                for v in &members[i + 1..] {
                    g.add_edge(u, v, 1);
                }
            }
        }
    }
    Ok(g)
}

struct Growth<'g> {
    graph: &'g SynonymGraph,
    alive: &'g BTreeSet<String>,
    members: BTreeSet<String>,
    internal_weight: u64,
}

impl Growth<'_> {
    fn density_with(&self, extra_weight: u64, size: usize) -> f64 {
        if size < 2 {
            1.0
        } else {
            2.0 * (self.internal_weight + extra_weight) as f64 / (size * (size - 1)) as f64
        }
    }

    fn weight_to_cluster(&self, n: &str) -> u64 {
        self.graph
            .neighbors(n)
            .filter(|(v, _)| self.members.contains(*v))
            .map(|(_, w)| w as u64)
            .sum()
    }

    fn shared_neighbors(&self, n: &str) -> usize {
        let mine: BTreeSet<&String> = self
            .graph
            .neighbors(n)
            .filter(|(v, _)| self.alive.contains(*v))
            .map(|(v, _)| v)
            .collect();
        self.members
            .iter()
            .map(|m| self.graph.neighbors(m).filter(|(v, _)| mine.contains(v)).count())
            .sum()
    }

    fn candidates(&self) -> BTreeSet<&String> {
        self.members
            .iter()
            .flat_map(|m| self.graph.neighbors(m))
            .map(|(v, _)| v)
            .filter(|v| self.alive.contains(*v) && !self.members.contains(*v))
            .collect()
    }
}

pub fn cluster_synonyms(graph: &SynonymGraph, density_min: f64, cp_min: f64) -> Result<Vec<BTreeSet<String>>> {
    for (name, v) in [("density_min", density_min), ("cp_min", cp_min)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidArgument(format!("{name} = {v} outside (0, 1]")));
        }
    }
    let mut alive = graph.nodes().clone();
    let mut clusters = Vec::new();
    while !alive.is_empty() {
        let seed = alive
            .iter()
            .map(|n| {
                let deg: u64 = graph
                    .neighbors(n)
                    .filter(|(v, _)| alive.contains(*v))
                    .map(|(_, w)| w as u64)
                    .sum();
                (n, deg)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(n, _)| n.clone())
            .expect("alive is non-empty");

        let mut growth = Growth {
            graph,
            alive: &alive,
            members: BTreeSet::from([seed]),
            internal_weight: 0,
        };
        loop {
            let size = growth.members.len();
            let density = growth.density_with(0, size);
            let best = growth
                .candidates()
                .into_iter()
                .map(|n| {
                    let w = growth.weight_to_cluster(n);
                    let cp = w as f64 / (density * size as f64);
                    (n.clone(), w, cp, growth.shared_neighbors(n))
                })
                .max_by(|a, b| {
                    a.2.total_cmp(&b.2)
                        .then_with(|| a.3.cmp(&b.3))
                        .then_with(|| b.0.cmp(&a.0))
                });
            let Some((node, w, cp, _)) = best else {
                break;
            };
            if cp < cp_min || growth.density_with(w, size + 1) < density_min {
                break;
            }
            growth.internal_weight += w;
            growth.members.insert(node);
        }
        let members = growth.members;
        for m in &members {
            alive.remove(m);
        }
        clusters.push(members);
    }
    Ok(clusters)
}
