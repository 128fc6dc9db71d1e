//! The conjugacy-class graph `Γ(G, C)` and its graph norm.
//!
//! Vertices are the conjugacy classes of `G`. For a set `C` of classes,
//! `(x, y)` is an edge iff `x ⊂ c y` for some `c ∈ C`; the graph is taken as
//! undirected, so the rule is symmetrised. `||g||_C` is the BFS distance from
//! the identity class to the class of `g`, and classes outside the identity's
//! component get the largest distance attained inside it.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::groups::{class_product, FiniteGroup};
use crate::metrics::{Norm, NormValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjGraph {
    generating: Vec<usize>,
    adjacency: Vec<BTreeSet<usize>>,
    labels: Vec<String>,
}

impl ConjGraph {
    pub fn build(g: &FiniteGroup, generating: &[usize]) -> Result<ConjGraph> {
        let p = g.classes();
        let k = p.num_classes();
        if let Some(&bad) = generating.iter().find(|&&c| c >= k) {
            return Err(Error::Malformed(format!("class id {bad} out of range (group has {k} classes)")));
        }
        let generating: Vec<usize> = generating.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut adjacency = vec![BTreeSet::new(); k];
        for y in 0..k {
            for &c in &generating {
                for x in class_product(g, c, y) {
                    adjacency[x].insert(y);
                    adjacency[y].insert(x);
                }
            }
        }
        let labels = (0..k).map(|c| p.label(c).to_string()).collect();
        Ok(ConjGraph { generating, adjacency, labels })
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn generating_classes(&self) -> &[usize] {
        &self.generating
    }

    pub fn neighbors(&self, c: usize) -> &BTreeSet<usize> {
        &self.adjacency[c]
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.adjacency[x].contains(&y)
    }

    /// Undirected edges `(x, y)` with `x <= y`, loops included.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (x, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&y| y >= x).map(|&y| (x, y)));
        }
        out
    }

    pub fn label(&self, c: usize) -> &str {
        &self.labels[c]
    }

    fn labelled_edges(&self) -> Vec<(&str, &str)> {
        let mut e: Vec<(&str, &str)> = self
            .edges()
            .into_iter()
            .map(|(x, y)| {
                let (a, b) = (self.label(x), self.label(y));
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        e.sort_unstable();
        e
    }

    /// One `<label> -- <label>` line per edge, sorted by label.
    pub fn edge_list(&self) -> String {
        let mut s = String::new();
        for (a, b) in self.labelled_edges() {
            let _ = writeln!(s, "{a} -- {b}");
        }
        s
    }

    /// The same edges as an undirected DOT graph.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n");
        for l in &self.labels {
            let _ = writeln!(s, "  \"{l}\";");
        }
        for (a, b) in self.labelled_edges() {
            let _ = writeln!(s, "  \"{a}\" -- \"{b}\";");
        }
        s.push_str("}\n");
        s
    }
}

/// BFS distances from the identity class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNorm {
    pub graph: ConjGraph,
    /// `None` for classes outside the identity's component.
    pub dist: Vec<Option<u32>>,
    pub max_reachable: u32,
}

impl GraphNorm {
    pub fn new(graph: ConjGraph) -> GraphNorm {
        let k = graph.num_vertices();
        let mut dist = vec![None; k];
        dist[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].expect("visited");
            for &y in graph.neighbors(x) {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        let max_reachable = dist.iter().flatten().copied().max().unwrap_or(0);
        GraphNorm { graph, dist, max_reachable }
    }

    /// Norm value of a class: its distance, or `max_reachable` if unreachable.
    pub fn class_value(&self, c: usize) -> u32 {
        self.dist[c].unwrap_or(self.max_reachable)
    }

    pub fn is_reachable(&self, c: usize) -> bool {
        self.dist[c].is_some()
    }

    /// The norm `eps * ||.||_C` as an exact class function.
    pub fn to_norm(&self, g: &FiniteGroup, eps: Rational64) -> Result<Norm> {
        let vals = (0..self.graph.num_vertices())
            .map(|c| NormValue::Exact(eps * Rational64::from_integer(i64::from(self.class_value(c)))))
            .collect();
        let gen: Vec<&str> = self.graph.generating_classes().iter().map(|&c| self.graph.label(c)).collect();
        let label = if eps == Rational64::from_integer(1) {
            format!("graph {{{}}}", gen.join(", "))
        } else {
            format!("{eps} * graph {{{}}}", gen.join(", "))
        };
        Norm::from_class_values(g, vals, label)
    }
}

/// `Γ(G, C)` with its BFS distances.
pub fn graph_norm(g: &FiniteGroup, generating: &[usize]) -> Result<GraphNorm> {
    Ok(GraphNorm::new(ConjGraph::build(g, generating)?))
}

/// The norm `eps * ||.||_C`.
pub fn scaled_graph_metric(g: &FiniteGroup, generating: &[usize], eps: Rational64) -> Result<Norm> {
    if eps <= Rational64::from_integer(0) {
        return Err(Error::Malformed(format!("scale must be positive, got {eps}")));
    }
    graph_norm(g, generating)?.to_norm(g, eps)
}
