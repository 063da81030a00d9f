//! Directed graphs over `0..n` and the SCC queries used by the qualitative
//! analyses.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Support graph: adjacency lists over vertices `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SupportGraph {
    pub succ: Vec<Vec<usize>>,
}

impl SupportGraph {
    pub fn new(n: usize) -> Self {
        SupportGraph {
            succ: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    /// Adds `u -> v` unless already present.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if !self.succ[u].contains(&v) {
            self.succ[u].push(v);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Strongly connected components of the subgraph induced by `keep`
    /// (all vertices when `None`). Each component is sorted.
    pub fn sccs(&self, keep: Option<&[bool]>) -> Vec<Vec<usize>> {
        let inside = |v: usize| keep.is_none_or(|k| k[v]);
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(self.len(), 0);
        for _ in 0..self.len() {
            g.add_node(());
        }
        for (u, v) in self.edges() {
            if inside(u) && inside(v) {
                g.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
            }
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .filter(|c| inside(c[0]))
            .collect()
    }

    /// Ergodic sets: SCCs with no edge leaving them.
    pub fn bottom_sccs(&self) -> Vec<Vec<usize>> {
        let comps = self.sccs(None);
        let mut comp_of = vec![0; self.len()];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let mut out: Vec<Vec<usize>> = comps
            .iter()
            .enumerate()
            .filter(|(i, c)| c.iter().all(|&u| self.succ[u].iter().all(|&v| comp_of[v] == *i)))
            .map(|(_, c)| c.clone())
            .collect();
        out.sort();
        out
    }

    /// Whether a vertex set is strongly connected using only its own edges.
    pub fn is_strongly_connected(&self, set: &[usize]) -> bool {
        let mut keep = vec![false; self.len()];
        for &v in set {
            keep[v] = true;
        }
        !set.is_empty() && self.sccs(Some(&keep)).len() == 1
    }
}
