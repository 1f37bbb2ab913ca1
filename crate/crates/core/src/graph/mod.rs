//! Finite simple undirected graphs over dense vertex ids `0..n`.
//!
//! A [`Graph`] is immutable once built. Every other module refers to
//! vertices by their position, so builders and subdivisions document the
//! order in which ids are handed out.

mod families;
mod io;
mod structure;

pub use families::{subdivide, GraphFamily};
pub use io::{parse_graph, serialize_graph, GraphFormat, ParsedGraph};
pub use structure::{
    components, degeneracy_ordering, is_independent_set, k_core, path_order, structure_queries,
    KCore, Structure,
};

use thiserror::Error;

/// Vertex identifier; always in `0..graph.n()`.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("invalid parameters for {family}: {reason}")]
    InvalidFamily {
        family: &'static str,
        reason: String,
    },
    #[error("no subdivision length given for edge {0}-{1}")]
    MissingLength(usize, usize),
    #[error("subdivision length for edge {0}-{1} must be at least 1")]
    ZeroLength(usize, usize),
    #[error("malformed {format} input: {reason}")]
    Parse {
        format: &'static str,
        reason: String,
    },
    #[error("graph6 short form supports at most 62 vertices, got {0}")]
    TooLargeForGraph6(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    /// Edgeless graph on `n` vertices (`n = 0` gives the empty graph).
    pub fn edgeless(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list, silently dropping repeated edges.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        Self::from_edges_counting(n, edges).map(|(g, _)| g)
    }

    /// Like [`Graph::from_edges`] but also reports how many duplicates were dropped.
    pub fn from_edges_counting(
        n: usize,
        edges: &[(Vertex, Vertex)],
    ) -> Result<(Self, usize), GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut dups = 0;
        for list in adj.iter_mut() {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            dups += before - list.len();
        }
        // each duplicate edge was counted at both endpoints
        Ok((Graph { adj }, dups / 2))
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            })
        }
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `keep`, renumbered in increasing order of the
    /// original ids. Returns the subgraph and the new-to-old id map.
    pub fn induced_subgraph(&self, keep: &[Vertex]) -> (Graph, Vec<Vertex>) {
        let mut map: Vec<Vertex> = keep.to_vec();
        map.sort_unstable();
        map.dedup();
        let mut index = vec![usize::MAX; self.n()];
        for (new, &old) in map.iter().enumerate() {
            index[old] = new;
        }
        let adj = map
            .iter()
            .map(|&old| {
                self.adj[old]
                    .iter()
                    .filter(|&&w| index[w] != usize::MAX)
                    .map(|&w| index[w])
                    .collect()
            })
            .collect();
        (Graph { adj }, map)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let mut adj = self.adj.clone();
        adj.extend(
            other
                .adj
                .iter()
                .map(|list| list.iter().map(|&w| w + shift).collect()),
        );
        Graph { adj }
    }

    /// Adds a new vertex adjacent to `nbrs`; it receives id `self.n()`.
    pub fn with_vertex(&self, nbrs: &[Vertex]) -> Result<Graph, GraphError> {
        let z = self.n();
        let mut edges: Vec<_> = self.edges().collect();
        edges.extend(nbrs.iter().map(|&v| (v, z)));
        Graph::from_edges(z + 1, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_dedups_and_counts() {
        let (g, dups) = Graph::from_edges_counting(3, &[(0, 1), (1, 0), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(dups, 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn rejects_loops_and_range() {
        assert_eq!(
            Graph::from_edges(2, &[(1, 1)]),
            Err(GraphError::SelfLoop(1))
        );
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(GraphError::VertexOutOfRange { vertex: 2, n: 2 })
        ));
    }

    #[test]
    fn empty_graph_is_a_value() {
        let g = Graph::edgeless(0);
        assert!(g.is_empty());
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.edges().count(), 0);
    }

    #[test]
    fn induced_subgraph_renumbers() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let (h, map) = g.induced_subgraph(&[3, 1, 2]);
        assert_eq!(map, vec![1, 2, 3]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }
}
