use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, Vertex};

/// Named graph families with their canonical vertex numbering.
///
/// Paths and cycles number vertices consecutively along the path/cycle.
/// Complete multipartite graphs number the parts in order, so for
/// `K_{m,n}` ids `0..m` form the first part and `m..m+n` the second.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFamily {
    Path { k: usize },
    Cycle { k: usize },
    CompleteBipartite { m: usize, n: usize },
    CompleteMultipartite { parts: Vec<usize> },
    SingleVertex,
    Edgeless { n: usize },
}

impl GraphFamily {
    /// Parses a `kind` name plus integer parameters, as used on the command line.
    pub fn from_kind(kind: &str, params: &[usize]) -> Result<Self, GraphError> {
        let want = |count: usize, family: &'static str| {
            if params.len() == count {
                Ok(())
            } else {
                Err(GraphError::InvalidFamily {
                    family,
                    reason: format!("expected {count} parameter(s), got {}", params.len()),
                })
            }
        };
        let fam = match kind {
            "path" => {
                want(1, "path")?;
                GraphFamily::Path { k: params[0] }
            }
            "cycle" => {
                want(1, "cycle")?;
                GraphFamily::Cycle { k: params[0] }
            }
            "complete_bipartite" | "complete-bipartite" => {
                want(2, "complete_bipartite")?;
                GraphFamily::CompleteBipartite {
                    m: params[0],
                    n: params[1],
                }
            }
            "complete_multipartite" | "complete-multipartite" => {
                GraphFamily::CompleteMultipartite {
                    parts: params.to_vec(),
                }
            }
            "single_vertex" | "single-vertex" => {
                want(0, "single_vertex")?;
                GraphFamily::SingleVertex
            }
            "edgeless" => {
                want(1, "edgeless")?;
                GraphFamily::Edgeless { n: params[0] }
            }
            other => {
                return Err(GraphError::InvalidFamily {
                    family: "family",
                    reason: format!("unknown kind `{other}`"),
                })
            }
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |family: &'static str, reason: &str| {
            Err(GraphError::InvalidFamily {
                family,
                reason: reason.to_string(),
            })
        };
        match self {
            GraphFamily::Path { k } if *k < 1 => bad("path", "path needs k >= 1"),
            GraphFamily::Cycle { k } if *k < 3 => bad("cycle", "cycle length must be at least 3"),
            GraphFamily::CompleteBipartite { m, n } if *m < 1 || *n < 1 => {
                bad("complete_bipartite", "part sizes must be at least 1")
            }
            GraphFamily::CompleteMultipartite { parts } if parts.is_empty() => {
                bad("complete_multipartite", "need at least one part")
            }
            GraphFamily::CompleteMultipartite { parts } if parts.contains(&0) => {
                bad("complete_multipartite", "part sizes must be at least 1")
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Graph, GraphError> {
        self.validate()?;
        let g = match self {
            GraphFamily::Path { k } => {
                let edges: Vec<_> = (1..*k).map(|i| (i - 1, i)).collect();
                Graph::from_edges(*k, &edges)?
            }
            GraphFamily::Cycle { k } => {
                let edges: Vec<_> = (0..*k).map(|i| (i, (i + 1) % k)).collect();
                Graph::from_edges(*k, &edges)?
            }
            GraphFamily::CompleteBipartite { m, n } => complete_multipartite(&[*m, *n])?,
            GraphFamily::CompleteMultipartite { parts } => complete_multipartite(parts)?,
            GraphFamily::SingleVertex => Graph::edgeless(1),
            GraphFamily::Edgeless { n } => Graph::edgeless(*n),
        };
        Ok(g)
    }
}

fn complete_multipartite(parts: &[usize]) -> Result<Graph, GraphError> {
    let mut offsets = Vec::with_capacity(parts.len() + 1);
    offsets.push(0);
    for p in parts {
        offsets.push(offsets.last().unwrap() + p);
    }
    let n = *offsets.last().unwrap();
    let mut edges = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            for u in offsets[i]..offsets[i + 1] {
                for v in offsets[j]..offsets[j + 1] {
                    edges.push((u, v));
                }
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Replaces every edge `uv` of `h` by a path with `lengths[uv]` edges.
///
/// Original vertices keep their ids. Internal vertices get fresh ids
/// starting at `h.n()`, handed out edge by edge in sorted `(u, v)` order
/// (`u < v`), walking from `u` towards `v`. Keys of `lengths` may be given
/// in either orientation.
pub fn subdivide(
    h: &Graph,
    lengths: &BTreeMap<(Vertex, Vertex), usize>,
) -> Result<Graph, GraphError> {
    let mut next = h.n();
    let mut edges = Vec::new();
    for (u, v) in h.edges() {
        let len = *lengths
            .get(&(u, v))
            .or_else(|| lengths.get(&(v, u)))
            .ok_or(GraphError::MissingLength(u, v))?;
        if len == 0 {
            return Err(GraphError::ZeroLength(u, v));
        }
        let mut prev = u;
        for _ in 1..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, v));
    }
    Graph::from_edges(next, &edges)
}

/// Convenience: the same length on every edge.
pub(crate) fn uniform_lengths(h: &Graph, len: usize) -> BTreeMap<(Vertex, Vertex), usize> {
    h.edges().map(|e| (e, len)).collect()
}

impl Graph {
    /// `h` with every edge replaced by a path of `len` edges.
    pub fn subdivide_uniform(&self, len: usize) -> Result<Graph, GraphError> {
        subdivide(self, &uniform_lengths(self, len))
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph::from_edges(n, &edges).expect("complete graph edges are in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_four_edges() {
        let g = GraphFamily::Cycle { k: 4 }.build().unwrap();
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(0, 1), (0, 3), (1, 2), (2, 3)]
        );
    }

    #[test]
    fn path_one_is_k1() {
        let g = GraphFamily::Path { k: 1 }.build().unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
    }

    #[test]
    fn k23_parts() {
        let g = GraphFamily::CompleteBipartite { m: 2, n: 3 }
            .build()
            .unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.neighbors(0), &[2, 3, 4]);
        assert_eq!(g.neighbors(4), &[0, 1]);
    }

    #[test]
    fn invalid_params() {
        assert!(GraphFamily::Cycle { k: 2 }.build().is_err());
        assert!(GraphFamily::CompleteBipartite { m: 0, n: 3 }
            .build()
            .is_err());
        assert!(GraphFamily::CompleteMultipartite { parts: vec![2, 0] }
            .build()
            .is_err());
        assert!(GraphFamily::from_kind("cycle", &[3, 4]).is_err());
    }

    #[test]
    fn subdivide_identity_and_triangle() {
        let k4 = Graph::complete(4);
        assert_eq!(k4.subdivide_uniform(1).unwrap(), k4);
        let c6 = Graph::complete(3).subdivide_uniform(2).unwrap();
        assert_eq!(c6.n(), 6);
        assert_eq!(c6.edge_count(), 6);
        assert!(c6.vertices().all(|v| c6.degree(v) == 2));
    }

    #[test]
    fn subdivided_k4_counts() {
        let g = Graph::complete(4).subdivide_uniform(4).unwrap();
        // 4 branch vertices + 6 edges * 3 internal vertices
        assert_eq!(g.n(), 22);
        assert_eq!(g.max_degree(), 3);
        assert!((4..22).all(|v| g.degree(v) == 2));
        assert!((0..4).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn subdivide_missing_length() {
        let h = Graph::complete(3);
        let mut lengths = uniform_lengths(&h, 2);
        lengths.remove(&(1, 2));
        assert_eq!(
            subdivide(&h, &lengths),
            Err(GraphError::MissingLength(1, 2))
        );
    }
}
