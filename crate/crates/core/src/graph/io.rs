use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    EdgeJson,
    Graph6,
}

impl std::str::FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge_json" | "edge-json" | "json" => Ok(GraphFormat::EdgeJson),
            "graph6" | "g6" => Ok(GraphFormat::Graph6),
            _ => Err(format!("unknown graph format `{s}`")),
        }
    }
}

/// A parsed graph plus the number of duplicate edges that were dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub duplicate_edges: usize,
}

impl ParsedGraph {
    pub fn has_duplicate_warning(&self) -> bool {
        self.duplicate_edges > 0
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    n: usize,
    edges: Vec<[Vertex; 2]>,
}

pub fn parse_graph(input: &[u8], format: GraphFormat) -> Result<ParsedGraph, GraphError> {
    match format {
        GraphFormat::EdgeJson => {
            let doc: EdgeJson = serde_json::from_slice(input).map_err(|e| GraphError::Parse {
                format: "edge_json",
                reason: e.to_string(),
            })?;
            let edges: Vec<_> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
            let (graph, duplicate_edges) = Graph::from_edges_counting(doc.n, &edges)?;
            Ok(ParsedGraph {
                graph,
                duplicate_edges,
            })
        }
        GraphFormat::Graph6 => parse_graph6(input).map(|graph| ParsedGraph {
            graph,
            duplicate_edges: 0,
        }),
    }
}

pub fn serialize_graph(g: &Graph, format: GraphFormat) -> Result<Vec<u8>, GraphError> {
    match format {
        GraphFormat::EdgeJson => {
            let doc = EdgeJson {
                n: g.n(),
                edges: g.edges().map(|(u, v)| [u, v]).collect(),
            };
            Ok(serde_json::to_vec(&doc).expect("edge json serializes"))
        }
        GraphFormat::Graph6 => to_graph6(g),
    }
}

fn g6_err(reason: impl Into<String>) -> GraphError {
    GraphError::Parse {
        format: "graph6",
        reason: reason.into(),
    }
}

fn parse_graph6(input: &[u8]) -> Result<Graph, GraphError> {
    let text = std::str::from_utf8(input).map_err(|_| g6_err("not UTF-8"))?;
    let line = text.trim_end_matches(['\n', '\r']);
    let line = line.strip_prefix(">>graph6<<").unwrap_or(line);
    let bytes = line.as_bytes();
    let (&head, body) = bytes.split_first().ok_or_else(|| g6_err("empty input"))?;
    if head == 126 {
        return Err(g6_err("long-form header (n > 62) is not supported"));
    }
    if !(63..=125).contains(&head) {
        return Err(g6_err(format!("bad header byte {head}")));
    }
    let n = (head - 63) as usize;
    let bits_needed = n * n.saturating_sub(1) / 2;
    let chars_needed = bits_needed.div_ceil(6);
    if body.len() != chars_needed {
        return Err(g6_err(format!(
            "expected {chars_needed} data characters for n = {n}, got {}",
            body.len()
        )));
    }
    let mut bits = Vec::with_capacity(chars_needed * 6);
    for &c in body {
        if !(63..=126).contains(&c) {
            return Err(g6_err(format!("bad data byte {c}")));
        }
        let x = c - 63;
        for shift in (0..6).rev() {
            bits.push((x >> shift) & 1 == 1);
        }
    }
    if bits[bits_needed..].iter().any(|&b| b) {
        return Err(g6_err("nonzero padding bits"));
    }
    // bits enumerate the upper triangle column by column: (0,1), (0,2), (1,2), (0,3), ...
    let mut edges = Vec::new();
    let mut k = 0;
    for v in 1..n {
        for u in 0..v {
            if bits[k] {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, &edges)
}

fn to_graph6(g: &Graph) -> Result<Vec<u8>, GraphError> {
    let n = g.n();
    if n > 62 {
        return Err(GraphError::TooLargeForGraph6(n));
    }
    let mut out = vec![n as u8 + 63];
    let mut acc = 0u8;
    let mut filled = 0;
    for v in 1..n {
        for u in 0..v {
            acc = (acc << 1) | g.has_edge(u, v) as u8;
            filled += 1;
            if filled == 6 {
                out.push(acc + 63);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((acc << (6 - filled)) + 63);
    }
    Ok(out)
}
