use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{Graph, GraphError, Vertex};

/// Result of peeling a graph down to its `k`-core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KCore {
    /// Surviving vertices, sorted.
    pub core: Vec<Vertex>,
    /// Removed vertices in removal order; each had residual degree `< k`
    /// when it was removed.
    pub deletion_order: Vec<Vertex>,
}

/// Successively deletes vertices of residual degree below `k`.
///
/// Among eligible vertices the smallest id goes first, which makes the
/// deletion order reproducible.
pub fn k_core(g: &Graph, k: usize) -> KCore {
    let n = g.n();
    let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut ready: BTreeSet<Vertex> = g.vertices().filter(|&v| deg[v] < k).collect();
    let mut deletion_order = Vec::new();
    while let Some(v) = ready.pop_first() {
        removed[v] = true;
        deletion_order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                deg[w] -= 1;
                if deg[w] < k {
                    ready.insert(w);
                }
            }
        }
    }
    KCore {
        core: g.vertices().filter(|&v| !removed[v]).collect(),
        deletion_order,
    }
}

/// Connected components, each sorted, ordered by smallest member.
pub fn components(g: &Graph) -> Vec<Vec<Vertex>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in g.vertices() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Structure {
    pub components: Vec<Vec<Vertex>>,
    pub is_linear_forest: bool,
    pub is_unicyclic: bool,
    /// The unique cycle in cyclic order, present exactly when unicyclic.
    pub cycle: Option<Vec<Vertex>>,
}

pub fn structure_queries(g: &Graph) -> Structure {
    let comps = components(g);
    let is_linear_forest = comps.iter().all(|c| {
        let edges: usize = c.iter().map(|&v| g.degree(v)).sum::<usize>() / 2;
        edges + 1 == c.len() && c.iter().all(|&v| g.degree(v) <= 2)
    });
    let is_unicyclic = comps.len() == 1 && g.edge_count() == g.n();
    let cycle = is_unicyclic.then(|| unique_cycle(g));
    Structure {
        components: comps,
        is_linear_forest,
        is_unicyclic,
        cycle,
    }
}

/// Cycle of a unicyclic graph: its 2-core, listed in cyclic order.
fn unique_cycle(g: &Graph) -> Vec<Vertex> {
    let core = k_core(g, 2).core;
    let in_core: BTreeSet<_> = core.iter().copied().collect();
    let mut order = vec![core[0]];
    let mut prev = usize::MAX;
    let mut cur = core[0];
    loop {
        let next = g
            .neighbors(cur)
            .iter()
            .copied()
            .find(|w| in_core.contains(w) && *w != prev)
            .expect("2-core of a unicyclic graph is a cycle");
        if next == core[0] {
            break;
        }
        order.push(next);
        prev = cur;
        cur = next;
    }
    order
}

pub fn is_independent_set(g: &Graph, x: &[Vertex]) -> Result<bool, GraphError> {
    for &v in x {
        g.check_vertex(v)?;
    }
    let set: BTreeSet<_> = x.iter().copied().collect();
    Ok(set
        .iter()
        .all(|&v| g.neighbors(v).iter().all(|w| !set.contains(w))))
}

/// Vertex ordering minimizing the maximum back-degree, and `col = d + 1`.
///
/// Computed by repeatedly removing a minimum-degree vertex (smallest id on
/// ties); the ordering is the reverse of the removal sequence, so every
/// vertex has at most `d` neighbors earlier in it.
pub fn degeneracy_ordering(g: &Graph) -> (Vec<Vertex>, usize) {
    let n = g.n();
    let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut removal = Vec::with_capacity(n);
    let mut d = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (deg[v], v))
            .unwrap();
        d = d.max(deg[v]);
        removed[v] = true;
        removal.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                deg[w] -= 1;
            }
        }
    }
    removal.reverse();
    (removal, d + 1)
}

/// Vertices of a path component in path order, starting at the endpoint
/// with the smaller id. Returns `None` if `comp` does not induce a path.
pub fn path_order(g: &Graph, comp: &[Vertex]) -> Option<Vec<Vertex>> {
    let members: BTreeSet<_> = comp.iter().copied().collect();
    let inner_deg = |v: Vertex| {
        g.neighbors(v)
            .iter()
            .filter(|w| members.contains(w))
            .count()
    };
    if comp.len() == 1 {
        return Some(comp.to_vec());
    }
    let start = *members.iter().find(|&&v| inner_deg(v) == 1)?;
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(next) = g
        .neighbors(cur)
        .iter()
        .copied()
        .find(|w| members.contains(w) && *w != prev)
    {
        if inner_deg(cur) > 2 || order.len() >= comp.len() {
            return None;
        }
        order.push(next);
        prev = cur;
        cur = next;
    }
    (order.len() == comp.len()).then_some(order)
}
