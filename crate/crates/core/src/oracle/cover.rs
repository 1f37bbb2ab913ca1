use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::graph::{components, Graph, Vertex};

/// Partial matching between two fibers: `map[c] = Some(d)` joins color `c`
/// of the smaller endpoint to color `d` of the larger one.
pub type Matching = Vec<Option<usize>>;

/// An `a`-fold cover of a base graph.
///
/// Fibers are implicit: base vertex `v` owns cover vertices `v*a .. v*a+a`,
/// with color `c` at id `v*a + c`. Cross edges are given per base edge
/// `(u, v)`, `u < v`; a missing edge carries no cross edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    base: Graph,
    a: usize,
    matchings: BTreeMap<(Vertex, Vertex), Matching>,
}

/// How to choose the matchings of a cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverSpec {
    Identity,
    /// Bijections on `0..a` per edge; unlisted edges get the identity.
    PermutationOnEdges {
        perms: BTreeMap<String, Vec<usize>>,
    },
    /// Uniform permutation per edge, drawn from a seeded ChaCha8 stream.
    Random {
        seed: u64,
    },
}

fn parse_edge_key(key: &str) -> Option<(Vertex, Vertex)> {
    let (a, b) = key.split_once('-')?;
    let (a, b): (Vertex, Vertex) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    Some((a.min(b), a.max(b)))
}

pub fn identity_perm(a: usize) -> Vec<usize> {
    (0..a).collect()
}

pub(crate) fn is_permutation(p: &[usize], a: usize) -> bool {
    let mut seen = vec![false; a];
    p.len() == a
        && p.iter()
            .all(|&x| x < a && !std::mem::replace(&mut seen[x], true))
}

impl Cover {
    /// Builds and validates a cover from explicit matchings.
    pub fn new(
        base: &Graph,
        a: usize,
        matchings: BTreeMap<(Vertex, Vertex), Matching>,
    ) -> Result<Self, OracleError> {
        let cover = Cover {
            base: base.clone(),
            a,
            matchings,
        };
        cover.validate()?;
        Ok(cover)
    }

    /// Cover whose matchings are the given permutations (perfect matchings).
    pub fn from_perms(
        base: &Graph,
        a: usize,
        perms: impl IntoIterator<Item = ((Vertex, Vertex), Vec<usize>)>,
    ) -> Result<Self, OracleError> {
        let matchings = perms
            .into_iter()
            .map(|((u, v), p)| {
                let m = p.into_iter().map(Some).collect();
                if u < v {
                    ((u, v), m)
                } else {
                    ((v, u), invert(&m, a))
                }
            })
            .collect();
        Cover::new(base, a, matchings)
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn matchings(&self) -> &BTreeMap<(Vertex, Vertex), Matching> {
        &self.matchings
    }

    /// Checks the cover conditions: fibers partition the vertex set (by
    /// construction), fibers are independent (by construction), cross edges
    /// only over base edges, and each edge's cross edges form a matching.
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.a == 0 || self.a > 64 {
            return Err(OracleError::BadFold(self.a));
        }
        for (&(u, v), m) in &self.matchings {
            if u >= v || !self.base.has_edge(u, v) {
                return Err(OracleError::InvalidCover(format!(
                    "{u}-{v} is not a base edge"
                )));
            }
            if m.len() != self.a {
                return Err(OracleError::InvalidCover(format!(
                    "matching on {u}-{v} has {} entries, expected {}",
                    m.len(),
                    self.a
                )));
            }
            let mut seen = vec![false; self.a];
            for &d in m.iter().flatten() {
                if d >= self.a || std::mem::replace(&mut seen[d], true) {
                    return Err(OracleError::InvalidCover(format!(
                        "cross edges on {u}-{v} are not a matching"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Colors of `v` joined to color `c` of `u` (at most one).
    pub fn partner(&self, u: Vertex, c: usize, v: Vertex) -> Option<usize> {
        if u < v {
            self.matchings.get(&(u, v))?.get(c).copied().flatten()
        } else {
            self.matchings
                .get(&(v, u))?
                .iter()
                .position(|&d| d == Some(c))
        }
    }

    pub fn cross_edge_count(&self) -> usize {
        self.matchings
            .values()
            .map(|m| m.iter().flatten().count())
            .sum()
    }

    /// The cover graph `H` on `n * a` vertices.
    pub fn cover_graph(&self) -> Graph {
        let a = self.a;
        let edges: Vec<_> = self
            .matchings
            .iter()
            .flat_map(|(&(u, v), m)| {
                m.iter()
                    .enumerate()
                    .filter_map(move |(c, d)| d.map(|d| (u * a + c, v * a + d)))
            })
            .collect();
        Graph::from_edges(self.base.n() * a, &edges).expect("cover edges in range")
    }

    /// Same cover with one cross edge removed.
    pub fn without_cross_edge(&self, u: Vertex, v: Vertex, c: usize) -> Cover {
        let mut out = self.clone();
        if let Some(m) = out.matchings.get_mut(&(u.min(v), u.max(v))) {
            m[c] = None;
        }
        out
    }
}

fn invert(m: &Matching, a: usize) -> Matching {
    let mut inv = vec![None; a];
    for (c, d) in m.iter().enumerate() {
        if let Some(d) = d {
            if *d < a {
                inv[*d] = Some(c);
            }
        }
    }
    inv
}

/// Builds a validated cover of `g` from a spec.
pub fn build_cover(g: &Graph, a: usize, spec: &CoverSpec) -> Result<Cover, OracleError> {
    if a == 0 || a > 64 {
        return Err(OracleError::BadFold(a));
    }
    let mut perms: BTreeMap<(Vertex, Vertex), Vec<usize>> =
        g.edges().map(|e| (e, identity_perm(a))).collect();
    match spec {
        CoverSpec::Identity => {}
        CoverSpec::PermutationOnEdges { perms: given } => {
            for (key, p) in given {
                let (u, v) = parse_edge_key(key)
                    .ok_or_else(|| OracleError::InvalidCover(format!("bad edge key `{key}`")))?;
                if !g.has_edge(u, v) {
                    return Err(OracleError::InvalidCover(format!(
                        "{u}-{v} is not a base edge"
                    )));
                }
                if !is_permutation(p, a) {
                    return Err(OracleError::PermutationArity {
                        edge: key.clone(),
                        a,
                    });
                }
                perms.insert((u, v), p.clone());
            }
        }
        CoverSpec::Random { seed } => {
            let mut rng = super::seeded_rng(*seed);
            for p in perms.values_mut() {
                p.shuffle(&mut rng);
            }
        }
    }
    Cover::from_perms(g, a, perms)
}

pub type EdgeList = Vec<(Vertex, Vertex)>;

/// Spanning-forest normal form: tree edges (BFS from the smallest vertex of
/// each component) and the remaining co-tree edges, both sorted.
pub fn spanning_forest(g: &Graph) -> (EdgeList, EdgeList) {
    let mut tree = Vec::new();
    let mut seen = vec![false; g.n()];
    for comp in components(g) {
        let root = comp[0];
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    tree.push((v.min(w), v.max(w)));
                    queue.push_back(w);
                }
            }
        }
    }
    tree.sort_unstable();
    let co_tree = g
        .edges()
        .filter(|e| tree.binary_search(e).is_err())
        .collect();
    (tree, co_tree)
}

/// Cover with identity matchings on the spanning forest and the given
/// permutations on the co-tree edges (in `spanning_forest` order).
pub fn normalized_cover(
    g: &Graph,
    a: usize,
    co_tree: &[(Vertex, Vertex)],
    perms: &[&[usize]],
) -> Cover {
    let all = g.edges().map(|e| {
        let p = co_tree
            .iter()
            .position(|&f| f == e)
            .map_or_else(|| identity_perm(a), |i| perms[i].to_vec());
        (e, p)
    });
    Cover::from_perms(g, a, all).expect("permutations form a valid cover")
}

pub(crate) fn random_perm<R: Rng>(a: usize, rng: &mut R) -> Vec<usize> {
    let mut p = identity_perm(a);
    p.shuffle(rng);
    p
}

/// All permutations of `0..a` in lexicographic order.
pub fn all_permutations(a: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p = identity_perm(a);
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..a).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..a).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Every cover of `g` whose matchings are all perfect (`a!^|E|` of them).
pub fn all_perfect_covers(g: &Graph, a: usize) -> impl Iterator<Item = Cover> + '_ {
    let perms = all_permutations(a);
    let edges: Vec<_> = g.edges().collect();
    let total = (perms.len() as u64).pow(edges.len() as u32);
    (0..total).map(move |mut idx| {
        let chosen = edges.iter().map(|&e| {
            let p = perms[(idx % perms.len() as u64) as usize].clone();
            idx /= perms.len() as u64;
            (e, p)
        });
        Cover::from_perms(g, a, chosen.collect::<Vec<_>>()).expect("valid")
    })
}

#[derive(Serialize, Deserialize)]
struct MatchingJson {
    edge: [Vertex; 2],
    perm: Matching,
}

#[derive(Serialize, Deserialize)]
struct CoverJson {
    a: usize,
    #[serde(default)]
    fibers: Option<String>,
    matchings: Vec<MatchingJson>,
}

impl Serialize for Cover {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        CoverJson {
            a: self.a,
            fibers: Some("implicit a-block layout".into()),
            matchings: self
                .matchings
                .iter()
                .map(|(&(u, v), m)| MatchingJson {
                    edge: [u, v],
                    perm: m.clone(),
                })
                .collect(),
        }
        .serialize(ser)
    }
}

/// Reads a cover of `g` from its JSON form.
pub fn cover_from_json(g: &Graph, value: &serde_json::Value) -> Result<Cover, OracleError> {
    let doc: CoverJson = serde_json::from_value(value.clone())
        .map_err(|e| OracleError::InvalidCover(e.to_string()))?;
    let mut matchings = BTreeMap::new();
    for m in doc.matchings {
        let [u, v] = m.edge;
        let key = (u.min(v), u.max(v));
        let perm = if u < v {
            m.perm
        } else {
            invert(&m.perm, doc.a)
        };
        if matchings.insert(key, perm).is_some() {
            return Err(OracleError::InvalidCover(format!(
                "edge {u}-{v} listed twice"
            )));
        }
    }
    Cover::new(g, doc.a, matchings)
}
