use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// Whether save sets may contain several vertices (`Type3`) or at most one
/// (`Type4`, the restricted regime).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "type3")]
    Type3,
    #[serde(rename = "type4")]
    Type4,
}

impl Mode {
    pub fn max_save(self) -> usize {
        match self {
            Mode::Type3 => usize::MAX,
            Mode::Type4 => 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Type3 => "type3",
            Mode::Type4 => "type4",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "3" | "type3" => Ok(Mode::Type3),
            "4" | "type4" => Ok(Mode::Type4),
            _ => Err(format!("unknown mode `{s}` (expected 3 or 4)")),
        }
    }
}

/// One ShadeSave application: shade `u`, sparing the vertices in `save`.
/// An empty save set is a plain Shade.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Op {
    pub u: Vertex,
    #[serde(default)]
    pub save: Vec<Vertex>,
}

impl Op {
    pub fn shade(u: Vertex) -> Self {
        Op {
            u,
            save: Vec::new(),
        }
    }

    pub fn save(u: Vertex, w: Vertex) -> Self {
        Op { u, save: vec![w] }
    }

    pub fn with_saves(u: Vertex, save: &[Vertex]) -> Self {
        Op {
            u,
            save: save.to_vec(),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.save.is_empty() {
            write!(f, "Shade({})", self.u)
        } else {
            write!(f, "ShadeSave({}, {:?})", self.u, self.save)
        }
    }
}

/// Shield and target of every vertex of a fixed host graph.
///
/// A vertex is alive exactly when its target is positive; removed vertices
/// carry shield 0 and target 0. Two states over the same graph are equal iff
/// they agree on the alive set and on shields and targets of alive vertices,
/// which makes the derived `Eq`/`Hash` the canonical memo key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    shield: Vec<u32>,
    target: Vec<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("target of vertex {0} must be at least 1")]
    ZeroTarget(Vertex),
}

impl State {
    /// All vertices alive with the given shield and target.
    pub fn new(shield: Vec<u32>, target: Vec<u32>) -> Result<Self, StateError> {
        if shield.len() != target.len() {
            return Err(StateError::Length {
                expected: target.len(),
                got: shield.len(),
            });
        }
        if let Some(v) = target.iter().position(|&t| t == 0) {
            return Err(StateError::ZeroTarget(v));
        }
        Ok(State { shield, target })
    }

    pub fn for_graph(g: &Graph, shield: Vec<u32>, target: Vec<u32>) -> Result<Self, StateError> {
        if target.len() != g.n() {
            return Err(StateError::Length {
                expected: g.n(),
                got: target.len(),
            });
        }
        State::new(shield, target)
    }

    pub fn uniform(n: usize, s: u32, t: u32) -> Result<Self, StateError> {
        State::new(vec![s; n], vec![t; n])
    }

    /// State whose alive set is `alive`; other vertices start removed.
    pub fn on_subset(n: usize, alive: &[Vertex], shield: &[u32], target: &[u32]) -> Self {
        let mut st = State {
            shield: vec![0; n],
            target: vec![0; n],
        };
        for &v in alive {
            st.shield[v] = shield[v];
            st.target[v] = target[v].max(1);
        }
        st
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn is_alive(&self, v: Vertex) -> bool {
        self.target.get(v).is_some_and(|&t| t > 0)
    }

    pub fn alive(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n()).filter(|&v| self.target[v] > 0)
    }

    pub fn alive_count(&self) -> usize {
        self.target.iter().filter(|&&t| t > 0).count()
    }

    pub fn is_finished(&self) -> bool {
        self.target.iter().all(|&t| t == 0)
    }

    pub fn shield(&self, v: Vertex) -> u32 {
        self.shield[v]
    }

    pub fn target(&self, v: Vertex) -> u32 {
        self.target[v]
    }

    pub fn shields(&self) -> &[u32] {
        &self.shield
    }

    pub fn targets(&self) -> &[u32] {
        &self.target
    }

    /// `(shield, target)` of an alive vertex, `None` once removed.
    pub fn pair(&self, v: Vertex) -> Option<(u32, u32)> {
        self.is_alive(v).then(|| (self.shield[v], self.target[v]))
    }

    pub fn total_target(&self) -> u64 {
        self.target.iter().map(|&t| t as u64).sum()
    }
}

/// Why a well-formed operation is not legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum IllegalReason {
    /// `S(u) + T(u)` does not strictly exceed the save set's total.
    #[error("budget {budget} does not exceed saved total {saved}")]
    Budget { budget: u64, saved: u64 },
    /// Shading would push an unsaved neighbor's shield below zero.
    #[error("shield of vertex {vertex} would become negative")]
    NegativeShield { vertex: Vertex },
    /// More than one saved vertex in the restricted regime.
    #[error("save set of size {size} in restricted mode")]
    SaveSetTooLarge { size: usize },
}

/// Structural problems: the op does not even describe a ShadeSave on the
/// current graph. These are distinct from illegality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum OpError {
    #[error("vertex {vertex} out of range")]
    OutOfRange { vertex: Vertex },
    #[error("vertex {vertex} is not alive")]
    NotAlive { vertex: Vertex },
    #[error("saved vertex {vertex} is not an alive neighbor of {u}")]
    NotNeighbor { u: Vertex, vertex: Vertex },
    #[error("saved vertex {vertex} listed twice")]
    DuplicateSave { vertex: Vertex },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Legality {
    Legal,
    Illegal(IllegalReason),
}

impl Legality {
    pub fn is_legal(self) -> bool {
        matches!(self, Legality::Legal)
    }
}

fn check_structure(g: &Graph, st: &State, op: &Op) -> Result<(), OpError> {
    let n = st.n();
    if op.u >= n || op.u >= g.n() {
        return Err(OpError::OutOfRange { vertex: op.u });
    }
    if !st.is_alive(op.u) {
        return Err(OpError::NotAlive { vertex: op.u });
    }
    for (i, &w) in op.save.iter().enumerate() {
        if w >= n {
            return Err(OpError::OutOfRange { vertex: w });
        }
        if op.save[..i].contains(&w) {
            return Err(OpError::DuplicateSave { vertex: w });
        }
        if !st.is_alive(w) || !g.has_edge(op.u, w) {
            return Err(OpError::NotNeighbor { u: op.u, vertex: w });
        }
    }
    Ok(())
}

/// Decides legality of `op` in `st`.
///
/// Structural errors (dead `u`, saving a non-neighbor, duplicates) are
/// returned as `Err`; the budget inequality and shield nonnegativity are
/// legality verdicts. The size limit of `mode` is not checked here; see
/// [`is_legal_in_mode`].
pub fn is_legal(g: &Graph, st: &State, op: &Op) -> Result<Legality, OpError> {
    check_structure(g, st, op)?;
    let budget = st.shield[op.u] as u64 + st.target[op.u] as u64;
    let saved: u64 = op
        .save
        .iter()
        .map(|&w| st.shield[w] as u64 + st.target[w] as u64)
        .sum();
    if budget <= saved {
        return Ok(Legality::Illegal(IllegalReason::Budget { budget, saved }));
    }
    // neighbors stay alive after the op, so all unsaved ones need shield >= 1
    for &v in g.neighbors(op.u) {
        if st.is_alive(v) && st.shield[v] == 0 && !op.save.contains(&v) {
            return Ok(Legality::Illegal(IllegalReason::NegativeShield {
                vertex: v,
            }));
        }
    }
    Ok(Legality::Legal)
}

pub fn is_legal_in_mode(g: &Graph, st: &State, op: &Op, mode: Mode) -> Result<Legality, OpError> {
    let verdict = is_legal(g, st, op)?;
    if verdict.is_legal() && op.save.len() > mode.max_save() {
        return Ok(Legality::Illegal(IllegalReason::SaveSetTooLarge {
            size: op.save.len(),
        }));
    }
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error(transparent)]
    Malformed(#[from] OpError),
    #[error("illegal operation: {0}")]
    Illegal(IllegalReason),
}

/// Applies a legal ShadeSave and returns the successor state.
pub fn apply_shadesave(g: &Graph, st: &State, op: &Op) -> Result<State, ApplyError> {
    match is_legal(g, st, op)? {
        Legality::Legal => Ok(apply_unchecked(g, st, op)),
        Legality::Illegal(reason) => Err(ApplyError::Illegal(reason)),
    }
}

/// Applies `op` without checking legality. Caller guarantees it is legal.
pub(crate) fn apply_unchecked(g: &Graph, st: &State, op: &Op) -> State {
    let mut next = st.clone();
    apply_in_place(g, &mut next, op);
    next
}

pub(crate) fn apply_in_place(g: &Graph, st: &mut State, op: &Op) {
    for &v in g.neighbors(op.u) {
        if st.target[v] > 0 && !op.save.contains(&v) {
            st.shield[v] -= 1;
        }
    }
    st.target[op.u] -= 1;
    if st.target[op.u] == 0 {
        st.shield[op.u] = 0;
    }
}
