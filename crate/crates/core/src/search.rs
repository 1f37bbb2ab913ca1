//! Exact decision of (S,T)-degeneracy by depth-first search over states,
//! plus uniform-shield and ratio drivers built on top of it.
//!
//! Besides memoizing refuted states the search uses three exact reductions:
//!
//! * a vertex `z` with `S(z) >= sum of T over its alive neighbors` can be
//!   deleted and shaded last;
//! * disconnected alive graphs split into independent subproblems;
//! * two adjacent alive vertices that both have shield 0 can never be shaded
//!   again (shading either one needs a strictly larger target than the
//!   other, and neither can be removed first), so the state is dead.
//!
//! Refuted states also refute every state with pointwise smaller shields
//! and larger targets on the same alive set (dominance pruning).

use std::collections::HashMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{apply_unchecked, is_legal, Certificate, Legality, Mode, Op, State};
use crate::graph::{degeneracy_ordering, Graph, Vertex};

/// Largest graph the search accepts; alive sets are stored as `u64` masks.
pub const MAX_SEARCH_VERTICES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BranchOrder {
    /// Larger `S(u) + T(u)` first, ties by id.
    #[default]
    MaxBudgetFirst,
    IdOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: Mode,
    /// Maximum number of distinct states expanded; at least 1.
    pub max_states: u64,
    pub dominance_pruning: bool,
    pub branch_order: BranchOrder,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Type4,
            max_states: 10_000_000,
            dominance_pruning: true,
            branch_order: BranchOrder::MaxBudgetFirst,
        }
    }
}

impl SearchConfig {
    pub fn with_mode(mode: Mode) -> Self {
        SearchConfig {
            mode,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search supports at most {MAX_SEARCH_VERTICES} vertices, got {0}")]
    TooLarge(usize),
    #[error("shield/target must have one entry per vertex ({expected}), got {got}")]
    Length { expected: usize, got: usize },
    #[error("target of vertex {0} must be at least 1")]
    ZeroTarget(Vertex),
    #[error("max_states must be at least 1")]
    ZeroBudget,
    #[error("t must be at least 1")]
    ZeroT,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Yes(Certificate),
    No,
    BudgetExhausted,
}

impl Answer {
    pub fn label(&self) -> &'static str {
        match self {
            Answer::Yes(_) => "yes",
            Answer::No => "no",
            Answer::BudgetExhausted => "budget_exhausted",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Answer::Yes(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub answer: Answer,
    pub states_expanded: u64,
}

impl Serialize for SearchOutcome {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            answer: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            certificate: Option<&'a Certificate>,
            states_expanded: u64,
        }
        Wire {
            answer: self.answer.label(),
            certificate: match &self.answer {
                Answer::Yes(c) => Some(c),
                _ => None,
            },
            states_expanded: self.states_expanded,
        }
        .serialize(ser)
    }
}

struct Exhausted;

type Found = Result<Option<Vec<Op>>, Exhausted>;

struct Searcher<'g> {
    g: &'g Graph,
    cfg: SearchConfig,
    refuted: HashMap<State, ()>,
    by_mask: HashMap<u64, Vec<State>>,
    expanded: u64,
}

/// Refuted states kept per alive set for dominance checks; bounds the scan.
const DOMINANCE_BUCKET: usize = 2048;

fn alive_mask(st: &State) -> u64 {
    st.alive().fold(0u64, |m, v| m | (1 << v))
}

impl<'g> Searcher<'g> {
    fn new(g: &'g Graph, cfg: SearchConfig) -> Self {
        Searcher {
            g,
            cfg,
            refuted: HashMap::new(),
            by_mask: HashMap::new(),
            expanded: 0,
        }
    }

    /// Applies the vertex-deletion and component reductions, then searches.
    fn solve(&mut self, st: &State) -> Found {
        let mut cur = st.clone();
        let mut deleted = Vec::new();
        loop {
            let z = cur.alive().find(|&z| {
                let load: u64 = self
                    .g
                    .neighbors(z)
                    .iter()
                    .map(|&v| cur.target(v) as u64)
                    .sum();
                cur.shield(z) as u64 >= load
            });
            match z {
                Some(z) => {
                    deleted.push((z, cur.target(z)));
                    cur = without(&cur, z);
                }
                None => break,
            }
        }
        let mut ops = Vec::new();
        for comp in alive_components(self.g, &cur) {
            let sub = restrict(&cur, &comp);
            match self.solve_connected(&sub)? {
                Some(mut part) => ops.append(&mut part),
                None => return Ok(None),
            }
        }
        for &(z, t) in deleted.iter().rev() {
            ops.extend(std::iter::repeat_n(Op::shade(z), t as usize));
        }
        Ok(Some(ops))
    }

    fn solve_connected(&mut self, st: &State) -> Found {
        if self.refuted.contains_key(st) {
            return Ok(None);
        }
        if self.is_dead(st) {
            return Ok(None);
        }
        let mask = alive_mask(st);
        if self.cfg.dominance_pruning && self.dominated(mask, st) {
            return Ok(None);
        }
        if self.expanded >= self.cfg.max_states {
            return Err(Exhausted);
        }
        self.expanded += 1;

        for op in self.branches(st) {
            let next = apply_unchecked(self.g, st, &op);
            if let Some(mut rest) = self.solve(&next)? {
                rest.insert(0, op);
                return Ok(Some(rest));
            }
        }
        self.refuted.insert(st.clone(), ());
        if self.cfg.dominance_pruning {
            let bucket = self.by_mask.entry(mask).or_default();
            if bucket.len() < DOMINANCE_BUCKET {
                bucket.push(st.clone());
            }
        }
        Ok(None)
    }

    fn is_dead(&self, st: &State) -> bool {
        st.alive().any(|u| {
            st.shield(u) == 0
                && self
                    .g
                    .neighbors(u)
                    .iter()
                    .any(|&v| v > u && st.is_alive(v) && st.shield(v) == 0)
        })
    }

    /// Some refuted state on the same alive set has shields `>=` and
    /// targets `<=` pointwise; monotonicity then refutes `st`.
    fn dominated(&self, mask: u64, st: &State) -> bool {
        let Some(bucket) = self.by_mask.get(&mask) else {
            return false;
        };
        bucket.iter().any(|r| {
            st.alive()
                .all(|v| r.shield(v) >= st.shield(v) && r.target(v) <= st.target(v))
        })
    }

    fn branches(&self, st: &State) -> Vec<Op> {
        let mut us: Vec<Vertex> = st.alive().collect();
        if self.cfg.branch_order == BranchOrder::MaxBudgetFirst {
            us.sort_by_key(|&u| (std::cmp::Reverse(st.shield(u) + st.target(u)), u));
        }
        let mut out = Vec::new();
        for u in us {
            let nbrs: Vec<Vertex> = self
                .g
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&w| st.is_alive(w))
                .collect();
            for save in save_sets(&nbrs, self.cfg.mode) {
                let op = Op { u, save };
                if matches!(is_legal(self.g, st, &op), Ok(Legality::Legal)) {
                    out.push(op);
                }
            }
        }
        out
    }
}

/// Candidate save sets in increasing size, lexicographic within a size.
fn save_sets(nbrs: &[Vertex], mode: Mode) -> Vec<Vec<Vertex>> {
    let mut out = vec![Vec::new()];
    out.extend(nbrs.iter().map(|&w| vec![w]));
    if mode == Mode::Type3 && nbrs.len() >= 2 {
        let mut subsets: Vec<Vec<Vertex>> = (1u64..1 << nbrs.len())
            .filter(|m| m.count_ones() >= 2)
            .map(|m| {
                (0..nbrs.len())
                    .filter(|&i| m >> i & 1 == 1)
                    .map(|i| nbrs[i])
                    .collect()
            })
            .collect();
        subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out.extend(subsets);
    }
    out
}

fn without(st: &State, z: Vertex) -> State {
    let alive: Vec<Vertex> = st.alive().filter(|&v| v != z).collect();
    State::on_subset(st.n(), &alive, st.shields(), st.targets())
}

fn restrict(st: &State, keep: &[Vertex]) -> State {
    State::on_subset(st.n(), keep, st.shields(), st.targets())
}

/// Components of the subgraph induced by the alive vertices.
fn alive_components(g: &Graph, st: &State) -> Vec<Vec<Vertex>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in st.alive() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &w in g.neighbors(v) {
                if st.is_alive(w) && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn check_inputs(
    g: &Graph,
    shield: &[u32],
    target: &[u32],
    cfg: &SearchConfig,
) -> Result<(), SearchError> {
    if g.n() > MAX_SEARCH_VERTICES {
        return Err(SearchError::TooLarge(g.n()));
    }
    for len in [shield.len(), target.len()] {
        if len != g.n() {
            return Err(SearchError::Length {
                expected: g.n(),
                got: len,
            });
        }
    }
    if let Some(v) = target.iter().position(|&t| t == 0) {
        return Err(SearchError::ZeroTarget(v));
    }
    if cfg.max_states == 0 {
        return Err(SearchError::ZeroBudget);
    }
    Ok(())
}

/// Decides whether `g` is `(shield, target)`-degenerate in `cfg.mode`.
///
/// A `yes` always carries a certificate that replays to completion. The
/// search is single-threaded and fully deterministic for a fixed config.
pub fn decide_degenerate(
    g: &Graph,
    shield: &[u32],
    target: &[u32],
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    check_inputs(g, shield, target, cfg)?;
    let st = State::new(shield.to_vec(), target.to_vec()).expect("inputs checked");
    let mut s = Searcher::new(g, *cfg);
    let answer = match s.solve(&st) {
        Ok(Some(ops)) => Answer::Yes(Certificate::new(
            cfg.mode,
            shield.to_vec(),
            target.to_vec(),
            ops,
        )),
        Ok(None) => Answer::No,
        Err(Exhausted) => Answer::BudgetExhausted,
    };
    Ok(SearchOutcome {
        answer,
        states_expanded: s.expanded,
    })
}

pub fn decide_uniform(
    g: &Graph,
    s: u32,
    t: u32,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    decide_degenerate(g, &vec![s; g.n()], &vec![t; g.n()], cfg)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinShield {
    Found {
        s_min: u32,
        certificate: Certificate,
        states_expanded: u64,
    },
    /// The scan could not decide `s`; smaller values were refuted.
    BudgetExhausted { at_s: u32, states_expanded: u64 },
}

impl MinShield {
    pub fn s_min(&self) -> Option<u32> {
        match self {
            MinShield::Found { s_min, .. } => Some(*s_min),
            MinShield::BudgetExhausted { .. } => None,
        }
    }
}

/// Smallest uniform shield `s` with `g` `(s, t)`-degenerate, by linear scan
/// from 0. The scan stops at `(col(g) - 1) * t`, where the shade-only
/// certificate along a degeneracy ordering always works.
pub fn min_uniform_shield(g: &Graph, t: u32, cfg: &SearchConfig) -> Result<MinShield, SearchError> {
    if t == 0 {
        return Err(SearchError::ZeroT);
    }
    let (order, col) = degeneracy_ordering(g);
    let ceiling = (col as u32 - 1) * t;
    let mut total = 0;
    for s in 0..ceiling {
        let out = decide_uniform(g, s, t, cfg)?;
        total += out.states_expanded;
        match out.answer {
            Answer::Yes(certificate) => {
                return Ok(MinShield::Found {
                    s_min: s,
                    certificate,
                    states_expanded: total,
                })
            }
            Answer::No => {}
            Answer::BudgetExhausted => {
                return Ok(MinShield::BudgetExhausted {
                    at_s: s,
                    states_expanded: total,
                })
            }
        }
    }
    let mut certificate = greedy_certificate(g, &order, &vec![ceiling; g.n()], &vec![t; g.n()])
        .expect("degeneracy ordering satisfies the back-degree bound");
    certificate.mode = cfg.mode;
    Ok(MinShield::Found {
        s_min: ceiling,
        certificate,
        states_expanded: total,
    })
}

/// `num/den` on the wire, with a decimal rendering for humans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rational(pub Ratio<u64>);

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn num(&self) -> u64 {
        *self.0.numer()
    }

    pub fn den(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = ser.serialize_struct("Rational", 3)?;
        s.serialize_field("num", &self.num())?;
        s.serialize_field("den", &self.den())?;
        s.serialize_field("decimal", &self.to_f64())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioRow {
    pub t: u32,
    /// `None` when the scan ran out of budget for this `t`.
    pub s_min: Option<u32>,
    pub ratio: Option<Rational>,
    pub states_expanded: u64,
}

/// Per-`t` minimal uniform shields. `best_ratio` is only an upper estimate
/// of the infimum of `(s + t) / t`, which need not be attained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioTable {
    pub mode: Mode,
    pub rows: Vec<RatioRow>,
    pub best_ratio: Option<Rational>,
}

pub fn ratio_scan(g: &Graph, t_max: u32, cfg: &SearchConfig) -> Result<RatioTable, SearchError> {
    if t_max == 0 {
        return Err(SearchError::ZeroT);
    }
    // rows are independent; the collected order is by t regardless of threads
    let rows = (1..=t_max)
        .into_par_iter()
        .map(|t| -> Result<RatioRow, SearchError> {
            Ok(match min_uniform_shield(g, t, cfg)? {
                MinShield::Found {
                    s_min,
                    states_expanded,
                    ..
                } => RatioRow {
                    t,
                    s_min: Some(s_min),
                    ratio: Some(Rational::new((s_min + t) as u64, t as u64)),
                    states_expanded,
                },
                MinShield::BudgetExhausted {
                    states_expanded, ..
                } => RatioRow {
                    t,
                    s_min: None,
                    ratio: None,
                    states_expanded,
                },
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let best_ratio = rows.iter().filter_map(|r| r.ratio).min();
    Ok(RatioTable {
        mode: cfg.mode,
        rows,
        best_ratio,
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreedyError {
    #[error("order must list every vertex exactly once")]
    BadOrder,
    #[error("shield/target must have one entry per vertex")]
    Length,
    #[error("vertex {vertex}: shield {shield} below back-neighbor target sum {needed}")]
    Violated {
        vertex: Vertex,
        shield: u32,
        needed: u64,
    },
}

/// Shade-only certificate: `T(v)` shades of each vertex in `order`. Valid
/// whenever each vertex's shield covers the targets of its earlier neighbors.
pub fn greedy_certificate(
    g: &Graph,
    order: &[Vertex],
    shield: &[u32],
    target: &[u32],
) -> Result<Certificate, GreedyError> {
    let n = g.n();
    if shield.len() != n || target.len() != n {
        return Err(GreedyError::Length);
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(GreedyError::BadOrder);
        }
        pos[v] = i;
    }
    if order.len() != n {
        return Err(GreedyError::BadOrder);
    }
    let mut ops = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let needed: u64 = g
            .neighbors(v)
            .iter()
            .filter(|&&w| pos[w] < i)
            .map(|&w| target[w] as u64)
            .sum();
        if (shield[v] as u64) < needed {
            return Err(GreedyError::Violated {
                vertex: v,
                shield: shield[v],
                needed,
            });
        }
        ops.extend(std::iter::repeat_n(Op::shade(v), target[v] as usize));
    }
    Ok(Certificate::new(
        Mode::Type4,
        shield.to_vec(),
        target.to_vec(),
        ops,
    ))
}
