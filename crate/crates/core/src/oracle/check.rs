use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{all_permutations, normalized_cover, random_perm, spanning_forest, Cover};
use super::{seeded_rng, OracleError};
use crate::engine::Mode;
use crate::graph::{Graph, Vertex};
use crate::search::{decide_uniform, Answer, SearchConfig};

/// `b` colors per base vertex forming an independent set of the cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transversal {
    pub chosen: Vec<Vec<usize>>,
}

impl Transversal {
    /// Checks sizes, ranges and independence directly against the cover.
    pub fn validate(&self, cover: &Cover, b: usize) -> bool {
        let g = cover.base();
        if self.chosen.len() != g.n() {
            return false;
        }
        let sized = self.chosen.iter().all(|cs| {
            let mut s = cs.clone();
            s.sort_unstable();
            s.dedup();
            s.len() == b && s.iter().all(|&c| c < cover.a())
        });
        sized
            && g.edges().all(|(u, v)| {
                self.chosen[u].iter().all(|&c| {
                    cover
                        .partner(u, c, v)
                        .is_none_or(|d| !self.chosen[v].contains(&d))
                })
            })
    }
}

struct Solver<'c> {
    n: usize,
    full: u64,
    b: u32,
    /// For each vertex: neighbors with the map from their colors to ours.
    incoming: Vec<Vec<(Vertex, Vec<Option<usize>>)>>,
    chosen: Vec<Option<u64>>,
    _cover: &'c Cover,
}

impl<'c> Solver<'c> {
    fn new(cover: &'c Cover, b: usize) -> Self {
        let g = cover.base();
        let a = cover.a();
        let incoming = g
            .vertices()
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .map(|&u| (u, (0..a).map(|c| cover.partner(u, c, v)).collect()))
                    .collect()
            })
            .collect();
        Solver {
            n: g.n(),
            full: if a == 64 { u64::MAX } else { (1u64 << a) - 1 },
            b: b as u32,
            incoming,
            chosen: vec![None; g.n()],
            _cover: cover,
        }
    }

    fn available(&self, v: Vertex) -> u64 {
        let mut blocked = 0u64;
        for (u, map) in &self.incoming[v] {
            if let Some(mut set) = self.chosen[*u] {
                while set != 0 {
                    let c = set.trailing_zeros() as usize;
                    set &= set - 1;
                    if let Some(d) = map[c] {
                        blocked |= 1 << d;
                    }
                }
            }
        }
        self.full & !blocked
    }

    fn solve(&mut self) -> bool {
        // most constrained unassigned vertex first
        let mut best: Option<(Vertex, u64)> = None;
        for v in 0..self.n {
            if self.chosen[v].is_none() {
                let avail = self.available(v);
                if best.is_none_or(|(_, m)| avail.count_ones() < m.count_ones()) {
                    best = Some((v, avail));
                }
            }
        }
        let Some((v, avail)) = best else {
            return true;
        };
        if avail.count_ones() < self.b {
            return false;
        }
        let bits: Vec<u32> = (0..64).filter(|&i| avail >> i & 1 == 1).collect();
        self.choose(v, &bits, 0, 0, self.b)
    }

    fn choose(&mut self, v: Vertex, bits: &[u32], from: usize, set: u64, left: u32) -> bool {
        if left == 0 {
            self.chosen[v] = Some(set);
            if self.solve() {
                return true;
            }
            self.chosen[v] = None;
            return false;
        }
        for i in from..=bits.len() - left as usize {
            if self.choose(v, bits, i + 1, set | 1 << bits[i], left - 1) {
                return true;
            }
        }
        false
    }
}

/// Exhaustive search for an independent `b`-fold transversal.
pub fn find_transversal(cover: &Cover, b: usize) -> Option<Transversal> {
    if b > cover.a() {
        return None;
    }
    if b == 0 {
        return Some(Transversal {
            chosen: vec![Vec::new(); cover.base().n()],
        });
    }
    let mut s = Solver::new(cover, b);
    if !s.solve() {
        return None;
    }
    let chosen = s
        .chosen
        .iter()
        .map(|m| {
            let m = m.expect("all assigned");
            (0..64).filter(|&c| m >> c & 1 == 1).collect()
        })
        .collect();
    let t = Transversal { chosen };
    debug_assert!(t.validate(cover, b));
    Some(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DpStrategy {
    /// Every cover in spanning-forest normal form; can prove `holds`.
    ExhaustiveNormalized,
    /// `count` random normal-form covers from `seed`; never proves `holds`.
    Sampled { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DpVerdict {
    Holds,
    Refuted(Cover),
    Inconclusive { reason: String },
}

impl DpVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            DpVerdict::Holds => "holds",
            DpVerdict::Refuted(_) => "refuted",
            DpVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpCheck {
    pub verdict: DpVerdict,
    pub covers_checked: u64,
    /// Size of the normal-form family (exhaustive only).
    pub family_size: Option<u64>,
}

impl Serialize for DpCheck {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            verdict: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            witness: Option<&'a Cover>,
            #[serde(skip_serializing_if = "Option::is_none")]
            reason: Option<&'a str>,
            covers_checked: u64,
            #[serde(skip_serializing_if = "Option::is_none")]
            family_size: Option<u64>,
        }
        Wire {
            verdict: self.verdict.label(),
            witness: match &self.verdict {
                DpVerdict::Refuted(c) => Some(c),
                _ => None,
            },
            reason: match &self.verdict {
                DpVerdict::Inconclusive { reason } => Some(reason),
                _ => None,
            },
            covers_checked: self.covers_checked,
            family_size: self.family_size,
        }
        .serialize(ser)
    }
}

/// Number of normal-form covers, `a!^(|E| - |V| + c)`, if it fits in `u64`.
pub fn normalized_family_size(g: &Graph, a: usize) -> Option<u64> {
    let (_, co_tree) = spanning_forest(g);
    let fact = (1..=a as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))?;
    (0..co_tree.len()).try_fold(1u64, |acc, _| acc.checked_mul(fact))
}

/// Decides `(a, b)`-DP-colorability over normal-form covers.
///
/// Fixing identity matchings on a spanning forest loses nothing (relabel
/// each fiber along the forest), and only perfect matchings need checking
/// since deleting cross edges never destroys a transversal.
pub fn check_dp_colorable(
    g: &Graph,
    a: usize,
    b: usize,
    strategy: DpStrategy,
    max_covers: u64,
) -> Result<DpCheck, OracleError> {
    if a == 0 || a > 64 {
        return Err(OracleError::BadFold(a));
    }
    if b == 0 || b > a {
        return Err(OracleError::BadTransversalSize { a, b });
    }
    let (_, co_tree) = spanning_forest(g);
    let refutes = |perms: &[&[usize]]| {
        let cover = normalized_cover(g, a, &co_tree, perms);
        find_transversal(&cover, b).is_none()
    };
    match strategy {
        DpStrategy::ExhaustiveNormalized => {
            let Some(size) = normalized_family_size(g, a).filter(|&s| s <= max_covers) else {
                return Ok(DpCheck {
                    verdict: DpVerdict::Inconclusive {
                        reason: format!(
                            "normal-form family of {a}!^{} covers exceeds the budget of {max_covers}",
                            co_tree.len()
                        ),
                    },
                    covers_checked: 0,
                    family_size: normalized_family_size(g, a),
                });
            };
            let perms = all_permutations(a);
            let decode = |mut idx: u64| -> Vec<&[usize]> {
                (0..co_tree.len())
                    .map(|_| {
                        let p = &perms[(idx % perms.len() as u64) as usize];
                        idx /= perms.len() as u64;
                        p.as_slice()
                    })
                    .collect()
            };
            let hit = (0..size)
                .into_par_iter()
                .find_first(|&idx| refutes(&decode(idx)));
            Ok(match hit {
                Some(idx) => DpCheck {
                    verdict: DpVerdict::Refuted(normalized_cover(g, a, &co_tree, &decode(idx))),
                    covers_checked: idx + 1,
                    family_size: Some(size),
                },
                None => DpCheck {
                    verdict: DpVerdict::Holds,
                    covers_checked: size,
                    family_size: Some(size),
                },
            })
        }
        DpStrategy::Sampled { count, seed } => {
            let count = count.min(max_covers);
            let mut rng = seeded_rng(seed);
            let samples: Vec<Vec<Vec<usize>>> = (0..count)
                .map(|_| co_tree.iter().map(|_| random_perm(a, &mut rng)).collect())
                .collect();
            fn as_refs(s: &[Vec<usize>]) -> Vec<&[usize]> {
                s.iter().map(Vec::as_slice).collect()
            }
            let hit = samples.par_iter().position_first(|s| refutes(&as_refs(s)));
            Ok(match hit {
                Some(i) => DpCheck {
                    verdict: DpVerdict::Refuted(normalized_cover(
                        g,
                        a,
                        &co_tree,
                        &as_refs(&samples[i]),
                    )),
                    covers_checked: i as u64 + 1,
                    family_size: None,
                },
                None => DpCheck {
                    verdict: DpVerdict::Inconclusive {
                        reason: format!("no refutation among {count} sampled covers"),
                    },
                    covers_checked: count,
                    family_size: None,
                },
            })
        }
    }
}

/// Cross-check: a type-3 yes at `(s, t)` must come with `(s + t, t)`-DP-
/// colorability. A refutation here means a bug in one of the two engines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StdpReport {
    pub s: u32,
    pub t: u32,
    pub degenerate: &'static str,
    pub states_expanded: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp: Option<DpCheck>,
    pub counterexample: bool,
}

pub fn check_stdp_implication(
    g: &Graph,
    s: u32,
    t: u32,
    strategy: DpStrategy,
    max_covers: u64,
    search: &SearchConfig,
) -> Result<StdpReport, OracleError> {
    let cfg = SearchConfig {
        mode: Mode::Type3,
        ..*search
    };
    let out = decide_uniform(g, s, t, &cfg).map_err(|e| OracleError::Search(e.to_string()))?;
    let dp = match out.answer {
        Answer::Yes(_) => Some(check_dp_colorable(
            g,
            (s + t) as usize,
            t as usize,
            strategy,
            max_covers,
        )?),
        _ => None,
    };
    let counterexample = matches!(
        &dp,
        Some(DpCheck {
            verdict: DpVerdict::Refuted(_),
            ..
        })
    );
    Ok(StdpReport {
        s,
        t,
        degenerate: out.answer.label(),
        states_expanded: out.states_expanded,
        dp,
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphFamily;
    use crate::oracle::{build_cover, CoverSpec};

    fn cycle(k: usize) -> Graph {
        GraphFamily::Cycle { k }.build().unwrap()
    }

    fn twisted_c4() -> Cover {
        let spec = CoverSpec::PermutationOnEdges {
            perms: [("0-3".to_string(), vec![1, 0])].into(),
        };
        build_cover(&cycle(4), 2, &spec).unwrap()
    }

    #[test]
    fn bipartite_identity_has_transversal() {
        for g in [
            cycle(6),
            GraphFamily::CompleteBipartite { m: 2, n: 3 }
                .build()
                .unwrap(),
        ] {
            let c = build_cover(&g, 2, &CoverSpec::Identity).unwrap();
            let t = find_transversal(&c, 1).unwrap();
            assert!(t.validate(&c, 1));
        }
    }

    #[test]
    fn twisted_c4_has_none() {
        assert!(find_transversal(&twisted_c4(), 1).is_none());
    }

    #[test]
    fn c5_random_covers_have_two_fold_transversals() {
        for seed in 0..20 {
            let c = build_cover(&cycle(5), 5, &CoverSpec::Random { seed }).unwrap();
            let t = find_transversal(&c, 2).unwrap();
            assert!(t.validate(&c, 2));
        }
    }

    #[test]
    fn family_checks() {
        let r = check_dp_colorable(&cycle(4), 2, 1, DpStrategy::ExhaustiveNormalized, u64::MAX)
            .unwrap();
        assert_eq!(r.family_size, Some(2));
        let DpVerdict::Refuted(w) = &r.verdict else {
            panic!()
        };
        assert!(find_transversal(w, 1).is_none());

        let r = check_dp_colorable(&cycle(4), 4, 2, DpStrategy::ExhaustiveNormalized, u64::MAX)
            .unwrap();
        assert_eq!(r.family_size, Some(24));
        let DpVerdict::Refuted(w) = &r.verdict else {
            panic!()
        };
        assert!(find_transversal(w, 2).is_none());

        let r = check_dp_colorable(&cycle(5), 5, 2, DpStrategy::ExhaustiveNormalized, u64::MAX)
            .unwrap();
        assert_eq!(r.verdict, DpVerdict::Holds);
        assert_eq!(r.covers_checked, 120);
    }

    #[test]
    fn budget_makes_exhaustive_inconclusive() {
        let r = check_dp_colorable(&cycle(5), 5, 2, DpStrategy::ExhaustiveNormalized, 10).unwrap();
        assert!(matches!(r.verdict, DpVerdict::Inconclusive { .. }));
    }

    #[test]
    fn sampling_never_claims_holds() {
        let s = DpStrategy::Sampled { count: 30, seed: 1 };
        let r = check_dp_colorable(&cycle(5), 5, 2, s, u64::MAX).unwrap();
        assert!(matches!(r.verdict, DpVerdict::Inconclusive { .. }));
        let r = check_dp_colorable(&cycle(4), 2, 1, s, u64::MAX).unwrap();
        assert!(matches!(r.verdict, DpVerdict::Refuted(_)));
    }

    #[test]
    fn stdp_examples() {
        let cfg = SearchConfig::default();
        let r = check_stdp_implication(
            &cycle(5),
            3,
            2,
            DpStrategy::ExhaustiveNormalized,
            u64::MAX,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.degenerate, "yes");
        assert_eq!(r.dp.as_ref().unwrap().covers_checked, 120);
        assert!(!r.counterexample);

        let p3 = GraphFamily::Path { k: 3 }.build().unwrap();
        let r = check_stdp_implication(&p3, 1, 1, DpStrategy::ExhaustiveNormalized, u64::MAX, &cfg)
            .unwrap();
        assert_eq!(r.dp.unwrap().family_size, Some(1));

        let k23 = GraphFamily::CompleteBipartite { m: 2, n: 3 }
            .build()
            .unwrap();
        let s = DpStrategy::Sampled {
            count: 500,
            seed: 7,
        };
        let r = check_stdp_implication(&k23, 5, 3, s, u64::MAX, &cfg).unwrap();
        assert_eq!(r.degenerate, "yes");
        assert!(!r.counterexample);
    }

    #[test]
    fn bad_parameters() {
        assert!(check_dp_colorable(&cycle(4), 2, 3, DpStrategy::ExhaustiveNormalized, 1).is_err());
        assert!(check_dp_colorable(&cycle(4), 0, 0, DpStrategy::ExhaustiveNormalized, 1).is_err());
    }
}
