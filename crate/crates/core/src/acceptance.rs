//! The acceptance suite: eleven end-to-end checks, each with a runtime
//! limit. Shared by the `acceptance` test target and `fracdeg selftest`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;

use crate::certificates::{
    cert_complete_bipartite, cert_even_cycle, cert_linear_forest_reduction, cert_odd_cycle,
    complete_bipartite_plan, even_cycle_plan, lift_ops_traced, scale_certificate,
};
use crate::engine::{apply_sequence, verify_certificate, Certificate, Mode, Op, State};
use crate::graph::{components, Graph, GraphFamily};
use crate::oracle::{
    check_dp_colorable, check_stdp_implication, multipartite_bound, seeded_rng, DpStrategy,
    DpVerdict,
};
use crate::search::{decide_uniform, min_uniform_shield, Answer, Rational, SearchConfig};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} ({:.2} s, limit {} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed_ms as f64 / 1000.0,
            self.limit_ms / 1000,
            self.detail
        )
    }
}

type Check = fn() -> Result<String, String>;

/// `(id, title, runtime limit, check)` for every criterion.
pub const CRITERIA: [(u8, &str, Duration, Check); 11] = [
    (1, "worked example replays", Duration::from_secs(1), worked_examples),
    (
        2,
        "even-cycle stage formulas",
        Duration::from_secs(5),
        even_cycle_formulas,
    ),
    (3, "odd cycles", Duration::from_secs(600), odd_cycles),
    (4, "even cycles", Duration::from_secs(600), even_cycles),
    (
        5,
        "complete bipartite upper bound",
        Duration::from_secs(30),
        complete_bipartite,
    ),
    (
        6,
        "subdivided complete graphs",
        Duration::from_secs(30),
        subdivisions,
    ),
    (
        7,
        "degeneracy implies DP-colorability",
        Duration::from_secs(1800),
        stdp_cross_check,
    ),
    (
        8,
        "cycle cover families",
        Duration::from_secs(60),
        cycle_covers,
    ),
    (
        9,
        "transformer properties",
        Duration::from_secs(300),
        transformer_properties,
    ),
    (
        10,
        "multipartite bound",
        Duration::from_secs(1),
        multipartite,
    ),
    (
        11,
        "star lower-bound probe",
        Duration::from_secs(300),
        star_probe,
    ),
];

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    let &(id, title, limit, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if elapsed > limit {
        passed = false;
        detail = format!("over the time limit; {detail}");
    }
    Some(CriterionResult {
        id,
        title,
        passed,
        detail,
        elapsed_ms: elapsed.as_millis(),
        limit_ms: limit.as_millis(),
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cycle(k: usize) -> Graph {
    GraphFamily::Cycle { k }.build().expect("k >= 3")
}

fn pairs(st: &State) -> Vec<Option<(u32, u32)>> {
    (0..st.n()).map(|v| st.pair(v)).collect()
}

fn trace(g: &Graph, start: &State, ops: &[Op]) -> Result<Vec<State>, String> {
    let r = apply_sequence(g, start, ops, Mode::Type4, true);
    match r.stopped_at {
        Some((i, f)) => Err(format!("op {i} failed: {f:?}")),
        None => Ok(r.trace.expect("requested")),
    }
}

fn is_complete(g: &Graph, c: &Certificate) -> bool {
    verify_certificate(g, c).verdict.is_complete()
}

fn worked_examples() -> Result<String, String> {
    let fig_c4 = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).expect("valid");
    let some = |v: &[(u32, u32)]| v.iter().map(|&p| Some(p)).collect::<Vec<_>>();

    // single op on the grid-labeled C_4
    let st = State::new(vec![3, 2, 2, 3], vec![1, 2, 2, 2]).expect("valid");
    let tr = trace(&fig_c4, &st, &[Op::save(3, 2)])?;
    ensure(
        pairs(&tr[0]) == some(&[(3, 1), (1, 2), (2, 2), (3, 1)]),
        || "single op".into(),
    )?;

    // three-op sequence from uniform (3, 2)
    let st = State::uniform(4, 3, 2).expect("valid");
    let tr = trace(
        &fig_c4,
        &st,
        &[Op::shade(0), Op::save(3, 2), Op::save(3, 1)],
    )?;
    ensure(
        pairs(&tr[0]) == some(&[(3, 1), (2, 2), (2, 2), (3, 2)])
            && pairs(&tr[1]) == some(&[(3, 1), (1, 2), (2, 2), (3, 1)])
            && pairs(&tr[2]) == vec![Some((3, 1)), Some((1, 2)), Some((1, 2)), None],
        || "three-op sequence".into(),
    )?;

    // first stage on C_6 at t = 2
    let p = even_cycle_plan(3, 2).map_err(|e| e.to_string())?;
    let mut want = some(&[(2, 2), (3, 2), (3, 2), (3, 2), (3, 2), (3, 2)]);
    ensure(pairs(&p.start) == want, || "C_6 start".into())?;
    let tr = trace(&cycle(6), &p.start, &p.plan.ops()[..3])?;
    for (i, st) in tr.iter().enumerate() {
        want[2 * i + 1] = Some((3, 1));
        want[(2 * i + 2) % 6] = Some((want[(2 * i + 2) % 6].unwrap().0 - 1, 2));
        ensure(pairs(st) == want, || format!("C_6 after op {}", i + 1))?;
    }

    // six shades on C_7 at (4, 3)
    let c = cert_odd_cycle(3).map_err(|e| e.to_string())?;
    let tr = trace(
        &cycle(7),
        &c.initial_state(&cycle(7)).expect("valid"),
        &c.ops[..6],
    )?;
    let shields = |st: &State, vs: &[usize]| vs.iter().map(|&v| st.shield(v)).collect::<Vec<_>>();
    let c7 = [
        (shields(&tr[0], &[4, 5, 6]), vec![3, 4, 3]),
        (shields(&tr[1], &[4, 5, 6]), vec![2, 4, 2]),
        (shields(&tr[2], &[4, 6]), vec![1, 1]),
        (shields(&tr[3], &[0, 6]), vec![3, 1]),
        (shields(&tr[4], &[0, 6]), vec![2, 1]),
    ];
    ensure(c7.iter().all(|(a, b)| a == b), || "C_7 shields".into())?;
    ensure(
        tr[0].pair(5) == Some((4, 2))
            && tr[1].pair(5) == Some((4, 1))
            && tr[2].pair(5).is_none()
            && tr[3].pair(6) == Some((1, 2))
            && tr[4].pair(6) == Some((1, 1)),
        || "C_7 targets".into(),
    )?;
    ensure(
        pairs(&tr[5])
            == vec![
                Some((1, 3)),
                Some((4, 3)),
                Some((4, 3)),
                Some((4, 3)),
                Some((1, 3)),
                None,
                None,
            ],
        || "C_7 after six ops".into(),
    )?;

    // first stage on K_{2,3} from A:(9,6), B:(8,6), in both save orders
    let k23 = GraphFamily::CompleteBipartite { m: 2, n: 3 }
        .build()
        .expect("valid");
    let p = complete_bipartite_plan(2, 3, 2).map_err(|e| e.to_string())?;
    ensure(
        pairs(&p.start) == some(&[(9, 6), (9, 6), (8, 6), (8, 6), (8, 6)]),
        || "K_{2,3} start".into(),
    )?;
    let listed = trace(&k23, &p.start, &p.plan.ops()[..6])?;
    let want_sh = [
        [9, 9, 8, 7, 7],
        [9, 9, 7, 7, 6],
        [9, 9, 6, 6, 6],
        [9, 9, 6, 5, 5],
        [9, 9, 5, 5, 4],
        [9, 9, 4, 4, 4],
    ];
    let want_a = [5, 4, 3];
    for (i, st) in listed.iter().enumerate() {
        let a_targets = if i < 3 {
            [want_a[i], 6]
        } else {
            [3, want_a[i - 3]]
        };
        ensure(
            st.shields() == want_sh[i]
                && st.targets()[..2] == a_targets
                && st.targets()[2..] == [6, 6, 6],
            || format!("K_{{2,3}} after op {}", i + 1),
        )?;
    }
    let rotated: Vec<Op> = [0, 1]
        .iter()
        .flat_map(|&a| [3, 4, 2].map(|b| Op::save(a, b)))
        .collect();
    let alt = trace(&k23, &p.start, &rotated)?;
    ensure(alt[5] == listed[5], || "K_{2,3} rotated order".into())?;
    Ok("C_4 single op and sequence, C_6, C_7 and K_{2,3} stages match".into())
}

/// Expected state after `i` ops of stage `mu` of the unlifted `C_{2r}` plan.
fn even_cycle_formula(r: usize, t: u32, mu: u32, i: usize) -> Vec<Option<(u32, u32)>> {
    (1..=2 * r)
        .map(|k| {
            let odd = k % 2 == 1;
            let saved_odd = odd && k > 1 && (k - 1) / 2 <= i && (k - 1) / 2 != r;
            if mu == 1 {
                if !odd && k / 2 <= i {
                    return None;
                }
                let s = if k == 1 {
                    if i != r {
                        1
                    } else {
                        0
                    }
                } else if saved_odd {
                    1
                } else if !odd {
                    t + 1
                } else {
                    2
                };
                Some((s, if odd { t } else { 1 }))
            } else {
                let s = if k == 1 {
                    if i != r {
                        mu
                    } else {
                        mu - 1
                    }
                } else if saved_odd {
                    mu
                } else if !odd {
                    t + 1
                } else {
                    mu + 1
                };
                let tt = if odd {
                    t
                } else if k / 2 <= i {
                    mu - 1
                } else {
                    mu
                };
                Some((s, tt))
            }
        })
        .collect()
}

fn even_cycle_formulas() -> Result<String, String> {
    let mut checked = 0;
    for r in 2..=4 {
        let g = cycle(2 * r);
        for t in 1..=3 {
            let p = even_cycle_plan(r, t).map_err(|e| e.to_string())?;
            let ops = p.plan.ops();
            let tr = trace(&g, &p.start, &ops[..r * t as usize])?;
            for (stage, mu) in (1..=t).rev().enumerate() {
                for i in 1..=r {
                    let got = pairs(&tr[stage * r + i - 1]);
                    ensure(got == even_cycle_formula(r, t, mu, i), || {
                        format!("r={r} t={t} mu={mu} i={i}: {got:?}")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} intermediate states match"))
}

fn refute(g: &Graph, s: u32, t: u32) -> Result<u64, String> {
    let out = decide_uniform(g, s, t, &SearchConfig::default()).map_err(|e| e.to_string())?;
    match out.answer {
        Answer::No => Ok(out.states_expanded),
        other => Err(format!(
            "expected refutation at ({s},{t}), got {}",
            other.label()
        )),
    }
}

fn odd_cycles() -> Result<String, String> {
    let mut ratios = Vec::new();
    for r in 1..=5u32 {
        let g = cycle(2 * r as usize + 1);
        let c = cert_odd_cycle(r).map_err(|e| e.to_string())?;
        ensure(is_complete(&g, &c), || {
            format!("C_{} certificate", 2 * r + 1)
        })?;
        let ratio = Rational::new((c.shield[0] + c.target[0]) as u64, c.target[0] as u64);
        ensure(ratio == Rational::new(2 * r as u64 + 1, r as u64), || {
            format!("ratio for r={r}")
        })?;
        ratios.push(ratio.to_string());
    }
    let mut refuted = 0;
    for r in [2u64, 3] {
        let g = cycle(2 * r as usize + 1);
        let bound = Rational::new(2 * r + 1, r);
        for t in 1..=3u32 {
            for s in 0.. {
                if Rational::new((s + t) as u64, t as u64) >= bound {
                    break;
                }
                refute(&g, s, t)?;
                refuted += 1;
            }
        }
    }
    Ok(format!(
        "certified ratios {}; {refuted} pairs below the bound refuted",
        ratios.join(", ")
    ))
}

fn even_cycles() -> Result<String, String> {
    for r in [2, 3] {
        let g = cycle(2 * r);
        for t in 1..=4 {
            let c = cert_even_cycle(r, t).map_err(|e| e.to_string())?;
            ensure(is_complete(&g, &c), || format!("C_{} at t={t}", 2 * r))?;
        }
        for t in 1..=3 {
            let m =
                min_uniform_shield(&g, t, &SearchConfig::default()).map_err(|e| e.to_string())?;
            ensure(m.s_min() == Some(t + 1), || {
                format!("C_{} s_min({t}) = {:?}", 2 * r, m.s_min())
            })?;
        }
    }
    Ok("C_4, C_6 certified at (t+1,t) for t<=4; s_min = t+1 for t<=3".into())
}

fn complete_bipartite() -> Result<String, String> {
    let mut count = 0;
    for m in 2..=4usize {
        for n in m..=4 {
            let g = GraphFamily::CompleteBipartite { m, n }
                .build()
                .map_err(|e| e.to_string())?;
            for t in 1..=2u32 {
                let c = cert_complete_bipartite(m, n, t).map_err(|e| e.to_string())?;
                ensure(is_complete(&g, &c), || format!("K_{{{m},{n}}} t={t}"))?;
                let got = Rational::new((c.shield[0] + c.target[0]) as u64, c.target[0] as u64);
                let nt = (n as u64) * t as u64;
                // m + 1 - m/n + 1/(nt) over the common denominator nt
                let want = Rational::new((m as u64 + 1) * nt - m as u64 * t as u64 + 1, nt);
                ensure(got == want, || {
                    format!("K_{{{m},{n}}} t={t}: ratio {got} != {want}")
                })?;
                count += 1;
            }
        }
    }
    let k23 = GraphFamily::CompleteBipartite { m: 2, n: 3 }
        .build()
        .map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for (t, want) in [(2u32, Rational::new(5, 2)), (4, Rational::new(29, 12))] {
        let c = cert_complete_bipartite(2, 3, t).map_err(|e| e.to_string())?;
        ensure(is_complete(&k23, &c), || format!("K_{{2,3}} t={t}"))?;
        let got = Rational::new((c.shield[0] + c.target[0]) as u64, c.target[0] as u64);
        ensure(got == want && got.to_f64() < 2.619, || {
            format!("K_{{2,3}} t={t}: {got}")
        })?;
        notes.push(format!("K_{{2,3}} t={t}: {got}"));
    }
    Ok(format!(
        "{count} certificates with exact ratios; {}",
        notes.join(", ")
    ))
}

fn subdivisions() -> Result<String, String> {
    let mut sizes = Vec::new();
    for h in [Graph::complete(4), Graph::complete(5)] {
        let g = h.subdivide_uniform(4).map_err(|e| e.to_string())?;
        let x: Vec<_> = h.vertices().collect();
        let c = cert_linear_forest_reduction(&g, &x, 2).map_err(|e| e.to_string())?;
        ensure(
            is_complete(&g, &c) && c.shield[0] == 3 && c.target[0] == 2,
            || format!("subdivided K_{}", h.n()),
        )?;
        sizes.push(format!(
            "K_{} ({} vertices, {} ops)",
            h.n(),
            g.n(),
            c.ops.len()
        ));
    }
    Ok(format!(
        "(3,2) certificates for subdivided {}",
        sizes.join(" and ")
    ))
}

/// Connected graphs on `n` vertices up to isomorphism, by brute-force
/// canonical form (smallest edge bitmask over all relabelings).
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let perms = crate::oracle::all_permutations(n);
    let index = |u: usize, v: usize| {
        pairs
            .iter()
            .position(|&p| p == (u.min(v), u.max(v)))
            .unwrap()
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        let edges: Vec<_> = (0..pairs.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| pairs[i])
            .collect();
        let g = Graph::from_edges(n, &edges).expect("valid");
        if components(&g).len() != 1 {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                edges
                    .iter()
                    .fold(0u64, |m, &(u, v)| m | 1 << index(p[u], p[v]))
            })
            .min()
            .unwrap_or(0);
        if seen.insert(canon) {
            out.push(g);
        }
    }
    out
}

fn stdp_cross_check() -> Result<String, String> {
    let (mut graphs, mut yes, mut exhaustive, mut sampled) = (0, 0, 0, 0);
    for n in 1..=5 {
        for g in connected_graphs(n) {
            graphs += 1;
            let rank = g.edge_count() + 1 - g.n();
            for t in 1..=2u32 {
                for s in 0..=3u32 {
                    let strategy = if rank <= 2 {
                        DpStrategy::ExhaustiveNormalized
                    } else {
                        DpStrategy::Sampled {
                            count: 200,
                            seed: 1 + s as u64 * 10 + t as u64,
                        }
                    };
                    let rep = check_stdp_implication(
                        &g,
                        s,
                        t,
                        strategy,
                        u64::MAX,
                        &SearchConfig::default(),
                    )
                    .map_err(|e| e.to_string())?;
                    ensure(rep.degenerate != "budget_exhausted", || {
                        "search budget exhausted".into()
                    })?;
                    let Some(dp) = rep.dp else { continue };
                    yes += 1;
                    ensure(!rep.counterexample, || {
                        format!(
                            "counterexample on {:?} at ({s},{t})",
                            g.edges().collect::<Vec<_>>()
                        )
                    })?;
                    match (strategy, &dp.verdict) {
                        (DpStrategy::ExhaustiveNormalized, DpVerdict::Holds) => exhaustive += 1,
                        (DpStrategy::Sampled { .. }, DpVerdict::Inconclusive { .. }) => {
                            sampled += 1
                        }
                        (_, v) => return Err(format!("unexpected verdict {}", v.label())),
                    }
                }
            }
        }
    }
    Ok(format!(
        "{graphs} graphs, {yes} degenerate pairs: {exhaustive} exhaustive holds, {sampled} sampled without refutation"
    ))
}

fn cycle_covers() -> Result<String, String> {
    let cases = [
        (4, 2, 1, 2u64, false),
        (4, 4, 2, 24, false),
        (5, 5, 2, 120, true),
    ];
    for (k, a, b, family, holds) in cases {
        let r = check_dp_colorable(&cycle(k), a, b, DpStrategy::ExhaustiveNormalized, u64::MAX)
            .map_err(|e| e.to_string())?;
        ensure(r.family_size == Some(family), || {
            format!("C_{k} family size {:?}", r.family_size)
        })?;
        let ok = match &r.verdict {
            DpVerdict::Holds => holds && r.covers_checked == family,
            DpVerdict::Refuted(w) => !holds && crate::oracle::find_transversal(w, b).is_none(),
            DpVerdict::Inconclusive { .. } => false,
        };
        ensure(ok, || format!("C_{k} at ({a},{b}): {}", r.verdict.label()))?;
    }
    Ok("C_4 refuted at (2,1) and (4,2); C_5 holds at (5,2) over 120 covers".into())
}

fn random_certificate<R: Rng>(rng: &mut R) -> (Graph, Certificate) {
    loop {
        let n = rng.gen_range(2..=6);
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(0.45))
            .collect();
        let g = Graph::from_edges(n, &edges).expect("valid");
        let mode = if rng.gen_bool(0.5) {
            Mode::Type3
        } else {
            Mode::Type4
        };
        let (s, t) = (rng.gen_range(0..=3), rng.gen_range(1..=2));
        let cfg = SearchConfig {
            max_states: 200_000,
            ..SearchConfig::with_mode(mode)
        };
        if let Ok(out) = decide_uniform(&g, s, t, &cfg) {
            if let Answer::Yes(c) = out.answer {
                return (g, c);
            }
        }
    }
}

fn transformer_properties() -> Result<String, String> {
    let mut rng = seeded_rng(2024);
    for case in 0..200 {
        let (g, base) = random_certificate(&mut rng);
        let hi: Vec<u32> = base
            .shield
            .iter()
            .map(|&s| s + rng.gen_range(0..=2))
            .collect();
        let lo: Vec<u32> = base.target.iter().map(|&t| rng.gen_range(1..=t)).collect();
        let st = base.initial_state(&g).expect("valid");
        let up = State::new(hi.clone(), lo.clone()).expect("valid");
        let lifted =
            lift_ops_traced(&g, &st, &base.ops, &up).map_err(|e| format!("case {case}: {e}"))?;
        ensure(
            lifted.iter().all(|(k, op)| {
                op.u == base.ops[*k].u && op.save.iter().all(|w| base.ops[*k].save.contains(w))
            }),
            || format!("case {case}: lift enlarged a save set"),
        )?;
        let cert = Certificate::new(
            base.mode,
            hi,
            lo.clone(),
            lifted.into_iter().map(|(_, op)| op).collect(),
        );
        ensure(
            is_complete(&g, &cert)
                && cert.ops.len() as u64 == lo.iter().map(|&t| t as u64).sum::<u64>(),
            || format!("case {case}: lifted certificate incomplete"),
        )?;
        let k = rng.gen_range(2..=3);
        let scaled = scale_certificate(&g, &base, k).map_err(|e| format!("case {case}: {e}"))?;
        ensure(is_complete(&g, &scaled) && scaled.mode == base.mode, || {
            format!("case {case}: scaled certificate by {k} incomplete")
        })?;
    }
    Ok("200 random lifts and scalings verify".into())
}

fn multipartite() -> Result<String, String> {
    let want = 2.618_033_988_7;
    for m in 2..=6 {
        let b = multipartite_bound(&[2, m]).map_err(|e| e.to_string())?;
        ensure((b.bound - want).abs() <= 1e-6, || {
            format!("(2,{m}): {}", b.bound)
        })?;
        ensure(b.residuals.iter().all(|&r| r <= 1e-10), || {
            format!("(2,{m}) residuals")
        })?;
    }
    Ok(format!(
        "1/p*_1 = {:.10} for parts (2,m), m = 2..6",
        multipartite_bound(&[2, 2]).unwrap().bound
    ))
}

fn star_probe() -> Result<String, String> {
    let g = GraphFamily::CompleteBipartite { m: 1, n: 5 }
        .build()
        .map_err(|e| e.to_string())?;
    let mut refuted = Vec::new();
    for t in 1..=2u32 {
        for s in 0..t {
            refute(&g, s, t)?;
            refuted.push(format!("({s},{t})"));
        }
    }
    Ok(format!(
        "K_{{1,5}} refuted at {} (ratio below 2); asymptotic claim not probed",
        refuted.join(", ")
    ))
}
