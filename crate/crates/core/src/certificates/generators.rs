use serde_json::json;

use super::{lift_ops, CertError, Plan, StagedPlan};
use crate::engine::{apply_sequence, Certificate, Mode, Op, State};
use crate::graph::{
    components, is_independent_set, path_order, structure_queries, Graph, GraphFamily, Vertex,
};

fn invalid(generator: &'static str, reason: impl Into<String>) -> CertError {
    CertError::InvalidParameters {
        generator,
        reason: reason.into(),
    }
}

/// Lifts `plan` to the uniform pair `(s, t)` on `g`.
fn lift_to_uniform(g: &Graph, plan: &Plan, s: u32, t: u32) -> Result<Certificate, CertError> {
    let hi = State::uniform(g.n(), s, t).expect("t >= 1");
    let ops = lift_ops(g, &plan.start, &plan.plan.ops(), &hi)?;
    Ok(Certificate::uniform(Mode::Type4, g.n(), s, t, ops))
}

/// Unlifted plan for `C_{2r}`: `v_1` starts with shield `t`, every other
/// vertex with `t + 1`, all targets `t`. Stages `mu = t, ..., 1` each save
/// `v_{2i-1}` while shading `v_{2i}` for `i = 1..r`; the odd vertices are
/// then shaded out.
pub fn even_cycle_plan(r: usize, t: u32) -> Result<Plan, CertError> {
    if r < 2 || t < 1 {
        return Err(invalid("even_cycle", "need r >= 2 and t >= 1"));
    }
    let n = 2 * r;
    let mut shield = vec![t + 1; n];
    shield[0] = t;
    let start = State::new(shield, vec![t; n]).expect("t >= 1");
    let mut plan = StagedPlan::default();
    for _mu in (1..=t).rev() {
        for i in 1..=r {
            plan.push(Op::save(2 * i - 1, 2 * i - 2), 1);
        }
    }
    for v in (0..n).step_by(2) {
        plan.shades(v, t);
    }
    Ok(Plan { start, plan })
}

/// `C_{2r}` at uniform `(t + 1, t)`, `2rt` ops.
pub fn cert_even_cycle(r: usize, t: u32) -> Result<Certificate, CertError> {
    let plan = even_cycle_plan(r, t)?;
    let g = GraphFamily::Cycle { k: 2 * r }.build()?;
    Ok(
        lift_to_uniform(&g, &plan, t + 1, t)?
            .with_provenance("even_cycle", json!({"r": r, "t": t})),
    )
}

/// Plan for `P_k` with end shields 1, inner shields `r + 1` and targets `r`.
///
/// Trailing vertices `v_k, ..., v_{2r}` are shaded out first; the remaining
/// `P_{2r-1}` is handled in two sweeps that save towards the left end and
/// then towards the right end, after which only odd vertices are left.
pub fn path_plan(k: usize, r: u32) -> Result<Plan, CertError> {
    if k == 0 || r == 0 {
        return Err(invalid("path", "need k >= 1 and r >= 1"));
    }
    let rr = r as usize;
    if k > 1 && k < 2 * rr - 1 {
        return Err(invalid(
            "path",
            format!("k = {k} is below 2r - 1 = {}", 2 * rr - 1),
        ));
    }
    let mut shield = vec![r + 1; k];
    shield[0] = 1;
    shield[k - 1] = 1;
    let start = State::new(shield, vec![r; k]).expect("r >= 1");
    let mut plan = StagedPlan::default();
    if k == 1 {
        plan.shades(0, r);
        return Ok(Plan { start, plan });
    }
    let v = |i: usize| i - 1;
    for j in (2 * rr..=k).rev() {
        plan.shades(v(j), r);
    }
    for mu in 1..rr {
        plan.push(Op::save(v(2 * mu), v(2 * mu - 1)), (rr - mu) as u32);
    }
    for mu in rr..=2 * rr - 2 {
        let m = 2 * rr - mu;
        plan.push(
            Op::save(v(2 * m - 2), v(2 * m - 1)),
            (2 * rr - mu - 1) as u32,
        );
    }
    for i in (1..2 * rr).step_by(2) {
        plan.shades(v(i), r);
    }
    Ok(Plan { start, plan })
}

/// `P_k` certificate with end shields 1, inner shields `r + 1`, targets
/// `r`; `k >= 2r - 1`, or `k = 1` for any `r`.
pub fn cert_path(k: usize, r: u32) -> Result<Certificate, CertError> {
    let Plan { start, plan } = path_plan(k, r)?;
    let below_bound = k < 2 * r as usize - 1;
    Ok(Certificate::new(
        Mode::Type4,
        start.shields().to_vec(),
        start.targets().to_vec(),
        plan.ops(),
    )
    .with_provenance(
        "path",
        json!({"k": k, "r": r, "single_vertex_extension": below_bound}),
    ))
}

/// `C_{2r+1}` at uniform `(r + 1, r)`: shade out `v_{2r}` and `v_{2r+1}`,
/// which leaves exactly the path configuration on `v_1, ..., v_{2r-1}`.
pub fn cert_odd_cycle(r: u32) -> Result<Certificate, CertError> {
    if r == 0 {
        return Err(invalid("odd_cycle", "need r >= 1"));
    }
    let rr = r as usize;
    let n = 2 * rr + 1;
    let mut ops = Vec::new();
    ops.extend(std::iter::repeat_n(Op::shade(2 * rr - 1), rr));
    ops.extend(std::iter::repeat_n(Op::shade(2 * rr), rr));
    ops.extend(path_plan(2 * rr - 1, r)?.plan.ops());
    Ok(Certificate::uniform(Mode::Type4, n, r + 1, r, ops)
        .with_provenance("odd_cycle", json!({"r": r})))
}

/// Unlifted plan for `K_{m,n}` (`A = 0..m`, `B = m..m+n`): `A` starts at
/// `(m(n-1)t + 1, nt)` and `B` at `(m(n-1)t, nt)`. Each of the `t` stages
/// shades every `a` once per `b`, saving that `b`; `B` is then edgeless.
pub fn complete_bipartite_plan(m: usize, n: usize, t: u32) -> Result<Plan, CertError> {
    if m < 2 || n < m || t < 1 {
        return Err(invalid("complete_bipartite", "need 2 <= m <= n and t >= 1"));
    }
    let base = (m * (n - 1)) as u32 * t;
    let mut shield = vec![base + 1; m];
    shield.extend(vec![base; n]);
    let start = State::new(shield, vec![n as u32 * t; m + n]).expect("t >= 1");
    let mut plan = StagedPlan::default();
    for _mu in (1..=t).rev() {
        for i in 1..=m * n {
            let (q, r) = ((i - 1) / n, (i - 1) % n);
            plan.push(Op::save(q, m + r), 1);
        }
    }
    for b in m..m + n {
        plan.shades(b, n as u32 * t);
    }
    Ok(Plan { start, plan })
}

/// `K_{m,n}` at uniform `(m(n-1)t + 1, nt)`, ratio `m + 1 - m/n + 1/(nt)`.
pub fn cert_complete_bipartite(m: usize, n: usize, t: u32) -> Result<Certificate, CertError> {
    let plan = complete_bipartite_plan(m, n, t)?;
    let g = GraphFamily::CompleteBipartite { m, n }.build()?;
    let s = (m * (n - 1)) as u32 * t + 1;
    Ok(lift_to_uniform(&g, &plan, s, n as u32 * t)?
        .with_provenance("complete_bipartite", json!({"m": m, "n": n, "t": t})))
}

fn check_linear_forest_input(
    g: &Graph,
    x: &[Vertex],
    r: u32,
) -> Result<Vec<Vec<Vertex>>, CertError> {
    if r == 0 {
        return Err(invalid("linear_forest_reduction", "need r >= 1"));
    }
    if !is_independent_set(g, x)? {
        return Err(CertError::NotIndependent);
    }
    let mut in_x = vec![false; g.n()];
    for &v in x {
        in_x[v] = true;
    }
    if let Some(v) = g.vertices().find(|&v| g.degree(v) >= 3 && !in_x[v]) {
        return Err(CertError::HighDegreeOutside(v));
    }
    let rest: Vec<Vertex> = g.vertices().filter(|&v| !in_x[v]).collect();
    let (h, map) = g.induced_subgraph(&rest);
    if !structure_queries(&h).is_linear_forest {
        return Err(CertError::NotLinearForest);
    }
    let required = 2 * r as usize - 1;
    let mut paths = Vec::new();
    for comp in components(&h) {
        if comp.len() < required {
            return Err(CertError::ComponentTooShort {
                order: comp.len(),
                required,
            });
        }
        let order = path_order(&h, &comp).ok_or(CertError::NotLinearForest)?;
        paths.push(order.into_iter().map(|v| map[v]).collect());
    }
    Ok(paths)
}

/// Shields left on `g - x` after every vertex of `x` is shaded `r` times
/// from uniform `(r + 1, r)`: 0 for a vertex with two neighbors in `x`,
/// 1 for one neighbor, `r + 1` otherwise; `x` itself is reported as 0.
pub fn linear_forest_post_shields(g: &Graph, x: &[Vertex], r: u32) -> Vec<u32> {
    let mut in_x = vec![false; g.n()];
    for &v in x {
        in_x[v] = true;
    }
    g.vertices()
        .map(|v| {
            if in_x[v] {
                return 0;
            }
            match g.neighbors(v).iter().filter(|&&w| in_x[w]).count() {
                0 => r + 1,
                1 => 1,
                _ => 0,
            }
        })
        .collect()
}

/// `g` at uniform `(r + 1, r)` when `x` is independent, holds every vertex
/// of degree at least 3, and leaves a linear forest whose paths all have at
/// least `2r - 1` vertices.
pub fn cert_linear_forest_reduction(
    g: &Graph,
    x: &[Vertex],
    r: u32,
) -> Result<Certificate, CertError> {
    let paths = check_linear_forest_input(g, x, r)?;
    let n = g.n();
    let mut xs = x.to_vec();
    xs.sort_unstable();
    xs.dedup();
    let mut ops: Vec<Op> = xs
        .iter()
        .flat_map(|&v| std::iter::repeat_n(Op::shade(v), r as usize))
        .collect();

    let start = State::uniform(n, r + 1, r).expect("r >= 1");
    let after_x = apply_sequence(g, &start, &ops, Mode::Type4, false);
    if let Some((index, failure)) = after_x.stopped_at {
        return Err(CertError::LiftFailed { index, failure });
    }
    let actual = after_x.final_state;

    // per-path plans at the lower shields: ends at 1 (0 for a lone vertex
    // between two vertices of x), inner vertices at r + 1
    let alive: Vec<Vertex> = actual.alive().collect();
    let mut low_shield = vec![0; n];
    let mut rest_ops = Vec::new();
    for path in &paths {
        let plan = path_plan(path.len(), r)?;
        for (i, &v) in path.iter().enumerate() {
            low_shield[v] = plan.start.shield(i);
        }
        if path.len() == 1 && actual.shield(path[0]) == 0 {
            low_shield[path[0]] = 0;
        }
        rest_ops.extend(plan.plan.ops().into_iter().map(|op| Op {
            u: path[op.u],
            save: op.save.iter().map(|&w| path[w]).collect(),
        }));
    }
    let low = State::on_subset(n, &alive, &low_shield, actual.targets());
    ops.extend(lift_ops(g, &low, &rest_ops, &actual)?);
    Ok(Certificate::uniform(Mode::Type4, n, r + 1, r, ops)
        .with_provenance("linear_forest_reduction", json!({"x": xs, "r": r})))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::verify_certificate;

    fn complete(g: &Graph, c: &Certificate) -> bool {
        verify_certificate(g, c).verdict.is_complete()
    }

    fn pairs(st: &State) -> Vec<Option<(u32, u32)>> {
        (0..st.n()).map(|v| st.pair(v)).collect()
    }

    #[test]
    fn even_cycles_verify() {
        for r in 2..6 {
            let g = GraphFamily::Cycle { k: 2 * r }.build().unwrap();
            for t in 1..5 {
                let c = cert_even_cycle(r, t).unwrap();
                assert!(complete(&g, &c), "r={r} t={t}");
                assert_eq!(c.ops.len(), 2 * r * t as usize);
                assert!(c.ops.iter().all(|op| op.save.len() <= 1));
            }
        }
        assert_eq!(cert_even_cycle(2, 1).unwrap().ops.len(), 4);
        assert!(cert_even_cycle(1, 1).is_err());
        assert!(cert_even_cycle(2, 0).is_err());
    }

    #[test]
    fn c6_first_stage_matches_expected_states() {
        let g = GraphFamily::Cycle { k: 6 }.build().unwrap();
        let p = even_cycle_plan(3, 2).unwrap();
        assert_eq!(pairs(&p.start)[..2], [Some((2, 2)), Some((3, 2))]);
        let ops = p.plan.ops();
        let tr = apply_sequence(&g, &p.start, &ops[..3], Mode::Type4, true)
            .trace
            .unwrap();
        assert_eq!((tr[0].pair(1), tr[0].pair(2)), (Some((3, 1)), Some((2, 2))));
        assert_eq!((tr[1].pair(3), tr[1].pair(4)), (Some((3, 1)), Some((2, 2))));
        assert_eq!((tr[2].pair(5), tr[2].pair(0)), (Some((3, 1)), Some((1, 2))));
    }

    #[test]
    fn lifted_even_cycle_drops_only_the_first_save() {
        // the raised shield of v1 matches the base shield again after one stage
        for r in 2..5 {
            for t in 1..4 {
                let c = cert_even_cycle(r, t).unwrap();
                let on_v2: Vec<&Op> = c.ops.iter().filter(|op| op.u == 1).collect();
                assert_eq!(on_v2.len(), t as usize);
                assert!(on_v2[0].save.is_empty());
                assert!(on_v2[1..].iter().all(|op| op.save == vec![0]));
            }
        }
    }

    #[test]
    fn path_p5_ops() {
        let p = path_plan(5, 3).unwrap();
        let ops = p.plan.ops();
        let saves: Vec<Op> = ops
            .iter()
            .filter(|op| !op.save.is_empty())
            .cloned()
            .collect();
        assert_eq!(
            saves,
            vec![
                Op::save(1, 0),
                Op::save(1, 0),
                Op::save(3, 2),
                Op::save(3, 4),
                Op::save(3, 4),
                Op::save(1, 2)
            ]
        );
        let g = GraphFamily::Path { k: 5 }.build().unwrap();
        let r = apply_sequence(&g, &p.start, &ops[..6], Mode::Type4, true);
        let tr = r.trace.unwrap();
        assert_eq!(
            pairs(&tr[1])[..3],
            [Some((1, 3)), Some((4, 1)), Some((2, 3))]
        );
        assert_eq!(pairs(&tr[2])[3..], [Some((4, 2)), Some((0, 3))]);
        assert_eq!(
            pairs(&tr[5]),
            vec![Some((0, 3)), None, Some((0, 3)), None, Some((0, 3))]
        );
    }

    #[test]
    fn paths_verify() {
        for r in 1..6u32 {
            for k in (2 * r as usize - 1)..(2 * r as usize + 5) {
                let g = GraphFamily::Path { k }.build().unwrap();
                let c = cert_path(k, r).unwrap();
                assert!(complete(&g, &c), "k={k} r={r}");
                assert_eq!(c.ops.len(), k * r as usize);
            }
            assert_eq!(cert_path(1, r).unwrap().ops, vec![Op::shade(0); r as usize]);
        }
        let c = cert_path(7, 3).unwrap();
        assert_eq!(c.ops.len(), 21);
        assert_eq!(&c.ops[..3], &[Op::shade(6), Op::shade(6), Op::shade(6)]);
        assert!(cert_path(4, 3).is_err());
        assert!(cert_path(0, 1).is_err());
    }

    #[test]
    fn odd_cycles_verify() {
        for r in 1..7 {
            let g = GraphFamily::Cycle {
                k: 2 * r as usize + 1,
            }
            .build()
            .unwrap();
            let c = cert_odd_cycle(r).unwrap();
            assert!(complete(&g, &c));
            assert_eq!(c.ops.len(), (2 * r as usize + 1) * r as usize);
        }
        assert_eq!(cert_odd_cycle(1).unwrap().ops.len(), 3);
        assert_eq!(cert_odd_cycle(2).unwrap().ops.len(), 10);
    }

    #[test]
    fn c7_prefix_matches_expected_states() {
        let g = GraphFamily::Cycle { k: 7 }.build().unwrap();
        let c = cert_odd_cycle(3).unwrap();
        let r = apply_sequence(
            &g,
            &c.initial_state(&g).unwrap(),
            &c.ops[..6],
            Mode::Type4,
            true,
        );
        let tr = r.trace.unwrap();
        let shields =
            |st: &State, vs: &[usize]| vs.iter().map(|&v| st.shield(v)).collect::<Vec<_>>();
        assert_eq!(shields(&tr[0], &[4, 6]), vec![3, 3]);
        assert_eq!(tr[1].pair(5), Some((4, 1)));
        assert_eq!(tr[2].pair(5), None);
        assert_eq!(shields(&tr[2], &[4, 6]), vec![1, 1]);
        assert_eq!(tr[3].pair(6), Some((1, 2)));
        assert_eq!(shields(&tr[4], &[0]), vec![2]);
        let last = &tr[5];
        assert_eq!(
            pairs(last),
            vec![
                Some((1, 3)),
                Some((4, 3)),
                Some((4, 3)),
                Some((4, 3)),
                Some((1, 3)),
                None,
                None
            ]
        );
    }

    #[test]
    fn complete_bipartite_verify() {
        for m in 2..5 {
            for n in m..5 {
                let g = GraphFamily::CompleteBipartite { m, n }.build().unwrap();
                for t in 1..4 {
                    let c = cert_complete_bipartite(m, n, t).unwrap();
                    assert!(complete(&g, &c), "m={m} n={n} t={t}");
                    assert_eq!(c.ops.len(), (m + n) * n * t as usize);
                }
            }
        }
        let c = cert_complete_bipartite(2, 3, 1).unwrap();
        assert_eq!((c.shield[0], c.target[0]), (5, 3));
        let c = cert_complete_bipartite(2, 2, 1).unwrap();
        assert_eq!((c.shield[0], c.target[0]), (3, 2));
        assert!(cert_complete_bipartite(3, 2, 1).is_err());
        assert!(cert_complete_bipartite(1, 2, 1).is_err());
    }

    #[test]
    fn k23_first_stage_matches_expected_states() {
        let g = GraphFamily::CompleteBipartite { m: 2, n: 3 }
            .build()
            .unwrap();
        let p = complete_bipartite_plan(2, 3, 2).unwrap();
        assert_eq!(p.start.shields(), &[9, 9, 8, 8, 8]);
        assert_eq!(p.start.targets(), &[6; 5]);
        let ops = p.plan.ops();
        let tr = apply_sequence(&g, &p.start, &ops[..6], Mode::Type4, true)
            .trace
            .unwrap();
        let sh = |st: &State| st.shields().to_vec();
        assert_eq!(sh(&tr[0]), vec![9, 9, 8, 7, 7]);
        assert_eq!(sh(&tr[1]), vec![9, 9, 7, 7, 6]);
        assert_eq!(sh(&tr[2]), vec![9, 9, 6, 6, 6]);
        assert_eq!(sh(&tr[3]), vec![9, 9, 6, 5, 5]);
        assert_eq!(sh(&tr[4]), vec![9, 9, 5, 5, 4]);
        assert_eq!(
            pairs(&tr[5]),
            vec![
                Some((9, 3)),
                Some((9, 3)),
                Some((4, 6)),
                Some((4, 6)),
                Some((4, 6))
            ]
        );
    }

    #[test]
    fn linear_forest_examples() {
        for h in [Graph::complete(4), Graph::complete(5)] {
            let g = h.subdivide_uniform(4).unwrap();
            let x: Vec<_> = h.vertices().collect();
            let c = cert_linear_forest_reduction(&g, &x, 2).unwrap();
            assert!(complete(&g, &c));
            assert_eq!((c.shield[0], c.target[0]), (3, 2));
        }
        let star = GraphFamily::CompleteBipartite { m: 1, n: 3 }
            .build()
            .unwrap();
        assert!(complete(
            &star,
            &cert_linear_forest_reduction(&star, &[0], 1).unwrap()
        ));
        let c9 = GraphFamily::Cycle { k: 9 }.build().unwrap();
        assert!(complete(
            &c9,
            &cert_linear_forest_reduction(&c9, &[0], 2).unwrap()
        ));
        // a lone vertex between two vertices of x, possible only for r = 1
        let c4 = GraphFamily::Cycle { k: 4 }.build().unwrap();
        assert!(complete(
            &c4,
            &cert_linear_forest_reduction(&c4, &[0, 2], 1).unwrap()
        ));
    }

    #[test]
    fn linear_forest_post_shield_formula() {
        for (h, r) in [
            (Graph::complete(4), 2),
            (Graph::complete(3), 3),
            (Graph::complete(4), 1),
        ] {
            let g = h.subdivide_uniform(2 * r as usize).unwrap();
            let x: Vec<_> = h.vertices().collect();
            let ops: Vec<Op> = x
                .iter()
                .flat_map(|&v| std::iter::repeat_n(Op::shade(v), r as usize))
                .collect();
            let st = apply_sequence(
                &g,
                &State::uniform(g.n(), r + 1, r).unwrap(),
                &ops,
                Mode::Type4,
                false,
            );
            assert_eq!(
                st.final_state.shields(),
                &linear_forest_post_shields(&g, &x, r)[..]
            );
        }
    }

    #[test]
    fn linear_forest_errors() {
        let k4 = Graph::complete(4);
        assert_eq!(
            cert_linear_forest_reduction(&k4, &[0, 1], 1),
            Err(CertError::NotIndependent)
        );
        let sub = k4.subdivide_uniform(4).unwrap();
        assert_eq!(
            cert_linear_forest_reduction(&sub, &[0, 1, 2], 2),
            Err(CertError::HighDegreeOutside(3))
        );
        assert!(matches!(
            cert_linear_forest_reduction(&sub, &[0, 1, 2, 3], 3),
            Err(CertError::ComponentTooShort {
                order: 3,
                required: 5
            })
        ));
        let c5 = GraphFamily::Cycle { k: 5 }.build().unwrap();
        assert_eq!(
            cert_linear_forest_reduction(&c5, &[], 1),
            Err(CertError::NotLinearForest)
        );
    }
}
