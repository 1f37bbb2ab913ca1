use serde_json::json;

use super::CertError;
use crate::engine::{
    apply_in_place, is_legal, verify_certificate, Certificate, Legality, Mode, Op, ReplayFailure,
    State,
};
use crate::graph::{components, k_core, Graph, Vertex};

fn require_complete(g: &Graph, cert: &Certificate) -> Result<(), CertError> {
    let v = verify_certificate(g, cert);
    if v.verdict.is_complete() {
        Ok(())
    } else {
        Err(CertError::BaseNotComplete(format!("{:?}", v.verdict)))
    }
}

/// Runs `ops` from `base` and `hi` in lockstep and returns the ops that are
/// legal from `hi`.
///
/// `hi` must have the same alive set as `base`, shields at least as large
/// and targets at most as large. An op on `u` is dropped once `u` has fewer
/// remaining shadings in `hi` than in `base`; otherwise it is kept with the
/// save set cut down to the vertices whose shields still agree.
pub fn lift_ops(g: &Graph, base: &State, ops: &[Op], hi: &State) -> Result<Vec<Op>, CertError> {
    Ok(lift_ops_traced(g, base, ops, hi)?
        .into_iter()
        .map(|(_, op)| op)
        .collect())
}

/// Like [`lift_ops`], pairing every emitted op with the index of the base
/// op it came from.
pub fn lift_ops_traced(
    g: &Graph,
    base: &State,
    ops: &[Op],
    hi: &State,
) -> Result<Vec<(usize, Op)>, CertError> {
    if base.n() != hi.n() || base.n() != g.n() {
        return Err(CertError::InvalidParameters {
            generator: "lift",
            reason: "state sizes do not match the graph".into(),
        });
    }
    for v in 0..g.n() {
        let pointwise = |reason: &str| {
            Err(CertError::Pointwise {
                vertex: v,
                reason: reason.into(),
            })
        };
        if base.is_alive(v) != hi.is_alive(v) {
            return pointwise("alive in one state only");
        }
        if hi.shield(v) < base.shield(v) {
            return pointwise("raised shield is smaller than the base shield");
        }
        if hi.target(v) > base.target(v) {
            return pointwise("lowered target is larger than the base target");
        }
    }
    let mut lo = base.clone();
    let mut up = hi.clone();
    let mut out = Vec::new();
    for (k, op) in ops.iter().enumerate() {
        if up.target(op.u) == lo.target(op.u) {
            let save: Vec<Vertex> = op
                .save
                .iter()
                .copied()
                .filter(|&w| up.is_alive(w) && up.shield(w) == lo.shield(w))
                .collect();
            let lifted = Op { u: op.u, save };
            match is_legal(g, &up, &lifted) {
                Ok(Legality::Legal) => {}
                Ok(Legality::Illegal(reason)) => {
                    return Err(CertError::LiftFailed {
                        index: out.len() + 1,
                        failure: ReplayFailure::Illegal { reason },
                    })
                }
                Err(error) => {
                    return Err(CertError::LiftFailed {
                        index: out.len() + 1,
                        failure: ReplayFailure::Malformed { error },
                    })
                }
            }
            apply_in_place(g, &mut up, &lifted);
            out.push((k, lifted));
        }
        apply_in_place(g, &mut lo, op);
    }
    Ok(out)
}

/// Turns a complete certificate at `(S, T)` into one at `(shield_hi,
/// target_lo)` where `shield_hi >= S` and `1 <= target_lo <= T` pointwise.
/// Save sets only shrink, so the mode is preserved.
pub fn lift_certificate(
    g: &Graph,
    base: &Certificate,
    shield_hi: &[u32],
    target_lo: &[u32],
) -> Result<Certificate, CertError> {
    require_complete(g, base)?;
    let lo = base.initial_state(g).expect("verified above");
    let hi = State::for_graph(g, shield_hi.to_vec(), target_lo.to_vec()).map_err(|e| {
        CertError::InvalidParameters {
            generator: "lift",
            reason: e.to_string(),
        }
    })?;
    let ops = lift_ops(g, &lo, &base.ops, &hi)?;
    Ok(Certificate::new(
        base.mode,
        shield_hi.to_vec(),
        target_lo.to_vec(),
        ops,
    ))
}

/// Repeats every op `k` times, giving a certificate at `(kS, kT)`.
pub fn scale_certificate(g: &Graph, base: &Certificate, k: u32) -> Result<Certificate, CertError> {
    if k == 0 {
        return Err(CertError::InvalidParameters {
            generator: "scale",
            reason: "k must be at least 1".into(),
        });
    }
    require_complete(g, base)?;
    let ops = base
        .ops
        .iter()
        .flat_map(|op| std::iter::repeat_n(op.clone(), k as usize))
        .collect();
    let mut out = Certificate::new(
        base.mode,
        base.shield.iter().map(|s| s * k).collect(),
        base.target.iter().map(|t| t * k).collect(),
        ops,
    );
    if let Some(p) = &base.provenance {
        out = out.with_provenance(
            "scale",
            json!({"k": k, "base": {"generator": p.generator, "params": p.params}}),
        );
    }
    Ok(out)
}

/// Extends a complete certificate for `g_prime - z` to `g_prime`.
///
/// `base` uses the ids of `g_prime - z`, i.e. ids above `z` shifted down by
/// one. Its ops are replayed unchanged and followed by `target_z` shades of
/// `z`; this works whenever `shield_z` covers the targets of `z`'s neighbors.
pub fn cert_append_vertex(
    g_prime: &Graph,
    z: Vertex,
    base: &Certificate,
    shield_z: u32,
    target_z: u32,
) -> Result<Certificate, CertError> {
    g_prime.check_vertex(z)?;
    if target_z == 0 {
        return Err(CertError::InvalidParameters {
            generator: "append_vertex",
            reason: "target of z must be at least 1".into(),
        });
    }
    let rest: Vec<Vertex> = g_prime.vertices().filter(|&v| v != z).collect();
    let (h, _) = g_prime.induced_subgraph(&rest);
    require_complete(&h, base)?;
    let up = |v: Vertex| if v >= z { v + 1 } else { v };
    let needed: u64 = g_prime
        .neighbors(z)
        .iter()
        .map(|&v| base.target[if v > z { v - 1 } else { v }] as u64)
        .sum();
    if (shield_z as u64) < needed {
        return Err(CertError::ShieldTooSmall {
            vertex: z,
            shield: shield_z as u64,
            needed,
        });
    }
    let mut shield = base.shield.clone();
    shield.insert(z, shield_z);
    let mut target = base.target.clone();
    target.insert(z, target_z);
    let mut ops: Vec<Op> = base
        .ops
        .iter()
        .map(|op| Op {
            u: up(op.u),
            save: op.save.iter().map(|&w| up(w)).collect(),
        })
        .collect();
    ops.extend(std::iter::repeat_n(Op::shade(z), target_z as usize));
    Ok(Certificate::new(base.mode, shield, target, ops))
}

/// Extends a certificate for the `k`-core of `g` (in the core's own sorted
/// numbering) to all of `g` at uniform `(s, t)`, re-adding the peeled
/// vertices in reverse deletion order.
pub fn cert_kcore_lift(
    g: &Graph,
    k: usize,
    core_cert: &Certificate,
    s: u32,
    t: u32,
) -> Result<Certificate, CertError> {
    if k == 0 || t == 0 {
        return Err(CertError::InvalidParameters {
            generator: "kcore_lift",
            reason: "k and t must be at least 1".into(),
        });
    }
    if (s as u64) < (k as u64 - 1) * t as u64 {
        return Err(CertError::InvalidParameters {
            generator: "kcore_lift",
            reason: format!("s = {s} is below (k - 1) t = {}", (k - 1) as u64 * t as u64),
        });
    }
    let kc = k_core(g, k);
    if core_cert.shield.len() != kc.core.len()
        || core_cert.shield.iter().any(|&x| x != s)
        || core_cert.target.iter().any(|&x| x != t)
    {
        return Err(CertError::ComponentMismatch(format!(
            "core certificate must be at uniform ({s}, {t}) on {} vertices",
            kc.core.len()
        )));
    }
    if kc.deletion_order.is_empty() {
        let (h, _) = g.induced_subgraph(&kc.core);
        require_complete(&h, core_cert)?;
        return Ok(core_cert.clone());
    }
    let mut members = kc.core.clone();
    let mut cert = core_cert.clone();
    for &z in kc.deletion_order.iter().rev() {
        members.push(z);
        members.sort_unstable();
        let (h, _) = g.induced_subgraph(&members);
        let zi = members.binary_search(&z).expect("just inserted");
        cert = cert_append_vertex(&h, zi, &cert, s, t)?;
    }
    Ok(cert.with_provenance("kcore_lift", json!({"k": k, "s": s, "t": t})))
}

/// Concatenates certificates for the components of `g`, given in component
/// order (by smallest vertex) and each in its component's sorted numbering.
pub fn cert_components(g: &Graph, per_component: &[Certificate]) -> Result<Certificate, CertError> {
    let comps = components(g);
    if comps.len() != per_component.len() {
        return Err(CertError::ComponentMismatch(format!(
            "graph has {} components, got {} certificates",
            comps.len(),
            per_component.len()
        )));
    }
    let n = g.n();
    let mut shield = vec![0; n];
    let mut target = vec![0; n];
    let mut ops = Vec::new();
    let mut mode = Mode::Type4;
    for (i, (comp, cert)) in comps.iter().zip(per_component).enumerate() {
        if cert.shield.len() != comp.len() || cert.target.len() != comp.len() {
            return Err(CertError::ComponentMismatch(format!(
                "component {i} has {} vertices, certificate covers {}",
                comp.len(),
                cert.shield.len()
            )));
        }
        let (h, map) = g.induced_subgraph(comp);
        require_complete(&h, cert)?;
        for (local, &v) in map.iter().enumerate() {
            shield[v] = cert.shield[local];
            target[v] = cert.target[local];
        }
        ops.extend(cert.ops.iter().map(|op| Op {
            u: map[op.u],
            save: op.save.iter().map(|&w| map[w]).collect(),
        }));
        if cert.mode == Mode::Type3 {
            mode = Mode::Type3;
        }
    }
    Ok(Certificate::new(mode, shield, target, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{cert_even_cycle, cert_odd_cycle};
    use crate::graph::GraphFamily;

    fn complete(g: &Graph, c: &Certificate) -> bool {
        verify_certificate(g, c).verdict.is_complete()
    }

    #[test]
    fn identity_lift_keeps_ops() {
        let c5 = GraphFamily::Cycle { k: 5 }.build().unwrap();
        let base = cert_odd_cycle(2).unwrap();
        let lifted = lift_certificate(&c5, &base, &base.shield, &base.target).unwrap();
        assert_eq!(lifted.ops, base.ops);
    }

    #[test]
    fn lift_drops_first_shades() {
        let p3 = GraphFamily::Path { k: 3 }.build().unwrap();
        let base = Certificate::new(
            Mode::Type4,
            vec![2, 4, 2],
            vec![2; 3],
            [0, 0, 2, 2, 1, 1].map(Op::shade).to_vec(),
        );
        assert!(complete(&p3, &base));
        let lifted = lift_certificate(&p3, &base, &[2, 4, 2], &[1; 3]).unwrap();
        assert_eq!(lifted.ops, [0, 2, 1].map(Op::shade).to_vec());
        assert!(complete(&p3, &lifted));
    }

    #[test]
    fn lift_rejects_bad_bounds() {
        let c5 = GraphFamily::Cycle { k: 5 }.build().unwrap();
        let base = cert_odd_cycle(2).unwrap();
        assert!(matches!(
            lift_certificate(&c5, &base, &[2; 5], &[2; 5]),
            Err(CertError::Pointwise { vertex: 0, .. })
        ));
        assert!(matches!(
            lift_certificate(&c5, &base, &[3; 5], &[3; 5]),
            Err(CertError::Pointwise { .. })
        ));
    }

    #[test]
    fn scaling() {
        let c5 = GraphFamily::Cycle { k: 5 }.build().unwrap();
        let base = cert_odd_cycle(2).unwrap();
        assert_eq!(scale_certificate(&c5, &base, 1).unwrap().ops, base.ops);
        let twice = scale_certificate(&c5, &base, 2).unwrap();
        assert_eq!((twice.shield[0], twice.target[0]), (6, 4));
        assert!(complete(&c5, &twice));
        assert_eq!(twice.mode, base.mode);
    }

    #[test]
    fn scaled_prefix_stays_legal() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let ops = [Op::shade(0), Op::save(3, 2), Op::save(3, 1)];
        let doubled: Vec<Op> = ops.iter().flat_map(|o| [o.clone(), o.clone()]).collect();
        let st = State::uniform(4, 6, 4).unwrap();
        let r = crate::engine::apply_sequence(&g, &st, &doubled, Mode::Type4, true);
        assert!(r.stopped_at.is_none());
        // after each doubled op the state is twice the single-step state
        let single = crate::engine::apply_sequence(
            &g,
            &State::uniform(4, 3, 2).unwrap(),
            &ops,
            Mode::Type4,
            true,
        );
        let tr = r.trace.unwrap();
        for (i, st1) in single.trace.unwrap().iter().enumerate() {
            let st2 = &tr[2 * i + 1];
            for v in 0..4 {
                assert_eq!(st2.shield(v), 2 * st1.shield(v));
                assert_eq!(st2.target(v), 2 * st1.target(v));
            }
        }
    }

    #[test]
    fn append_pendant_to_c4() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)]).unwrap();
        for t in 1..4 {
            let base = cert_even_cycle(2, t).unwrap();
            let c = cert_append_vertex(&g, 4, &base, t, t).unwrap();
            assert!(complete(&g, &c));
            assert_eq!(&c.ops[..base.ops.len()], &base.ops[..]);
            assert!(matches!(
                cert_append_vertex(&g, 4, &base, t - 1, t),
                Err(CertError::ShieldTooSmall { .. })
            ));
        }
    }

    #[test]
    fn append_to_empty() {
        let base = Certificate::new(Mode::Type4, vec![], vec![], vec![]);
        let c = cert_append_vertex(&Graph::edgeless(1), 0, &base, 0, 3).unwrap();
        assert_eq!(c.ops, vec![Op::shade(0); 3]);
    }

    #[test]
    fn append_in_the_middle_shifts_ids() {
        // z = 1 sits between the two ends of P_3
        let p3 = GraphFamily::Path { k: 3 }.build().unwrap();
        let base = Certificate::new(
            Mode::Type4,
            vec![0, 0],
            vec![1, 1],
            vec![Op::shade(0), Op::shade(1)],
        );
        let c = cert_append_vertex(&p3, 1, &base, 2, 1).unwrap();
        assert_eq!(c.ops, vec![Op::shade(0), Op::shade(2), Op::shade(1)]);
        assert!(complete(&p3, &c));
    }

    #[test]
    fn kcore_lift_cases() {
        // C_5 on 0..5 with a pendant path 4-5-6 and a pendant 7 on 2
        let g = Graph::from_edges(
            8,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (4, 5),
                (5, 6),
                (2, 7),
            ],
        )
        .unwrap();
        let c = cert_kcore_lift(&g, 2, &cert_odd_cycle(2).unwrap(), 3, 2).unwrap();
        assert!(complete(&g, &c));

        let c5 = GraphFamily::Cycle { k: 5 }.build().unwrap();
        let base = cert_odd_cycle(2).unwrap();
        assert_eq!(cert_kcore_lift(&c5, 2, &base, 3, 2).unwrap(), base);

        let tree = Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let empty = Certificate::new(Mode::Type4, vec![], vec![], vec![]);
        let c = cert_kcore_lift(&tree, 2, &empty, 2, 2).unwrap();
        assert!(complete(&tree, &c));
        assert!(c.ops.iter().all(|op| op.save.is_empty()));
        assert!(cert_kcore_lift(&tree, 2, &empty, 1, 2).is_err());
    }

    #[test]
    fn kcore_lift_matches_iterated_append() {
        let mut edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend([(5, 6), (6, 7), (7, 8)]);
        let g = Graph::from_edges(9, &edges).unwrap();
        let base = cert_even_cycle(3, 2).unwrap();
        let via_core = cert_kcore_lift(&g, 2, &base, 3, 2).unwrap();
        let mut cert = base;
        for n in 7..=9 {
            let (h, _) = g.induced_subgraph(&(0..n).collect::<Vec<_>>());
            cert = cert_append_vertex(&h, n - 1, &cert, 3, 2).unwrap();
        }
        assert!(complete(&g, &via_core));
        assert!(complete(&g, &cert));
    }

    #[test]
    fn component_concatenation() {
        let c4 = GraphFamily::Cycle { k: 4 }.build().unwrap();
        let two = c4.disjoint_union(&c4);
        let cert = cert_even_cycle(2, 2).unwrap();
        let c = cert_components(&two, &[cert.clone(), cert.clone()]).unwrap();
        assert_eq!(c.ops.len(), 16);
        assert!(complete(&two, &c));
        assert!(cert_components(&two, &[cert]).is_err());

        let p3k1 = GraphFamily::Path { k: 3 }
            .build()
            .unwrap()
            .disjoint_union(&Graph::edgeless(1));
        let p = Certificate::new(
            Mode::Type4,
            vec![1; 3],
            vec![1; 3],
            [0, 1, 2].map(Op::shade).to_vec(),
        );
        let k = Certificate::new(Mode::Type4, vec![0], vec![1], vec![Op::shade(0)]);
        assert!(complete(&p3k1, &cert_components(&p3k1, &[p, k]).unwrap()));

        let c5 = GraphFamily::Cycle { k: 5 }.build().unwrap();
        let c6 = GraphFamily::Cycle { k: 6 }.build().unwrap();
        let g = c5.disjoint_union(&c6);
        let c = cert_components(
            &g,
            &[cert_odd_cycle(2).unwrap(), cert_even_cycle(3, 2).unwrap()],
        )
        .unwrap();
        assert!(complete(&g, &c));
    }
}
