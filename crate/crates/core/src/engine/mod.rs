//! The ShadeSave state machine, sequence replay and certificate checking.

mod state;

pub(crate) use state::{apply_in_place, apply_unchecked};
pub use state::{
    apply_shadesave, is_legal, is_legal_in_mode, ApplyError, IllegalReason, Legality, Mode, Op,
    OpError, State, StateError,
};

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

/// A claimed complete legal sequence for `(G, shield, target)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub shield: Vec<u32>,
    pub target: Vec<u32>,
    pub ops: Vec<Op>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Records which generator produced a certificate and with what parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: serde_json::Value,
}

impl Certificate {
    pub fn new(mode: Mode, shield: Vec<u32>, target: Vec<u32>, ops: Vec<Op>) -> Self {
        Certificate {
            mode,
            shield,
            target,
            ops,
            provenance: None,
        }
    }

    pub fn uniform(mode: Mode, n: usize, s: u32, t: u32, ops: Vec<Op>) -> Self {
        Certificate::new(mode, vec![s; n], vec![t; n], ops)
    }

    pub fn with_provenance(mut self, generator: &str, params: serde_json::Value) -> Self {
        self.provenance = Some(Provenance {
            generator: generator.to_string(),
            params,
        });
        self
    }

    pub fn initial_state(&self, g: &Graph) -> Result<State, StateError> {
        State::for_graph(g, self.shield.clone(), self.target.clone())
    }

    /// The smallest mode the ops fit in.
    pub fn required_mode(&self) -> Mode {
        if self.ops.iter().all(|op| op.save.len() <= 1) {
            Mode::Type4
        } else {
            Mode::Type3
        }
    }
}

/// Why replay stopped before the end of the op list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayFailure {
    Illegal { reason: IllegalReason },
    Malformed { error: OpError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    /// State after the last successfully applied op.
    pub final_state: State,
    /// Output state of every applied op, when requested.
    pub trace: Option<Vec<State>>,
    /// 1-based index of the first op that could not be applied.
    pub stopped_at: Option<(usize, ReplayFailure)>,
}

/// Applies `ops` from `start`, halting at the first op that is illegal in
/// `mode` or malformed.
pub fn apply_sequence(
    g: &Graph,
    start: &State,
    ops: &[Op],
    mode: Mode,
    keep_trace: bool,
) -> Replay {
    let mut st = start.clone();
    let mut trace = keep_trace.then(Vec::new);
    for (i, op) in ops.iter().enumerate() {
        let failure = match is_legal_in_mode(g, &st, op, mode) {
            Ok(Legality::Legal) => None,
            Ok(Legality::Illegal(reason)) => Some(ReplayFailure::Illegal { reason }),
            Err(error) => Some(ReplayFailure::Malformed { error }),
        };
        if let Some(f) = failure {
            return Replay {
                final_state: st,
                trace,
                stopped_at: Some((i + 1, f)),
            };
        }
        apply_in_place(g, &mut st, op);
        if let Some(t) = trace.as_mut() {
            t.push(st.clone());
        }
    }
    Replay {
        final_state: st,
        trace,
        stopped_at: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Complete,
    LegalButIncomplete {
        remaining_target: u64,
    },
    /// `index` is 1-based.
    IllegalAt {
        index: usize,
        failure: ReplayFailure,
    },
    /// The certificate does not describe a state of the graph at all.
    Malformed {
        reason: String,
    },
}

impl Verdict {
    pub fn is_complete(&self) -> bool {
        matches!(self, Verdict::Complete)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub verdict: Verdict,
    pub final_state: Option<State>,
}

/// Replays `cert` on `g` and classifies the outcome. Never panics on bad input.
pub fn verify_certificate(g: &Graph, cert: &Certificate) -> Verification {
    let start = match cert.initial_state(g) {
        Ok(st) if cert.shield.len() == g.n() => st,
        Ok(_) => {
            return Verification {
                verdict: Verdict::Malformed {
                    reason: format!(
                        "shield has {} entries, graph has {}",
                        cert.shield.len(),
                        g.n()
                    ),
                },
                final_state: None,
            }
        }
        Err(e) => {
            return Verification {
                verdict: Verdict::Malformed {
                    reason: e.to_string(),
                },
                final_state: None,
            }
        }
    };
    let replay = apply_sequence(g, &start, &cert.ops, cert.mode, false);
    let verdict = match replay.stopped_at {
        Some((index, failure)) => Verdict::IllegalAt { index, failure },
        None if replay.final_state.is_finished() => {
            // every op lowers the total target by exactly one
            debug_assert_eq!(cert.ops.len() as u64, start.total_target());
            Verdict::Complete
        }
        None => Verdict::LegalButIncomplete {
            remaining_target: replay.final_state.total_target(),
        },
    };
    Verification {
        verdict,
        final_state: Some(replay.final_state),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_c4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn grid_c4_sequence() -> Certificate {
        Certificate::uniform(
            Mode::Type4,
            4,
            3,
            2,
            vec![Op::shade(0), Op::save(3, 2), Op::save(3, 1)],
        )
    }

    #[test]
    fn grid_c4_three_op_replay() {
        let g = grid_c4();
        let cert = grid_c4_sequence();
        let r = apply_sequence(
            &g,
            &cert.initial_state(&g).unwrap(),
            &cert.ops,
            Mode::Type4,
            true,
        );
        assert!(r.stopped_at.is_none());
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), 3);
        let pairs = |st: &State| (0..4).map(|v| st.pair(v)).collect::<Vec<_>>();
        assert_eq!(
            pairs(&trace[0]),
            vec![Some((3, 1)), Some((2, 2)), Some((2, 2)), Some((3, 2))]
        );
        assert_eq!(
            pairs(&trace[1]),
            vec![Some((3, 1)), Some((1, 2)), Some((2, 2)), Some((3, 1))]
        );
        assert_eq!(
            pairs(&r.final_state),
            vec![Some((3, 1)), Some((1, 2)), Some((1, 2)), None]
        );
        assert_eq!(
            verify_certificate(&g, &cert).verdict,
            Verdict::LegalButIncomplete {
                remaining_target: 5
            }
        );
    }

    #[test]
    fn empty_sequence_keeps_state() {
        let g = grid_c4();
        let st = State::uniform(4, 1, 1).unwrap();
        let r = apply_sequence(&g, &st, &[], Mode::Type4, true);
        assert_eq!(r.final_state, st);
        assert_eq!(r.trace.unwrap().len(), 0);
    }

    #[test]
    fn non_neighbor_save_is_reported_at_index() {
        let g = grid_c4();
        let mut cert = grid_c4_sequence();
        // v1 and v4 are not adjacent in this labeling
        cert.ops[1] = Op::save(0, 3);
        assert_eq!(
            verify_certificate(&g, &cert).verdict,
            Verdict::IllegalAt {
                index: 2,
                failure: ReplayFailure::Malformed {
                    error: OpError::NotNeighbor { u: 0, vertex: 3 }
                }
            }
        );
    }

    #[test]
    fn k23_six_op_prefix() {
        let g = crate::graph::GraphFamily::CompleteBipartite { m: 2, n: 3 }
            .build()
            .unwrap();
        let st = State::new(vec![9, 9, 8, 8, 8], vec![6; 5]).unwrap();
        let ops: Vec<Op> = [0, 1]
            .iter()
            .flat_map(|&a| [3, 4, 2].map(|b| Op::save(a, b)))
            .collect();
        let r = apply_sequence(&g, &st, &ops, Mode::Type4, false);
        assert!(r.stopped_at.is_none());
        for a in 0..2 {
            assert_eq!(r.final_state.pair(a), Some((9, 3)));
        }
        for b in 2..5 {
            assert_eq!(r.final_state.pair(b), Some((4, 6)));
        }
    }

    #[test]
    fn malformed_lengths() {
        let g = grid_c4();
        let cert = Certificate::uniform(Mode::Type3, 3, 1, 1, vec![]);
        assert!(matches!(
            verify_certificate(&g, &cert).verdict,
            Verdict::Malformed { .. }
        ));
        let cert = Certificate::new(Mode::Type3, vec![1; 4], vec![1, 0, 1, 1], vec![]);
        assert!(matches!(
            verify_certificate(&g, &cert).verdict,
            Verdict::Malformed { .. }
        ));
    }

    #[test]
    fn json_shape() {
        let cert = Certificate::uniform(Mode::Type4, 1, 0, 1, vec![Op::shade(0)]);
        let v = serde_json::to_value(&cert).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"mode":"type4","shield":[0],"target":[1],"ops":[{"u":0,"save":[]}]})
        );
        let back: Certificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&Graph::edgeless(1), &back)
            .verdict
            .is_complete());
    }
}
