//! Built-in bounded Dolev-Yao verifier. Explores the abstracted design once
//! per bounds, then answers each confidentiality and authenticity query
//! against the reachability set, attaching a replayable witness to every
//! violation. "satisfied" is claimed only under complete exploration within
//! bounds; a truncated run degrades to "inconclusive_at_bound".

pub mod explore;
pub mod knowledge;

pub use explore::{
    explore, initial_state, injection_candidates, replay, secret_terms, Bounds, ExploreStats,
    GlobalState, ReachabilitySet, ReceivedMsg, SentMsg, StepLabel,
};
pub use knowledge::{saturate, KnowledgeBase, Saturation};

use crate::pi::{AbstractDesign, SecrecyQuery};
use crate::term::Term;
use serde::{Serialize, Serializer};

pub(crate) fn ser_term<S: Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    InconclusiveAtBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub query: String,
    pub status: VerdictStatus,
    pub bounds: Bounds,
    /// Present exactly when the status is `violated`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<StepLabel>>,
}

pub fn check_confidentiality(
    design: &AbstractDesign,
    query: &SecrecyQuery,
    rs: &ReachabilitySet,
) -> Verdict {
    let secrets = secret_terms(design, query, rs.bounds.sessions);
    for (i, st) in rs.states.iter().enumerate() {
        // Secrets are names; a name is derivable exactly when analysis has
        // surfaced it into the knowledge core.
        if secrets.iter().any(|s| st.knowledge.contains(s)) {
            return Verdict {
                query: query.label.clone(),
                status: VerdictStatus::Violated,
                bounds: rs.bounds,
                witness: Some(rs.path(i)),
            };
        }
    }
    Verdict {
        query: query.label.clone(),
        status: if rs.complete {
            VerdictStatus::Satisfied
        } else {
            VerdictStatus::InconclusiveAtBound
        },
        bounds: rs.bounds,
        witness: None,
    }
}

pub fn check_authenticity(
    design: &AbstractDesign,
    query_index: usize,
    rs: &ReachabilitySet,
) -> Verdict {
    let query = &design.correspondence[query_index];
    for (i, st) in rs.states.iter().enumerate() {
        if st.violated[query_index].is_some() {
            return Verdict {
                query: query.label.clone(),
                status: VerdictStatus::Violated,
                bounds: rs.bounds,
                witness: Some(rs.path(i)),
            };
        }
    }
    Verdict {
        query: query.label.clone(),
        status: if rs.complete {
            VerdictStatus::Satisfied
        } else {
            VerdictStatus::InconclusiveAtBound
        },
        bounds: rs.bounds,
        witness: None,
    }
}

/// Explore once and answer every declared query.
pub fn verify(design: &AbstractDesign, bounds: &Bounds) -> (Vec<Verdict>, ExploreStats) {
    let rs = explore(design, bounds);
    let mut verdicts = Vec::new();
    for q in &design.secrecy {
        verdicts.push(check_confidentiality(design, q, &rs));
    }
    for qi in 0..design.correspondence.len() {
        verdicts.push(check_authenticity(design, qi, &rs));
    }
    (verdicts, rs.stats.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_source;
    use crate::pi::abstract_design;

    const KEYDIST: &str = include_str!("../../../../models/keydist.ssec");

    fn design_of(text: &str) -> AbstractDesign {
        let out = parse_source(text, "t.ssec");
        assert!(
            !out.diagnostics.iter().any(|d| d.is_error()),
            "{:?}",
            out.diagnostics
        );
        let diags = crate::model::validate(&out.model);
        assert!(!diags.iter().any(|d| d.is_error()), "{diags:?}");
        abstract_design(&out.model).expect("abstraction")
    }

    fn bounds(sessions: usize, steps: usize, depth: usize) -> Bounds {
        Bounds {
            sessions,
            steps,
            depth,
            max_states: 250_000,
        }
    }

    #[test]
    fn linear_machine_reaches_exactly_three_control_states() {
        let d = design_of(
            "block Solo {\n  attribute a : data\n}\n\
             statemachine Solo {\n  initial state s0\n  state s1\n  state s2\n\
             \x20 transition s0 -> s1\n  transition s1 -> s2\n}\n",
        );
        let rs = explore(&d, &bounds(1, 10, 6));
        assert!(rs.complete);
        assert_eq!(rs.states.len(), 3);
    }

    /// Two blocks exchanging the public constants 1 and 2 over an attacker
    /// channel. The attacker knows both constants from the start, so each
    /// machine progresses independently of the other: the reachable control
    /// configurations are exactly the cross product enumerated by hand.
    #[test]
    fn ping_pong_matches_interleaving_oracle() {
        let d = design_of(
            "block A {\n  attribute y : data\n  port p\n}\n\
             block B {\n  attribute z : data\n  port q\n}\n\
             link A.p B.q : public\n\
             statemachine A {\n  initial state a0\n  state a1\n  state a2\n\
             \x20 transition a0 -> a1 {\n    send p 1\n  }\n\
             \x20 transition a1 -> a2 {\n    receive p y\n    guard y == 2\n  }\n}\n\
             statemachine B {\n  initial state b0\n  state b1\n  state b2\n\
             \x20 transition b0 -> b1 {\n    receive q z\n    guard z == 1\n  }\n\
             \x20 transition b1 -> b2 {\n    send q 2\n  }\n}\n",
        );
        let rs = explore(&d, &bounds(1, 10, 6));
        assert!(rs.complete);
        let controls: std::collections::BTreeSet<(usize, usize)> = rs
            .states
            .iter()
            .map(|s| (s.control[0], s.control[1]))
            .collect();
        let expected: std::collections::BTreeSet<(usize, usize)> = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .collect();
        assert_eq!(controls, expected, "control configurations");
        assert_eq!(rs.states.len(), 9, "one state per control configuration");
    }

    #[test]
    fn keydist_km_reaches_decipher_ok_in_one_session() {
        let d = design_of(KEYDIST);
        let rs = explore(&d, &bounds(1, 20, 6));
        assert!(rs.complete, "exploration must exhaust: {:?}", rs.stats);
        let km = d.block_index("KM").unwrap();
        let decipher_ok = d.blocks[km].state_index("decipherOK").unwrap();
        assert!(
            rs.states.iter().any(|s| s.control[km] == decipher_ok),
            "KM never reached decipherOK"
        );
    }

    #[test]
    fn keydist_properties_hold_in_one_session() {
        let d = design_of(KEYDIST);
        let (verdicts, _) = verify(&d, &bounds(1, 20, 6));
        assert_eq!(verdicts.len(), 2);
        for v in &verdicts {
            assert_eq!(v.status, VerdictStatus::Satisfied, "query {}", v.query);
            assert!(v.witness.is_none());
        }
    }

    fn leak_mutant() -> String {
        let patched = KEYDIST.replace(
            "  transition start -> st1 {",
            "  state leak\n  transition start -> leak {\n    send toKM PSK1\n  }\n  transition start -> st1 {",
        );
        assert_ne!(patched, KEYDIST, "patch anchor must exist");
        patched
    }

    fn nomac_mutant() -> String {
        let patched = KEYDIST.replace(
            "    guard verifyMAC(first(msgauth), second(msgauth), PSK1)\n",
            "",
        );
        assert_ne!(patched, KEYDIST, "patch anchor must exist");
        patched
    }

    #[test]
    fn plaintext_leak_is_violated_with_short_replayable_witness() {
        let d = design_of(&leak_mutant());
        let (verdicts, _) = verify(&d, &bounds(1, 20, 6));
        let conf = verdicts
            .iter()
            .find(|v| v.query.starts_with("Confidentiality"))
            .unwrap();
        assert_eq!(conf.status, VerdictStatus::Violated);
        let witness = conf.witness.as_ref().unwrap();
        assert!(witness.len() <= 3, "witness too long: {witness:#?}");
        // Replaying the witness reproduces the leak.
        let states = replay(&d, &bounds(1, 20, 6), witness).expect("witness replays");
        let last = states.last().unwrap();
        assert!(last.knowledge.contains(&crate::term::Term::fresh("sys_ECU1_PSK1")));
    }

    #[test]
    fn missing_mac_check_is_violated_by_injection() {
        let d = design_of(&nomac_mutant());
        let (verdicts, _) = verify(&d, &bounds(1, 20, 6));
        let auth = verdicts
            .iter()
            .find(|v| v.query.starts_with("Authenticity"))
            .unwrap();
        assert_eq!(auth.status, VerdictStatus::Violated);
        let witness = auth.witness.as_ref().unwrap();
        assert!(
            witness
                .iter()
                .any(|s| s.received.iter().any(|r| r.injected)),
            "expected an injected message in the witness: {witness:#?}"
        );
        // The witness replays to a state with the violation recorded.
        let states = replay(&d, &bounds(1, 20, 6), witness).expect("witness replays");
        assert!(states.last().unwrap().violated.iter().any(Option::is_some));
    }

    #[test]
    fn violations_persist_at_larger_bounds() {
        let d = design_of(&leak_mutant());
        for b in [bounds(1, 20, 4), bounds(1, 30, 6), bounds(2, 20, 6)] {
            let (verdicts, _) = verify(&d, &b);
            let conf = verdicts
                .iter()
                .find(|v| v.query.starts_with("Confidentiality"))
                .unwrap();
            assert_eq!(conf.status, VerdictStatus::Violated, "bounds {b:?}");
        }
    }

    #[test]
    fn private_channel_only_model_is_authentic() {
        let d = design_of(
            "block S {\n  attribute m : nonce\n  port p\n}\n\
             block R {\n  attribute x : data\n  port q\n}\n\
             link S.p R.q : private\n\
             statemachine S {\n  initial state s0\n  state s1\n  transition s0 -> s1 {\n    send p m\n  }\n}\n\
             statemachine R {\n  initial state r0\n  state r1\n  transition r0 -> r1 {\n    receive q x\n  }\n}\n\
             property Authenticity S.s0.m R.r1.x\n",
        );
        let (verdicts, _) = verify(&d, &bounds(2, 20, 6));
        assert_eq!(verdicts[0].status, VerdictStatus::Satisfied);
    }

    #[test]
    fn attribute_never_sent_stays_confidential() {
        let d = design_of(
            "block K {\n  attribute secret : key\n  attribute other : data\n  port p\n}\n\
             block L {\n  attribute y : data\n  port q\n}\n\
             link K.p L.q : public\n\
             statemachine K {\n  initial state s0\n  state s1\n  transition s0 -> s1 {\n    other = 5\n    send p other\n  }\n}\n\
             property Confidentiality K.secret\n",
        );
        let (verdicts, _) = verify(&d, &bounds(2, 20, 6));
        assert_eq!(verdicts[0].status, VerdictStatus::Satisfied);
    }

    #[test]
    fn truncated_exploration_reports_inconclusive() {
        let d = design_of(KEYDIST);
        let tight = Bounds {
            sessions: 1,
            steps: 20,
            depth: 6,
            max_states: 3,
        };
        let (verdicts, stats) = verify(&d, &tight);
        assert!(stats.truncated.is_some());
        assert!(verdicts
            .iter()
            .all(|v| v.status == VerdictStatus::InconclusiveAtBound));
    }
}
