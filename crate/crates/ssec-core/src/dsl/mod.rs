//! Textual language for all four model views: lexer, parser, serializer.
//!
//! One `.ssec` file may contain any mix of views; several files merge into a
//! single model. Knowledge and property lines accept both the keyworded form
//! (`pragma InitialSystemKnowledge ...`, `property Confidentiality ...`) and
//! the `#`-prefixed note form (`# InitialSystemKnowledge ...`), so annotation
//! lines written in that style paste in unchanged.

mod lexer;
mod parser;
mod serializer;

pub use parser::{parse_source, ParseOutcome};
pub use serializer::{expr as serialize_expr, serialize_model};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::has_errors;
    use crate::model::*;

    fn parse_ok(text: &str) -> Model {
        let out = parse_source(text, "test.ssec");
        assert!(
            !has_errors(&out.diagnostics),
            "unexpected parse errors: {:?}",
            out.diagnostics
        );
        out.model
    }

    #[test]
    fn empty_file_parses_to_empty_model() {
        let out = parse_source("", "empty.ssec");
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.model, Model::default());
    }

    #[test]
    fn knowledge_pragma_keyword_form() {
        let m = parse_ok("pragma InitialSystemKnowledge ECU1.PSK1 KM.PSK1\n");
        assert_eq!(m.pragmas.len(), 1);
        let p = &m.pragmas[0];
        assert_eq!(p.scope, KnowledgeScope::System);
        assert_eq!(
            p.members,
            vec![
                ("ECU1".to_string(), "PSK1".to_string()),
                ("KM".to_string(), "PSK1".to_string())
            ]
        );
    }

    #[test]
    fn knowledge_pragma_hash_form() {
        let m = parse_ok("# InitialSessionKnowledge ECU1.KS\n");
        assert_eq!(m.pragmas.len(), 1);
        assert_eq!(m.pragmas[0].scope, KnowledgeScope::Session);
    }

    #[test]
    fn authenticity_property_line() {
        let m = parse_ok("property Authenticity ECU1.st1.msg KM.decipherOK.msgauth\n");
        assert_eq!(m.authenticity.len(), 1);
        let a = &m.authenticity[0];
        assert_eq!(
            a.sender,
            AuthAnchor {
                block: "ECU1".into(),
                state: "st1".into(),
                message: "msg".into()
            }
        );
        assert_eq!(
            a.receiver,
            AuthAnchor {
                block: "KM".into(),
                state: "decipherOK".into(),
                message: "msgauth".into()
            }
        );
    }

    #[test]
    fn confidentiality_hash_form_matches_note_syntax() {
        let m = parse_ok("# Confidentiality ECU1.PSK1\n");
        assert_eq!(m.confidentiality.len(), 1);
        assert_eq!(m.confidentiality[0].block, "ECU1");
        assert_eq!(m.confidentiality[0].attribute, "PSK1");
    }

    #[test]
    fn state_machine_actions() {
        let m = parse_ok(
            "statemachine KM {\n\
             \x20 initial state idle\n\
             \x20 state decipherOK\n\
             \x20 transition idle -> decipherOK {\n\
             \x20   receive fromECU1 msgauth\n\
             \x20   guard verifyMAC(first(msgauth), second(msgauth), PSK1)\n\
             \x20   msg8 = MAC(msg1, PSK1)\n\
             \x20   send toECUN msg8\n\
             \x20 }\n\
             }\n",
        );
        let sm = &m.machines[0];
        assert_eq!(sm.owner, "KM");
        assert_eq!(sm.initial_state(), Some("idle"));
        let tr = &sm.transitions[0];
        assert_eq!(tr.guards.len(), 1);
        assert_eq!(tr.actions.len(), 3);
        match &tr.actions[1] {
            Action::Assign { attr, value } => {
                assert_eq!(attr, "msg8");
                assert_eq!(
                    value,
                    &Expr::call(
                        "MAC",
                        vec![Expr::Attr("msg1".into()), Expr::Attr("PSK1".into())]
                    )
                );
            }
            other => panic!("expected assign, got {other:?}"),
        }
    }

    #[test]
    fn transition_timing_is_metadata() {
        let m = parse_ok(
            "statemachine B {\n  initial state a\n  state b\n  transition a -> b {\n    after(5, 10)\n  }\n}\n",
        );
        assert_eq!(m.machines[0].transitions[0].timing, Some((5, 10)));
    }

    #[test]
    fn parse_errors_have_spans_within_input() {
        let text = "block B {\n  attribute x :\n}\nlink A.p B.q : publicX\n";
        let out = parse_source(text, "bad.ssec");
        assert!(has_errors(&out.diagnostics));
        let lines = text.lines().count() as u32;
        for d in &out.diagnostics {
            let span = d.span.as_ref().expect("parser diagnostics carry spans");
            assert!(span.start_line >= 1 && span.start_line <= lines + 1);
            assert!(span.start_col >= 1);
        }
    }

    #[test]
    fn recovery_reports_multiple_errors() {
        let text = "requirement {\n}\nblock {\n}\nasset A {\n  attack X\n}\n";
        let out = parse_source(text, "bad.ssec");
        let errors = out.diagnostics.iter().filter(|d| d.is_error()).count();
        assert!(errors >= 2, "expected both bad declarations reported: {:?}", out.diagnostics);
        // The well-formed trailing declaration still parsed.
        assert_eq!(out.model.attack_groups.len(), 1);
    }

    #[test]
    fn serialize_then_parse_is_fixed_point() {
        let text = "block ECU1 {\n  attribute PSK1 : key\n  method MAC(2) : mac\n  port toKM\n}\n\n\
                    statemachine ECU1 {\n  initial state start\n  state st1\n  transition start -> st1 {\n    msg = MAC(msg, PSK1)\n  }\n}\n\n\
                    pragma InitialSystemKnowledge ECU1.PSK1\n";
        let m1 = parse_ok(text);
        let s1 = serialize_model(&m1);
        let m2 = parse_ok(&s1);
        let s2 = serialize_model(&m2);
        assert_eq!(s1, s2, "second round-trip must be byte-identical");
        let (mut a, mut b) = (m1, m2);
        a.strip_spans();
        b.strip_spans();
        assert_eq!(a, b);
    }

    #[test]
    fn minimal_block_serialization() {
        let m = parse_ok("block Empty {\n}\n");
        assert_eq!(serialize_model(&m), "block Empty {\n}\n");
    }

    #[test]
    fn non_ascii_text_survives() {
        let text = "requirement R1 {\n  kind integrity\n  title \"données protégées — überprüft\"\n}\n";
        let m = parse_ok(text);
        assert_eq!(m.requirements[0].title, "données protégées — überprüft");
        let m2 = parse_ok(&serialize_model(&m));
        assert_eq!(m2.requirements[0].title, "données protégées — überprüft");
    }

    #[test]
    fn expression_precedence_round_trips() {
        let m = parse_ok(
            "statemachine B {\n  initial state a\n  state b\n  transition a -> b {\n    x = a + b * c - (d - e)\n    guard x == y + 1\n  }\n}\n",
        );
        let s1 = serialize_model(&m);
        let m2 = parse_ok(&s1);
        let (mut a, mut b) = (m, m2);
        a.strip_spans();
        b.strip_spans();
        assert_eq!(a, b);
    }
}
