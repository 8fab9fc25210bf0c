//! Requirement traceability: which security requirements are refined into
//! verifiable properties or knowledge pragmas, and which are left hanging.

use super::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    /// "confidentiality", "authenticity" or "knowledge".
    pub kind: String,
    /// Human-readable description of the tracing element.
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TracedRequirement {
    pub id: String,
    pub title: String,
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceabilityReport {
    /// Security requirements with at least one tracing element.
    pub traced: Vec<TracedRequirement>,
    /// Security requirements nothing traces to.
    pub untraced_requirements: Vec<String>,
    /// Properties and pragmas that trace to nothing.
    pub untraced_properties: Vec<String>,
}

pub fn trace_requirements(model: &Model) -> TraceabilityReport {
    let mut traced: Vec<TracedRequirement> = model
        .requirements
        .iter()
        .filter(|r| r.kind.is_security())
        .map(|r| TracedRequirement {
            id: r.id.clone(),
            title: r.title.clone(),
            entries: Vec::new(),
        })
        .collect();
    let mut untraced_properties = Vec::new();

    let mut record = |target: &Option<String>, kind: &str, element: String| {
        match target {
            Some(req) => {
                if let Some(t) = traced.iter_mut().find(|t| &t.id == req) {
                    t.entries.push(TraceEntry {
                        kind: kind.to_string(),
                        element,
                    });
                } else {
                    // Dangling or non-security target; the validator reports
                    // dangling ids, here it simply does not count as a trace.
                    untraced_properties.push(element);
                }
            }
            None => untraced_properties.push(element),
        }
    };

    for c in &model.confidentiality {
        record(&c.traces_to, "confidentiality", c.label());
    }
    for a in &model.authenticity {
        record(&a.traces_to, "authenticity", a.label());
    }
    for p in &model.pragmas {
        let members: Vec<String> = p.members.iter().map(|(b, a)| format!("{b}.{a}")).collect();
        let element = format!(
            "{} {}",
            match p.scope {
                KnowledgeScope::System => "InitialSystemKnowledge",
                KnowledgeScope::Session => "InitialSessionKnowledge",
            },
            members.join(" ")
        );
        match &p.traces_to {
            Some(_) => record(&p.traces_to, "knowledge", element),
            None => {
                // Untagged knowledge pragmas are setup, not property
                // refinements; they are not reported as untraced.
            }
        }
    }

    let untraced_requirements = traced
        .iter()
        .filter(|t| t.entries.is_empty())
        .map(|t| t.id.clone())
        .collect();
    traced.retain(|t| !t.entries.is_empty());

    TraceabilityReport {
        traced,
        untraced_requirements,
        untraced_properties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_source;

    fn model(text: &str) -> Model {
        let out = parse_source(text, "t.ssec");
        assert!(
            !out.diagnostics.iter().any(|d| d.is_error()),
            "{:?}",
            out.diagnostics
        );
        out.model
    }

    const BASE: &str = "requirement ConfidentialityOfFirmwareData {\n  kind confidentiality\n  title \"Confidentiality of firmware data\"\n}\n\
                        requirement FlashAccess {\n  kind access_control\n}\n\
                        block ECU1 {\n  attribute PSK1 : key\n}\n";

    #[test]
    fn property_trace_marks_requirement_covered() {
        let m = model(&format!(
            "{BASE}property Confidentiality ECU1.PSK1 traces ConfidentialityOfFirmwareData\n"
        ));
        let report = trace_requirements(&m);
        assert_eq!(report.traced.len(), 1);
        assert_eq!(report.traced[0].id, "ConfidentialityOfFirmwareData");
        assert_eq!(report.untraced_requirements, vec!["FlashAccess".to_string()]);
        assert!(report.untraced_properties.is_empty());
    }

    #[test]
    fn no_properties_means_everything_untraced() {
        let m = model(BASE);
        let report = trace_requirements(&m);
        assert!(report.traced.is_empty());
        assert_eq!(report.untraced_requirements.len(), 2);
    }

    #[test]
    fn two_properties_fan_in_to_one_requirement() {
        let m = model(&format!(
            "{BASE}block KM {{\n  attribute PSK1 : key\n}}\n\
             property Confidentiality ECU1.PSK1 traces ConfidentialityOfFirmwareData\n\
             property Confidentiality KM.PSK1 traces ConfidentialityOfFirmwareData\n"
        ));
        let report = trace_requirements(&m);
        assert_eq!(report.traced.len(), 1);
        assert_eq!(report.traced[0].entries.len(), 2);
    }

    #[test]
    fn untagged_property_is_reported_untraced() {
        let m = model(&format!("{BASE}property Confidentiality ECU1.PSK1\n"));
        let report = trace_requirements(&m);
        assert_eq!(
            report.untraced_properties,
            vec!["Confidentiality ECU1.PSK1".to_string()]
        );
    }
}
