//! Consolidated analysis pipeline and report assembly: one entry point per
//! toolchain phase, shared by the command-line interface and the C bindings.
//! The JSON report schema is versioned; text rendering derives from the same
//! data, so both carry identical findings.

use crate::diag::{has_errors, sort_diagnostics, Diagnostic};
use crate::dy::{Bounds, ExploreStats, Verdict, VerdictStatus};
use crate::model::{trace_requirements, validate, Model, TraceabilityReport};
use crate::partition::{estimate, PartitionReport};
use crate::pi::{abstract_design, check_pi_text, emit_proverif, EmitOptions};
use crate::threats::{achievable, coverage, enumerate_traces, timed_operators, AttackGraph};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Parse several sources and merge them into one model. Parse diagnostics
/// come back alongside; the caller decides whether errors are fatal.
pub fn load_sources(sources: &[(String, String)]) -> (Model, Vec<Diagnostic>) {
    let mut parts = Vec::new();
    let mut diags = Vec::new();
    for (name, text) in sources {
        let out = crate::dsl::parse_source(text, name);
        parts.push(out.model);
        diags.extend(out.diagnostics);
    }
    let model = Model::merge(parts);
    sort_diagnostics(&mut diags);
    (model, diags)
}

/// Read, parse and merge model files. I/O problems become error diagnostics.
pub fn load_files(paths: &[impl AsRef<Path>]) -> (Model, Vec<Diagnostic>) {
    let mut sources = Vec::new();
    let mut diags = Vec::new();
    for p in paths {
        let path = p.as_ref();
        match std::fs::read_to_string(path) {
            Ok(text) => sources.push((path.display().to_string(), text)),
            Err(e) => diags.push(Diagnostic::error(
                format!("cannot read `{}`: {e}", path.display()),
                None,
            )),
        }
    }
    let (model, mut more) = load_sources(&sources);
    diags.append(&mut more);
    sort_diagnostics(&mut diags);
    (model, diags)
}

/// Parse + validate; returns the model with all diagnostics, sorted.
pub fn check(paths: &[impl AsRef<Path>]) -> (Model, Vec<Diagnostic>) {
    let (model, mut diags) = load_files(paths);
    if !has_errors(&diags) {
        diags.extend(validate(&model));
        sort_diagnostics(&mut diags);
    }
    (model, diags)
}

#[derive(Debug, Clone, Serialize)]
pub struct RootAnalysis {
    pub root: String,
    pub achievable: bool,
    /// Up to the requested number of minimal valid orderings.
    pub traces: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackAnalysis {
    pub coverage: crate::threats::CoverageReport,
    pub roots: Vec<RootAnalysis>,
    pub timed_operators: Vec<crate::threats::TimedOperator>,
}

pub fn analyze_attacks(model: &Model, max_traces: usize) -> AttackAnalysis {
    let graph = AttackGraph::build(model);
    let cov = coverage(model);
    let mut roots = Vec::new();
    let all_leaves: BTreeSet<String> = graph.leaves().into_iter().collect();
    for rc in &cov.roots {
        let ach = achievable(&graph, &rc.root, &all_leaves).unwrap_or(false);
        let traces = enumerate_traces(&graph, &rc.root, max_traces)
            .map(|ts| ts.into_iter().map(|t| t.0).collect())
            .unwrap_or_default();
        roots.push(RootAnalysis {
            root: rc.root.clone(),
            achievable: ach,
            traces,
        });
    }
    AttackAnalysis {
        coverage: cov,
        roots,
        timed_operators: timed_operators(model),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationOutcome {
    pub bounds: Bounds,
    pub verdicts: Vec<Verdict>,
    pub stats: ExploreStats,
}

impl VerificationOutcome {
    pub fn all_satisfied(&self) -> bool {
        self.verdicts
            .iter()
            .all(|v| v.status == VerdictStatus::Satisfied)
    }
}

/// Abstract and verify every declared property with the built-in engine.
pub fn run_verification(model: &Model, bounds: &Bounds) -> Result<VerificationOutcome, Vec<Diagnostic>> {
    let design = abstract_design(model)?;
    let (verdicts, stats) = crate::dy::verify(&design, bounds);
    Ok(VerificationOutcome {
        bounds: *bounds,
        verdicts,
        stats,
    })
}

/// Emit the applied-pi text and run the internal self-check. A self-check
/// failure is a generator bug and is reported as such.
pub fn export_pi(model: &Model, injective: bool) -> Result<String, Vec<Diagnostic>> {
    let design = abstract_design(model)?;
    let text = emit_proverif(&design, EmitOptions { injective });
    if let Err(errors) = check_pi_text(&text) {
        return Err(errors
            .into_iter()
            .map(|e| Diagnostic::error(format!("generated specification fails self-check: {e}"), None))
            .collect());
    }
    Ok(text)
}

#[derive(Debug, Clone, Serialize)]
pub struct PiExportSummary {
    pub self_check: String,
    pub bytes: usize,
    pub queries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalProverif>,
}

/// Outcome of running an externally installed prover on the emitted text.
#[derive(Debug, Clone, Serialize)]
pub struct ExternalProverif {
    pub command: String,
    pub status: String,
    pub results: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub inputs: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub traceability: TraceabilityReport,
    pub attacks: AttackAnalysis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationOutcome>,
    pub partitioning: PartitionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_export: Option<PiExportSummary>,
}

impl Report {
    /// Exit-code contract: any violated or inconclusive query, or any
    /// uncovered root attack, is a finding.
    pub fn has_findings(&self) -> bool {
        if self.attacks.coverage.uncovered > 0 {
            return true;
        }
        match &self.verification {
            Some(v) => !v.all_satisfied(),
            None => false,
        }
    }
}

pub fn build_report(
    inputs: Vec<String>,
    model: &Model,
    mut diagnostics: Vec<Diagnostic>,
    bounds: &Bounds,
    injective: bool,
    max_traces: usize,
) -> Report {
    let traceability = trace_requirements(model);
    let attacks = analyze_attacks(model, max_traces);
    let verification = run_verification(model, bounds).ok();
    let (partitioning, part_warnings) = estimate(model);
    diagnostics.extend(part_warnings);
    if verification.is_none() {
        if let Err(errs) = abstract_design(model) {
            diagnostics.extend(errs);
        }
    }
    sort_diagnostics(&mut diagnostics);
    let pi_export = export_pi(model, injective).ok().map(|text| {
        let design = abstract_design(model).expect("export succeeded");
        PiExportSummary {
            self_check: "passed".to_string(),
            bytes: text.len(),
            queries: design.secrecy.len() + design.correspondence.len(),
            external: None,
        }
    });
    Report {
        schema_version: SCHEMA_VERSION,
        inputs,
        diagnostics,
        traceability,
        attacks,
        verification,
        partitioning,
        pi_export,
    }
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

pub fn render_verdicts(out: &mut String, v: &VerificationOutcome) {
    let _ = writeln!(
        out,
        "verification (sessions={}, steps={}, depth={}): {} states explored",
        v.bounds.sessions, v.bounds.steps, v.bounds.depth, v.stats.states
    );
    for verdict in &v.verdicts {
        let status = match verdict.status {
            VerdictStatus::Satisfied => "satisfied",
            VerdictStatus::Violated => "VIOLATED",
            VerdictStatus::InconclusiveAtBound => "inconclusive at bound",
        };
        let _ = writeln!(out, "  {status:<22} {}", verdict.query);
        if let Some(witness) = &verdict.witness {
            for (i, step) in witness.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "    {}. [session {}] {} {}",
                    i + 1,
                    step.session,
                    step.block,
                    step.transition
                );
                for r in &step.received {
                    let _ = writeln!(
                        out,
                        "         recv {} <- {}{}",
                        r.channel,
                        r.term,
                        if r.injected { "  (injected)" } else { "" }
                    );
                }
                for s in &step.sent {
                    let _ = writeln!(out, "         send {} -> {}", s.channel, s.term);
                }
            }
        }
    }
    if let Some(t) = &v.stats.truncated {
        let _ = writeln!(out, "  note: exploration truncated ({t})");
    }
}

pub fn render_attacks(out: &mut String, a: &AttackAnalysis) {
    let _ = writeln!(
        out,
        "attack coverage: {} root(s), {} covered, {} uncovered",
        a.coverage.roots.len(),
        a.coverage.covered,
        a.coverage.uncovered
    );
    for r in &a.coverage.roots {
        let mark = if r.covered { "covered  " } else { "UNCOVERED" };
        let reqs = if r.requirements.is_empty() {
            String::new()
        } else {
            format!("  <- {}", r.requirements.join(", "))
        };
        let _ = writeln!(out, "  {mark} {} (asset {}){reqs}", r.root, r.asset);
    }
    for r in &a.roots {
        if !r.traces.is_empty() {
            let _ = writeln!(out, "  traces of {}:", r.root);
            for t in &r.traces {
                let _ = writeln!(out, "    {}", t.join(" ; "));
            }
        } else if !r.achievable {
            let _ = writeln!(out, "  {} is not achievable from its leaves", r.root);
        }
    }
    for t in &a.timed_operators {
        let _ = writeln!(
            out,
            "  note: operator {} ({}) carries max duration {} (ordering only, no timing semantics)",
            t.operator, t.kind, t.within
        );
    }
}

pub fn render_traceability(out: &mut String, t: &TraceabilityReport) {
    let _ = writeln!(
        out,
        "traceability: {} requirement(s) traced, {} untraced, {} loose propert{}",
        t.traced.len(),
        t.untraced_requirements.len(),
        t.untraced_properties.len(),
        if t.untraced_properties.len() == 1 { "y" } else { "ies" }
    );
    for tr in &t.traced {
        for e in &tr.entries {
            let _ = writeln!(out, "  {} <- {} ({})", tr.id, e.element, e.kind);
        }
    }
    for u in &t.untraced_requirements {
        let _ = writeln!(out, "  untraced requirement: {u}");
    }
    for u in &t.untraced_properties {
        let _ = writeln!(out, "  property traces to nothing: {u}");
    }
}

pub fn render_partitioning(out: &mut String, p: &PartitionReport) {
    let _ = writeln!(out, "partitioning estimates ({}):", p.assumption);
    for (bus, load) in &p.bus_loads {
        let flag = if *load > 1.0 { "  OVERLOAD" } else { "" };
        let _ = writeln!(out, "  bus {bus}: load {load:.6}{flag}");
    }
    for (node, util) in &p.cpu_utilization {
        let flag = if *util > 1.0 { "  OVERLOAD" } else { "" };
        let _ = writeln!(out, "  node {node}: utilization {util:.6}{flag}");
    }
    for (ch, lat) in &p.channel_latencies {
        let _ = writeln!(out, "  channel {ch}: latency {lat:.9} s");
    }
}

pub fn render_report_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "inputs: {}", report.inputs.join(", "));
    for d in &report.diagnostics {
        let _ = writeln!(out, "{d}");
    }
    render_traceability(&mut out, &report.traceability);
    render_attacks(&mut out, &report.attacks);
    if let Some(v) = &report.verification {
        render_verdicts(&mut out, v);
    }
    render_partitioning(&mut out, &report.partitioning);
    if let Some(pi) = &report.pi_export {
        let _ = writeln!(
            out,
            "pi export: self-check {}, {} bytes, {} quer{}",
            pi.self_check,
            pi.bytes,
            pi.queries,
            if pi.queries == 1 { "y" } else { "ies" }
        );
        if let Some(ext) = &pi.external {
            let _ = writeln!(out, "  external prover ({}): {}", ext.command, ext.status);
            for r in &ext.results {
                let _ = writeln!(out, "    {r}");
            }
        }
    }
    out
}
