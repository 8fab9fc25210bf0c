//! Attack-graph semantics: root-attack achievability under logical and
//! temporal operators, enumeration of valid attack orderings, and coverage
//! of root attacks by linked requirements.
//!
//! An execution is an ordering of distinct elementary (leaf) attacks. Each
//! graph node becomes *achieved* at the step where its constraint is first
//! satisfied: a leaf when it executes, OR when its first input is achieved,
//! AND when its last input is achieved, SEQUENCE when all inputs are achieved
//! in listed completion order, BEFORE(a, b) / AFTER(a, b) when both inputs
//! are achieved with a completing first / last respectively. Cross-referenced
//! attack instances in other asset diagrams are treated as identity aliases.

use crate::model::{AttackOp, Model};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThreatError {
    #[error("unknown attack `{0}`")]
    UnknownRoot(String),
    #[error("attack `{0}` is not tagged as a root attack")]
    NotRoot(String),
    #[error("attack operator graph has a cycle through `{0}`")]
    CyclicGraph(String),
}

/// Ordering of elementary attacks achieving some root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AttackTrace(pub Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootCoverage {
    pub root: String,
    pub asset: String,
    pub covered: bool,
    /// Requirements linked anywhere in the root's operator subtree.
    pub requirements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub roots: Vec<RootCoverage>,
    pub covered: usize,
    pub uncovered: usize,
}

/// Temporal operator metadata surfaced in reports; attack steps carry no
/// timing semantics beyond ordering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimedOperator {
    pub operator: String,
    pub kind: String,
    pub within: u64,
}

#[derive(Debug, Clone)]
struct NodeInfo {
    asset: String,
    is_root: bool,
    linked: BTreeSet<String>,
    producer: Option<String>,
}

#[derive(Debug, Clone)]
struct OpInfo {
    op: AttackOp,
    inputs: Vec<String>,
}

/// Attack view resolved for analysis: aliases merged, inputs canonicalized.
pub struct AttackGraph {
    nodes: BTreeMap<String, NodeInfo>,
    ops: BTreeMap<String, OpInfo>,
    canon: BTreeMap<String, String>,
}

impl AttackGraph {
    pub fn build(model: &Model) -> AttackGraph {
        // Union-find over cross references; the canonical representative is
        // the lexicographically least id of the alias class.
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        for (_, a) in model.attack_nodes() {
            parent.insert(a.id.clone(), a.id.clone());
        }
        fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
            let p = parent.get(x).cloned().unwrap_or_else(|| x.to_string());
            if p == x {
                return p;
            }
            let root = find(parent, &p);
            parent.insert(x.to_string(), root.clone());
            root
        }
        for (_, a) in model.attack_nodes() {
            for x in &a.cross_refs {
                if parent.contains_key(x) {
                    let ra = find(&mut parent, &a.id);
                    let rx = find(&mut parent, x);
                    if ra != rx {
                        let (keep, drop) = if ra < rx { (ra, rx) } else { (rx, ra) };
                        parent.insert(drop, keep);
                    }
                }
            }
        }
        let mut canon: BTreeMap<String, String> = BTreeMap::new();
        let ids: Vec<String> = parent.keys().cloned().collect();
        for id in ids {
            let r = find(&mut parent, &id);
            canon.insert(id, r);
        }

        let mut nodes: BTreeMap<String, NodeInfo> = BTreeMap::new();
        for (asset, a) in model.attack_nodes() {
            let c = canon.get(&a.id).cloned().unwrap_or_else(|| a.id.clone());
            let entry = nodes.entry(c).or_insert_with(|| NodeInfo {
                asset: asset.to_string(),
                is_root: false,
                linked: BTreeSet::new(),
                producer: None,
            });
            entry.is_root |= a.is_root;
            entry
                .linked
                .extend(a.linked_requirements.iter().cloned());
        }

        let mut ops: BTreeMap<String, OpInfo> = BTreeMap::new();
        for (_, op) in model.attack_operators() {
            let inputs = op
                .inputs
                .iter()
                .map(|i| canon.get(i).cloned().unwrap_or_else(|| i.clone()))
                .collect();
            ops.insert(
                op.id.clone(),
                OpInfo {
                    op: op.op,
                    inputs,
                },
            );
            let out = canon
                .get(&op.output)
                .cloned()
                .unwrap_or_else(|| op.output.clone());
            if let Some(n) = nodes.get_mut(&out) {
                n.producer = Some(op.id.clone());
            }
        }

        AttackGraph { nodes, ops, canon }
    }

    pub fn canonical(&self, id: &str) -> String {
        self.canon.get(id).cloned().unwrap_or_else(|| id.to_string())
    }

    pub fn roots(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.is_root)
            .map(|(id, _)| id.as_str())
    }

    pub fn is_leaf(&self, id: &str) -> bool {
        self.nodes
            .get(id)
            .map(|n| n.producer.is_none())
            .unwrap_or(false)
    }

    pub fn leaves(&self) -> Vec<String> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.producer.is_none())
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Leaves reachable downward from `root` through its operator subtree.
    pub fn relevant_leaves(&self, root: &str) -> Result<Vec<String>, ThreatError> {
        let mut out = BTreeSet::new();
        let mut path = BTreeSet::new();
        self.descend(root, &mut out, &mut path)?;
        Ok(out.into_iter().collect())
    }

    fn descend(
        &self,
        id: &str,
        out: &mut BTreeSet<String>,
        path: &mut BTreeSet<String>,
    ) -> Result<(), ThreatError> {
        if !path.insert(id.to_string()) {
            return Err(ThreatError::CyclicGraph(id.to_string()));
        }
        if let Some(node) = self.nodes.get(id) {
            match &node.producer {
                None => {
                    out.insert(id.to_string());
                }
                Some(op) => self.descend(op, out, path)?,
            }
        } else if let Some(op) = self.ops.get(id) {
            for i in op.inputs.clone() {
                self.descend(&i, out, path)?;
            }
        }
        path.remove(id);
        Ok(())
    }

    /// All canonical attack nodes in the operator subtree of `root`,
    /// including `root` itself.
    fn subtree_nodes(&self, root: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![root.to_string()];
        while let Some(id) = stack.pop() {
            if let Some(node) = self.nodes.get(&id) {
                if !out.insert(id.clone()) {
                    continue;
                }
                if let Some(op) = &node.producer {
                    stack.push(op.clone());
                }
            } else if let Some(op) = self.ops.get(&id) {
                stack.extend(op.inputs.iter().cloned());
            }
        }
        out
    }
}

/// Achievement status of one graph node during an incremental execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    /// Achieved at the given 1-based step.
    At(usize),
    /// Not yet achieved, may still be; any future completion happens at a
    /// later step than everything achieved so far.
    Pending,
    /// Can never be achieved by extending the current execution.
    Dead,
}

fn status(
    graph: &AttackGraph,
    id: &str,
    placed: &BTreeMap<&str, usize>,
    enabled: &BTreeSet<String>,
    remaining: &BTreeSet<&str>,
) -> Status {
    if let Some(node) = graph.nodes.get(id) {
        match &node.producer {
            None => {
                if let Some(&t) = placed.get(id) {
                    Status::At(t)
                } else if remaining.contains(id) && enabled.contains(id) {
                    Status::Pending
                } else {
                    Status::Dead
                }
            }
            Some(op) => status(graph, op, placed, enabled, remaining),
        }
    } else if let Some(op) = graph.ops.get(id) {
        let stats: Vec<Status> = op
            .inputs
            .iter()
            .map(|i| status(graph, i, placed, enabled, remaining))
            .collect();
        match op.op {
            AttackOp::Or => {
                let best = stats
                    .iter()
                    .filter_map(|s| match s {
                        Status::At(t) => Some(*t),
                        _ => None,
                    })
                    .min();
                match best {
                    Some(t) => Status::At(t),
                    None if stats.iter().any(|s| *s == Status::Pending) => Status::Pending,
                    None => Status::Dead,
                }
            }
            AttackOp::And => {
                if stats.iter().any(|s| *s == Status::Dead) {
                    Status::Dead
                } else if stats.iter().all(|s| matches!(s, Status::At(_))) {
                    let t = stats
                        .iter()
                        .map(|s| match s {
                            Status::At(t) => *t,
                            _ => unreachable!(),
                        })
                        .max()
                        .unwrap_or(0);
                    Status::At(t)
                } else {
                    Status::Pending
                }
            }
            AttackOp::Sequence => ordered_status(&stats, false),
            AttackOp::Before => ordered_status(&stats, false),
            AttackOp::After => ordered_status(&stats, true),
        }
    } else {
        Status::Dead
    }
}

/// Status of an operator demanding strictly increasing completion of its
/// inputs in listed order (`reversed` flips the demanded order, which turns
/// BEFORE semantics into AFTER).
fn ordered_status(stats: &[Status], reversed: bool) -> Status {
    let seq: Vec<Status> = if reversed {
        stats.iter().rev().copied().collect()
    } else {
        stats.to_vec()
    };
    if seq.iter().any(|s| *s == Status::Dead) {
        return Status::Dead;
    }
    // A later input already achieved while an earlier one is pending can no
    // longer be preceded: future completions always come later.
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            match (seq[i], seq[j]) {
                (Status::At(ti), Status::At(tj)) if ti >= tj => return Status::Dead,
                (Status::Pending, Status::At(_)) => return Status::Dead,
                _ => {}
            }
        }
    }
    if seq.iter().all(|s| matches!(s, Status::At(_))) {
        let t = seq
            .iter()
            .map(|s| match s {
                Status::At(t) => *t,
                _ => unreachable!(),
            })
            .max()
            .unwrap_or(0);
        Status::At(t)
    } else {
        Status::Pending
    }
}

fn check_root(graph: &AttackGraph, root: &str) -> Result<String, ThreatError> {
    let c = graph.canonical(root);
    match graph.nodes.get(&c) {
        None => Err(ThreatError::UnknownRoot(root.to_string())),
        Some(n) if !n.is_root => Err(ThreatError::NotRoot(root.to_string())),
        Some(_) => Ok(c),
    }
}

/// Can `root` be achieved by some ordering of the enabled elementary attacks?
pub fn achievable(
    graph: &AttackGraph,
    root: &str,
    enabled: &BTreeSet<String>,
) -> Result<bool, ThreatError> {
    let root = check_root(graph, root)?;
    let enabled: BTreeSet<String> = enabled.iter().map(|e| graph.canonical(e)).collect();
    let relevant: Vec<String> = graph
        .relevant_leaves(&root)?
        .into_iter()
        .filter(|l| enabled.contains(l))
        .collect();
    let mut placed: BTreeMap<&str, usize> = BTreeMap::new();
    let mut remaining: BTreeSet<&str> = relevant.iter().map(String::as_str).collect();
    Ok(search(graph, &root, &enabled, &mut placed, &mut remaining))
}

fn search<'a>(
    graph: &AttackGraph,
    root: &str,
    enabled: &BTreeSet<String>,
    placed: &mut BTreeMap<&'a str, usize>,
    remaining: &mut BTreeSet<&'a str>,
) -> bool {
    match status(graph, root, placed, enabled, remaining) {
        Status::At(_) => return true,
        Status::Dead => return false,
        Status::Pending => {}
    }
    let candidates: Vec<&str> = remaining.iter().copied().collect();
    for leaf in candidates {
        let step = placed.len() + 1;
        placed.insert(leaf, step);
        remaining.remove(leaf);
        if search(graph, root, enabled, placed, remaining) {
            return true;
        }
        placed.remove(leaf);
        remaining.insert(leaf);
    }
    false
}

/// Up to `max` distinct valid orderings of minimal satisfying leaf sets,
/// lexicographically sorted. Empty exactly when the root is unachievable
/// with every leaf enabled.
pub fn enumerate_traces(
    graph: &AttackGraph,
    root: &str,
    max: usize,
) -> Result<Vec<AttackTrace>, ThreatError> {
    let root = check_root(graph, root)?;
    let relevant = graph.relevant_leaves(&root)?;
    let n = relevant.len();
    let mut minimal_sets: Vec<BTreeSet<String>> = Vec::new();
    // Subsets in increasing size order, so supersets of found minimal sets
    // are skipped without a containment scan over everything.
    let mut masks: Vec<u32> = (0u32..(1 << n)).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let set: BTreeSet<String> = relevant
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.clone())
            .collect();
        if minimal_sets.iter().any(|m| m.is_subset(&set)) {
            continue;
        }
        if achievable(graph, &root, &set)? {
            minimal_sets.push(set);
        }
    }

    let mut traces: Vec<AttackTrace> = Vec::new();
    for set in &minimal_sets {
        let leaves: Vec<String> = set.iter().cloned().collect();
        permute(&leaves, &mut Vec::new(), &mut |order| {
            let placed: BTreeMap<&str, usize> = order
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i + 1))
                .collect();
            let remaining = BTreeSet::new();
            if matches!(
                status(graph, &root, &placed, set, &remaining),
                Status::At(_)
            ) {
                traces.push(AttackTrace(order.to_vec()));
            }
        });
    }
    traces.sort();
    traces.dedup();
    traces.truncate(max);
    Ok(traces)
}

fn permute(items: &[String], prefix: &mut Vec<String>, visit: &mut impl FnMut(&[String])) {
    if prefix.len() == items.len() {
        visit(prefix);
        return;
    }
    for item in items {
        if !prefix.contains(item) {
            prefix.push(item.clone());
            permute(items, prefix, visit);
            prefix.pop();
        }
    }
}

/// Requirement coverage of root attacks: a root is covered when any node in
/// its operator subtree links at least one requirement.
pub fn coverage(model: &Model) -> CoverageReport {
    let graph = AttackGraph::build(model);
    let mut roots = Vec::new();
    for root in graph.roots() {
        let mut requirements = BTreeSet::new();
        for id in graph.subtree_nodes(root) {
            if let Some(n) = graph.nodes.get(&id) {
                requirements.extend(n.linked.iter().cloned());
            }
        }
        let info = &graph.nodes[root];
        roots.push(RootCoverage {
            root: root.to_string(),
            asset: info.asset.clone(),
            covered: !requirements.is_empty(),
            requirements: requirements.into_iter().collect(),
        });
    }
    roots.sort_by(|a, b| a.root.cmp(&b.root));
    let covered = roots.iter().filter(|r| r.covered).count();
    let uncovered = roots.len() - covered;
    CoverageReport {
        roots,
        covered,
        uncovered,
    }
}

pub fn timed_operators(model: &Model) -> Vec<TimedOperator> {
    let mut out: Vec<TimedOperator> = model
        .attack_operators()
        .filter_map(|(_, o)| {
            o.max_duration.map(|d| TimedOperator {
                operator: o.id.clone(),
                kind: o.op.keyword().to_string(),
                within: d,
            })
        })
        .collect();
    out.sort();
    out
}

impl PartialOrd for TimedOperator {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimedOperator {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.operator.cmp(&other.operator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_source;

    fn graph(text: &str) -> AttackGraph {
        let out = parse_source(text, "t.ssec");
        assert!(
            !out.diagnostics.iter().any(|d| d.is_error()),
            "{:?}",
            out.diagnostics
        );
        AttackGraph::build(&out.model)
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    const FIRMWARE: &str = "asset CommunicationUnit {\n\
         \x20 attack ExploitVulnerabilityinFlashing\n\
         \x20 root attack GarageGainsAccessToCCU\n\
         \x20 sequence Seq1 (ExploitVulnerabilityinFlashing, CorruptOrFakeMessage) -> GarageGainsAccessToCCU\n\
         }\n\
         asset InCarCommunication {\n\
         \x20 attack CorruptOrFakeMessage\n\
         }\n";

    #[test]
    fn sequence_in_listed_order_is_achievable() {
        let g = graph(FIRMWARE);
        let enabled = set(&["ExploitVulnerabilityinFlashing", "CorruptOrFakeMessage"]);
        assert!(achievable(&g, "GarageGainsAccessToCCU", &enabled).unwrap());
    }

    #[test]
    fn sequence_yields_single_ordering() {
        let g = graph(FIRMWARE);
        let traces = enumerate_traces(&g, "GarageGainsAccessToCCU", 10).unwrap();
        assert_eq!(
            traces,
            vec![AttackTrace(vec![
                "ExploitVulnerabilityinFlashing".to_string(),
                "CorruptOrFakeMessage".to_string()
            ])]
        );
    }

    #[test]
    fn or_with_one_enabled_input() {
        let g = graph(
            "asset A {\n  attack x\n  attack y\n  root attack goal\n  or O1 (x, y) -> goal\n}\n",
        );
        assert!(achievable(&g, "goal", &set(&["x"])).unwrap());
        assert!(!achievable(&g, "goal", &set(&[])).unwrap());
    }

    #[test]
    fn and_enumerates_both_orders() {
        let g = graph(
            "asset A {\n  attack a\n  attack b\n  root attack goal\n  and A1 (a, b) -> goal\n}\n",
        );
        let traces = enumerate_traces(&g, "goal", 10).unwrap();
        assert_eq!(
            traces,
            vec![
                AttackTrace(vec!["a".to_string(), "b".to_string()]),
                AttackTrace(vec!["b".to_string(), "a".to_string()]),
            ]
        );
    }

    #[test]
    fn contradictory_order_constraints_are_unachievable() {
        // goal needs a before b (SEQUENCE) and b before a (BEFORE), which no
        // permutation satisfies.
        let g = graph(
            "asset A {\n  attack a\n  attack b\n  attack mid\n  root attack goal\n\
             \x20 sequence S1 (a, b) -> mid\n  and A1 (mid, B1out) -> goal\n\
             \x20 attack B1out\n  before B1 (b, a) -> B1out\n}\n",
        );
        assert!(!achievable(&g, "goal", &set(&["a", "b"])).unwrap());
        assert!(enumerate_traces(&g, "goal", 10).unwrap().is_empty());
    }

    #[test]
    fn after_requires_reverse_order() {
        let g = graph(
            "asset A {\n  attack a\n  attack b\n  root attack goal\n  after F1 (a, b) -> goal\n}\n",
        );
        let traces = enumerate_traces(&g, "goal", 10).unwrap();
        // AFTER(a, b): a completes after b.
        assert_eq!(
            traces,
            vec![AttackTrace(vec!["b".to_string(), "a".to_string()])]
        );
    }

    #[test]
    fn cross_refs_alias_attacks_between_groups() {
        let g = graph(
            "asset A {\n  attack shared { refs shared2 }\n  root attack goal\n  and A1 (shared, other) -> goal\n  attack other\n}\n\
             asset B {\n  attack shared2 { covers R1 }\n}\n\
             requirement R1 {\n  kind integrity\n}\n",
        );
        // shared2 resolves to the same canonical node as shared.
        assert_eq!(g.canonical("shared2"), g.canonical("shared"));
        assert!(achievable(&g, "goal", &set(&["shared2", "other"])).unwrap());
    }

    #[test]
    fn unknown_and_non_root_errors() {
        let g = graph(FIRMWARE);
        assert_eq!(
            achievable(&g, "Nope", &set(&[])),
            Err(ThreatError::UnknownRoot("Nope".to_string()))
        );
        assert_eq!(
            achievable(&g, "CorruptOrFakeMessage", &set(&[])),
            Err(ThreatError::NotRoot("CorruptOrFakeMessage".to_string()))
        );
    }

    #[test]
    fn coverage_counts_subtree_links() {
        let text = format!(
            "{FIRMWARE}requirement ControlledAccessToFlashMemory {{\n  kind access_control\n}}\n"
        );
        let mut with_link = text.replace(
            "root attack GarageGainsAccessToCCU",
            "root attack GarageGainsAccessToCCU { covers ControlledAccessToFlashMemory }",
        );
        let out = parse_source(&with_link, "t.ssec");
        let report = coverage(&out.model);
        assert_eq!(report.covered, 1);
        assert_eq!(report.uncovered, 0);
        assert_eq!(report.roots[0].requirements, vec!["ControlledAccessToFlashMemory"]);

        // Removing the only link flips the root to uncovered.
        with_link = text;
        let out = parse_source(&with_link, "t.ssec");
        let report = coverage(&out.model);
        assert_eq!(report.covered, 0);
        assert_eq!(report.uncovered, 1);
        assert!(!report.roots[0].covered);
    }

    #[test]
    fn coverage_of_model_without_attacks_is_empty() {
        let out = parse_source("requirement R {\n  kind integrity\n}\n", "t.ssec");
        let report = coverage(&out.model);
        assert!(report.roots.is_empty());
        assert_eq!(report.covered + report.uncovered, 0);
    }

    #[test]
    fn monotone_in_enabled_set() {
        let g = graph(FIRMWARE);
        let small = set(&["ExploitVulnerabilityinFlashing", "CorruptOrFakeMessage"]);
        let mut big = small.clone();
        big.insert("SomethingElse".to_string()); // unknown leaves are ignored
        assert!(achievable(&g, "GarageGainsAccessToCCU", &small).unwrap());
        assert!(achievable(&g, "GarageGainsAccessToCCU", &big).unwrap());
    }

    #[test]
    fn or_and_inputs_commute() {
        let forward = graph(
            "asset A {\n  attack a\n  attack b\n  attack c\n  root attack goal\n  or O (a, b, c) -> goal\n}\n",
        );
        let back = graph(
            "asset A {\n  attack a\n  attack b\n  attack c\n  root attack goal\n  or O (c, b, a) -> goal\n}\n",
        );
        for enabled in [set(&["a"]), set(&["b"]), set(&["c"]), set(&[])] {
            assert_eq!(
                achievable(&forward, "goal", &enabled).unwrap(),
                achievable(&back, "goal", &enabled).unwrap()
            );
        }
    }
}
