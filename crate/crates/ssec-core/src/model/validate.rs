//! Well-formedness validation across all four views. Diagnostics are the
//! return value; an empty list means the model satisfies every structural
//! invariant. Output is sorted, so it does not depend on declaration order.

use super::*;
use crate::diag::{sort_diagnostics, Diagnostic};
use std::collections::{BTreeMap, BTreeSet};

pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut v = Validator {
        model,
        diags: Vec::new(),
    };
    v.requirements();
    v.attacks();
    v.design();
    v.machines();
    v.pragmas_and_properties();
    v.partitioning();
    sort_diagnostics(&mut v.diags);
    v.diags
}

struct Validator<'m> {
    model: &'m Model,
    diags: Vec<Diagnostic>,
}

impl<'m> Validator<'m> {
    fn error(&mut self, msg: String, span: &Option<crate::diag::SourceSpan>) {
        self.diags.push(Diagnostic::error(msg, span.clone()));
    }

    fn warning(&mut self, msg: String, span: &Option<crate::diag::SourceSpan>) {
        self.diags.push(Diagnostic::warning(msg, span.clone()));
    }

    fn require_requirement(&mut self, id: &str, context: &str, span: &Option<crate::diag::SourceSpan>) {
        if self.model.requirement(id).is_none() {
            self.error(format!("unknown requirement `{id}` referenced by {context}"), span);
        }
    }

    // -- requirements --------------------------------------------------------

    fn requirements(&mut self) {
        let mut seen = BTreeSet::new();
        for r in &self.model.requirements {
            if !seen.insert(r.id.as_str()) {
                self.error(format!("duplicate requirement id `{}`", r.id), &r.span);
            }
        }
        for r in &self.model.requirements {
            for c in &r.children {
                if self.model.requirement(c).is_none() {
                    self.error(
                        format!("requirement `{}` contains unknown requirement `{c}`", r.id),
                        &r.span,
                    );
                }
            }
            for d in &r.derived_from {
                if self.model.requirement(d).is_none() {
                    self.error(
                        format!("requirement `{}` derived from unknown requirement `{d}`", r.id),
                        &r.span,
                    );
                }
            }
        }
        self.check_requirement_cycles("containment", |r| &r.children);
        self.check_requirement_cycles("derivation", |r| &r.derived_from);
    }

    fn check_requirement_cycles(
        &mut self,
        what: &str,
        edges: impl Fn(&Requirement) -> &Vec<String>,
    ) {
        let adj: BTreeMap<&str, Vec<&str>> = self
            .model
            .requirements
            .iter()
            .map(|r| (r.id.as_str(), edges(r).iter().map(String::as_str).collect()))
            .collect();
        let mut state: BTreeMap<&str, u8> = BTreeMap::new(); // 1 = visiting, 2 = done
        let mut cyclic: BTreeSet<&str> = BTreeSet::new();
        fn visit<'a>(
            n: &'a str,
            adj: &BTreeMap<&'a str, Vec<&'a str>>,
            state: &mut BTreeMap<&'a str, u8>,
            cyclic: &mut BTreeSet<&'a str>,
        ) {
            match state.get(n) {
                Some(1) => {
                    cyclic.insert(n);
                    return;
                }
                Some(2) => return,
                _ => {}
            }
            state.insert(n, 1);
            if let Some(next) = adj.get(n) {
                for m in next {
                    if adj.contains_key(m) {
                        visit(m, adj, state, cyclic);
                    }
                }
            }
            state.insert(n, 2);
        }
        for r in &self.model.requirements {
            visit(r.id.as_str(), &adj, &mut state, &mut cyclic);
        }
        for id in cyclic {
            let span = self
                .model
                .requirement(id)
                .and_then(|r| r.span.clone());
            self.diags.push(Diagnostic::error(
                format!("requirement {what} cycle through `{id}`"),
                span,
            ));
        }
    }

    // -- attack view ---------------------------------------------------------

    fn attacks(&mut self) {
        let mut node_group: BTreeMap<&str, &str> = BTreeMap::new();
        let mut op_ids: BTreeSet<&str> = BTreeSet::new();
        for g in &self.model.attack_groups {
            for a in &g.attacks {
                if node_group.insert(a.id.as_str(), g.asset.as_str()).is_some() {
                    self.error(format!("duplicate attack id `{}`", a.id), &a.span);
                }
            }
        }
        for (_, op) in self.model.attack_operators() {
            if !op_ids.insert(op.id.as_str()) || node_group.contains_key(op.id.as_str()) {
                self.error(
                    format!("duplicate id `{}` in the attack view", op.id),
                    &op.span,
                );
            }
        }

        for g in &self.model.attack_groups {
            for a in &g.attacks {
                for req in &a.linked_requirements {
                    self.require_requirement(req, &format!("attack `{}`", a.id), &a.span);
                }
                for x in &a.cross_refs {
                    if !node_group.contains_key(x.as_str()) {
                        self.error(
                            format!("attack `{}` cross-references unknown attack `{x}`", a.id),
                            &a.span,
                        );
                    } else if node_group.get(x.as_str()) == Some(&g.asset.as_str()) && *x != a.id {
                        self.warning(
                            format!(
                                "attack `{}` cross-references `{x}` in the same asset group",
                                a.id
                            ),
                            &a.span,
                        );
                    }
                    if *x == a.id {
                        self.error(format!("attack `{}` cross-references itself", a.id), &a.span);
                    }
                }
            }
        }

        let mut outputs: BTreeSet<&str> = BTreeSet::new();
        for g in &self.model.attack_groups {
            for op in &g.operators {
                let min = match op.op {
                    AttackOp::Or | AttackOp::And | AttackOp::Sequence => 2,
                    AttackOp::Before | AttackOp::After => 2,
                };
                let exact = matches!(op.op, AttackOp::Before | AttackOp::After);
                if op.inputs.len() < min || (exact && op.inputs.len() != 2) {
                    self.error(
                        format!(
                            "operator `{}` ({}) requires {} inputs, got {}",
                            op.id,
                            op.op.keyword(),
                            if exact { "exactly 2".to_string() } else { format!("at least {min}") },
                            op.inputs.len()
                        ),
                        &op.span,
                    );
                }
                for input in &op.inputs {
                    let is_node = node_group.contains_key(input.as_str());
                    let is_op = op_ids.contains(input.as_str());
                    if !is_node && !is_op {
                        self.error(
                            format!("operator `{}` input `{input}` is not a declared attack or operator", op.id),
                            &op.span,
                        );
                    } else if is_node && node_group.get(input.as_str()) != Some(&g.asset.as_str()) {
                        self.warning(
                            format!(
                                "operator `{}` takes input `{input}` from another asset group; \
                                 treating it as an alias of the local diagram",
                                op.id
                            ),
                            &op.span,
                        );
                    }
                }
                if !node_group.contains_key(op.output.as_str()) {
                    self.error(
                        format!("operator `{}` output `{}` is not a declared attack", op.id, op.output),
                        &op.span,
                    );
                } else if !outputs.insert(op.output.as_str()) {
                    self.error(
                        format!("attack `{}` is the output of more than one operator", op.output),
                        &op.span,
                    );
                }
            }
        }

        self.attack_operator_cycles(&node_group);
    }

    /// The operator graph must be acyclic: following any operator from its
    /// output down through its inputs never revisits a node.
    fn attack_operator_cycles(&mut self, node_group: &BTreeMap<&str, &str>) {
        let producers = self.model.producing_operators();
        let ops: BTreeMap<&str, &AttackOperator> = self
            .model
            .attack_operators()
            .map(|(_, o)| (o.id.as_str(), o))
            .collect();
        // Edges: output -> operator -> inputs.
        let neighbours = |id: &str| -> Vec<String> {
            if let Some(op) = ops.get(id) {
                op.inputs.clone()
            } else if let Some(op) = producers.get(id) {
                vec![op.id.clone()]
            } else {
                Vec::new()
            }
        };
        let mut all: Vec<&str> = node_group.keys().copied().collect();
        all.extend(ops.keys().copied());
        let mut done: BTreeSet<String> = BTreeSet::new();
        let mut reported: BTreeSet<String> = BTreeSet::new();
        for start in all {
            if done.contains(start) {
                continue;
            }
            let mut stack: Vec<(String, usize)> = vec![(start.to_string(), 0)];
            let mut path: BTreeSet<String> = BTreeSet::new();
            path.insert(start.to_string());
            while let Some((node, idx)) = stack.pop() {
                let next = neighbours(&node);
                if idx < next.len() {
                    let child = next[idx].clone();
                    stack.push((node.clone(), idx + 1));
                    if path.contains(&child) {
                        if reported.insert(child.clone()) {
                            let span = ops
                                .get(child.as_str())
                                .and_then(|o| o.span.clone());
                            self.diags.push(Diagnostic::error(
                                format!("attack operator graph has a cycle through `{child}`"),
                                span,
                            ));
                        }
                    } else if !done.contains(&child) {
                        path.insert(child.clone());
                        stack.push((child, 0));
                    }
                } else {
                    path.remove(&node);
                    done.insert(node);
                }
            }
        }
    }

    // -- design view ---------------------------------------------------------

    fn design(&mut self) {
        let mut seen = BTreeSet::new();
        for b in &self.model.blocks {
            if !seen.insert(b.name.as_str()) {
                self.error(format!("duplicate block `{}`", b.name), &b.span);
            }
            let mut attrs = BTreeSet::new();
            for a in &b.attributes {
                if !attrs.insert(a.name.as_str()) {
                    self.error(
                        format!("duplicate attribute `{}` in block `{}`", a.name, b.name),
                        &a.span,
                    );
                }
            }
            let mut methods = BTreeSet::new();
            for m in &b.methods {
                if !methods.insert(m.name.as_str()) {
                    self.error(
                        format!("duplicate method `{}` in block `{}`", m.name, b.name),
                        &m.span,
                    );
                }
                if Expr::builtin_arity(&m.name).is_some() {
                    self.error(
                        format!(
                            "method `{}` in block `{}` shadows the built-in message function",
                            m.name, b.name
                        ),
                        &m.span,
                    );
                }
                if let Some(required) = m.role.required_arity() {
                    if m.arity != required {
                        self.error(
                            format!(
                                "method `{}` in block `{}` has role {} which demands arity {required}, got {}",
                                m.name,
                                b.name,
                                m.role.keyword(),
                                m.arity
                            ),
                            &m.span,
                        );
                    }
                }
            }
            let mut ports = BTreeSet::new();
            for p in &b.ports {
                if !ports.insert(p.as_str()) {
                    self.error(format!("duplicate port `{p}` in block `{}`", b.name), &b.span);
                }
            }
        }

        let mut used_ports: BTreeSet<(String, String)> = BTreeSet::new();
        for l in &self.model.links {
            for ep in [&l.a, &l.b] {
                match self.model.block(&ep.block) {
                    None => self.error(format!("link endpoint references unknown block `{}`", ep.block), &l.span),
                    Some(b) => {
                        if !b.has_port(&ep.port) {
                            self.error(
                                format!("link endpoint references unknown port `{}.{}`", ep.block, ep.port),
                                &l.span,
                            );
                        }
                    }
                }
                if !used_ports.insert((ep.block.clone(), ep.port.clone())) {
                    self.error(
                        format!("port `{}.{}` appears in more than one link", ep.block, ep.port),
                        &l.span,
                    );
                }
            }
        }
    }

    // -- state machines ------------------------------------------------------

    fn machines(&mut self) {
        let mut owners = BTreeSet::new();
        for m in &self.model.machines {
            if !owners.insert(m.owner.as_str()) {
                self.error(format!("block `{}` has more than one state machine", m.owner), &m.span);
            }
            let Some(block) = self.model.block(&m.owner) else {
                self.error(format!("state machine for unknown block `{}`", m.owner), &m.span);
                continue;
            };
            let initials = m.states.iter().filter(|s| s.initial).count();
            if initials != 1 {
                self.error(
                    format!(
                        "state machine of `{}` must mark exactly one initial state, found {initials}",
                        m.owner
                    ),
                    &m.span,
                );
            }
            let mut names = BTreeSet::new();
            for s in &m.states {
                if !names.insert(s.name.as_str()) {
                    self.error(
                        format!("duplicate state `{}` in state machine of `{}`", s.name, m.owner),
                        &s.span,
                    );
                }
            }
            for t in &m.transitions {
                for endpoint in [&t.source, &t.target] {
                    if !m.has_state(endpoint) {
                        self.error(
                            format!(
                                "transition references undeclared state `{endpoint}` in `{}`",
                                m.owner
                            ),
                            &t.span,
                        );
                    }
                }
                for g in &t.guards {
                    self.check_guard(block, g, &t.span);
                }
                for a in &t.actions {
                    match a {
                        Action::Assign { attr, value } => {
                            if block.attribute(attr).is_none() {
                                self.error(
                                    format!("assignment to undeclared attribute `{attr}` in `{}`", m.owner),
                                    &t.span,
                                );
                            }
                            self.check_value_expr(block, value, &t.span);
                        }
                        Action::Send { port, value } => {
                            self.check_port_use(block, port, &t.span);
                            self.check_value_expr(block, value, &t.span);
                        }
                        Action::Receive { port, attr } => {
                            self.check_port_use(block, port, &t.span);
                            if block.attribute(attr).is_none() {
                                self.error(
                                    format!("receive into undeclared attribute `{attr}` in `{}`", m.owner),
                                    &t.span,
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    fn check_port_use(&mut self, block: &DesignBlock, port: &str, span: &Option<crate::diag::SourceSpan>) {
        if !block.has_port(port) {
            self.error(
                format!("undeclared port `{port}` used in state machine of `{}`", block.name),
                span,
            );
        } else if self.model.link_of(&block.name, port).is_none() {
            self.warning(
                format!("port `{}.{port}` is not connected by any link", block.name),
                span,
            );
        }
    }

    /// Value expressions produce messages: no comparisons, no verifier calls.
    fn check_value_expr(&mut self, block: &DesignBlock, e: &Expr, span: &Option<crate::diag::SourceSpan>) {
        match e {
            Expr::Attr(a) => {
                if block.attribute(a).is_none() {
                    self.error(
                        format!("expression references undeclared attribute `{a}` in block `{}`", block.name),
                        span,
                    );
                }
            }
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Call { name, args } => {
                let arity = if let Some(n) = Expr::builtin_arity(name) {
                    Some(n)
                } else {
                    match block.method(name) {
                        Some(m) => {
                            if m.role.is_verifier() {
                                self.error(
                                    format!(
                                        "verification method `{name}` returns a truth value and may only appear as a guard"
                                    ),
                                    span,
                                );
                            }
                            Some(m.arity)
                        }
                        None => {
                            self.error(
                                format!("call to undeclared method `{name}` in block `{}`", block.name),
                                span,
                            );
                            None
                        }
                    }
                };
                if let Some(n) = arity {
                    if args.len() != n {
                        self.error(
                            format!("method `{name}` expects {n} arguments, got {}", args.len()),
                            span,
                        );
                    }
                }
                for a in args {
                    self.check_value_expr(block, a, span);
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                if op.is_comparison() {
                    self.error(
                        "comparisons may only appear in guards".to_string(),
                        span,
                    );
                }
                self.check_value_expr(block, lhs, span);
                self.check_value_expr(block, rhs, span);
            }
        }
    }

    /// Guards are boolean: a comparison, a verification method call, or a
    /// boolean literal/attribute.
    fn check_guard(&mut self, block: &DesignBlock, e: &Expr, span: &Option<crate::diag::SourceSpan>) {
        match e {
            Expr::Binary { op, lhs, rhs } if op.is_comparison() => {
                self.check_value_expr(block, lhs, span);
                self.check_value_expr(block, rhs, span);
            }
            Expr::Call { name, args } => {
                match block.method(name) {
                    Some(m) if m.role.is_verifier() => {
                        if args.len() != m.arity {
                            self.error(
                                format!("method `{name}` expects {} arguments, got {}", m.arity, args.len()),
                                span,
                            );
                        }
                        for a in args {
                            self.check_value_expr(block, a, span);
                        }
                    }
                    _ => {
                        self.error(
                            format!(
                                "guard call `{name}` is not a verification method of block `{}`",
                                block.name
                            ),
                            span,
                        );
                    }
                }
            }
            Expr::Bool(_) => {}
            Expr::Attr(a) => match block.attribute(a) {
                Some(attr) if attr.sem_type == SemType::Bool => {}
                Some(_) => self.error(
                    format!("guard attribute `{a}` is not boolean"),
                    span,
                ),
                None => self.error(
                    format!("guard references undeclared attribute `{a}` in block `{}`", block.name),
                    span,
                ),
            },
            _ => self.error(
                "guard must be a comparison, a verification method call, or a boolean value".to_string(),
                span,
            ),
        }
    }

    // -- pragmas and properties ------------------------------------------------

    fn member_exists(&mut self, block: &str, attr: &str, context: &str, span: &Option<crate::diag::SourceSpan>) -> bool {
        match self.model.block(block) {
            None => {
                self.error(format!("unknown block `{block}` in {context}"), span);
                false
            }
            Some(b) => {
                if b.attribute(attr).is_none() {
                    self.error(format!("unknown attribute `{block}.{attr}` in {context}"), span);
                    false
                } else {
                    true
                }
            }
        }
    }

    fn pragmas_and_properties(&mut self) {
        for p in &self.model.pragmas {
            let mut types = BTreeSet::new();
            for (block, attr) in &p.members {
                if self.member_exists(block, attr, "knowledge pragma", &p.span) {
                    let b = self.model.block(block).unwrap();
                    types.insert(b.attribute(attr).unwrap().sem_type.keyword());
                }
            }
            if types.len() > 1 {
                let list: Vec<&str> = types.into_iter().collect();
                self.error(
                    format!(
                        "knowledge pragma members must share one semantic type, found {}",
                        list.join(", ")
                    ),
                    &p.span,
                );
            }
            if let Some(t) = &p.traces_to {
                self.require_requirement(t, "knowledge pragma", &p.span);
            }
        }

        for c in &self.model.confidentiality {
            if self.member_exists(&c.block, &c.attribute, "confidentiality property", &c.span) {
                let attr = self
                    .model
                    .block(&c.block)
                    .unwrap()
                    .attribute(&c.attribute)
                    .unwrap();
                let in_pragma = self
                    .model
                    .pragmas
                    .iter()
                    .any(|p| p.members.iter().any(|(b, a)| b == &c.block && a == &c.attribute));
                if !in_pragma && !matches!(attr.sem_type, SemType::Key | SemType::Nonce) {
                    self.warning(
                        format!(
                            "confidentiality target `{}.{}` is computed data, not a named secret; \
                             the security analyses will reject it",
                            c.block, c.attribute
                        ),
                        &c.span,
                    );
                }
            }
            if let Some(t) = &c.traces_to {
                self.require_requirement(t, "confidentiality property", &c.span);
            }
        }

        for a in &self.model.authenticity {
            self.auth_anchor(&a.sender, true, &a.span);
            self.auth_anchor(&a.receiver, false, &a.span);
            if let Some(t) = &a.traces_to {
                self.require_requirement(t, "authenticity property", &a.span);
            }
        }
    }

    fn auth_anchor(&mut self, anchor: &AuthAnchor, sender: bool, span: &Option<crate::diag::SourceSpan>) {
        let role = if sender { "sender" } else { "receiver" };
        if !self.member_exists(
            &anchor.block,
            &anchor.message,
            &format!("authenticity {role} anchor"),
            span,
        ) {
            return;
        }
        let Some(machine) = self.model.machine_of(&anchor.block) else {
            self.error(
                format!("authenticity {role} block `{}` has no state machine", anchor.block),
                span,
            );
            return;
        };
        if !machine.has_state(&anchor.state) {
            self.error(
                format!(
                    "authenticity {role} state `{}` is not a state of `{}`",
                    anchor.state, anchor.block
                ),
                span,
            );
            return;
        }
        if sender {
            // The anchor state must sit right before the sending of the
            // message attribute: some transition out of it sends the bare
            // attribute.
            let ok = machine.transitions.iter().any(|t| {
                t.source == anchor.state
                    && t.actions.iter().any(|a| {
                        matches!(a, Action::Send { value: Expr::Attr(attr), .. } if attr == &anchor.message)
                    })
            });
            if !ok {
                self.error(
                    format!(
                        "authenticity sender anchor: state `{}` of `{}` has no outgoing transition \
                         sending attribute `{}`",
                        anchor.state, anchor.block, anchor.message
                    ),
                    span,
                );
            }
        } else {
            // The anchor state must sit right after the message has been
            // received: some transition into it receives the attribute.
            let ok = machine.transitions.iter().any(|t| {
                t.target == anchor.state
                    && t.actions.iter().any(|a| {
                        matches!(a, Action::Receive { attr, .. } if attr == &anchor.message)
                    })
            });
            if !ok {
                self.error(
                    format!(
                        "authenticity receiver anchor: state `{}` of `{}` is not the target of a \
                         transition receiving into `{}`",
                        anchor.state, anchor.block, anchor.message
                    ),
                    span,
                );
            }
        }
    }

    // -- partitioning ----------------------------------------------------------

    fn partitioning(&mut self) {
        let mut tasks = BTreeSet::new();
        for t in &self.model.tasks {
            if !tasks.insert(t.name.as_str()) {
                self.error(format!("duplicate task `{}`", t.name), &t.span);
            }
            if t.rate <= 0.0 {
                self.error(format!("task `{}` must have rate > 0", t.name), &t.span);
            }
            let mut ports = BTreeSet::new();
            for p in &t.ports {
                if !ports.insert(p.name.as_str()) {
                    self.error(format!("duplicate port `{}` in task `{}`", p.name, t.name), &t.span);
                }
            }
        }

        let mut nodes = BTreeSet::new();
        for n in &self.model.arch_nodes {
            if !nodes.insert(n.name.as_str()) {
                self.error(format!("duplicate architecture node `{}`", n.name), &n.span);
            }
            match n.kind {
                ArchKind::Memory => {
                    if n.capacity.is_some() {
                        self.warning(
                            format!("memory node `{}` does not use a capacity", n.name),
                            &n.span,
                        );
                    }
                }
                _ => match n.capacity {
                    None => self.error(
                        format!("{} node `{}` needs a capacity", n.kind.keyword(), n.name),
                        &n.span,
                    ),
                    Some(c) if c <= 0.0 => self.error(
                        format!("node `{}` must have capacity > 0", n.name),
                        &n.span,
                    ),
                    _ => {}
                },
            }
        }

        let mut mapped: BTreeMap<&str, usize> = BTreeMap::new();
        for m in &self.model.task_maps {
            *mapped.entry(m.task.as_str()).or_insert(0) += 1;
            if self.model.task(&m.task).is_none() {
                self.error(format!("mapping references unknown task `{}`", m.task), &m.span);
            }
            match self.model.arch_node(&m.node) {
                None => self.error(format!("mapping references unknown node `{}`", m.node), &m.span),
                Some(n) if !n.kind.is_execution() => self.error(
                    format!("task `{}` mapped to non-execution node `{}`", m.task, m.node),
                    &m.span,
                ),
                _ => {}
            }
        }
        for t in &self.model.tasks {
            match mapped.get(t.name.as_str()).copied().unwrap_or(0) {
                0 if !self.model.task_maps.is_empty() || !self.model.channel_maps.is_empty() => {
                    self.error(format!("task `{}` is not mapped to any execution node", t.name), &t.span)
                }
                n if n > 1 => self.error(
                    format!("task `{}` is mapped {n} times; expected exactly one mapping", t.name),
                    &t.span,
                ),
                _ => {}
            }
        }

        let mut channels = BTreeSet::new();
        for c in &self.model.channel_maps {
            if !channels.insert(c.name.as_str()) {
                self.error(format!("duplicate channel `{}`", c.name), &c.span);
            }
            for (task, port) in [&c.from, &c.to] {
                match self.model.task(task) {
                    None => self.error(
                        format!("channel `{}` references unknown task `{task}`", c.name),
                        &c.span,
                    ),
                    Some(t) => {
                        if !t.ports.iter().any(|p| &p.name == port) {
                            self.error(
                                format!("channel `{}` references unknown port `{task}.{port}`", c.name),
                                &c.span,
                            );
                        }
                    }
                }
            }
            for bus in &c.buses {
                match self.model.arch_node(bus) {
                    None => self.error(
                        format!("channel `{}` routed over unknown bus `{bus}`", c.name),
                        &c.span,
                    ),
                    Some(n) if n.kind != ArchKind::Bus => self.error(
                        format!("channel `{}` routed over `{bus}`, which is not a bus", c.name),
                        &c.span,
                    ),
                    _ => {}
                }
            }
            if let Some(mem) = &c.memory {
                match self.model.arch_node(mem) {
                    None => self.error(
                        format!("channel `{}` stored in unknown memory `{mem}`", c.name),
                        &c.span,
                    ),
                    Some(n) if n.kind != ArchKind::Memory => self.error(
                        format!("channel `{}` stored in `{mem}`, which is not a memory", c.name),
                        &c.span,
                    ),
                    _ => {}
                }
            }
            if c.rate < 0.0 {
                self.error(format!("channel `{}` must have rate >= 0", c.name), &c.span);
            }
            // An inter-node channel needs at least one bus on its path.
            let src_node = self.model.task_maps.iter().find(|m| m.task == c.from.0).map(|m| &m.node);
            let dst_node = self.model.task_maps.iter().find(|m| m.task == c.to.0).map(|m| &m.node);
            if let (Some(s), Some(d)) = (src_node, dst_node) {
                if s != d && c.buses.is_empty() {
                    self.error(
                        format!(
                            "channel `{}` crosses from node `{s}` to node `{d}` but is not mapped to any bus",
                            c.name
                        ),
                        &c.span,
                    );
                }
            }
        }
    }
}
