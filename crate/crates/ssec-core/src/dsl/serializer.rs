//! Deterministic text output for models. Declaration order is preserved
//! within each view; re-serializing a parsed serialization is byte-identical.

use crate::model::*;
use std::fmt::Write;

pub fn serialize_model(model: &Model) -> String {
    let mut out = String::new();
    for r in &model.requirements {
        requirement(&mut out, r);
    }
    for g in &model.attack_groups {
        attack_group(&mut out, g);
    }
    for b in &model.blocks {
        block(&mut out, b);
    }
    for l in &model.links {
        let _ = writeln!(
            out,
            "link {}.{} {}.{} : {}",
            l.a.block,
            l.a.port,
            l.b.block,
            l.b.port,
            match l.visibility {
                Visibility::Public => "public",
                Visibility::Private => "private",
            }
        );
    }
    if !model.links.is_empty() {
        out.push('\n');
    }
    for m in &model.machines {
        machine(&mut out, m);
    }
    for p in &model.pragmas {
        let _ = write!(
            out,
            "pragma {}",
            match p.scope {
                KnowledgeScope::System => "InitialSystemKnowledge",
                KnowledgeScope::Session => "InitialSessionKnowledge",
            }
        );
        for (b, a) in &p.members {
            let _ = write!(out, " {b}.{a}");
        }
        if let Some(t) = &p.traces_to {
            let _ = write!(out, " traces {t}");
        }
        out.push('\n');
    }
    for c in &model.confidentiality {
        let _ = write!(out, "property Confidentiality {}.{}", c.block, c.attribute);
        if let Some(t) = &c.traces_to {
            let _ = write!(out, " traces {t}");
        }
        out.push('\n');
    }
    for a in &model.authenticity {
        let _ = write!(
            out,
            "property Authenticity {}.{}.{} {}.{}.{}",
            a.sender.block,
            a.sender.state,
            a.sender.message,
            a.receiver.block,
            a.receiver.state,
            a.receiver.message
        );
        if let Some(t) = &a.traces_to {
            let _ = write!(out, " traces {t}");
        }
        out.push('\n');
    }
    if !(model.pragmas.is_empty() && model.confidentiality.is_empty() && model.authenticity.is_empty())
    {
        out.push('\n');
    }
    for t in &model.tasks {
        task(&mut out, t);
    }
    for n in &model.arch_nodes {
        let _ = write!(out, "node {} : {}", n.name, n.kind.keyword());
        match n.capacity {
            Some(c) => {
                let _ = writeln!(out, " {{\n  capacity {}\n}}", num(c));
            }
            None => out.push('\n'),
        }
        out.push('\n');
    }
    for m in &model.task_maps {
        let _ = write!(out, "map task {} -> {}", m.task, m.node);
        if m.crypto_cycles > 0 {
            let _ = write!(out, " {{\n  crypto_cycles {}\n}}", m.crypto_cycles);
        }
        out.push_str("\n\n");
    }
    for c in &model.channel_maps {
        channel_map(&mut out, c);
    }
    // Canonical form ends with exactly one trailing newline.
    while out.ends_with("\n\n") {
        out.pop();
    }
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

fn requirement(out: &mut String, r: &Requirement) {
    let _ = writeln!(out, "requirement {} {{", r.id);
    match &r.kind {
        RequirementKind::Other(text) => {
            let _ = writeln!(out, "  kind other {}", quoted(text));
        }
        k => {
            let _ = writeln!(out, "  kind {}", k.keyword());
        }
    }
    if !r.title.is_empty() {
        let _ = writeln!(out, "  title {}", quoted(&r.title));
    }
    if !r.description.is_empty() {
        let _ = writeln!(out, "  description {}", quoted(&r.description));
    }
    if !r.children.is_empty() {
        let _ = writeln!(out, "  contains {}", r.children.join(" "));
    }
    if !r.derived_from.is_empty() {
        let _ = writeln!(out, "  derived_from {}", r.derived_from.join(" "));
    }
    out.push_str("}\n\n");
}

fn attack_group(out: &mut String, g: &AttackGroup) {
    let _ = writeln!(out, "asset {} {{", g.asset);
    for a in &g.attacks {
        let _ = write!(out, "  {}attack {}", if a.is_root { "root " } else { "" }, a.id);
        if !a.label.is_empty() {
            let _ = write!(out, " {}", quoted(&a.label));
        }
        if a.linked_requirements.is_empty() && a.cross_refs.is_empty() {
            out.push('\n');
        } else {
            out.push_str(" {\n");
            if !a.linked_requirements.is_empty() {
                let _ = writeln!(out, "    covers {}", a.linked_requirements.join(" "));
            }
            if !a.cross_refs.is_empty() {
                let _ = writeln!(out, "    refs {}", a.cross_refs.join(" "));
            }
            out.push_str("  }\n");
        }
    }
    for o in &g.operators {
        let _ = write!(
            out,
            "  {} {} ({}) -> {}",
            o.op.keyword(),
            o.id,
            o.inputs.join(", "),
            o.output
        );
        if let Some(d) = o.max_duration {
            let _ = write!(out, " within {d}");
        }
        out.push('\n');
    }
    out.push_str("}\n\n");
}

fn block(out: &mut String, b: &DesignBlock) {
    let _ = writeln!(out, "block {} {{", b.name);
    for a in &b.attributes {
        let _ = writeln!(out, "  attribute {} : {}", a.name, a.sem_type.keyword());
    }
    for m in &b.methods {
        let _ = write!(out, "  method {}({})", m.name, m.arity);
        if m.role != CryptoRole::Plain {
            let _ = write!(out, " : {}", m.role.keyword());
        }
        out.push('\n');
    }
    for p in &b.ports {
        let _ = writeln!(out, "  port {p}");
    }
    out.push_str("}\n\n");
}

fn machine(out: &mut String, m: &StateMachine) {
    let _ = writeln!(out, "statemachine {} {{", m.owner);
    for s in &m.states {
        let _ = writeln!(
            out,
            "  {}state {}",
            if s.initial { "initial " } else { "" },
            s.name
        );
    }
    for t in &m.transitions {
        let _ = write!(out, "  transition {} -> {}", t.source, t.target);
        let empty =
            t.guards.is_empty() && t.timing.is_none() && t.actions.is_empty();
        if empty {
            out.push('\n');
            continue;
        }
        out.push_str(" {\n");
        if let Some((lo, hi)) = t.timing {
            let _ = writeln!(out, "    after({lo}, {hi})");
        }
        for g in &t.guards {
            let _ = writeln!(out, "    guard {}", expr(g));
        }
        for a in &t.actions {
            match a {
                Action::Assign { attr, value } => {
                    let _ = writeln!(out, "    {attr} = {}", expr(value));
                }
                Action::Send { port, value } => {
                    let _ = writeln!(out, "    send {port} {}", expr(value));
                }
                Action::Receive { port, attr } => {
                    let _ = writeln!(out, "    receive {port} {attr}");
                }
            }
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n\n");
}

fn task(out: &mut String, t: &Task) {
    let _ = writeln!(out, "task {} {{", t.name);
    let _ = writeln!(out, "  exec_cost {}", t.exec_cost);
    let _ = writeln!(out, "  rate {}", num(t.rate));
    for p in &t.ports {
        let _ = writeln!(
            out,
            "  port {} : {}",
            p.name,
            match p.kind {
                PortKind::Data => "data",
                PortKind::Event => "event",
            }
        );
    }
    out.push_str("}\n\n");
}

fn channel_map(out: &mut String, c: &ChannelMap) {
    let _ = write!(
        out,
        "map channel {} {}.{} -> {}.{}",
        c.name, c.from.0, c.from.1, c.to.0, c.to.1
    );
    if !c.buses.is_empty() {
        let _ = write!(out, " via {}", c.buses.join(" "));
    }
    out.push_str(" {\n");
    let _ = writeln!(out, "  message_size {}", c.message_size);
    let _ = writeln!(out, "  rate {}", num(c.rate));
    let _ = writeln!(out, "  mac_bytes {}", c.mac_bytes);
    if let Some(m) = &c.memory {
        let _ = writeln!(out, "  memory {m}");
    }
    out.push_str("}\n\n");
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

/// Numbers re-parse to the same f64; Display for f64 never uses an exponent.
fn num(x: f64) -> String {
    format!("{x}")
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => match op {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
        },
        _ => 4,
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Attr(a) => a.clone(),
        Expr::Int(n) => n.to_string(),
        Expr::Bool(b) => b.to_string(),
        Expr::Call { name, args } => {
            let parts: Vec<String> = args.iter().map(expr).collect();
            format!("{name}({})", parts.join(", "))
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = prec(e);
            let l = if prec(lhs) < p {
                format!("({})", expr(lhs))
            } else {
                expr(lhs)
            };
            // Binary operators associate left; parenthesize equal-precedence
            // right operands to keep the re-parsed tree identical.
            let r = if prec(rhs) <= p {
                format!("({})", expr(rhs))
            } else {
                expr(rhs)
            };
            format!("{l} {} {r}", op.symbol())
        }
    }
}
