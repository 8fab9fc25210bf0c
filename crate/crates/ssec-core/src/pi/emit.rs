//! Emission of the abstracted design as a typed applied-pi specification in
//! the ProVerif 2.x surface dialect. Output is a pure function of the model:
//! byte-identical across runs.
//!
//! Each block machine is encoded with one restricted token channel per state;
//! a transition is a replicated process that consumes the source token
//! carrying the attribute environment (a nest of pairs), performs its step,
//! and emits the target token. Guard or pattern failure returns the source
//! token, so alternative transitions from the same state stay enabled.

use super::*;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Emit injective correspondence queries instead of plain ones.
    pub injective: bool,
}

pub fn emit_proverif(design: &AbstractDesign, opts: EmitOptions) -> String {
    let mut e = Emitter {
        design,
        opts,
        out: String::new(),
        needs_true: design
            .blocks
            .iter()
            .flat_map(|b| &b.transitions)
            .any(|t| t.guards.iter().any(|g| matches!(g, AGuard::Nondet))),
    };
    e.preamble();
    e.constants();
    e.algebra();
    e.system_names();
    e.events();
    e.queries();
    e.state_channels();
    e.transition_processes();
    e.main_process();
    e.out
}

struct Emitter<'d> {
    design: &'d AbstractDesign,
    opts: EmitOptions,
    out: String,
    needs_true: bool,
}

impl<'d> Emitter<'d> {
    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn preamble(&mut self) {
        self.line("(* generated applied-pi specification *)");
        self.line("");
        for c in &self.design.channels {
            match c.kind {
                ChannelKind::Attacker => {
                    let l = format!("free {}: channel.", c.name);
                    self.line(&l);
                }
                ChannelKind::Private => {
                    let l = format!("free {}: channel [private].", c.name);
                    self.line(&l);
                }
            }
        }
        self.line("");
    }

    fn const_list(&self) -> Vec<String> {
        let mut names = self.design.const_names.clone();
        if self.needs_true && !names.iter().any(|n| n == "lit_true") {
            names.push("lit_true".to_string());
        }
        names
    }

    fn constants(&mut self) {
        for name in self.const_list() {
            let l = format!("free {name}: bitstring.");
            self.line(&l);
        }
        self.line("");
    }

    fn algebra(&mut self) {
        self.line("fun senc(bitstring, bitstring): bitstring.");
        self.line("reduc forall m: bitstring, k: bitstring; sdec(senc(m, k), k) = m.");
        self.line("fun aenc(bitstring, bitstring): bitstring.");
        self.line("fun pk(bitstring): bitstring.");
        self.line("reduc forall m: bitstring, k: bitstring; adec(aenc(m, pk(k)), k) = m.");
        self.line("fun sign(bitstring, bitstring): bitstring.");
        self.line("reduc forall m: bitstring, k: bitstring; checksign(sign(m, k), pk(k)) = m.");
        self.line("fun mac(bitstring, bitstring): bitstring.");
        self.line("fun hash(bitstring): bitstring.");
        self.line("fun pair(bitstring, bitstring): bitstring.");
        self.line("reduc forall a: bitstring, b: bitstring; proj1(pair(a, b)) = a.");
        self.line("reduc forall a: bitstring, b: bitstring; proj2(pair(a, b)) = b.");
        for k in &self.design.comb_arities {
            let args = vec!["bitstring"; (*k).max(1) as usize].join(", ");
            let l = format!("fun comb_{k}({args}): bitstring.");
            self.line(&l);
        }
        self.line("");
    }

    fn system_names(&mut self) {
        for g in &self.design.sys_groups {
            let l = format!("free {}: bitstring [private].", g.pi_name);
            self.line(&l);
        }
        if !self.design.sys_groups.is_empty() {
            self.line("");
        }
    }

    fn events(&mut self) {
        let mut seen = BTreeSet::new();
        for q in &self.design.correspondence {
            for ev in [&q.send_event, &q.accept_event] {
                if seen.insert(ev.clone()) {
                    let l = format!("event {ev}(bitstring).");
                    self.line(&l);
                }
            }
        }
        if !seen.is_empty() {
            self.line("");
        }
    }

    fn queries(&mut self) {
        for q in &self.design.secrecy {
            let l = match q.scope {
                SecretScope::System => format!("query attacker({}).", q.pi_name),
                SecretScope::Session | SecretScope::Fresh => {
                    format!("query attacker(new {}).", q.pi_name)
                }
            };
            self.line(&l);
        }
        let ev = if self.opts.injective { "inj-event" } else { "event" };
        for q in &self.design.correspondence {
            let l = format!(
                "query x: bitstring; {ev}({}(x)) ==> {ev}({}(x)).",
                q.accept_event, q.send_event
            );
            self.line(&l);
        }
        if !self.design.secrecy.is_empty() || !self.design.correspondence.is_empty() {
            self.line("");
        }
    }

    fn st_chan(&self, block: &ProcBlock, state: usize) -> String {
        format!("st_{}_{}", block.name, block.states[state])
    }

    fn state_channels(&mut self) {
        for b in &self.design.blocks {
            for s in 0..b.states.len() {
                let l = format!("free {}: channel [private].", self.st_chan(b, s));
                self.line(&l);
            }
        }
        if !self.design.blocks.is_empty() {
            self.line("");
        }
    }

    /// Attribute environment as a nest of pairs over the given per-attribute
    /// terms; a block without attributes carries the placeholder constant.
    fn env_term(&self, values: &[String]) -> String {
        match values.len() {
            0 => UNINIT_CONST.to_string(),
            1 => values[0].clone(),
            _ => {
                let mut t = values.last().unwrap().clone();
                for v in values.iter().rev().skip(1) {
                    t = format!("pair({v}, {t})");
                }
                t
            }
        }
    }

    fn texpr(&self, block: &ProcBlock, e: &TExpr) -> String {
        match e {
            TExpr::Attr(i) => format!("a_{}", block.attr_names[*i]),
            TExpr::Const(c) => self.design.const_names[*c].clone(),
            TExpr::Apply(ctor, args) => {
                let parts: Vec<String> = args.iter().map(|a| self.texpr(block, a)).collect();
                format!("{}({})", ctor.name(), parts.join(", "))
            }
        }
    }

    fn has_destructor(e: &TExpr) -> bool {
        match e {
            TExpr::Attr(_) | TExpr::Const(_) => false,
            TExpr::Apply(c, args) => c.is_destructor() || args.iter().any(Self::has_destructor),
        }
    }

    fn transition_processes(&mut self) {
        for (bi, block) in self.design.blocks.iter().enumerate() {
            for (ti, tr) in block.transitions.iter().enumerate() {
                let text = self.transition_process(block, tr);
                let mut s = String::new();
                let _ = write!(s, "let P_{}_t{ti} =\n{text}.", self.design.blocks[bi].name);
                self.line(&s);
                self.line("");
            }
        }
    }

    fn transition_process(&self, block: &ProcBlock, tr: &ATransition) -> String {
        let src = self.st_chan(block, tr.source);
        let tgt = self.st_chan(block, tr.target);
        let restore = format!("out({src}, env)");
        let n = block.attr_names.len();

        // Innermost: accept events, sends (with their events), target token.
        let mut tail_lines: Vec<String> = Vec::new();
        for step in &tr.steps {
            if let AStep::Send {
                chan,
                value,
                auth_send,
            } = step
            {
                let term = self.texpr(block, value);
                for qi in auth_send {
                    tail_lines.push(format!(
                        "event {}({term});",
                        self.design.correspondence[*qi].send_event
                    ));
                }
                tail_lines.push(format!("out({}, {term});", self.design.channels[*chan].name));
            }
        }
        for (qi, attr) in &tr.accept_events {
            let q = &self.design.correspondence[*qi];
            tail_lines.insert(
                0,
                format!("event {}(a_{});", q.accept_event, block.attr_names[*attr]),
            );
        }
        let env_values: Vec<String> = block
            .attr_names
            .iter()
            .map(|a| format!("a_{a}"))
            .collect();
        tail_lines.push(format!("out({tgt}, {})", self.env_term(&env_values)));
        let mut body = tail_lines.join("\n");

        // Guards, innermost-to-outermost so the first guard ends up outermost.
        let mut gi = tr.guards.len();
        for g in tr.guards.iter().rev() {
            gi -= 1;
            body = match g {
                AGuard::Eq(l, r) | AGuard::Neq(l, r) => {
                    let lt = self.texpr(block, l);
                    let rt = self.texpr(block, r);
                    let cmp = if matches!(g, AGuard::Eq(..)) {
                        format!("if gl_{gi} = gr_{gi} then (\n{}\n) else {restore}", indent(&body))
                    } else {
                        format!(
                            "if gl_{gi} = gr_{gi} then {restore} else (\n{}\n)",
                            indent(&body)
                        )
                    };
                    let with_r = wrap_let(&format!("gr_{gi}"), &rt, &cmp, Self::has_destructor(r), &restore);
                    wrap_let(&format!("gl_{gi}"), &lt, &with_r, Self::has_destructor(l), &restore)
                }
                AGuard::Nondet => format!(
                    "in(att_ch, nd_{gi}: bitstring);\nif nd_{gi} = lit_true then (\n{}\n) else {restore}",
                    indent(&body)
                ),
            };
        }

        // Assignments, in order, innermost last.
        for step in tr.steps.iter().rev() {
            if let AStep::Assign { attr, value } = step {
                let term = self.texpr(block, value);
                body = wrap_let(
                    &format!("a_{}", block.attr_names[*attr]),
                    &term,
                    &body,
                    Self::has_destructor(value),
                    &restore,
                );
            }
        }

        // Receives.
        for step in tr.steps.iter().rev() {
            if let AStep::Receive { chan, attr } = step {
                body = format!(
                    "in({}, a_{}: bitstring);\n{body}",
                    self.design.channels[*chan].name, block.attr_names[*attr]
                );
            }
        }

        // Environment destructuring.
        if n > 0 {
            let mut pre = Vec::new();
            for (i, a) in block.attr_names.iter().enumerate() {
                let mut path = "env".to_string();
                for _ in 0..i {
                    path = format!("proj2({path})");
                }
                if i + 1 < n {
                    path = format!("proj1({path})");
                }
                pre.push(format!("let a_{a} = {path} in"));
            }
            body = format!("{}\n{body}", pre.join("\n"));
        }

        let full = format!("in({src}, env: bitstring);\n{body}");
        indent(&format!("!(\n{}\n)", indent(&full)))
    }

    fn main_process(&mut self) {
        if self.design.blocks.is_empty() {
            self.line("process 0");
            return;
        }
        let mut procs: Vec<String> = Vec::new();
        for (bi, b) in self.design.blocks.iter().enumerate() {
            for ti in 0..b.transitions.len() {
                procs.push(format!("P_{}_t{ti}", self.design.blocks[bi].name));
            }
        }

        // Session body: fresh session names, per-instance private names, and
        // one initial token per block.
        let mut session_lines: Vec<String> = Vec::new();
        for g in &self.design.sess_groups {
            session_lines.push(format!("new {}: bitstring;", g.pi_name));
        }
        for b in &self.design.blocks {
            for (ai, origin) in b.attr_origins.iter().enumerate() {
                if matches!(origin, AttrOrigin::Fresh) {
                    session_lines.push(format!(
                        "new priv_{}_{}: bitstring;",
                        b.name, b.attr_names[ai]
                    ));
                }
            }
        }
        let mut tokens: Vec<String> = Vec::new();
        for b in &self.design.blocks {
            let values: Vec<String> = b
                .attr_origins
                .iter()
                .enumerate()
                .map(|(ai, origin)| match origin {
                    AttrOrigin::System(g) => self.design.sys_groups[*g].pi_name.clone(),
                    AttrOrigin::Session(g) => self.design.sess_groups[*g].pi_name.clone(),
                    AttrOrigin::Fresh => format!("priv_{}_{}", b.name, b.attr_names[ai]),
                    AttrOrigin::Uninit => UNINIT_CONST.to_string(),
                })
                .collect();
            tokens.push(format!(
                "out({}, {})",
                self.st_chan(b, b.initial),
                self.env_term(&values)
            ));
        }
        let token_par = if tokens.len() == 1 {
            tokens.remove(0)
        } else {
            format!("(\n{}\n)", indent(&tokens.join("\n| ")))
        };
        session_lines.push(token_par);
        let session = format!("!(\n{}\n)", indent(&session_lines.join("\n")));

        procs.push(session);
        let body = format!("(\n{}\n)", indent(&procs.join("\n| ")));
        self.line(&format!("process\n{}", indent(&body)));
    }
}

fn indent(s: &str) -> String {
    s.lines()
        .map(|l| {
            if l.is_empty() {
                String::new()
            } else {
                format!("  {l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// `let name = term in <body>`, with an else branch restoring the source
/// token whenever the term can fail to reduce.
fn wrap_let(name: &str, term: &str, body: &str, can_fail: bool, restore: &str) -> String {
    if can_fail {
        format!("let {name} = {term} in (\n{}\n) else {restore}", indent(body))
    } else {
        format!("let {name} = {term} in\n{body}")
    }
}
