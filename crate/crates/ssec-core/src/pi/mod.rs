//! Transformation of a well-formed design view into an abstract process
//! form shared by the pi-calculus exporter and the bounded verifier.
//!
//! Abstraction rules: timing clauses are dropped; arithmetic and plain method
//! calls become opaque `comb_k` applications; cryptographic methods map to
//! their constructors; guards comparing erased computations branch
//! nondeterministically, while equality over message terms and cryptographic
//! verifications stay exact; all public links collapse onto one
//! attacker-controlled channel, each private link keeps its own restricted
//! channel. Every transition executes as one atomic guarded step: receives
//! bind first, assignments compute, guards filter, sends and events take
//! effect only when the guards hold.

mod check;
mod emit;

pub use check::check_pi_text;
pub use emit::{emit_proverif, EmitOptions};

use crate::diag::Diagnostic;
use crate::model::*;
use crate::term::Ctor;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// The collapsed public medium the attacker fully controls.
    Attacker,
    /// A restricted channel delivering faithfully.
    Private,
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub name: String,
    pub kind: ChannelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrOrigin {
    /// Member of an InitialSystemKnowledge group (index into `sys_groups`).
    System(usize),
    /// Member of an InitialSessionKnowledge group (index into `sess_groups`).
    Session(usize),
    /// Key or nonce local to the block: a fresh restricted name per instance.
    Fresh,
    /// Computed data; unbound until assigned or received.
    Uninit,
}

#[derive(Debug, Clone)]
pub struct NameGroup {
    pub pi_name: String,
    pub members: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TExpr {
    Attr(usize),
    Const(usize),
    Apply(Ctor, Vec<TExpr>),
}

impl TExpr {
    pub fn contains_comb(&self) -> bool {
        match self {
            TExpr::Attr(_) | TExpr::Const(_) => false,
            TExpr::Apply(Ctor::Comb(_), _) => true,
            TExpr::Apply(_, args) => args.iter().any(TExpr::contains_comb),
        }
    }

    fn for_each(&self, f: &mut dyn FnMut(&TExpr)) {
        f(self);
        if let TExpr::Apply(_, args) = self {
            args.iter().for_each(|a| a.for_each(f));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AGuard {
    Eq(TExpr, TExpr),
    Neq(TExpr, TExpr),
    /// Comparison over erased computation: explored both ways.
    Nondet,
}

#[derive(Debug, Clone)]
pub enum AStep {
    Assign {
        attr: usize,
        value: TExpr,
    },
    Send {
        chan: usize,
        value: TExpr,
        /// Correspondence queries for which this send is the sender anchor.
        auth_send: Vec<usize>,
    },
    Receive {
        chan: usize,
        attr: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ATransition {
    pub source: usize,
    pub target: usize,
    /// Normal form: receives, then assigns, then sends.
    pub steps: Vec<AStep>,
    pub guards: Vec<AGuard>,
    /// Correspondence queries for which committing this transition is the
    /// accept event, paired with the attribute index holding the payload.
    pub accept_events: Vec<(usize, usize)>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct ProcBlock {
    pub name: String,
    pub attr_names: Vec<String>,
    pub attr_origins: Vec<AttrOrigin>,
    pub states: Vec<String>,
    pub initial: usize,
    pub transitions: Vec<ATransition>,
}

impl ProcBlock {
    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attr_names.iter().position(|a| a == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecretScope {
    /// Free private name shared by all sessions.
    System,
    /// Restricted inside the session replication.
    Session,
    /// Restricted inside one block instance.
    Fresh,
}

#[derive(Debug, Clone)]
pub struct SecrecyQuery {
    pub label: String,
    pub pi_name: String,
    pub scope: SecretScope,
}

#[derive(Debug, Clone)]
pub struct CorrespondenceQuery {
    pub label: String,
    pub send_event: String,
    pub accept_event: String,
}

/// Injection shape template: how a received message may need to look to make
/// progress inside the receiving block. Holes range over attacker-derivable
/// terms; `EvalAttr` positions evaluate receiver attributes at generation
/// time (decryption keys, expected values).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Hole(u32),
    Const(usize),
    EvalAttr(usize),
    Apply(Ctor, Vec<Shape>),
}

impl Shape {
    pub fn hole_count(&self) -> u32 {
        let mut max = 0;
        self.visit(&mut |s| {
            if let Shape::Hole(h) = s {
                max = max.max(h + 1);
            }
        });
        max
    }

    fn visit(&self, f: &mut dyn FnMut(&Shape)) {
        f(self);
        if let Shape::Apply(_, args) = self {
            args.iter().for_each(|a| a.visit(f));
        }
    }
}

#[derive(Debug, Clone)]
pub struct AbstractDesign {
    pub channels: Vec<Channel>,
    pub blocks: Vec<ProcBlock>,
    /// Public constants (literals, the uninitialized placeholder).
    pub const_names: Vec<String>,
    pub sys_groups: Vec<NameGroup>,
    pub sess_groups: Vec<NameGroup>,
    pub secrecy: Vec<SecrecyQuery>,
    pub correspondence: Vec<CorrespondenceQuery>,
    pub comb_arities: BTreeSet<u8>,
    /// Shapes keyed by (block index, attribute index) derived from how the
    /// block destructures what it receives.
    pub attr_shapes: BTreeMap<(usize, usize), Vec<Shape>>,
    /// Destructor-free message patterns any honest participant produces.
    pub message_shapes: Vec<Shape>,
    pub injective: bool,
}

impl AbstractDesign {
    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn const_index(&self, name: &str) -> Option<usize> {
        self.const_names.iter().position(|c| c == name)
    }

    pub fn send_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.transitions)
            .flat_map(|t| &t.steps)
            .filter(|s| matches!(s, AStep::Send { .. }))
            .count()
    }

    pub fn receive_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.transitions)
            .flat_map(|t| &t.steps)
            .filter(|s| matches!(s, AStep::Receive { .. }))
            .count()
    }
}

pub const ATTACKER_CHANNEL: usize = 0;
pub const UNINIT_CONST: &str = "uninit_val";

struct Lowerer<'m> {
    model: &'m Model,
    const_names: Vec<String>,
    comb_arities: BTreeSet<u8>,
    channels: Vec<Channel>,
    channel_of_port: BTreeMap<(String, String), usize>,
    errors: Vec<Diagnostic>,
}

/// Abstract a validated model. Fails only when a declared property cannot
/// survive abstraction (it names computed data rather than a restricted
/// name); everything else was the validator's job.
pub fn abstract_design(model: &Model) -> Result<AbstractDesign, Vec<Diagnostic>> {
    let mut lw = Lowerer {
        model,
        const_names: vec![UNINIT_CONST.to_string()],
        comb_arities: BTreeSet::new(),
        channels: vec![Channel {
            name: "att_ch".to_string(),
            kind: ChannelKind::Attacker,
        }],
        channel_of_port: BTreeMap::new(),
        errors: Vec::new(),
    };
    lw.assign_channels();

    // Knowledge groups, in pragma declaration order.
    let mut sys_groups: Vec<NameGroup> = Vec::new();
    let mut sess_groups: Vec<NameGroup> = Vec::new();
    let mut origin_of: BTreeMap<(String, String), AttrOrigin> = BTreeMap::new();
    let mut used_names: BTreeSet<String> = BTreeSet::new();
    for p in &model.pragmas {
        let Some((b0, a0)) = p.members.first() else {
            continue;
        };
        let (prefix, groups, mk): (_, &mut Vec<NameGroup>, fn(usize) -> AttrOrigin) = match p.scope
        {
            KnowledgeScope::System => ("sys", &mut sys_groups, AttrOrigin::System),
            KnowledgeScope::Session => ("sess", &mut sess_groups, AttrOrigin::Session),
        };
        let pi_name = unique_name(&mut used_names, &format!("{prefix}_{b0}_{a0}"));
        let idx = groups.len();
        groups.push(NameGroup {
            pi_name,
            members: p.members.clone(),
        });
        for (b, a) in &p.members {
            origin_of.insert((b.clone(), a.clone()), mk(idx));
        }
    }

    let mut blocks = Vec::new();
    for block in &model.blocks {
        let machine = model.machine_of(&block.name);
        let attr_names: Vec<String> = block.attributes.iter().map(|a| a.name.clone()).collect();
        let attr_origins: Vec<AttrOrigin> = block
            .attributes
            .iter()
            .map(|a| {
                origin_of
                    .get(&(block.name.clone(), a.name.clone()))
                    .copied()
                    .unwrap_or(match a.sem_type {
                        SemType::Key | SemType::Nonce => AttrOrigin::Fresh,
                        _ => AttrOrigin::Uninit,
                    })
            })
            .collect();
        let (states, initial, transitions) = match machine {
            None => (vec!["idle".to_string()], 0, Vec::new()),
            Some(m) => {
                let states: Vec<String> = m.states.iter().map(|s| s.name.clone()).collect();
                let initial = m
                    .states
                    .iter()
                    .position(|s| s.initial)
                    .unwrap_or(0);
                let transitions = m
                    .transitions
                    .iter()
                    .map(|t| lw.lower_transition(block, &states, t))
                    .collect();
                (states, initial, transitions)
            }
        };
        blocks.push(ProcBlock {
            name: block.name.clone(),
            attr_names,
            attr_origins,
            states,
            initial,
            transitions,
        });
    }

    // Secrecy queries need a restricted name to talk about.
    let mut secrecy = Vec::new();
    for c in &model.confidentiality {
        let Some(bi) = blocks.iter().position(|b| b.name == c.block) else {
            continue;
        };
        let Some(ai) = blocks[bi].attr_index(&c.attribute) else {
            continue;
        };
        let (pi_name, scope) = match blocks[bi].attr_origins[ai] {
            AttrOrigin::System(g) => (sys_groups[g].pi_name.clone(), SecretScope::System),
            AttrOrigin::Session(g) => (sess_groups[g].pi_name.clone(), SecretScope::Session),
            AttrOrigin::Fresh => (
                format!("priv_{}_{}", c.block, c.attribute),
                SecretScope::Fresh,
            ),
            AttrOrigin::Uninit => {
                lw.errors.push(Diagnostic::error(
                    format!(
                        "confidentiality property references `{}.{}`, a computed value erased by \
                         abstraction; declare the attribute as key or nonce, or share it through \
                         a knowledge pragma, so it denotes a restricted name",
                        c.block, c.attribute
                    ),
                    c.span.clone(),
                ));
                continue;
            }
        };
        secrecy.push(SecrecyQuery {
            label: c.label(),
            pi_name,
            scope,
        });
    }

    let mut correspondence = Vec::new();
    for a in &model.authenticity {
        correspondence.push(CorrespondenceQuery {
            label: a.label(),
            send_event: format!(
                "authSend__{}__{}__{}",
                a.sender.block, a.sender.state, a.sender.message
            ),
            accept_event: format!(
                "authAccept__{}__{}__{}",
                a.receiver.block, a.receiver.state, a.receiver.message
            ),
        });
    }

    // Wire correspondence anchors into the transitions.
    for (qi, a) in model.authenticity.iter().enumerate() {
        if let Some(bi) = blocks.iter().position(|b| b.name == a.sender.block) {
            let Some(si) = blocks[bi].state_index(&a.sender.state) else {
                continue;
            };
            let Some(mi) = blocks[bi].attr_index(&a.sender.message) else {
                continue;
            };
            for t in &mut blocks[bi].transitions {
                if t.source != si {
                    continue;
                }
                for s in &mut t.steps {
                    if let AStep::Send {
                        value: TExpr::Attr(attr),
                        auth_send,
                        ..
                    } = s
                    {
                        if *attr == mi {
                            auth_send.push(qi);
                        }
                    }
                }
            }
        }
        if let Some(bi) = blocks.iter().position(|b| b.name == a.receiver.block) {
            let Some(si) = blocks[bi].state_index(&a.receiver.state) else {
                continue;
            };
            let Some(mi) = blocks[bi].attr_index(&a.receiver.message) else {
                continue;
            };
            for t in &mut blocks[bi].transitions {
                let receives_msg = t
                    .steps
                    .iter()
                    .any(|s| matches!(s, AStep::Receive { attr, .. } if *attr == mi));
                if t.target == si && receives_msg {
                    t.accept_events.push((qi, mi));
                }
            }
        }
    }

    if !lw.errors.is_empty() {
        let mut errs = lw.errors;
        crate::diag::sort_diagnostics(&mut errs);
        return Err(errs);
    }

    let mut design = AbstractDesign {
        channels: lw.channels,
        blocks,
        const_names: lw.const_names,
        sys_groups,
        sess_groups,
        secrecy,
        correspondence,
        comb_arities: lw.comb_arities,
        attr_shapes: BTreeMap::new(),
        message_shapes: Vec::new(),
        injective: false,
    };
    collect_shapes(&mut design);
    Ok(design)
}

fn unique_name(used: &mut BTreeSet<String>, base: &str) -> String {
    if used.insert(base.to_string()) {
        return base.to_string();
    }
    let mut i = 2;
    loop {
        let candidate = format!("{base}_{i}");
        if used.insert(candidate.clone()) {
            return candidate;
        }
        i += 1;
    }
}

impl<'m> Lowerer<'m> {
    fn assign_channels(&mut self) {
        for l in &self.model.links {
            let idx = match l.visibility {
                Visibility::Public => ATTACKER_CHANNEL,
                Visibility::Private => {
                    let name = format!(
                        "priv_{}_{}__{}_{}",
                        l.a.block, l.a.port, l.b.block, l.b.port
                    );
                    self.channels.push(Channel {
                        name,
                        kind: ChannelKind::Private,
                    });
                    self.channels.len() - 1
                }
            };
            self.channel_of_port
                .insert((l.a.block.clone(), l.a.port.clone()), idx);
            self.channel_of_port
                .insert((l.b.block.clone(), l.b.port.clone()), idx);
        }
    }

    /// Unconnected ports get a dangling restricted channel: sends vanish into
    /// it and receives on it never fire.
    fn port_channel(&mut self, block: &str, port: &str) -> usize {
        if let Some(&idx) = self.channel_of_port.get(&(block.to_string(), port.to_string())) {
            return idx;
        }
        let name = format!("dangling_{block}_{port}");
        self.channels.push(Channel {
            name,
            kind: ChannelKind::Private,
        });
        let idx = self.channels.len() - 1;
        self.channel_of_port
            .insert((block.to_string(), port.to_string()), idx);
        idx
    }

    fn const_id(&mut self, name: String) -> usize {
        if let Some(i) = self.const_names.iter().position(|c| *c == name) {
            i
        } else {
            self.const_names.push(name);
            self.const_names.len() - 1
        }
    }

    fn lower_transition(
        &mut self,
        block: &DesignBlock,
        states: &[String],
        t: &Transition,
    ) -> ATransition {
        let source = states.iter().position(|s| *s == t.source).unwrap_or(0);
        let target = states.iter().position(|s| *s == t.target).unwrap_or(0);
        let mut receives = Vec::new();
        let mut assigns = Vec::new();
        let mut sends = Vec::new();
        for a in &t.actions {
            match a {
                Action::Receive { port, attr } => {
                    let chan = self.port_channel(&block.name, port);
                    let attr = block
                        .attributes
                        .iter()
                        .position(|x| &x.name == attr)
                        .unwrap_or(0);
                    receives.push(AStep::Receive { chan, attr });
                }
                Action::Assign { attr, value } => {
                    let attr = block
                        .attributes
                        .iter()
                        .position(|x| &x.name == attr)
                        .unwrap_or(0);
                    let value = self.lower_expr(block, value);
                    assigns.push(AStep::Assign { attr, value });
                }
                Action::Send { port, value } => {
                    let chan = self.port_channel(&block.name, port);
                    let value = self.lower_expr(block, value);
                    sends.push(AStep::Send {
                        chan,
                        value,
                        auth_send: Vec::new(),
                    });
                }
            }
        }
        let guards = t.guards.iter().map(|g| self.lower_guard(block, g)).collect();
        let mut steps = receives;
        steps.extend(assigns);
        steps.extend(sends);
        ATransition {
            source,
            target,
            steps,
            guards,
            accept_events: Vec::new(),
            label: format!("{} -> {}", t.source, t.target),
        }
    }

    fn lower_expr(&mut self, block: &DesignBlock, e: &Expr) -> TExpr {
        match e {
            Expr::Attr(a) => {
                let idx = block
                    .attributes
                    .iter()
                    .position(|x| &x.name == a)
                    .unwrap_or(0);
                TExpr::Attr(idx)
            }
            Expr::Int(n) => {
                let name = if *n < 0 {
                    format!("lit_neg_{}", -n)
                } else {
                    format!("lit_{n}")
                };
                TExpr::Const(self.const_id(name))
            }
            Expr::Bool(b) => TExpr::Const(self.const_id(format!("lit_{b}"))),
            Expr::Call { name, args } => {
                let lowered: Vec<TExpr> = args.iter().map(|a| self.lower_expr(block, a)).collect();
                let ctor = match name.as_str() {
                    "concat" => Some(Ctor::Pair),
                    "first" => Some(Ctor::Proj1),
                    "second" => Some(Ctor::Proj2),
                    _ => block.method(name).and_then(|m| match m.role {
                        CryptoRole::Encrypt => Some(Ctor::Senc),
                        CryptoRole::Decrypt => Some(Ctor::Sdec),
                        CryptoRole::Aencrypt => Some(Ctor::Aenc),
                        CryptoRole::Adecrypt => Some(Ctor::Adec),
                        CryptoRole::Sign => Some(Ctor::Sign),
                        CryptoRole::Mac => Some(Ctor::Mac),
                        CryptoRole::Hash => Some(Ctor::Hash),
                        CryptoRole::Plain | CryptoRole::VerifySign | CryptoRole::VerifyMac => None,
                    }),
                };
                match ctor {
                    Some(c) => TExpr::Apply(c, lowered),
                    None => {
                        // Plain computation: symbolic, one-way.
                        let k = lowered.len().min(u8::MAX as usize) as u8;
                        self.comb_arities.insert(k);
                        TExpr::Apply(Ctor::Comb(k), lowered)
                    }
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                debug_assert!(!op.is_comparison(), "validator keeps comparisons in guards");
                let l = self.lower_expr(block, lhs);
                let r = self.lower_expr(block, rhs);
                self.comb_arities.insert(2);
                TExpr::Apply(Ctor::Comb(2), vec![l, r])
            }
        }
    }

    fn lower_guard(&mut self, block: &DesignBlock, g: &Expr) -> AGuard {
        match g {
            Expr::Binary { op, lhs, rhs } if op.is_comparison() => {
                if !matches!(op, BinOp::Eq | BinOp::Ne) {
                    // Ordering needs concrete values, which abstraction drops.
                    return AGuard::Nondet;
                }
                let l = self.lower_expr(block, lhs);
                let r = self.lower_expr(block, rhs);
                if l.contains_comb() || r.contains_comb() {
                    return AGuard::Nondet;
                }
                match op {
                    BinOp::Eq => AGuard::Eq(l, r),
                    _ => AGuard::Neq(l, r),
                }
            }
            Expr::Call { name, args } => {
                let role = block.method(name).map(|m| m.role);
                match role {
                    Some(CryptoRole::VerifyMac) if args.len() == 3 => {
                        // verify_mac(message, code, key): the code equals the
                        // mac of the message under the key.
                        let m = self.lower_expr(block, &args[0]);
                        let c = self.lower_expr(block, &args[1]);
                        let k = self.lower_expr(block, &args[2]);
                        AGuard::Eq(c, TExpr::Apply(Ctor::Mac, vec![m, k]))
                    }
                    Some(CryptoRole::VerifySign) if args.len() == 3 => {
                        // verify_sign(message, signature, pubkey): checking the
                        // signature with the key recovers the message.
                        let m = self.lower_expr(block, &args[0]);
                        let s = self.lower_expr(block, &args[1]);
                        let pk = self.lower_expr(block, &args[2]);
                        AGuard::Eq(TExpr::Apply(Ctor::Checksign, vec![s, pk]), m)
                    }
                    _ => AGuard::Nondet,
                }
            }
            Expr::Bool(b) => {
                let t = self.const_id("lit_true".to_string());
                let v = self.const_id(format!("lit_{b}"));
                AGuard::Eq(TExpr::Const(v), TExpr::Const(t))
            }
            Expr::Attr(a) => {
                let idx = block
                    .attributes
                    .iter()
                    .position(|x| &x.name == a)
                    .unwrap_or(0);
                let t = self.const_id("lit_true".to_string());
                AGuard::Eq(TExpr::Attr(idx), TExpr::Const(t))
            }
            _ => AGuard::Nondet,
        }
    }
}

// ---------------------------------------------------------------------------
// Injection shape extraction
// ---------------------------------------------------------------------------

/// A bounded attacker does not benefit from arbitrary junk: injected terms
/// only matter when the receiver can destructure them or when they mimic a
/// message some participant produces. Collect both families of templates.
fn collect_shapes(design: &mut AbstractDesign) {
    let mut message_shapes = Vec::new();
    let mut attr_shapes: BTreeMap<(usize, usize), Vec<Shape>> = BTreeMap::new();

    for (bi, block) in design.blocks.iter().enumerate() {
        for t in &block.transitions {
            let mut exprs: Vec<&TExpr> = Vec::new();
            for s in &t.steps {
                match s {
                    AStep::Assign { value, .. } | AStep::Send { value, .. } => exprs.push(value),
                    AStep::Receive { .. } => {}
                }
            }
            for g in &t.guards {
                match g {
                    AGuard::Eq(l, r) | AGuard::Neq(l, r) => {
                        exprs.push(l);
                        exprs.push(r);
                    }
                    AGuard::Nondet => {}
                }
            }
            for e in exprs {
                // Honest message patterns: destructor-free send/assign values
                // with structure.
                if let Some(shape) = honest_shape(e) {
                    if matches!(shape, Shape::Apply(..)) && !message_shapes.contains(&shape) {
                        message_shapes.push(shape);
                    }
                }
                // Destructor expectations on received attributes.
                e.for_each(&mut |sub| {
                    if let TExpr::Apply(ctor, _) = sub {
                        if ctor.is_destructor() {
                            let mut next_hole = 0u32;
                            let cont = Shape::Hole(next_hole);
                            next_hole += 1;
                            if let Some((attr, shape)) = expectation(sub, cont, &mut next_hole) {
                                let entry = attr_shapes.entry((bi, attr)).or_default();
                                if !entry.contains(&shape) {
                                    entry.push(shape);
                                }
                            }
                        }
                    }
                });
            }
        }
    }

    design.message_shapes = message_shapes;
    design.attr_shapes = attr_shapes;
}

/// Destructor-free shape of an honest expression; attribute positions become
/// holes shared per attribute index.
fn honest_shape(e: &TExpr) -> Option<Shape> {
    match e {
        TExpr::Attr(i) => Some(Shape::Hole(*i as u32)),
        TExpr::Const(c) => Some(Shape::Const(*c)),
        TExpr::Apply(ctor, args) => {
            if ctor.is_destructor() {
                return None;
            }
            let lowered: Option<Vec<Shape>> = args.iter().map(honest_shape).collect();
            Some(Shape::Apply(*ctor, lowered?))
        }
    }
}

/// Invert a destructor chain into the constructor shape the receiver expects.
/// `sdec(proj1(m), k)` on attribute `m` yields `pair(senc(hole, eval k), hole)`.
fn expectation(e: &TExpr, cont: Shape, next_hole: &mut u32) -> Option<(usize, Shape)> {
    match e {
        TExpr::Attr(i) => Some((*i, cont)),
        TExpr::Apply(Ctor::Proj1, args) => {
            let h = Shape::Hole(*next_hole);
            *next_hole += 1;
            expectation(&args[0], Shape::Apply(Ctor::Pair, vec![cont, h]), next_hole)
        }
        TExpr::Apply(Ctor::Proj2, args) => {
            let h = Shape::Hole(*next_hole);
            *next_hole += 1;
            expectation(&args[0], Shape::Apply(Ctor::Pair, vec![h, cont]), next_hole)
        }
        TExpr::Apply(Ctor::Sdec, args) => {
            let key = eval_shape(&args[1], next_hole);
            expectation(&args[0], Shape::Apply(Ctor::Senc, vec![cont, key]), next_hole)
        }
        TExpr::Apply(Ctor::Adec, args) => {
            let key = eval_shape(&args[1], next_hole);
            expectation(
                &args[0],
                Shape::Apply(Ctor::Aenc, vec![cont, Shape::Apply(Ctor::Pk, vec![key])]),
                next_hole,
            )
        }
        TExpr::Apply(Ctor::Checksign, args) => {
            let h = Shape::Hole(*next_hole);
            *next_hole += 1;
            expectation(&args[0], Shape::Apply(Ctor::Sign, vec![cont, h]), next_hole)
        }
        _ => None,
    }
}

/// Shape of a key expression, evaluated in the receiver's environment when
/// candidates are generated. Anything not evaluable becomes a hole.
fn eval_shape(e: &TExpr, next_hole: &mut u32) -> Shape {
    match e {
        TExpr::Attr(i) => Shape::EvalAttr(*i),
        TExpr::Const(c) => Shape::Const(*c),
        TExpr::Apply(ctor, args) if !ctor.is_destructor() => {
            let lowered = args.iter().map(|a| eval_shape(a, next_hole)).collect();
            Shape::Apply(*ctor, lowered)
        }
        _ => {
            let h = Shape::Hole(*next_hole);
            *next_hole += 1;
            h
        }
    }
}
