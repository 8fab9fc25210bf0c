//! Bounded operational semantics of the abstracted design under the
//! Dolev-Yao attacker. Breadth-first exploration of all interleavings of
//! block transitions: sends on the attacker channel feed the attacker's
//! knowledge, receives on it bind any derivable term of interest (replayed
//! observations and shaped recombinations), private channels deliver
//! faithfully through multisets. Session replication instantiates every
//! block once per session with fresh session names.

use super::knowledge::{analyze, synthesize};
use crate::pi::{AGuard, AStep, AbstractDesign, AttrOrigin, ChannelKind, Shape, TExpr};
use crate::term::{apply_reduced, Term};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Number of protocol sessions instantiated side by side.
    pub sessions: usize,
    /// Transition budget per block instance; the total path length cap is
    /// `steps * instances`.
    pub steps: usize,
    /// Term depth bound for attacker compositions.
    pub depth: usize,
    /// Hard cap on stored states; exceeding it flags the run inconclusive.
    #[serde(skip)]
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        // Two sessions expose replay and reflection; depth 6 exceeds any
        // term the bundled designs build.
        Bounds {
            sessions: 2,
            steps: 40,
            depth: 6,
            max_states: 250_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState {
    /// Current control state per instance (session-major order).
    pub control: Vec<usize>,
    /// Attribute bindings per instance; `None` = not yet assigned.
    pub bindings: Vec<Vec<Option<Term>>>,
    /// Analyzed attacker knowledge core.
    pub knowledge: BTreeSet<Term>,
    /// Pending messages per private channel.
    pub queues: Vec<BTreeMap<Term, u32>>,
    /// Payloads sent so far per correspondence query.
    pub sent: Vec<BTreeSet<Term>>,
    /// Sticky violation payload per correspondence query.
    pub violated: Vec<Option<Term>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReceivedMsg {
    pub channel: String,
    #[serde(serialize_with = "crate::dy::ser_term")]
    pub term: Term,
    pub injected: bool,
}

/// One fired transition, with enough detail to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepLabel {
    pub block: String,
    pub session: usize,
    pub transition: String,
    #[serde(skip)]
    pub indices: (usize, usize),
    pub received: Vec<ReceivedMsg>,
    pub sent: Vec<SentMsg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentMsg {
    pub channel: String,
    #[serde(serialize_with = "crate::dy::ser_term")]
    pub term: Term,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExploreStats {
    pub states: usize,
    pub transitions_fired: usize,
    pub truncated: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReachabilitySet {
    pub states: Vec<GlobalState>,
    parents: Vec<Option<(usize, StepLabel)>>,
    pub complete: bool,
    pub bounds: Bounds,
    pub stats: ExploreStats,
}

impl ReachabilitySet {
    /// Steps from the initial state to the given state.
    pub fn path(&self, mut idx: usize) -> Vec<StepLabel> {
        let mut rev = Vec::new();
        while let Some((parent, label)) = &self.parents[idx] {
            rev.push(label.clone());
            idx = *parent;
        }
        rev.reverse();
        rev
    }

    pub fn initial(&self) -> &GlobalState {
        &self.states[0]
    }
}

pub struct Instance<'d> {
    pub block: usize,
    pub session: usize,
    pub design: &'d AbstractDesign,
}

pub fn instance_count(design: &AbstractDesign, bounds: &Bounds) -> usize {
    design.blocks.len() * bounds.sessions
}

fn sys_name(design: &AbstractDesign, group: usize) -> Term {
    Term::fresh(&design.sys_groups[group].pi_name)
}

fn sess_name(design: &AbstractDesign, group: usize, session: usize) -> Term {
    Term::fresh(&format!(
        "{}_s{}",
        design.sess_groups[group].pi_name,
        session + 1
    ))
}

fn fresh_name(block: &str, attr: &str, session: usize) -> Term {
    Term::fresh(&format!("priv_{block}_{attr}_s{}", session + 1))
}

/// Restricted names a confidentiality query protects, one per session where
/// the secret is session- or instance-local.
pub fn secret_terms(design: &AbstractDesign, query: &crate::pi::SecrecyQuery, sessions: usize) -> Vec<Term> {
    use crate::pi::SecretScope;
    match query.scope {
        SecretScope::System => vec![Term::fresh(&query.pi_name)],
        SecretScope::Session => {
            let group = design
                .sess_groups
                .iter()
                .position(|g| g.pi_name == query.pi_name)
                .unwrap_or(0);
            (0..sessions).map(|s| sess_name(design, group, s)).collect()
        }
        SecretScope::Fresh => (0..sessions)
            .map(|s| Term::fresh(&format!("{}_s{}", query.pi_name, s + 1)))
            .collect(),
    }
}

pub fn initial_state(design: &AbstractDesign, bounds: &Bounds) -> GlobalState {
    let mut control = Vec::new();
    let mut bindings = Vec::new();
    for session in 0..bounds.sessions {
        for block in &design.blocks {
            control.push(block.initial);
            let attrs = block
                .attr_origins
                .iter()
                .enumerate()
                .map(|(ai, origin)| match origin {
                    AttrOrigin::System(g) => Some(sys_name(design, *g)),
                    AttrOrigin::Session(g) => Some(sess_name(design, *g, session)),
                    AttrOrigin::Fresh => {
                        Some(fresh_name(&block.name, &block.attr_names[ai], session))
                    }
                    AttrOrigin::Uninit => None,
                })
                .collect();
            bindings.push(attrs);
        }
    }
    let mut knowledge: BTreeSet<Term> = design
        .const_names
        .iter()
        .map(|c| Term::constant(c))
        .collect();
    knowledge.insert(Term::constant("intruder_0"));
    knowledge.insert(Term::constant("intruder_1"));
    analyze(&mut knowledge, bounds.depth);
    GlobalState {
        control,
        bindings,
        knowledge,
        queues: vec![BTreeMap::new(); design.channels.len()],
        sent: vec![BTreeSet::new(); design.correspondence.len()],
        violated: vec![None; design.correspondence.len()],
    }
}

#[derive(Debug)]
struct EvalAbort;

fn eval(e: &TExpr, env: &[Option<Term>], consts: &[String]) -> Result<Term, EvalAbort> {
    match e {
        TExpr::Attr(i) => env.get(*i).cloned().flatten().ok_or(EvalAbort),
        TExpr::Const(c) => Ok(Term::constant(&consts[*c])),
        TExpr::Apply(ctor, args) => {
            let vals: Result<Vec<Term>, EvalAbort> =
                args.iter().map(|a| eval(a, env, consts)).collect();
            apply_reduced(*ctor, vals?).map_err(|_| EvalAbort)
        }
    }
}

/// Candidate terms the attacker may inject for a receive into
/// (block, attribute): replayable knowledge plus derivable instances of the
/// shapes the receiver (or any honest sender) gives meaning to.
pub fn injection_candidates(
    design: &AbstractDesign,
    state: &GlobalState,
    instance: usize,
    block: usize,
    attr: usize,
    bounds: &Bounds,
) -> Vec<Term> {
    let core = &state.knowledge;
    let mut out: BTreeSet<Term> = core
        .iter()
        .filter(|t| t.depth() <= bounds.depth)
        .cloned()
        .collect();

    let env = &state.bindings[instance];
    let empty = Vec::new();
    let shapes = design
        .attr_shapes
        .get(&(block, attr))
        .unwrap_or(&empty)
        .iter()
        .chain(design.message_shapes.iter());
    let domain: Vec<Term> = core.iter().cloned().collect();
    for shape in shapes {
        instantiate_shape(shape, env, &design.const_names, &domain, bounds, &mut out);
    }
    out.into_iter()
        .filter(|t| synthesize(core, bounds.depth, t))
        .collect()
}

fn instantiate_shape(
    shape: &Shape,
    env: &[Option<Term>],
    consts: &[String],
    domain: &[Term],
    bounds: &Bounds,
    out: &mut BTreeSet<Term>,
) {
    let holes = shape.hole_count() as usize;
    if holes > 3 {
        return;
    }
    // Keep the assignment space bounded and deterministic.
    let domain: Vec<Term> = if domain.len().pow(holes.max(1) as u32) > 4096 {
        let atoms: Vec<Term> = domain
            .iter()
            .filter(|t| matches!(t, Term::Name { .. }))
            .cloned()
            .collect();
        if atoms.len().pow(holes.max(1) as u32) > 4096 {
            atoms.into_iter().take(8).collect()
        } else {
            atoms
        }
    } else {
        domain.to_vec()
    };
    if holes > 0 && domain.is_empty() {
        return;
    }
    let mut assignment = vec![0usize; holes];
    loop {
        let filled: Vec<Term> = assignment.iter().map(|&i| domain[i].clone()).collect();
        if let Some(t) = fill_shape(shape, env, consts, &filled) {
            if t.depth() <= bounds.depth {
                out.insert(t);
            }
        }
        // advance odometer
        let mut pos = 0;
        loop {
            if pos == holes {
                return;
            }
            assignment[pos] += 1;
            if assignment[pos] < domain.len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn fill_shape(
    shape: &Shape,
    env: &[Option<Term>],
    consts: &[String],
    filled: &[Term],
) -> Option<Term> {
    match shape {
        Shape::Hole(h) => filled.get(*h as usize).cloned(),
        Shape::Const(c) => Some(Term::constant(&consts[*c])),
        Shape::EvalAttr(i) => env.get(*i).cloned().flatten(),
        Shape::Apply(ctor, args) => {
            let parts: Option<Vec<Term>> = args
                .iter()
                .map(|a| fill_shape(a, env, consts, filled))
                .collect();
            Some(Term::apply(*ctor, parts?))
        }
    }
}

/// Fire one transition of one instance with the given received terms (one
/// per receive step, in order). Returns the successor and its label, or
/// nothing when evaluation or a guard fails.
pub fn fire_transition(
    design: &AbstractDesign,
    state: &GlobalState,
    instance: usize,
    block_idx: usize,
    tr_idx: usize,
    received: &[Term],
    bounds: &Bounds,
) -> Option<(GlobalState, StepLabel)> {
    let block = &design.blocks[block_idx];
    let tr = &block.transitions[tr_idx];
    if state.control[instance] != tr.source {
        return None;
    }
    let mut env = state.bindings[instance].clone();
    let mut queues = state.queues.clone();
    let mut rx = received.iter();
    let mut received_log = Vec::new();

    for step in &tr.steps {
        match step {
            AStep::Receive { chan, attr } => {
                let term = rx.next()?.clone();
                match design.channels[*chan].kind {
                    ChannelKind::Private => {
                        let q = &mut queues[*chan];
                        let count = q.get(&term).copied().unwrap_or(0);
                        if count == 0 {
                            return None;
                        }
                        if count == 1 {
                            q.remove(&term);
                        } else {
                            q.insert(term.clone(), count - 1);
                        }
                        received_log.push(ReceivedMsg {
                            channel: design.channels[*chan].name.clone(),
                            term: term.clone(),
                            injected: false,
                        });
                    }
                    ChannelKind::Attacker => {
                        received_log.push(ReceivedMsg {
                            channel: design.channels[*chan].name.clone(),
                            term: term.clone(),
                            injected: true,
                        });
                    }
                }
                env[*attr] = Some(term);
            }
            AStep::Assign { attr, value } => {
                env[*attr] = Some(eval(value, &env, &design.const_names).ok()?);
            }
            AStep::Send { .. } => {}
        }
    }

    for g in &tr.guards {
        match g {
            AGuard::Eq(l, r) => {
                let lv = eval(l, &env, &design.const_names).ok()?;
                let rv = eval(r, &env, &design.const_names).ok()?;
                if lv != rv {
                    return None;
                }
            }
            AGuard::Neq(l, r) => {
                let lv = eval(l, &env, &design.const_names).ok()?;
                let rv = eval(r, &env, &design.const_names).ok()?;
                if lv == rv {
                    return None;
                }
            }
            // Erased-computation comparison: the passing branch is explored;
            // the failing branch changes nothing.
            AGuard::Nondet => {}
        }
    }

    // Commit effects.
    let mut knowledge = state.knowledge.clone();
    let mut sent = state.sent.clone();
    let mut violated = state.violated.clone();
    let mut sent_log = Vec::new();
    for step in &tr.steps {
        if let AStep::Send {
            chan,
            value,
            auth_send,
        } = step
        {
            let term = eval(value, &env, &design.const_names).ok()?;
            for q in auth_send {
                sent[*q].insert(term.clone());
            }
            match design.channels[*chan].kind {
                ChannelKind::Attacker => {
                    if knowledge.insert(term.clone()) {
                        analyze(&mut knowledge, bounds.depth);
                    }
                }
                ChannelKind::Private => {
                    *queues[*chan].entry(term.clone()).or_insert(0) += 1;
                }
            }
            sent_log.push(SentMsg {
                channel: design.channels[*chan].name.clone(),
                term,
            });
        }
    }
    for (q, attr) in &tr.accept_events {
        let payload = env[*attr].clone()?;
        if !sent[*q].contains(&payload) && violated[*q].is_none() {
            violated[*q] = Some(payload);
        }
    }

    let mut control = state.control.clone();
    control[instance] = tr.target;
    let mut bindings = state.bindings.clone();
    bindings[instance] = env;

    let session = instance / design.blocks.len();
    let label = StepLabel {
        block: block.name.clone(),
        session: session + 1,
        transition: tr.label.clone(),
        indices: (block_idx, tr_idx),
        received: received_log,
        sent: sent_log,
    };
    Some((
        GlobalState {
            control,
            bindings,
            knowledge,
            queues,
            sent,
            violated,
        },
        label,
    ))
}

/// All receive-candidate combinations for one transition of one instance.
fn receive_combos(
    design: &AbstractDesign,
    state: &GlobalState,
    instance: usize,
    block_idx: usize,
    tr_idx: usize,
    bounds: &Bounds,
) -> Vec<Vec<Term>> {
    let tr = &design.blocks[block_idx].transitions[tr_idx];
    let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
    for step in &tr.steps {
        if let AStep::Receive { chan, attr } = step {
            let options: Vec<Term> = match design.channels[*chan].kind {
                ChannelKind::Private => state.queues[*chan].keys().cloned().collect(),
                ChannelKind::Attacker => {
                    injection_candidates(design, state, instance, block_idx, *attr, bounds)
                }
            };
            if options.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::with_capacity(combos.len() * options.len());
            for c in &combos {
                for o in &options {
                    let mut c2 = c.clone();
                    c2.push(o.clone());
                    next.push(c2);
                }
            }
            combos = next;
        }
    }
    combos
}

pub fn explore(design: &AbstractDesign, bounds: &Bounds) -> ReachabilitySet {
    let init = initial_state(design, bounds);
    let max_depth = bounds.steps.saturating_mul(instance_count(design, bounds).max(1));
    let mut states: Vec<GlobalState> = vec![init.clone()];
    let mut parents: Vec<Option<(usize, StepLabel)>> = vec![None];
    let mut index: HashMap<GlobalState, usize> = HashMap::new();
    index.insert(init, 0);
    let mut frontier: VecDeque<(usize, usize)> = VecDeque::new();
    frontier.push_back((0, 0));
    let mut stats = ExploreStats::default();
    let mut complete = true;

    while let Some((idx, depth)) = frontier.pop_front() {
        if depth >= max_depth {
            complete = false;
            stats.truncated = Some(format!("step budget {max_depth} reached"));
            continue;
        }
        let instances = states[idx].control.len();
        for instance in 0..instances {
            let block_idx = instance % design.blocks.len();
            let block = &design.blocks[block_idx];
            for tr_idx in 0..block.transitions.len() {
                if states[idx].control[instance] != block.transitions[tr_idx].source {
                    continue;
                }
                let combos = receive_combos(design, &states[idx], instance, block_idx, tr_idx, bounds);
                for combo in combos {
                    let fired = fire_transition(
                        design,
                        &states[idx],
                        instance,
                        block_idx,
                        tr_idx,
                        &combo,
                        bounds,
                    );
                    let Some((succ, label)) = fired else {
                        continue;
                    };
                    stats.transitions_fired += 1;
                    if index.contains_key(&succ) {
                        continue;
                    }
                    if states.len() >= bounds.max_states {
                        complete = false;
                        stats.truncated =
                            Some(format!("state budget {} reached", bounds.max_states));
                        continue;
                    }
                    let new_idx = states.len();
                    index.insert(succ.clone(), new_idx);
                    states.push(succ);
                    parents.push(Some((idx, label)));
                    frontier.push_back((new_idx, depth + 1));
                }
            }
        }
    }

    stats.states = states.len();
    ReachabilitySet {
        states,
        parents,
        complete,
        bounds: *bounds,
        stats,
    }
}

/// Re-execute a witness from the initial state. Returns the states along the
/// path, initial state first; fails if any step no longer fires.
pub fn replay(
    design: &AbstractDesign,
    bounds: &Bounds,
    steps: &[StepLabel],
) -> Option<Vec<GlobalState>> {
    let mut current = initial_state(design, bounds);
    let mut out = vec![current.clone()];
    for step in steps {
        let (block_idx, tr_idx) = step.indices;
        let session = step.session - 1;
        let instance = session * design.blocks.len() + block_idx;
        let received: Vec<Term> = step.received.iter().map(|r| r.term.clone()).collect();
        let (next, _) = fire_transition(
            design, &current, instance, block_idx, tr_idx, &received, bounds,
        )?;
        current = next;
        out.push(current.clone());
    }
    Some(out)
}
