//! Shared test machinery: independent brute-force oracles for knowledge
//! saturation and attack-graph semantics, plus seeded random generators for
//! terms, attack graphs and whole models. Oracles deliberately avoid the
//! library's algorithms: the closure oracle materializes the bounded closure
//! with a worklist, the attack oracle enumerates every permutation of every
//! leaf subset and evaluates completions recursively.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use ssec_core::model::*;
use ssec_core::term::{Ctor, Term};
use std::collections::{BTreeMap, BTreeSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Saturation oracle
// ---------------------------------------------------------------------------

/// Constructors the closure enumerates; comb arities are fixed so the term
/// universe stays finite.
const BINARY: [Ctor; 6] = [
    Ctor::Senc,
    Ctor::Aenc,
    Ctor::Sign,
    Ctor::Mac,
    Ctor::Pair,
    Ctor::Comb(2),
];
const UNARY: [Ctor; 3] = [Ctor::Pk, Ctor::Hash, Ctor::Comb(1)];

/// Materialized bounded closure: decompositions are unconditional, and a
/// construction joins the set only when the built term respects the depth
/// bound. Keys used by decomposition rules must themselves be present, which
/// the construction fixed point guarantees for everything synthesizable.
pub fn brute_closure(kb: &BTreeSet<Term>, depth_bound: usize) -> BTreeSet<Term> {
    let mut s = kb.clone();
    loop {
        let mut fresh: BTreeSet<Term> = BTreeSet::new();
        for t in &s {
            if let Term::Apply(ctor, args) = t {
                match ctor {
                    Ctor::Pair => {
                        fresh.insert(args[0].clone());
                        fresh.insert(args[1].clone());
                    }
                    Ctor::Senc => {
                        if s.contains(&args[1]) {
                            fresh.insert(args[0].clone());
                        }
                    }
                    Ctor::Aenc => {
                        if let Term::Apply(Ctor::Pk, sk) = &args[1] {
                            if s.contains(&sk[0]) {
                                fresh.insert(args[0].clone());
                            }
                        }
                    }
                    Ctor::Sign => {
                        if s.contains(&Term::apply(Ctor::Pk, vec![args[1].clone()])) {
                            fresh.insert(args[0].clone());
                        }
                    }
                    _ => {}
                }
            }
        }
        // Constructions: only arguments shallow enough to stay in bounds.
        let shallow: Vec<&Term> = s.iter().filter(|t| t.depth() < depth_bound).collect();
        for c in UNARY {
            for a in &shallow {
                fresh.insert(Term::apply(c, vec![(*a).clone()]));
            }
        }
        for c in BINARY {
            for a in &shallow {
                for b in &shallow {
                    fresh.insert(Term::apply(c, vec![(*a).clone(), (*b).clone()]));
                }
            }
        }
        let before = s.len();
        s.extend(fresh);
        if s.len() == before {
            return s;
        }
    }
}

/// The finite term universe the oracle's closure lives in: everything of
/// bounded depth over the given atoms, plus all subterms of the knowledge
/// base (extraction is not depth-limited).
pub fn term_universe(atoms: &[Term], depth_bound: usize, kb: &BTreeSet<Term>) -> BTreeSet<Term> {
    let mut layers: Vec<BTreeSet<Term>> = vec![atoms.iter().cloned().collect()];
    for _ in 1..depth_bound {
        let prev: Vec<Term> = layers.iter().flatten().cloned().collect();
        let mut next = BTreeSet::new();
        for c in UNARY {
            for a in &prev {
                next.insert(Term::apply(c, vec![a.clone()]));
            }
        }
        for c in BINARY {
            for a in &prev {
                for b in &prev {
                    next.insert(Term::apply(c, vec![a.clone(), b.clone()]));
                }
            }
        }
        layers.push(next);
    }
    let mut out: BTreeSet<Term> = layers.into_iter().flatten().collect();
    for t in kb {
        subterms(t, &mut out);
    }
    out
}

fn subterms(t: &Term, out: &mut BTreeSet<Term>) {
    out.insert(t.clone());
    if let Term::Apply(_, args) = t {
        for a in args.iter() {
            subterms(a, out);
        }
    }
}

/// Random destructor-free term over the atoms, depth-limited.
pub fn random_term(rng: &mut ChaCha8Rng, atoms: &[Term], max_depth: usize) -> Term {
    if max_depth <= 1 || rng.gen_bool(0.35) {
        return atoms.choose(rng).unwrap().clone();
    }
    let ctor = if rng.gen_bool(0.75) {
        *BINARY.choose(rng).unwrap()
    } else {
        *UNARY.choose(rng).unwrap()
    };
    let args = (0..ctor.arity())
        .map(|_| random_term(rng, atoms, max_depth - 1))
        .collect();
    Term::apply(ctor, args)
}

pub fn random_kb(rng: &mut ChaCha8Rng, atoms: &[Term], max_terms: usize, max_depth: usize) -> BTreeSet<Term> {
    let n = rng.gen_range(1..=max_terms);
    (0..n).map(|_| random_term(rng, atoms, max_depth)).collect()
}

// ---------------------------------------------------------------------------
// Attack-graph oracle
// ---------------------------------------------------------------------------

/// Plain description of an attack graph for the oracle evaluator.
pub struct OracleGraph {
    /// node id -> producing operator id, if any
    pub producers: BTreeMap<String, String>,
    /// operator id -> (kind, inputs); inputs name nodes or other operators
    pub ops: BTreeMap<String, (AttackOp, Vec<String>)>,
    pub leaves: Vec<String>,
}

impl OracleGraph {
    pub fn from_model(model: &Model) -> OracleGraph {
        let mut producers = BTreeMap::new();
        let mut ops = BTreeMap::new();
        for g in &model.attack_groups {
            for op in &g.operators {
                producers.insert(op.output.clone(), op.id.clone());
                ops.insert(op.id.clone(), (op.op, op.inputs.clone()));
            }
        }
        let leaves = model
            .attack_nodes()
            .filter(|(_, a)| !producers.contains_key(&a.id))
            .map(|(_, a)| a.id.clone())
            .collect();
        OracleGraph {
            producers,
            ops,
            leaves,
        }
    }

    /// Completion step of a node or operator under a fixed execution,
    /// straightforwardly from the definitions; `None` = not achieved.
    pub fn completion(&self, id: &str, order: &[String]) -> Option<usize> {
        if let Some(op) = self.producers.get(id) {
            return self.op_completion(op, order);
        }
        if self.ops.contains_key(id) {
            return self.op_completion(id, order);
        }
        order.iter().position(|l| l == id).map(|p| p + 1)
    }

    fn op_completion(&self, op: &str, order: &[String]) -> Option<usize> {
        let (kind, inputs) = &self.ops[op];
        let times: Vec<Option<usize>> = inputs
            .iter()
            .map(|i| self.completion(i, order))
            .collect();
        match kind {
            AttackOp::Or => times.into_iter().flatten().min(),
            AttackOp::And => {
                let all: Option<Vec<usize>> = times.into_iter().collect();
                all.map(|v| v.into_iter().max().unwrap_or(0))
            }
            AttackOp::Sequence => {
                let all: Option<Vec<usize>> = times.into_iter().collect();
                let v = all?;
                if v.windows(2).all(|w| w[0] < w[1]) {
                    v.last().copied()
                } else {
                    None
                }
            }
            AttackOp::Before => {
                let a = times[0]?;
                let b = times[1]?;
                if a < b {
                    Some(b)
                } else {
                    None
                }
            }
            AttackOp::After => {
                let a = times[0]?;
                let b = times[1]?;
                if a > b {
                    Some(a)
                } else {
                    None
                }
            }
        }
    }

    /// Exhaustive check: some ordering of some subset of `enabled` achieves
    /// the root.
    pub fn achievable(&self, root: &str, enabled: &BTreeSet<String>) -> bool {
        let pool: Vec<String> = self
            .leaves
            .iter()
            .filter(|l| enabled.contains(*l))
            .cloned()
            .collect();
        let mut found = false;
        permutations_of_subsets(&pool, &mut |order| {
            if !found && self.completion(root, order).is_some() {
                found = true;
            }
        });
        found
    }

    /// Every valid ordering of every minimal satisfying leaf set.
    pub fn traces(&self, root: &str) -> BTreeSet<Vec<String>> {
        let pool = self.leaves.clone();
        let n = pool.len();
        // satisfying subsets
        let mut satisfying: Vec<BTreeSet<String>> = Vec::new();
        for mask in 0u32..(1 << n) {
            let set: BTreeSet<String> = pool
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l.clone())
                .collect();
            if self.achievable(root, &set) {
                satisfying.push(set);
            }
        }
        let minimal: Vec<&BTreeSet<String>> = satisfying
            .iter()
            .filter(|s| {
                !satisfying
                    .iter()
                    .any(|other| other.len() < s.len() && other.is_subset(s))
                    && !satisfying
                        .iter()
                        .any(|other| other.len() == s.len() && *other != **s && other.is_subset(s))
            })
            .collect();
        let mut out = BTreeSet::new();
        for set in minimal {
            let items: Vec<String> = set.iter().cloned().collect();
            permutations(&items, &mut Vec::new(), &mut |order| {
                if self.completion(root, order).is_some() {
                    out.insert(order.to_vec());
                }
            });
        }
        out
    }
}

fn permutations(items: &[String], prefix: &mut Vec<String>, visit: &mut impl FnMut(&[String])) {
    if prefix.len() == items.len() {
        visit(prefix);
        return;
    }
    for item in items {
        if !prefix.contains(item) {
            prefix.push(item.clone());
            permutations(items, prefix, visit);
            prefix.pop();
        }
    }
}

fn permutations_of_subsets(pool: &[String], visit: &mut impl FnMut(&[String])) {
    let n = pool.len();
    for mask in 0u32..(1 << n) {
        let subset: Vec<String> = pool
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.clone())
            .collect();
        permutations(&subset, &mut Vec::new(), &mut |order| visit(order));
    }
}

/// Random single-asset attack graph with at most `max_leaves` leaves; inputs
/// reference attack nodes only, outputs are fresh nodes, so the operator
/// graph is acyclic by construction.
pub fn random_attack_model(rng: &mut ChaCha8Rng, max_leaves: usize) -> Model {
    let n_leaves = rng.gen_range(1..=max_leaves);
    let mut text = String::from("asset Zone {\n");
    let mut pool: Vec<String> = Vec::new();
    for i in 0..n_leaves {
        let id = format!("leaf{i}");
        text.push_str(&format!("  attack {id}\n"));
        pool.push(id);
    }
    let n_ops = rng.gen_range(0..=3usize);
    let mut last_output: Option<String> = None;
    for o in 0..n_ops {
        let kind = *[
            AttackOp::Or,
            AttackOp::And,
            AttackOp::Sequence,
            AttackOp::Before,
            AttackOp::After,
        ]
        .choose(rng)
        .unwrap();
        let want = match kind {
            AttackOp::Before | AttackOp::After => 2,
            _ => rng.gen_range(2..=3.min(pool.len().max(2))),
        };
        if pool.len() < want {
            break;
        }
        let mut inputs = pool.clone();
        inputs.shuffle(rng);
        inputs.truncate(want);
        let output = format!("goal{o}");
        let root_kw = "";
        text.push_str(&format!(
            "  {root_kw}attack {output}\n  {} op{o} ({}) -> {output}\n",
            kind.keyword(),
            inputs.join(", ")
        ));
        pool.push(output.clone());
        last_output = Some(output);
    }
    let root = match last_output {
        Some(r) => r,
        None => pool[0].clone(),
    };
    text.push_str("}\n");
    // tag the root
    let text = text.replace(
        &format!("attack {root}\n"),
        &format!("root attack {root}\n"),
    );
    let out = ssec_core::dsl::parse_source(&text, "random_attack.ssec");
    assert!(
        !out.diagnostics.iter().any(|d| d.is_error()),
        "generator produced invalid model:\n{text}\n{:?}",
        out.diagnostics
    );
    out.model
}

// ---------------------------------------------------------------------------
// Random well-formed models
// ---------------------------------------------------------------------------

fn ident(rng: &mut ChaCha8Rng, prefix: &str, i: usize) -> String {
    let _ = rng;
    format!("{prefix}{i}")
}

/// A random model touching every view, valid by construction: references
/// point to earlier declarations, arities match roles, every machine has one
/// initial state.
pub fn random_model(rng: &mut ChaCha8Rng) -> Model {
    let mut m = Model::default();

    // requirements with acyclic containment/derivation (edges point to
    // earlier requirements only)
    let kinds = [
        RequirementKind::Functional,
        RequirementKind::Confidentiality,
        RequirementKind::AccessControl,
        RequirementKind::Integrity,
        RequirementKind::Freshness,
        RequirementKind::Authenticity,
        RequirementKind::Anonymity,
        RequirementKind::Other("résilience".to_string()),
    ];
    let n_reqs = rng.gen_range(0..4);
    for i in 0..n_reqs {
        let earlier: Vec<String> = (0..i).map(|j| ident(rng, "Req", j)).collect();
        let pick = |rng: &mut ChaCha8Rng, from: &[String]| -> Vec<String> {
            let mut out: Vec<String> = from
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .cloned()
                .collect();
            out.dedup();
            out
        };
        m.requirements.push(Requirement {
            id: ident(rng, "Req", i),
            title: format!("Requirement {i} — títle"),
            kind: kinds.choose(rng).unwrap().clone(),
            description: if rng.gen_bool(0.5) {
                format!("descriptîon {i}")
            } else {
                String::new()
            },
            children: pick(rng, &earlier),
            derived_from: pick(rng, &earlier),
            span: None,
        });
    }

    // blocks with attributes, role-correct methods and ports
    let sem_types = [SemType::Data, SemType::Key, SemType::Nonce, SemType::Bool, SemType::Int];
    let roles = [
        CryptoRole::Encrypt,
        CryptoRole::Decrypt,
        CryptoRole::Mac,
        CryptoRole::VerifyMac,
        CryptoRole::Hash,
        CryptoRole::Sign,
        CryptoRole::VerifySign,
        CryptoRole::Plain,
    ];
    let n_blocks = rng.gen_range(0..3);
    for b in 0..n_blocks {
        let n_attrs = rng.gen_range(1..4);
        let attributes = (0..n_attrs)
            .map(|a| Attribute {
                name: ident(rng, "attr", a),
                sem_type: *sem_types.choose(rng).unwrap(),
                span: None,
            })
            .collect();
        let n_methods = rng.gen_range(0..3);
        let methods = (0..n_methods)
            .map(|i| {
                let role = *roles.choose(rng).unwrap();
                MethodSig {
                    name: ident(rng, "method", i),
                    arity: role.required_arity().unwrap_or_else(|| rng.gen_range(0..4)),
                    role,
                    span: None,
                }
            })
            .collect();
        let n_ports = rng.gen_range(0..3);
        m.blocks.push(DesignBlock {
            name: ident(rng, "Block", b),
            attributes,
            methods,
            ports: (0..n_ports).map(|p| ident(rng, "port", p)).collect(),
            span: None,
        });
    }

    // links between distinct free ports
    let mut free_ports: Vec<Endpoint> = m
        .blocks
        .iter()
        .flat_map(|b| {
            b.ports.iter().map(|p| Endpoint {
                block: b.name.clone(),
                port: p.clone(),
            })
        })
        .collect();
    while free_ports.len() >= 2 && rng.gen_bool(0.6) {
        let a = free_ports.remove(rng.gen_range(0..free_ports.len()));
        let b = free_ports.remove(rng.gen_range(0..free_ports.len()));
        m.links.push(Link {
            a,
            b,
            visibility: if rng.gen_bool(0.5) {
                Visibility::Public
            } else {
                Visibility::Private
            },
            span: None,
        });
    }

    // a state machine for some blocks
    for b in 0..m.blocks.len() {
        if !rng.gen_bool(0.7) {
            continue;
        }
        let block = m.blocks[b].clone();
        let n_states = rng.gen_range(1..4);
        let states: Vec<StateDecl> = (0..n_states)
            .map(|s| StateDecl {
                name: ident(rng, "s", s),
                initial: s == 0,
                span: None,
            })
            .collect();
        let mut transitions = Vec::new();
        let n_tr = rng.gen_range(0..3);
        for _ in 0..n_tr {
            let source = states.choose(rng).unwrap().name.clone();
            let target = states.choose(rng).unwrap().name.clone();
            let mut actions = Vec::new();
            let attr_ref = |rng: &mut ChaCha8Rng| {
                Expr::Attr(block.attributes.choose(rng).unwrap().name.clone())
            };
            if rng.gen_bool(0.7) {
                let value = match rng.gen_range(0..4) {
                    0 => Expr::Int(rng.gen_range(0..100)),
                    1 => attr_ref(rng),
                    2 => Expr::Binary {
                        op: *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div].choose(rng).unwrap(),
                        lhs: Box::new(attr_ref(rng)),
                        rhs: Box::new(Expr::Int(rng.gen_range(0..10))),
                    },
                    _ => Expr::call("concat", vec![attr_ref(rng), attr_ref(rng)]),
                };
                actions.push(Action::Assign {
                    attr: block.attributes.choose(rng).unwrap().name.clone(),
                    value,
                });
            }
            if !block.ports.is_empty() && rng.gen_bool(0.5) {
                let port = block.ports.choose(rng).unwrap().clone();
                if rng.gen_bool(0.5) {
                    actions.push(Action::Send {
                        port,
                        value: attr_ref(rng),
                    });
                } else {
                    actions.push(Action::Receive {
                        port,
                        attr: block.attributes.choose(rng).unwrap().name.clone(),
                    });
                }
            }
            let guards = if rng.gen_bool(0.3) {
                vec![Expr::Binary {
                    op: *[BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Ge].choose(rng).unwrap(),
                    lhs: Box::new(attr_ref(rng)),
                    rhs: Box::new(Expr::Int(rng.gen_range(0..10))),
                }]
            } else {
                Vec::new()
            };
            transitions.push(Transition {
                source,
                target,
                guards,
                timing: if rng.gen_bool(0.3) {
                    let lo = rng.gen_range(0..10);
                    Some((lo, lo + rng.gen_range(0..10)))
                } else {
                    None
                },
                actions,
                span: None,
            });
        }
        m.machines.push(StateMachine {
            owner: block.name.clone(),
            states,
            transitions,
            span: None,
        });
    }

    // knowledge pragmas over same-typed attributes
    for _ in 0..rng.gen_range(0..2) {
        let candidates: Vec<(String, String, SemType)> = m
            .blocks
            .iter()
            .flat_map(|b| {
                b.attributes
                    .iter()
                    .map(|a| (b.name.clone(), a.name.clone(), a.sem_type))
            })
            .collect();
        if let Some(first) = candidates.choose(rng) {
            let members: Vec<(String, String)> = candidates
                .iter()
                .filter(|(_, _, t)| *t == first.2)
                .map(|(b, a, _)| (b.clone(), a.clone()))
                .collect();
            if !members.is_empty() {
                m.pragmas.push(KnowledgePragma {
                    scope: if rng.gen_bool(0.5) {
                        KnowledgeScope::System
                    } else {
                        KnowledgeScope::Session
                    },
                    members,
                    traces_to: None,
                    span: None,
                });
            }
        }
    }

    // partitioning: tasks, nodes, one mapping per task
    let n_tasks = rng.gen_range(0..3);
    let n_nodes = if n_tasks > 0 { rng.gen_range(1..3) } else { 0 };
    for n in 0..n_nodes {
        m.arch_nodes.push(ArchNode {
            name: ident(rng, "CPU", n),
            kind: ArchKind::Cpu,
            capacity: Some(rng.gen_range(1..1000) as f64 * 1000.0),
            span: None,
        });
    }
    if n_tasks > 0 {
        m.arch_nodes.push(ArchNode {
            name: "BusMain".to_string(),
            kind: ArchKind::Bus,
            capacity: Some(500000.0),
            span: None,
        });
    }
    for t in 0..n_tasks {
        m.tasks.push(Task {
            name: ident(rng, "Task", t),
            exec_cost: rng.gen_range(0..10000),
            rate: rng.gen_range(1..100) as f64,
            ports: vec![TaskPort {
                name: "io".to_string(),
                kind: if rng.gen_bool(0.5) {
                    PortKind::Data
                } else {
                    PortKind::Event
                },
            }],
            span: None,
        });
        m.task_maps.push(TaskMap {
            task: ident(rng, "Task", t),
            node: ident(rng, "CPU", rng.gen_range(0..n_nodes)),
            crypto_cycles: rng.gen_range(0..1000),
            span: None,
        });
    }
    if n_tasks >= 2 {
        m.channel_maps.push(ChannelMap {
            name: "chan0".to_string(),
            from: (ident(rng, "Task", 0), "io".to_string()),
            to: (ident(rng, "Task", 1), "io".to_string()),
            buses: vec!["BusMain".to_string()],
            memory: None,
            message_size: rng.gen_range(1..64),
            rate: rng.gen_range(1..200) as f64,
            mac_bytes: rng.gen_range(0..16),
            span: None,
        });
    }

    m
}

// ---------------------------------------------------------------------------
// Single-edit structural mutations
// ---------------------------------------------------------------------------

type Mutation = (&'static str, fn(&mut Model));

/// Break one structural invariant of the model: a dangling reference, a
/// cycle, a wrong arity, a duplicate, a missing initial state. Only
/// mutations applicable to the given model are drawn from.
pub fn mutate_model(rng: &mut ChaCha8Rng, base: &Model) -> (Model, String) {
    let mutations: Vec<Mutation> = vec![
        ("dangling requirement child", |m| {
            m.requirements[0].children.push("GhostReq".to_string());
        }),
        ("containment self-cycle", |m| {
            let id = m.requirements[0].id.clone();
            m.requirements[0].children.push(id);
        }),
        ("derivation cycle", |m| {
            let id = m.requirements[0].id.clone();
            m.requirements[0].derived_from.push(id);
        }),
        ("duplicate requirement id", |m| {
            let r = m.requirements[0].clone();
            m.requirements.push(r);
        }),
        ("dangling attack requirement link", |m| {
            m.attack_groups[0].attacks[0]
                .linked_requirements
                .push("GhostReq".to_string());
        }),
        ("dangling operator input", |m| {
            m.attack_groups
                .iter_mut()
                .find(|g| !g.operators.is_empty())
                .map(|g| g.operators[0].inputs[0] = "GhostNode".to_string());
        }),
        ("operator arity too small", |m| {
            m.attack_groups
                .iter_mut()
                .find(|g| !g.operators.is_empty())
                .map(|g| g.operators[0].inputs.truncate(1));
        }),
        ("dangling operator output", |m| {
            m.attack_groups
                .iter_mut()
                .find(|g| !g.operators.is_empty())
                .map(|g| g.operators[0].output = "GhostOut".to_string());
        }),
        ("duplicate attack id", |m| {
            let a = m.attack_groups[0].attacks[0].clone();
            m.attack_groups[0].attacks.push(a);
        }),
        ("crypto method arity broken", |m| {
            for b in &mut m.blocks {
                if let Some(mm) = b
                    .methods
                    .iter_mut()
                    .find(|mm| mm.role.required_arity().is_some())
                {
                    mm.arity += 1;
                    return;
                }
            }
        }),
        ("dangling link endpoint", |m| {
            m.links[0].a.block = "GhostBlock".to_string();
        }),
        ("port used by two links", |m| {
            let l = m.links[0].clone();
            m.links.push(l);
        }),
        ("no initial state", |m| {
            for s in &mut m.machines[0].states {
                s.initial = false;
            }
        }),
        ("two initial states", |m| {
            for s in &mut m.machines[0].states {
                s.initial = true;
            }
        }),
        ("transition to undeclared state", |m| {
            if let Some(t) = m.machines[0].transitions.first_mut() {
                t.target = "GhostState".to_string();
            }
        }),
        ("assignment to undeclared attribute", |m| {
            let s0 = m.machines[0].states[0].name.clone();
            m.machines[0].transitions.push(Transition {
                source: s0.clone(),
                target: s0,
                guards: Vec::new(),
                timing: None,
                actions: vec![Action::Assign {
                    attr: "ghost_attr".to_string(),
                    value: Expr::Int(1),
                }],
                span: None,
            });
        }),
        ("duplicate state machine", |m| {
            let sm = m.machines[0].clone();
            m.machines.push(sm);
        }),
        ("dangling pragma member", |m| {
            m.pragmas[0].members.push(("GhostBlock".to_string(), "x".to_string()));
        }),
        ("mixed pragma member types", |m| {
            let (b0, a0) = m.pragmas[0].members[0].clone();
            let t0 = m.block(&b0).unwrap().attribute(&a0).unwrap().sem_type;
            let other = m.blocks.iter().find_map(|b| {
                b.attributes
                    .iter()
                    .find(|a| a.sem_type != t0)
                    .map(|a| (b.name.clone(), a.name.clone()))
            });
            if let Some(pair) = other {
                m.pragmas[0].members.push(pair);
            } else {
                m.pragmas[0].members.push(("GhostBlock".to_string(), "x".to_string()));
            }
        }),
        ("dangling confidentiality target", |m| {
            m.confidentiality[0].attribute = "ghost_attr".to_string();
        }),
        ("dangling authenticity anchor state", |m| {
            m.authenticity[0].sender.state = "ghostState".to_string();
        }),
        ("sender anchor without matching send", |m| {
            // point the anchor at a state that has no outgoing send of m1
            let a = &mut m.authenticity[0];
            let machine = m
                .machines
                .iter()
                .find(|sm| sm.owner == a.sender.block)
                .expect("anchored machine");
            let bad = machine
                .states
                .iter()
                .map(|s| s.name.clone())
                .find(|s| {
                    !machine.transitions.iter().any(|t| {
                        &t.source == s
                            && t.actions.iter().any(|act| {
                                matches!(act, Action::Send { value: Expr::Attr(at), .. } if at == &a.sender.message)
                            })
                    })
                });
            if let Some(state) = bad {
                a.sender.state = state;
            }
        }),
        ("task rate zero", |m| {
            m.tasks[0].rate = 0.0;
        }),
        ("bus without capacity", |m| {
            if let Some(n) = m
                .arch_nodes
                .iter_mut()
                .find(|n| n.kind != ArchKind::Memory)
            {
                n.capacity = None;
            }
        }),
        ("dangling task mapping", |m| {
            m.task_maps[0].node = "GhostCPU".to_string();
        }),
        ("task mapped twice", |m| {
            let t = m.task_maps[0].clone();
            m.task_maps.push(t);
        }),
        ("dangling channel bus", |m| {
            m.channel_maps[0].buses.push("GhostBus".to_string());
        }),
        ("duplicate block", |m| {
            let b = m.blocks[0].clone();
            m.blocks.push(b);
        }),
    ];

    let applicable: Vec<&Mutation> = mutations
        .iter()
        .filter(|(name, _)| match *name {
            "dangling requirement child" | "containment self-cycle" | "derivation cycle"
            | "duplicate requirement id" => !base.requirements.is_empty(),
            "dangling attack requirement link" | "duplicate attack id" => base
                .attack_groups
                .first()
                .map(|g| !g.attacks.is_empty())
                .unwrap_or(false),
            "dangling operator input" | "operator arity too small" | "dangling operator output" => {
                base.attack_groups.iter().any(|g| !g.operators.is_empty())
            }
            "crypto method arity broken" => base
                .blocks
                .iter()
                .any(|b| b.methods.iter().any(|mm| mm.role.required_arity().is_some())),
            "dangling link endpoint" | "port used by two links" => !base.links.is_empty(),
            "no initial state" | "two initial states" | "transition to undeclared state"
            | "assignment to undeclared attribute" | "duplicate state machine" => {
                base.machines.first().map(|sm| sm.states.len() >= 2).unwrap_or(false)
            }
            "dangling pragma member" | "mixed pragma member types" => !base.pragmas.is_empty(),
            "dangling confidentiality target" => !base.confidentiality.is_empty(),
            "dangling authenticity anchor state" | "sender anchor without matching send" => {
                !base.authenticity.is_empty()
            }
            "task rate zero" => !base.tasks.is_empty(),
            "bus without capacity" => base.arch_nodes.iter().any(|n| n.kind != ArchKind::Memory),
            "dangling task mapping" | "task mapped twice" => !base.task_maps.is_empty(),
            "dangling channel bus" => !base.channel_maps.is_empty(),
            "duplicate block" => !base.blocks.is_empty(),
            _ => false,
        })
        .collect();
    assert!(!applicable.is_empty(), "no applicable mutation for model");
    let (name, apply) = applicable.choose(rng).unwrap();
    let mut mutated = base.clone();
    apply(&mut mutated);
    (mutated, name.to_string())
}
