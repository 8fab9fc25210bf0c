//! In-memory representation of a full model: requirements, attack graphs,
//! partitioning, and the security-extended design view, plus cross-view
//! traceability links. Models are immutable after construction; every
//! analysis takes `&Model`.

mod trace;
mod validate;

pub use trace::{trace_requirements, TraceEntry, TraceabilityReport, TracedRequirement};
pub use validate::validate;

use crate::diag::SourceSpan;
use serde::Serialize;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Requirements view
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RequirementKind {
    Functional,
    Confidentiality,
    AccessControl,
    Integrity,
    Freshness,
    Authenticity,
    Anonymity,
    Other(String),
}

impl RequirementKind {
    /// Everything except `functional` counts as a security requirement.
    pub fn is_security(&self) -> bool {
        !matches!(self, RequirementKind::Functional)
    }

    pub fn keyword(&self) -> &str {
        match self {
            RequirementKind::Functional => "functional",
            RequirementKind::Confidentiality => "confidentiality",
            RequirementKind::AccessControl => "access_control",
            RequirementKind::Integrity => "integrity",
            RequirementKind::Freshness => "freshness",
            RequirementKind::Authenticity => "authenticity",
            RequirementKind::Anonymity => "anonymity",
            RequirementKind::Other(_) => "other",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<RequirementKind> {
        Some(match kw {
            "functional" => RequirementKind::Functional,
            "confidentiality" => RequirementKind::Confidentiality,
            "access_control" => RequirementKind::AccessControl,
            "integrity" => RequirementKind::Integrity,
            "freshness" => RequirementKind::Freshness,
            "authenticity" => RequirementKind::Authenticity,
            "anonymity" => RequirementKind::Anonymity,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Requirement {
    pub id: String,
    pub title: String,
    pub kind: RequirementKind,
    pub description: String,
    /// Sub-requirements by containment.
    pub children: Vec<String>,
    /// Requirements this one was derived from.
    pub derived_from: Vec<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

// ---------------------------------------------------------------------------
// Attack view
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackGroup {
    /// Target asset the grouped attacks apply to.
    pub asset: String,
    pub attacks: Vec<AttackNode>,
    pub operators: Vec<AttackOperator>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackNode {
    pub id: String,
    pub label: String,
    pub is_root: bool,
    /// Requirements this attack is linked to (coverage).
    pub linked_requirements: Vec<String>,
    /// Identity aliases of this attack in other asset groups.
    pub cross_refs: Vec<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AttackOp {
    Or,
    And,
    Sequence,
    Before,
    After,
}

impl AttackOp {
    pub fn keyword(self) -> &'static str {
        match self {
            AttackOp::Or => "or",
            AttackOp::And => "and",
            AttackOp::Sequence => "sequence",
            AttackOp::Before => "before",
            AttackOp::After => "after",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackOperator {
    pub id: String,
    pub op: AttackOp,
    /// Ordered inputs; each names an attack node or another operator.
    pub inputs: Vec<String>,
    /// Attack node achieved when the operator is satisfied.
    pub output: String,
    /// Informational only; no timing semantics is attached to attack steps.
    pub max_duration: Option<u64>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

// ---------------------------------------------------------------------------
// Design view
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SemType {
    Data,
    Key,
    Nonce,
    Bool,
    Int,
}

impl SemType {
    pub fn keyword(self) -> &'static str {
        match self {
            SemType::Data => "data",
            SemType::Key => "key",
            SemType::Nonce => "nonce",
            SemType::Bool => "bool",
            SemType::Int => "int",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<SemType> {
        Some(match kw {
            "data" => SemType::Data,
            "key" => SemType::Key,
            "nonce" => SemType::Nonce,
            "bool" => SemType::Bool,
            "int" => SemType::Int,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CryptoRole {
    Encrypt,
    Decrypt,
    Aencrypt,
    Adecrypt,
    Sign,
    VerifySign,
    Mac,
    VerifyMac,
    Hash,
    Plain,
}

impl CryptoRole {
    /// Arity the role demands; `None` for plain methods (any arity).
    pub fn required_arity(self) -> Option<usize> {
        match self {
            CryptoRole::Encrypt | CryptoRole::Decrypt => Some(2),
            CryptoRole::Aencrypt | CryptoRole::Adecrypt => Some(2),
            CryptoRole::Sign | CryptoRole::Mac => Some(2),
            CryptoRole::VerifySign | CryptoRole::VerifyMac => Some(3),
            CryptoRole::Hash => Some(1),
            CryptoRole::Plain => None,
        }
    }

    /// Roles whose result is a boolean check rather than a message.
    pub fn is_verifier(self) -> bool {
        matches!(self, CryptoRole::VerifySign | CryptoRole::VerifyMac)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            CryptoRole::Encrypt => "encrypt",
            CryptoRole::Decrypt => "decrypt",
            CryptoRole::Aencrypt => "aencrypt",
            CryptoRole::Adecrypt => "adecrypt",
            CryptoRole::Sign => "sign",
            CryptoRole::VerifySign => "verify_sign",
            CryptoRole::Mac => "mac",
            CryptoRole::VerifyMac => "verify_mac",
            CryptoRole::Hash => "hash",
            CryptoRole::Plain => "plain",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<CryptoRole> {
        Some(match kw {
            "encrypt" => CryptoRole::Encrypt,
            "decrypt" => CryptoRole::Decrypt,
            "aencrypt" => CryptoRole::Aencrypt,
            "adecrypt" => CryptoRole::Adecrypt,
            "sign" => CryptoRole::Sign,
            "verify_sign" => CryptoRole::VerifySign,
            "mac" => CryptoRole::Mac,
            "verify_mac" => CryptoRole::VerifyMac,
            "hash" => CryptoRole::Hash,
            "plain" => CryptoRole::Plain,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attribute {
    pub name: String,
    pub sem_type: SemType,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSig {
    pub name: String,
    pub arity: usize,
    pub role: CryptoRole,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignBlock {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub methods: Vec<MethodSig>,
    pub ports: Vec<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

impl DesignBlock {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodSig> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn has_port(&self, name: &str) -> bool {
        self.ports.iter().any(|p| p == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Endpoint {
    pub block: String,
    pub port: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub a: Endpoint,
    pub b: Endpoint,
    pub visibility: Visibility,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

// ---------------------------------------------------------------------------
// State machines
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    Attr(String),
    Int(i64),
    Bool(bool),
    Call { name: String, args: Vec<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Call {
            name: name.to_string(),
            args,
        }
    }

    /// Built-in message constructors available without declaration.
    pub fn builtin_arity(name: &str) -> Option<usize> {
        match name {
            "concat" => Some(2),
            "first" | "second" => Some(1),
            _ => None,
        }
    }

    pub fn for_each_attr(&self, f: &mut dyn FnMut(&str)) {
        match self {
            Expr::Attr(a) => f(a),
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Call { args, .. } => args.iter().for_each(|e| e.for_each_attr(f)),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.for_each_attr(f);
                rhs.for_each_attr(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Action {
    Assign { attr: String, value: Expr },
    Send { port: String, value: Expr },
    Receive { port: String, attr: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub source: String,
    pub target: String,
    /// Conjunction of guard expressions. Guards are evaluated against the
    /// post-action valuation: a transition fires only if its receives can be
    /// satisfied and every guard then holds.
    pub guards: Vec<Expr>,
    /// after(min, max) delay bounds; retained for partitioning estimates,
    /// erased before any security analysis.
    pub timing: Option<(u64, u64)>,
    pub actions: Vec<Action>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDecl {
    pub name: String,
    pub initial: bool,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateMachine {
    pub owner: String,
    pub states: Vec<StateDecl>,
    pub transitions: Vec<Transition>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

impl StateMachine {
    pub fn initial_state(&self) -> Option<&str> {
        self.states
            .iter()
            .find(|s| s.initial)
            .map(|s| s.name.as_str())
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.states.iter().any(|s| s.name == name)
    }
}

// ---------------------------------------------------------------------------
// Knowledge pragmas and security properties
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeScope {
    /// Shared before system startup, common to all sessions.
    System,
    /// Shared per session, with fresh values in each session.
    Session,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnowledgePragma {
    pub scope: KnowledgeScope,
    /// (block, attribute) pairs bound to one shared value.
    pub members: Vec<(String, String)>,
    pub traces_to: Option<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidentialityProperty {
    pub block: String,
    pub attribute: String,
    pub traces_to: Option<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

impl ConfidentialityProperty {
    pub fn label(&self) -> String {
        format!("Confidentiality {}.{}", self.block, self.attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthAnchor {
    pub block: String,
    pub state: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthenticityProperty {
    /// (block1, s1, m1): s1 is the state right before the sending of m1.
    pub sender: AuthAnchor,
    /// (block2, s2, m2): s2 is the state right after m2 has been received
    /// and accepted.
    pub receiver: AuthAnchor,
    pub traces_to: Option<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

impl AuthenticityProperty {
    pub fn label(&self) -> String {
        format!(
            "Authenticity {}.{}.{} {}.{}.{}",
            self.sender.block,
            self.sender.state,
            self.sender.message,
            self.receiver.block,
            self.receiver.state,
            self.receiver.message
        )
    }
}

// ---------------------------------------------------------------------------
// Partitioning view
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PortKind {
    Data,
    Event,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskPort {
    pub name: String,
    pub kind: PortKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    pub name: String,
    /// Cycles per activation.
    pub exec_cost: u64,
    /// Activations per second.
    pub rate: f64,
    pub ports: Vec<TaskPort>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    Cpu,
    HwAccelerator,
    Bus,
    Memory,
}

impl ArchKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ArchKind::Cpu => "cpu",
            ArchKind::HwAccelerator => "hw_accelerator",
            ArchKind::Bus => "bus",
            ArchKind::Memory => "memory",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<ArchKind> {
        Some(match kw {
            "cpu" => ArchKind::Cpu,
            "hw_accelerator" => ArchKind::HwAccelerator,
            "bus" => ArchKind::Bus,
            "memory" => ArchKind::Memory,
            _ => return None,
        })
    }

    pub fn is_execution(self) -> bool {
        matches!(self, ArchKind::Cpu | ArchKind::HwAccelerator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchNode {
    pub name: String,
    pub kind: ArchKind,
    /// Cycles/s for execution nodes, bits/s for buses; absent for memories.
    pub capacity: Option<f64>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskMap {
    pub task: String,
    pub node: String,
    /// Extra cycles per activation spent on security processing.
    pub crypto_cycles: u64,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelMap {
    pub name: String,
    pub from: (String, String),
    pub to: (String, String),
    /// Bus path, in traversal order.
    pub buses: Vec<String>,
    pub memory: Option<String>,
    /// Payload bytes per message.
    pub message_size: u64,
    /// Messages per second.
    pub rate: f64,
    /// Extra authentication bytes appended to each message.
    pub mac_bytes: u64,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Model {
    pub requirements: Vec<Requirement>,
    pub attack_groups: Vec<AttackGroup>,
    pub blocks: Vec<DesignBlock>,
    pub links: Vec<Link>,
    pub machines: Vec<StateMachine>,
    pub pragmas: Vec<KnowledgePragma>,
    pub confidentiality: Vec<ConfidentialityProperty>,
    pub authenticity: Vec<AuthenticityProperty>,
    pub tasks: Vec<Task>,
    pub arch_nodes: Vec<ArchNode>,
    pub task_maps: Vec<TaskMap>,
    pub channel_maps: Vec<ChannelMap>,
}

impl Model {
    /// Merge several parsed files into one model, preserving per-file
    /// declaration order. Duplicate detection is the validator's job.
    pub fn merge(parts: Vec<Model>) -> Model {
        let mut out = Model::default();
        for p in parts {
            out.requirements.extend(p.requirements);
            out.attack_groups.extend(p.attack_groups);
            out.blocks.extend(p.blocks);
            out.links.extend(p.links);
            out.machines.extend(p.machines);
            out.pragmas.extend(p.pragmas);
            out.confidentiality.extend(p.confidentiality);
            out.authenticity.extend(p.authenticity);
            out.tasks.extend(p.tasks);
            out.arch_nodes.extend(p.arch_nodes);
            out.task_maps.extend(p.task_maps);
            out.channel_maps.extend(p.channel_maps);
        }
        out
    }

    pub fn block(&self, name: &str) -> Option<&DesignBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn machine_of(&self, block: &str) -> Option<&StateMachine> {
        self.machines.iter().find(|m| m.owner == block)
    }

    pub fn requirement(&self, id: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn task(&self, name: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn arch_node(&self, name: &str) -> Option<&ArchNode> {
        self.arch_nodes.iter().find(|n| n.name == name)
    }

    pub fn channel_map(&self, name: &str) -> Option<&ChannelMap> {
        self.channel_maps.iter().find(|c| c.name == name)
    }

    /// Link the given (block, port) endpoint participates in, if any.
    pub fn link_of(&self, block: &str, port: &str) -> Option<&Link> {
        self.links.iter().find(|l| {
            (l.a.block == block && l.a.port == port) || (l.b.block == block && l.b.port == port)
        })
    }

    /// All attack nodes across groups, with their asset names.
    pub fn attack_nodes(&self) -> impl Iterator<Item = (&str, &AttackNode)> {
        self.attack_groups
            .iter()
            .flat_map(|g| g.attacks.iter().map(move |a| (g.asset.as_str(), a)))
    }

    pub fn attack_node(&self, id: &str) -> Option<&AttackNode> {
        self.attack_nodes().map(|(_, a)| a).find(|a| a.id == id)
    }

    pub fn attack_operators(&self) -> impl Iterator<Item = (&str, &AttackOperator)> {
        self.attack_groups
            .iter()
            .flat_map(|g| g.operators.iter().map(move |o| (g.asset.as_str(), o)))
    }

    /// Map from attack node id to the operator producing it, if any.
    pub fn producing_operators(&self) -> BTreeMap<&str, &AttackOperator> {
        let mut out = BTreeMap::new();
        for (_, op) in self.attack_operators() {
            out.insert(op.output.as_str(), op);
        }
        out
    }

    /// Erase all source spans; used when comparing structure irrespective of
    /// where declarations came from.
    pub fn strip_spans(&mut self) {
        for r in &mut self.requirements {
            r.span = None;
        }
        for g in &mut self.attack_groups {
            g.span = None;
            for a in &mut g.attacks {
                a.span = None;
            }
            for o in &mut g.operators {
                o.span = None;
            }
        }
        for b in &mut self.blocks {
            b.span = None;
            for a in &mut b.attributes {
                a.span = None;
            }
            for m in &mut b.methods {
                m.span = None;
            }
        }
        for l in &mut self.links {
            l.span = None;
        }
        for m in &mut self.machines {
            m.span = None;
            for s in &mut m.states {
                s.span = None;
            }
            for t in &mut m.transitions {
                t.span = None;
            }
        }
        for p in &mut self.pragmas {
            p.span = None;
        }
        for c in &mut self.confidentiality {
            c.span = None;
        }
        for a in &mut self.authenticity {
            a.span = None;
        }
        for t in &mut self.tasks {
            t.span = None;
        }
        for n in &mut self.arch_nodes {
            n.span = None;
        }
        for m in &mut self.task_maps {
            m.span = None;
        }
        for c in &mut self.channel_maps {
            c.span = None;
        }
    }
}
