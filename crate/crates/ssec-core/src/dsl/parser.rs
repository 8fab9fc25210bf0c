//! Recursive-descent parser for `.ssec` sources. Keywords are contextual;
//! declarations are line-oriented with `{}` bodies for structured items.
//! On error the parser recovers at the next declaration boundary so several
//! problems can be reported in one run.

use super::lexer::{lex, Tok, Token};
use crate::diag::{Diagnostic, SourceSpan};
use crate::model::*;

pub struct ParseOutcome {
    pub model: Model,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_source(text: &str, file: &str) -> ParseOutcome {
    let (tokens, mut diags) = lex(text, file);
    let mut parser = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        model: Model::default(),
    };
    parser.model_file();
    diags.append(&mut parser.diags);
    ParseOutcome {
        model: parser.model,
        diagnostics: diags,
    }
}

const DECL_KEYWORDS: &[&str] = &[
    "requirement",
    "asset",
    "block",
    "link",
    "statemachine",
    "pragma",
    "property",
    "task",
    "node",
    "map",
];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    model: Model,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    fn error(&mut self, msg: impl Into<String>) {
        let span = self.span();
        self.diags.push(Diagnostic::error(msg, Some(span)));
    }

    fn error_at(&mut self, msg: impl Into<String>, span: SourceSpan) {
        self.diags.push(Diagnostic::error(msg, Some(span)));
    }

    /// True when the current token is the given contextual keyword.
    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Option<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Some(s)
            }
            other => {
                self.error(format!("expected {what}, found {}", other.describe()));
                None
            }
        }
    }

    fn expect_tok(&mut self, tok: Tok) -> bool {
        if std::mem::discriminant(self.peek()) == std::mem::discriminant(&tok) {
            self.bump();
            true
        } else {
            let found = self.peek().describe();
            self.error(format!("expected {}, found {found}", tok.describe()));
            false
        }
    }

    fn expect_string(&mut self, what: &str) -> Option<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            other => {
                self.error(format!("expected {what}, found {}", other.describe()));
                None
            }
        }
    }

    fn expect_int(&mut self, what: &str) -> Option<u64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Some(n)
            }
            ref other => {
                let msg = format!("expected {what}, found {}", other.describe());
                self.error(msg);
                None
            }
        }
    }

    fn expect_number(&mut self, what: &str) -> Option<f64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Some(n as f64)
            }
            Tok::Float(x) => {
                self.bump();
                Some(x)
            }
            ref other => {
                let msg = format!("expected {what}, found {}", other.describe());
                self.error(msg);
                None
            }
        }
    }

    /// Skip to the next plausible declaration start: a top-level newline
    /// followed by a declaration keyword or `#`. Balances braces on the way.
    fn recover_to_decl(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => {
                    depth += 1;
                    self.bump();
                }
                Tok::RBrace => {
                    depth -= 1;
                    self.bump();
                    if depth <= 0 {
                        depth = 0;
                    }
                }
                Tok::Newline if depth <= 0 => {
                    self.bump();
                    self.skip_newlines();
                    match self.peek() {
                        Tok::Hash => return,
                        Tok::Ident(s) if DECL_KEYWORDS.contains(&s.as_str()) => return,
                        Tok::Eof => return,
                        _ => {}
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn model_file(&mut self) {
        loop {
            self.skip_newlines();
            if self.at_eof() {
                return;
            }
            let before = self.pos;
            self.declaration();
            if self.pos == before {
                // No progress: drop the offending token to avoid a loop.
                let t = self.bump();
                let span = self.prev_span();
                self.error_at(format!("unexpected {}", t.describe()), span);
                self.recover_to_decl();
            }
        }
    }

    fn declaration(&mut self) {
        let errors_before = self.diags.len();
        match self.peek().clone() {
            Tok::Hash => {
                self.bump();
                self.hash_line();
            }
            Tok::Ident(kw) => match kw.as_str() {
                "requirement" => self.requirement(),
                "asset" => self.asset(),
                "block" => self.block(),
                "link" => self.link(),
                "statemachine" => self.statemachine(),
                "pragma" => {
                    self.bump();
                    self.pragma_body();
                }
                "property" => {
                    self.bump();
                    self.property_body();
                }
                "task" => self.task(),
                "node" => self.arch_node(),
                "map" => self.map_decl(),
                other => {
                    self.error(format!(
                        "expected a declaration (requirement, asset, block, link, statemachine, \
                         pragma, property, task, node, map), found `{other}`"
                    ));
                    self.bump();
                    self.recover_to_decl();
                }
            },
            other => {
                self.error(format!("expected a declaration, found {}", other.describe()));
                self.bump();
                self.recover_to_decl();
            }
        }
        if self.diags.len() > errors_before {
            self.recover_to_decl();
        }
    }

    // -- requirements -------------------------------------------------------

    fn requirement(&mut self) {
        let start = self.span();
        self.bump(); // requirement
        let Some(id) = self.expect_ident("requirement id") else {
            return;
        };
        let mut req = Requirement {
            id,
            title: String::new(),
            kind: RequirementKind::Functional,
            description: String::new(),
            children: Vec::new(),
            derived_from: Vec::new(),
            span: Some(start.cover(&self.prev_span())),
        };
        if !self.expect_tok(Tok::LBrace) {
            return;
        }
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    self.error("unterminated requirement body");
                    break;
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "title" => {
                        self.bump();
                        if let Some(s) = self.expect_string("title string") {
                            req.title = s;
                        }
                    }
                    "description" => {
                        self.bump();
                        if let Some(s) = self.expect_string("description string") {
                            req.description = s;
                        }
                    }
                    "kind" => {
                        self.bump();
                        match self.peek().clone() {
                            Tok::Ident(k) if k == "other" => {
                                self.bump();
                                let text = self.expect_string("text after `other`").unwrap_or_default();
                                req.kind = RequirementKind::Other(text);
                            }
                            Tok::Ident(k) => {
                                if let Some(kind) = RequirementKind::from_keyword(&k) {
                                    self.bump();
                                    req.kind = kind;
                                } else {
                                    self.error(format!("unknown requirement kind `{k}`"));
                                    self.bump();
                                }
                            }
                            other => {
                                let msg =
                                    format!("expected requirement kind, found {}", other.describe());
                                self.error(msg);
                            }
                        }
                    }
                    "contains" => {
                        self.bump();
                        req.children.extend(self.ident_list());
                    }
                    "derived_from" => {
                        self.bump();
                        req.derived_from.extend(self.ident_list());
                    }
                    other => {
                        self.error(format!("unknown requirement field `{other}`"));
                        self.bump();
                        self.skip_to_line_end();
                    }
                },
                other => {
                    let msg = format!("unexpected {} in requirement body", other.describe());
                    self.error(msg);
                    self.bump();
                }
            }
        }
        req.span = Some(start.cover(&self.prev_span()));
        self.model.requirements.push(req);
    }

    /// Bare identifiers up to end of line.
    fn ident_list(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while let Tok::Ident(s) = self.peek().clone() {
            self.bump();
            out.push(s);
        }
        if out.is_empty() {
            self.error("expected at least one identifier");
        }
        out
    }

    fn skip_to_line_end(&mut self) {
        while !matches!(self.peek(), Tok::Newline | Tok::RBrace | Tok::Eof) {
            self.bump();
        }
    }

    // -- attack view --------------------------------------------------------

    fn asset(&mut self) {
        let start = self.span();
        self.bump(); // asset
        let Some(asset) = self.expect_ident("asset name") else {
            return;
        };
        let mut group = AttackGroup {
            asset,
            attacks: Vec::new(),
            operators: Vec::new(),
            span: Some(start.clone()),
        };
        self.skip_newlines();
        if matches!(self.peek(), Tok::LBrace) {
            self.bump();
            loop {
                self.skip_newlines();
                match self.peek().clone() {
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    Tok::Eof => {
                        self.error("unterminated asset body");
                        break;
                    }
                    Tok::Ident(kw) => match kw.as_str() {
                        "attack" | "root" => self.attack_node(&mut group),
                        "or" | "and" | "sequence" | "before" | "after" => {
                            self.attack_operator(&mut group)
                        }
                        other => {
                            self.error(format!(
                                "expected `attack` or an operator (or, and, sequence, before, after), found `{other}`"
                            ));
                            self.bump();
                            self.skip_to_line_end();
                        }
                    },
                    other => {
                        let msg = format!("unexpected {} in asset body", other.describe());
                        self.error(msg);
                        self.bump();
                    }
                }
            }
        }
        group.span = Some(start.cover(&self.prev_span()));
        self.model.attack_groups.push(group);
    }

    fn attack_node(&mut self, group: &mut AttackGroup) {
        let start = self.span();
        let is_root = self.eat_kw("root");
        if !self.eat_kw("attack") {
            self.error("expected `attack` after `root`");
            return;
        }
        let Some(id) = self.expect_ident("attack id") else {
            return;
        };
        let label = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                s
            }
            _ => String::new(),
        };
        let mut node = AttackNode {
            id,
            label,
            is_root,
            linked_requirements: Vec::new(),
            cross_refs: Vec::new(),
            span: Some(start.cover(&self.prev_span())),
        };
        if matches!(self.peek(), Tok::LBrace) {
            self.bump();
            loop {
                self.skip_newlines();
                match self.peek().clone() {
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    Tok::Eof => {
                        self.error("unterminated attack body");
                        break;
                    }
                    Tok::Ident(kw) if kw == "covers" => {
                        self.bump();
                        node.linked_requirements.extend(self.ident_list());
                    }
                    Tok::Ident(kw) if kw == "refs" => {
                        self.bump();
                        node.cross_refs.extend(self.ident_list());
                    }
                    other => {
                        let msg = format!(
                            "expected `covers` or `refs`, found {}",
                            other.describe()
                        );
                        self.error(msg);
                        self.bump();
                        self.skip_to_line_end();
                    }
                }
            }
        }
        group.attacks.push(node);
    }

    fn attack_operator(&mut self, group: &mut AttackGroup) {
        let start = self.span();
        let op = match self.bump() {
            Tok::Ident(s) => match s.as_str() {
                "or" => AttackOp::Or,
                "and" => AttackOp::And,
                "sequence" => AttackOp::Sequence,
                "before" => AttackOp::Before,
                "after" => AttackOp::After,
                _ => unreachable!("caller checked"),
            },
            _ => unreachable!("caller checked"),
        };
        let Some(id) = self.expect_ident("operator id") else {
            return;
        };
        if !self.expect_tok(Tok::LParen) {
            return;
        }
        let mut inputs = Vec::new();
        loop {
            match self.expect_ident("operator input") {
                Some(i) => inputs.push(i),
                None => return,
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                _ => {
                    self.error("expected `,` or `)` in operator inputs");
                    return;
                }
            }
        }
        if !self.expect_tok(Tok::Arrow) {
            return;
        }
        let Some(output) = self.expect_ident("operator output attack id") else {
            return;
        };
        let max_duration = if self.eat_kw("within") {
            self.expect_int("duration after `within`")
        } else {
            None
        };
        group.operators.push(AttackOperator {
            id,
            op,
            inputs,
            output,
            max_duration,
            span: Some(start.cover(&self.prev_span())),
        });
    }

    // -- design view --------------------------------------------------------

    fn block(&mut self) {
        let start = self.span();
        self.bump(); // block
        let Some(name) = self.expect_ident("block name") else {
            return;
        };
        let mut block = DesignBlock {
            name,
            attributes: Vec::new(),
            methods: Vec::new(),
            ports: Vec::new(),
            span: Some(start.clone()),
        };
        if !self.expect_tok(Tok::LBrace) {
            return;
        }
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    self.error("unterminated block body");
                    break;
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "attribute" => {
                        let aspan = self.span();
                        self.bump();
                        let Some(name) = self.expect_ident("attribute name") else {
                            continue;
                        };
                        if !self.expect_tok(Tok::Colon) {
                            continue;
                        }
                        let Some(ty) = self.expect_ident("attribute type") else {
                            continue;
                        };
                        match SemType::from_keyword(&ty) {
                            Some(sem_type) => block.attributes.push(Attribute {
                                name,
                                sem_type,
                                span: Some(aspan.cover(&self.prev_span())),
                            }),
                            None => {
                                let span = self.prev_span();
                                self.error_at(
                                    format!(
                                        "unknown attribute type `{ty}` (expected data, key, nonce, bool, int)"
                                    ),
                                    span,
                                );
                            }
                        }
                    }
                    "method" => {
                        let mspan = self.span();
                        self.bump();
                        let Some(name) = self.expect_ident("method name") else {
                            continue;
                        };
                        if !self.expect_tok(Tok::LParen) {
                            continue;
                        }
                        let Some(arity) = self.expect_int("method arity") else {
                            continue;
                        };
                        if !self.expect_tok(Tok::RParen) {
                            continue;
                        }
                        let role = if matches!(self.peek(), Tok::Colon) {
                            self.bump();
                            let Some(r) = self.expect_ident("crypto role") else {
                                continue;
                            };
                            match CryptoRole::from_keyword(&r) {
                                Some(role) => role,
                                None => {
                                    let span = self.prev_span();
                                    self.error_at(format!("unknown crypto role `{r}`"), span);
                                    CryptoRole::Plain
                                }
                            }
                        } else {
                            CryptoRole::Plain
                        };
                        block.methods.push(MethodSig {
                            name,
                            arity: arity as usize,
                            role,
                            span: Some(mspan.cover(&self.prev_span())),
                        });
                    }
                    "port" => {
                        self.bump();
                        if let Some(p) = self.expect_ident("port name") {
                            block.ports.push(p);
                        }
                    }
                    other => {
                        self.error(format!(
                            "expected `attribute`, `method` or `port`, found `{other}`"
                        ));
                        self.bump();
                        self.skip_to_line_end();
                    }
                },
                other => {
                    let msg = format!("unexpected {} in block body", other.describe());
                    self.error(msg);
                    self.bump();
                }
            }
        }
        block.span = Some(start.cover(&self.prev_span()));
        self.model.blocks.push(block);
    }

    fn dotted_pair(&mut self, what: &str) -> Option<(String, String)> {
        let a = self.expect_ident(what)?;
        if !self.expect_tok(Tok::Dot) {
            return None;
        }
        let b = self.expect_ident(&format!("{what} member after `.`"))?;
        Some((a, b))
    }

    fn link(&mut self) {
        let start = self.span();
        self.bump(); // link
        let Some((ab, ap)) = self.dotted_pair("link endpoint") else {
            return;
        };
        let Some((bb, bp)) = self.dotted_pair("link endpoint") else {
            return;
        };
        if !self.expect_tok(Tok::Colon) {
            return;
        }
        let Some(vis) = self.expect_ident("`public` or `private`") else {
            return;
        };
        let visibility = match vis.as_str() {
            "public" => Visibility::Public,
            "private" => Visibility::Private,
            other => {
                let span = self.prev_span();
                self.error_at(format!("expected `public` or `private`, found `{other}`"), span);
                return;
            }
        };
        self.model.links.push(Link {
            a: Endpoint { block: ab, port: ap },
            b: Endpoint { block: bb, port: bp },
            visibility,
            span: Some(start.cover(&self.prev_span())),
        });
    }

    fn statemachine(&mut self) {
        let start = self.span();
        self.bump(); // statemachine
        let Some(owner) = self.expect_ident("owning block name") else {
            return;
        };
        let mut machine = StateMachine {
            owner,
            states: Vec::new(),
            transitions: Vec::new(),
            span: Some(start.clone()),
        };
        if !self.expect_tok(Tok::LBrace) {
            return;
        }
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    self.error("unterminated statemachine body");
                    break;
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "initial" | "state" => {
                        let sspan = self.span();
                        let initial = self.eat_kw("initial");
                        if !self.eat_kw("state") {
                            self.error("expected `state` after `initial`");
                            self.bump();
                            continue;
                        }
                        if let Some(name) = self.expect_ident("state name") {
                            machine.states.push(StateDecl {
                                name,
                                initial,
                                span: Some(sspan.cover(&self.prev_span())),
                            });
                        }
                    }
                    "transition" => self.transition(&mut machine),
                    other => {
                        self.error(format!(
                            "expected `state`, `initial state` or `transition`, found `{other}`"
                        ));
                        self.bump();
                        self.skip_to_line_end();
                    }
                },
                other => {
                    let msg = format!("unexpected {} in statemachine body", other.describe());
                    self.error(msg);
                    self.bump();
                }
            }
        }
        machine.span = Some(start.cover(&self.prev_span()));
        self.model.machines.push(machine);
    }

    fn transition(&mut self, machine: &mut StateMachine) {
        let start = self.span();
        self.bump(); // transition
        let Some(source) = self.expect_ident("source state") else {
            return;
        };
        if !self.expect_tok(Tok::Arrow) {
            return;
        }
        let Some(target) = self.expect_ident("target state") else {
            return;
        };
        let mut tr = Transition {
            source,
            target,
            guards: Vec::new(),
            timing: None,
            actions: Vec::new(),
            span: Some(start.clone()),
        };
        self.skip_newlines();
        if matches!(self.peek(), Tok::LBrace) {
            self.bump();
            loop {
                self.skip_newlines();
                match self.peek().clone() {
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    Tok::Eof => {
                        self.error("unterminated transition body");
                        break;
                    }
                    Tok::Ident(kw) => match kw.as_str() {
                        "guard" => {
                            self.bump();
                            if let Some(e) = self.expr() {
                                tr.guards.push(e);
                            }
                        }
                        "after" => {
                            self.bump();
                            if !self.expect_tok(Tok::LParen) {
                                continue;
                            }
                            let lo = self.expect_int("minimum delay");
                            if !self.expect_tok(Tok::Comma) {
                                continue;
                            }
                            let hi = self.expect_int("maximum delay");
                            if !self.expect_tok(Tok::RParen) {
                                continue;
                            }
                            if let (Some(lo), Some(hi)) = (lo, hi) {
                                tr.timing = Some((lo, hi));
                            }
                        }
                        "send" => {
                            self.bump();
                            let Some(port) = self.expect_ident("port name") else {
                                continue;
                            };
                            if let Some(value) = self.expr() {
                                tr.actions.push(Action::Send { port, value });
                            }
                        }
                        "receive" => {
                            self.bump();
                            let Some(port) = self.expect_ident("port name") else {
                                continue;
                            };
                            let Some(attr) = self.expect_ident("attribute to receive into") else {
                                continue;
                            };
                            tr.actions.push(Action::Receive { port, attr });
                        }
                        _ => {
                            // assignment: IDENT = expr
                            if matches!(self.peek_at(1), Tok::Assign) {
                                let attr = kw;
                                self.bump();
                                self.bump();
                                if let Some(value) = self.expr() {
                                    tr.actions.push(Action::Assign { attr, value });
                                }
                            } else {
                                self.error(format!(
                                    "expected a transition action (guard, after, send, receive or assignment), found `{kw}`"
                                ));
                                self.bump();
                                self.skip_to_line_end();
                            }
                        }
                    },
                    other => {
                        let msg = format!("unexpected {} in transition body", other.describe());
                        self.error(msg);
                        self.bump();
                    }
                }
            }
        }
        tr.span = Some(start.cover(&self.prev_span()));
        machine.transitions.push(tr);
    }

    // -- pragmas and properties ---------------------------------------------

    fn hash_line(&mut self) {
        match self.peek().clone() {
            Tok::Ident(kw) => match kw.as_str() {
                "InitialSystemKnowledge" | "InitialSessionKnowledge" => self.pragma_body(),
                "Confidentiality" | "Authenticity" => self.property_body(),
                other => {
                    self.error(format!(
                        "expected InitialSystemKnowledge, InitialSessionKnowledge, Confidentiality \
                         or Authenticity after `#`, found `{other}`"
                    ));
                    self.bump();
                    self.skip_to_line_end();
                }
            },
            other => {
                let msg = format!("expected a pragma keyword after `#`, found {}", other.describe());
                self.error(msg);
            }
        }
    }

    fn pragma_body(&mut self) {
        let start = self.span();
        let scope = match self.peek().clone() {
            Tok::Ident(kw) if kw == "InitialSystemKnowledge" => {
                self.bump();
                KnowledgeScope::System
            }
            Tok::Ident(kw) if kw == "InitialSessionKnowledge" => {
                self.bump();
                KnowledgeScope::Session
            }
            other => {
                let msg = format!(
                    "expected InitialSystemKnowledge or InitialSessionKnowledge, found {}",
                    other.describe()
                );
                self.error(msg);
                return;
            }
        };
        let mut members = Vec::new();
        let mut traces_to = None;
        loop {
            match self.peek().clone() {
                Tok::Ident(s) if s == "traces" => {
                    self.bump();
                    traces_to = self.expect_ident("requirement id after `traces`");
                    break;
                }
                Tok::Ident(_) => {
                    if let Some(pair) = self.dotted_pair("knowledge member block") {
                        members.push(pair);
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        if members.is_empty() {
            self.error_at(
                "knowledge pragma needs at least one block.attribute member",
                start.clone(),
            );
        }
        self.model.pragmas.push(KnowledgePragma {
            scope,
            members,
            traces_to,
            span: Some(start.cover(&self.prev_span())),
        });
    }

    fn property_body(&mut self) {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "Confidentiality" => {
                self.bump();
                let Some((block, attribute)) = self.dotted_pair("block") else {
                    return;
                };
                let traces_to = if self.eat_kw("traces") {
                    self.expect_ident("requirement id after `traces`")
                } else {
                    None
                };
                self.model.confidentiality.push(ConfidentialityProperty {
                    block,
                    attribute,
                    traces_to,
                    span: Some(start.cover(&self.prev_span())),
                });
            }
            Tok::Ident(kw) if kw == "Authenticity" => {
                self.bump();
                let Some(sender) = self.auth_anchor() else {
                    return;
                };
                let Some(receiver) = self.auth_anchor() else {
                    return;
                };
                let traces_to = if self.eat_kw("traces") {
                    self.expect_ident("requirement id after `traces`")
                } else {
                    None
                };
                self.model.authenticity.push(AuthenticityProperty {
                    sender,
                    receiver,
                    traces_to,
                    span: Some(start.cover(&self.prev_span())),
                });
            }
            other => {
                let msg = format!(
                    "expected Confidentiality or Authenticity, found {}",
                    other.describe()
                );
                self.error(msg);
            }
        }
    }

    /// `block.state.message`
    fn auth_anchor(&mut self) -> Option<AuthAnchor> {
        let block = self.expect_ident("block name")?;
        if !self.expect_tok(Tok::Dot) {
            return None;
        }
        let state = self.expect_ident("state name")?;
        if !self.expect_tok(Tok::Dot) {
            return None;
        }
        let message = self.expect_ident("message attribute name")?;
        Some(AuthAnchor {
            block,
            state,
            message,
        })
    }

    // -- partitioning view ---------------------------------------------------

    fn task(&mut self) {
        let start = self.span();
        self.bump(); // task
        let Some(name) = self.expect_ident("task name") else {
            return;
        };
        let mut task = Task {
            name,
            exec_cost: 0,
            rate: 1.0,
            ports: Vec::new(),
            span: Some(start.clone()),
        };
        if !self.expect_tok(Tok::LBrace) {
            return;
        }
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    self.error("unterminated task body");
                    break;
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "exec_cost" => {
                        self.bump();
                        if let Some(n) = self.expect_int("cycles per activation") {
                            task.exec_cost = n;
                        }
                    }
                    "rate" => {
                        self.bump();
                        if let Some(x) = self.expect_number("activations per second") {
                            task.rate = x;
                        }
                    }
                    "port" => {
                        self.bump();
                        let Some(pname) = self.expect_ident("port name") else {
                            continue;
                        };
                        let kind = if matches!(self.peek(), Tok::Colon) {
                            self.bump();
                            match self.expect_ident("`data` or `event`").as_deref() {
                                Some("data") => PortKind::Data,
                                Some("event") => PortKind::Event,
                                Some(other) => {
                                    let span = self.prev_span();
                                    self.error_at(
                                        format!("expected `data` or `event`, found `{other}`"),
                                        span,
                                    );
                                    PortKind::Data
                                }
                                None => PortKind::Data,
                            }
                        } else {
                            PortKind::Data
                        };
                        task.ports.push(TaskPort { name: pname, kind });
                    }
                    other => {
                        self.error(format!(
                            "expected `exec_cost`, `rate` or `port`, found `{other}`"
                        ));
                        self.bump();
                        self.skip_to_line_end();
                    }
                },
                other => {
                    let msg = format!("unexpected {} in task body", other.describe());
                    self.error(msg);
                    self.bump();
                }
            }
        }
        task.span = Some(start.cover(&self.prev_span()));
        self.model.tasks.push(task);
    }

    fn arch_node(&mut self) {
        let start = self.span();
        self.bump(); // node
        let Some(name) = self.expect_ident("node name") else {
            return;
        };
        if !self.expect_tok(Tok::Colon) {
            return;
        }
        let Some(kindkw) = self.expect_ident("node kind") else {
            return;
        };
        let Some(kind) = ArchKind::from_keyword(&kindkw) else {
            let span = self.prev_span();
            self.error_at(
                format!("unknown node kind `{kindkw}` (expected cpu, hw_accelerator, bus, memory)"),
                span,
            );
            return;
        };
        let mut capacity = None;
        self.skip_newlines();
        if matches!(self.peek(), Tok::LBrace) {
            self.bump();
            loop {
                self.skip_newlines();
                match self.peek().clone() {
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    Tok::Eof => {
                        self.error("unterminated node body");
                        break;
                    }
                    Tok::Ident(kw) if kw == "capacity" => {
                        self.bump();
                        capacity = self.expect_number("capacity value");
                    }
                    other => {
                        let msg = format!("expected `capacity`, found {}", other.describe());
                        self.error(msg);
                        self.bump();
                        self.skip_to_line_end();
                    }
                }
            }
        }
        self.model.arch_nodes.push(ArchNode {
            name,
            kind,
            capacity,
            span: Some(start.cover(&self.prev_span())),
        });
    }

    fn map_decl(&mut self) {
        let start = self.span();
        self.bump(); // map
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "task" => {
                self.bump();
                let Some(task) = self.expect_ident("task name") else {
                    return;
                };
                if !self.expect_tok(Tok::Arrow) {
                    return;
                }
                let Some(node) = self.expect_ident("execution node name") else {
                    return;
                };
                let mut crypto_cycles = 0;
                self.skip_newlines();
                if matches!(self.peek(), Tok::LBrace) {
                    self.bump();
                    loop {
                        self.skip_newlines();
                        match self.peek().clone() {
                            Tok::RBrace => {
                                self.bump();
                                break;
                            }
                            Tok::Eof => {
                                self.error("unterminated map body");
                                break;
                            }
                            Tok::Ident(kw) if kw == "crypto_cycles" => {
                                self.bump();
                                if let Some(n) = self.expect_int("cycles per activation") {
                                    crypto_cycles = n;
                                }
                            }
                            other => {
                                let msg =
                                    format!("expected `crypto_cycles`, found {}", other.describe());
                                self.error(msg);
                                self.bump();
                                self.skip_to_line_end();
                            }
                        }
                    }
                }
                self.model.task_maps.push(TaskMap {
                    task,
                    node,
                    crypto_cycles,
                    span: Some(start.cover(&self.prev_span())),
                });
            }
            Tok::Ident(kw) if kw == "channel" => {
                self.bump();
                let Some(name) = self.expect_ident("channel name") else {
                    return;
                };
                let Some(from) = self.dotted_pair("source task") else {
                    return;
                };
                if !self.expect_tok(Tok::Arrow) {
                    return;
                }
                let Some(to) = self.dotted_pair("destination task") else {
                    return;
                };
                let mut buses = Vec::new();
                if self.eat_kw("via") {
                    buses = self.ident_list();
                }
                let mut cm = ChannelMap {
                    name,
                    from,
                    to,
                    buses,
                    memory: None,
                    message_size: 0,
                    rate: 0.0,
                    mac_bytes: 0,
                    span: Some(start.clone()),
                };
                self.skip_newlines();
                if matches!(self.peek(), Tok::LBrace) {
                    self.bump();
                    loop {
                        self.skip_newlines();
                        match self.peek().clone() {
                            Tok::RBrace => {
                                self.bump();
                                break;
                            }
                            Tok::Eof => {
                                self.error("unterminated map body");
                                break;
                            }
                            Tok::Ident(kw) => match kw.as_str() {
                                "message_size" => {
                                    self.bump();
                                    if let Some(n) = self.expect_int("bytes per message") {
                                        cm.message_size = n;
                                    }
                                }
                                "rate" => {
                                    self.bump();
                                    if let Some(x) = self.expect_number("messages per second") {
                                        cm.rate = x;
                                    }
                                }
                                "mac_bytes" => {
                                    self.bump();
                                    if let Some(n) = self.expect_int("authentication bytes") {
                                        cm.mac_bytes = n;
                                    }
                                }
                                "memory" => {
                                    self.bump();
                                    cm.memory = self.expect_ident("memory node name");
                                }
                                other => {
                                    self.error(format!(
                                        "expected `message_size`, `rate`, `mac_bytes` or `memory`, found `{other}`"
                                    ));
                                    self.bump();
                                    self.skip_to_line_end();
                                }
                            },
                            other => {
                                let msg = format!("unexpected {} in map body", other.describe());
                                self.error(msg);
                                self.bump();
                            }
                        }
                    }
                }
                cm.span = Some(start.cover(&self.prev_span()));
                self.model.channel_maps.push(cm);
            }
            other => {
                let msg = format!(
                    "expected `task` or `channel` after `map`, found {}",
                    other.describe()
                );
                self.error(msg);
            }
        }
    }

    // -- expressions ---------------------------------------------------------

    fn expr(&mut self) -> Option<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Some(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        Some(Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    fn additive(&mut self) -> Option<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Some(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn multiplicative(&mut self) -> Option<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Some(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> Option<Expr> {
        if matches!(self.peek(), Tok::Minus) {
            self.bump();
            let inner = self.unary()?;
            return Some(Expr::Binary {
                op: BinOp::Sub,
                lhs: Box::new(Expr::Int(0)),
                rhs: Box::new(inner),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Option<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if n > i64::MAX as u64 {
                    self.error("integer literal out of range");
                    return None;
                }
                Some(Expr::Int(n as i64))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => return Some(Expr::Bool(true)),
                    "false" => return Some(Expr::Bool(false)),
                    _ => {}
                }
                if matches!(self.peek(), Tok::LParen) {
                    self.bump();
                    let mut args = Vec::new();
                    if matches!(self.peek(), Tok::RParen) {
                        self.bump();
                    } else {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Tok::Comma => {
                                    self.bump();
                                }
                                Tok::RParen => {
                                    self.bump();
                                    break;
                                }
                                _ => {
                                    self.error("expected `,` or `)` in call arguments");
                                    return None;
                                }
                            }
                        }
                    }
                    Some(Expr::Call { name, args })
                } else {
                    Some(Expr::Attr(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if !self.expect_tok(Tok::RParen) {
                    return None;
                }
                Some(inner)
            }
            other => {
                let msg = format!("expected an expression, found {}", other.describe());
                self.error(msg);
                None
            }
        }
    }
}
