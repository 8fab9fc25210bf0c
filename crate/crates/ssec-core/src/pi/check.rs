//! Structural validator for the emitted pi dialect: parses the generated
//! text and checks declaration-before-use, arities, binding of variables,
//! channel usage, and that no destructor ever appears inside an emitted
//! output term. This is the self-check every generated specification must
//! pass; running an external prover on the same text stays optional.

use std::collections::{BTreeMap, BTreeSet};

pub fn check_pi_text(text: &str) -> Result<(), Vec<String>> {
    let toks = match tokenize(text) {
        Ok(t) => t,
        Err(e) => return Err(vec![e]),
    };
    let mut p = Checker {
        toks,
        pos: 0,
        errors: Vec::new(),
        free: BTreeMap::new(),
        funs: BTreeMap::new(),
        destructors: BTreeSet::new(),
        events: BTreeMap::new(),
        macros: BTreeSet::new(),
        news: BTreeSet::new(),
        pending_new_queries: Vec::new(),
    };
    p.file();
    for q in std::mem::take(&mut p.pending_new_queries) {
        if !p.news.contains(&q) {
            p.errors
                .push(format!("query references `new {q}` but no process restricts it"));
        }
    }
    if p.errors.is_empty() {
        Ok(())
    } else {
        Err(p.errors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PTok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    Eq,
    Bar,
    Bang,
    Arrow, // ==>
    Zero,
    Eof,
}

fn tokenize(text: &str) -> Result<Vec<PTok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' if i + 1 < chars.len() && chars[i + 1] == '*' => {
                let mut j = i + 2;
                while j + 1 < chars.len() && !(chars[j] == '*' && chars[j + 1] == ')') {
                    j += 1;
                }
                if j + 1 >= chars.len() {
                    return Err("unterminated comment".to_string());
                }
                i = j + 2;
            }
            '(' => {
                toks.push(PTok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(PTok::RParen);
                i += 1;
            }
            '[' => {
                toks.push(PTok::LBracket);
                i += 1;
            }
            ']' => {
                toks.push(PTok::RBracket);
                i += 1;
            }
            ',' => {
                toks.push(PTok::Comma);
                i += 1;
            }
            ';' => {
                toks.push(PTok::Semi);
                i += 1;
            }
            ':' => {
                toks.push(PTok::Colon);
                i += 1;
            }
            '.' => {
                toks.push(PTok::Dot);
                i += 1;
            }
            '|' => {
                toks.push(PTok::Bar);
                i += 1;
            }
            '!' => {
                toks.push(PTok::Bang);
                i += 1;
            }
            '=' => {
                if i + 2 < chars.len() && chars[i + 1] == '=' && chars[i + 2] == '>' {
                    toks.push(PTok::Arrow);
                    i += 3;
                } else {
                    toks.push(PTok::Eq);
                    i += 1;
                }
            }
            '0' => {
                toks.push(PTok::Zero);
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '-')
                {
                    j += 1;
                }
                toks.push(PTok::Ident(chars[i..j].iter().collect()));
                i = j;
            }
            other => return Err(format!("unexpected character `{other}` in pi text")),
        }
    }
    toks.push(PTok::Eof);
    Ok(toks)
}

struct Checker {
    toks: Vec<PTok>,
    pos: usize,
    errors: Vec<String>,
    /// name -> type ("channel" / "bitstring")
    free: BTreeMap<String, String>,
    /// fun/destructor name -> arity
    funs: BTreeMap<String, usize>,
    destructors: BTreeSet<String>,
    events: BTreeMap<String, usize>,
    macros: BTreeSet<String>,
    news: BTreeSet<String>,
    pending_new_queries: Vec<String>,
}

impl Checker {
    fn peek(&self) -> &PTok {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> PTok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn expect(&mut self, t: PTok, what: &str) -> bool {
        if *self.peek() == t {
            self.bump();
            true
        } else {
            let found = format!("{:?}", self.peek());
            self.err(format!("expected {what}, found {found}"));
            false
        }
    }

    fn ident(&mut self, what: &str) -> Option<String> {
        match self.peek().clone() {
            PTok::Ident(s) => {
                self.bump();
                Some(s)
            }
            other => {
                self.err(format!("expected {what}, found {other:?}"));
                None
            }
        }
    }

    fn type_name(&mut self) -> Option<String> {
        let t = self.ident("type name")?;
        if t != "bitstring" && t != "channel" {
            self.err(format!("unknown type `{t}`"));
        }
        Some(t)
    }

    fn file(&mut self) {
        loop {
            match self.peek().clone() {
                PTok::Eof => return,
                PTok::Ident(kw) => match kw.as_str() {
                    "free" => self.free_decl(),
                    "fun" => self.fun_decl(),
                    "reduc" => self.reduc_decl(),
                    "event" => self.event_decl(),
                    "query" => self.query_decl(),
                    "let" => self.let_decl(),
                    "process" => {
                        self.bump();
                        let mut env = BTreeSet::new();
                        self.process(&mut env);
                    }
                    other => {
                        self.err(format!("unexpected declaration `{other}`"));
                        self.bump();
                    }
                },
                other => {
                    self.err(format!("unexpected token {other:?} at top level"));
                    self.bump();
                }
            }
            if !self.errors.is_empty() && self.errors.len() > 50 {
                return; // degenerate input, stop flooding
            }
        }
    }

    fn free_decl(&mut self) {
        self.bump(); // free
        let Some(name) = self.ident("free name") else {
            return;
        };
        if !self.expect(PTok::Colon, "`:`") {
            return;
        }
        let Some(ty) = self.type_name() else {
            return;
        };
        if *self.peek() == PTok::LBracket {
            self.bump();
            let _ = self.ident("attribute");
            self.expect(PTok::RBracket, "`]`");
        }
        self.expect(PTok::Dot, "`.`");
        if self.free.insert(name.clone(), ty).is_some() {
            self.err(format!("free name `{name}` declared twice"));
        }
    }

    fn fun_decl(&mut self) {
        self.bump(); // fun
        let Some(name) = self.ident("function name") else {
            return;
        };
        if !self.expect(PTok::LParen, "`(`") {
            return;
        }
        let mut arity = 0;
        loop {
            if self.type_name().is_none() {
                return;
            }
            arity += 1;
            match self.peek() {
                PTok::Comma => {
                    self.bump();
                }
                _ => break,
            }
        }
        self.expect(PTok::RParen, "`)`");
        self.expect(PTok::Colon, "`:`");
        let _ = self.type_name();
        self.expect(PTok::Dot, "`.`");
        if self.funs.insert(name.clone(), arity).is_some() {
            self.err(format!("function `{name}` declared twice"));
        }
    }

    fn reduc_decl(&mut self) {
        self.bump(); // reduc
        let Some(kw) = self.ident("`forall`") else {
            return;
        };
        if kw != "forall" {
            self.err("expected `forall` after `reduc`");
            return;
        }
        let mut bound = BTreeSet::new();
        loop {
            let Some(v) = self.ident("bound variable") else {
                return;
            };
            self.expect(PTok::Colon, "`:`");
            let _ = self.type_name();
            bound.insert(v);
            match self.peek() {
                PTok::Comma => {
                    self.bump();
                }
                _ => break,
            }
        }
        self.expect(PTok::Semi, "`;`");
        // LHS: destructor(args) over declared constructors and bound vars.
        let Some(head) = self.ident("destructor name") else {
            return;
        };
        if !self.expect(PTok::LParen, "`(`") {
            return;
        }
        let mut arity = 0;
        loop {
            self.reduc_term(&bound);
            arity += 1;
            match self.peek() {
                PTok::Comma => {
                    self.bump();
                }
                PTok::RParen => {
                    self.bump();
                    break;
                }
                other => {
                    let found = format!("{other:?}");
                    self.err(format!("expected `,` or `)` in reduction rule, found {found}"));
                    return;
                }
            }
        }
        self.expect(PTok::Eq, "`=`");
        self.reduc_term(&bound);
        self.expect(PTok::Dot, "`.`");
        if self.funs.insert(head.clone(), arity).is_some() {
            self.err(format!("function `{head}` declared twice"));
        }
        self.destructors.insert(head);
    }

    fn reduc_term(&mut self, bound: &BTreeSet<String>) {
        let Some(head) = self.ident("term") else {
            return;
        };
        if *self.peek() == PTok::LParen {
            self.bump();
            match self.funs.get(&head).copied() {
                None => self.err(format!("undeclared function `{head}` in reduction rule")),
                Some(_) => {}
            }
            let mut n = 0;
            loop {
                self.reduc_term(bound);
                n += 1;
                match self.peek() {
                    PTok::Comma => {
                        self.bump();
                    }
                    PTok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => {
                        self.err("expected `,` or `)`".to_string());
                        return;
                    }
                }
            }
            if let Some(a) = self.funs.get(&head).copied() {
                if a != n {
                    self.err(format!("function `{head}` expects {a} arguments, got {n}"));
                }
            }
        } else if !bound.contains(&head) {
            self.err(format!("unbound variable `{head}` in reduction rule"));
        }
    }

    fn event_decl(&mut self) {
        self.bump(); // event
        let Some(name) = self.ident("event name") else {
            return;
        };
        let mut arity = 0;
        if *self.peek() == PTok::LParen {
            self.bump();
            loop {
                if self.type_name().is_none() {
                    return;
                }
                arity += 1;
                match self.peek() {
                    PTok::Comma => {
                        self.bump();
                    }
                    PTok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => {
                        self.err("expected `,` or `)`".to_string());
                        return;
                    }
                }
            }
        }
        self.expect(PTok::Dot, "`.`");
        if self.events.insert(name.clone(), arity).is_some() {
            self.err(format!("event `{name}` declared twice"));
        }
    }

    fn query_decl(&mut self) {
        self.bump(); // query
        match self.peek().clone() {
            PTok::Ident(kw) if kw == "attacker" => {
                self.bump();
                self.expect(PTok::LParen, "`(`");
                let mut is_new = false;
                if let PTok::Ident(n) = self.peek().clone() {
                    if n == "new" {
                        is_new = true;
                        self.bump();
                    }
                }
                if let Some(name) = self.ident("secret name") {
                    if is_new {
                        self.pending_new_queries.push(name);
                    } else if !self.free.contains_key(&name) {
                        self.err(format!("secrecy query references undeclared name `{name}`"));
                    }
                }
                self.expect(PTok::RParen, "`)`");
                self.expect(PTok::Dot, "`.`");
            }
            _ => {
                // bindings ; evatom ==> evatom .
                let mut bound = BTreeSet::new();
                loop {
                    let Some(v) = self.ident("query variable") else {
                        return;
                    };
                    self.expect(PTok::Colon, "`:`");
                    let _ = self.type_name();
                    bound.insert(v);
                    match self.peek() {
                        PTok::Comma => {
                            self.bump();
                        }
                        _ => break,
                    }
                }
                self.expect(PTok::Semi, "`;`");
                self.event_atom(&bound);
                self.expect(PTok::Arrow, "`==>`");
                self.event_atom(&bound);
                self.expect(PTok::Dot, "`.`");
            }
        }
    }

    fn event_atom(&mut self, bound: &BTreeSet<String>) {
        let Some(kw) = self.ident("`event` or `inj-event`") else {
            return;
        };
        if kw != "event" && kw != "inj-event" {
            self.err(format!("expected `event` or `inj-event`, found `{kw}`"));
            return;
        }
        self.expect(PTok::LParen, "`(`");
        let Some(name) = self.ident("event name") else {
            return;
        };
        self.expect(PTok::LParen, "`(`");
        let mut n = 0;
        loop {
            if let Some(v) = self.ident("query variable") {
                if !bound.contains(&v) {
                    self.err(format!("unbound query variable `{v}`"));
                }
            }
            n += 1;
            match self.peek() {
                PTok::Comma => {
                    self.bump();
                }
                PTok::RParen => {
                    self.bump();
                    break;
                }
                _ => {
                    self.err("expected `,` or `)`".to_string());
                    return;
                }
            }
        }
        self.expect(PTok::RParen, "`)`");
        match self.events.get(&name) {
            None => self.err(format!("query references undeclared event `{name}`")),
            Some(a) if *a != n => {
                self.err(format!("event `{name}` expects {a} arguments, got {n}"))
            }
            _ => {}
        }
    }

    fn let_decl(&mut self) {
        self.bump(); // let
        let Some(name) = self.ident("process name") else {
            return;
        };
        self.expect(PTok::Eq, "`=`");
        let mut env = BTreeSet::new();
        self.process(&mut env);
        self.expect(PTok::Dot, "`.`");
        self.macros.insert(name);
    }

    // -- processes -----------------------------------------------------------

    fn process(&mut self, env: &mut BTreeSet<String>) {
        match self.peek().clone() {
            PTok::Zero => {
                self.bump();
            }
            PTok::Bang => {
                self.bump();
                self.process(env);
            }
            PTok::LParen => {
                self.bump();
                let mut branch = env.clone();
                self.process(&mut branch);
                while *self.peek() == PTok::Bar {
                    self.bump();
                    let mut branch = env.clone();
                    self.process(&mut branch);
                }
                self.expect(PTok::RParen, "`)`");
            }
            PTok::Ident(kw) => match kw.as_str() {
                "in" => {
                    self.bump();
                    self.expect(PTok::LParen, "`(`");
                    if let Some(ch) = self.ident("channel") {
                        self.check_channel(&ch, env);
                    }
                    self.expect(PTok::Comma, "`,`");
                    let var = self.ident("input variable");
                    self.expect(PTok::Colon, "`:`");
                    let _ = self.type_name();
                    self.expect(PTok::RParen, "`)`");
                    if let Some(v) = var {
                        env.insert(v);
                    }
                    if *self.peek() == PTok::Semi {
                        self.bump();
                        self.process(env);
                    }
                }
                "out" => {
                    self.bump();
                    self.expect(PTok::LParen, "`(`");
                    if let Some(ch) = self.ident("channel") {
                        self.check_channel(&ch, env);
                    }
                    self.expect(PTok::Comma, "`,`");
                    self.term(env, true);
                    self.expect(PTok::RParen, "`)`");
                    if *self.peek() == PTok::Semi {
                        self.bump();
                        self.process(env);
                    }
                }
                "new" => {
                    self.bump();
                    let var = self.ident("restricted name");
                    self.expect(PTok::Colon, "`:`");
                    let _ = self.type_name();
                    self.expect(PTok::Semi, "`;`");
                    if let Some(v) = var {
                        env.insert(v.clone());
                        self.news.insert(v);
                    }
                    self.process(env);
                }
                "let" => {
                    self.bump();
                    let var = self.ident("binding");
                    self.expect(PTok::Eq, "`=`");
                    self.term(env, false);
                    let Some(kw) = self.ident("`in`") else {
                        return;
                    };
                    if kw != "in" {
                        self.err("expected `in` after let binding");
                        return;
                    }
                    let mut inner = env.clone();
                    if let Some(v) = var {
                        inner.insert(v);
                    }
                    self.process(&mut inner);
                    if matches!(self.peek(), PTok::Ident(k) if k == "else") {
                        self.bump();
                        let mut other = env.clone();
                        self.process(&mut other);
                    }
                }
                "if" => {
                    self.bump();
                    self.term(env, false);
                    self.expect(PTok::Eq, "`=`");
                    self.term(env, false);
                    let Some(kw) = self.ident("`then`") else {
                        return;
                    };
                    if kw != "then" {
                        self.err("expected `then`");
                        return;
                    }
                    let mut yes = env.clone();
                    self.process(&mut yes);
                    if matches!(self.peek(), PTok::Ident(k) if k == "else") {
                        self.bump();
                        let mut no = env.clone();
                        self.process(&mut no);
                    }
                }
                "event" => {
                    self.bump();
                    let Some(name) = self.ident("event name") else {
                        return;
                    };
                    self.expect(PTok::LParen, "`(`");
                    let mut n = 0;
                    loop {
                        self.term(env, false);
                        n += 1;
                        match self.peek() {
                            PTok::Comma => {
                                self.bump();
                            }
                            PTok::RParen => {
                                self.bump();
                                break;
                            }
                            _ => {
                                self.err("expected `,` or `)`".to_string());
                                return;
                            }
                        }
                    }
                    match self.events.get(&name) {
                        None => self.err(format!("undeclared event `{name}`")),
                        Some(a) if *a != n => {
                            self.err(format!("event `{name}` expects {a} arguments, got {n}"))
                        }
                        _ => {}
                    }
                    if *self.peek() == PTok::Semi {
                        self.bump();
                        self.process(env);
                    }
                }
                _ => {
                    // process macro reference
                    self.bump();
                    if !self.macros.contains(&kw) {
                        self.err(format!("undefined process `{kw}`"));
                    }
                }
            },
            other => {
                self.err(format!("unexpected token {other:?} in process"));
                self.bump();
            }
        }
    }

    fn check_channel(&mut self, name: &str, env: &BTreeSet<String>) {
        match self.free.get(name) {
            Some(t) if t == "channel" => {}
            Some(_) => self.err(format!("`{name}` is not a channel")),
            None if env.contains(name) => {}
            None => self.err(format!("undeclared channel `{name}`")),
        }
    }

    /// Parse and scope-check a term. `output_position` forbids destructors,
    /// which may only occur in reduction rules and bindings.
    fn term(&mut self, env: &BTreeSet<String>, output_position: bool) {
        let Some(head) = self.ident("term") else {
            return;
        };
        if *self.peek() == PTok::LParen {
            self.bump();
            if output_position && self.destructors.contains(&head) {
                self.err(format!("destructor `{head}` used inside an output term"));
            }
            let arity = self.funs.get(&head).copied();
            if arity.is_none() {
                self.err(format!("undeclared function `{head}`"));
            }
            let mut n = 0;
            loop {
                self.term(env, output_position);
                n += 1;
                match self.peek() {
                    PTok::Comma => {
                        self.bump();
                    }
                    PTok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => {
                        self.err("expected `,` or `)` in term".to_string());
                        return;
                    }
                }
            }
            if let Some(a) = arity {
                if a != n {
                    self.err(format!("function `{head}` expects {a} arguments, got {n}"));
                }
            }
        } else if !env.contains(&head) && !self.free.contains_key(&head) {
            self.err(format!("undeclared name `{head}`"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_minimal_valid_spec() {
        let text = "free c: channel.\nfree s: bitstring [private].\n\
                    fun senc(bitstring, bitstring): bitstring.\n\
                    reduc forall m: bitstring, k: bitstring; sdec(senc(m, k), k) = m.\n\
                    query attacker(s).\n\
                    process ( out(c, senc(s, s)) )\n";
        assert!(check_pi_text(text).is_ok(), "{:?}", check_pi_text(text));
    }

    #[test]
    fn rejects_undeclared_name() {
        let text = "free c: channel.\nprocess ( out(c, mystery) )\n";
        let errs = check_pi_text(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("mystery")));
    }

    #[test]
    fn rejects_arity_mismatch() {
        let text = "free c: channel.\nfun mac(bitstring, bitstring): bitstring.\nfree a: bitstring.\n\
                    process ( out(c, mac(a)) )\n";
        let errs = check_pi_text(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("mac")));
    }

    #[test]
    fn rejects_destructor_in_output() {
        let text = "free c: channel.\nfree a: bitstring.\n\
                    fun pair(bitstring, bitstring): bitstring.\n\
                    reduc forall x: bitstring, y: bitstring; proj1(pair(x, y)) = x.\n\
                    process ( out(c, proj1(pair(a, a))) )\n";
        let errs = check_pi_text(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("destructor")));
    }

    #[test]
    fn rejects_query_on_missing_event() {
        let text = "free c: channel.\n\
                    query x: bitstring; event(gone(x)) ==> event(gone(x)).\n\
                    process 0\n";
        let errs = check_pi_text(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("gone")));
    }
}
