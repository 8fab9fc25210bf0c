//! Symbolic message algebra. Terms are a free algebra over names and a fixed
//! set of cryptographic constructors; destructors reduce against matching
//! constructors and are stuck otherwise. Equality is purely syntactic.

use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ctor {
    /// Symmetric encryption senc(message, key).
    Senc,
    /// Symmetric decryption sdec(ciphertext, key) — destructor.
    Sdec,
    /// Asymmetric encryption aenc(message, public_key).
    Aenc,
    /// Asymmetric decryption adec(ciphertext, private_key) — destructor.
    Adec,
    /// Public key of a private key, pk(k).
    Pk,
    /// Signature sign(message, private_key).
    Sign,
    /// checksign(signature, public_key) recovers the signed message — destructor.
    Checksign,
    /// Message authentication code mac(message, key).
    Mac,
    Hash,
    Pair,
    /// proj1(pair(a, b)) = a — destructor.
    Proj1,
    /// proj2(pair(a, b)) = b — destructor.
    Proj2,
    /// Opaque k-ary combinator standing in for erased computations. One-way:
    /// it has no destructor, so its inputs cannot be recovered from it.
    Comb(u8),
}

impl Ctor {
    pub fn arity(self) -> usize {
        match self {
            Ctor::Senc | Ctor::Sdec | Ctor::Aenc | Ctor::Adec => 2,
            Ctor::Sign | Ctor::Mac | Ctor::Pair | Ctor::Checksign => 2,
            Ctor::Pk | Ctor::Hash | Ctor::Proj1 | Ctor::Proj2 => 1,
            Ctor::Comb(k) => k as usize,
        }
    }

    pub fn is_destructor(self) -> bool {
        matches!(
            self,
            Ctor::Sdec | Ctor::Adec | Ctor::Checksign | Ctor::Proj1 | Ctor::Proj2
        )
    }

    /// Constructors the attacker may apply to known terms.
    pub fn attacker_composable(self) -> bool {
        matches!(
            self,
            Ctor::Senc
                | Ctor::Aenc
                | Ctor::Pk
                | Ctor::Sign
                | Ctor::Mac
                | Ctor::Hash
                | Ctor::Pair
                | Ctor::Comb(_)
        )
    }

    pub fn name(self) -> String {
        match self {
            Ctor::Senc => "senc".into(),
            Ctor::Sdec => "sdec".into(),
            Ctor::Aenc => "aenc".into(),
            Ctor::Adec => "adec".into(),
            Ctor::Pk => "pk".into(),
            Ctor::Sign => "sign".into(),
            Ctor::Checksign => "checksign".into(),
            Ctor::Mac => "mac".into(),
            Ctor::Hash => "hash".into(),
            Ctor::Pair => "pair".into(),
            Ctor::Proj1 => "proj1".into(),
            Ctor::Proj2 => "proj2".into(),
            Ctor::Comb(k) => format!("comb_{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Atomic name. `fresh` distinguishes restricted names (unknown to the
    /// attacker unless leaked) from public constants.
    Name { id: Arc<str>, fresh: bool },
    /// Placeholder used in shape templates; never occurs in ground terms.
    Var(Arc<str>),
    Apply(Ctor, Arc<[Term]>),
}

impl Term {
    pub fn fresh(id: &str) -> Term {
        Term::Name {
            id: id.into(),
            fresh: true,
        }
    }

    pub fn constant(id: &str) -> Term {
        Term::Name {
            id: id.into(),
            fresh: false,
        }
    }

    pub fn var(id: &str) -> Term {
        Term::Var(id.into())
    }

    pub fn apply(ctor: Ctor, args: Vec<Term>) -> Term {
        debug_assert_eq!(ctor.arity(), args.len(), "bad arity for {:?}", ctor);
        Term::Apply(ctor, args.into())
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::apply(Ctor::Pair, vec![a, b])
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Name { .. } | Term::Var(_) => 1,
            Term::Apply(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Name { .. } => true,
            Term::Var(_) => false,
            Term::Apply(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self, out: &mut Vec<Arc<str>>) {
        match self {
            Term::Name { .. } => {}
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Apply(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    /// Substitute every variable by its binding. Panics on unbound variables;
    /// callers instantiate shapes only with complete assignments.
    pub fn substitute(&self, bindings: &dyn Fn(&str) -> Term) -> Term {
        match self {
            Term::Name { .. } => self.clone(),
            Term::Var(v) => bindings(v),
            Term::Apply(c, args) => {
                Term::Apply(*c, args.iter().map(|a| a.substitute(bindings)).collect())
            }
        }
    }
}

/// One-step head reduction for destructor applications. `None` means stuck.
fn reduce_head(ctor: Ctor, args: &[Term]) -> Option<Term> {
    match ctor {
        Ctor::Proj1 => match &args[0] {
            Term::Apply(Ctor::Pair, ps) => Some(ps[0].clone()),
            _ => None,
        },
        Ctor::Proj2 => match &args[0] {
            Term::Apply(Ctor::Pair, ps) => Some(ps[1].clone()),
            _ => None,
        },
        Ctor::Sdec => match &args[0] {
            Term::Apply(Ctor::Senc, es) if es[1] == args[1] => Some(es[0].clone()),
            _ => None,
        },
        Ctor::Adec => match &args[0] {
            Term::Apply(Ctor::Aenc, es) => match &es[1] {
                Term::Apply(Ctor::Pk, ks) if ks[0] == args[1] => Some(es[0].clone()),
                _ => None,
            },
            _ => None,
        },
        Ctor::Checksign => match &args[0] {
            Term::Apply(Ctor::Sign, ss) => match &args[1] {
                Term::Apply(Ctor::Pk, ks) if ks[0] == ss[1] => Some(ss[0].clone()),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// Apply a constructor to already-normalized arguments, reducing destructor
/// redexes. Destructor application to a non-matching term is an evaluation
/// failure, mirroring pattern-match failure in the target pi dialect.
pub fn apply_reduced(ctor: Ctor, args: Vec<Term>) -> Result<Term, EvalStuck> {
    if ctor.is_destructor() {
        reduce_head(ctor, &args).ok_or(EvalStuck {
            ctor,
            args: args.clone(),
        })
    } else {
        Ok(Term::apply(ctor, args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalStuck {
    pub ctor: Ctor,
    pub args: Vec<Term>,
}

impl fmt::Display for EvalStuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} is stuck on ", self.ctor.name())?;
        let mut first = true;
        for a in &self.args {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name { id, .. } => write!(f, "{id}"),
            Term::Var(v) => write!(f, "?{v}"),
            Term::Apply(c, args) => {
                write!(f, "{}(", c.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> Term {
        Term::fresh("k")
    }

    fn m() -> Term {
        Term::fresh("m")
    }

    #[test]
    fn symmetric_decryption_reduces() {
        let enc = Term::apply(Ctor::Senc, vec![m(), k()]);
        let dec = apply_reduced(Ctor::Sdec, vec![enc, k()]).unwrap();
        assert_eq!(dec, m());
    }

    #[test]
    fn wrong_key_is_stuck() {
        let enc = Term::apply(Ctor::Senc, vec![m(), k()]);
        assert!(apply_reduced(Ctor::Sdec, vec![enc, Term::fresh("k2")]).is_err());
    }

    #[test]
    fn asymmetric_roundtrip() {
        let pubk = Term::apply(Ctor::Pk, vec![k()]);
        let enc = Term::apply(Ctor::Aenc, vec![m(), pubk]);
        assert_eq!(apply_reduced(Ctor::Adec, vec![enc, k()]).unwrap(), m());
    }

    #[test]
    fn signature_check_recovers_message() {
        let sig = Term::apply(Ctor::Sign, vec![m(), k()]);
        let pubk = Term::apply(Ctor::Pk, vec![k()]);
        assert_eq!(apply_reduced(Ctor::Checksign, vec![sig, pubk]).unwrap(), m());
    }

    #[test]
    fn projections() {
        let p = Term::pair(m(), k());
        assert_eq!(apply_reduced(Ctor::Proj1, vec![p.clone()]).unwrap(), m());
        assert_eq!(apply_reduced(Ctor::Proj2, vec![p]).unwrap(), k());
    }

    #[test]
    fn display_uses_surface_syntax() {
        let t = Term::apply(
            Ctor::Mac,
            vec![Term::fresh("msg1"), Term::fresh("PSK1")],
        );
        assert_eq!(t.to_string(), "mac(msg1, PSK1)");
        let c = Term::apply(Ctor::Comb(2), vec![m(), k()]);
        assert_eq!(c.to_string(), "comb_2(m, k)");
    }

    #[test]
    fn depth_counts_nesting() {
        assert_eq!(k().depth(), 1);
        let t = Term::apply(Ctor::Senc, vec![Term::pair(m(), k()), k()]);
        assert_eq!(t.depth(), 3);
    }
}
