//! Attacker knowledge and its saturation. The knowledge base stores an
//! analyzed core: every term the attacker observed plus everything
//! extractable from it (unpairing, decryption under derivable keys, message
//! recovery from signatures with a known verification key). Membership in
//! the bounded closure is answered by goal-directed composition over the
//! core: a term is derivable when it is in the core or when it is built by
//! an attacker-applicable constructor from derivable parts without exceeding
//! the depth bound. Extracted subterms are never depth-limited; the bound
//! restricts only what the attacker composes.

use crate::term::{Ctor, Term};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    terms: BTreeSet<Term>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        KnowledgeBase {
            terms: terms.into_iter().collect(),
        }
    }

    pub fn add(&mut self, t: Term) {
        self.terms.insert(t);
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Saturated view of a knowledge base at a fixed composition depth bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saturation {
    core: BTreeSet<Term>,
    depth_bound: usize,
}

/// Close the knowledge base under attacker derivations. Monotone in both
/// arguments, idempotent, and independent of insertion order.
pub fn saturate(kb: &KnowledgeBase, depth_bound: usize) -> Saturation {
    assert!(depth_bound >= 1, "depth bound must be at least 1");
    let mut s = Saturation {
        core: kb.terms.clone(),
        depth_bound,
    };
    analyze(&mut s.core, depth_bound);
    s
}

impl Saturation {
    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    /// The analyzed core: observed terms plus everything extracted.
    pub fn core(&self) -> &BTreeSet<Term> {
        &self.core
    }

    pub fn into_core(self) -> BTreeSet<Term> {
        self.core
    }

    /// Record a newly observed term and re-analyze.
    pub fn observe(&mut self, t: Term) {
        if self.core.insert(t) {
            analyze(&mut self.core, self.depth_bound);
        }
    }

    /// Bounded-closure membership.
    pub fn derivable(&self, t: &Term) -> bool {
        synthesize(&self.core, self.depth_bound, t)
    }
}

pub(crate) fn synthesize(core: &BTreeSet<Term>, depth_bound: usize, t: &Term) -> bool {
    if core.contains(t) {
        return true;
    }
    match t {
        Term::Apply(ctor, args) if ctor.attacker_composable() => {
            t.depth() <= depth_bound && args.iter().all(|a| synthesize(core, depth_bound, a))
        }
        _ => false,
    }
}

pub(crate) fn analyze(core: &mut BTreeSet<Term>, depth_bound: usize) {
    loop {
        let mut new_terms: Vec<Term> = Vec::new();
        for t in core.iter() {
            if let Term::Apply(ctor, args) = t {
                match ctor {
                    Ctor::Pair => {
                        new_terms.push(args[0].clone());
                        new_terms.push(args[1].clone());
                    }
                    Ctor::Senc => {
                        if synthesize(core, depth_bound, &args[1]) {
                            new_terms.push(args[0].clone());
                        }
                    }
                    Ctor::Aenc => {
                        if let Term::Apply(Ctor::Pk, key) = &args[1] {
                            if synthesize(core, depth_bound, &key[0]) {
                                new_terms.push(args[0].clone());
                            }
                        }
                    }
                    Ctor::Sign => {
                        // The message is recovered by checking the signature
                        // with the corresponding verification key.
                        let vk = Term::apply(Ctor::Pk, vec![args[1].clone()]);
                        if synthesize(core, depth_bound, &vk) {
                            new_terms.push(args[0].clone());
                        }
                    }
                    _ => {}
                }
            }
        }
        let before = core.len();
        core.extend(new_terms);
        if core.len() == before {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(id: &str) -> Term {
        Term::fresh(id)
    }

    fn senc(m: Term, k: Term) -> Term {
        Term::apply(Ctor::Senc, vec![m, k])
    }

    #[test]
    fn single_name_closure_contains_it() {
        let kb = KnowledgeBase::from_terms([n("k")]);
        let s = saturate(&kb, 6);
        assert!(s.derivable(&n("k")));
        // and derived constructions up to the bound
        assert!(s.derivable(&Term::apply(Ctor::Hash, vec![n("k")])));
        assert!(s.derivable(&Term::pair(n("k"), n("k"))));
    }

    #[test]
    fn decryption_with_known_key() {
        let kb = KnowledgeBase::from_terms([senc(n("s"), n("k")), n("k")]);
        let s = saturate(&kb, 6);
        assert!(s.derivable(&n("s")));
    }

    #[test]
    fn decryption_without_key_fails_at_any_bound() {
        let kb = KnowledgeBase::from_terms([senc(n("s"), n("k"))]);
        for depth in 1..=6 {
            let s = saturate(&kb, depth);
            assert!(!s.derivable(&n("s")), "leaked at depth {depth}");
            assert!(!s.derivable(&n("k")));
        }
    }

    #[test]
    fn composed_key_decryption() {
        let key = Term::pair(n("k1"), n("k2"));
        let kb = KnowledgeBase::from_terms([senc(n("s"), key), n("k1"), n("k2")]);
        let s = saturate(&kb, 6);
        assert!(s.derivable(&n("s")));
        // at depth 1 the pair cannot be composed
        let s1 = saturate(&kb, 1);
        assert!(!s1.derivable(&n("s")));
    }

    #[test]
    fn asymmetric_and_signature_rules() {
        let sk = n("sk");
        let pubk = Term::apply(Ctor::Pk, vec![sk.clone()]);
        let kb = KnowledgeBase::from_terms([
            Term::apply(Ctor::Aenc, vec![n("m1"), pubk.clone()]),
            Term::apply(Ctor::Sign, vec![n("m2"), sk.clone()]),
            pubk,
        ]);
        let s = saturate(&kb, 6);
        // aenc under pk(sk) stays sealed without sk
        assert!(!s.derivable(&n("m1")));
        // signatures reveal the signed message to anyone with pk(sk)
        assert!(s.derivable(&n("m2")));

        let kb2 = KnowledgeBase::from_terms([
            Term::apply(Ctor::Aenc, vec![n("m1"), Term::apply(Ctor::Pk, vec![sk.clone()])]),
            sk,
        ]);
        assert!(saturate(&kb2, 6).derivable(&n("m1")));
    }

    #[test]
    fn comb_is_one_way() {
        let kb = KnowledgeBase::from_terms([Term::apply(Ctor::Comb(2), vec![n("a"), n("b")])]);
        let s = saturate(&kb, 6);
        assert!(!s.derivable(&n("a")));
        assert!(!s.derivable(&n("b")));
        // but the attacker can build combs from known parts
        let kb2 = KnowledgeBase::from_terms([n("a"), n("b")]);
        assert!(saturate(&kb2, 6).derivable(&Term::apply(Ctor::Comb(2), vec![n("a"), n("b")])));
    }

    #[test]
    fn saturation_is_monotone_and_idempotent() {
        let kb = KnowledgeBase::from_terms([senc(n("s"), n("k")), n("k"), Term::pair(n("a"), n("b"))]);
        let s = saturate(&kb, 4);
        for t in kb.terms() {
            assert!(s.derivable(t), "kb not contained in its own closure");
        }
        let again = saturate(&KnowledgeBase::from_terms(s.core().iter().cloned()), 4);
        assert_eq!(s.core(), again.core(), "saturation must be a fixed point");
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let terms = vec![senc(n("s"), n("k")), n("k"), Term::pair(n("x"), senc(n("y"), n("x")))];
        let forward = saturate(&KnowledgeBase::from_terms(terms.clone()), 5);
        let mut reversed = KnowledgeBase::new();
        for t in terms.into_iter().rev() {
            reversed.add(t);
        }
        assert_eq!(forward.core(), saturate(&reversed, 5).core());
    }

    #[test]
    fn observe_reanalyzes() {
        let mut s = saturate(&KnowledgeBase::from_terms([senc(n("s"), n("k"))]), 6);
        assert!(!s.derivable(&n("s")));
        s.observe(n("k"));
        assert!(s.derivable(&n("s")));
    }
}
