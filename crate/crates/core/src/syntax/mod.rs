//! Rule and program syntax: terms, atoms, literals, rules, programs, and
//! the classifiers (normal / plain / propositional / intensional set).
//!
//! The concrete grammar is handled by [`parse`]; printing lives in
//! [`render`]. Programs keep a derived symbol table (every symbol with its
//! kind and arity) and the intensional predicate set.

mod parse;
mod render;

pub use parse::parse_program;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order term: a variable or a function application. Arity-0
/// applications are individual constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => {
                for t in args {
                    t.visit_vars(f);
                }
            }
        }
    }

    fn visit_symbols<'a>(&'a self, f: &mut impl FnMut(&'a str, usize)) {
        if let Term::App(name, args) = self {
            f(name, args.len());
            for t in args {
                t.visit_symbols(f);
            }
        }
    }

    /// Substitute variables by terms.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|t| t.substitute(map)).collect())
            }
        }
    }
}

/// An atom: a predicate application or an equality between terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Atom {
    Pred(String, Vec<Term>),
    Eq(Term, Term),
}

impl Atom {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom::Pred(name.into(), args)
    }

    pub fn prop(name: impl Into<String>) -> Atom {
        Atom::Pred(name.into(), Vec::new())
    }

    pub fn is_eq(&self) -> bool {
        matches!(self, Atom::Eq(..))
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Atom::Pred(_, args) => {
                for t in args {
                    t.visit_vars(f);
                }
            }
            Atom::Eq(l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }

    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Atom {
        match self {
            Atom::Pred(name, args) => {
                Atom::Pred(name.clone(), args.iter().map(|t| t.substitute(map)).collect())
            }
            Atom::Eq(l, r) => Atom::Eq(l.substitute(map), r.substitute(map)),
        }
    }
}

/// A body literal: an atom or its default negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { atom, negated: true }
    }
}

/// A rule `body -> head` with a conjunctive body of literals and a
/// disjunctive head of equality-free atoms. An empty head denotes falsity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub body: Vec<Literal>,
    pub head: Vec<Atom>,
}

impl Rule {
    pub fn new(head: Vec<Atom>, body: Vec<Literal>) -> Rule {
        Rule { body, head }
    }

    pub fn fact(head: Vec<Atom>) -> Rule {
        Rule { body: Vec::new(), head }
    }

    pub fn constraint(body: Vec<Literal>) -> Rule {
        Rule { body, head: Vec::new() }
    }

    /// All variable names occurring in the rule, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut record = |v: &str| {
            if seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        };
        for lit in &self.body {
            lit.atom.visit_vars(&mut record);
        }
        for atom in &self.head {
            atom.visit_vars(&mut record);
        }
        out
    }
}

/// The kind of a symbol in a vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymKind {
    Pred,
    Func,
}

/// A symbol with kind and arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymKind,
    pub arity: usize,
}

impl Symbol {
    pub fn pred(name: impl Into<String>, arity: usize) -> Symbol {
        Symbol { name: name.into(), kind: SymKind::Pred, arity }
    }

    pub fn func(name: impl Into<String>, arity: usize) -> Symbol {
        Symbol { name: name.into(), kind: SymKind::Func, arity }
    }
}

/// A finite disjunctive logic program together with its derived
/// vocabulary and intensional predicate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    vocabulary: BTreeMap<String, (SymKind, usize)>,
    /// Predicate names in first-occurrence order (used e.g. for flag
    /// assignment in the encoding simulation).
    pred_order: Vec<String>,
    intensional: BTreeSet<String>,
}

impl Program {
    /// Build a program from rules, deriving the vocabulary and the
    /// intensional set. Fails on arity or kind clashes, equalities or
    /// repeated-arity mismatches anywhere in the rules.
    pub fn new(rules: Vec<Rule>) -> Result<Program> {
        let mut vocabulary: BTreeMap<String, (SymKind, usize)> = BTreeMap::new();
        let mut pred_order = Vec::new();
        let mut intensional = BTreeSet::new();

        let record = |name: &str, kind: SymKind, arity: usize,
                          vocab: &mut BTreeMap<String, (SymKind, usize)>,
                          order: &mut Vec<String>|
         -> Result<()> {
            match vocab.get(name) {
                None => {
                    vocab.insert(name.to_string(), (kind, arity));
                    if kind == SymKind::Pred {
                        order.push(name.to_string());
                    }
                    Ok(())
                }
                Some((k, a)) => {
                    if *k != kind {
                        return Err(Error::KindClash { symbol: name.to_string() });
                    }
                    if *a != arity {
                        return Err(Error::ArityClash {
                            symbol: name.to_string(),
                            expected: *a,
                            found: arity,
                        });
                    }
                    Ok(())
                }
            }
        };

        for rule in &rules {
            for atom in &rule.head {
                if atom.is_eq() {
                    return Err(Error::Transform("equality in rule head".into()));
                }
            }
            let walk_atom = |atom: &Atom,
                                 vocab: &mut BTreeMap<String, (SymKind, usize)>,
                                 order: &mut Vec<String>|
             -> Result<()> {
                match atom {
                    Atom::Pred(name, args) => {
                        record(name, SymKind::Pred, args.len(), vocab, order)?;
                        for t in args {
                            let mut err = None;
                            t.visit_symbols(&mut |n, a| {
                                if err.is_none() {
                                    if let Err(e) = record(n, SymKind::Func, a, vocab, order) {
                                        err = Some(e);
                                    }
                                }
                            });
                            if let Some(e) = err {
                                return Err(e);
                            }
                        }
                        Ok(())
                    }
                    Atom::Eq(l, r) => {
                        for t in [l, r] {
                            let mut err = None;
                            t.visit_symbols(&mut |n, a| {
                                if err.is_none() {
                                    if let Err(e) = record(n, SymKind::Func, a, vocab, order) {
                                        err = Some(e);
                                    }
                                }
                            });
                            if let Some(e) = err {
                                return Err(e);
                            }
                        }
                        Ok(())
                    }
                }
            };
            // head first: symbols register in textual order
            for atom in &rule.head {
                walk_atom(atom, &mut vocabulary, &mut pred_order)?;
                if let Atom::Pred(name, _) = atom {
                    intensional.insert(name.clone());
                }
            }
            for lit in &rule.body {
                walk_atom(&lit.atom, &mut vocabulary, &mut pred_order)?;
            }
        }

        Ok(Program { rules, vocabulary, pred_order, intensional })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    /// The derived vocabulary: every symbol with kind and arity.
    pub fn vocabulary(&self) -> &BTreeMap<String, (SymKind, usize)> {
        &self.vocabulary
    }

    /// Predicate names in first-occurrence order.
    pub fn predicates_in_order(&self) -> &[String] {
        &self.pred_order
    }

    /// The intensional predicates: exactly those occurring in some head.
    pub fn intensional(&self) -> &BTreeSet<String> {
        &self.intensional
    }

    pub fn is_intensional(&self, pred: &str) -> bool {
        self.intensional.contains(pred)
    }

    pub fn pred_arity(&self, pred: &str) -> Option<usize> {
        match self.vocabulary.get(pred) {
            Some((SymKind::Pred, a)) => Some(*a),
            _ => None,
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.vocabulary.iter().map(|(name, (kind, arity))| Symbol {
            name: name.clone(),
            kind: *kind,
            arity: *arity,
        })
    }
}

/// Result of [`classify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub normal: bool,
    pub plain: bool,
    pub propositional: bool,
    pub intensional: BTreeSet<String>,
}

/// Classify a program: normal (heads carry at most one atom), plain (no
/// negated intensional atom anywhere), propositional (all predicates
/// nullary), plus the intensional predicate set.
pub fn classify(p: &Program) -> Classification {
    let normal = p.rules().iter().all(|r| r.head.len() <= 1);
    let plain = p.rules().iter().all(|r| {
        r.body.iter().all(|lit| {
            !(lit.negated
                && matches!(&lit.atom, Atom::Pred(name, _) if p.is_intensional(name)))
        })
    });
    let propositional = p
        .vocabulary()
        .iter()
        .all(|(_, (kind, arity))| *kind != SymKind::Pred || *arity == 0);
    Classification {
        normal,
        plain,
        propositional,
        intensional: p.intensional().clone(),
    }
}

/// Render a program in the concrete grammar; inverse of [`parse_program`]
/// up to whitespace.
pub fn render_program(p: &Program) -> String {
    render::program_to_string(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn classify_disjunctive_fact() {
        let c = classify(&prog("p ; q."));
        assert!(!c.normal);
        assert!(c.plain);
        assert!(c.propositional);
        assert_eq!(
            c.intensional,
            ["p", "q"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn classify_odd_loop() {
        let c = classify(&prog("p :- not p."));
        assert!(c.normal);
        assert!(!c.plain);
    }

    #[test]
    fn classify_negated_extensional_is_plain() {
        // q never occurs in a head, so "not q" does not break plainness
        let c = classify(&prog("p :- not q."));
        assert!(c.plain);
        assert_eq!(c.intensional.len(), 1);
    }

    #[test]
    fn intensional_is_head_predicates() {
        let p = prog("p(X) :- e(X), not q(X). r ; s :- p(X).");
        let exp: BTreeSet<String> =
            ["p", "r", "s"].iter().map(|s| s.to_string()).collect();
        assert_eq!(*p.intensional(), exp);
    }

    #[test]
    fn arity_clash_detected() {
        let err = parse_program("p(X) :- p(X, Y).").unwrap_err();
        assert!(err.to_string().contains("arity"));
    }

    #[test]
    fn vocabulary_records_functions() {
        let p = prog("p(f(X), c) :- q(X).");
        assert_eq!(p.vocabulary().get("f"), Some(&(SymKind::Func, 1)));
        assert_eq!(p.vocabulary().get("c"), Some(&(SymKind::Func, 0)));
        assert_eq!(p.vocabulary().get("p"), Some(&(SymKind::Pred, 2)));
    }

    #[test]
    fn predicates_in_first_occurrence_order() {
        let p = prog("q :- r. p :- q.");
        assert_eq!(p.predicates_in_order(), &["q", "r", "p"]);
    }
}
