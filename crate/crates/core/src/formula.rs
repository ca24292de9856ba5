//! Second-order formula trees: the SM operator rendering, polarity-aware
//! starring, and the normal-form helpers used by the program transforms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Atom, Literal, Program, Rule, SymKind, Symbol, Term};

/// A formula tree. Conjunction and disjunction are n-ary; the empty
/// conjunction is truth and the empty disjunction falsity. Second-order
/// quantifiers bind predicate or function variables by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
    ForallSO(Vec<Symbol>, Box<Formula>),
    ExistsSO(Vec<Symbol>, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Formula {
        Formula::Or(Vec::new())
    }

    pub fn atom(name: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Atom(name.into(), args)
    }

    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into(), Vec::new())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Exclusive or, written as `a <-> ~b`.
    pub fn xor(a: Formula, b: Formula) -> Formula {
        Formula::iff(a, Formula::not(b))
    }

    /// Conjunction that flattens nested conjunctions and drops truths.
    pub fn and(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Formula::And(out)
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Formula::Or(out)
        }
    }

    pub fn forall(vars: Vec<String>, f: Formula) -> Formula {
        if vars.is_empty() {
            f
        } else {
            Formula::Forall(vars, Box::new(f))
        }
    }

    pub fn exists(vars: Vec<String>, f: Formula) -> Formula {
        if vars.is_empty() {
            f
        } else {
            Formula::Exists(vars, Box::new(f))
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(..) | Formula::Eq(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_quantifier_free()),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..)
            | Formula::Exists(..)
            | Formula::ForallSO(..)
            | Formula::ExistsSO(..) => false,
        }
    }

    /// Free individual variables, in no particular order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            let term_vars = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
                t.visit_vars(&mut |v| {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.to_string());
                    }
                });
            };
            match f {
                Formula::Atom(_, args) => {
                    for t in args {
                        term_vars(t, bound, out);
                    }
                }
                Formula::Eq(l, r) => {
                    term_vars(l, bound, out);
                    term_vars(r, bound, out);
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(fs) | Formula::Or(fs) => {
                    for g in fs {
                        walk(g, bound, out);
                    }
                }
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
                    let n = bound.len();
                    bound.extend(vs.iter().cloned());
                    walk(g, bound, out);
                    bound.truncate(n);
                }
                Formula::ForallSO(_, g) | Formula::ExistsSO(_, g) => walk(g, bound, out),
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// All predicate names occurring in the formula (constants and bound
    /// predicate variables alike).
    pub fn predicate_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |name, _| {
            out.insert(name.to_string());
        });
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [Term])) {
        match self {
            Formula::Atom(name, args) => f(name, args),
            Formula::Eq(..) => {}
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(fs) | Formula::Or(fs) => {
                for g in fs {
                    g.visit_atoms(f);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Forall(_, g)
            | Formula::Exists(_, g)
            | Formula::ForallSO(_, g)
            | Formula::ExistsSO(_, g) => g.visit_atoms(f),
        }
    }

    /// Negation normal form over literals, with `->`, `<->` eliminated
    /// and negation pushed to atoms/equalities. Quantifier-free input only.
    pub fn nnf(&self) -> Result<Formula> {
        fn go(f: &Formula, neg: bool) -> Result<Formula> {
            Ok(match f {
                Formula::Atom(..) | Formula::Eq(..) => {
                    if neg {
                        Formula::not(f.clone())
                    } else {
                        f.clone()
                    }
                }
                Formula::Not(g) => go(g, !neg)?,
                Formula::And(fs) => {
                    let parts = fs.iter().map(|g| go(g, neg)).collect::<Result<Vec<_>>>()?;
                    if neg {
                        Formula::or(parts)
                    } else {
                        Formula::and(parts)
                    }
                }
                Formula::Or(fs) => {
                    let parts = fs.iter().map(|g| go(g, neg)).collect::<Result<Vec<_>>>()?;
                    if neg {
                        Formula::and(parts)
                    } else {
                        Formula::or(parts)
                    }
                }
                Formula::Implies(a, b) => {
                    if neg {
                        Formula::and(vec![go(a, false)?, go(b, true)?])
                    } else {
                        Formula::or(vec![go(a, true)?, go(b, false)?])
                    }
                }
                Formula::Iff(a, b) => {
                    // (a & b) | (~a & ~b), negated: (a & ~b) | (~a & b)
                    let (pp, nn) = (
                        Formula::and(vec![go(a, false)?, go(b, neg)?]),
                        Formula::and(vec![go(a, true)?, go(b, !neg)?]),
                    );
                    Formula::or(vec![pp, nn])
                }
                _ => {
                    return Err(Error::Transform(
                        "normal forms are defined for quantifier-free formulae only".into(),
                    ))
                }
            })
        }
        go(self, false)
    }
}

/// A literal of a quantifier-free matrix: a possibly negated atom or
/// equality. The building block of CNF/DNF conversion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FLit {
    pub atom: Atom,
    pub negated: bool,
}

impl FLit {
    pub fn to_body_literal(&self) -> Literal {
        Literal { atom: self.atom.clone(), negated: self.negated }
    }

    pub fn complement(&self) -> FLit {
        FLit { atom: self.atom.clone(), negated: !self.negated }
    }
}

fn literal_of(f: &Formula) -> Option<FLit> {
    match f {
        Formula::Atom(name, args) => {
            Some(FLit { atom: Atom::Pred(name.clone(), args.clone()), negated: false })
        }
        Formula::Eq(l, r) => Some(FLit { atom: Atom::Eq(l.clone(), r.clone()), negated: false }),
        Formula::Not(g) => literal_of(g).map(|l| l.complement()),
        _ => None,
    }
}

/// Disjunctive normal form of a quantifier-free formula: a list of
/// conjunctions of literals. Guarded against blow-up.
pub fn dnf(f: &Formula, guard: usize) -> Result<Vec<Vec<FLit>>> {
    fn go(f: &Formula, guard: usize) -> Result<Vec<Vec<FLit>>> {
        if let Some(lit) = literal_of(f) {
            return Ok(vec![vec![lit]]);
        }
        match f {
            Formula::And(fs) => {
                let mut acc: Vec<Vec<FLit>> = vec![Vec::new()];
                for g in fs {
                    let parts = go(g, guard)?;
                    let mut next = Vec::new();
                    for a in &acc {
                        for p in &parts {
                            let mut row = a.clone();
                            row.extend(p.iter().cloned());
                            next.push(row);
                        }
                    }
                    if next.len() > guard {
                        return Err(Error::SizeGuard(format!(
                            "DNF expansion exceeds {guard} disjuncts"
                        )));
                    }
                    acc = next;
                }
                Ok(acc)
            }
            Formula::Or(fs) => {
                let mut acc = Vec::new();
                for g in fs {
                    acc.extend(go(g, guard)?);
                    if acc.len() > guard {
                        return Err(Error::SizeGuard(format!(
                            "DNF expansion exceeds {guard} disjuncts"
                        )));
                    }
                }
                Ok(acc)
            }
            other => go(&other.nnf()?, guard),
        }
    }
    go(&f.nnf()?, guard)
}

/// Conjunctive normal form: a list of clauses, each a disjunction of
/// literals. Obtained by dualizing [`dnf`] on the negation.
pub fn cnf(f: &Formula, guard: usize) -> Result<Vec<Vec<FLit>>> {
    let neg_dnf = dnf(&Formula::not(f.clone()), guard)?;
    Ok(neg_dnf
        .into_iter()
        .map(|conj| conj.into_iter().map(|l| l.complement()).collect())
        .collect())
}

/// The universal closure of a rule as a formula: body conjunction
/// implies head disjunction.
pub fn rule_formula(rule: &Rule) -> Formula {
    let body = Formula::and(
        rule.body
            .iter()
            .map(|lit| {
                let base = match &lit.atom {
                    Atom::Pred(name, args) => Formula::Atom(name.clone(), args.clone()),
                    Atom::Eq(l, r) => Formula::Eq(l.clone(), r.clone()),
                };
                if lit.negated {
                    Formula::not(base)
                } else {
                    base
                }
            })
            .collect(),
    );
    let head = Formula::or(
        rule.head
            .iter()
            .map(|atom| match atom {
                Atom::Pred(name, args) => Formula::Atom(name.clone(), args.clone()),
                Atom::Eq(..) => unreachable!("no equality heads"),
            })
            .collect(),
    );
    let core = if rule.body.is_empty() {
        head
    } else {
        Formula::implies(body, head)
    };
    Formula::forall(rule.variables(), core)
}

/// Names for the starred predicate variables of `SM`.
pub fn star_name(pred: &str) -> String {
    format!("{pred}*")
}

/// The second-order stable-model operator: `phi & forall tau* (tau* < tau
/// -> ~phi*)`, where `phi` conjoins the universal closures of the rules
/// and `phi*` stars every positive occurrence of an intensional predicate.
pub fn sm_formula(p: &Program) -> Formula {
    let tau: Vec<String> = p.intensional().iter().cloned().collect();
    let phi = Formula::and(p.rules().iter().map(rule_formula).collect());

    // tau* < tau
    let mut smaller = Vec::new();
    for pred in &tau {
        let arity = p.pred_arity(pred).unwrap_or(0);
        let vars: Vec<String> = (0..arity).map(|i| format!("X{}", i + 1)).collect();
        let args: Vec<Term> = vars.iter().map(|v| Term::var(v)).collect();
        smaller.push(Formula::forall(
            vars.clone(),
            Formula::implies(
                Formula::Atom(star_name(pred), args.clone()),
                Formula::Atom(pred.clone(), args),
            ),
        ));
    }
    let mut geq = Vec::new();
    for pred in &tau {
        let arity = p.pred_arity(pred).unwrap_or(0);
        let vars: Vec<String> = (0..arity).map(|i| format!("X{}", i + 1)).collect();
        let args: Vec<Term> = vars.iter().map(|v| Term::var(v)).collect();
        geq.push(Formula::forall(
            vars.clone(),
            Formula::implies(
                Formula::Atom(pred.clone(), args.clone()),
                Formula::Atom(star_name(pred), args),
            ),
        ));
    }
    let tau_lt = Formula::and(vec![
        Formula::and(smaller),
        Formula::not(Formula::and(geq)),
    ]);

    let phi_star = Formula::and(p.rules().iter().map(|r| starred_rule(r, p)).collect());

    let star_decls: Vec<Symbol> = tau
        .iter()
        .map(|pred| Symbol {
            name: star_name(pred),
            kind: SymKind::Pred,
            arity: p.pred_arity(pred).unwrap_or(0),
        })
        .collect();

    let minimality = if star_decls.is_empty() {
        Formula::truth()
    } else {
        Formula::ForallSO(
            star_decls,
            Box::new(Formula::implies(tau_lt, Formula::not(phi_star))),
        )
    };

    Formula::and(vec![phi, minimality])
}

/// The starred universal closure of one rule: positive occurrences of
/// intensional predicates are replaced by their starred variables. In a
/// rule the positive occurrences are the head atoms and the non-negated
/// body atoms; negated literals stay untouched.
fn starred_rule(rule: &Rule, p: &Program) -> Formula {
    let star_atom = |atom: &Atom| -> Formula {
        match atom {
            Atom::Pred(name, args) if p.is_intensional(name) => {
                Formula::Atom(star_name(name), args.clone())
            }
            Atom::Pred(name, args) => Formula::Atom(name.clone(), args.clone()),
            Atom::Eq(l, r) => Formula::Eq(l.clone(), r.clone()),
        }
    };
    let body = Formula::and(
        rule.body
            .iter()
            .map(|lit| {
                if lit.negated {
                    // a negated occurrence is not positive: keep the original
                    let base = match &lit.atom {
                        Atom::Pred(name, args) => Formula::Atom(name.clone(), args.clone()),
                        Atom::Eq(l, r) => Formula::Eq(l.clone(), r.clone()),
                    };
                    Formula::not(base)
                } else {
                    star_atom(&lit.atom)
                }
            })
            .collect(),
    );
    let head = Formula::or(rule.head.iter().map(star_atom).collect());
    let core = if rule.body.is_empty() {
        head
    } else {
        Formula::implies(body, head)
    };
    Formula::forall(rule.variables(), core)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f, 0)
    }
}

/// Precedence levels: iff 1, implies 2, or 3, and 4, unary 5.
fn write_formula(fm: &Formula, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    let paren = |f: &mut fmt::Formatter<'_>, own: u8, body: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result| {
        if own < prec {
            write!(f, "(")?;
            body(f)?;
            write!(f, ")")
        } else {
            body(f)
        }
    };
    match fm {
        Formula::Atom(name, args) => {
            write!(f, "{name}")?;
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
        Formula::Eq(l, r) => write!(f, "{l} = {r}"),
        Formula::Not(g) => {
            write!(f, "~")?;
            write_formula(g, f, 5)
        }
        Formula::And(fs) => {
            if fs.is_empty() {
                return write!(f, "#true");
            }
            paren(f, 4, &|f| {
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    write_formula(g, f, 5)?;
                }
                Ok(())
            })
        }
        Formula::Or(fs) => {
            if fs.is_empty() {
                return write!(f, "#false");
            }
            paren(f, 3, &|f| {
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write_formula(g, f, 4)?;
                }
                Ok(())
            })
        }
        Formula::Implies(a, b) => paren(f, 2, &|f| {
            write_formula(a, f, 3)?;
            write!(f, " -> ")?;
            write_formula(b, f, 3)
        }),
        Formula::Iff(a, b) => paren(f, 1, &|f| {
            write_formula(a, f, 2)?;
            write!(f, " <-> ")?;
            write_formula(b, f, 2)
        }),
        Formula::Forall(vs, g) => {
            write!(f, "forall {} ", vs.join(" "))?;
            write!(f, "(")?;
            write_formula(g, f, 0)?;
            write!(f, ")")
        }
        Formula::Exists(vs, g) => {
            write!(f, "exists {} ", vs.join(" "))?;
            write!(f, "(")?;
            write_formula(g, f, 0)?;
            write!(f, ")")
        }
        Formula::ForallSO(syms, g) => {
            write!(f, "forall")?;
            for s in syms {
                write!(f, " {}/{}", s.name, s.arity)?;
            }
            write!(f, " (")?;
            write_formula(g, f, 0)?;
            write!(f, ")")
        }
        Formula::ExistsSO(syms, g) => {
            write!(f, "exists")?;
            for s in syms {
                write!(f, " {}/{}", s.name, s.arity)?;
            }
            write!(f, " (")?;
            write_formula(g, f, 0)?;
            write!(f, ")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    /// Count the starred predicate variables introduced by `sm_formula`.
    fn starred_names(f: &Formula) -> BTreeSet<String> {
        f.predicate_names()
            .into_iter()
            .filter(|n| n.ends_with('*'))
            .collect()
    }

    #[test]
    fn sm_single_fact() {
        let sm = sm_formula(&prog("p."));
        let text = sm.to_string();
        // phi = p; tau*<tau = (p* -> p) & ~(p -> p*); phi* = p*
        assert!(text.starts_with("p &"), "{text}");
        assert!(text.contains("p* -> p"), "{text}");
        assert!(text.contains("~(p -> p*)"), "{text}");
        assert!(text.contains("-> ~p*"), "{text}");
    }

    #[test]
    fn sm_keeps_extensional_untouched() {
        // q has no rule head, so it is extensional and never starred
        let sm = sm_formula(&prog("p :- not q."));
        let stars = starred_names(&sm);
        assert_eq!(stars, BTreeSet::from(["p*".to_string()]));
        assert!(sm.to_string().contains("~q -> p*"), "{sm}");
    }

    #[test]
    fn sm_positive_body_occurrence_starred() {
        let sm = sm_formula(&prog("p :- p."));
        assert!(sm.to_string().contains("p* -> p*"), "{sm}");
    }

    #[test]
    fn sm_star_count_matches_tau() {
        let p = prog("p(X) ; q :- e(X), not r. r :- q.");
        let sm = sm_formula(&p);
        let stars = starred_names(&sm);
        assert_eq!(stars.len(), p.intensional().len());
    }

    #[test]
    fn nnf_pushes_negation() {
        let f = Formula::not(Formula::and(vec![
            Formula::prop("a"),
            Formula::not(Formula::prop("b")),
        ]));
        let n = f.nnf().unwrap();
        assert_eq!(n.to_string(), "~a | b");
    }

    #[test]
    fn dnf_distributes() {
        // (a | b) & c -> two disjuncts
        let f = Formula::and(vec![
            Formula::or(vec![Formula::prop("a"), Formula::prop("b")]),
            Formula::prop("c"),
        ]);
        let d = dnf(&f, 4096).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|conj| conj.len() == 2));
    }

    #[test]
    fn cnf_of_implication() {
        let f = Formula::implies(Formula::prop("a"), Formula::prop("b"));
        let c = cnf(&f, 4096).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 2);
    }

    #[test]
    fn dnf_guard_trips() {
        // (a1|b1) & ... & (a13|b13) has 2^13 > 4096 disjuncts
        let parts: Vec<Formula> = (0..13)
            .map(|i| {
                Formula::or(vec![
                    Formula::prop(format!("a{i}")),
                    Formula::prop(format!("b{i}")),
                ])
            })
            .collect();
        let err = dnf(&Formula::and(parts), 4096).unwrap_err();
        assert!(err.to_string().contains("DNF"));
    }
}
