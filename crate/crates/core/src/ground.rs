//! First-order GL-reduction: rule splitting into the positive-intensional
//! part and the residue, instantiation over a finite structure, and the
//! grounded atom/clause/rule types.
//!
//! The ground types are generic over the element type so the same clause
//! machinery runs over finite-domain indices and over big naturals in the
//! encoding simulation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::structure::{assignments, Elem, Structure};
use crate::syntax::{Atom, Literal, Program, Rule};

/// A grounded atom: predicate name plus element tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtomOf<E> {
    pub pred: String,
    pub args: Vec<E>,
}

pub type GroundAtom = GroundAtomOf<Elem>;

impl<E> GroundAtomOf<E> {
    pub fn new(pred: impl Into<String>, args: Vec<E>) -> Self {
        GroundAtomOf { pred: pred.into(), args }
    }
}

impl<E: fmt::Display> fmt::Display for GroundAtomOf<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A grounded positive clause: a duplicate-free, order-insensitive set of
/// grounded atoms. The empty clause is unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PositiveClauseOf<E: Ord>(BTreeSet<GroundAtomOf<E>>);

pub type PositiveClause = PositiveClauseOf<Elem>;

impl<E: Ord> PositiveClauseOf<E> {
    pub fn new(atoms: impl IntoIterator<Item = GroundAtomOf<E>>) -> Self {
        PositiveClauseOf(atoms.into_iter().collect())
    }

    pub fn empty() -> Self {
        PositiveClauseOf(BTreeSet::new())
    }

    pub fn atoms(&self) -> &BTreeSet<GroundAtomOf<E>> {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, atom: &GroundAtomOf<E>) -> bool {
        self.0.contains(atom)
    }

    /// True when some atom of the clause lies in the interpretation.
    pub fn intersects(&self, interp: &BTreeSet<GroundAtomOf<E>>) -> bool {
        self.0.iter().any(|a| interp.contains(a))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundAtomOf<E>> {
        self.0.iter()
    }
}

impl<E: Ord + Clone> PositiveClauseOf<E> {
    pub fn union(&self, other: &Self) -> Self {
        PositiveClauseOf(self.0.union(&other.0).cloned().collect())
    }

    pub fn without(&self, atom: &GroundAtomOf<E>) -> Self {
        let mut atoms = self.0.clone();
        atoms.remove(atom);
        PositiveClauseOf(atoms)
    }
}

impl<E: Ord + Clone> FromIterator<GroundAtomOf<E>> for PositiveClauseOf<E> {
    fn from_iter<I: IntoIterator<Item = GroundAtomOf<E>>>(iter: I) -> Self {
        PositiveClauseOf::new(iter)
    }
}

impl<E: Ord + fmt::Display> fmt::Display for PositiveClauseOf<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "#false");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A finite set of grounded intensional atoms.
pub type InterpretationOf<E> = BTreeSet<GroundAtomOf<E>>;
pub type Interpretation = InterpretationOf<Elem>;

/// A plain ground rule: positive intensional body atoms and a positive
/// clause head (empty head = falsity).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRuleOf<E: Ord> {
    pub body: BTreeSet<GroundAtomOf<E>>,
    pub head: PositiveClauseOf<E>,
}

pub type GroundRule = GroundRuleOf<Elem>;

impl<E: Ord + Clone> GroundRuleOf<E> {
    pub fn new(
        body: impl IntoIterator<Item = GroundAtomOf<E>>,
        head: impl IntoIterator<Item = GroundAtomOf<E>>,
    ) -> Self {
        GroundRuleOf {
            body: body.into_iter().collect(),
            head: PositiveClauseOf::new(head),
        }
    }
}

impl<E: Ord + fmt::Display> fmt::Display for GroundRuleOf<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.head.is_empty() {
            write!(f, "#false")?;
        } else {
            for (i, a) in self.head.iter().enumerate() {
                if i > 0 {
                    write!(f, " ; ")?;
                }
                write!(f, "{a}")?;
            }
        }
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        write!(f, ".")
    }
}

/// A rule split into its positive-intensional body part and the residue:
/// the body conjuncts in which no intensional predicate occurs positively
/// (negated literals, equalities, extensional atoms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSplit {
    pub source: Rule,
    pub positive_intensional: Vec<Atom>,
    pub residue: Vec<Literal>,
}

pub fn split_rule(rule: &Rule, p: &Program) -> RuleSplit {
    let mut positive = Vec::new();
    let mut residue = Vec::new();
    for lit in &rule.body {
        match &lit.atom {
            Atom::Pred(name, _) if !lit.negated && p.is_intensional(name) => {
                positive.push(lit.atom.clone());
            }
            _ => residue.push(lit.clone()),
        }
    }
    RuleSplit { source: rule.clone(), positive_intensional: positive, residue }
}

/// Ground an atom under an assignment, evaluating nested terms through
/// the structure's function tables.
fn ground_atom(s: &Structure, a: &BTreeMap<String, Elem>, atom: &Atom) -> Result<GroundAtom> {
    match atom {
        Atom::Pred(name, args) => {
            let vals = args
                .iter()
                .map(|t| s.eval_term(a, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(GroundAtom::new(name.clone(), vals))
        }
        Atom::Eq(..) => Err(Error::Eval("equality cannot be grounded as an atom".into())),
    }
}

/// The first-order GL-reduct of a program over a finite structure: every
/// rule instance whose residue holds, with the residue deleted and the
/// remaining atoms grounded. Duplicate ground rules are merged.
pub fn gl_reduct(p: &Program, s: &Structure) -> Result<BTreeSet<GroundRule>> {
    for (name, (kind, arity)) in p.vocabulary() {
        let found = match kind {
            crate::syntax::SymKind::Pred => s.pred_arity(name),
            crate::syntax::SymKind::Func => s.func_arity(name),
        };
        match found {
            Some(a) if a == *arity => {}
            Some(_) => {
                return Err(Error::Structure(format!(
                    "structure interprets `{name}` at the wrong arity"
                )))
            }
            None => {
                return Err(Error::Structure(format!(
                    "structure does not interpret `{name}`"
                )))
            }
        }
    }

    let mut out = BTreeSet::new();
    for rule in p.rules() {
        let split = split_rule(rule, p);
        let vars = rule.variables();
        for a in assignments(s, &vars) {
            let mut residue_holds = true;
            for lit in &split.residue {
                if !s.eval_literal(&a, lit)? {
                    residue_holds = false;
                    break;
                }
            }
            if !residue_holds {
                continue;
            }
            let body = split
                .positive_intensional
                .iter()
                .map(|atom| ground_atom(s, &a, atom))
                .collect::<Result<BTreeSet<_>>>()?;
            let head = rule
                .head
                .iter()
                .map(|atom| ground_atom(s, &a, atom))
                .collect::<Result<Vec<_>>>()?;
            out.insert(GroundRuleOf { body, head: PositiveClauseOf::new(head) });
        }
    }
    Ok(out)
}

/// The grounded atoms of the given predicates that are true in the
/// structure.
pub fn ins(s: &Structure, preds: &BTreeSet<String>) -> Result<Interpretation> {
    let mut out = BTreeSet::new();
    for pred in preds {
        let tuples = s
            .pred_tuples(pred)
            .ok_or_else(|| Error::Structure(format!("structure does not interpret `{pred}`")))?;
        for t in tuples {
            out.insert(GroundAtom::new(pred.clone(), t.clone()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Structure;
    use crate::syntax::parse_program;

    fn ga(pred: &str, args: &[Elem]) -> GroundAtom {
        GroundAtom::new(pred, args.to_vec())
    }

    #[test]
    fn split_negated_and_extensional_to_residue() {
        let p = parse_program("p :- q, not r. r. q.").unwrap();
        let split = split_rule(&p.rules()[0], &p);
        assert_eq!(split.positive_intensional, vec![Atom::prop("q")]);
        assert_eq!(split.residue, vec![Literal::neg(Atom::prop("r"))]);
    }

    #[test]
    fn split_extensional_atom() {
        let p = parse_program("p(X) :- e(X), p(X).").unwrap();
        let split = split_rule(&p.rules()[0], &p);
        assert_eq!(split.positive_intensional.len(), 1);
        assert_eq!(split.residue.len(), 1);
        assert!(matches!(&split.residue[0].atom, Atom::Pred(n, _) if n == "e"));
    }

    #[test]
    fn split_equality_is_residue() {
        let p = parse_program("p :- X = Y.").unwrap();
        let split = split_rule(&p.rules()[0], &p);
        assert!(split.positive_intensional.is_empty());
        assert_eq!(split.residue.len(), 1);
    }

    #[test]
    fn reduct_keeps_rule_when_residue_true() {
        let p = parse_program("p :- not q.").unwrap();
        let mut s = Structure::with_size(1).unwrap();
        s.set_pred("p", 0, BTreeSet::new()).unwrap();
        s.set_pred("q", 0, BTreeSet::new()).unwrap();
        let g = gl_reduct(&p, &s).unwrap();
        assert_eq!(g.len(), 1);
        let rule = g.iter().next().unwrap();
        assert!(rule.body.is_empty());
        assert_eq!(rule.head, PositiveClauseOf::new([ga("p", &[])]));
    }

    #[test]
    fn reduct_drops_rule_when_residue_false() {
        let p = parse_program("p :- not q.").unwrap();
        let mut s = Structure::with_size(1).unwrap();
        s.set_pred("p", 0, BTreeSet::new()).unwrap();
        s.set_pred("q", 0, BTreeSet::from([vec![]])).unwrap();
        let g = gl_reduct(&p, &s).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn reduct_instantiates_over_domain() {
        let p = parse_program("p(X) :- e(X), not q(X).").unwrap();
        let mut s = Structure::with_size(2).unwrap();
        s.set_pred("p", 1, BTreeSet::new()).unwrap();
        s.set_pred("e", 1, BTreeSet::from([vec![0], vec![1]])).unwrap();
        s.set_pred("q", 1, BTreeSet::from([vec![1]])).unwrap();
        let g = gl_reduct(&p, &s).unwrap();
        assert_eq!(g.len(), 1);
        let rule = g.iter().next().unwrap();
        assert!(rule.body.is_empty());
        assert_eq!(rule.head, PositiveClauseOf::new([ga("p", &[0])]));
    }

    #[test]
    fn reduct_atoms_are_intensional_only() {
        let p = parse_program("p(X) ; q(X) :- e(X), r(X), not t(X). r(X) :- e(X).").unwrap();
        let mut s = Structure::with_size(2).unwrap();
        for name in ["p", "q", "r", "e", "t"] {
            s.set_pred(name, 1, BTreeSet::from([vec![0]])).unwrap();
        }
        let g = gl_reduct(&p, &s).unwrap();
        for rule in &g {
            for atom in rule.body.iter().chain(rule.head.iter()) {
                assert!(p.is_intensional(&atom.pred), "{} leaked", atom.pred);
            }
        }
    }

    #[test]
    fn reduct_missing_symbol_errors() {
        let p = parse_program("p :- q.").unwrap();
        let mut s = Structure::with_size(1).unwrap();
        s.set_pred("p", 0, BTreeSet::new()).unwrap();
        assert!(gl_reduct(&p, &s).is_err());
    }

    #[test]
    fn reduct_size_bound() {
        // |reduct| <= sum over rules of |A|^#vars
        let p = parse_program("p(X, Y) :- e(X), e(Y). q(X) :- e(X), not p(X, X).").unwrap();
        let mut s = Structure::with_size(3).unwrap();
        s.set_pred("p", 2, BTreeSet::new()).unwrap();
        s.set_pred("q", 1, BTreeSet::new()).unwrap();
        s.set_pred("e", 1, BTreeSet::from([vec![0], vec![1], vec![2]]))
            .unwrap();
        let g = gl_reduct(&p, &s).unwrap();
        assert!(g.len() <= 9 + 3);
    }

    #[test]
    fn ins_reads_true_atoms() {
        let mut s = Structure::with_size(2).unwrap();
        s.set_pred("p", 1, BTreeSet::from([vec![0], vec![1]])).unwrap();
        s.set_pred("q", 1, BTreeSet::new()).unwrap();
        let preds: BTreeSet<String> = ["p", "q"].iter().map(|s| s.to_string()).collect();
        let i = ins(&s, &preds).unwrap();
        assert_eq!(i, BTreeSet::from([ga("p", &[0]), ga("p", &[1])]));
        let empty = ins(&s, &BTreeSet::from(["q".to_string()])).unwrap();
        assert!(empty.is_empty());
    }
}
