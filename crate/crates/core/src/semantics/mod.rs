//! Two independent stable-model engines: minimal model of the GL-reduct,
//! and the progression fixed point. Either one decides stability of a
//! finite structure; their agreement is the workbench's keystone
//! cross-check. Expansion enumeration answers `exists tau SM(Pi)`
//! queries by brute force; [`search`] provides a grounded search engine
//! for candidate spaces the brute-force path cannot touch.

pub mod search;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ground::{
    gl_reduct, ins, GroundRuleOf, Interpretation, InterpretationOf, PositiveClause,
    PositiveClauseOf,
};
use crate::structure::{enumerate_expansions, Structure};
use crate::syntax::{classify, Program, Symbol};

/// A set of grounded positive clauses.
pub type ClauseSetOf<E> = BTreeSet<PositiveClauseOf<E>>;
pub type ClauseSet = ClauseSetOf<crate::structure::Elem>;

/// Cap on the atom count of interpretations fed to the complete
/// minimality search.
pub const MINIMALITY_ATOM_CAP: usize = 64;

/// Verdict of a stability check, with a self-checking witness on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableReport {
    pub stable: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A proper subset of the candidate that still models the target.
    SmallerModel(Interpretation),
    /// A ground rule whose body holds but whose head misses the candidate.
    FalsifiedRule(crate::ground::GroundRule),
    /// A clause of the progression fixed point missed by the candidate.
    FalsifiedClause(PositiveClause),
}

impl StableReport {
    fn stable() -> StableReport {
        StableReport { stable: true, witness: None }
    }
}

/// Is the interpretation a model of the plain ground rules: every rule
/// whose body lies inside the interpretation has a head atom in it
/// (an empty head can never be satisfied that way).
pub fn is_model_rules<E: Ord + Clone>(
    i: &InterpretationOf<E>,
    g: &BTreeSet<GroundRuleOf<E>>,
) -> bool {
    g.iter()
        .all(|r| !r.body.is_subset(i) || r.head.intersects(i))
}

/// Is the interpretation a model of the clause set: every clause is hit.
pub fn is_model_clauses<E: Ord + Clone>(i: &InterpretationOf<E>, sigma: &ClauseSetOf<E>) -> bool {
    sigma.iter().all(|c| c.intersects(i))
}

/// Remove clauses that are proper supersets of another clause. Model
/// status is invariant under this pass; the progression stages are kept
/// raw and this is only for `is_model` queries.
pub fn subsume_clauses<E: Ord + Clone>(sigma: &ClauseSetOf<E>) -> ClauseSetOf<E> {
    sigma
        .iter()
        .filter(|c| !sigma.iter().any(|d| d != *c && d.is_subset(c)))
        .cloned()
        .collect()
}

/// Search for a proper submodel of `i` over the ground rules. Single-atom
/// deletions are tried first; a complete propositional search over the
/// subset lattice follows, bounded to [`MINIMALITY_ATOM_CAP`] atoms.
fn proper_submodel_rules<E: Ord + Clone>(
    i: &InterpretationOf<E>,
    g: &BTreeSet<GroundRuleOf<E>>,
) -> Result<Option<InterpretationOf<E>>> {
    for a in i {
        let mut smaller = i.clone();
        smaller.remove(a);
        if is_model_rules(&smaller, g) {
            return Ok(Some(smaller));
        }
    }
    if i.len() <= 1 {
        return Ok(None);
    }
    if i.len() > MINIMALITY_ATOM_CAP {
        return Err(Error::SizeGuard(format!(
            "minimality search over {} atoms exceeds the cap of {MINIMALITY_ATOM_CAP}",
            i.len()
        )));
    }

    // Encode "X is a model of g, X a proper subset of i" as a SAT
    // instance over the atoms of i and run a small DPLL.
    let atoms: Vec<&crate::ground::GroundAtomOf<E>> = i.iter().collect();
    let index = |a: &crate::ground::GroundAtomOf<E>| atoms.iter().position(|b| *b == a);
    let mut clauses: Vec<SatClause> = Vec::new();
    for rule in g {
        // bodies not inside i can never fire within a subset of i
        if !rule.body.is_subset(i) {
            continue;
        }
        let neg: Vec<usize> = rule.body.iter().map(|b| index(b).unwrap()).collect();
        let pos: Vec<usize> = rule.head.iter().filter_map(|h| index(h)).collect();
        clauses.push(SatClause { pos, neg });
    }
    clauses.push(SatClause {
        pos: Vec::new(),
        neg: (0..atoms.len()).collect(),
    });

    Ok(sat_solve(atoms.len(), &clauses).map(|assignment| {
        assignment
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(idx, _)| atoms[idx].clone())
            .collect()
    }))
}

/// Clause over subset-membership variables: `pos` disjuncts or negated
/// `neg` disjuncts.
struct SatClause {
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Plain DPLL with unit propagation; returns a satisfying assignment.
/// The instances here have at most [`MINIMALITY_ATOM_CAP`] variables.
fn sat_solve(nvars: usize, clauses: &[SatClause]) -> Option<Vec<bool>> {
    #[derive(Clone, Copy, PartialEq)]
    enum V {
        True,
        False,
        Open,
    }
    fn solve(vals: &mut Vec<V>, clauses: &[SatClause]) -> bool {
        // unit propagation to a fixed point
        loop {
            let mut changed = false;
            for c in clauses {
                let mut unassigned: Option<(usize, bool)> = None;
                let mut satisfied = false;
                let mut open = 0;
                for &p in &c.pos {
                    match vals[p] {
                        V::True => satisfied = true,
                        V::Open => {
                            open += 1;
                            unassigned = Some((p, true));
                        }
                        V::False => {}
                    }
                }
                for &n in &c.neg {
                    match vals[n] {
                        V::False => satisfied = true,
                        V::Open => {
                            open += 1;
                            unassigned = Some((n, false));
                        }
                        V::True => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    0 => return false,
                    1 => {
                        let (var, val) = unassigned.unwrap();
                        vals[var] = if val { V::True } else { V::False };
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        match vals.iter().position(|v| *v == V::Open) {
            None => true,
            Some(var) => {
                // prefer false: smaller subsets hit the properness clause sooner
                for choice in [V::False, V::True] {
                    let mut next = vals.clone();
                    next[var] = choice;
                    if solve(&mut next, clauses) {
                        *vals = next;
                        return true;
                    }
                }
                false
            }
        }
    }
    let mut vals = vec![V::Open; nvars];
    if solve(&mut vals, clauses) {
        Some(vals.iter().map(|v| matches!(v, V::True)).collect())
    } else {
        None
    }
}

/// Minimality of a model over ground rules.
pub fn is_minimal_model_rules<E: Ord + Clone>(
    i: &InterpretationOf<E>,
    g: &BTreeSet<GroundRuleOf<E>>,
) -> Result<bool> {
    Ok(is_model_rules(i, g) && proper_submodel_rules(i, g)?.is_none())
}

/// Minimality of a model over a clause set. Hitting sets are upward
/// closed within the candidate, so single-atom deletions are a complete
/// search here: if some proper subset hits every clause then so does the
/// candidate minus one atom.
pub fn is_minimal_model_clauses<E: Ord + Clone>(
    i: &InterpretationOf<E>,
    sigma: &ClauseSetOf<E>,
) -> bool {
    if !is_model_clauses(i, sigma) {
        return false;
    }
    proper_submodel_clauses(i, sigma).is_none()
}

fn proper_submodel_clauses<E: Ord + Clone>(
    i: &InterpretationOf<E>,
    sigma: &ClauseSetOf<E>,
) -> Option<InterpretationOf<E>> {
    for a in i {
        let mut smaller = i.clone();
        smaller.remove(a);
        if is_model_clauses(&smaller, sigma) {
            return Some(smaller);
        }
    }
    None
}

/// Stability via Proposition 1: the candidate is the intensional part of
/// the structure and must be a minimal model of the GL-reduct. Structures
/// interpreting more than the program's vocabulary are restricted first.
pub fn is_stable_reduct(s: &Structure, p: &Program) -> Result<StableReport> {
    let restricted = restrict_to_program(s, p);
    let i = ins(&restricted, p.intensional())?;
    let g = gl_reduct(p, &restricted)?;
    if let Some(rule) = g
        .iter()
        .find(|r| r.body.is_subset(&i) && !r.head.intersects(&i))
    {
        return Ok(StableReport {
            stable: false,
            witness: Some(Witness::FalsifiedRule(rule.clone())),
        });
    }
    match proper_submodel_rules(&i, &g)? {
        Some(smaller) => Ok(StableReport {
            stable: false,
            witness: Some(Witness::SmallerModel(smaller)),
        }),
        None => Ok(StableReport::stable()),
    }
}

fn restrict_to_program(s: &Structure, p: &Program) -> Structure {
    let names: BTreeSet<String> = p.vocabulary().keys().cloned().collect();
    s.restrict(&names)
}

/// One progression step: from side clauses in `sigma`, each rule
/// `p1 & .. & pk -> H` derives `H | C1 | .. | Ck` where `Ci | pi` is a
/// clause of `sigma` (and `Ci` drops every occurrence of `pi`).
pub fn gamma_step<E: Ord + Clone>(
    g: &BTreeSet<GroundRuleOf<E>>,
    sigma: &ClauseSetOf<E>,
) -> ClauseSetOf<E> {
    let mut out = ClauseSetOf::new();
    for rule in g {
        let body: Vec<_> = rule.body.iter().collect();
        // candidate side clauses per body atom
        let mut candidates: Vec<Vec<&PositiveClauseOf<E>>> = Vec::with_capacity(body.len());
        let mut feasible = true;
        for b in &body {
            let cands: Vec<&PositiveClauseOf<E>> =
                sigma.iter().filter(|c| c.contains(b)).collect();
            if cands.is_empty() {
                feasible = false;
                break;
            }
            candidates.push(cands);
        }
        if !feasible {
            continue;
        }
        let mut pick = vec![0usize; body.len()];
        loop {
            let mut derived = rule.head.clone();
            for (idx, b) in body.iter().enumerate() {
                derived = derived.union(&candidates[idx][pick[idx]].without(b));
            }
            out.insert(derived);
            // advance the product counter
            let mut i = body.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < candidates[i].len() {
                    break;
                }
                pick[i] = 0;
            }
            if pick.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    out
}

/// A progression run: cumulative stages of the monotone operator.
#[derive(Debug, Clone)]
pub struct ProgressionRun<E: Ord> {
    /// `stages[n]` is the cumulative stage `n`; stage 0 is empty.
    pub stages: Vec<ClauseSetOf<E>>,
    /// Whether the last retained stage is the fixed point.
    pub converged: bool,
}

impl<E: Ord + Clone> ProgressionRun<E> {
    pub fn fixpoint(&self) -> &ClauseSetOf<E> {
        self.stages.last().expect("stage 0 always present")
    }
}

/// Iterate the stage operator over plain ground rules until the fixed
/// point, or until `max_stages` cumulative stages have been produced.
pub fn progression<E: Ord + Clone>(
    g: &BTreeSet<GroundRuleOf<E>>,
    max_stages: Option<usize>,
) -> ProgressionRun<E> {
    let mut stages = vec![ClauseSetOf::new()];
    loop {
        if let Some(max) = max_stages {
            if stages.len() > max {
                // stages[max] exists; convergence unknown beyond it
                let converged = stages.len() >= 2
                    && stages[stages.len() - 1] == stages[stages.len() - 2];
                return ProgressionRun { stages, converged };
            }
        }
        let current = stages.last().unwrap();
        let mut next = current.clone();
        next.extend(gamma_step(g, current));
        if next == *current {
            return ProgressionRun { stages, converged: true };
        }
        stages.push(next);
    }
}

/// The progression fixed point of a program over a finite structure.
pub fn gamma_omega(p: &Program, s: &Structure) -> Result<ProgressionRun<crate::structure::Elem>> {
    let restricted = restrict_to_program(s, p);
    let g = gl_reduct(p, &restricted)?;
    Ok(progression(&g, None))
}

/// Stability via Proposition 2: the candidate must be a minimal model of
/// the progression fixed point. For normal programs the fixed point holds
/// only unit and empty clauses and stability collapses to set equality
/// with the candidate; both criteria are computed and must agree.
pub fn is_stable_progression(s: &Structure, p: &Program) -> Result<StableReport> {
    let restricted = restrict_to_program(s, p);
    let i = ins(&restricted, p.intensional())?;
    let run = gamma_omega(p, &restricted)?;
    let fp = run.fixpoint();

    let report = if let Some(clause) = fp.iter().find(|c| !c.intersects(&i)) {
        StableReport {
            stable: false,
            witness: Some(Witness::FalsifiedClause(clause.clone())),
        }
    } else {
        match proper_submodel_clauses(&i, fp) {
            Some(smaller) => StableReport {
                stable: false,
                witness: Some(Witness::SmallerModel(smaller)),
            },
            None => StableReport::stable(),
        }
    };

    if classify(p).normal {
        let all_units = fp.iter().all(|c| c.len() == 1);
        let units: Interpretation = fp
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c.iter().next().unwrap().clone())
            .collect();
        let by_equality = all_units && units == i;
        assert_eq!(
            report.stable, by_equality,
            "minimality and fixed-point-equality criteria disagree on a normal program"
        );
    }
    Ok(report)
}

/// The expansions of `base` over `aux` that are stable models of the
/// program: the finite-structure models of `exists aux SM(p)`. Brute
/// force behind the enumeration cap; deterministic order.
pub fn enumerate_stable_expansions(
    base: &Structure,
    p: &Program,
    aux: &[Symbol],
    cap: u128,
) -> Result<Vec<Structure>> {
    for (name, (kind, arity)) in p.vocabulary() {
        let in_base = match kind {
            crate::syntax::SymKind::Pred => base.pred_arity(name) == Some(*arity),
            crate::syntax::SymKind::Func => base.func_arity(name) == Some(*arity),
        };
        let in_aux =
            aux.iter().any(|s| s.name == *name && s.kind == *kind && s.arity == *arity);
        if !in_base && !in_aux {
            return Err(Error::Structure(format!(
                "program symbol `{name}` neither interpreted by the base nor auxiliary"
            )));
        }
    }
    let mut out = Vec::new();
    for e in enumerate_expansions(base, aux, cap)? {
        if is_stable_reduct(&e, p)?.stable {
            out.push(e);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::GroundAtom;
    use crate::syntax::parse_program;

    fn ga(pred: &str) -> GroundAtom {
        GroundAtom::new(pred, Vec::new())
    }

    fn clause(atoms: &[&str]) -> PositiveClause {
        PositiveClause::new(atoms.iter().map(|a| ga(a)))
    }

    fn rule(body: &[&str], head: &[&str]) -> crate::ground::GroundRule {
        crate::ground::GroundRuleOf::new(
            body.iter().map(|a| ga(a)),
            head.iter().map(|a| ga(a)),
        )
    }

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| ga(a)).collect()
    }

    fn prop_structure(true_atoms: &[&str], all: &[&str]) -> Structure {
        let mut s = Structure::with_size(1).unwrap();
        for name in all {
            let tuples = if true_atoms.contains(name) {
                BTreeSet::from([vec![]])
            } else {
                BTreeSet::new()
            };
            s.set_pred(name, 0, tuples).unwrap();
        }
        s
    }

    #[test]
    fn empty_model_of_empty_rules() {
        assert!(is_model_rules(&interp(&[]), &BTreeSet::new()));
    }

    #[test]
    fn single_clause_models() {
        let g = BTreeSet::from([rule(&[], &["p", "q"])]);
        assert!(is_model_rules(&interp(&["p"]), &g));
        assert!(!is_model_rules(&interp(&[]), &g));
    }

    #[test]
    fn chained_rules_model() {
        let g = BTreeSet::from([rule(&[], &["p", "q"]), rule(&["p"], &["r"])]);
        assert!(is_model_rules(&interp(&["p", "r"]), &g));
        assert!(!is_model_rules(&interp(&["p"]), &g));
    }

    #[test]
    fn minimal_model_checks() {
        let g1 = BTreeSet::from([rule(&[], &["p", "q"])]);
        assert!(is_minimal_model_rules(&interp(&["p"]), &g1).unwrap());
        assert!(!is_minimal_model_rules(&interp(&["p", "q"]), &g1).unwrap());

        let g2 = BTreeSet::from([
            rule(&[], &["p", "q"]),
            rule(&["p"], &["q"]),
            rule(&["q"], &["p"]),
        ]);
        assert!(is_minimal_model_rules(&interp(&["p", "q"]), &g2).unwrap());
    }

    #[test]
    fn minimality_needs_more_than_single_deletions() {
        // {a,b,c} passes every single deletion but {a} is a model
        let g = BTreeSet::from([
            rule(&[], &["a", "b"]),
            rule(&["b"], &["c"]),
            rule(&["c"], &["a"]),
            rule(&["a", "c"], &["b"]),
        ]);
        let m = interp(&["a", "b", "c"]);
        assert!(is_model_rules(&m, &g));
        for x in ["a", "b", "c"] {
            let mut smaller = m.clone();
            smaller.remove(&ga(x));
            assert!(!is_model_rules(&smaller, &g), "dropping {x} should break");
        }
        assert!(!is_minimal_model_rules(&m, &g).unwrap());
    }

    #[test]
    fn gamma_step_cases() {
        // k = 0 rule contributes its head
        let g = BTreeSet::from([rule(&[], &["p", "q"])]);
        let step = gamma_step(&g, &ClauseSet::new());
        assert_eq!(step, BTreeSet::from([clause(&["p", "q"])]));

        // side clause {p,q} through p -> r gives {r,q}
        let g = BTreeSet::from([rule(&["p"], &["r"])]);
        let sigma = BTreeSet::from([clause(&["p", "q"])]);
        assert_eq!(gamma_step(&g, &sigma), BTreeSet::from([clause(&["r", "q"])]));

        // empty side remainder
        let sigma = BTreeSet::from([clause(&["p"])]);
        assert_eq!(gamma_step(&g, &sigma), BTreeSet::from([clause(&["r"])]));
    }

    #[test]
    fn progression_stages() {
        let g = BTreeSet::from([rule(&[], &["p", "q"]), rule(&["p"], &["r"])]);
        let run = progression(&g, None);
        assert!(run.converged);
        assert_eq!(run.stages[1], BTreeSet::from([clause(&["p", "q"])]));
        assert_eq!(
            *run.fixpoint(),
            BTreeSet::from([clause(&["p", "q"]), clause(&["r", "q"])])
        );
        // monotone stages
        for w in run.stages.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
        // fixed point is closed under the step
        assert!(gamma_step(&g, run.fixpoint()).is_subset(run.fixpoint()));
    }

    #[test]
    fn unfounded_loop_derives_nothing() {
        let p = parse_program("p :- p.").unwrap();
        let s = prop_structure(&[], &["p"]);
        let run = gamma_omega(&p, &s).unwrap();
        assert!(run.fixpoint().is_empty());
    }

    #[test]
    fn stable_fact() {
        let p = parse_program("p.").unwrap();
        let s = prop_structure(&["p"], &["p"]);
        assert!(is_stable_reduct(&s, &p).unwrap().stable);
        assert!(is_stable_progression(&s, &p).unwrap().stable);
    }

    #[test]
    fn odd_loop_has_no_stable_model() {
        let p = parse_program("p :- not p.").unwrap();
        for truth in [&[][..], &["p"][..]] {
            let s = prop_structure(truth, &["p"]);
            assert!(!is_stable_reduct(&s, &p).unwrap().stable);
            assert!(!is_stable_progression(&s, &p).unwrap().stable);
        }
    }

    #[test]
    fn disjunctive_fact_stability() {
        let p = parse_program("p ; q.").unwrap();
        let cases = [
            (&["p"][..], true),
            (&["q"][..], true),
            (&["p", "q"][..], false),
            (&[][..], false),
        ];
        for (truth, expected) in cases {
            let s = prop_structure(truth, &["p", "q"]);
            assert_eq!(is_stable_reduct(&s, &p).unwrap().stable, expected);
            assert_eq!(is_stable_progression(&s, &p).unwrap().stable, expected);
        }
    }

    #[test]
    fn self_support_not_stable_by_progression() {
        let p = parse_program("p :- p.").unwrap();
        let s = prop_structure(&["p"], &["p"]);
        let r = is_stable_progression(&s, &p).unwrap();
        assert!(!r.stable);
        assert!(matches!(r.witness, Some(Witness::SmallerModel(ref m)) if m.is_empty()));
    }

    #[test]
    fn witnesses_recheck() {
        let p = parse_program("p ; q.").unwrap();
        let s = prop_structure(&["p", "q"], &["p", "q"]);
        let r = is_stable_reduct(&s, &p).unwrap();
        match r.witness {
            Some(Witness::SmallerModel(m)) => {
                let g = gl_reduct(&p, &s).unwrap();
                assert!(is_model_rules(&m, &g));
                assert!(m.len() < 2);
            }
            other => panic!("expected a smaller-model witness, got {other:?}"),
        }
    }

    #[test]
    fn subsumption_preserves_model_status() {
        let sigma = BTreeSet::from([clause(&["p"]), clause(&["p", "q"]), clause(&["r", "q"])]);
        let reduced = subsume_clauses(&sigma);
        assert_eq!(reduced.len(), 2);
        for i in [interp(&[]), interp(&["p"]), interp(&["p", "q"]), interp(&["p", "r"])] {
            assert_eq!(is_model_clauses(&i, &sigma), is_model_clauses(&i, &reduced));
        }
    }

    #[test]
    fn enumerate_stable_expansions_examples() {
        // q must be true: base with q false yields nothing
        let p = parse_program("q.").unwrap();
        let base = prop_structure(&[], &["q"]);
        let found = enumerate_stable_expansions(&base, &p, &[], 1 << 20).unwrap();
        assert!(found.is_empty());

        // p ; q over one element: exactly two stable expansions
        let p = parse_program("p ; q.").unwrap();
        let base = Structure::with_size(1).unwrap();
        let aux = [Symbol::pred("p", 0), Symbol::pred("q", 0)];
        let found = enumerate_stable_expansions(&base, &p, &aux, 1 << 20).unwrap();
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn missing_symbol_reported() {
        let p = parse_program("p :- q.").unwrap();
        let base = Structure::with_size(1).unwrap();
        let aux = [Symbol::pred("p", 0)];
        assert!(enumerate_stable_expansions(&base, &p, &aux, 1 << 20).is_err());
    }
}
