//! Grounded stable-model search.
//!
//! Brute-force expansion enumeration is exponential in the number of
//! ground atoms and falls over on the saturation-style programs the
//! transforms emit (a dozen auxiliary predicates already mean 2^30+
//! candidate expansions). This engine grounds the program over the base
//! structure once and searches assignments of the *negation signature*:
//! the ground atoms whose truth the GL-reduct actually depends on. For
//! every complete signature assignment the reduct is fixed; its minimal
//! models are recovered as least models of head selections and checked
//! for consistency with the signature.
//!
//! Results agree with [`super::enumerate_stable_expansions`] wherever the
//! latter is feasible; the cross-validation lives in the test suite.
//! Auxiliary symbols must be predicates (no function search).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ground::{split_rule, GroundAtom};
use crate::structure::{all_tuples, assignments, Structure};
use crate::syntax::{Atom, Program, SymKind, Symbol};

/// Upper bound on ground atoms tracked by the search.
const ATOM_CAP: usize = 4096;
/// Upper bound on head-selection combinations per signature leaf.
const SELECTION_CAP: usize = 1 << 20;

type AtomId = u32;

#[derive(Debug)]
struct SRule {
    /// Positive intensional body atoms (the reduct body).
    pos: Vec<AtomId>,
    /// Residue literals over searched atoms: (atom, required truth).
    res: Vec<(AtomId, bool)>,
    /// Head atoms (empty = falsity).
    head: Vec<AtomId>,
}

/// A program grounded for search over a base structure.
pub struct SearchProgram {
    program_vocab: Vec<(String, usize)>,
    aux: Vec<Symbol>,
    atoms: Vec<GroundAtom>,
    atom_index: BTreeMap<GroundAtom, AtomId>,
    rules: Vec<SRule>,
    /// Atoms in the negation signature (branching set).
    in_sig: Vec<bool>,
    /// Base-fixed truth for atoms of base-interpreted predicates.
    fixed: Vec<Option<bool>>,
    /// Atoms of auxiliary predicates that are not intensional: their
    /// interpretation is free and part of the signature.
    ext_aux: Vec<bool>,
    /// atom -> rules with the atom in the head (support index).
    occ_head: Vec<Vec<u32>>,
    /// Static branching order: signature atoms, most-constraining first.
    branch_order: Vec<AtomId>,
}

const UNKNOWN: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

/// Ground `p` over `base` for a search across expansions interpreting
/// the auxiliary predicates.
pub fn ground_for_search(p: &Program, base: &Structure, aux: &[Symbol]) -> Result<SearchProgram> {
    for sym in aux {
        if sym.kind == SymKind::Func {
            return Err(Error::Structure(format!(
                "search over auxiliary functions is not supported (`{}`)",
                sym.name
            )));
        }
        if base.has_symbol(&sym.name) {
            return Err(Error::Structure(format!(
                "auxiliary symbol `{}` already interpreted by the base",
                sym.name
            )));
        }
    }
    let aux_pred = |name: &str| aux.iter().find(|s| s.name == name);
    // every program symbol must be base-interpreted or auxiliary
    for (name, (kind, arity)) in p.vocabulary() {
        let ok = match kind {
            SymKind::Pred => base.pred_arity(name) == Some(*arity)
                || aux_pred(name).is_some_and(|s| s.arity == *arity),
            SymKind::Func => base.func_arity(name) == Some(*arity),
        };
        if !ok {
            return Err(Error::Structure(format!(
                "program symbol `{name}` neither interpreted by the base nor auxiliary"
            )));
        }
    }

    // Atom universe: all ground atoms of auxiliary predicates plus all
    // ground atoms of base-interpreted intensional predicates.
    let n = base.domain_size();
    let mut atoms = Vec::new();
    let mut atom_index = BTreeMap::new();
    let mut fixed = Vec::new();
    let mut ext_aux = Vec::new();
    {
        let mut add_pred = |name: &str, arity: usize, fix: bool, ext: bool| -> Result<()> {
            for t in all_tuples(n, arity) {
                let truth = if fix { Some(base.holds(name, &t)?) } else { None };
                let atom = GroundAtom::new(name, t);
                if atoms.len() >= ATOM_CAP {
                    return Err(Error::SizeGuard(format!(
                        "search universe exceeds {ATOM_CAP} ground atoms"
                    )));
                }
                atom_index.insert(atom.clone(), atoms.len() as AtomId);
                atoms.push(atom);
                fixed.push(truth);
                ext_aux.push(ext);
            }
            Ok(())
        };
        for sym in aux {
            add_pred(&sym.name, sym.arity, false, !p.is_intensional(&sym.name))?;
        }
        for pred in p.intensional() {
            if aux_pred(pred).is_none() {
                let arity = p.pred_arity(pred).expect("intensional predicates have arities");
                add_pred(pred, arity, true, false)?;
            }
        }
    }

    // Ground the rules. Literals over base-fixed extensional symbols are
    // evaluated away; the rest become searched atoms.
    let mut rule_set: BTreeSet<(Vec<AtomId>, Vec<(AtomId, bool)>, Vec<AtomId>)> = BTreeSet::new();
    for rule in p.rules() {
        let split = split_rule(rule, p);
        let vars = rule.variables();
        'instance: for a in assignments(base, &vars) {
            let mut res: Vec<(AtomId, bool)> = Vec::new();
            for lit in &split.residue {
                match &lit.atom {
                    Atom::Pred(name, args) if aux_pred(name).is_some() => {
                        let vals = args
                            .iter()
                            .map(|t| base.eval_term(&a, t))
                            .collect::<Result<Vec<_>>>()?;
                        let id = atom_index[&GroundAtom::new(name.clone(), vals)];
                        res.push((id, !lit.negated));
                    }
                    Atom::Pred(name, args) if p.is_intensional(name) && lit.negated => {
                        let vals = args
                            .iter()
                            .map(|t| base.eval_term(&a, t))
                            .collect::<Result<Vec<_>>>()?;
                        let id = atom_index[&GroundAtom::new(name.clone(), vals)];
                        res.push((id, false));
                    }
                    _ => {
                        // base-fixed extensional atom or equality
                        if !base.eval_literal(&a, lit)? {
                            continue 'instance;
                        }
                    }
                }
            }
            let mut pos = Vec::new();
            for atom in &split.positive_intensional {
                let Atom::Pred(name, args) = atom else { unreachable!() };
                let vals = args
                    .iter()
                    .map(|t| base.eval_term(&a, t))
                    .collect::<Result<Vec<_>>>()?;
                pos.push(atom_index[&GroundAtom::new(name.clone(), vals)]);
            }
            let mut head = Vec::new();
            for atom in &rule.head {
                let Atom::Pred(name, args) = atom else { unreachable!() };
                let vals = args
                    .iter()
                    .map(|t| base.eval_term(&a, t))
                    .collect::<Result<Vec<_>>>()?;
                head.push(atom_index[&GroundAtom::new(name.clone(), vals)]);
            }
            pos.sort_unstable();
            pos.dedup();
            res.sort_unstable();
            res.dedup();
            head.sort_unstable();
            head.dedup();
            // contradictory residue requirements: the instance never fires
            if res.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 != w[1].1) {
                continue;
            }
            rule_set.insert((pos, res, head));
        }
    }
    let rules: Vec<SRule> = rule_set
        .into_iter()
        .map(|(pos, res, head)| SRule { pos, res, head })
        .collect();

    // signature: residue atoms plus free extensional-auxiliary atoms
    let mut in_sig = vec![false; atoms.len()];
    for (id, &ext) in ext_aux.iter().enumerate() {
        if ext || fixed[id].is_some() {
            in_sig[id] = true;
        }
    }
    let mut res_occurrences = vec![0usize; atoms.len()];
    for r in &rules {
        for &(id, _) in &r.res {
            in_sig[id as usize] = true;
            res_occurrences[id as usize] += 1;
        }
    }

    let mut occ_head = vec![Vec::new(); atoms.len()];
    for (ri, r) in rules.iter().enumerate() {
        for &h in &r.head {
            occ_head[h as usize].push(ri as u32);
        }
    }

    let mut branch_order: Vec<AtomId> = (0..atoms.len() as AtomId)
        .filter(|&id| in_sig[id as usize] && fixed[id as usize].is_none())
        .collect();
    branch_order.sort_by_key(|&id| std::cmp::Reverse(res_occurrences[id as usize]));

    Ok(SearchProgram {
        program_vocab: p
            .intensional()
            .iter()
            .map(|n| (n.clone(), p.pred_arity(n).unwrap()))
            .collect(),
        aux: aux.to_vec(),
        atoms,
        atom_index,
        rules,
        in_sig,
        fixed,
        ext_aux,
        occ_head,
        branch_order,
    })
}

impl SearchProgram {
    /// All stable models over the search universe, as atom sets, up to
    /// `limit` results. Deterministic order (sorted at the end).
    fn stable_atom_sets(&self, limit: Option<usize>) -> Result<Vec<BTreeSet<AtomId>>> {
        let mut vals = vec![UNKNOWN; self.atoms.len()];
        for (id, f) in self.fixed.iter().enumerate() {
            if let Some(v) = f {
                vals[id] = if *v { TRUE } else { FALSE };
            }
        }
        let mut out = Vec::new();
        self.dfs(&mut vals, &mut out, limit)?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn dfs(
        &self,
        vals: &mut Vec<u8>,
        out: &mut Vec<BTreeSet<AtomId>>,
        limit: Option<usize>,
    ) -> Result<()> {
        if let Some(l) = limit {
            if out.len() >= l {
                return Ok(());
            }
        }
        if !self.propagate(vals) {
            return Ok(());
        }
        match self
            .branch_order
            .iter()
            .find(|&&id| vals[id as usize] == UNKNOWN)
        {
            None => self.leaf(vals, out),
            Some(&id) => {
                for v in [FALSE, TRUE] {
                    let mut next = vals.clone();
                    next[id as usize] = v;
                    self.dfs(&mut next, out, limit)?;
                    if let Some(l) = limit {
                        if out.len() >= l {
                            return Ok(());
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Three-valued propagation to a fixed point. Returns false on
    /// conflict. Sound for the set of stable models consistent with the
    /// current partial signature: forced atoms hold in all of them.
    fn propagate(&self, vals: &mut [u8]) -> bool {
        loop {
            let mut changed = false;
            for r in &self.rules {
                // residue status
                let mut res_false = false;
                let mut res_unknown = 0usize;
                for &(id, wanted) in &r.res {
                    let v = vals[id as usize];
                    if v == UNKNOWN {
                        res_unknown += 1;
                    } else if (v == TRUE) != wanted {
                        res_false = true;
                        break;
                    }
                }
                if res_false {
                    continue;
                }
                let pos_false = r.pos.iter().any(|&id| vals[id as usize] == FALSE);
                if pos_false {
                    continue;
                }
                if res_unknown > 0 {
                    continue;
                }
                let pos_all_true = r.pos.iter().all(|&id| vals[id as usize] == TRUE);
                if !pos_all_true {
                    continue;
                }
                // residue true, body true in every consistent candidate
                let mut sat = false;
                let mut open = None;
                let mut open_count = 0;
                for &h in &r.head {
                    let v = vals[h as usize];
                    if v == TRUE {
                        sat = true;
                        break;
                    } else if v == UNKNOWN {
                        open_count += 1;
                        open = Some(h);
                    }
                }
                if sat {
                    continue;
                }
                match (open_count, open) {
                    (0, _) => return false,
                    (1, Some(h)) => {
                        vals[h as usize] = TRUE;
                        changed = true;
                    }
                    _ => {}
                }
            }

            // unsupported atoms are false in every minimal model
            for id in 0..self.atoms.len() {
                if vals[id] != UNKNOWN || self.ext_aux[id] {
                    continue;
                }
                let supported = self.occ_head[id].iter().any(|&ri| {
                    let r = &self.rules[ri as usize];
                    let res_ok = r.res.iter().all(|&(a, wanted)| {
                        vals[a as usize] == UNKNOWN || (vals[a as usize] == TRUE) == wanted
                    });
                    res_ok && !r.pos.iter().any(|&a| vals[a as usize] == FALSE)
                });
                if !supported {
                    vals[id] = FALSE;
                    changed = true;
                }
            }

            if !changed {
                return true;
            }
        }
    }

    /// Complete signature: the reduct is fixed. Recover its minimal
    /// models as least models of head selections, filter for signature
    /// consistency, and record the survivors.
    fn leaf(&self, vals: &[u8], out: &mut Vec<BTreeSet<AtomId>>) -> Result<()> {
        let mut alive: Vec<u32> = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            let res_true = r
                .res
                .iter()
                .all(|&(a, wanted)| (vals[a as usize] == TRUE) == wanted);
            if !res_true {
                continue;
            }
            if r.pos.iter().any(|&a| vals[a as usize] == FALSE) {
                // cannot fire inside any candidate consistent with vals
                continue;
            }
            alive.push(ri as u32);
        }

        let disj: Vec<u32> = alive
            .iter()
            .copied()
            .filter(|&ri| self.rules[ri as usize].head.len() >= 2)
            .collect();
        let mut selections: usize = 1;
        for &ri in &disj {
            selections = selections.saturating_mul(self.rules[ri as usize].head.len());
            if selections > SELECTION_CAP {
                return Err(Error::SizeGuard(format!(
                    "head-selection space exceeds {SELECTION_CAP}"
                )));
            }
        }

        // all least models of selections that are models of the reduct
        let mut models: BTreeSet<BTreeSet<AtomId>> = BTreeSet::new();
        let mut pick = vec![0usize; disj.len()];
        loop {
            if let Some(m) = self.closure(&alive, &disj, &pick) {
                models.insert(m);
            }
            let mut i = disj.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < self.rules[disj[i] as usize].head.len() {
                    break;
                }
                pick[i] = 0;
            }
            if pick.iter().all(|&x| x == 0) {
                break;
            }
        }

        // minimal models consistent with the signature are stable
        for m in &models {
            let minimal = !models.iter().any(|c| c != m && c.is_subset(m));
            if !minimal {
                continue;
            }
            let consistent = (0..self.atoms.len()).all(|id| {
                if !self.in_sig[id] || self.ext_aux[id] {
                    return true;
                }
                (vals[id] == TRUE) == m.contains(&(id as AtomId))
            });
            if !consistent {
                continue;
            }
            // assemble the full atom set: derived atoms plus the free
            // extensional-auxiliary part of the signature
            let mut full = m.clone();
            for id in 0..self.atoms.len() {
                if self.ext_aux[id] && vals[id] == TRUE {
                    full.insert(id as AtomId);
                }
            }
            out.push(full);
        }
        Ok(())
    }

    /// Least model of the Horn program obtained by resolving each
    /// disjunctive rule to its selected head atom. Returns None when an
    /// empty-head rule fires (no model on this selection).
    fn closure(&self, alive: &[u32], disj: &[u32], pick: &[usize]) -> Option<BTreeSet<AtomId>> {
        let mut truth = vec![false; self.atoms.len()];
        let mut remaining: Vec<usize> = alive
            .iter()
            .map(|&ri| self.rules[ri as usize].pos.len())
            .collect();
        let selected: BTreeMap<u32, AtomId> = disj
            .iter()
            .zip(pick)
            .map(|(&ri, &p)| (ri, self.rules[ri as usize].head[p]))
            .collect();

        // occurrence index local to the alive set
        let mut occ: BTreeMap<AtomId, Vec<usize>> = BTreeMap::new();
        for (k, &ri) in alive.iter().enumerate() {
            for &a in &self.rules[ri as usize].pos {
                occ.entry(a).or_default().push(k);
            }
        }

        let mut queue: Vec<AtomId> = Vec::new();
        let mut fire = |k: usize,
                        truth: &mut Vec<bool>,
                        queue: &mut Vec<AtomId>|
         -> bool {
            let ri = alive[k];
            let r = &self.rules[ri as usize];
            let derived = match r.head.len() {
                0 => return false,
                1 => r.head[0],
                _ => selected[&ri],
            };
            if !truth[derived as usize] {
                truth[derived as usize] = true;
                queue.push(derived);
            }
            true
        };
        for (k, &rem) in remaining.iter().enumerate() {
            if rem == 0 && !fire(k, &mut truth, &mut queue) {
                return None;
            }
        }
        while let Some(a) = queue.pop() {
            if let Some(rules) = occ.get(&a) {
                for &k in rules {
                    // a rule's pos list is deduplicated, so each atom
                    // decrements it once
                    remaining[k] -= 1;
                    if remaining[k] == 0 && !fire(k, &mut truth, &mut queue) {
                        return None;
                    }
                }
            }
        }
        Some(
            truth
                .iter()
                .enumerate()
                .filter(|(_, &t)| t)
                .map(|(id, _)| id as AtomId)
                .collect(),
        )
    }

    /// Assemble a structure from a stable atom set.
    fn to_structure(&self, base: &Structure, m: &BTreeSet<AtomId>) -> Structure {
        let mut s = base.clone();
        for sym in &self.aux {
            let tuples: BTreeSet<Vec<usize>> = m
                .iter()
                .map(|&id| &self.atoms[id as usize])
                .filter(|a| a.pred == sym.name)
                .map(|a| a.args.clone())
                .collect();
            s.set_pred(&sym.name, sym.arity, tuples)
                .expect("search atoms lie in the base domain");
        }
        s
    }
}

/// The stable expansions of `base` over the auxiliary predicates, by
/// grounded search. Agrees with brute-force enumeration.
pub fn search_stable_expansions(
    base: &Structure,
    p: &Program,
    aux: &[Symbol],
) -> Result<Vec<Structure>> {
    let sp = ground_for_search(p, base, aux)?;
    let sets = sp.stable_atom_sets(None)?;
    let mut out: Vec<Structure> = sets.iter().map(|m| sp.to_structure(base, m)).collect();
    out.sort_by_key(|s| s.save());
    out.dedup();
    Ok(out)
}

/// Existence check with early exit.
pub fn has_stable_expansion(base: &Structure, p: &Program, aux: &[Symbol]) -> Result<bool> {
    let sp = ground_for_search(p, base, aux)?;
    Ok(!sp.stable_atom_sets(Some(1))?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::enumerate_stable_expansions;
    use crate::syntax::parse_program;

    fn aux_syms(p: &Program) -> Vec<Symbol> {
        p.vocabulary()
            .iter()
            .filter(|(_, (k, _))| *k == SymKind::Pred)
            .map(|(n, (_, a))| Symbol::pred(n.clone(), *a))
            .collect()
    }

    fn compare_engines(text: &str, domain: usize) {
        let p = parse_program(text).unwrap();
        let base = Structure::with_size(domain).unwrap();
        let aux = aux_syms(&p);
        let brute = enumerate_stable_expansions(&base, &p, &aux, 1 << 24).unwrap();
        let mut brute_sorted: Vec<String> = brute.iter().map(|s| s.save()).collect();
        brute_sorted.sort();
        let searched = search_stable_expansions(&base, &p, &aux).unwrap();
        let searched_sorted: Vec<String> = searched.iter().map(|s| s.save()).collect();
        assert_eq!(brute_sorted, searched_sorted, "engines disagree on {text}");
    }

    #[test]
    fn matches_brute_force_on_basics() {
        compare_engines("p ; q.", 1);
        compare_engines("p :- not q. q :- not p.", 1);
        compare_engines("p :- not p.", 1);
        compare_engines("p(X) ; q(X) :- e(X). e(X) :- not f(X). f(X) :- not e(X).", 2);
        compare_engines("p. q :- p. r ; s :- q.", 1);
        compare_engines("#false :- not p. p ; q.", 1);
        compare_engines("p(X, Y) :- e(X), e(Y), not q(X). e(X) :- not d(X). d(X) :- not e(X). q(X) ; r(X) :- e(X).", 2);
    }

    #[test]
    fn guess_pair_yields_all_subsets() {
        let p = parse_program("s(X) :- not t(X). t(X) :- not s(X).").unwrap();
        let base = Structure::with_size(2).unwrap();
        let found = search_stable_expansions(&base, &p, &aux_syms(&p)).unwrap();
        assert_eq!(found.len(), 4);
    }

    #[test]
    fn odd_loop_forces_support() {
        // ok(x) must hold and must be derivable through e
        let p = parse_program("ok(X) :- e(X, Y). ok(X) :- not ok(X). e(X, Y) :- not ne(X, Y). ne(X, Y) :- not e(X, Y).").unwrap();
        let base = Structure::with_size(2).unwrap();
        let found = search_stable_expansions(&base, &p, &aux_syms(&p)).unwrap();
        // e must be left-total: of the 16 subsets of a 2x2 relation,
        // exactly 9 have both rows nonempty
        assert_eq!(found.len(), 9);
        let brute =
            enumerate_stable_expansions(&base, &p, &aux_syms(&p), 1 << 24).unwrap();
        assert_eq!(brute.len(), 9);
    }

    #[test]
    fn base_fixed_intensional_atoms_respected() {
        let p = parse_program("p :- q. q.").unwrap();
        let mut base_ok = Structure::with_size(1).unwrap();
        base_ok.set_pred("p", 0, std::collections::BTreeSet::from([vec![]])).unwrap();
        let aux = [Symbol::pred("q", 0)];
        let found = search_stable_expansions(&base_ok, &p, &aux).unwrap();
        assert_eq!(found.len(), 1);

        let base_bad = {
            let mut s = Structure::with_size(1).unwrap();
            s.set_pred("p", 0, std::collections::BTreeSet::new()).unwrap();
            s
        };
        let found = search_stable_expansions(&base_bad, &p, &aux).unwrap();
        assert!(found.is_empty());
    }

    #[test]
    fn rejects_function_aux() {
        let p = parse_program("p(c).").unwrap();
        let base = Structure::with_size(1).unwrap();
        let aux = [Symbol::pred("p", 1), Symbol::func("c", 0)];
        assert!(ground_for_search(&p, &base, &aux).is_err());
    }
}
