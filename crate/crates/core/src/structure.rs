//! Finite first-order structures with explicit interpretation tables,
//! assignment and expansion enumeration, Tarskian evaluation, and the
//! finitely-supported natural-number base used by the encoding simulation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::syntax::{Atom, Literal, SymKind, Symbol, Term};

/// Default cap on the number of expansions an enumeration may produce.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 24;

/// A domain element name as it appears in structure files: an integer or
/// a string. Integers order before strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElemName {
    Int(i64),
    Str(String),
}

impl fmt::Display for ElemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElemName::Int(n) => write!(f, "{n}"),
            ElemName::Str(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for ElemName {
    fn from(n: i64) -> Self {
        ElemName::Int(n)
    }
}

impl From<&str> for ElemName {
    fn from(s: &str) -> Self {
        ElemName::Str(s.to_string())
    }
}

/// Index of a domain element within its structure.
pub type Elem = usize;

/// An assignment of individual variables to domain elements.
pub type Assignment = BTreeMap<String, Elem>;

#[derive(Debug, Clone, PartialEq, Eq)]
struct PredInterp {
    arity: usize,
    tuples: BTreeSet<Vec<Elem>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FuncInterp {
    arity: usize,
    table: BTreeMap<Vec<Elem>, Elem>,
}

/// A finite structure: a nonempty domain plus interpretation tables for
/// predicates and (total) functions. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    elems: Vec<ElemName>,
    preds: BTreeMap<String, PredInterp>,
    funcs: BTreeMap<String, FuncInterp>,
}

impl Structure {
    pub fn new(domain: Vec<ElemName>) -> Result<Structure> {
        if domain.is_empty() {
            return Err(Error::Structure("domain must be nonempty".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &domain {
            if !seen.insert(e.clone()) {
                return Err(Error::Structure(format!("duplicate domain element `{e}`")));
            }
        }
        Ok(Structure { elems: domain, preds: BTreeMap::new(), funcs: BTreeMap::new() })
    }

    /// A fresh domain `{0, 1, .., n-1}`.
    pub fn with_size(n: usize) -> Result<Structure> {
        Structure::new((0..n as i64).map(ElemName::Int).collect())
    }

    pub fn domain_size(&self) -> usize {
        self.elems.len()
    }

    pub fn elem_name(&self, e: Elem) -> &ElemName {
        &self.elems[e]
    }

    pub fn elem_index(&self, name: &ElemName) -> Option<Elem> {
        self.elems.iter().position(|e| e == name)
    }

    pub fn set_pred(&mut self, name: &str, arity: usize, tuples: BTreeSet<Vec<Elem>>) -> Result<()> {
        for t in &tuples {
            if t.len() != arity {
                return Err(Error::Structure(format!(
                    "tuple arity mismatch for predicate `{name}`"
                )));
            }
            if t.iter().any(|&e| e >= self.elems.len()) {
                return Err(Error::Structure(format!(
                    "tuple element outside domain in predicate `{name}`"
                )));
            }
        }
        self.preds.insert(name.to_string(), PredInterp { arity, tuples });
        Ok(())
    }

    pub fn set_func(&mut self, name: &str, arity: usize, table: BTreeMap<Vec<Elem>, Elem>) -> Result<()> {
        let expected = self.elems.len().pow(arity as u32);
        if table.len() != expected {
            return Err(Error::Structure(format!(
                "partial function `{name}`: {} of {expected} argument tuples mapped",
                table.len()
            )));
        }
        for (args, val) in &table {
            if args.len() != arity {
                return Err(Error::Structure(format!(
                    "tuple arity mismatch for function `{name}`"
                )));
            }
            if args.iter().any(|&e| e >= self.elems.len()) || *val >= self.elems.len() {
                return Err(Error::Structure(format!(
                    "tuple element outside domain in function `{name}`"
                )));
            }
        }
        self.funcs.insert(name.to_string(), FuncInterp { arity, table });
        Ok(())
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.preds.contains_key(name) || self.funcs.contains_key(name)
    }

    pub fn pred_arity(&self, name: &str) -> Option<usize> {
        self.preds.get(name).map(|p| p.arity)
    }

    pub fn func_arity(&self, name: &str) -> Option<usize> {
        self.funcs.get(name).map(|p| p.arity)
    }

    /// Symbols interpreted by this structure, with kinds and arities.
    pub fn vocabulary(&self) -> BTreeMap<String, (SymKind, usize)> {
        let mut out = BTreeMap::new();
        for (name, p) in &self.preds {
            out.insert(name.clone(), (SymKind::Pred, p.arity));
        }
        for (name, f) in &self.funcs {
            out.insert(name.clone(), (SymKind::Func, f.arity));
        }
        out
    }

    pub fn holds(&self, pred: &str, args: &[Elem]) -> Result<bool> {
        let interp = self
            .preds
            .get(pred)
            .ok_or_else(|| Error::Eval(format!("uninterpreted predicate `{pred}`")))?;
        if args.len() != interp.arity {
            return Err(Error::Eval(format!("arity mismatch for `{pred}`")));
        }
        Ok(interp.tuples.contains(args))
    }

    pub fn pred_tuples(&self, pred: &str) -> Option<&BTreeSet<Vec<Elem>>> {
        self.preds.get(pred).map(|p| &p.tuples)
    }

    pub fn apply_func(&self, func: &str, args: &[Elem]) -> Result<Elem> {
        let interp = self
            .funcs
            .get(func)
            .ok_or_else(|| Error::Eval(format!("uninterpreted function `{func}`")))?;
        interp
            .table
            .get(args)
            .copied()
            .ok_or_else(|| Error::Eval(format!("function `{func}` has no value at given tuple")))
    }

    /// Evaluate a term under an assignment.
    pub fn eval_term(&self, a: &Assignment, t: &Term) -> Result<Elem> {
        match t {
            Term::Var(v) => a
                .get(v)
                .copied()
                .ok_or_else(|| Error::Eval(format!("unassigned variable `{v}`"))),
            Term::App(name, args) => {
                let vals = args
                    .iter()
                    .map(|t| self.eval_term(a, t))
                    .collect::<Result<Vec<_>>>()?;
                self.apply_func(name, &vals)
            }
        }
    }

    pub fn eval_atom(&self, a: &Assignment, atom: &Atom) -> Result<bool> {
        match atom {
            Atom::Pred(name, args) => {
                let vals = args
                    .iter()
                    .map(|t| self.eval_term(a, t))
                    .collect::<Result<Vec<_>>>()?;
                self.holds(name, &vals)
            }
            Atom::Eq(l, r) => Ok(self.eval_term(a, l)? == self.eval_term(a, r)?),
        }
    }

    pub fn eval_literal(&self, a: &Assignment, lit: &Literal) -> Result<bool> {
        Ok(self.eval_atom(a, &lit.atom)? != lit.negated)
    }

    /// Tarskian evaluation of a first-order formula; individual
    /// quantifiers range over the (finite) domain. Second-order
    /// quantifiers are rejected.
    pub fn eval(&self, a: &Assignment, f: &Formula) -> Result<bool> {
        match f {
            Formula::Atom(name, args) => {
                self.eval_atom(a, &Atom::Pred(name.clone(), args.clone()))
            }
            Formula::Eq(l, r) => Ok(self.eval_term(a, l)? == self.eval_term(a, r)?),
            Formula::Not(g) => Ok(!self.eval(a, g)?),
            Formula::And(fs) => {
                for g in fs {
                    if !self.eval(a, g)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for g in fs {
                    if self.eval(a, g)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(l, r) => Ok(!self.eval(a, l)? || self.eval(a, r)?),
            Formula::Iff(l, r) => Ok(self.eval(a, l)? == self.eval(a, r)?),
            Formula::Forall(vars, g) => {
                let mut a = a.clone();
                self.eval_quantified(&mut a, vars, g, true)
            }
            Formula::Exists(vars, g) => {
                let mut a = a.clone();
                self.eval_quantified(&mut a, vars, g, false)
            }
            Formula::ForallSO(..) | Formula::ExistsSO(..) => Err(Error::Eval(
                "second-order quantifiers cannot be evaluated directly".into(),
            )),
        }
    }

    fn eval_quantified(
        &self,
        a: &mut Assignment,
        vars: &[String],
        g: &Formula,
        universal: bool,
    ) -> Result<bool> {
        match vars.split_first() {
            None => self.eval(a, g),
            Some((v, rest)) => {
                for e in 0..self.elems.len() {
                    a.insert(v.clone(), e);
                    let r = self.eval_quantified(a, rest, g, universal)?;
                    if r != universal {
                        a.remove(v);
                        return Ok(!universal);
                    }
                }
                a.remove(v);
                Ok(universal)
            }
        }
    }

    /// Evaluate a closed formula.
    pub fn eval_closed(&self, f: &Formula) -> Result<bool> {
        self.eval(&Assignment::new(), f)
    }

    /// Restriction to the named symbols: interpretations of everything
    /// else are discarded.
    pub fn restrict(&self, symbols: &BTreeSet<String>) -> Structure {
        Structure {
            elems: self.elems.clone(),
            preds: self
                .preds
                .iter()
                .filter(|(n, _)| symbols.contains(*n))
                .map(|(n, v)| (n.clone(), v.clone()))
                .collect(),
            funcs: self
                .funcs
                .iter()
                .filter(|(n, _)| symbols.contains(*n))
                .map(|(n, v)| (n.clone(), v.clone()))
                .collect(),
        }
    }

    /// Load from the `.struct.json` format.
    pub fn load(text: &str) -> Result<Structure> {
        let v: Value = serde_json::from_str(text)?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Structure("expected a JSON object".into()))?;
        let domain = obj
            .get("domain")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Structure("missing `domain` array".into()))?;
        let elems = domain
            .iter()
            .map(json_elem_name)
            .collect::<Result<Vec<_>>>()?;
        let mut s = Structure::new(elems)?;
        let lookup = |s: &Structure, v: &Value| -> Result<Elem> {
            let name = json_elem_name(v)?;
            s.elem_index(&name)
                .ok_or_else(|| Error::Structure(format!("element `{name}` outside domain")))
        };

        if let Some(preds) = obj.get("predicates") {
            let preds = preds
                .as_object()
                .ok_or_else(|| Error::Structure("`predicates` must be an object".into()))?;
            for (key, rows) in preds {
                let (name, declared) = split_arity_key(key)?;
                let rows = rows
                    .as_array()
                    .ok_or_else(|| Error::Structure(format!("`{key}` must map to an array")))?;
                let mut tuples = BTreeSet::new();
                let mut arity = declared;
                for row in rows {
                    let row = row
                        .as_array()
                        .ok_or_else(|| Error::Structure(format!("tuple of `{key}` must be an array")))?;
                    let tuple = row
                        .iter()
                        .map(|v| lookup(&s, v))
                        .collect::<Result<Vec<_>>>()?;
                    match arity {
                        None => arity = Some(tuple.len()),
                        Some(a) if a != tuple.len() => {
                            return Err(Error::Structure(format!(
                                "tuple arity mismatch for predicate `{name}`"
                            )))
                        }
                        _ => {}
                    }
                    tuples.insert(tuple);
                }
                let arity = arity.ok_or_else(|| {
                    Error::Structure(format!(
                        "empty predicate `{name}` needs an explicit arity: use the key `{name}/N`"
                    ))
                })?;
                s.set_pred(&name, arity, tuples)?;
            }
        }

        if let Some(funcs) = obj.get("functions") {
            let funcs = funcs
                .as_object()
                .ok_or_else(|| Error::Structure("`functions` must be an object".into()))?;
            for (key, rows) in funcs {
                let (name, declared) = split_arity_key(key)?;
                let rows = rows
                    .as_array()
                    .ok_or_else(|| Error::Structure(format!("`{key}` must map to an array")))?;
                let mut table = BTreeMap::new();
                let mut arity = declared;
                for row in rows {
                    let row = row
                        .as_array()
                        .ok_or_else(|| Error::Structure(format!("row of `{key}` must be an array")))?;
                    if row.is_empty() {
                        return Err(Error::Structure(format!(
                            "function `{name}` rows need at least a value"
                        )));
                    }
                    let mut vals = row
                        .iter()
                        .map(|v| lookup(&s, v))
                        .collect::<Result<Vec<_>>>()?;
                    let val = vals.pop().unwrap();
                    match arity {
                        None => arity = Some(vals.len()),
                        Some(a) if a != vals.len() => {
                            return Err(Error::Structure(format!(
                                "row arity mismatch for function `{name}`"
                            )))
                        }
                        _ => {}
                    }
                    if table.insert(vals, val).is_some() {
                        return Err(Error::Structure(format!(
                            "function `{name}` maps an argument tuple twice"
                        )));
                    }
                }
                let arity = arity.ok_or_else(|| {
                    Error::Structure(format!(
                        "empty function `{name}` needs an explicit arity: use the key `{name}/N`"
                    ))
                })?;
                s.set_func(&name, arity, table)?;
            }
        }
        Ok(s)
    }

    /// Save in the `.struct.json` format; inverse of [`Structure::load`].
    pub fn save(&self) -> String {
        let elem_value = |e: &ElemName| -> Value {
            match e {
                ElemName::Int(n) => json!(n),
                ElemName::Str(s) => json!(s),
            }
        };
        let mut preds = Map::new();
        for (name, p) in &self.preds {
            let key = if p.tuples.is_empty() {
                format!("{name}/{}", p.arity)
            } else {
                name.clone()
            };
            let rows: Vec<Value> = p
                .tuples
                .iter()
                .map(|t| Value::Array(t.iter().map(|&e| elem_value(&self.elems[e])).collect()))
                .collect();
            preds.insert(key, Value::Array(rows));
        }
        let mut funcs = Map::new();
        for (name, f) in &self.funcs {
            let rows: Vec<Value> = f
                .table
                .iter()
                .map(|(args, val)| {
                    let mut row: Vec<Value> =
                        args.iter().map(|&e| elem_value(&self.elems[e])).collect();
                    row.push(elem_value(&self.elems[*val]));
                    Value::Array(row)
                })
                .collect();
            funcs.insert(name.clone(), Value::Array(rows));
        }
        let out = json!({
            "domain": self.elems.iter().map(elem_value).collect::<Vec<_>>(),
            "predicates": Value::Object(preds),
            "functions": Value::Object(funcs),
        });
        serde_json::to_string_pretty(&out).expect("structure serialization cannot fail")
    }
}

fn json_elem_name(v: &Value) -> Result<ElemName> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(ElemName::Int)
            .ok_or_else(|| Error::Structure(format!("non-integer element `{n}`"))),
        Value::String(s) => Ok(ElemName::Str(s.clone())),
        other => Err(Error::Structure(format!("bad element `{other}`"))),
    }
}

fn split_arity_key(key: &str) -> Result<(String, Option<usize>)> {
    match key.split_once('/') {
        None => Ok((key.to_string(), None)),
        Some((name, arity)) => {
            let a = arity
                .parse::<usize>()
                .map_err(|_| Error::Structure(format!("bad arity suffix in `{key}`")))?;
            Ok((name.to_string(), Some(a)))
        }
    }
}

/// All assignments of the given variables over the structure's domain,
/// in lexicographic order. `|A|^|vars|` assignments in total.
pub fn assignments(s: &Structure, vars: &[String]) -> AssignmentIter {
    AssignmentIter {
        vars: vars.to_vec(),
        size: s.domain_size(),
        counter: vec![0; vars.len()],
        done: false,
    }
}

pub struct AssignmentIter {
    vars: Vec<String>,
    size: usize,
    counter: Vec<usize>,
    done: bool,
}

impl Iterator for AssignmentIter {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.done {
            return None;
        }
        let item: Assignment = self
            .vars
            .iter()
            .cloned()
            .zip(self.counter.iter().copied())
            .collect();
        // increment, most significant digit first for lexicographic order
        let mut i = self.counter.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.counter[i] += 1;
            if self.counter[i] < self.size {
                break;
            }
            self.counter[i] = 0;
        }
        Some(item)
    }
}

/// Number of expansions of `base` interpreting `extra`, or an error when
/// it exceeds `cap`. Predicates contribute `2^(|A|^arity)` options,
/// functions `|A|^(|A|^arity)`.
pub fn expansion_count(base: &Structure, extra: &[Symbol], cap: u128) -> Result<u128> {
    let n = base.domain_size() as u128;
    let mut total: u128 = 1;
    for sym in extra {
        let places = n
            .checked_pow(sym.arity as u32)
            .ok_or(Error::EnumerationCap { count: u128::MAX, cap })?;
        let options = match sym.kind {
            SymKind::Pred => {
                if places >= 127 {
                    return Err(Error::EnumerationCap { count: u128::MAX, cap });
                }
                1u128 << places
            }
            SymKind::Func => {
                let mut acc: u128 = 1;
                for _ in 0..places {
                    acc = acc
                        .checked_mul(n)
                        .ok_or(Error::EnumerationCap { count: u128::MAX, cap })?;
                    if acc > cap {
                        return Err(Error::EnumerationCap { count: acc, cap });
                    }
                }
                acc
            }
        };
        total = total
            .checked_mul(options)
            .ok_or(Error::EnumerationCap { count: u128::MAX, cap })?;
        if total > cap {
            return Err(Error::EnumerationCap { count: total, cap });
        }
    }
    Ok(total)
}

/// All expansions of `base` over the extra symbols, in a deterministic
/// lexicographic order. Refuses (with an error) when the count exceeds
/// the cap.
pub fn enumerate_expansions(
    base: &Structure,
    extra: &[Symbol],
    cap: u128,
) -> Result<ExpansionIter> {
    for sym in extra {
        if base.has_symbol(&sym.name) {
            return Err(Error::Structure(format!(
                "expansion symbol `{}` already interpreted by the base",
                sym.name
            )));
        }
    }
    let total = expansion_count(base, extra, cap)?;
    let n = base.domain_size();
    let components = extra
        .iter()
        .map(|sym| {
            let tuples = all_tuples(n, sym.arity);
            let options = match sym.kind {
                SymKind::Pred => 1u128 << tuples.len(),
                SymKind::Func => (n as u128).pow(tuples.len() as u32),
            };
            Component { sym: sym.clone(), tuples, options }
        })
        .collect();
    Ok(ExpansionIter { base: base.clone(), components, index: 0, total })
}

struct Component {
    sym: Symbol,
    tuples: Vec<Vec<Elem>>,
    options: u128,
}

pub struct ExpansionIter {
    base: Structure,
    components: Vec<Component>,
    index: u128,
    total: u128,
}

impl ExpansionIter {
    pub fn total(&self) -> u128 {
        self.total
    }
}

impl Iterator for ExpansionIter {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        if self.index >= self.total {
            return None;
        }
        let mut rem = self.index;
        let mut s = self.base.clone();
        for comp in &self.components {
            let choice = rem % comp.options;
            rem /= comp.options;
            match comp.sym.kind {
                SymKind::Pred => {
                    let mut tuples = BTreeSet::new();
                    for (i, t) in comp.tuples.iter().enumerate() {
                        if choice >> i & 1 == 1 {
                            tuples.insert(t.clone());
                        }
                    }
                    s.set_pred(&comp.sym.name, comp.sym.arity, tuples)
                        .expect("expansion tuples are well-formed");
                }
                SymKind::Func => {
                    let n = self.base.domain_size() as u128;
                    let mut c = choice;
                    let mut table = BTreeMap::new();
                    for t in &comp.tuples {
                        table.insert(t.clone(), (c % n) as usize);
                        c /= n;
                    }
                    s.set_func(&comp.sym.name, comp.sym.arity, table)
                        .expect("expansion tables are well-formed");
                }
            }
        }
        self.index += 1;
        Some(s)
    }
}

/// All tuples of the given arity over `0..n`, lexicographically.
pub fn all_tuples(n: usize, arity: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for e in 0..n {
                let mut t2 = t.clone();
                t2.push(e);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// A structure over the positive naturals with finitely supported
/// predicate interpretations, used as the base of the encoding
/// simulation. Individual constants name elements directly; elements are
/// arbitrary-precision and must be at least 1.
#[derive(Debug, Clone, Default)]
pub struct NatBase {
    consts: BTreeMap<String, BigUint>,
    preds: BTreeMap<String, (usize, BTreeSet<Vec<BigUint>>)>,
}

impl NatBase {
    pub fn new() -> NatBase {
        NatBase::default()
    }

    pub fn set_const(&mut self, name: &str, value: BigUint) -> Result<()> {
        if value.is_zero() {
            return Err(Error::Structure(format!(
                "constant `{name}` must denote a positive natural"
            )));
        }
        self.consts.insert(name.to_string(), value);
        Ok(())
    }

    pub fn add_tuple(&mut self, pred: &str, args: Vec<BigUint>) -> Result<()> {
        if args.iter().any(Zero::is_zero) {
            return Err(Error::Structure(format!(
                "predicate `{pred}` holds a tuple with a zero component; the domain starts at 1"
            )));
        }
        match self.preds.get_mut(pred) {
            Some((arity, tuples)) => {
                if *arity != args.len() {
                    return Err(Error::Structure(format!("tuple arity mismatch for `{pred}`")));
                }
                tuples.insert(args);
            }
            None => {
                let arity = args.len();
                self.preds
                    .insert(pred.to_string(), (arity, BTreeSet::from([args])));
            }
        }
        Ok(())
    }

    pub fn declare_pred(&mut self, pred: &str, arity: usize) {
        self.preds
            .entry(pred.to_string())
            .or_insert_with(|| (arity, BTreeSet::new()));
    }

    pub fn support(&self, pred: &str) -> Option<&BTreeSet<Vec<BigUint>>> {
        self.preds.get(pred).map(|(_, t)| t)
    }

    pub fn holds(&self, pred: &str, args: &[BigUint]) -> bool {
        self.preds
            .get(pred)
            .map(|(_, t)| t.contains(args))
            .unwrap_or(false)
    }

    /// Evaluate a ground term to a natural. Integer-named constants
    /// denote themselves; others must be interpreted.
    pub fn eval_term(&self, t: &Term, env: &BTreeMap<String, BigUint>) -> Result<BigUint> {
        match t {
            Term::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Eval(format!("unassigned variable `{v}`"))),
            Term::App(name, args) if args.is_empty() => {
                if let Some(v) = self.consts.get(name) {
                    return Ok(v.clone());
                }
                if let Ok(n) = name.parse::<BigUint>() {
                    if n.is_zero() {
                        return Err(Error::Eval(
                            "constant `0` lies outside the positive-natural domain".into(),
                        ));
                    }
                    return Ok(n);
                }
                Err(Error::Eval(format!("uninterpreted constant `{name}`")))
            }
            Term::App(name, _) => Err(Error::Eval(format!(
                "function `{name}` has no interpretation over the natural-number base"
            ))),
        }
    }

    pub fn eval_literal(&self, lit: &Literal, env: &BTreeMap<String, BigUint>) -> Result<bool> {
        let truth = match &lit.atom {
            Atom::Pred(name, args) => {
                let vals = args
                    .iter()
                    .map(|t| self.eval_term(t, env))
                    .collect::<Result<Vec<_>>>()?;
                self.holds(name, &vals)
            }
            Atom::Eq(l, r) => self.eval_term(l, env)? == self.eval_term(r, env)?,
        };
        Ok(truth != lit.negated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_elem() -> Structure {
        let mut s = Structure::with_size(2).unwrap();
        s.set_pred("p", 1, BTreeSet::from([vec![0]])).unwrap();
        s
    }

    #[test]
    fn load_save_roundtrip() {
        let text = r#"{"domain": [0, 1], "predicates": {"p": [[0]]}, "functions": {}}"#;
        let s = Structure::load(text).unwrap();
        assert_eq!(s, two_elem());
        let saved = s.save();
        let s2 = Structure::load(&saved).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn partial_function_rejected() {
        let text = r#"{"domain": [0, 1], "functions": {"f": [[0, 1]]}}"#;
        let err = Structure::load(text).unwrap_err();
        assert!(err.to_string().contains("partial function"));
    }

    #[test]
    fn empty_pred_needs_arity_key() {
        let text = r#"{"domain": [0], "predicates": {"q/1": []}}"#;
        let s = Structure::load(text).unwrap();
        assert_eq!(s.pred_arity("q"), Some(1));
        let bad = r#"{"domain": [0], "predicates": {"q": []}}"#;
        assert!(Structure::load(bad).is_err());
    }

    #[test]
    fn element_outside_domain_rejected() {
        let text = r#"{"domain": [0, 1], "predicates": {"p": [[2]]}}"#;
        assert!(Structure::load(text).is_err());
    }

    #[test]
    fn eval_empty_conjunction_is_true() {
        let s = two_elem();
        assert!(s.eval_closed(&Formula::truth()).unwrap());
        assert!(!s.eval_closed(&Formula::falsity()).unwrap());
    }

    #[test]
    fn eval_atom_and_negation() {
        let s = two_elem();
        let a: Assignment = [("X".to_string(), 0), ("Y".to_string(), 1)].into();
        let f = Formula::and(vec![
            Formula::atom("p", vec![Term::var("X")]),
            Formula::not(Formula::atom("p", vec![Term::var("Y")])),
        ]);
        assert!(s.eval(&a, &f).unwrap());
    }

    #[test]
    fn eval_equality() {
        let s = two_elem();
        let eq = Formula::Eq(Term::var("X"), Term::var("Y"));
        let a: Assignment = [("X".to_string(), 0), ("Y".to_string(), 0)].into();
        assert!(s.eval(&a, &eq).unwrap());
        let b: Assignment = [("X".to_string(), 0), ("Y".to_string(), 1)].into();
        assert!(!s.eval(&b, &eq).unwrap());
    }

    #[test]
    fn eval_unassigned_variable_errors() {
        let s = two_elem();
        let f = Formula::atom("p", vec![Term::var("Z")]);
        assert!(s.eval(&Assignment::new(), &f).is_err());
    }

    #[test]
    fn assignment_counts() {
        let s = Structure::with_size(3).unwrap();
        assert_eq!(assignments(&s, &[]).count(), 1);
        assert_eq!(assignments(&s, &["X".into()]).count(), 3);
        let s2 = Structure::with_size(2).unwrap();
        assert_eq!(
            assignments(&s2, &["X".into(), "Y".into(), "Z".into()]).count(),
            8
        );
    }

    #[test]
    fn expansion_counts() {
        let base = Structure::with_size(2).unwrap();
        let unary_pred = [Symbol::pred("q", 1)];
        assert_eq!(
            enumerate_expansions(&base, &unary_pred, DEFAULT_ENUM_CAP)
                .unwrap()
                .count(),
            4
        );
        let unary_func = [Symbol::func("f", 1)];
        assert_eq!(
            enumerate_expansions(&base, &unary_func, DEFAULT_ENUM_CAP)
                .unwrap()
                .count(),
            4
        );
        let binary_pred = [Symbol::pred("r", 2)];
        assert_eq!(
            enumerate_expansions(&base, &binary_pred, DEFAULT_ENUM_CAP)
                .unwrap()
                .count(),
            16
        );
    }

    #[test]
    fn expansions_pairwise_distinct() {
        let base = Structure::with_size(2).unwrap();
        let syms = [Symbol::pred("q", 1), Symbol::func("c", 0)];
        let all: Vec<Structure> =
            enumerate_expansions(&base, &syms, DEFAULT_ENUM_CAP).unwrap().collect();
        assert_eq!(all.len(), 8);
        for i in 0..all.len() {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn cap_refuses_large_enumerations() {
        let base = Structure::with_size(2).unwrap();
        let syms = [Symbol::pred("r", 2)];
        match enumerate_expansions(&base, &syms, 8) {
            Err(Error::EnumerationCap { count, cap }) => {
                assert_eq!(count, 16);
                assert_eq!(cap, 8);
            }
            _ => panic!("expected the cap to trip"),
        }
    }

    #[test]
    fn natbase_rejects_zero() {
        let mut nb = NatBase::new();
        assert!(nb.add_tuple("p", vec![BigUint::from(0u32)]).is_err());
        nb.add_tuple("p", vec![BigUint::from(2u32)]).unwrap();
        assert!(nb.holds("p", &[BigUint::from(2u32)]));
    }
}
