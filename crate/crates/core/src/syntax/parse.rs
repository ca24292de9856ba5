//! Recursive-descent parser for the `.lp` grammar.
//!
//! Statements are `.`-terminated. `;` separates head atoms, `,` body
//! literals, `not` is default negation, `#false` denotes the empty head,
//! `=`/`!=` are equality literals, `%` starts a comment. Variables are
//! capitalized identifiers; constants and functions are lowercase (a
//! leading underscore counts as lowercase) or nonnegative integers.

use crate::error::{Error, Result};

use super::{Atom, Literal, Program, Rule, Term};

pub fn parse_program(text: &str) -> Result<Program> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, arities: ArityTable::default() };
    let rules = parser.program()?;
    Program::new(rules)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    If, // ":-"
    Eq,
    Neq,
    Not,
    False,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    macro_rules! err {
        ($l:expr, $c:expr, $($arg:tt)*) => {
            return Err(Error::Parse { line: $l, col: $c, msg: format!($($arg)*) })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                out.push(Spanned { tok: Tok::LParen, line: tl, col: tc });
            }
            ')' => {
                chars.next();
                col += 1;
                out.push(Spanned { tok: Tok::RParen, line: tl, col: tc });
            }
            ',' => {
                chars.next();
                col += 1;
                out.push(Spanned { tok: Tok::Comma, line: tl, col: tc });
            }
            ';' => {
                chars.next();
                col += 1;
                out.push(Spanned { tok: Tok::Semi, line: tl, col: tc });
            }
            '.' => {
                chars.next();
                col += 1;
                out.push(Spanned { tok: Tok::Dot, line: tl, col: tc });
            }
            '=' => {
                chars.next();
                col += 1;
                out.push(Spanned { tok: Tok::Eq, line: tl, col: tc });
            }
            '!' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('=') => {
                        chars.next();
                        col += 1;
                        out.push(Spanned { tok: Tok::Neq, line: tl, col: tc });
                    }
                    _ => err!(tl, tc, "expected `=` after `!`"),
                }
            }
            ':' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('-') => {
                        chars.next();
                        col += 1;
                        out.push(Spanned { tok: Tok::If, line: tl, col: tc });
                    }
                    _ => err!(tl, tc, "expected `-` after `:`"),
                }
            }
            '#' => {
                chars.next();
                col += 1;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if word == "false" {
                    out.push(Spanned { tok: Tok::False, line: tl, col: tc });
                } else {
                    err!(tl, tc, "unknown directive `#{word}`");
                }
            }
            c if c.is_ascii_digit() => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Int(word), line: tl, col: tc });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = if word == "not" {
                    Tok::Not
                } else if word.chars().next().unwrap().is_ascii_uppercase() {
                    Tok::Var(word)
                } else {
                    Tok::Ident(word)
                };
                out.push(Spanned { tok, line: tl, col: tc });
            }
            other => err!(tl, tc, "unexpected character `{other}`"),
        }
    }
    Ok(out)
}

/// Arity table keyed by symbol name. Predicates and functions live in
/// disjoint namespaces; a symbol's first occurrence fixes its arity.
#[derive(Default)]
struct ArityTable {
    preds: std::collections::BTreeMap<String, usize>,
    funcs: std::collections::BTreeMap<String, usize>,
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    arities: ArityTable,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_at<T>(&self, at: usize, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self
            .tokens
            .get(at)
            .map(|s| (s.line, s.col))
            .or_else(|| self.tokens.last().map(|s| (s.line, s.col + 1)))
            .unwrap_or((1, 1));
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn err_here<T>(&self, msg: impl Into<String>) -> Result<T> {
        self.err_at(self.pos, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(s) if s.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err_here(format!("expected {what}")),
        }
    }

    fn program(&mut self) -> Result<Vec<Rule>> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            rules.push(self.rule()?);
        }
        Ok(rules)
    }

    fn rule(&mut self) -> Result<Rule> {
        let head = match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::False) => {
                self.next();
                Vec::new()
            }
            Some(Tok::If) => Vec::new(),
            Some(Tok::Not) => {
                return self.err_here("negated head atom");
            }
            _ => {
                let mut atoms = vec![self.head_atom()?];
                while matches!(self.peek().map(|s| &s.tok), Some(Tok::Semi)) {
                    self.next();
                    atoms.push(self.head_atom()?);
                }
                atoms
            }
        };
        let body = if matches!(self.peek().map(|s| &s.tok), Some(Tok::If)) {
            self.next();
            let mut lits = vec![self.literal()?];
            while matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
                self.next();
                lits.push(self.literal()?);
            }
            lits
        } else {
            Vec::new()
        };
        self.expect(Tok::Dot, "`.` at end of rule")?;
        Ok(Rule { body, head })
    }

    fn head_atom(&mut self) -> Result<Atom> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Not)) {
            return self.err_here("negated head atom");
        }
        let at = self.pos;
        match self.atom_or_eq()? {
            (atom @ Atom::Pred(..), false) => Ok(atom),
            _ => self.err_at(at, "equality in rule head"),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        let negated = if matches!(self.peek().map(|s| &s.tok), Some(Tok::Not)) {
            self.next();
            true
        } else {
            false
        };
        let (atom, neq) = self.atom_or_eq()?;
        // `not t1 != t2` is a doubly negated equality
        Ok(Literal { atom, negated: negated ^ neq })
    }

    /// Parse a term; if `=` or `!=` follows it becomes an equality,
    /// otherwise the term is promoted to a predicate application. The
    /// returned flag records a `!=`.
    fn atom_or_eq(&mut self) -> Result<(Atom, bool)> {
        let at = self.pos;
        let left = self.term()?;
        match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::Eq) | Some(Tok::Neq) => {
                let neq = matches!(self.next().unwrap().tok, Tok::Neq);
                let rat = self.pos;
                let right = self.term()?;
                self.record_term(at, &left)?;
                self.record_term(rat, &right)?;
                Ok((Atom::Eq(left, right), neq))
            }
            _ => match left {
                Term::Var(_) => {
                    self.err_at(at, "a variable cannot stand as an atom")
                }
                Term::App(name, args) => {
                    if name.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                        return self.err_at(at, "an integer cannot stand as an atom");
                    }
                    self.record_pred(at, &name, args.len())?;
                    Ok((Atom::Pred(name, args), false))
                }
            },
        }
    }

    /// Parse one term. Inner applications are recorded as functions; the
    /// outermost application is recorded by the caller once its role
    /// (predicate or function) is known.
    fn term(&mut self) -> Result<Term> {
        let at = self.pos;
        match self.next().map(|s| s.tok) {
            Some(Tok::Var(v)) => Ok(Term::Var(v)),
            Some(Tok::Int(n)) => Ok(Term::App(n, Vec::new())),
            Some(Tok::Ident(name)) => {
                if matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen)) {
                    self.next();
                    let mut args = Vec::new();
                    loop {
                        let aat = self.pos;
                        let arg = self.term()?;
                        self.record_term(aat, &arg)?;
                        args.push(arg);
                        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
                            self.next();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Term::App(name, args))
                } else {
                    Ok(Term::App(name, Vec::new()))
                }
            }
            _ => {
                self.pos = at;
                self.err_here("expected a term")
            }
        }
    }

    /// Record an outermost term application as a function symbol.
    fn record_term(&mut self, at: usize, term: &Term) -> Result<()> {
        if let Term::App(name, args) = term {
            self.record_func(at, name, args.len())?;
        }
        Ok(())
    }

    fn record_func(&mut self, at: usize, name: &str, arity: usize) -> Result<()> {
        if self.arities.preds.contains_key(name) {
            return self.err_at(at, format!("symbol `{name}` used both as predicate and function"));
        }
        match self.arities.funcs.get(name) {
            None => {
                self.arities.funcs.insert(name.to_string(), arity);
                Ok(())
            }
            Some(&a) if a == arity => Ok(()),
            Some(&a) => self.err_at(
                at,
                format!("arity clash for `{name}`: first seen with arity {a}, used with arity {arity}"),
            ),
        }
    }

    fn record_pred(&mut self, at: usize, name: &str, arity: usize) -> Result<()> {
        if self.arities.funcs.contains_key(name) {
            return self.err_at(at, format!("symbol `{name}` used both as predicate and function"));
        }
        match self.arities.preds.get(name) {
            None => {
                self.arities.preds.insert(name.to_string(), arity);
                Ok(())
            }
            Some(&a) if a == arity => Ok(()),
            Some(&a) => self.err_at(
                at,
                format!("arity clash for `{name}`: first seen with arity {a}, used with arity {arity}"),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rule_with_negation() {
        let p = parse_program("p :- not q.").unwrap();
        assert_eq!(p.len(), 1);
        let r = &p.rules()[0];
        assert_eq!(r.head, vec![Atom::prop("p")]);
        assert_eq!(r.body, vec![Literal::neg(Atom::prop("q"))]);
    }

    #[test]
    fn disjunctive_fact() {
        let p = parse_program("p ; q.").unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.head, vec![Atom::prop("p"), Atom::prop("q")]);
        assert!(r.body.is_empty());
    }

    #[test]
    fn empty_head_constraint() {
        let p = parse_program("#false :- enc(X,Y,c_p).").unwrap();
        let r = &p.rules()[0];
        assert!(r.head.is_empty());
        assert_eq!(
            r.body,
            vec![Literal::pos(Atom::pred(
                "enc",
                vec![Term::var("X"), Term::var("Y"), Term::constant("c_p")]
            ))]
        );
    }

    #[test]
    fn bare_constraint_form() {
        let p = parse_program(":- p.").unwrap();
        assert!(p.rules()[0].head.is_empty());
    }

    #[test]
    fn equality_literals() {
        let p = parse_program("p(X) :- X = Y, not Y != f(c).").unwrap();
        let r = &p.rules()[0];
        assert_eq!(r.body.len(), 2);
        assert!(!r.body[0].negated);
        assert!(matches!(r.body[0].atom, Atom::Eq(..)));
        // `not t1 != t2` collapses to a positive equality
        assert!(!r.body[1].negated);
        assert!(matches!(r.body[1].atom, Atom::Eq(..)));
    }

    #[test]
    fn neq_sugar_is_negated_eq() {
        let p = parse_program("#false :- X != Y.").unwrap();
        let lit = &p.rules()[0].body[0];
        assert!(lit.negated);
        assert!(matches!(lit.atom, Atom::Eq(..)));
    }

    #[test]
    fn integer_constants() {
        let p = parse_program("p(1) :- e(1, 2).").unwrap();
        assert_eq!(p.rules()[0].head[0], Atom::pred("p", vec![Term::constant("1")]));
    }

    #[test]
    fn repeated_predicate_use_is_consistent() {
        let p = parse_program("p(c) :- p(d).").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.pred_arity("p"), Some(1));
    }

    #[test]
    fn nested_function_terms() {
        let p = parse_program("p(f(g(X), c)) :- q(X).").unwrap();
        assert_eq!(p.vocabulary().get("f").map(|v| v.1), Some(2));
        assert_eq!(p.vocabulary().get("g").map(|v| v.1), Some(1));
    }

    #[test]
    fn comments_skipped() {
        let p = parse_program("% a comment\np. % trailing\n% another\nq :- p.").unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn error_equality_in_head() {
        let err = parse_program("X = Y :- p.").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("equality in rule head"), "{msg}");
        assert!(msg.contains("1:1"), "{msg}");
    }

    #[test]
    fn error_negated_head() {
        let err = parse_program("not p :- q.").unwrap_err();
        assert!(err.to_string().contains("negated head atom"));
    }

    #[test]
    fn error_missing_dot() {
        let err = parse_program("p :- q").unwrap_err();
        assert!(err.to_string().contains("`.`"));
    }

    #[test]
    fn error_arity_clash_located() {
        let err = parse_program("p(X) :- q.\nq :- p(X, Y).").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("arity clash"), "{msg}");
        assert!(msg.contains("2:6"), "{msg}");
    }

    #[test]
    fn error_pred_func_clash() {
        let err = parse_program("p(c) :- c.").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("both as predicate and function"), "{msg}");
    }

    #[test]
    fn underscore_names_are_symbols() {
        let p = parse_program("__inf :- not __infbar.").unwrap();
        assert_eq!(p.rules()[0].head[0], Atom::prop("__inf"));
    }
}
