//! Textual rendering of programs in the `.lp` grammar.

use std::fmt;

use super::{Atom, Literal, Program, Rule, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
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
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Pred(name, args) => {
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
            Atom::Eq(l, r) => write!(f, "{l} = {r}"),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.atom, self.negated) {
            (Atom::Eq(l, r), true) => write!(f, "{l} != {r}"),
            (atom, true) => write!(f, "not {atom}"),
            (atom, false) => write!(f, "{atom}"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.head.is_empty() {
            write!(f, "#false")?;
        } else {
            for (i, atom) in self.head.iter().enumerate() {
                if i > 0 {
                    write!(f, " ; ")?;
                }
                write!(f, "{atom}")?;
            }
        }
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{lit}")?;
            }
        }
        write!(f, ".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in self.rules() {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

pub(super) fn program_to_string(p: &Program) -> String {
    p.to_string()
}

#[cfg(test)]
mod tests {
    use crate::syntax::{parse_program, render_program};

    #[test]
    fn empty_program_renders_empty() {
        let p = parse_program("").unwrap();
        assert_eq!(render_program(&p), "");
    }

    #[test]
    fn single_rule_roundtrip() {
        let p = parse_program("p :- not q.").unwrap();
        assert_eq!(render_program(&p), "p :- not q.\n");
    }

    #[test]
    fn parse_render_parse_identity() {
        let texts = [
            "p ; q.",
            "#false :- p(X), not q(X, f(Y)).",
            "p(X) :- e(X), X != c.",
            "r :- X = Y, not p.",
            "#false :- __enc(X, Y, c_p).",
        ];
        for text in texts {
            let p1 = parse_program(text).unwrap();
            let rendered = render_program(&p1);
            let p2 = parse_program(&rendered).unwrap();
            assert_eq!(p1, p2, "round trip failed for {text}");
        }
    }
}
