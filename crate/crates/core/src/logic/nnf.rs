use super::{Formula, Rel, Term};

/// The atom equivalent to `¬(lhs rel rhs)`.
pub fn complement_atom(rel: Rel, lhs: &Term, rhs: &Term) -> Formula {
    match rel {
        Rel::Eq => Formula::ne(lhs.clone(), rhs.clone()),
        Rel::Ne => Formula::eq(lhs.clone(), rhs.clone()),
        Rel::Lt => Formula::le(rhs.clone(), lhs.clone()),
        Rel::Le => Formula::lt(rhs.clone(), lhs.clone()),
    }
}

/// Negation normal form: `Not` never survives, atoms absorb negations.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, negate: bool) -> Formula {
    match f {
        Formula::True => {
            if negate {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if negate {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Atom(rel, l, r) => {
            if negate {
                complement_atom(*rel, l, r)
            } else {
                f.clone()
            }
        }
        Formula::Not(g) => nnf(g, !negate),
        Formula::And(gs) => {
            let parts = gs.iter().map(|g| nnf(g, negate)).collect();
            if negate {
                Formula::or(parts)
            } else {
                Formula::and(parts)
            }
        }
        Formula::Or(gs) => {
            let parts = gs.iter().map(|g| nnf(g, negate)).collect();
            if negate {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        Formula::Exists(vs, g) => {
            if negate {
                Formula::forall(vs.clone(), nnf(g, true))
            } else {
                Formula::exists(vs.clone(), nnf(g, false))
            }
        }
        Formula::Forall(vs, g) => {
            if negate {
                Formula::exists(vs.clone(), nnf(g, true))
            } else {
                Formula::forall(vs.clone(), nnf(g, false))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Signature, Sort, Var};

    #[test]
    fn de_morgan() {
        let (x, y, u, v) = (Var::index("x"), Var::index("y"), Var::index("u"), Var::index("v"));
        let f = Formula::not(Formula::and(vec![
            Formula::eq(Term::var(&x), Term::var(&y)),
            Formula::lt(Term::var(&u), Term::var(&v)),
        ]));
        assert_eq!(to_nnf(&f).to_string(), "(or (distinct x y) (<= v u))");
    }

    #[test]
    fn negated_universal() {
        let mut sig = Signature::default();
        sig.enums.insert("loc".into(), vec!["I".into(), "C".into()]);
        let a = Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))));
        let z = Var::index("z");
        let f = Formula::not(Formula::forall(
            vec![z.clone()],
            Formula::eq(Term::read(Term::var(&a), Term::var(&z)), sig.enum_const("loc", "I").unwrap()),
        ));
        assert_eq!(to_nnf(&f).to_string(), "(exists (z) (distinct (select a z) I))");
    }

    #[test]
    fn double_negation() {
        let p = Var::new("p", Sort::Int);
        let f = Formula::Not(Box::new(Formula::Not(Box::new(Formula::eq(Term::var(&p), Term::Int(2))))));
        assert_eq!(to_nnf(&f).to_string(), "(= p 2)");
    }
}
