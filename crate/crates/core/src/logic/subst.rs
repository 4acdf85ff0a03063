use std::collections::{BTreeMap, BTreeSet};

use super::{fresh_var, Formula, LogicError, Term, Var};

/// Sort-preserving map from variable names to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: &Var, t: Term) {
        self.map.insert(v.name.clone(), t);
    }

    pub fn with(mut self, v: &Var, t: Term) -> Self {
        self.insert(v, t);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.map.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn without(&self, bound: &[Var]) -> Substitution {
        let mut s = self.clone();
        for v in bound {
            s.map.remove(&v.name);
        }
        s
    }

    fn range_names(&self) -> BTreeSet<String> {
        let mut vars = BTreeSet::new();
        for t in self.map.values() {
            t.free_vars_into(&mut vars);
        }
        vars.into_iter().map(|v| v.name).collect()
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.insert(&v, t);
        }
        s
    }
}

/// Renames binders that would capture a free variable of the substitution range.
fn open_binder(vars: &[Var], s: &Substitution) -> (Vec<Var>, Substitution) {
    let mut inner = s.without(vars);
    if inner.is_empty() {
        return (vars.to_vec(), inner);
    }
    let range = inner.range_names();
    let mut out = Vec::with_capacity(vars.len());
    for v in vars {
        if range.contains(&v.name) {
            let nv = fresh_var(&v.name, v.sort.clone());
            inner.insert(v, Term::Var(nv.clone()));
            out.push(nv);
        } else {
            out.push(v.clone());
        }
    }
    (out, inner)
}

pub fn substitute_term(t: &Term, s: &Substitution) -> Result<Term, LogicError> {
    Ok(match t {
        Term::Var(v) => match s.get(&v.name) {
            Some(r) => {
                let rs = r.sort();
                if !rs.compatible(&v.sort) {
                    return Err(LogicError::SortMismatch(format!(
                        "{} : {} replaced by {r} : {rs}",
                        v.name, v.sort
                    )));
                }
                r.clone()
            }
            None => t.clone(),
        },
        Term::EnumConst { .. } | Term::Int(_) => t.clone(),
        Term::Offset(b, k) => Term::offset(substitute_term(b, s)?, *k),
        Term::Read(a, i) => Term::read(substitute_term(a, s)?, substitute_term(i, s)?),
        Term::Write(a, i, e) => Term::write(
            substitute_term(a, s)?,
            substitute_term(i, s)?,
            substitute_term(e, s)?,
        ),
        Term::IntervalWrite { array, lo, hi, value } => Term::interval_write(
            substitute_term(array, s)?,
            substitute_term(lo, s)?,
            substitute_term(hi, s)?,
            substitute_term(value, s)?,
        ),
        Term::CondWrite { array, var, cond, value } => {
            let (vs, inner) = open_binder(std::slice::from_ref(var), s);
            Term::CondWrite {
                array: Box::new(substitute_term(array, s)?),
                var: vs.into_iter().next().unwrap(),
                cond: Box::new(substitute(cond, &inner)?),
                value: Box::new(substitute_term(value, s)?),
            }
        }
    })
}

/// Capture-avoiding substitution of free occurrences.
pub fn substitute(f: &Formula, s: &Substitution) -> Result<Formula, LogicError> {
    if s.is_empty() {
        return Ok(f.clone());
    }
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(rel, l, r) => Formula::Atom(*rel, substitute_term(l, s)?, substitute_term(r, s)?),
        Formula::Not(g) => Formula::Not(Box::new(substitute(g, s)?)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| substitute(g, s)).collect::<Result<_, _>>()?),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| substitute(g, s)).collect::<Result<_, _>>()?),
        Formula::Exists(vs, g) => {
            let (vs, inner) = open_binder(vs, s);
            Formula::Exists(vs, Box::new(substitute(g, &inner)?))
        }
        Formula::Forall(vs, g) => {
            let (vs, inner) = open_binder(vs, s);
            Formula::Forall(vs, Box::new(substitute(g, &inner)?))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Signature, Sort};

    fn sig() -> Signature {
        let mut sig = Signature::default();
        sig.enums.insert("loc".into(), vec!["I".into(), "R".into(), "W".into(), "C".into()]);
        sig
    }

    fn arr() -> Var {
        Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))))
    }

    #[test]
    fn replaces_array_by_update() {
        let sig = sig();
        let (a, i) = (arr(), Var::index("i"));
        let c = sig.enum_const("loc", "C").unwrap();
        let r = sig.enum_const("loc", "R").unwrap();
        let f = Formula::eq(Term::read(Term::var(&a), Term::var(&i)), c.clone());
        let upd = Term::write(Term::var(&a), Term::var(&i), r);
        let g = substitute(&f, &Substitution::new().with(&a, upd.clone())).unwrap();
        assert_eq!(g, Formula::eq(Term::read(upd, Term::var(&i)), c));
    }

    #[test]
    fn bound_variable_untouched() {
        let sig = sig();
        let (a, i, j) = (arr(), Var::index("i"), Var::index("j"));
        let c = sig.enum_const("loc", "C").unwrap();
        let f = Formula::exists(vec![i.clone()], Formula::eq(Term::read(Term::var(&a), Term::var(&i)), c));
        let g = substitute(&f, &Substitution::new().with(&i, Term::var(&j))).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn offset_substitution() {
        let p = Var::new("p", Sort::Int);
        let j = Var::index("J");
        let l = Var::index("L");
        let f = Formula::and(vec![Formula::eq(Term::var(&p), Term::Int(2)), Formula::ne(Term::var(&j), Term::var(&l))]);
        let g = substitute(&f, &Substitution::new().with(&j, Term::offset(Term::var(&j), 1))).unwrap();
        assert_eq!(g.to_string(), "(and (= p 2) (distinct (+ J 1) L))");
    }

    #[test]
    fn avoids_capture() {
        let sig = sig();
        let (a, i, j) = (arr(), Var::index("i"), Var::index("j"));
        let c = sig.enum_const("loc", "C").unwrap();
        // ∃i. a[i]=C ∧ i<j   with j ↦ i must rename the binder
        let f = Formula::exists(
            vec![i.clone()],
            Formula::and(vec![
                Formula::eq(Term::read(Term::var(&a), Term::var(&i)), c),
                Formula::lt(Term::var(&i), Term::var(&j)),
            ]),
        );
        let g = substitute(&f, &Substitution::new().with(&j, Term::var(&i))).unwrap();
        let Formula::Exists(vs, body) = &g else { panic!() };
        assert_ne!(vs[0].name, "i");
        assert!(body.free_vars().contains(&i));
    }

    #[test]
    fn rejects_sort_violation() {
        let sig = sig();
        let i = Var::index("i");
        let f = Formula::lt(Term::var(&i), Term::var(&i));
        let err = substitute(&f, &Substitution::new().with(&i, sig.enum_const("loc", "C").unwrap()));
        assert!(matches!(err, Err(LogicError::SortMismatch(_))));
    }
}
