use super::{substitute, Formula, Substitution, Term};

/// Innermost `select` applied directly to a write.
fn find_redex(t: &Term) -> Option<&Term> {
    let inner = match t {
        Term::Var(_) | Term::EnumConst { .. } | Term::Int(_) => None,
        Term::Offset(b, _) => find_redex(b),
        Term::Read(a, i) => find_redex(i).or_else(|| find_redex(a)),
        Term::Write(a, i, e) => find_redex(a).or_else(|| find_redex(i)).or_else(|| find_redex(e)),
        Term::IntervalWrite { array, lo, hi, value } => find_redex(array)
            .or_else(|| find_redex(lo))
            .or_else(|| find_redex(hi))
            .or_else(|| find_redex(value)),
        Term::CondWrite { array, value, .. } => find_redex(array).or_else(|| find_redex(value)),
    };
    inner.or(match t {
        Term::Read(a, _) if a.is_write() => Some(t),
        _ => None,
    })
}

fn replace(t: &Term, target: &Term, by: &Term) -> Term {
    if t == target {
        return by.clone();
    }
    match t {
        Term::Var(_) | Term::EnumConst { .. } | Term::Int(_) => t.clone(),
        Term::Offset(b, k) => Term::Offset(Box::new(replace(b, target, by)), *k),
        Term::Read(a, i) => Term::read(replace(a, target, by), replace(i, target, by)),
        Term::Write(a, i, e) => Term::write(
            replace(a, target, by),
            replace(i, target, by),
            replace(e, target, by),
        ),
        Term::IntervalWrite { array, lo, hi, value } => Term::interval_write(
            replace(array, target, by),
            replace(lo, target, by),
            replace(hi, target, by),
            replace(value, target, by),
        ),
        Term::CondWrite { array, var, cond, value } => Term::CondWrite {
            array: Box::new(replace(array, target, by)),
            var: var.clone(),
            cond: cond.clone(),
            value: Box::new(replace(value, target, by)),
        },
    }
}

fn reduce_atom(f: &Formula) -> Formula {
    let Formula::Atom(rel, l, r) = f else { unreachable!() };
    let redex = find_redex(l).or_else(|| find_redex(r)).cloned();
    let Some(redex) = redex else {
        return f.clone();
    };
    let Term::Read(arr, j) = &redex else { unreachable!() };
    let j = (**j).clone();
    let with = |by: &Term| Formula::Atom(*rel, replace(l, &redex, by), replace(r, &redex, by));
    let split = match &**arr {
        Term::Write(a, i, e) => Formula::Or(vec![
            Formula::And(vec![Formula::eq((**i).clone(), j.clone()), with(e)]),
            Formula::And(vec![
                Formula::ne((**i).clone(), j.clone()),
                with(&Term::read((**a).clone(), j.clone())),
            ]),
        ]),
        Term::IntervalWrite { array, lo, hi, value } => {
            let inside = Formula::And(vec![
                Formula::le((**lo).clone(), j.clone()),
                Formula::le(j.clone(), (**hi).clone()),
            ]);
            Formula::Or(vec![
                Formula::And(vec![inside.clone(), with(value)]),
                Formula::And(vec![
                    Formula::Not(Box::new(inside)),
                    with(&Term::read((**array).clone(), j.clone())),
                ]),
            ])
        }
        Term::CondWrite { array, var, cond, value } => {
            let at_j = substitute(cond, &Substitution::new().with(var, j.clone()))
                .expect("index binder instantiated with index term");
            Formula::Or(vec![
                Formula::And(vec![at_j.clone(), with(value)]),
                Formula::And(vec![
                    Formula::Not(Box::new(at_j)),
                    with(&Term::read((**array).clone(), j.clone())),
                ]),
            ])
        }
        _ => unreachable!(),
    };
    reduce_read_over_write(&split)
}

/// Eliminates every `select` over a write by case splitting on the index.
pub fn reduce_read_over_write(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(..) => reduce_atom(f),
        Formula::Not(g) => Formula::Not(Box::new(reduce_read_over_write(g))),
        Formula::And(gs) => Formula::And(gs.iter().map(reduce_read_over_write).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(reduce_read_over_write).collect()),
        Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(reduce_read_over_write(g))),
        Formula::Forall(vs, g) => Formula::Forall(vs.clone(), Box::new(reduce_read_over_write(g))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Signature, Sort, Var};

    #[test]
    fn point_write_splits_on_index() {
        let mut sig = Signature::default();
        sig.enums.insert("loc".into(), vec!["I".into(), "R".into(), "W".into(), "C".into()]);
        let a = Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))));
        let (i, j) = (Var::index("i"), Var::index("j"));
        let r = sig.enum_const("loc", "R").unwrap();
        let c = sig.enum_const("loc", "C").unwrap();
        let f = Formula::eq(Term::read(Term::write(Term::var(&a), Term::var(&i), r), Term::var(&j)), c);
        assert_eq!(
            reduce_read_over_write(&f).to_string(),
            "(or (and (= i j) (= R C)) (and (distinct i j) (= (select a j) C)))"
        );
    }

    #[test]
    fn interval_write_splits_on_range() {
        let a = Var::new("a", Sort::Array(Box::new(Sort::Int)));
        let (i, k, e) = (Var::index("I"), Var::index("k"), Var::index("e"));
        let w = Term::interval_write(Term::var(&a), Term::var(&i), Term::offset(Term::var(&e), -1), Term::Int(0));
        let f = Formula::eq(Term::read(w, Term::var(&k)), Term::Int(0));
        assert_eq!(
            reduce_read_over_write(&f).to_string(),
            "(or (and (and (<= I k) (<= k (+ e -1))) (= 0 0)) \
             (and (not (and (<= I k) (<= k (+ e -1)))) (= (select a k) 0)))"
        );
    }

    #[test]
    fn no_write_is_identity() {
        let a = Var::new("a", Sort::Array(Box::new(Sort::Int)));
        let j = Var::index("j");
        let f = Formula::eq(Term::read(Term::var(&a), Term::var(&j)), Term::Int(3));
        assert_eq!(reduce_read_over_write(&f), f);
    }

    #[test]
    fn nested_writes_fully_reduced() {
        let a = Var::new("a", Sort::Array(Box::new(Sort::Int)));
        let (i, j, k) = (Var::index("i"), Var::index("j"), Var::index("k"));
        let w = Term::write(Term::write(Term::var(&a), Term::var(&i), Term::Int(1)), Term::var(&j), Term::Int(2));
        let f = Formula::lt(Term::read(w.clone(), Term::var(&k)), Term::read(w, Term::var(&i)));
        let g = reduce_read_over_write(&f);
        let mut writes = 0;
        g.visit_terms(&mut |t| writes += t.is_write() as usize);
        assert_eq!(writes, 0);
    }
}
