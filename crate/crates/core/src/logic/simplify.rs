use std::collections::HashSet;

use super::{Formula, Rel, Term};

/// Folds nested offsets and offsets of numerals.
pub fn normalize_term(t: &Term) -> Term {
    match t {
        Term::Offset(b, k) => {
            let b = normalize_term(b);
            match b {
                _ if *k == 0 => b,
                Term::Int(n) => Term::Int(n + k),
                Term::Offset(inner, j) => {
                    if j + k == 0 {
                        *inner
                    } else {
                        Term::Offset(inner, j + k)
                    }
                }
                b => Term::Offset(Box::new(b), *k),
            }
        }
        Term::Var(_) | Term::EnumConst { .. } | Term::Int(_) => t.clone(),
        Term::Read(a, i) => Term::Read(Box::new(normalize_term(a)), Box::new(normalize_term(i))),
        Term::Write(a, i, e) => Term::Write(
            Box::new(normalize_term(a)),
            Box::new(normalize_term(i)),
            Box::new(normalize_term(e)),
        ),
        Term::IntervalWrite { array, lo, hi, value } => Term::IntervalWrite {
            array: Box::new(normalize_term(array)),
            lo: Box::new(normalize_term(lo)),
            hi: Box::new(normalize_term(hi)),
            value: Box::new(normalize_term(value)),
        },
        Term::CondWrite { array, var, cond, value } => Term::CondWrite {
            array: Box::new(normalize_term(array)),
            var: var.clone(),
            cond: Box::new(simplify(cond)),
            value: Box::new(normalize_term(value)),
        },
    }
}

/// Splits a numeric term into `(base, offset)`; the base is `None` for numerals.
pub(crate) fn split_offset(t: &Term) -> (Option<&Term>, i64) {
    match t {
        Term::Int(n) => (None, *n),
        Term::Offset(b, k) => {
            let (base, j) = split_offset(b);
            (base, j + k)
        }
        t => (Some(t), 0),
    }
}

fn decide(rel: Rel, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match rel {
        Rel::Eq => ord == Equal,
        Rel::Ne => ord != Equal,
        Rel::Lt => ord == Less,
        Rel::Le => ord != Greater,
    }
}

pub(crate) fn simplify_atom(rel: Rel, l: &Term, r: &Term) -> Formula {
    let l = normalize_term(l);
    let r = normalize_term(r);
    if let (Term::EnumConst { value: a, .. }, Term::EnumConst { value: b, .. }) = (&l, &r) {
        return bool_formula(decide(rel, a.cmp(b)));
    }
    if l == r {
        return bool_formula(matches!(rel, Rel::Eq | Rel::Le));
    }
    if l.sort().is_numeric() && r.sort().is_numeric() {
        let (bl, kl) = split_offset(&l);
        let (br, kr) = split_offset(&r);
        if bl == br {
            return bool_formula(decide(rel, kl.cmp(&kr)));
        }
    }
    match rel {
        Rel::Eq | Rel::Ne if r < l => Formula::Atom(rel, r, l),
        _ => Formula::Atom(rel, l, r),
    }
}

fn bool_formula(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// Constant folding, flattening, and duplicate removal. Preserves semantics.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(rel, l, r) => simplify_atom(*rel, l, r),
        Formula::Not(g) => Formula::not(simplify(g)),
        Formula::And(gs) => {
            let parts = dedup(gs.iter().map(simplify));
            Formula::and(parts)
        }
        Formula::Or(gs) => {
            let parts = dedup(gs.iter().map(simplify));
            Formula::or(parts)
        }
        Formula::Exists(vs, g) => {
            let body = simplify(g);
            let free = body.free_vars();
            let vs: Vec<_> = vs.iter().filter(|v| free.contains(v)).cloned().collect();
            Formula::exists(vs, body)
        }
        Formula::Forall(vs, g) => {
            let body = simplify(g);
            let free = body.free_vars();
            let vs: Vec<_> = vs.iter().filter(|v| free.contains(v)).cloned().collect();
            Formula::forall(vs, body)
        }
    }
}

fn dedup(parts: impl Iterator<Item = Formula>) -> Vec<Formula> {
    let mut seen = HashSet::new();
    parts.filter(|p| seen.insert(p.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Var;

    #[test]
    fn offsets_fold() {
        let j = Var::index("J");
        let t = Term::Offset(Box::new(Term::Offset(Box::new(Term::var(&j)), 1)), -1);
        assert_eq!(normalize_term(&t), Term::var(&j));
        assert_eq!(normalize_term(&Term::Offset(Box::new(Term::Int(3)), 2)), Term::Int(5));
    }

    #[test]
    fn trivial_atoms_decided() {
        let j = Var::index("J");
        assert_eq!(simplify_atom(Rel::Lt, &Term::var(&j), &Term::offset(Term::var(&j), 1)), Formula::True);
        assert_eq!(simplify_atom(Rel::Ne, &Term::var(&j), &Term::var(&j)), Formula::False);
        assert_eq!(simplify_atom(Rel::Le, &Term::Int(3), &Term::Int(2)), Formula::False);
    }

    #[test]
    fn unused_binders_dropped() {
        let (i, j) = (Var::index("i"), Var::index("j"));
        let f = Formula::exists(vec![i.clone(), j.clone()], Formula::lt(Term::var(&j), Term::Int(3)));
        assert_eq!(simplify(&f).to_string(), "(exists (j) (< j 3))");
    }
}
