use std::collections::BTreeSet;

use super::{substitute, Formula, LogicError, Sort, Substitution, Term, Var};

/// Replaces every `∀k.ψ(k)` of an NNF formula by `⋀_{t∈X} ψ(t)`.
pub fn instantiate_universals(f: &Formula, terms: &[Term]) -> Result<Formula, LogicError> {
    if terms.is_empty() {
        return Err(LogicError::EmptyInstantiationSet);
    }
    if let Some(t) = terms.iter().find(|t| !t.sort().is_numeric()) {
        return Err(LogicError::SortMismatch(format!("instantiation term {t} is not an index")));
    }
    inst(f, terms)
}

fn inst(f: &Formula, terms: &[Term]) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(..) => f.clone(),
        Formula::Not(g) => Formula::Not(Box::new(inst(g, terms)?)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| inst(g, terms)).collect::<Result<_, _>>()?),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| inst(g, terms)).collect::<Result<_, _>>()?),
        Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(inst(g, terms)?)),
        Formula::Forall(vs, g) => {
            let body = inst(g, terms)?;
            let mut out = Vec::new();
            for tuple in tuples(vs, terms) {
                let s: Substitution = vs.iter().cloned().zip(tuple).collect();
                out.push(substitute(&body, &s)?);
            }
            Formula::And(out)
        }
    })
}

fn tuples(vars: &[Var], terms: &[Term]) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
    for _ in vars {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                terms.iter().map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    p
                })
            })
            .collect();
    }
    acc
}

/// Index-sorted terms occurring in `f` outside binders on them: index variables,
/// offsets of index terms, and numerals used as subscripts or compared with indexes.
pub fn index_terms(f: &Formula) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    collect(f, &BTreeSet::new(), &mut out);
    out
}

fn mentions_bound(t: &Term, bound: &BTreeSet<Var>) -> bool {
    let mut vs = BTreeSet::new();
    t.free_vars_into(&mut vs);
    vs.iter().any(|v| bound.contains(v))
}

fn collect_term(t: &Term, bound: &BTreeSet<Var>, out: &mut BTreeSet<Term>) {
    t.visit(&mut |s: &Term| match s {
        Term::Var(v) if v.sort == Sort::Index && !bound.contains(v) => {
            out.insert(s.clone());
        }
        Term::Offset(..) if s.sort() == Sort::Index && !mentions_bound(s, bound) => {
            out.insert(s.clone());
        }
        Term::Read(_, i) | Term::Write(_, i, _) => {
            if let Term::Int(_) = **i {
                out.insert((**i).clone());
            }
        }
        _ => {}
    });
}

fn collect(f: &Formula, bound: &BTreeSet<Var>, out: &mut BTreeSet<Term>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(_, l, r) => {
            collect_term(l, bound, out);
            collect_term(r, bound, out);
            // numerals compared against index terms
            for (a, b) in [(l, r), (r, l)] {
                if let Term::Int(_) = a {
                    if b.sort() == Sort::Index {
                        out.insert(a.clone());
                    }
                }
            }
        }
        Formula::Not(g) => collect(g, bound, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect(g, bound, out)),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let mut b = bound.clone();
            b.extend(vs.iter().cloned());
            collect(g, &b, out);
        }
    }
}
