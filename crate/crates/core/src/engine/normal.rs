//! Disjunctive normal form and normalization of frontier cubes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::logic::{complement_atom, simplify, substitute, Formula, Rel, Substitution, Term, Var};

fn clashes(cube: &[Formula], lit: &Formula) -> bool {
    match lit {
        Formula::False => true,
        Formula::Atom(rel, l, r) => cube.contains(&complement_atom(*rel, l, r)),
        _ => false,
    }
}

type Prune<'a> = &'a dyn Fn(&[Formula]) -> bool;

fn add(cube: &[Formula], lit: &Formula, keep: Prune<'_>) -> Option<Vec<Formula>> {
    if clashes(cube, lit) {
        return None;
    }
    if matches!(lit, Formula::True) || cube.contains(lit) {
        return Some(cube.to_vec());
    }
    let mut out = cube.to_vec();
    out.push(lit.clone());
    keep(&out).then_some(out)
}

/// Cubes of a quantifier-free NNF formula. Partial cubes that clash
/// syntactically or fail `keep` are dropped as soon as they appear. `None` once
/// more than `limit` cubes are produced.
pub(crate) fn dnf(f: &Formula, limit: usize, keep: Prune<'_>) -> Option<Vec<Vec<Formula>>> {
    product(vec![Vec::new()], f, limit, keep)
}

fn product(prefixes: Vec<Vec<Formula>>, f: &Formula, limit: usize, keep: Prune<'_>) -> Option<Vec<Vec<Formula>>> {
    let out: Vec<Vec<Formula>> = match f {
        Formula::True => prefixes,
        Formula::False => Vec::new(),
        Formula::Atom(..) => prefixes.iter().filter_map(|c| add(c, f, keep)).collect(),
        Formula::And(gs) => {
            // literals first keeps the clash pruning early
            let (lits, rest): (Vec<&Formula>, Vec<&Formula>) = gs.iter().partition(|g| matches!(g, Formula::Atom(..)));
            let mut acc = prefixes;
            for g in lits.into_iter().chain(rest) {
                acc = product(acc, g, limit, keep)?;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Formula::Or(gs) => {
            let mut acc = Vec::new();
            for g in gs {
                acc.extend(product(prefixes.clone(), g, limit, keep)?);
                if acc.len() > limit {
                    return None;
                }
            }
            acc
        }
        // callers pass quantifier-free NNF
        _ => return None,
    };
    (out.len() <= limit).then_some(out)
}

fn mentions(t: &Term, v: &Var) -> bool {
    let mut vs = BTreeSet::new();
    t.free_vars_into(&mut vs);
    vs.contains(v)
}

/// Finds `x = t` with `x` a witness not occurring in `t`.
fn solvable_equality(vars: &[Var], lits: &[Formula]) -> Option<(usize, Var, Term)> {
    for (n, l) in lits.iter().enumerate() {
        let Formula::Atom(Rel::Eq, a, b) = l else { continue };
        for (x, t) in [(a, b), (b, a)] {
            if let Term::Var(v) = x {
                if vars.contains(v) && !mentions(t, v) {
                    return Some((n, v.clone(), t.clone()));
                }
            }
        }
    }
    None
}

fn stem(name: &str) -> &str {
    let base = name.split('!').next().unwrap_or(name);
    let trimmed = base.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.is_empty() {
        "i"
    } else {
        trimmed
    }
}

/// Drops enum disequalities implied by an equality on the same term, and
/// detects two different constants for one term.
fn enum_reduce(lits: Vec<Formula>) -> Option<Vec<Formula>> {
    let mut fixed: BTreeMap<&Term, &Term> = BTreeMap::new();
    for l in &lits {
        if let Formula::Atom(Rel::Eq, a, b) = l {
            for (x, c) in [(a, b), (b, a)] {
                if let Term::EnumConst { .. } = c {
                    if let Some(prev) = fixed.insert(x, c) {
                        if prev != c {
                            return None;
                        }
                    }
                }
            }
        }
    }
    let keep: Vec<bool> = lits
        .iter()
        .map(|l| match l {
            Formula::Atom(Rel::Ne, a, b) => ![(a, b), (b, a)]
                .iter()
                .any(|(x, c)| matches!(c, Term::EnumConst { .. }) && fixed.get(x).is_some_and(|k| k != c)),
            _ => true,
        })
        .collect();
    Some(lits.into_iter().zip(keep).filter(|(_, k)| *k).map(|(l, _)| l).collect())
}

/// Simplifies `∃vars ⋀lits` and renames its witnesses canonically. `None` when
/// the cube is trivially inconsistent.
pub(crate) fn normalize_cube(vars: &[Var], lits: Vec<Formula>, taken: &BTreeSet<String>) -> Option<Formula> {
    let mut vars = vars.to_vec();
    let mut lits = lits;
    while let Some((n, v, t)) = solvable_equality(&vars, &lits) {
        lits.remove(n);
        let s = Substitution::new().with(&v, t);
        lits = lits.iter().map(|l| substitute(l, &s).expect("sort-preserving")).collect();
        vars.retain(|x| *x != v);
    }
    let mut out: Vec<Formula> = Vec::new();
    let mut seen = HashSet::new();
    for l in &lits {
        match simplify(l) {
            Formula::True => {}
            Formula::False => return None,
            s => {
                if clashes(&out, &s) {
                    return None;
                }
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
    }
    let mut out = enum_reduce(out)?;
    let mut used = BTreeSet::new();
    for l in &out {
        l.free_vars_into(&mut used);
    }
    vars.retain(|v| used.contains(v));
    // order witnesses by their first use in a name-independent literal order
    let blank: Substitution = vars.iter().map(|v| (v.clone(), Term::Var(Var::new("_", v.sort.clone())))).collect();
    let mut keyed: Vec<(Formula, Formula)> = out
        .drain(..)
        .map(|l| (substitute(&l, &blank).expect("sort-preserving"), l))
        .collect();
    keyed.sort();
    let mut order: Vec<Var> = Vec::new();
    for (_, l) in &keyed {
        let mut fv = Vec::new();
        l.visit_terms(&mut |t| {
            if let Term::Var(v) = t {
                if vars.contains(v) && !fv.contains(v) {
                    fv.push(v.clone());
                }
            }
        });
        for v in fv {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    let renamed: Vec<Var> = order
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let mut name = format!("{}{k}", stem(&v.name));
            while taken.contains(&name) {
                name.insert(0, '_');
            }
            Var::new(name, v.sort.clone())
        })
        .collect();
    let s: Substitution = order.iter().cloned().zip(renamed.iter().map(Term::var)).collect();
    let mut lits: Vec<Formula> = keyed.into_iter().map(|(_, l)| substitute(&l, &s).expect("sort-preserving")).collect();
    lits.sort();
    Some(Formula::exists(renamed, Formula::and(lits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Signature, Sort};

    #[test]
    fn dnf_prunes_clashes() {
        let (x, y) = (Var::index("x"), Var::index("y"));
        let eq = Formula::eq(Term::var(&x), Term::var(&y));
        let f = Formula::and(vec![
            eq.clone(),
            Formula::or(vec![Formula::ne(Term::var(&x), Term::var(&y)), Formula::lt(Term::var(&x), Term::var(&y))]),
        ]);
        let cubes = dnf(&f, 100, &|_| true).unwrap();
        assert_eq!(cubes.len(), 1);
        assert_eq!(cubes[0].len(), 2);
    }

    #[test]
    fn witnesses_renamed_independently_of_input_names() {
        let mut sig = Signature::default();
        sig.enums.insert("loc".into(), vec!["I".into(), "C".into()]);
        let a = Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))));
        let c = sig.enum_const("loc", "C").unwrap();
        let build = |n1: &str, n2: &str, flip: bool| {
            let (u, v) = (Var::index(n1), Var::index(n2));
            let mut lits = vec![
                Formula::eq(Term::read(Term::var(&a), Term::var(&v)), c.clone()),
                Formula::lt(Term::var(&u), Term::var(&v)),
                Formula::eq(Term::read(Term::var(&a), Term::var(&u)), c.clone()),
            ];
            if flip {
                lits.reverse();
            }
            normalize_cube(&[u, v], lits, &BTreeSet::new()).unwrap()
        };
        let f = build("i!3", "j!9", false);
        assert_eq!(f, build("i!77", "j!1", true));
        assert_eq!(f.split_exists().0.iter().map(|v| v.name.as_str()).collect::<Vec<_>>(), ["i0", "j1"]);
    }

    #[test]
    fn equalities_on_witnesses_are_eliminated() {
        let (i, j) = (Var::index("i"), Var::index("J"));
        let a = Var::new("a", Sort::Array(Box::new(Sort::Int)));
        let lits = vec![
            Formula::eq(Term::var(&i), Term::offset(Term::var(&j), 1)),
            Formula::ne(Term::read(Term::var(&a), Term::var(&i)), Term::Int(0)),
        ];
        let f = normalize_cube(&[i], lits, &BTreeSet::new()).unwrap();
        assert_eq!(f.to_string(), "(distinct 0 (select a (+ J 1)))");
    }
}
