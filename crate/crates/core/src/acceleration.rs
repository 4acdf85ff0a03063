//! Acceleration of ground counter loops.
//!
//! A loop `G ∧ c ≠ b ∧ C(a[c]) → c' = c+1, a' = a[c := e]` is summarized by a
//! transition with an end index `x > c`: `∀k (c ≤ k < x → k ≠ b ∧ C(a[k]))`,
//! `c' = x`, `a' = a[c..x-1 := e]`. Running it with `x = c+n` is the same as
//! running the loop `n` times.

use std::collections::BTreeSet;

use crate::logic::{substitute, Formula, Rel, Substitution, Term, Var};
use crate::oracle::{ConcreteState, FiniteInstance, OracleError};
use crate::system::{SafetyProblem, Transition, TransitionKind, Universal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopPattern {
    pub base: String,
    /// `pc = ℓ`, when the loop has a location literal.
    pub pc: Option<(Var, Term)>,
    pub counter: Var,
    pub bound: Term,
    /// Literals that no iteration changes.
    pub invariant: Vec<Formula>,
    /// Literals over cells at the counter.
    pub cell_conditions: Vec<Formula>,
    /// `(array, value)` written at the counter.
    pub write: Option<(Var, Term)>,
}

fn literals(f: &Formula) -> Option<Vec<Formula>> {
    match f {
        Formula::True => Some(Vec::new()),
        Formula::Atom(..) => Some(vec![f.clone()]),
        Formula::And(gs) => gs.iter().map(literals).try_fold(Vec::new(), |mut acc, l| {
            acc.extend(l?);
            Some(acc)
        }),
        _ => None,
    }
}

/// Whether `c` occurs in `t` outside array subscripts of the form `a[c]`.
fn bare_use(t: &Term, c: &Var) -> bool {
    match t {
        Term::Var(v) => v == c,
        Term::Read(a, i) if **i == Term::var(c) => bare_use(a, c),
        Term::Read(a, i) => bare_use(a, c) || bare_use(i, c),
        Term::Offset(b, _) => bare_use(b, c),
        Term::Write(a, i, e) => bare_use(a, c) || bare_use(i, c) || bare_use(e, c),
        _ => {
            let mut vs = BTreeSet::new();
            t.free_vars_into(&mut vs);
            vs.contains(c)
        }
    }
}

fn has_read(t: &Term) -> bool {
    let mut found = false;
    t.visit(&mut |s| found |= matches!(s, Term::Read(..)));
    found
}

/// Recognizes a single-counter loop with stride one.
pub fn match_loop_pattern(t: &Transition) -> Option<LoopPattern> {
    if t.kind() != TransitionKind::Ground {
        return None;
    }
    let lits = literals(&t.guard)?;
    let changed: Vec<&(Var, Term)> = t.updates.iter().filter(|(v, u)| *u != Term::var(v)).collect();
    let counters: Vec<&Var> = changed
        .iter()
        .filter(|(v, u)| v.sort.is_numeric() && *u == Term::offset(Term::var(v), 1))
        .map(|(v, _)| v)
        .collect();
    let [counter] = counters[..] else { return None };
    let counter = counter.clone();
    let mut write = None;
    for (v, u) in &changed {
        if *v == counter {
            continue;
        }
        match u {
            Term::Write(a, i, e) if **a == Term::var(v) && **i == Term::var(&counter) => {
                let mut fv = BTreeSet::new();
                e.free_vars_into(&mut fv);
                if write.is_some() || has_read(e) || fv.iter().any(|x| !t.is_identity(x)) {
                    return None;
                }
                write = Some((v.clone(), (**e).clone()));
            }
            _ => return None,
        }
    }
    let stable = |f: &Formula| f.free_vars().iter().all(|x| t.is_identity(x) || x == &counter);
    let mut bound = None;
    let mut invariant = Vec::new();
    let mut cells = Vec::new();
    let mut pc = None;
    for l in lits {
        let Formula::Atom(rel, lhs, rhs) = &l else { return None };
        let c = Term::var(&counter);
        if *rel == Rel::Ne && (*lhs == c || *rhs == c) {
            let other = if *lhs == c { rhs } else { lhs };
            let mut fv = BTreeSet::new();
            other.free_vars_into(&mut fv);
            if bound.is_some() || has_read(other) || fv.iter().any(|x| !t.is_identity(x)) {
                return None;
            }
            bound = Some(other.clone());
        } else if !stable(&l) || bare_use(lhs, &counter) || bare_use(rhs, &counter) {
            return None;
        } else if l.free_vars().contains(&counter) {
            // reads of a written array would see earlier iterations' writes
            if let Some((a, _)) = &write {
                if l.free_vars().contains(a) {
                    return None;
                }
            }
            cells.push(l);
        } else {
            if let (Rel::Eq, Term::Var(v), k @ (Term::Int(_) | Term::EnumConst { .. })) = (rel, lhs, rhs) {
                pc.get_or_insert((v.clone(), k.clone()));
            }
            invariant.push(l);
        }
    }
    Some(LoopPattern {
        base: t.name.clone(),
        pc,
        counter,
        bound: bound?,
        invariant,
        cell_conditions: cells,
        write,
    })
}

fn unused_name(stem: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(stem) {
        return stem.to_string();
    }
    (1..).map(|n| format!("{stem}{n}")).find(|s| !taken.contains(s)).unwrap()
}

/// The accelerated transition `name+` for a loop pattern, over the state variables `vars`.
pub fn accelerate(pat: &LoopPattern, vars: &[Var]) -> Transition {
    let taken: BTreeSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    let end = Var::new(unused_name("x", &taken), pat.counter.sort.clone());
    let k = Var::new(unused_name("k", &taken), pat.counter.sort.clone());
    let (c, e, kt) = (Term::var(&pat.counter), Term::var(&end), Term::var(&k));
    let to_k = Substitution::new().with(&pat.counter, kt.clone());
    let mut inside = vec![Formula::ne(kt.clone(), pat.bound.clone())];
    inside.extend(
        pat.cell_conditions
            .iter()
            .map(|l| substitute(l, &to_k).expect("cell conditions are well-sorted")),
    );
    let body = Formula::implies(
        Formula::and(vec![Formula::le(c.clone(), kt.clone()), Formula::lt(kt, e.clone())]),
        Formula::and(inside),
    );
    let mut guard = pat.invariant.clone();
    guard.push(Formula::lt(c.clone(), e.clone()));
    let updates = vars
        .iter()
        .map(|v| {
            let u = if *v == pat.counter {
                e.clone()
            } else if let Some((a, val)) = pat.write.as_ref().filter(|(a, _)| a == v) {
                Term::interval_write(Term::var(a), c.clone(), Term::offset(e.clone(), -1), val.clone())
            } else {
                Term::var(v)
            };
            (v.clone(), u)
        })
        .collect();
    Transition {
        name: format!("{}+", pat.base),
        params: vec![end],
        guard: Formula::and(guard),
        universal: Some(Universal { var: k, body }),
        updates,
        accelerates: Some(pat.base.clone()),
    }
}

/// Adds an accelerated transition, placed first, for every loop found.
/// Returns the extended problem and the names of the loops accelerated.
pub fn accelerate_problem(p: &SafetyProblem) -> (SafetyProblem, Vec<String>) {
    let mut fast = Vec::new();
    let mut names = Vec::new();
    for t in &p.transitions {
        if let Some(pat) = match_loop_pattern(t) {
            fast.push(accelerate(&pat, &p.vars));
            names.push(t.name.clone());
        }
    }
    let mut q = p.clone();
    fast.extend(q.transitions);
    q.transitions = fast;
    (q, names)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Composition {
    Equal,
    /// A pre-state and a post-state reached by exactly one of the two relations.
    Differ(ConcreteState, ConcreteState),
}

/// Compares `n` iterations of `base` with `acc` run for `n` steps, on every
/// state of the instance.
pub fn compose_check(inst: &FiniteInstance<'_>, base: &Transition, acc: &Transition, n: usize) -> Result<Composition, OracleError> {
    let end = &acc.params[0];
    let counter = acc
        .updates
        .iter()
        .position(|(_, u)| *u == Term::var(end))
        .expect("accelerated transitions assign the end index to the counter");
    for s in inst.layout.states(inst.budget)? {
        let mut iterated: BTreeSet<ConcreteState> = [s.clone()].into_iter().collect();
        for _ in 0..n {
            iterated = iterated
                .iter()
                .flat_map(|x| inst.successors(base, x).into_iter().map(|(_, y)| y))
                .collect();
        }
        let target = s.vals[counter][0] + n as i64;
        let summarized: BTreeSet<ConcreteState> = inst
            .successors(acc, &s)
            .into_iter()
            .filter(|(params, _)| params[0] == target)
            .map(|(_, y)| y)
            .collect();
        if let Some(w) = iterated.symmetric_difference(&summarized).next() {
            return Ok(Composition::Differ(s, w.clone()));
        }
    }
    Ok(Composition::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::instantiate;
    use crate::system::{classify_transition, parse_system};

    fn init_test() -> SafetyProblem {
        let text = std::fs::read_to_string(format!("{}/../../benchmarks/init_test.abs", env!("CARGO_MANIFEST_DIR"))).unwrap();
        parse_system(&text).unwrap()
    }

    #[test]
    fn patterns_of_init_test() {
        let p = init_test();
        let t1 = match_loop_pattern(p.transition("t1").unwrap()).unwrap();
        assert_eq!(t1.counter.name, "I");
        assert_eq!(t1.bound.to_string(), "L");
        assert_eq!(t1.pc.as_ref().map(|(v, k)| (v.name.as_str(), k.to_string())), Some(("p", "1".into())));
        assert!(t1.cell_conditions.is_empty());
        assert_eq!(t1.write.as_ref().map(|(a, e)| (a.name.as_str(), e.to_string())), Some(("a", "0".into())));
        let t3 = match_loop_pattern(p.transition("t3").unwrap()).unwrap();
        assert_eq!(t3.counter.name, "J");
        assert_eq!(t3.cell_conditions.len(), 1);
        assert!(t3.write.is_none());
        for name in ["t0", "t2", "t4", "t5"] {
            assert!(match_loop_pattern(p.transition(name).unwrap()).is_none(), "{name}");
        }
    }

    #[test]
    fn accelerated_transitions_are_universally_guarded() {
        let p = init_test();
        let (q, names) = accelerate_problem(&p);
        assert_eq!(names, vec!["t1", "t3"]);
        assert_eq!(q.transitions[0].name, "t1+");
        assert_eq!(classify_transition(&q.transitions[0]).unwrap(), TransitionKind::Accelerated);
        assert!(q.transitions[0].universal.is_some());
        assert_eq!(q.transitions[1].update("J").unwrap().to_string(), "x");
    }

    #[test]
    fn one_iteration_matches_on_small_instance() {
        let p = init_test();
        let (q, _) = accelerate_problem(&p);
        let inst = instantiate(&q, 3, 0, 2).unwrap();
        for (b, a) in [("t1", "t1+"), ("t3", "t3+")] {
            let r = compose_check(&inst, q.transition(b).unwrap(), q.transition(a).unwrap(), 1).unwrap();
            assert_eq!(r, Composition::Equal);
        }
    }
}
