//! Monotonic abstraction of universal guards.
//!
//! At run time, `∃i ∀k ψ` becomes `∃i ⋀_{t∈X} ψ(t)`. As a preprocessing step,
//! a universally guarded transition instead loses its universal and moves every
//! index violating it to a `crashed` location; quantifiers elsewhere are then
//! relativized to the indexes that have not crashed.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::logic::{index_terms, instantiate_universals, Formula, LogicError, Sort, Substitution, Term, Var};
use crate::logic::{fresh_var, substitute};
use crate::solver::Theory;
use crate::system::{SafetyProblem, SystemError, Transition, TransitionKind};

pub const CRASHED: &str = "crashed";

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("transition {0} has no universal guard")]
    NotUniversallyGuarded(String),
    #[error("the crash transform needs an array over an enumerated sort")]
    NoLocationArray,
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstSetMode {
    Default,
    AllVars,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    UserProvided,
    Heuristic(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstantiationSet {
    pub terms: Vec<Term>,
    pub origin: Origin,
}

fn push_unique(out: &mut Vec<Term>, t: Term) {
    if !out.contains(&t) {
        out.push(t);
    }
}

fn universal_terms(f: &Formula, out: &mut BTreeSet<Term>) {
    match f {
        Formula::Forall(..) => out.extend(index_terms(f)),
        Formula::Not(g) | Formula::Exists(_, g) => universal_terms(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| universal_terms(g, out)),
        _ => {}
    }
}

/// The witnesses of `∃i ∀k ψ`, in prefix order. Under difference arithmetic the
/// index terms of the universal part are added, so bounds like `k := a_length`
/// are not lost.
pub fn default_instantiation_set(f: &Formula, theory: Theory) -> InstantiationSet {
    let (vs, matrix) = f.split_exists();
    let mut terms: Vec<Term> = vs.iter().filter(|v| v.sort == Sort::Index).map(Term::var).collect();
    if theory == Theory::DiffArith {
        let mut extra = BTreeSet::new();
        universal_terms(matrix, &mut extra);
        extra.into_iter().for_each(|t| push_unique(&mut terms, t));
    }
    if terms.is_empty() {
        terms.push(Term::Var(fresh_var("c", Sort::Index)));
    }
    InstantiationSet {
        terms,
        origin: Origin::Default,
    }
}

/// Witnesses plus every index term of the formula.
pub fn all_vars_instantiation_set(f: &Formula) -> InstantiationSet {
    let (vs, matrix) = f.split_exists();
    let mut terms: Vec<Term> = vs.iter().filter(|v| v.sort == Sort::Index).map(Term::var).collect();
    index_terms(matrix).into_iter().for_each(|t| push_unique(&mut terms, t));
    if terms.is_empty() {
        terms.push(Term::Var(fresh_var("c", Sort::Index)));
    }
    InstantiationSet {
        terms,
        origin: Origin::Heuristic("all-vars"),
    }
}

pub fn instantiation_set(f: &Formula, theory: Theory, mode: InstSetMode) -> InstantiationSet {
    match mode {
        InstSetMode::Default => default_instantiation_set(f, theory),
        InstSetMode::AllVars => all_vars_instantiation_set(f),
    }
}

/// `∃i ∀k ψ` to `∃i ⋀_{t∈X} ψ(t)`.
pub fn abstract_formula(f: &Formula, x: &InstantiationSet) -> Result<Formula, AbstractionError> {
    let (vs, matrix) = f.split_exists();
    let inst = instantiate_universals(matrix, &x.terms)?;
    Ok(Formula::exists(vs, inst))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractedTransition {
    pub base: String,
    pub result: Transition,
    pub added_crash_sort: bool,
}

/// The array whose cells record crashes: the first array over an enumerated sort.
pub fn location_array(p: &SafetyProblem) -> Option<&Var> {
    p.vars.iter().find(|v| matches!(v.sort.element(), Some(Sort::Enum(_))))
}

struct Crash {
    array: Var,
    marker: Term,
}

impl Crash {
    fn alive(&self, v: &Var) -> Formula {
        Formula::ne(Term::read(Term::var(&self.array), Term::var(v)), self.marker.clone())
    }

    fn relativize(&self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Atom(..) => f.clone(),
            Formula::Not(g) => Formula::not(self.relativize(g)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| self.relativize(g)).collect()),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| self.relativize(g)).collect()),
            Formula::Exists(vs, g) => {
                let mut parts: Vec<Formula> = vs.iter().map(|v| self.alive(v)).collect();
                parts.push(self.relativize(g));
                Formula::exists(vs.clone(), Formula::and(parts))
            }
            Formula::Forall(vs, g) => {
                let mut parts: Vec<Formula> = vs.iter().map(|v| Formula::not(self.alive(v))).collect();
                parts.push(self.relativize(g));
                Formula::forall(vs.clone(), Formula::or(parts))
            }
        }
    }

    fn relativize_transition(&self, t: &Transition) -> Transition {
        let mut out = t.clone();
        let mut guard: Vec<Formula> = t.params.iter().filter(|v| v.sort == Sort::Index).map(|v| self.alive(v)).collect();
        guard.push(t.guard.clone());
        out.guard = Formula::and(guard);
        if let Some(u) = &mut out.universal {
            u.body = Formula::or(vec![Formula::not(self.alive(&u.var)), u.body.clone()]);
        }
        out
    }

    /// Drops the universal guard and crashes every index violating it.
    fn transform(&self, t: &Transition) -> Result<Transition, AbstractionError> {
        let u = t
            .universal
            .as_ref()
            .ok_or_else(|| AbstractionError::NotUniversallyGuarded(t.name.clone()))?;
        let mut out = self.relativize_transition(&Transition { universal: None, ..t.clone() });
        // the instance of ψ at the witnesses is kept
        let mut at_params = vec![out.guard.clone()];
        for p in &t.params {
            at_params.push(substitute(&u.body, &Substitution::new().with(&u.var, Term::var(p)))?);
        }
        out.guard = Formula::and(at_params);
        let k = fresh_var("k", Sort::Index);
        let body_k = substitute(&u.body, &Substitution::new().with(&u.var, Term::var(&k)))?;
        let mut violates: Vec<Formula> = t.params.iter().map(|p| Formula::ne(Term::var(&k), Term::var(p))).collect();
        violates.push(Formula::not(body_k));
        let cond = Formula::and(violates);
        for (v, term) in &mut out.updates {
            if *v == self.array {
                *term = Term::CondWrite {
                    array: Box::new(term.clone()),
                    var: k.clone(),
                    cond: Box::new(cond.clone()),
                    value: Box::new(self.marker.clone()),
                };
            }
        }
        Ok(out)
    }
}

fn crash_setup(p: &SafetyProblem) -> Result<(SafetyProblem, Crash, bool), AbstractionError> {
    let array = location_array(p).ok_or(AbstractionError::NoLocationArray)?.clone();
    let Some(Sort::Enum(sort)) = array.sort.element().cloned() else {
        return Err(AbstractionError::NoLocationArray);
    };
    let mut q = p.clone();
    let consts = q.sig.enums.get_mut(&sort).unwrap();
    let added = !consts.iter().any(|c| c == CRASHED);
    if added {
        consts.push(CRASHED.to_string());
    }
    let marker = q.sig.enum_const(&sort, CRASHED).unwrap();
    Ok((q, Crash { array, marker }, added))
}

/// Transforms one universally guarded transition, returning the problem over
/// the extended location sort in which it lives.
pub fn abstract_transition(t: &Transition, p: &SafetyProblem) -> Result<(AbstractedTransition, SafetyProblem), AbstractionError> {
    if t.kind() != TransitionKind::UniversallyGuarded && t.universal.is_none() {
        return Err(AbstractionError::NotUniversallyGuarded(t.name.clone()));
    }
    let (q, crash, added) = crash_setup(p)?;
    let result = crash.transform(t)?;
    let q = relativize_problem(q, &crash, &[(t.name.clone(), result.clone())]);
    Ok((
        AbstractedTransition {
            base: t.name.clone(),
            result,
            added_crash_sort: added,
        },
        q,
    ))
}

fn relativize_problem(mut q: SafetyProblem, crash: &Crash, replaced: &[(String, Transition)]) -> SafetyProblem {
    q.init = crash.relativize(&q.init);
    q.unsafe_ = crash.relativize(&q.unsafe_);
    q.transitions = q
        .transitions
        .iter()
        .map(|t| match replaced.iter().find(|(n, _)| *n == t.name) {
            Some((_, r)) => r.clone(),
            None => crash.relativize_transition(t),
        })
        .collect();
    q
}

/// Applies the crash transform to every universally guarded transition.
pub fn transform_problem(p: &SafetyProblem) -> Result<(SafetyProblem, Vec<AbstractedTransition>), AbstractionError> {
    let (q, crash, added) = crash_setup(p)?;
    let mut done = Vec::new();
    for t in p.transitions.iter().filter(|t| t.universal.is_some()) {
        done.push(AbstractedTransition {
            base: t.name.clone(),
            result: crash.transform(t)?,
            added_crash_sort: added,
        });
    }
    let replaced: Vec<(String, Transition)> = done.iter().map(|a| (a.base.clone(), a.result.clone())).collect();
    Ok((relativize_problem(q, &crash, &replaced), done))
}

/// Relativizes a formula of the original problem to the non-crashed indexes of
/// the transformed one.
pub fn relativize_formula(p: &SafetyProblem, f: &Formula) -> Result<Formula, AbstractionError> {
    let (_, crash, _) = crash_setup(p)?;
    Ok(crash.relativize(f))
}

#[cfg(test)]
mod tests;
