//! Safety problems `⟨v, I, {τh}, U⟩`, transition shapes and their textual form.

mod parse;
mod print;
pub mod sexp;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::logic::{check_formula, check_term, Formula, LogicError, Signature, Sort, Term, Var};
use crate::solver::Theory;

pub use parse::parse_system;
pub use print::print_system;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("{line}:{col}: expected {expected}")]
    Parse { line: usize, col: usize, expected: String },
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("transition {0}: {1}")]
    Shape(String, String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    /// `∃i (φ ∧ v' = F)`.
    Functional,
    /// `∃i (φ ∧ ∀k ψ ∧ v' = F)`.
    UniversallyGuarded,
    /// `φ(v) ∧ v' = F(v)` with no index quantifiers.
    Ground,
    /// Summary of `n` iterations of a ground loop.
    Accelerated,
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionKind::Functional => "functional",
            TransitionKind::UniversallyGuarded => "universally-guarded",
            TransitionKind::Ground => "ground",
            TransitionKind::Accelerated => "accelerated",
        })
    }
}

/// The universal conjunct `∀var. body` of a guard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universal {
    pub var: Var,
    pub body: Formula,
}

impl Universal {
    pub fn formula(&self) -> Formula {
        Formula::forall(vec![self.var.clone()], self.body.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    /// Existentially quantified index parameters.
    pub params: Vec<Var>,
    /// Quantifier-free guard.
    pub guard: Formula,
    pub universal: Option<Universal>,
    /// One entry per state variable, in declaration order.
    pub updates: Vec<(Var, Term)>,
    /// Name of the loop this transition summarizes.
    pub accelerates: Option<String>,
}

impl Transition {
    pub fn kind(&self) -> TransitionKind {
        if self.accelerates.is_some() {
            TransitionKind::Accelerated
        } else if self.universal.is_some() {
            TransitionKind::UniversallyGuarded
        } else if self.params.is_empty() {
            TransitionKind::Ground
        } else {
            TransitionKind::Functional
        }
    }

    pub fn update(&self, v: &str) -> Option<&Term> {
        self.updates.iter().find(|(x, _)| x.name == v).map(|(_, t)| t)
    }

    /// The guard including its universal conjunct.
    pub fn full_guard(&self) -> Formula {
        match &self.universal {
            Some(u) => Formula::and(vec![self.guard.clone(), u.formula()]),
            None => self.guard.clone(),
        }
    }

    /// Whether `v` is left unchanged.
    pub fn is_identity(&self, v: &Var) -> bool {
        self.update(&v.name) == Some(&Term::Var(v.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyProblem {
    pub name: String,
    pub theory: Theory,
    pub sig: Signature,
    /// Enum sorts in declaration order.
    pub enum_order: Vec<String>,
    /// State variables in declaration order.
    pub vars: Vec<Var>,
    pub init: Formula,
    pub transitions: Vec<Transition>,
    pub unsafe_: Formula,
}

impl SafetyProblem {
    pub fn var(&self, name: &str) -> Option<&Var> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn transition(&self, name: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.name == name)
    }

    /// Numerals occurring anywhere in the problem.
    pub fn numerals(&self) -> BTreeSet<i64> {
        let mut out = BTreeSet::new();
        let mut visit = |f: &Formula| {
            f.visit_terms(&mut |t| {
                if let Term::Int(n) = t {
                    out.insert(*n);
                }
            })
        };
        visit(&self.init);
        visit(&self.unsafe_);
        for t in &self.transitions {
            visit(&t.full_guard());
            for (_, u) in &t.updates {
                visit(&Formula::eq(u.clone(), u.clone()));
            }
        }
        out
    }
}

/// Determines the shape of a parsed or generated transition.
pub fn classify_transition(t: &Transition) -> Result<TransitionKind, SystemError> {
    let shape = |msg: &str| SystemError::Shape(t.name.clone(), msg.to_string());
    if !t.guard.is_quantifier_free() {
        return Err(shape("quantifier inside the guard"));
    }
    if let Some(u) = &t.universal {
        if !u.body.is_quantifier_free() {
            return Err(shape("nested quantifier under the universal"));
        }
    }
    for (_, term) in &t.updates {
        let mut bad = false;
        term.visit(&mut |s| {
            if let Term::CondWrite { cond, .. } = s {
                bad |= !cond.is_quantifier_free();
            }
        });
        if bad {
            return Err(shape("quantifier inside an update"));
        }
    }
    Ok(t.kind())
}

fn has_offset(f: &Formula) -> bool {
    let mut found = false;
    f.visit_terms(&mut |t| found |= matches!(t, Term::Offset(..)));
    found
}

fn bad_subscript(f: &Formula) -> Option<Term> {
    let mut found = None;
    f.visit_terms(&mut |t| {
        let i = match t {
            Term::Read(_, i) | Term::Write(_, i, _) => i,
            _ => return,
        };
        if found.is_none() && check_term(i).map(|s| s != Sort::Index).unwrap_or(true) {
            found = Some(t.clone());
        }
    });
    found
}

fn matrix_of(f: &Formula, universal: bool) -> &Formula {
    match (f, universal) {
        (Formula::Forall(_, g), true) | (Formula::Exists(_, g), false) => g,
        _ => f,
    }
}

/// Checks the invariants of a problem: sorts, quantifier shapes, frames and theory restrictions.
pub fn validate(p: &SafetyProblem) -> Result<(), SystemError> {
    let invalid = |msg: String| Err(SystemError::Validation(msg));
    let mut seen = BTreeSet::new();
    for v in &p.vars {
        if !seen.insert(&v.name) {
            return invalid(format!("duplicate declaration of {}", v.name));
        }
        if let Sort::Array(e) = &v.sort {
            if !matches!(**e, Sort::Enum(_) | Sort::Int) {
                return invalid(format!("array {} must hold enum or int elements", v.name));
            }
        }
    }
    for (name, consts) in &p.sig.enums {
        let distinct: BTreeSet<_> = consts.iter().collect();
        if consts.is_empty() || distinct.len() != consts.len() {
            return invalid(format!("enum sort {name} needs distinct constants"));
        }
    }
    check_formula(&p.init)?;
    check_formula(&p.unsafe_)?;
    if !matrix_of(&p.init, true).is_quantifier_free() {
        return invalid("init must be universal or ground".into());
    }
    if !matrix_of(&p.unsafe_, false).is_quantifier_free() {
        return invalid("unsafe must be existential or ground".into());
    }
    let mut names = BTreeSet::new();
    for t in &p.transitions {
        if !names.insert(&t.name) {
            return invalid(format!("duplicate transition {}", t.name));
        }
        classify_transition(t)?;
        check_formula(&t.full_guard())?;
        if t.updates.len() != p.vars.len() || t.updates.iter().zip(&p.vars).any(|((x, _), v)| x != v) {
            return Err(SystemError::Shape(t.name.clone(), "update must assign every state variable once".into()));
        }
        for (v, term) in &t.updates {
            let s = check_term(term)?;
            if !s.compatible(&v.sort) || matches!(v.sort, Sort::Array(_)) != matches!(s, Sort::Array(_)) {
                return Err(SystemError::Shape(t.name.clone(), format!("{} := {term} changes sort", v.name)));
            }
        }
    }
    if p.theory == Theory::Simple {
        let mut all = vec![p.init.clone(), p.unsafe_.clone()];
        for t in &p.transitions {
            all.push(t.full_guard());
            all.extend(t.updates.iter().map(|(_, u)| Formula::eq(u.clone(), u.clone())));
        }
        for f in &all {
            if has_offset(f) {
                return invalid(format!("arithmetic on indexes in simple theory: {f}"));
            }
            if let Some(t) = bad_subscript(f) {
                return invalid(format!("non-index subscript in simple theory: {t}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
