//! Sorted first-order syntax over index, enumerated, and integer sorts.
//!
//! Terms and formulae are immutable values. Every transform in this module
//! is a pure function returning a fresh value.

mod inst;
mod nnf;
mod row;
mod simplify;
mod subst;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

pub use inst::{index_terms, instantiate_universals};
pub use nnf::{complement_atom, to_nnf};
pub use row::reduce_read_over_write;
pub use simplify::{normalize_term, simplify};
pub use subst::{substitute, substitute_term, Substitution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("empty instantiation set")]
    EmptyInstantiationSet,
    #[error("unsupported term: {0}")]
    UnsupportedTerm(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Index,
    Int,
    Enum(String),
    Array(Box<Sort>),
}

impl Sort {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Index | Sort::Int)
    }

    pub fn element(&self) -> Option<&Sort> {
        match self {
            Sort::Array(e) => Some(e),
            _ => None,
        }
    }

    /// Two sorts may be compared: equal, or both numeric.
    pub fn compatible(&self, other: &Sort) -> bool {
        self == other || (self.is_numeric() && other.is_numeric())
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Index => write!(f, "index"),
            Sort::Int => write!(f, "int"),
            Sort::Enum(n) => write!(f, "{n}"),
            Sort::Array(e) => write!(f, "(array index {e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var { name: name.into(), sort }
    }

    pub fn index(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Index)
    }
}

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A variable named `base!n` with a run-wide unique counter `n`.
pub fn fresh_var(base: &str, sort: Sort) -> Var {
    let stem = base.split('!').next().unwrap_or(base);
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    Var::new(format!("{stem}!{n}"), sort)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    EnumConst { sort: String, name: String, value: u32 },
    Int(i64),
    /// `base + offset` on a numeric term.
    Offset(Box<Term>, i64),
    Read(Box<Term>, Box<Term>),
    Write(Box<Term>, Box<Term>, Box<Term>),
    /// Writes `value` at every index in `[lo, hi]`.
    IntervalWrite {
        array: Box<Term>,
        lo: Box<Term>,
        hi: Box<Term>,
        value: Box<Term>,
    },
    /// `λvar. if cond then value else array[var]`.
    CondWrite {
        array: Box<Term>,
        var: Var,
        cond: Box<Formula>,
        value: Box<Term>,
    },
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn offset(t: Term, k: i64) -> Term {
        normalize_term(&Term::Offset(Box::new(t), k))
    }

    pub fn read(a: Term, i: Term) -> Term {
        Term::Read(Box::new(a), Box::new(i))
    }

    pub fn write(a: Term, i: Term, e: Term) -> Term {
        Term::Write(Box::new(a), Box::new(i), Box::new(e))
    }

    pub fn interval_write(a: Term, lo: Term, hi: Term, e: Term) -> Term {
        Term::IntervalWrite {
            array: Box::new(a),
            lo: Box::new(lo),
            hi: Box::new(hi),
            value: Box::new(e),
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort.clone(),
            Term::EnumConst { sort, .. } => Sort::Enum(sort.clone()),
            Term::Int(_) => Sort::Int,
            Term::Offset(b, _) => b.sort(),
            Term::Read(a, _) => a.sort().element().cloned().unwrap_or(Sort::Int),
            Term::Write(a, ..) | Term::IntervalWrite { array: a, .. } | Term::CondWrite { array: a, .. } => {
                a.sort()
            }
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// True for writes of any kind.
    pub fn is_write(&self) -> bool {
        matches!(self, Term::Write(..) | Term::IntervalWrite { .. } | Term::CondWrite { .. })
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::EnumConst { .. } | Term::Int(_) => {}
            Term::Offset(b, _) => b.free_vars_into(out),
            Term::Read(a, i) => {
                a.free_vars_into(out);
                i.free_vars_into(out);
            }
            Term::Write(a, i, e) => {
                a.free_vars_into(out);
                i.free_vars_into(out);
                e.free_vars_into(out);
            }
            Term::IntervalWrite { array, lo, hi, value } => {
                array.free_vars_into(out);
                lo.free_vars_into(out);
                hi.free_vars_into(out);
                value.free_vars_into(out);
            }
            Term::CondWrite { array, var, cond, value } => {
                array.free_vars_into(out);
                value.free_vars_into(out);
                let mut inner = BTreeSet::new();
                cond.free_vars_into(&mut inner);
                inner.remove(var);
                out.extend(inner);
            }
        }
    }

    /// Calls `f` on every subterm, outermost first.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Var(_) | Term::EnumConst { .. } | Term::Int(_) => {}
            Term::Offset(b, _) => b.visit(f),
            Term::Read(a, i) => {
                a.visit(f);
                i.visit(f);
            }
            Term::Write(a, i, e) => {
                a.visit(f);
                i.visit(f);
                e.visit(f);
            }
            Term::IntervalWrite { array, lo, hi, value } => {
                array.visit(f);
                lo.visit(f);
                hi.visit(f);
                value.visit(f);
            }
            Term::CondWrite { array, value, .. } => {
                array.visit(f);
                value.visit(f);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::EnumConst { name, .. } => write!(f, "{name}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Offset(b, k) => write!(f, "(+ {b} {k})"),
            Term::Read(a, i) => write!(f, "(select {a} {i})"),
            Term::Write(a, i, e) => write!(f, "(store {a} {i} {e})"),
            Term::IntervalWrite { array, lo, hi, value } => {
                write!(f, "(store-range {array} {lo} {hi} {value})")
            }
            Term::CondWrite { array, var, cond, value } => {
                write!(f, "(store-if {array} ({}) {cond} {value})", var.name)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "distinct",
            Rel::Lt => "<",
            Rel::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Rel, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: Rel, lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(rel, lhs, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(Rel::Eq, lhs, rhs)
    }

    pub fn ne(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(Rel::Ne, lhs, rhs)
    }

    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(Rel::Lt, lhs, rhs)
    }

    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(Rel::Le, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    /// Flattening conjunction; drops `True`, collapses on `False`.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(vec![Formula::not(a), b])
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Exists(vars, Box::new(body))
        }
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, l, r) => {
                l.free_vars_into(out);
                r.free_vars_into(out);
            }
            Formula::Not(g) => g.free_vars_into(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.free_vars_into(out)),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let mut inner = BTreeSet::new();
                g.free_vars_into(&mut inner);
                for v in vs {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => true,
            Formula::Not(g) => g.is_quantifier_free(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn has_forall(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => false,
            Formula::Not(g) => g.has_exists(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().any(Formula::has_forall),
            Formula::Exists(_, g) => g.has_forall(),
            Formula::Forall(..) => true,
        }
    }

    fn has_exists(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => false,
            Formula::Not(g) => g.has_forall(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().any(Formula::has_exists),
            Formula::Forall(_, g) => g.has_exists(),
            Formula::Exists(..) => true,
        }
    }

    /// Splits a leading existential prefix (possibly nested) from its matrix.
    pub fn split_exists(&self) -> (Vec<Var>, &Formula) {
        let mut vars = Vec::new();
        let mut cur = self;
        while let Formula::Exists(vs, body) = cur {
            vars.extend(vs.iter().cloned());
            cur = body;
        }
        (vars, cur)
    }

    /// Calls `f` on every term occurring in an atom (outermost first).
    pub fn visit_terms<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_terms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_terms(f)),
        }
    }

    /// Number of atom occurrences.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Atom(..) => 1,
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.size(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().map(Formula::size).sum(),
        }
    }
}

fn write_vars(f: &mut fmt::Formatter<'_>, vs: &[Var]) -> fmt::Result {
    write!(f, "(")?;
    for (n, v) in vs.iter().enumerate() {
        if n > 0 {
            write!(f, " ")?;
        }
        write!(f, "{}", v.name)?;
    }
    write!(f, ")")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(rel, l, r) => write!(f, "({} {l} {r})", rel.symbol()),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Exists(vs, g) => {
                write!(f, "(exists ")?;
                write_vars(f, vs)?;
                write!(f, " {g})")
            }
            Formula::Forall(vs, g) => {
                write!(f, "(forall ")?;
                write_vars(f, vs)?;
                write!(f, " {g})")
            }
        }
    }
}

/// Enumerated sorts known to a problem, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub enums: BTreeMap<String, Vec<String>>,
}

impl Signature {
    pub fn enum_consts(&self, sort: &str) -> &[String] {
        self.enums.get(sort).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn enum_const(&self, sort: &str, name: &str) -> Option<Term> {
        let value = self.enum_consts(sort).iter().position(|c| c == name)?;
        Some(Term::EnumConst {
            sort: sort.to_string(),
            name: name.to_string(),
            value: value as u32,
        })
    }

    pub fn enum_const_at(&self, sort: &str, value: u32) -> Option<Term> {
        let name = self.enum_consts(sort).get(value as usize)?;
        Some(Term::EnumConst {
            sort: sort.to_string(),
            name: name.clone(),
            value,
        })
    }
}

/// Checks well-sortedness of a term, returning its sort.
pub fn check_term(t: &Term) -> Result<Sort, LogicError> {
    match t {
        Term::Var(v) => Ok(v.sort.clone()),
        Term::EnumConst { sort, .. } => Ok(Sort::Enum(sort.clone())),
        Term::Int(_) => Ok(Sort::Int),
        Term::Offset(b, _) => {
            let s = check_term(b)?;
            if !s.is_numeric() {
                return Err(LogicError::SortMismatch(format!("offset over non-numeric {t}")));
            }
            Ok(s)
        }
        Term::Read(a, i) => {
            let sa = check_term(a)?;
            let si = check_term(i)?;
            let elem = sa
                .element()
                .ok_or_else(|| LogicError::SortMismatch(format!("select from non-array in {t}")))?;
            if !si.is_numeric() {
                return Err(LogicError::SortMismatch(format!("non-index subscript in {t}")));
            }
            Ok(elem.clone())
        }
        Term::Write(a, i, e) => {
            let sa = check_term(a)?;
            check_index(i, t)?;
            check_elem(&sa, e, t)?;
            Ok(sa)
        }
        Term::IntervalWrite { array, lo, hi, value } => {
            let sa = check_term(array)?;
            check_index(lo, t)?;
            check_index(hi, t)?;
            check_elem(&sa, value, t)?;
            Ok(sa)
        }
        Term::CondWrite { array, var, cond, value } => {
            let sa = check_term(array)?;
            if var.sort != Sort::Index {
                return Err(LogicError::SortMismatch(format!("non-index binder in {t}")));
            }
            check_formula(cond)?;
            check_elem(&sa, value, t)?;
            Ok(sa)
        }
    }
}

fn check_index(i: &Term, ctx: &Term) -> Result<(), LogicError> {
    if check_term(i)?.is_numeric() {
        Ok(())
    } else {
        Err(LogicError::SortMismatch(format!("non-index subscript in {ctx}")))
    }
}

fn check_elem(array_sort: &Sort, e: &Term, ctx: &Term) -> Result<(), LogicError> {
    let elem = array_sort
        .element()
        .ok_or_else(|| LogicError::SortMismatch(format!("store into non-array in {ctx}")))?;
    let se = check_term(e)?;
    if se.compatible(elem) {
        Ok(())
    } else {
        Err(LogicError::SortMismatch(format!("stored value of sort {se} in {ctx}")))
    }
}

/// Checks well-sortedness of every atom and binder in `f`.
pub fn check_formula(f: &Formula) -> Result<(), LogicError> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom(rel, l, r) => {
            let sl = check_term(l)?;
            let sr = check_term(r)?;
            if matches!(sl, Sort::Array(_)) || matches!(sr, Sort::Array(_)) {
                return Err(LogicError::SortMismatch(format!("array comparison in {f}")));
            }
            match rel {
                Rel::Eq | Rel::Ne if sl.compatible(&sr) => Ok(()),
                Rel::Lt | Rel::Le if sl.is_numeric() && sr.is_numeric() => Ok(()),
                _ => Err(LogicError::SortMismatch(format!("{sl} vs {sr} in {f}"))),
            }
        }
        Formula::Not(g) => check_formula(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(check_formula),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            if let Some(v) = vs.iter().find(|v| v.sort != Sort::Index) {
                return Err(LogicError::SortMismatch(format!("quantified {} of sort {}", v.name, v.sort)));
            }
            check_formula(g)
        }
    }
}

/// Free index-sorted variables of `f`.
pub fn free_index_vars(f: &Formula) -> BTreeSet<Var> {
    f.free_vars().into_iter().filter(|v| v.sort == Sort::Index).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn loc_sig() -> Signature {
        let mut sig = Signature::default();
        sig.enums.insert("loc".into(), vec!["I".into(), "R".into(), "W".into(), "C".into()]);
        sig
    }

    #[test]
    fn free_index_vars_skip_bound_and_non_index() {
        let sig = loc_sig();
        let a = Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))));
        let i = Var::index("i");
        let j = Var::index("j");
        let c = sig.enum_const("loc", "C").unwrap();
        let f = Formula::and(vec![
            Formula::exists(vec![i.clone()], Formula::eq(Term::read(Term::var(&a), Term::var(&i)), c.clone())),
            Formula::eq(Term::read(Term::var(&a), Term::var(&j)), c.clone()),
        ]);
        assert_eq!(free_index_vars(&f), [j].into_iter().collect());
        let z = Var::index("z");
        let init = Formula::forall(
            vec![z.clone()],
            Formula::eq(Term::read(Term::var(&a), Term::var(&z)), sig.enum_const("loc", "I").unwrap()),
        );
        assert!(free_index_vars(&init).is_empty());
    }

    #[test]
    fn free_index_vars_sees_offsets() {
        let a = Var::new("a", Sort::Array(Box::new(Sort::Int)));
        let j = Var::index("J");
        let f = Formula::and(vec![
            Formula::ne(Term::read(Term::var(&a), Term::offset(Term::var(&j), 1)), Term::Int(0)),
            Formula::eq(Term::read(Term::var(&a), Term::var(&j)), Term::Int(0)),
        ]);
        assert_eq!(free_index_vars(&f), [j].into_iter().collect());
    }

    #[test]
    fn sort_checking_rejects_enum_order() {
        let sig = loc_sig();
        let c = sig.enum_const("loc", "C").unwrap();
        let i = sig.enum_const("loc", "I").unwrap();
        assert!(check_formula(&Formula::lt(c.clone(), i.clone())).is_err());
        assert!(check_formula(&Formula::eq(c, Term::Int(1))).is_err());
        assert!(check_formula(&Formula::eq(i, sig.enum_const("loc", "R").unwrap())).is_ok());
    }

    #[test]
    fn fresh_vars_never_repeat() {
        let a = fresh_var("i", Sort::Index);
        let b = fresh_var(&a.name, Sort::Index);
        assert_ne!(a.name, b.name);
        assert!(b.name.starts_with("i!"));
    }
}
