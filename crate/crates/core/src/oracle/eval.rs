//! Tarskian evaluation over finite index domains `{0..N-1}`.
//!
//! Every value is an `i64`: enum constants by position in their sort, indexes
//! and integers as themselves. Reads outside the domain yield [`UNDEF`], which
//! differs from every constant and numeral.

use crate::logic::{Formula, Rel, Term, Var};

pub const UNDEF: i64 = i64::MIN;

/// A finite interpretation of the state symbols.
pub trait Interp {
    fn domain_size(&self) -> usize;
    fn scalar(&self, v: &Var) -> i64;
    fn cell(&self, array: &Var, idx: usize) -> i64;
}

struct Env<'a, I: ?Sized> {
    interp: &'a I,
    bound: Vec<(&'a str, i64)>,
}

impl<'a, I: Interp + ?Sized> Env<'a, I> {
    fn lookup(&self, v: &Var) -> i64 {
        self.bound
            .iter()
            .rev()
            .find(|(n, _)| *n == v.name)
            .map(|(_, x)| *x)
            .unwrap_or_else(|| self.interp.scalar(v))
    }

    fn term(&mut self, t: &'a Term) -> i64 {
        match t {
            Term::Var(v) => self.lookup(v),
            Term::EnumConst { value, .. } => *value as i64,
            Term::Int(n) => *n,
            Term::Offset(b, k) => match self.term(b) {
                UNDEF => UNDEF,
                x => x + k,
            },
            Term::Read(a, i) => {
                let idx = self.term(i);
                self.read(a, idx)
            }
            // a bare array term only makes sense under a read
            _ => UNDEF,
        }
    }

    fn read(&mut self, a: &'a Term, idx: i64) -> i64 {
        match a {
            Term::Var(v) => {
                if idx < 0 || idx as usize >= self.interp.domain_size() {
                    UNDEF
                } else {
                    self.interp.cell(v, idx as usize)
                }
            }
            Term::Write(base, i, e) => {
                if self.term(i) == idx {
                    self.term(e)
                } else {
                    self.read(base, idx)
                }
            }
            Term::IntervalWrite { array, lo, hi, value } => {
                let (lo, hi) = (self.term(lo), self.term(hi));
                if lo != UNDEF && hi != UNDEF && lo <= idx && idx <= hi {
                    self.term(value)
                } else {
                    self.read(array, idx)
                }
            }
            Term::CondWrite { array, var, cond, value } => {
                self.bound.push((&var.name, idx));
                let hit = self.formula(cond);
                self.bound.pop();
                if hit {
                    self.term(value)
                } else {
                    self.read(array, idx)
                }
            }
            _ => UNDEF,
        }
    }

    fn formula(&mut self, f: &'a Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(rel, l, r) => {
                let (x, y) = (self.term(l), self.term(r));
                match rel {
                    Rel::Eq => x == y,
                    Rel::Ne => x != y,
                    Rel::Lt => x < y,
                    Rel::Le => x <= y,
                }
            }
            Formula::Not(g) => !self.formula(g),
            Formula::And(gs) => gs.iter().all(|g| self.formula(g)),
            Formula::Or(gs) => gs.iter().any(|g| self.formula(g)),
            Formula::Exists(vs, g) => self.quant(vs, g),
            Formula::Forall(vs, g) => !self.quant_neg(vs, g),
        }
    }

    /// Some assignment of `vs` makes `g` true.
    fn quant(&mut self, vs: &'a [Var], g: &'a Formula) -> bool {
        let Some((v, rest)) = vs.split_first() else {
            return self.formula(g);
        };
        for x in 0..self.interp.domain_size() as i64 {
            self.bound.push((&v.name, x));
            let hit = self.quant(rest, g);
            self.bound.pop();
            if hit {
                return true;
            }
        }
        false
    }

    /// Some assignment of `vs` makes `g` false.
    fn quant_neg(&mut self, vs: &'a [Var], g: &'a Formula) -> bool {
        let Some((v, rest)) = vs.split_first() else {
            return !self.formula(g);
        };
        for x in 0..self.interp.domain_size() as i64 {
            self.bound.push((&v.name, x));
            let hit = self.quant_neg(rest, g);
            self.bound.pop();
            if hit {
                return true;
            }
        }
        false
    }
}

pub fn eval_formula<I: Interp + ?Sized>(interp: &I, f: &Formula) -> bool {
    Env { interp, bound: Vec::new() }.formula(f)
}

/// Evaluates `f` with some free variables bound to explicit values.
pub fn eval_formula_with<I: Interp + ?Sized>(interp: &I, bound: &[(Var, i64)], f: &Formula) -> bool {
    let mut env = Env {
        interp,
        bound: bound.iter().map(|(v, x)| (v.name.as_str(), *x)).collect(),
    };
    env.formula(f)
}

pub fn eval_term<I: Interp + ?Sized>(interp: &I, bound: &[(Var, i64)], t: &Term) -> i64 {
    let mut env = Env {
        interp,
        bound: bound.iter().map(|(v, x)| (v.name.as_str(), *x)).collect(),
    };
    env.term(t)
}

/// Evaluates an array-sorted term to a full table.
pub fn eval_array<I: Interp + ?Sized>(interp: &I, bound: &[(Var, i64)], t: &Term) -> Vec<i64> {
    let mut env = Env {
        interp,
        bound: bound.iter().map(|(v, x)| (v.name.as_str(), *x)).collect(),
    };
    (0..interp.domain_size() as i64).map(|i| env.read(t, i)).collect()
}
