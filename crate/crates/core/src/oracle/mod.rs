//! Explicit-state exploration of finite instances.
//!
//! A problem is instantiated at a fixed index domain `{0..N-1}` with integers
//! bounded to `[int_lo, int_hi]`. Successors leaving the bounds are dropped,
//! never clamped.

pub mod eval;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::logic::{Formula, Signature, Sort, Var};
use crate::system::{SafetyProblem, Transition};

use eval::{eval_array, eval_formula, eval_formula_with, eval_term, Interp, UNDEF};

pub const DEFAULT_STATE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large: about {0} states")]
    TooLarge(u64),
    #[error("index domain must be non-empty and integer bounds ordered")]
    Degenerate,
    #[error("no transition named {0}")]
    UnknownTransition(String),
}

/// Positions and value ranges of a list of variables.
#[derive(Debug, Clone)]
pub struct Layout {
    pub vars: Vec<Var>,
    pos: HashMap<String, usize>,
    pub n: usize,
    pub int_lo: i64,
    pub int_hi: i64,
    enum_sizes: HashMap<String, i64>,
}

/// One value per variable; scalars are tables of length one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConcreteState {
    pub vals: Vec<Vec<i64>>,
}

/// A state read through its layout.
pub struct View<'a> {
    pub layout: &'a Layout,
    pub state: &'a ConcreteState,
}

impl Interp for View<'_> {
    fn domain_size(&self) -> usize {
        self.layout.n
    }

    fn scalar(&self, v: &Var) -> i64 {
        self.layout.pos.get(&v.name).map(|&p| self.state.vals[p][0]).unwrap_or(UNDEF)
    }

    fn cell(&self, array: &Var, idx: usize) -> i64 {
        self.layout
            .pos
            .get(&array.name)
            .and_then(|&p| self.state.vals[p].get(idx).copied())
            .unwrap_or(UNDEF)
    }
}

impl Layout {
    pub fn new(vars: Vec<Var>, sig: &Signature, n: usize, int_lo: i64, int_hi: i64) -> Result<Layout, OracleError> {
        if n == 0 || int_lo > int_hi {
            return Err(OracleError::Degenerate);
        }
        let pos = vars.iter().enumerate().map(|(k, v)| (v.name.clone(), k)).collect();
        let enum_sizes = sig.enums.iter().map(|(k, cs)| (k.clone(), cs.len() as i64)).collect();
        Ok(Layout {
            vars,
            pos,
            n,
            int_lo,
            int_hi,
            enum_sizes,
        })
    }

    pub fn view<'a>(&'a self, state: &'a ConcreteState) -> View<'a> {
        View { layout: self, state }
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.pos.get(name).copied()
    }

    fn range(&self, s: &Sort) -> (i64, i64) {
        match s {
            Sort::Index => (0, self.n as i64 - 1),
            Sort::Int => (self.int_lo, self.int_hi),
            Sort::Enum(e) => (0, self.enum_sizes.get(e).copied().unwrap_or(1) - 1),
            Sort::Array(e) => self.range(e),
        }
    }

    fn width(&self, v: &Var) -> usize {
        if matches!(v.sort, Sort::Array(_)) {
            self.n
        } else {
            1
        }
    }

    fn in_range(&self, v: &Var, x: i64) -> bool {
        let (lo, hi) = self.range(&v.sort);
        x != UNDEF && lo <= x && x <= hi
    }

    /// Number of states in the full space, saturating.
    pub fn size(&self) -> u64 {
        let mut total: u64 = 1;
        for v in &self.vars {
            let (lo, hi) = self.range(&v.sort);
            for _ in 0..self.width(v) {
                total = total.saturating_mul((hi - lo + 1) as u64);
            }
        }
        total
    }

    /// Every state of the space, in lexicographic order.
    pub fn states(&self, budget: u64) -> Result<impl Iterator<Item = ConcreteState> + '_, OracleError> {
        let size = self.size();
        if size > budget {
            return Err(OracleError::TooLarge(size));
        }
        let slots: Vec<(usize, i64, i64)> = self
            .vars
            .iter()
            .enumerate()
            .flat_map(|(k, v)| {
                let (lo, hi) = self.range(&v.sort);
                std::iter::repeat_n((k, lo, hi), self.width(v))
            })
            .collect();
        let mut cur = ConcreteState {
            vals: self.vars.iter().map(|v| vec![self.range(&v.sort).0; self.width(v)]).collect(),
        };
        let mut offsets: Vec<usize> = vec![0; self.vars.len()];
        let cells: Vec<usize> = slots
            .iter()
            .map(|&(k, _, _)| {
                offsets[k] += 1;
                offsets[k] - 1
            })
            .collect();
        let mut done = false;
        Ok(std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = cur.clone();
            // odometer over the slots, last slot fastest
            done = true;
            for (s, &(k, lo, hi)) in slots.iter().enumerate().rev() {
                let cell = cells[s];
                if cur.vals[k][cell] < hi {
                    cur.vals[k][cell] += 1;
                    done = false;
                    break;
                }
                cur.vals[k][cell] = lo;
            }
            Some(out)
        }))
    }
}

/// Every state over `vars` satisfying `f` at domain size `n`.
pub fn models_of(
    vars: &[Var],
    sig: &Signature,
    f: &Formula,
    n: usize,
    int_lo: i64,
    int_hi: i64,
) -> Result<Vec<ConcreteState>, OracleError> {
    let layout = Layout::new(vars.to_vec(), sig, n, int_lo, int_hi)?;
    let models = layout
        .states(DEFAULT_STATE_BUDGET)?
        .filter(|s| eval_formula(&layout.view(s), f))
        .collect();
    Ok(models)
}

/// One transition firing in a concrete run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub transition: String,
    pub params: Vec<i64>,
    pub state: ConcreteState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub init: ConcreteState,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    SafeUpTo(usize),
    UnsafeAt(usize, Run),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub verdict: Verdict,
    pub explored: usize,
}

/// A problem instantiated at a fixed domain size and integer range.
pub struct FiniteInstance<'a> {
    pub problem: &'a SafetyProblem,
    pub layout: Layout,
    pub budget: u64,
}

/// Default integer range: enough room for every numeral of the problem.
pub fn default_int_bounds(p: &SafetyProblem, n: usize) -> (i64, i64) {
    let nums = p.numerals();
    let lo = nums.iter().next().copied().unwrap_or(0).min(0);
    let hi = nums.iter().next_back().copied().unwrap_or(0).max(n as i64) + 1;
    (lo, hi)
}

pub fn instantiate(p: &SafetyProblem, n: usize, int_lo: i64, int_hi: i64) -> Result<FiniteInstance<'_>, OracleError> {
    let layout = Layout::new(p.vars.clone(), &p.sig, n, int_lo, int_hi)?;
    Ok(FiniteInstance {
        problem: p,
        layout,
        budget: DEFAULT_STATE_BUDGET,
    })
}

impl<'a> FiniteInstance<'a> {
    pub fn n(&self) -> usize {
        self.layout.n
    }

    pub fn eval(&self, s: &ConcreteState, f: &Formula) -> bool {
        eval_formula(&self.layout.view(s), f)
    }

    pub fn init_states(&self) -> Result<Vec<ConcreteState>, OracleError> {
        Ok(self
            .layout
            .states(self.budget)?
            .filter(|s| self.eval(s, &self.problem.init))
            .collect())
    }

    pub fn is_unsafe(&self, s: &ConcreteState) -> bool {
        self.eval(s, &self.problem.unsafe_)
    }

    /// All `(params, successor)` pairs of `s` under `t`.
    pub fn successors(&self, t: &Transition, s: &ConcreteState) -> Vec<(Vec<i64>, ConcreteState)> {
        let n = self.layout.n as i64;
        let k = t.params.len();
        let guard = t.full_guard();
        let mut out = Vec::new();
        let mut choice = vec![0i64; k];
        let view = self.layout.view(s);
        loop {
            let bound: Vec<(Var, i64)> = t.params.iter().cloned().zip(choice.iter().copied()).collect();
            if eval_formula_with(&view, &bound, &guard) {
                if let Some(next) = self.apply(t, &view, &bound) {
                    out.push((choice.clone(), next));
                }
            }
            let mut slot = 0;
            loop {
                if slot == k {
                    return out;
                }
                choice[slot] += 1;
                if choice[slot] < n {
                    break;
                }
                choice[slot] = 0;
                slot += 1;
            }
        }
    }

    fn apply(&self, t: &Transition, view: &View<'_>, bound: &[(Var, i64)]) -> Option<ConcreteState> {
        let mut vals = Vec::with_capacity(t.updates.len());
        for (v, term) in &t.updates {
            let table = if matches!(v.sort, Sort::Array(_)) {
                eval_array(view, bound, term)
            } else {
                vec![eval_term(view, bound, term)]
            };
            if !table.iter().all(|&x| self.layout.in_range(v, x)) {
                return None;
            }
            vals.push(table);
        }
        Some(ConcreteState { vals })
    }

    /// Breadth-first search from every initial state.
    pub fn forward_reach(&self) -> Result<OracleResult, OracleError> {
        self.search(&self.problem.transitions.iter().collect::<Vec<_>>())
    }

    fn search(&self, transitions: &[&Transition]) -> Result<OracleResult, OracleError> {
        let mut seen: HashMap<ConcreteState, Option<(usize, usize, Vec<i64>)>> = HashMap::new();
        let mut order: Vec<ConcreteState> = Vec::new();
        let mut queue = VecDeque::new();
        for s in self.init_states()? {
            if seen.insert(s.clone(), None).is_none() {
                order.push(s);
                queue.push_back(order.len() - 1);
            }
        }
        while let Some(at) = queue.pop_front() {
            let s = order[at].clone();
            if self.is_unsafe(&s) {
                let run = self.rebuild(&seen, &order, at, transitions);
                return Ok(OracleResult {
                    verdict: Verdict::UnsafeAt(self.n(), run),
                    explored: order.len(),
                });
            }
            for (ti, t) in transitions.iter().enumerate() {
                for (params, next) in self.successors(t, &s) {
                    if !seen.contains_key(&next) {
                        seen.insert(next.clone(), Some((at, ti, params)));
                        order.push(next);
                        queue.push_back(order.len() - 1);
                        if order.len() as u64 > self.budget {
                            return Err(OracleError::TooLarge(order.len() as u64));
                        }
                    }
                }
            }
        }
        Ok(OracleResult {
            verdict: Verdict::SafeUpTo(self.n()),
            explored: order.len(),
        })
    }

    fn rebuild(
        &self,
        seen: &HashMap<ConcreteState, Option<(usize, usize, Vec<i64>)>>,
        order: &[ConcreteState],
        mut at: usize,
        transitions: &[&Transition],
    ) -> Run {
        let mut steps = Vec::new();
        while let Some((prev, ti, params)) = seen[&order[at]].clone() {
            steps.push(Step {
                transition: transitions[ti].name.clone(),
                params,
                state: order[at].clone(),
            });
            at = prev;
        }
        steps.reverse();
        Run {
            init: order[at].clone(),
            steps,
        }
    }

    /// Looks for a concrete run following `names` from an initial state to an
    /// unsafe one. A name whose transition summarizes a loop is replayed as one
    /// or more iterations of that loop.
    pub fn replay(&self, names: &[String]) -> Result<Option<Run>, OracleError> {
        type Hops = HashMap<ConcreteState, (ConcreteState, String, Vec<i64>)>;
        let mut entry: HashSet<ConcreteState> = self.init_states()?.into_iter().collect();
        let mut layers: Vec<(HashSet<ConcreteState>, Hops)> = Vec::new();
        for name in names {
            let t = self
                .problem
                .transition(name)
                .ok_or_else(|| OracleError::UnknownTransition(name.clone()))?;
            let (base, repeat) = match &t.accelerates {
                Some(b) => (self.problem.transition(b).unwrap_or(t), true),
                None => (t, false),
            };
            let mut frontier: Vec<ConcreteState> = entry.iter().cloned().collect();
            frontier.sort();
            let mut queue: VecDeque<ConcreteState> = frontier.into();
            let mut hops: Hops = HashMap::new();
            while let Some(s) = queue.pop_front() {
                for (params, succ) in self.successors(base, &s) {
                    if !hops.contains_key(&succ) {
                        hops.insert(succ.clone(), (s.clone(), base.name.clone(), params));
                        if repeat {
                            queue.push_back(succ);
                        }
                        if hops.len() as u64 > self.budget {
                            return Err(OracleError::TooLarge(hops.len() as u64));
                        }
                    }
                }
            }
            let reached: HashSet<ConcreteState> = hops.keys().cloned().collect();
            layers.push((std::mem::replace(&mut entry, reached), hops));
        }
        let mut finals: Vec<&ConcreteState> = entry.iter().filter(|s| self.is_unsafe(s)).collect();
        finals.sort();
        let Some(end) = finals.first() else { return Ok(None) };
        let mut steps = Vec::new();
        let mut cur = (*end).clone();
        for (before, hops) in layers.iter().rev() {
            // unroll repeated firings until we are back in the previous layer
            loop {
                let (from, tname, params) = hops[&cur].clone();
                steps.push(Step {
                    transition: tname,
                    params,
                    state: std::mem::replace(&mut cur, from),
                });
                if before.contains(&cur) {
                    break;
                }
            }
        }
        steps.reverse();
        Ok(Some(Run { init: cur, steps }))
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.init.vals)?;
        for s in &self.steps {
            write!(f, " -{}{:?}-> {:?}", s.transition, s.params, s.state.vals)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
