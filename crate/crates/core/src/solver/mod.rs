//! Satisfiability of ground formulae and of existential/universal conjunctions.
//!
//! Ground queries are decided by case splitting with a literal-level theory
//! solver. Existential/universal conjunctions are Skolemized and the universal
//! part is instantiated over the index terms of the query; a satisfying model is
//! then re-checked against the quantified query on its finite domain.

mod search;
pub mod smtlib;
mod theory;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::logic::{
    complement_atom, index_terms, instantiate_universals, reduce_read_over_write, simplify,
    substitute, to_nnf, Formula, LogicError, Signature, Sort, Substitution, Term, Var,
};
use crate::oracle::eval::{eval_formula, eval_formula_with, Interp};

use search::{Search, SearchError};

/// Which array theory a problem lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theory {
    /// Indexes are only ordered; no arithmetic on them.
    Simple,
    /// Difference constraints over indexes and integers.
    DiffArith,
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theory::Simple => "simple",
            Theory::DiffArith => "diffarith",
        })
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("case-split budget of {0} exhausted")]
    ResourceLimit(usize),
}

/// A finite model. Enum values are positions in their sort.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub domain_size: usize,
    pub index_vals: BTreeMap<String, i64>,
    pub int_vals: BTreeMap<String, i64>,
    pub enum_vals: BTreeMap<String, u32>,
    pub array_vals: BTreeMap<String, Vec<i64>>,
}

impl Interp for Model {
    fn domain_size(&self) -> usize {
        self.domain_size
    }

    fn scalar(&self, v: &Var) -> i64 {
        match &v.sort {
            Sort::Index => self.index_vals.get(&v.name).copied().unwrap_or(0),
            Sort::Int => self.int_vals.get(&v.name).copied().unwrap_or(0),
            _ => self.enum_vals.get(&v.name).map(|x| *x as i64).unwrap_or(0),
        }
    }

    fn cell(&self, array: &Var, idx: usize) -> i64 {
        self.array_vals
            .get(&array.name)
            .and_then(|t| t.get(idx))
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub theory: Theory,
    /// Maximum number of case-split nodes per query.
    pub budget: usize,
    /// Candidate-substitution cap for the syntactic entailment shortcut.
    pub match_limit: usize,
    pub dump_dir: Option<PathBuf>,
}

impl SolverConfig {
    pub fn new(theory: Theory) -> Self {
        SolverConfig {
            theory,
            budget: 200_000,
            match_limit: 50_000,
            dump_dir: None,
        }
    }
}

pub struct Solver {
    sig: Signature,
    cfg: SolverConfig,
    calls: AtomicU64,
    dumped: AtomicU64,
}

/// A per-query name for a Skolem constant; never produced by `fresh_var`.
fn skolem_var(v: &Var, counter: &mut usize) -> Var {
    let stem = v.name.split('!').next().unwrap_or(&v.name);
    *counter += 1;
    Var::new(format!("{stem}!s{counter}"), v.sort.clone())
}

/// Removes positive existential binders, renaming their variables apart.
fn skolemize(f: &Formula, counter: &mut usize) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(..) => f.clone(),
        Formula::And(gs) => Formula::and(gs.iter().map(|g| skolemize(g, counter)).collect::<Result<_, _>>()?),
        Formula::Or(gs) => Formula::or(gs.iter().map(|g| skolemize(g, counter)).collect::<Result<_, _>>()?),
        Formula::Exists(vs, g) => {
            let s: Substitution = vs.iter().map(|v| (v.clone(), Term::Var(skolem_var(v, counter)))).collect();
            skolemize(&substitute(g, &s)?, counter)?
        }
        Formula::Forall(..) => return Err(LogicError::UnsupportedTerm(format!("universal in ground query: {f}"))),
        Formula::Not(_) => skolemize(&to_nnf(f), counter)?,
    })
}

/// Ground preprocessing: NNF, read-over-write elimination, constant folding.
fn prepare_ground(f: &Formula) -> Result<Formula, LogicError> {
    let g = skolemize(&to_nnf(f), &mut 0)?;
    Ok(simplify(&to_nnf(&reduce_read_over_write(&g))))
}

fn top_universals(f: &Formula, out: &mut Vec<(Vec<Var>, Formula)>) {
    match f {
        Formula::And(gs) => gs.iter().for_each(|g| top_universals(g, out)),
        Formula::Forall(vs, g) => out.push((vs.clone(), (**g).clone())),
        _ => {}
    }
}

fn literal_conjunction(f: &Formula) -> Option<Vec<Formula>> {
    match f {
        Formula::True => Some(Vec::new()),
        Formula::Atom(..) => Some(vec![f.clone()]),
        Formula::And(gs) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(literal_conjunction(g)?);
            }
            Some(out)
        }
        _ => None,
    }
}

impl Solver {
    pub fn new(sig: Signature, cfg: SolverConfig) -> Self {
        Solver {
            sig,
            cfg,
            calls: AtomicU64::new(0),
            dumped: AtomicU64::new(0),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn theory(&self) -> Theory {
        self.cfg.theory
    }

    /// Number of top-level queries answered so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn dump(&self, f: &Formula) {
        let Some(dir) = &self.cfg.dump_dir else { return };
        let n = self.dumped.fetch_add(1, Ordering::Relaxed);
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("q{n}.smt2")), smtlib::render_query(&self.sig, f));
    }

    fn search(&self, g: Formula) -> Result<SatResult, SolverError> {
        self.dump(&g);
        let mut s = Search {
            sig: &self.sig,
            budget: self.cfg.budget,
            steps: 0,
        };
        match s.run(g) {
            Ok(Some(m)) => Ok(SatResult::Sat(m)),
            Ok(None) => Ok(SatResult::Unsat),
            Err(SearchError::Logic(e)) => Err(e.into()),
            Err(SearchError::Budget) => match self.cfg.theory {
                Theory::DiffArith => Ok(SatResult::Unknown("case-split budget exhausted".into())),
                Theory::Simple => Err(SolverError::ResourceLimit(self.cfg.budget)),
            },
        }
    }

    /// Decides a quantifier-free (or existential) formula.
    pub fn check_sat_ground(&self, f: &Formula) -> Result<SatResult, SolverError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let g = prepare_ground(f)?;
        let res = self.search(g)?;
        Ok(match res {
            SatResult::Sat(mut m) => {
                self.complete_model(&mut m, f, &[]);
                SatResult::Sat(m)
            }
            r => r,
        })
    }

    /// Decides `ex ∧ univ` with `ex` existential and `univ` universal.
    pub fn check_sat_exists_forall(&self, ex: &Formula, univ: &Formula) -> Result<SatResult, SolverError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.exists_forall(ex, univ)
    }

    fn exists_forall(&self, ex: &Formula, univ: &Formula) -> Result<SatResult, SolverError> {
        let mut counter = 0;
        let ex_sk = skolemize(&to_nnf(ex), &mut counter)?;
        let u = simplify(&to_nnf(univ));
        let q = Formula::and(vec![ex_sk, u.clone()]);
        let mut terms: Vec<Term> = index_terms(&q).into_iter().collect();
        if terms.is_empty() {
            terms.push(Term::Var(skolem_var(&Var::index("c"), &mut counter)));
        }
        let ground = instantiate_universals(&q, &terms)?;
        let g = simplify(&to_nnf(&reduce_read_over_write(&ground)));
        match self.search(g)? {
            SatResult::Sat(mut m) => {
                let mut univs = Vec::new();
                top_universals(&u, &mut univs);
                let original = Formula::and(vec![ex.clone(), univ.clone()]);
                self.complete_model(&mut m, &original, &univs);
                if eval_formula(&m, &original) {
                    Ok(SatResult::Sat(m))
                } else {
                    Ok(SatResult::Unknown("instantiation model violates the universal part".into()))
                }
            }
            r => Ok(r),
        }
    }

    /// Sizes every array table to the domain and picks values for unconstrained
    /// cells, preferring values that satisfy the universal conjuncts locally.
    fn complete_model(&self, m: &mut Model, query: &Formula, univs: &[(Vec<Var>, Formula)]) {
        let arrays: Vec<Var> = query
            .free_vars()
            .into_iter()
            .filter(|v| matches!(v.sort, Sort::Array(_)))
            .collect();
        let mut holes: BTreeSet<usize> = BTreeSet::new();
        for a in &arrays {
            let t = m.array_vals.entry(a.name.clone()).or_default();
            t.resize(m.domain_size, i64::MIN);
            for (i, x) in t.iter().enumerate() {
                if *x == i64::MIN {
                    holes.insert(i);
                }
            }
        }
        let mut numerals: BTreeSet<i64> = [0].into_iter().collect();
        query.visit_terms(&mut |t| {
            if let Term::Int(n) = t {
                numerals.insert(*n);
            }
        });
        numerals.extend(m.int_vals.values().copied());
        let candidates: Vec<Vec<i64>> = arrays
            .iter()
            .map(|a| match a.sort.element() {
                Some(Sort::Enum(s)) => (0..self.sig.enum_consts(s).len() as i64).collect(),
                _ => numerals.iter().copied().collect(),
            })
            .collect();
        for &cell in &holes {
            let open: Vec<usize> = (0..arrays.len())
                .filter(|&k| m.array_vals[&arrays[k].name][cell] == i64::MIN)
                .collect();
            let mut choice: Vec<usize> = vec![0; open.len()];
            let mut chosen = false;
            'combos: loop {
                for (slot, &k) in open.iter().enumerate() {
                    let v = candidates[k].get(choice[slot]).copied().unwrap_or(0);
                    m.array_vals.get_mut(&arrays[k].name).unwrap()[cell] = v;
                }
                let ok = univs.iter().all(|(vs, body)| {
                    let bound: Vec<(Var, i64)> = vs.iter().map(|v| (v.clone(), cell as i64)).collect();
                    eval_formula_with(&*m, &bound, body)
                });
                if ok {
                    chosen = true;
                    break;
                }
                for slot in 0..open.len() {
                    choice[slot] += 1;
                    if choice[slot] < candidates[open[slot]].len() {
                        continue 'combos;
                    }
                    choice[slot] = 0;
                }
                break;
            }
            if !chosen {
                for &k in &open {
                    m.array_vals.get_mut(&arrays[k].name).unwrap()[cell] = candidates[k].first().copied().unwrap_or(0);
                }
            }
        }
    }

    /// Whether a conjunction of quantifier-free literals has a model. Errors
    /// count as consistent.
    pub fn consistent(&self, lits: &[Formula]) -> bool {
        match theory::compile(lits) {
            Ok(c) => theory::solve(&c, &self.sig).is_some(),
            Err(_) => true,
        }
    }

    /// Does `f` entail `g`? Both are existential. `Unknown` must be read as "not entailed".
    pub fn entails(&self, f: &Formula, g: &Formula) -> Result<Entailment, SolverError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        if let Some(true) = self.match_entails(f, g)? {
            return Ok(Entailment::Yes);
        }
        let neg = to_nnf(&Formula::not(g.clone()));
        match self.exists_forall(f, &neg) {
            Ok(SatResult::Unsat) => Ok(Entailment::Yes),
            Ok(SatResult::Sat(_)) => Ok(Entailment::No),
            Ok(SatResult::Unknown(_)) | Err(SolverError::ResourceLimit(_)) => Ok(Entailment::Unknown),
            Err(e) => Err(e),
        }
    }

    /// Cheap entailment test: does some substitution of `g`'s witnesses by index
    /// terms of `f` make every literal of `g` follow from `f`'s literals?
    /// `None` when either side is not a conjunction of literals.
    pub fn match_entails(&self, f: &Formula, g: &Formula) -> Result<Option<bool>, SolverError> {
        let (fv, fm) = f.split_exists();
        let (gv, gm) = g.split_exists();
        let Some(flits) = literal_conjunction(&prepare_ground(fm)?) else {
            return Ok(None);
        };
        let Some(glits) = literal_conjunction(&simplify(&to_nnf(&reduce_read_over_write(gm)))) else {
            return Ok(None);
        };
        let fcomp = theory::compile(&flits)?;
        if theory::solve(&fcomp, &self.sig).is_none() {
            return Ok(Some(true));
        }
        let mut cands: BTreeSet<Term> = index_terms(fm);
        cands.extend(fv.iter().filter(|v| v.sort == Sort::Index).map(Term::var));
        let cands: Vec<Term> = cands.into_iter().collect();
        let gvars: Vec<&Var> = gv.iter().collect();
        if gvars.iter().any(|v| v.sort != Sort::Index) {
            return Ok(None);
        }
        let total = (cands.len() as f64).powi(gvars.len() as i32);
        if total > self.cfg.match_limit as f64 || (cands.is_empty() && !gvars.is_empty()) {
            return Ok(None);
        }
        let fset: BTreeSet<&Formula> = flits.iter().collect();
        let mut cache: HashMap<Formula, bool> = HashMap::new();
        let mut implied = |lit: &Formula| -> Result<bool, LogicError> {
            let lit = simplify(lit);
            match &lit {
                Formula::True => return Ok(true),
                Formula::False => return Ok(false),
                _ => {}
            }
            if fset.contains(&lit) {
                return Ok(true);
            }
            if let Some(&b) = cache.get(&lit) {
                return Ok(b);
            }
            let Formula::Atom(rel, l, r) = &lit else { return Ok(false) };
            let mut q = flits.clone();
            q.push(complement_atom(*rel, l, r));
            let b = theory::solve(&theory::compile(&q)?, &self.sig).is_none();
            cache.insert(lit, b);
            Ok(b)
        };
        let mut choice = vec![0usize; gvars.len()];
        loop {
            let s: Substitution = gvars
                .iter()
                .zip(&choice)
                .map(|(v, &c)| ((*v).clone(), cands[c].clone()))
                .collect();
            let mut all = true;
            for l in &glits {
                if !implied(&substitute(l, &s)?)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(Some(true));
            }
            let mut slot = 0;
            loop {
                if slot == choice.len() {
                    return Ok(Some(false));
                }
                choice[slot] += 1;
                if choice[slot] < cands.len() {
                    break;
                }
                choice[slot] = 0;
                slot += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests;
