//! Backward reachability: preimages of the unsafe states are computed until
//! they meet the initial states or stop producing anything new.

mod normal;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{abstract_formula, instantiation_set, transform_problem, AbstractionError, InstSetMode};
use crate::acceleration::accelerate_problem;
use crate::logic::{reduce_read_over_write, simplify, Rel, substitute, to_nnf, Formula, LogicError, Substitution, Term, Var};
use crate::solver::{Entailment, SatResult, Solver, SolverConfig, SolverError};
use crate::system::{SafetyProblem, Transition};

pub use trace::{concretize_trace, extract_trace, Concretization, Trace, TraceStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractionMode {
    Runtime,
    Transform,
    Off,
}

impl std::fmt::Display for AbstractionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbstractionMode::Runtime => "runtime",
            AbstractionMode::Transform => "transform",
            AbstractionMode::Off => "off",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub max_iters: usize,
    pub max_nodes: usize,
    pub abstraction: AbstractionMode,
    pub inst_set: InstSetMode,
    pub accelerate: bool,
    /// Discard new nodes entailed by earlier ones.
    pub subsumption: bool,
    /// Largest domain tried when replaying a counterexample.
    pub oracle_n: usize,
    pub concretize: bool,
    pub solver_budget: usize,
    /// Cap on the cubes of a single preimage.
    pub dnf_limit: usize,
    pub dump_frontier: Option<PathBuf>,
    pub dump_smt: Option<PathBuf>,
    /// Keep every universally quantified preimage next to its abstraction.
    pub record_universal: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_iters: 200,
            max_nodes: 20_000,
            abstraction: AbstractionMode::Runtime,
            inst_set: InstSetMode::Default,
            accelerate: false,
            subsumption: true,
            oracle_n: 6,
            concretize: true,
            solver_budget: 200_000,
            dnf_limit: 100_000,
            dump_frontier: None,
            dump_smt: None,
            record_universal: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error("frontier dump: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Via {
    pub transition: String,
    pub abstracted: bool,
    pub accelerated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    /// One cube of `K^depth`, existential with a quantifier-free matrix.
    pub formula: Formula,
    pub parent: Option<usize>,
    pub via: Option<Via>,
    pub depth: usize,
    /// Entailed by an earlier node; kept but never expanded.
    pub deleted: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub iterations: usize,
    pub nodes: usize,
    pub deleted: usize,
    pub solver_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unsafe { trace: Trace, concretization: Concretization },
    Unknown(String),
    ResourceLimit(String),
}

/// A universally quantified preimage and what abstraction turned it into.
#[derive(Debug, Clone)]
pub struct UniversalPreimage {
    pub transition: String,
    pub parent: usize,
    pub original: Formula,
    pub abstracted: Formula,
}

#[derive(Debug, Clone)]
pub struct BackwardResult {
    pub verdict: Verdict,
    pub stats: Stats,
    pub nodes: Vec<Node>,
    /// Loops that received an accelerated transition.
    pub accelerated: Vec<String>,
    pub universal_preimages: Vec<UniversalPreimage>,
    /// The problem actually explored, after acceleration and transformation.
    pub problem: SafetyProblem,
}

/// `Pre(t, K)`: the states with a `t`-successor in `K`, as `∃ params, witnesses
/// (guard ∧ ∀k ψ ∧ K[F/v])`. The universal conjunct, if any, is left in place.
pub fn preimage(t: &Transition, k: &Formula) -> Result<Formula, LogicError> {
    let (kvars, matrix) = k.split_exists();
    let taken: BTreeSet<String> = kvars.iter().map(|v| v.name.clone()).collect();
    let local = |v: &Var, tag: &str| {
        let stem = v.name.split('!').next().unwrap_or(&v.name);
        let mut name = format!("{stem}!{tag}");
        while taken.contains(&name) {
            name.push('\'');
        }
        Var::new(name, v.sort.clone())
    };
    let params: Vec<Var> = t.params.iter().enumerate().map(|(n, v)| local(v, &format!("p{n}"))).collect();
    let rename: Substitution = t.params.iter().cloned().zip(params.iter().map(Term::var)).collect();
    let mut updates = Substitution::new();
    for (v, u) in &t.updates {
        if *u != Term::var(v) {
            updates.insert(v, crate::logic::substitute_term(u, &rename)?);
        }
    }
    let mut parts = vec![substitute(&t.guard, &rename)?];
    if let Some(u) = &t.universal {
        let kv = local(&u.var, "u");
        let body = substitute(&u.body, &rename.clone().with(&u.var, Term::var(&kv)))?;
        parts.push(Formula::forall(vec![kv], body));
    }
    parts.push(substitute(matrix, &updates)?);
    let mut vars = params;
    vars.extend(kvars);
    Ok(Formula::exists(vars, Formula::and(parts)))
}

/// Literals `v = c` with `v` a state variable and `c` a constant.
fn pinned_values(f: &Formula) -> BTreeMap<Var, Term> {
    let (_, m) = f.split_exists();
    let lits = match m {
        Formula::And(gs) => gs.as_slice(),
        g => std::slice::from_ref(g),
    };
    let mut out = BTreeMap::new();
    for l in lits {
        if let Formula::Atom(Rel::Eq, a, b) = l {
            for (x, c) in [(a, b), (b, a)] {
                if let (Term::Var(v), Term::Int(_) | Term::EnumConst { .. }) = (x, c) {
                    out.insert(v.clone(), c.clone());
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
struct DumpRecord<'a> {
    id: usize,
    depth: usize,
    parent: Option<usize>,
    via: Option<&'a Via>,
    formula: String,
    safety: &'a str,
    fixpoint: &'a str,
}

struct Run<'a> {
    cfg: &'a EngineConfig,
    problem: SafetyProblem,
    solver: Solver,
    nodes: Vec<Node>,
    deleted: usize,
    universal_preimages: Vec<UniversalPreimage>,
    transformed: BTreeSet<String>,
    taken: BTreeSet<String>,
    dump: Option<std::fs::File>,
}

enum Outcome {
    Continue,
    Stop(Verdict),
}

impl Run<'_> {
    fn record(&mut self, node: &Node, safety: &str, fixpoint: &str) -> Result<(), EngineError> {
        if let Some(f) = &mut self.dump {
            let rec = DumpRecord {
                id: node.id,
                depth: node.depth,
                parent: node.parent,
                via: node.via.as_ref(),
                formula: node.formula.to_string(),
                safety,
                fixpoint,
            };
            writeln!(f, "{}", serde_json::to_string(&rec).expect("serializable record"))?;
        }
        Ok(())
    }

    fn covered(&self, f: &Formula) -> Result<bool, SolverError> {
        if !self.cfg.subsumption {
            return Ok(false);
        }
        let pinned = pinned_values(f);
        let mut candidates = Vec::new();
        for n in self.nodes.iter().filter(|n| !n.deleted) {
            if n.formula == *f {
                return Ok(true);
            }
            // a node pinning some variable to another constant cannot cover f
            let other = pinned_values(&n.formula);
            if !other.iter().all(|(v, d)| pinned.get(v).is_none_or(|c| c == d)) {
                continue;
            }
            if self.solver.entails(f, &n.formula)? == Entailment::Yes {
                return Ok(true);
            }
            candidates.push(n.formula.clone());
        }
        // a cube split by the DNF may only be covered by several nodes at once
        if candidates.len() < 2 {
            return Ok(false);
        }
        Ok(self.solver.entails(f, &Formula::or(candidates))? == Entailment::Yes)
    }

    /// Runs the safety and fixpoint tests on a new cube and files it.
    fn admit(&mut self, formula: Formula, parent: Option<usize>, via: Option<Via>, depth: usize, queue: &mut VecDeque<usize>) -> Result<Outcome, EngineError> {
        let id = self.nodes.len();
        let mut node = Node {
            id,
            formula,
            parent,
            via,
            depth,
            deleted: false,
        };
        let (ex, _) = (&node.formula, ());
        let safety = match self.solver.check_sat_exists_forall(ex, &self.problem.init) {
            Ok(r) => r,
            Err(SolverError::ResourceLimit(b)) => {
                return Ok(Outcome::Stop(Verdict::ResourceLimit(format!("solver budget of {b} exhausted in a safety test"))))
            }
            Err(SolverError::Logic(e)) => return Err(e.into()),
        };
        match safety {
            SatResult::Sat(_) => {
                self.record(&node, "sat", "-")?;
                self.nodes.push(node);
                return Ok(Outcome::Stop(Verdict::Unsafe {
                    trace: extract_trace(&self.nodes, id),
                    concretization: Concretization::NotAttempted,
                }));
            }
            SatResult::Unknown(why) => {
                self.record(&node, "unknown", "-")?;
                self.nodes.push(node);
                return Ok(Outcome::Stop(Verdict::Unknown(format!("safety test: {why}"))));
            }
            SatResult::Unsat => {}
        }
        let covered = match self.covered(&node.formula) {
            Ok(c) => c,
            Err(SolverError::ResourceLimit(_)) => false,
            Err(SolverError::Logic(e)) => return Err(e.into()),
        };
        if covered {
            node.deleted = true;
            self.deleted += 1;
        } else {
            queue.push_back(id);
        }
        self.record(&node, "unsat", if covered { "covered" } else { "new" })?;
        self.nodes.push(node);
        Ok(Outcome::Continue)
    }

    /// Cubes of `Pre(t, K)` after abstraction, simplification and pruning.
    fn expand(&mut self, t: &Transition, parent: usize) -> Result<Result<(Vec<Formula>, bool), Verdict>, EngineError> {
        let k = self.nodes[parent].formula.clone();
        let pre = preimage(t, &k)?;
        let mut abstracted = self.transformed.contains(&t.name);
        let pre = if pre.has_forall() {
            match self.cfg.abstraction {
                AbstractionMode::Off => return Ok(Err(Verdict::Unknown("universal guard without abstraction".into()))),
                _ => {
                    let x = instantiation_set(&pre, self.problem.theory, self.cfg.inst_set);
                    let abs = abstract_formula(&pre, &x)?;
                    if self.cfg.record_universal {
                        self.universal_preimages.push(UniversalPreimage {
                            transition: t.name.clone(),
                            parent,
                            original: pre.clone(),
                            abstracted: abs.clone(),
                        });
                    }
                    abstracted = true;
                    abs
                }
            }
        } else {
            pre
        };
        let (vars, matrix) = pre.split_exists();
        let m = simplify(&to_nnf(&reduce_read_over_write(matrix)));
        let Some(cubes) = normal::dnf(&m, self.cfg.dnf_limit, &|c| self.solver.consistent(c)) else {
            return Ok(Err(Verdict::ResourceLimit(format!("preimage along {} has too many cubes", t.name))));
        };
        let mut out: Vec<Formula> = Vec::new();
        for cube in cubes {
            let Some(f) = normal::normalize_cube(&vars, cube, &self.taken) else { continue };
            if out.contains(&f) {
                continue;
            }
            match self.solver.check_sat_ground(&f) {
                Ok(SatResult::Unsat) => {}
                Ok(_) | Err(SolverError::ResourceLimit(_)) => out.push(f),
                Err(SolverError::Logic(e)) => return Err(e.into()),
            }
        }
        Ok(Ok((out, abstracted)))
    }

    fn roots(&mut self) -> Result<Result<Vec<Formula>, Verdict>, EngineError> {
        let (vars, matrix) = self.problem.unsafe_.split_exists();
        let m = simplify(&to_nnf(&reduce_read_over_write(matrix)));
        let Some(cubes) = normal::dnf(&m, self.cfg.dnf_limit, &|c| self.solver.consistent(c)) else {
            return Ok(Err(Verdict::ResourceLimit("unsafe formula has too many cubes".into())));
        };
        let mut out = Vec::new();
        for cube in cubes {
            if let Some(f) = normal::normalize_cube(&vars, cube, &self.taken) {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        Ok(Ok(out))
    }

    fn stats(&self) -> Stats {
        Stats {
            iterations: self.nodes.iter().map(|n| n.depth).max().unwrap_or(0),
            nodes: self.nodes.len(),
            deleted: self.deleted,
            solver_calls: self.solver.calls(),
        }
    }

    fn search(&mut self) -> Result<Verdict, EngineError> {
        let mut queue = VecDeque::new();
        let roots = match self.roots()? {
            Ok(r) => r,
            Err(v) => return Ok(v),
        };
        for f in roots {
            if let Outcome::Stop(v) = self.admit(f, None, None, 0, &mut queue)? {
                return Ok(v);
            }
        }
        let transitions = self.problem.transitions.clone();
        while let Some(id) = queue.pop_front() {
            let depth = self.nodes[id].depth;
            if depth >= self.cfg.max_iters {
                return Ok(Verdict::ResourceLimit(format!("iteration limit of {} reached", self.cfg.max_iters)));
            }
            for t in &transitions {
                let (cubes, abstracted) = match self.expand(t, id)? {
                    Ok(c) => c,
                    Err(v) => return Ok(v),
                };
                let via = Via {
                    transition: t.name.clone(),
                    abstracted,
                    accelerated: t.accelerates.is_some(),
                };
                for f in cubes {
                    if self.nodes.len() >= self.cfg.max_nodes {
                        return Ok(Verdict::ResourceLimit(format!("node limit of {} reached", self.cfg.max_nodes)));
                    }
                    if let Outcome::Stop(v) = self.admit(f, Some(id), Some(via.clone()), depth + 1, &mut queue)? {
                        return Ok(v);
                    }
                }
            }
        }
        Ok(Verdict::Safe)
    }
}

/// The problem explored under `cfg`: loops accelerated first, then universal
/// guards transformed when that mode is selected.
pub fn prepare(p: &SafetyProblem, cfg: &EngineConfig) -> Result<(SafetyProblem, Vec<String>, BTreeSet<String>), EngineError> {
    let (mut q, accelerated) = if cfg.accelerate {
        accelerate_problem(p)
    } else {
        (p.clone(), Vec::new())
    };
    let mut transformed = BTreeSet::new();
    if cfg.abstraction == AbstractionMode::Transform && q.transitions.iter().any(|t| t.universal.is_some()) {
        let (r, done) = transform_problem(&q)?;
        transformed = done.into_iter().map(|d| d.base).collect();
        q = r;
    }
    Ok((q, accelerated, transformed))
}

/// Backward reachability from the unsafe states.
pub fn backward_reach(p: &SafetyProblem, cfg: &EngineConfig) -> Result<BackwardResult, EngineError> {
    let (problem, accelerated, transformed) = prepare(p, cfg)?;
    let mut scfg = SolverConfig::new(problem.theory);
    scfg.budget = cfg.solver_budget;
    scfg.dump_dir = cfg.dump_smt.clone();
    let dump = match &cfg.dump_frontier {
        Some(path) => Some(std::fs::File::create(path)?),
        None => None,
    };
    let taken = problem.vars.iter().map(|v| v.name.clone()).collect();
    let mut run = Run {
        cfg,
        solver: Solver::new(problem.sig.clone(), scfg),
        problem,
        nodes: Vec::new(),
        deleted: 0,
        universal_preimages: Vec::new(),
        transformed,
        taken,
        dump,
    };
    let mut verdict = run.search()?;
    if let Verdict::Unsafe { trace, concretization } = &mut verdict {
        if cfg.concretize {
            *concretization = concretize_trace(trace, p, cfg)?;
        }
    }
    Ok(BackwardResult {
        verdict,
        stats: run.stats(),
        nodes: run.nodes,
        accelerated,
        universal_preimages: run.universal_preimages,
        problem: run.problem,
    })
}

#[cfg(test)]
mod tests;
