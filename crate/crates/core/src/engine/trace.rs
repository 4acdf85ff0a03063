//! Symbolic counterexamples and their replay on finite instances.

use std::fmt;

use serde::Serialize;

use super::{backward_reach, AbstractionMode, EngineConfig, EngineError, Node, Verdict};
use crate::acceleration::accelerate_problem;
use crate::oracle::{default_int_bounds, instantiate, OracleError, Run};
use crate::system::SafetyProblem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub transition: String,
    pub abstracted: bool,
    pub accelerated: bool,
}

/// Transitions from an initial state to an unsafe one, in forward order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Node ids from the one meeting the initial states back to a root.
    pub nodes: Vec<usize>,
}

impl Trace {
    pub fn names(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.transition.clone()).collect()
    }

    pub fn uses_abstraction(&self) -> bool {
        self.steps.iter().any(|s| s.abstracted)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("(initial state is unsafe)");
        }
        for (n, s) in self.steps.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&s.transition)?;
            if s.abstracted && !s.accelerated {
                f.write_str("*")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Concretization {
    NotAttempted,
    Confirmed(usize, Run),
    /// No concrete run, and the exact search finds nothing unsafe either.
    Spurious,
    Unknown(String),
}

/// Follows parent links from the node that met the initial states.
pub fn extract_trace(nodes: &[Node], id: usize) -> Trace {
    let mut steps = Vec::new();
    let mut ids = Vec::new();
    let mut cur = Some(id);
    while let Some(n) = cur {
        let node = &nodes[n];
        ids.push(n);
        if let Some(via) = &node.via {
            steps.push(TraceStep {
                transition: via.transition.clone(),
                abstracted: via.abstracted,
                accelerated: via.accelerated,
            });
        }
        cur = node.parent;
    }
    Trace { steps, nodes: ids }
}

/// Replays `trace` on instances of size `1..=cfg.oracle_n`. When that fails and
/// the trace went through abstracted steps, the search is repeated without
/// abstraction or acceleration to tell a spurious trace from a bad replay.
pub fn concretize_trace(trace: &Trace, p: &SafetyProblem, cfg: &EngineConfig) -> Result<Concretization, EngineError> {
    let q = if trace.steps.iter().any(|s| s.accelerated) {
        accelerate_problem(p).0
    } else {
        p.clone()
    };
    let names = trace.names();
    let mut skipped = None;
    for n in 1..=cfg.oracle_n {
        let (lo, hi) = default_int_bounds(&q, n);
        let hi = hi.max(names.len() as i64 + 2);
        let run = instantiate(&q, n, lo, hi).and_then(|inst| inst.replay(&names));
        match run {
            Ok(Some(run)) => return Ok(Concretization::Confirmed(n, run)),
            Ok(None) => {}
            Err(OracleError::TooLarge(s)) => {
                skipped = Some(format!("instance of size {n} has over {s} states"));
                break;
            }
            Err(e) => return Ok(Concretization::Unknown(e.to_string())),
        }
    }
    if !trace.uses_abstraction() {
        return Ok(Concretization::Unknown(
            skipped.unwrap_or_else(|| format!("no concrete run up to size {}", cfg.oracle_n)),
        ));
    }
    let exact = EngineConfig {
        abstraction: AbstractionMode::Off,
        accelerate: false,
        concretize: false,
        dump_frontier: None,
        dump_smt: None,
        record_universal: false,
        ..cfg.clone()
    };
    let r = backward_reach(p, &exact)?;
    Ok(match r.verdict {
        Verdict::Unsafe { .. } => Concretization::Unknown("exact search also reaches an unsafe state".into()),
        _ => Concretization::Spurious,
    })
}
