//! Case-splitting search over quantifier-free NNF formulae. Literals are
//! collected along a branch, disjunctions are simplified against them, and the
//! theory solver prunes every branch point.

use std::collections::HashSet;

use crate::logic::{complement_atom, Formula, LogicError, Signature};

use super::theory::{compile, solve};
use super::Model;

#[derive(Debug)]
pub(crate) enum SearchError {
    Budget,
    Logic(LogicError),
}

impl From<LogicError> for SearchError {
    fn from(e: LogicError) -> Self {
        SearchError::Logic(e)
    }
}

pub(crate) struct Search<'a> {
    pub sig: &'a Signature,
    pub budget: usize,
    pub steps: usize,
}

#[derive(Clone, Default)]
struct Branch {
    lits: Vec<Formula>,
    seen: HashSet<Formula>,
    ors: Vec<Vec<Formula>>,
}

enum Lit {
    Holds,
    Fails,
    Open,
}

impl Branch {
    fn status(&self, atom: &Formula) -> Lit {
        match atom {
            Formula::True => Lit::Holds,
            Formula::False => Lit::Fails,
            Formula::Atom(rel, l, r) => {
                if self.seen.contains(atom) {
                    Lit::Holds
                } else if self.seen.contains(&complement_atom(*rel, l, r)) {
                    Lit::Fails
                } else {
                    Lit::Open
                }
            }
            _ => Lit::Open,
        }
    }

    /// Absorbs `f` into the branch; false on an immediate clash.
    fn absorb(&mut self, f: Formula) -> Result<bool, SearchError> {
        let mut agenda = vec![f];
        loop {
            while let Some(f) = agenda.pop() {
                match f {
                    Formula::True => {}
                    Formula::False => return Ok(false),
                    Formula::Atom(..) => match self.status(&f) {
                        Lit::Holds => {}
                        Lit::Fails => return Ok(false),
                        Lit::Open => {
                            self.seen.insert(f.clone());
                            self.lits.push(f);
                        }
                    },
                    Formula::And(gs) => agenda.extend(gs.into_iter().rev()),
                    Formula::Or(gs) => self.ors.push(gs),
                    other => {
                        return Err(SearchError::Logic(LogicError::UnsupportedTerm(format!(
                            "quantifier in ground query: {other}"
                        ))))
                    }
                }
            }
            let mut kept = Vec::with_capacity(self.ors.len());
            let mut changed = false;
            for or in std::mem::take(&mut self.ors) {
                let mut alive = Vec::with_capacity(or.len());
                let mut satisfied = false;
                for child in or {
                    match self.status(&child) {
                        Lit::Holds => {
                            satisfied = true;
                            break;
                        }
                        Lit::Fails => {}
                        Lit::Open => alive.push(child),
                    }
                }
                if satisfied {
                    changed = true;
                    continue;
                }
                match alive.len() {
                    0 => return Ok(false),
                    1 => {
                        agenda.push(alive.pop().unwrap());
                        changed = true;
                    }
                    _ => kept.push(alive),
                }
            }
            self.ors = kept;
            if !changed && agenda.is_empty() {
                return Ok(true);
            }
        }
    }
}

impl Search<'_> {
    pub fn run(&mut self, f: Formula) -> Result<Option<Model>, SearchError> {
        let mut b = Branch::default();
        if !b.absorb(f)? {
            return Ok(None);
        }
        self.explore(b)
    }

    fn explore(&mut self, b: Branch) -> Result<Option<Model>, SearchError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(SearchError::Budget);
        }
        let compiled = compile(&b.lits)?;
        let Some(model) = solve(&compiled, self.sig) else {
            return Ok(None);
        };
        let Some(pick) = (0..b.ors.len()).min_by_key(|&k| b.ors[k].len()) else {
            return Ok(Some(model));
        };
        let mut rest = b.clone();
        let or = rest.ors.swap_remove(pick);
        for child in or {
            let mut nb = rest.clone();
            if nb.absorb(child)? {
                if let Some(m) = self.explore(nb)? {
                    return Ok(Some(m));
                }
            }
        }
        Ok(None)
    }
}
