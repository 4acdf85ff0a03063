use std::collections::BTreeMap;

use crate::logic::{Formula, Signature, Sort, Term, Var};
use crate::solver::Theory;

use super::sexp::{error, read_one, Sexp};
use super::{validate, SafetyProblem, SystemError, Transition, Universal};

type Res<T> = Result<T, SystemError>;

struct Scope {
    sig: Signature,
    state: BTreeMap<String, Var>,
    bound: Vec<Var>,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<Term> {
        if let Some(v) = self.bound.iter().rev().find(|v| v.name == name) {
            return Some(Term::var(v));
        }
        if let Some(v) = self.state.get(name) {
            return Some(Term::var(v));
        }
        self.sig
            .enums
            .keys()
            .find_map(|sort| self.sig.enum_const(sort, name))
    }

    fn with_bound<T>(&mut self, vs: &[Var], f: impl FnOnce(&mut Self) -> Res<T>) -> Res<T> {
        let n = self.bound.len();
        self.bound.extend(vs.iter().cloned());
        let r = f(self);
        self.bound.truncate(n);
        r
    }

    fn binders(&self, s: &Sexp) -> Res<Vec<Var>> {
        let items = s.list().ok_or_else(|| error(s.pos(), "a list of index variables"))?;
        if items.is_empty() {
            return Err(error(s.pos(), "at least one variable"));
        }
        items
            .iter()
            .map(|x| {
                let name = x.atom().ok_or_else(|| error(x.pos(), "a variable name"))?;
                Ok(Var::index(name))
            })
            .collect()
    }

    fn term(&mut self, s: &Sexp) -> Res<Term> {
        match s {
            Sexp::Atom(a, p) => {
                if let Ok(n) = a.parse::<i64>() {
                    return Ok(Term::Int(n));
                }
                self.lookup(a).ok_or_else(|| error(*p, format!("a declared symbol, found {a}")))
            }
            Sexp::List(items, p) => {
                let head = s.head().ok_or_else(|| error(*p, "a term operator"))?;
                let args = &items[1..];
                let arity = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(error(*p, format!("{n} arguments to {head}")))
                    }
                };
                match head {
                    "select" => {
                        arity(2)?;
                        Ok(Term::read(self.term(&args[0])?, self.term(&args[1])?))
                    }
                    "store" => {
                        arity(3)?;
                        Ok(Term::write(self.term(&args[0])?, self.term(&args[1])?, self.term(&args[2])?))
                    }
                    "store-range" => {
                        arity(4)?;
                        Ok(Term::interval_write(
                            self.term(&args[0])?,
                            self.term(&args[1])?,
                            self.term(&args[2])?,
                            self.term(&args[3])?,
                        ))
                    }
                    "store-if" => {
                        arity(4)?;
                        let vs = self.binders(&args[1])?;
                        if vs.len() != 1 {
                            return Err(error(args[1].pos(), "exactly one variable"));
                        }
                        let array = self.term(&args[0])?;
                        let value = self.term(&args[3])?;
                        let cond = self.with_bound(&vs, |sc| sc.formula(&args[2]))?;
                        Ok(Term::CondWrite {
                            array: Box::new(array),
                            var: vs[0].clone(),
                            cond: Box::new(cond),
                            value: Box::new(value),
                        })
                    }
                    "+" | "-" => {
                        arity(2)?;
                        let base = self.term(&args[0])?;
                        let k = args[1]
                            .atom()
                            .and_then(|a| a.parse::<i64>().ok())
                            .ok_or_else(|| error(args[1].pos(), "an integer constant"))?;
                        Ok(Term::offset(base, if head == "+" { k } else { -k }))
                    }
                    other => Err(error(*p, format!("a term operator, found {other}"))),
                }
            }
        }
    }

    fn formula(&mut self, s: &Sexp) -> Res<Formula> {
        match s {
            Sexp::Atom(a, p) => match a.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ => Err(error(*p, format!("a formula, found {a}"))),
            },
            Sexp::List(items, p) => {
                let head = s.head().ok_or_else(|| error(*p, "a formula operator"))?;
                let args = &items[1..];
                let binary = |sc: &mut Self| -> Res<(Term, Term)> {
                    if args.len() != 2 {
                        return Err(error(*p, format!("2 arguments to {head}")));
                    }
                    Ok((sc.term(&args[0])?, sc.term(&args[1])?))
                };
                match head {
                    "=" => binary(self).map(|(l, r)| Formula::eq(l, r)),
                    "distinct" => binary(self).map(|(l, r)| Formula::ne(l, r)),
                    "<" => binary(self).map(|(l, r)| Formula::lt(l, r)),
                    "<=" => binary(self).map(|(l, r)| Formula::le(l, r)),
                    ">" => binary(self).map(|(l, r)| Formula::lt(r, l)),
                    ">=" => binary(self).map(|(l, r)| Formula::le(r, l)),
                    "not" => {
                        if args.len() != 1 {
                            return Err(error(*p, "1 argument to not"));
                        }
                        Ok(Formula::not(self.formula(&args[0])?))
                    }
                    "and" | "or" => {
                        let parts = args.iter().map(|a| self.formula(a)).collect::<Res<Vec<_>>>()?;
                        Ok(if head == "and" { Formula::and(parts) } else { Formula::or(parts) })
                    }
                    "=>" => {
                        if args.len() != 2 {
                            return Err(error(*p, "2 arguments to =>"));
                        }
                        Ok(Formula::implies(self.formula(&args[0])?, self.formula(&args[1])?))
                    }
                    "exists" | "forall" => {
                        if args.len() != 2 {
                            return Err(error(*p, format!("a variable list and a body for {head}")));
                        }
                        let vs = self.binders(&args[0])?;
                        let body = self.with_bound(&vs, |sc| sc.formula(&args[1]))?;
                        Ok(if head == "exists" {
                            Formula::exists(vs, body)
                        } else {
                            Formula::forall(vs, body)
                        })
                    }
                    other => Err(error(*p, format!("a formula operator, found {other}"))),
                }
            }
        }
    }

    fn transition(&mut self, name: &str, body: &Sexp, vars: &[Var]) -> Res<Transition> {
        let (params, inner) = if body.head() == Some("exists") {
            let items = body.list().unwrap();
            if items.len() != 3 {
                return Err(error(body.pos(), "(exists (VARS) BODY)"));
            }
            (self.binders(&items[1])?, &items[2])
        } else {
            (Vec::new(), body)
        };
        let parts: Vec<&Sexp> = if inner.head() == Some("and") {
            inner.list().unwrap()[1..].iter().collect()
        } else {
            vec![inner]
        };
        self.with_bound(&params, |sc| {
            let mut guards = Vec::new();
            let mut universal = None;
            let mut assigns: Option<Vec<(Var, Term)>> = None;
            for part in parts {
                match part.head() {
                    Some("assign") => {
                        if assigns.is_some() {
                            return Err(error(part.pos(), "a single assign block"));
                        }
                        assigns = Some(sc.assignments(part)?);
                    }
                    Some("forall") => {
                        if universal.is_some() {
                            return Err(error(part.pos(), "at most one universal guard"));
                        }
                        let items = part.list().unwrap();
                        if items.len() != 3 {
                            return Err(error(part.pos(), "(forall (K) BODY)"));
                        }
                        let vs = sc.binders(&items[1])?;
                        if vs.len() != 1 {
                            return Err(SystemError::Shape(name.into(), "universal guard over several variables".into()));
                        }
                        let body = sc.with_bound(&vs, |sc| sc.formula(&items[2]))?;
                        universal = Some(Universal { var: vs[0].clone(), body });
                    }
                    _ => guards.push(sc.formula(part)?),
                }
            }
            let assigns = assigns.ok_or_else(|| error(inner.pos(), "an (assign ...) block"))?;
            let updates = vars
                .iter()
                .map(|v| {
                    let t = assigns
                        .iter()
                        .find(|(x, _)| x == v)
                        .map(|(_, t)| t.clone())
                        .unwrap_or_else(|| Term::var(v));
                    (v.clone(), t)
                })
                .collect();
            Ok(Transition {
                name: name.to_string(),
                params: params.clone(),
                guard: Formula::and(guards),
                universal,
                updates,
                accelerates: None,
            })
        })
    }

    fn assignments(&mut self, s: &Sexp) -> Res<Vec<(Var, Term)>> {
        let mut out: Vec<(Var, Term)> = Vec::new();
        for item in &s.list().unwrap()[1..] {
            let pair = item.list().filter(|xs| xs.len() == 2).ok_or_else(|| error(item.pos(), "(VAR TERM)"))?;
            let name = pair[0].atom().ok_or_else(|| error(pair[0].pos(), "a state variable"))?;
            let v = self
                .state
                .get(name)
                .cloned()
                .ok_or_else(|| error(pair[0].pos(), format!("a state variable, found {name}")))?;
            if out.iter().any(|(x, _)| x == &v) {
                return Err(error(pair[0].pos(), format!("a single assignment to {name}")));
            }
            out.push((v, self.term(&pair[1])?));
        }
        Ok(out)
    }
}

fn name_of(s: Option<&Sexp>, pos: super::sexp::Pos, what: &str) -> Res<String> {
    s.and_then(Sexp::atom)
        .map(str::to_string)
        .ok_or_else(|| error(s.map(Sexp::pos).unwrap_or(pos), what))
}

fn sort_of(s: &Sexp, sig: &Signature) -> Res<Sort> {
    match s.atom() {
        Some("index") => Ok(Sort::Index),
        Some("int") => Ok(Sort::Int),
        Some(n) if sig.enums.contains_key(n) => Ok(Sort::Enum(n.to_string())),
        _ => Err(error(s.pos(), "index, int, or a declared enum sort")),
    }
}

/// Parses and validates a problem in the s-expression input format.
pub fn parse_system(text: &str) -> Result<SafetyProblem, SystemError> {
    let top = read_one(text)?;
    let items = match (&top, top.head()) {
        (Sexp::List(items, _), Some("system")) => items,
        _ => return Err(error(top.pos(), "(system NAME ...)")),
    };
    let pos = top.pos();
    let name = name_of(items.get(1), pos, "a system name")?;
    let theory = match items.get(2) {
        Some(t) if t.head() == Some("theory") => match t.list().unwrap().get(1).and_then(Sexp::atom) {
            Some("simple") if t.list().unwrap().len() == 2 => Theory::Simple,
            Some("diffarith") if t.list().unwrap().len() == 2 => Theory::DiffArith,
            _ => return Err(error(t.pos(), "(theory simple|diffarith)")),
        },
        other => return Err(error(other.map(Sexp::pos).unwrap_or(pos), "(theory simple|diffarith)")),
    };
    let mut scope = Scope {
        sig: Signature::default(),
        state: BTreeMap::new(),
        bound: Vec::new(),
    };
    let mut enum_order = Vec::new();
    let mut vars: Vec<Var> = Vec::new();
    let mut init = None;
    let mut unsafe_ = None;
    let mut pending = Vec::new();
    for item in &items[3..] {
        let xs = item.list().ok_or_else(|| error(item.pos(), "a declaration"))?;
        match item.head() {
            Some("enum-sort") => {
                let n = name_of(xs.get(1), item.pos(), "an enum sort name")?;
                let consts = xs
                    .get(2)
                    .and_then(Sexp::list)
                    .filter(|_| xs.len() == 3)
                    .ok_or_else(|| error(item.pos(), "(enum-sort NAME (CONST ...))"))?;
                let consts = consts
                    .iter()
                    .map(|c| c.atom().map(str::to_string).ok_or_else(|| error(c.pos(), "a constant name")))
                    .collect::<Res<Vec<_>>>()?;
                for c in &consts {
                    if scope.lookup(c).is_some() {
                        return Err(error(item.pos(), format!("a fresh constant name, {c} is taken")));
                    }
                }
                if scope.sig.enums.contains_key(&n) {
                    return Err(error(item.pos(), format!("a fresh sort name, {n} is taken")));
                }
                scope.sig.enums.insert(n.clone(), consts);
                enum_order.push(n);
            }
            Some("var") | Some("array") => {
                let n = name_of(xs.get(1), item.pos(), "a variable name")?;
                let sort = if item.head() == Some("var") {
                    if xs.len() != 3 {
                        return Err(error(item.pos(), "(var NAME SORT)"));
                    }
                    sort_of(&xs[2], &scope.sig)?
                } else {
                    if xs.len() != 4 || xs[2].atom() != Some("index") {
                        return Err(error(item.pos(), "(array NAME index ELEMSORT)"));
                    }
                    Sort::Array(Box::new(sort_of(&xs[3], &scope.sig)?))
                };
                if scope.lookup(&n).is_some() {
                    return Err(error(item.pos(), format!("a fresh variable name, {n} is taken")));
                }
                let v = Var::new(n.clone(), sort);
                scope.state.insert(n, v.clone());
                vars.push(v);
            }
            Some("init") | Some("unsafe") => {
                if xs.len() != 2 {
                    return Err(error(item.pos(), "a single formula"));
                }
                let slot = if item.head() == Some("init") { &mut init } else { &mut unsafe_ };
                if slot.is_some() {
                    return Err(error(item.pos(), "a single declaration"));
                }
                *slot = Some(&xs[1]);
            }
            Some("transition") => {
                let n = name_of(xs.get(1), item.pos(), "a transition name")?;
                if xs.len() != 3 {
                    return Err(error(item.pos(), "(transition NAME BODY)"));
                }
                pending.push((n, &xs[2]));
            }
            _ => return Err(error(item.pos(), "enum-sort, var, array, init, transition or unsafe")),
        }
    }
    let init = scope.formula(init.ok_or_else(|| error(pos, "an (init ...) declaration"))?)?;
    let unsafe_ = scope.formula(unsafe_.ok_or_else(|| error(pos, "an (unsafe ...) declaration"))?)?;
    let transitions = pending
        .into_iter()
        .map(|(n, body)| scope.transition(&n, body, &vars))
        .collect::<Res<Vec<_>>>()?;
    let p = SafetyProblem {
        name,
        theory,
        sig: scope.sig,
        enum_order,
        vars,
        init,
        transitions,
        unsafe_,
    };
    validate(&p)?;
    Ok(p)
}
