use std::fmt::Write;

use crate::logic::{Sort, Term};

use super::{SafetyProblem, Transition};

fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Array(e) => sort_name(e),
        other => other.to_string(),
    }
}

fn transition(t: &Transition) -> String {
    let mut parts: Vec<String> = Vec::new();
    match &t.guard {
        crate::logic::Formula::True => {}
        crate::logic::Formula::And(gs) => parts.extend(gs.iter().map(|g| g.to_string())),
        g => parts.push(g.to_string()),
    }
    if let Some(u) = &t.universal {
        parts.push(u.formula().to_string());
    }
    let assigns: Vec<String> = t
        .updates
        .iter()
        .filter(|(v, term)| *term != Term::var(v))
        .map(|(v, term)| format!("({} {term})", v.name))
        .collect();
    parts.push(format!("(assign{}{})", if assigns.is_empty() { "" } else { " " }, assigns.join(" ")));
    let body = format!("(and {})", parts.join(" "));
    if t.params.is_empty() {
        body
    } else {
        let ps: Vec<&str> = t.params.iter().map(|v| v.name.as_str()).collect();
        format!("(exists ({}) {body})", ps.join(" "))
    }
}

/// Renders a problem in the input format; parsing the output yields the same problem.
pub fn print_system(p: &SafetyProblem) -> String {
    let mut out = String::new();
    writeln!(out, "(system {} (theory {})", p.name, p.theory).unwrap();
    for e in &p.enum_order {
        writeln!(out, "  (enum-sort {e} ({}))", p.sig.enum_consts(e).join(" ")).unwrap();
    }
    for v in &p.vars {
        match &v.sort {
            Sort::Array(_) => writeln!(out, "  (array {} index {})", v.name, sort_name(&v.sort)),
            s => writeln!(out, "  (var {} {})", v.name, sort_name(s)),
        }
        .unwrap();
    }
    writeln!(out, "  (init {})", p.init).unwrap();
    for t in &p.transitions {
        writeln!(out, "  (transition {} {})", t.name, transition(t)).unwrap();
    }
    writeln!(out, "  (unsafe {}))", p.unsafe_).unwrap();
    out
}
