//! SMT-LIB rendering of ground queries for offline comparison with external solvers.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::logic::{Formula, Rel, Signature, Sort, Term, Var};

fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Index | Sort::Int => "Int".into(),
        Sort::Enum(n) => n.clone(),
        Sort::Array(e) => format!("(Array Int {})", sort_name(e)),
    }
}

fn ident(name: &str) -> String {
    if name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&ident(&v.name)),
        Term::EnumConst { name, .. } => out.push_str(&ident(name)),
        Term::Int(n) if *n < 0 => write!(out, "(- {})", -n).unwrap(),
        Term::Int(n) => write!(out, "{n}").unwrap(),
        Term::Offset(b, k) => {
            out.push_str("(+ ");
            term(b, out);
            out.push(' ');
            term(&Term::Int(*k), out);
            out.push(')');
        }
        Term::Read(a, i) => {
            out.push_str("(select ");
            term(a, out);
            out.push(' ');
            term(i, out);
            out.push(')');
        }
        Term::Write(a, i, e) => {
            out.push_str("(store ");
            term(a, out);
            out.push(' ');
            term(i, out);
            out.push(' ');
            term(e, out);
            out.push(')');
        }
        // reduced away before any query is rendered
        other => write!(out, "|{other}|").unwrap(),
    }
}

fn formula(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(rel, l, r) => {
            let op = match rel {
                Rel::Eq => "=",
                Rel::Ne => "distinct",
                Rel::Lt => "<",
                Rel::Le => "<=",
            };
            write!(out, "({op} ").unwrap();
            term(l, out);
            out.push(' ');
            term(r, out);
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            formula(g, out);
            out.push(')');
        }
        Formula::And(gs) | Formula::Or(gs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for g in gs {
                out.push(' ');
                formula(g, out);
            }
            out.push(')');
        }
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            out.push_str(if matches!(f, Formula::Exists(..)) { "(exists (" } else { "(forall (" });
            for v in vs {
                write!(out, "({} Int)", ident(&v.name)).unwrap();
            }
            out.push_str(") ");
            formula(g, out);
            out.push(')');
        }
    }
}

/// A self-contained SMT-LIB script asserting `f`.
pub fn render_query(sig: &Signature, f: &Formula) -> String {
    let mut out = String::from("(set-logic ALL)\n");
    for (name, consts) in &sig.enums {
        write!(out, "(declare-datatypes (({} 0)) ((", ident(name)).unwrap();
        let cs: Vec<String> = consts.iter().map(|c| format!("({})", ident(c))).collect();
        out.push_str(&cs.join(" "));
        out.push_str(")))\n");
    }
    let vars: BTreeSet<Var> = f.free_vars();
    for v in &vars {
        writeln!(out, "(declare-const {} {})", ident(&v.name), sort_name(&v.sort)).unwrap();
        if v.sort == Sort::Index {
            writeln!(out, "(assert (>= {} 0))", ident(&v.name)).unwrap();
        }
    }
    out.push_str("(assert ");
    formula(f, &mut out);
    out.push_str(")\n(check-sat)\n");
    out
}
