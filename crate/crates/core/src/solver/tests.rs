use super::*;
use crate::logic::Var;

fn sig() -> Signature {
    let mut sig = Signature::default();
    sig.enums.insert("loc".into(), vec!["I".into(), "W".into(), "C".into()]);
    sig
}

fn loc(name: &str) -> Term {
    sig().enum_const("loc", name).unwrap()
}

fn arr() -> Var {
    Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))))
}

fn solver(theory: Theory) -> Solver {
    Solver::new(sig(), SolverConfig::new(theory))
}

#[test]
fn two_critical_processes_and_mutual_exclusion_guard() {
    // ∃i,j. i≠j ∧ a[i]=C ∧ a[j]=C   together with   ∀k. a[k]≠C
    let (i, j, k) = (Var::index("i"), Var::index("j"), Var::index("k"));
    let a = Term::var(&arr());
    let ex = Formula::exists(
        vec![i.clone(), j.clone()],
        Formula::and(vec![
            Formula::ne(Term::var(&i), Term::var(&j)),
            Formula::eq(Term::read(a.clone(), Term::var(&i)), loc("C")),
            Formula::eq(Term::read(a.clone(), Term::var(&j)), loc("C")),
        ]),
    );
    let univ = Formula::forall(vec![k.clone()], Formula::ne(Term::read(a.clone(), Term::var(&k)), loc("C")));
    assert!(solver(Theory::Simple).check_sat_exists_forall(&ex, &univ).unwrap().is_unsat());
    let univ_i = Formula::forall(vec![k.clone()], Formula::ne(Term::read(a, Term::var(&k)), loc("W")));
    match solver(Theory::Simple).check_sat_exists_forall(&ex, &univ_i).unwrap() {
        SatResult::Sat(m) => assert!(m.domain_size >= 2),
        r => panic!("expected sat, got {r:?}"),
    }
}

#[test]
fn write_then_read_is_decided() {
    let (i, j) = (Var::index("i"), Var::index("j"));
    let a = Term::var(&arr());
    let w = Term::write(a.clone(), Term::var(&i), loc("W"));
    // a[i:=W][j] = C ∧ i = j is unsat
    let f = Formula::and(vec![
        Formula::eq(Term::read(w.clone(), Term::var(&j)), loc("C")),
        Formula::eq(Term::var(&i), Term::var(&j)),
    ]);
    assert!(solver(Theory::Simple).check_sat_ground(&f).unwrap().is_unsat());
    let g = Formula::eq(Term::read(w, Term::var(&j)), loc("C"));
    let s = solver(Theory::Simple);
    let SatResult::Sat(m) = s.check_sat_ground(&g).unwrap() else { panic!() };
    assert!(eval_formula(&m, &g));
}

#[test]
fn difference_constraints() {
    let (x, y) = (Var::new("x", Sort::Int), Var::new("y", Sort::Int));
    let f = Formula::and(vec![
        Formula::le(Term::offset(Term::var(&x), 2), Term::var(&y)),
        Formula::lt(Term::var(&y), Term::offset(Term::var(&x), 2)),
    ]);
    assert!(solver(Theory::DiffArith).check_sat_ground(&f).unwrap().is_unsat());
    let g = Formula::and(vec![
        Formula::le(Term::offset(Term::var(&x), 2), Term::var(&y)),
        Formula::lt(Term::var(&y), Term::offset(Term::var(&x), 3)),
    ]);
    let SatResult::Sat(m) = solver(Theory::DiffArith).check_sat_ground(&g).unwrap() else { panic!() };
    assert_eq!(m.int_vals["y"] - m.int_vals["x"], 2);
}

#[test]
fn entailment_by_matching_and_by_refutation() {
    let (i, j) = (Var::index("i"), Var::index("j"));
    let a = Term::var(&arr());
    let s = solver(Theory::Simple);
    let two = Formula::exists(
        vec![i.clone(), j.clone()],
        Formula::and(vec![
            Formula::lt(Term::var(&i), Term::var(&j)),
            Formula::eq(Term::read(a.clone(), Term::var(&i)), loc("C")),
            Formula::eq(Term::read(a.clone(), Term::var(&j)), loc("W")),
        ]),
    );
    let one = Formula::exists(vec![i.clone()], Formula::eq(Term::read(a.clone(), Term::var(&i)), loc("C")));
    assert_eq!(s.entails(&two, &one).unwrap(), Entailment::Yes);
    assert_eq!(s.entails(&one, &two).unwrap(), Entailment::No);
    // a[i] ≠ I ∧ a[i] ≠ W entails a[i] = C only through the enum sort
    let not_iw = Formula::exists(
        vec![i.clone()],
        Formula::and(vec![
            Formula::ne(Term::read(a.clone(), Term::var(&i)), loc("I")),
            Formula::ne(Term::read(a, Term::var(&i)), loc("W")),
        ]),
    );
    assert_eq!(s.entails(&not_iw, &one).unwrap(), Entailment::Yes);
}

#[test]
fn small_budget_reports_unknown_or_limit() {
    let vars: Vec<Var> = (0..12).map(|n| Var::index(format!("v{n}"))).collect();
    let mut parts = Vec::new();
    for w in vars.windows(2) {
        parts.push(Formula::or(vec![
            Formula::lt(Term::var(&w[0]), Term::var(&w[1])),
            Formula::lt(Term::var(&w[1]), Term::var(&w[0])),
        ]));
    }
    parts.push(Formula::lt(Term::var(&vars[11]), Term::var(&vars[0])));
    parts.push(Formula::lt(Term::var(&vars[0]), Term::var(&vars[11])));
    let f = Formula::and(parts);
    let mut cfg = SolverConfig::new(Theory::DiffArith);
    cfg.budget = 3;
    let s = Solver::new(sig(), cfg.clone());
    assert!(matches!(s.check_sat_ground(&f).unwrap(), SatResult::Unknown(_) | SatResult::Unsat));
    cfg.theory = Theory::Simple;
    let s = Solver::new(sig(), cfg);
    assert!(matches!(s.check_sat_ground(&f), Err(SolverError::ResourceLimit(3)) | Ok(SatResult::Unsat)));
}
