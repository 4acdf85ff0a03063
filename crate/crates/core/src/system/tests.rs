use super::*;

fn bench(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../benchmarks/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn mutex_shapes() {
    let p = parse_system(&bench("mutex.abs")).unwrap();
    let kinds: Vec<TransitionKind> = p.transitions.iter().map(|t| classify_transition(t).unwrap()).collect();
    use TransitionKind::*;
    assert_eq!(kinds, vec![UniversallyGuarded, Functional, UniversallyGuarded, Functional, Functional]);
}

#[test]
fn init_test_shapes() {
    let p = parse_system(&bench("init_test.abs")).unwrap();
    assert_eq!(p.transitions.len(), 6);
    assert!(p.transitions.iter().all(|t| t.kind() == TransitionKind::Ground));
    // identity frame is materialized
    let t3 = p.transition("t3").unwrap();
    assert!(t3.is_identity(p.var("a").unwrap()));
    assert_eq!(t3.update("J").unwrap().to_string(), "(+ J 1)");
}

#[test]
fn round_trip_on_benchmarks() {
    for name in ["mutex.abs", "mutex_buggy.abs", "bakery.abs", "init_test.abs", "init_test_buggy.abs"] {
        let p = parse_system(&bench(name)).unwrap();
        let printed = print_system(&p);
        assert_eq!(parse_system(&printed).unwrap(), p, "{name}");
        assert_eq!(print_system(&parse_system(&printed).unwrap()), printed);
    }
}

#[test]
fn errors_carry_positions() {
    assert!(matches!(parse_system(""), Err(SystemError::Parse { line: 1, col: 1, .. })));
    let bad = "(system s (theory simple)\n  (var x index)\n  (init (= x y))\n  (unsafe true))";
    assert!(matches!(parse_system(bad), Err(SystemError::Parse { line: 3, col: 14, .. })));
    let offset = "(system s (theory simple) (var x index) (init true) (unsafe (= (+ x 1) x)))";
    assert!(matches!(parse_system(offset), Err(SystemError::Validation(_))));
    let two = "(system s (theory simple) (enum-sort e (A B)) (array a index e) (init true)
        (transition t (exists (i) (and (forall (j k) (= (select a j) A)) (assign))))
        (unsafe true))";
    assert!(matches!(parse_system(two), Err(SystemError::Shape(..))));
    let nested = "(system s (theory simple) (enum-sort e (A B)) (array a index e) (init true)
        (transition t (exists (i) (and (exists (j) (= (select a j) A)) (assign))))
        (unsafe true))";
    assert!(matches!(parse_system(nested), Err(SystemError::Shape(..))));
}
