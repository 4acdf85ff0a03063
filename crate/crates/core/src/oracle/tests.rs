use super::*;
use crate::system::parse_system;

fn bench(name: &str) -> SafetyProblem {
    let text = std::fs::read_to_string(format!("{}/../../benchmarks/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    parse_system(&text).unwrap()
}

#[test]
fn mutex_small_instances() {
    let p = bench("mutex.abs");
    let inst = instantiate(&p, 2, 0, 1).unwrap();
    assert_eq!(inst.init_states().unwrap(), vec![ConcreteState { vals: vec![vec![0, 0]] }]);
    for n in 1..=4 {
        let inst = instantiate(&p, n, 0, 1).unwrap();
        assert_eq!(inst.forward_reach().unwrap().verdict, Verdict::SafeUpTo(n));
    }
}

#[test]
fn buggy_mutex_run_ends_unsafe() {
    let p = bench("mutex_buggy.abs");
    let inst = instantiate(&p, 2, 0, 1).unwrap();
    let Verdict::UnsafeAt(2, run) = inst.forward_reach().unwrap().verdict else { panic!() };
    assert!(inst.eval(&run.init, &p.init));
    assert!(inst.is_unsafe(&run.steps.last().unwrap().state));
    let names: Vec<String> = run.steps.iter().map(|s| s.transition.clone()).collect();
    let replayed = inst.replay(&names).unwrap().unwrap();
    assert_eq!(replayed.steps.len(), names.len());
}

#[test]
fn init_test_safe_at_three() {
    let p = bench("init_test.abs");
    let (lo, hi) = default_int_bounds(&p, 3);
    let inst = instantiate(&p, 3, lo, hi).unwrap();
    assert_eq!(inst.forward_reach().unwrap().verdict, Verdict::SafeUpTo(3));
    let bad = bench("init_test_buggy.abs");
    let inst = instantiate(&bad, 3, lo, hi).unwrap();
    assert!(matches!(inst.forward_reach().unwrap().verdict, Verdict::UnsafeAt(3, _)));
}

#[test]
fn model_enumeration() {
    let p = bench("mutex.abs");
    assert!(models_of(&p.vars, &p.sig, &Formula::False, 2, 0, 0).unwrap().is_empty());
    let u = models_of(&p.vars, &p.sig, &p.unsafe_, 2, 0, 0).unwrap();
    assert_eq!(u, vec![ConcreteState { vals: vec![vec![3, 3]] }]);
    assert_eq!(models_of(&p.vars, &p.sig, &p.init, 3, 0, 0).unwrap().len(), 1);
}
