use super::*;
use crate::oracle::{eval::eval_formula, instantiate, models_of, Layout};
use crate::system::{classify_transition, parse_system};

fn bench(name: &str) -> SafetyProblem {
    let text = std::fs::read_to_string(format!("{}/../../benchmarks/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    parse_system(&text).unwrap()
}

#[test]
fn default_set_is_the_witnesses() {
    let p = bench("mutex.abs");
    let t3 = p.transition("t3").unwrap();
    let f = Formula::exists(t3.params.clone(), t3.full_guard());
    let x = default_instantiation_set(&f, Theory::Simple);
    assert_eq!(x.terms, vec![Term::var(&t3.params[0])]);
    assert_eq!(x.origin, Origin::Default);
}

#[test]
fn abstraction_over_approximates_guards() {
    let p = bench("mutex.abs");
    for name in ["t1", "t3"] {
        let t = p.transition(name).unwrap();
        let f = Formula::exists(t.params.clone(), t.full_guard());
        let g = abstract_formula(&f, &default_instantiation_set(&f, Theory::Simple)).unwrap();
        assert!(g.split_exists().1.is_quantifier_free());
        for n in 1..=4 {
            let layout = Layout::new(p.vars.clone(), &p.sig, n, 0, 0).unwrap();
            for s in layout.states(1 << 20).unwrap() {
                let v = layout.view(&s);
                assert!(!eval_formula(&v, &f) || eval_formula(&v, &g));
            }
        }
    }
}

#[test]
fn transform_yields_functional_transitions() {
    let p = bench("mutex.abs");
    let (q, done) = transform_problem(&p).unwrap();
    assert_eq!(done.len(), 2);
    assert!(done.iter().all(|d| d.added_crash_sort));
    for t in &q.transitions {
        assert_eq!(classify_transition(t).unwrap(), TransitionKind::Functional);
    }
    assert_eq!(q.sig.enum_consts("loc").last().unwrap(), CRASHED);
    // t3 from (I, W): process 1 enters; from (W, W) either 0 enters, or 1 enters and 0 crashes
    let inst = instantiate(&q, 2, 0, 0).unwrap();
    let t3 = q.transition("t3").unwrap();
    let from = crate::oracle::ConcreteState { vals: vec![vec![0, 2]] };
    let succ: Vec<_> = inst.successors(t3, &from).into_iter().map(|(_, s)| s.vals).collect();
    assert_eq!(succ, vec![vec![vec![0, 3]]]);
    let from = crate::oracle::ConcreteState { vals: vec![vec![2, 2]] };
    let mut succ: Vec<_> = inst.successors(t3, &from).into_iter().map(|(_, s)| s.vals).collect();
    succ.sort();
    assert_eq!(succ, vec![vec![vec![3, 2]], vec![vec![4, 3]]]);
}

#[test]
fn relativized_unsafe_ignores_crashed() {
    let p = bench("mutex.abs");
    let (q, _) = transform_problem(&p).unwrap();
    let models = models_of(&q.vars, &q.sig, &q.unsafe_, 2, 0, 0).unwrap();
    assert_eq!(models.len(), 1);
    assert_eq!(models[0].vals, vec![vec![3, 3]]);
}
