use super::*;
use crate::oracle::{default_int_bounds, instantiate, models_of};
use crate::system::parse_system;

fn load(name: &str) -> SafetyProblem {
    let text = std::fs::read_to_string(format!("{}/../../benchmarks/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    parse_system(&text).unwrap()
}

#[test]
fn mutex_is_safe() {
    let r = backward_reach(&load("mutex.abs"), &EngineConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Safe, "{:?}", r.stats);
    assert!(r.stats.iterations <= 30);
    assert_eq!(r.stats.nodes, r.nodes.len());
    assert_eq!(r.stats.deleted, r.nodes.iter().filter(|n| n.deleted).count());
}

#[test]
fn mutex_without_abstraction_is_unknown() {
    let cfg = EngineConfig {
        abstraction: AbstractionMode::Off,
        ..EngineConfig::default()
    };
    let r = backward_reach(&load("mutex.abs"), &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Unknown("universal guard without abstraction".into()));
}

#[test]
fn transform_mode_agrees_on_mutex() {
    let cfg = EngineConfig {
        abstraction: AbstractionMode::Transform,
        ..EngineConfig::default()
    };
    assert_eq!(backward_reach(&load("mutex.abs"), &cfg).unwrap().verdict, Verdict::Safe);
    let r = backward_reach(&load("mutex_buggy.abs"), &cfg).unwrap();
    assert!(matches!(r.verdict, Verdict::Unsafe { concretization: Concretization::Confirmed(2, _), .. }), "{:?}", r.verdict);
}

#[test]
fn buggy_mutex_trace_is_confirmed() {
    let r = backward_reach(&load("mutex_buggy.abs"), &EngineConfig::default()).unwrap();
    let Verdict::Unsafe { trace, concretization } = r.verdict else { panic!("{:?}", r.verdict) };
    assert!(matches!(concretization, Concretization::Confirmed(2, _)));
    assert_eq!(trace.steps.len(), trace.nodes.len() - 1);
    // t3 is the transition whose guard was dropped
    assert!(trace.names().contains(&"t3".to_string()));
}

#[test]
fn init_test_needs_acceleration() {
    let p = load("init_test.abs");
    let slow = EngineConfig {
        max_iters: 6,
        ..EngineConfig::default()
    };
    assert!(matches!(backward_reach(&p, &slow).unwrap().verdict, Verdict::ResourceLimit(_)));
    let fast = EngineConfig {
        accelerate: true,
        ..EngineConfig::default()
    };
    let r = backward_reach(&p, &fast).unwrap();
    assert_eq!(r.verdict, Verdict::Safe);
    assert_eq!(r.accelerated, vec!["t1", "t3"]);
}

#[test]
fn buggy_init_test_goes_through_the_accelerated_loop() {
    let cfg = EngineConfig {
        accelerate: true,
        ..EngineConfig::default()
    };
    let r = backward_reach(&load("init_test_buggy.abs"), &cfg).unwrap();
    let Verdict::Unsafe { trace, concretization } = r.verdict else { panic!("{:?}", r.verdict) };
    assert!(trace.steps.iter().any(|s| s.accelerated && s.abstracted));
    assert!(matches!(concretization, Concretization::Confirmed(..)));
}

#[test]
fn node_limit_is_reported() {
    let cfg = EngineConfig {
        max_nodes: 3,
        ..EngineConfig::default()
    };
    let r = backward_reach(&load("bakery.abs"), &cfg).unwrap();
    assert!(matches!(r.verdict, Verdict::ResourceLimit(ref s) if s.contains("node limit")), "{:?}", r.verdict);
}

#[test]
fn preimage_of_functional_transition_matches_successors() {
    let p = load("mutex.abs");
    let t = p.transition("t4").unwrap();
    let pre = preimage(t, &p.unsafe_).unwrap();
    let (lo, hi) = default_int_bounds(&p, 3);
    let inst = instantiate(&p, 3, lo, hi).unwrap();
    let models = models_of(&p.vars, &p.sig, &pre, 3, lo, hi).unwrap();
    for s in inst.layout.states(inst.budget).unwrap() {
        let back = inst.successors(t, &s).iter().any(|(_, x)| inst.is_unsafe(x));
        assert_eq!(models.contains(&s), back, "{s:?}");
    }
}

#[test]
fn runs_are_reproducible() {
    let p = load("bakery.abs");
    let a = backward_reach(&p, &EngineConfig::default()).unwrap();
    let b = backward_reach(&p, &EngineConfig::default()).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.stats, b.stats);
}

#[test]
fn frontier_dump_has_one_line_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frontier.jsonl");
    let cfg = EngineConfig {
        dump_frontier: Some(path.clone()),
        ..EngineConfig::default()
    };
    let r = backward_reach(&load("mutex.abs"), &cfg).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), r.nodes.len());
    for (line, node) in text.lines().zip(&r.nodes) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["id"], node.id);
        assert_eq!(v["formula"], node.formula.to_string());
    }
}
