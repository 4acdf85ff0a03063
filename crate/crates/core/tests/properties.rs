use std::collections::BTreeSet;

use proptest::prelude::*;

use arraymc::abstraction::{abstract_formula, default_instantiation_set};
use arraymc::logic::{reduce_read_over_write, to_nnf, Formula, Signature, Sort, Term, Var};
use arraymc::oracle::eval::eval_formula;
use arraymc::oracle::{models_of, ConcreteState};
use arraymc::solver::{Entailment, SatResult, Solver, SolverConfig, Theory};

const N: usize = 3;

fn sig() -> Signature {
    let mut s = Signature::default();
    s.enums.insert("col".into(), vec!["r".into(), "g".into(), "b".into()]);
    s
}

fn idx(n: usize) -> Var {
    Var::index(["i", "j", "k"][n])
}

fn arr() -> Var {
    Var::new("a", Sort::Array(Box::new(Sort::Enum("col".into()))))
}

fn col(n: u32) -> Term {
    sig().enum_const_at("col", n).unwrap()
}

fn atom() -> impl Strategy<Value = Formula> {
    let ix = || (0..3usize).prop_map(|n| Term::var(&idx(n)));
    let array = prop_oneof![
        Just(Term::var(&arr())),
        ((0..3usize), (0..3u32)).prop_map(|(i, c)| Term::write(Term::var(&arr()), Term::var(&idx(i)), col(c))),
    ];
    prop_oneof![
        (ix(), ix(), 0..3u8).prop_map(|(l, r, k)| match k {
            0 => Formula::eq(l, r),
            1 => Formula::lt(l, r),
            _ => Formula::le(l, r),
        }),
        (array, ix(), 0..3u32).prop_map(|(a, i, c)| Formula::eq(Term::read(a, i), col(c))),
        (ix(), ix()).prop_map(|(i, j)| Formula::eq(Term::read(Term::var(&arr()), i), Term::read(Term::var(&arr()), j))),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::and),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::or),
            inner.prop_map(Formula::not),
        ]
    })
}

fn models(vars: &[Var], f: &Formula) -> BTreeSet<ConcreteState> {
    models_of(vars, &sig(), f, N, 0, 0).unwrap().into_iter().collect()
}

fn all_vars() -> Vec<Var> {
    vec![idx(0), idx(1), idx(2), arr()]
}

fn solver() -> Solver {
    Solver::new(sig(), SolverConfig::new(Theory::Simple))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ground_check_agrees_with_enumeration(f in formula()) {
        let m = models(&all_vars(), &f);
        match solver().check_sat_ground(&f).unwrap() {
            SatResult::Sat(model) => {
                prop_assert!(!m.is_empty());
                prop_assert!(eval_formula(&model, &f));
            }
            SatResult::Unsat => prop_assert!(m.is_empty()),
            SatResult::Unknown(why) => prop_assert!(false, "unknown: {}", why),
        }
    }

    #[test]
    fn normal_forms_keep_models(f in formula()) {
        let m = models(&all_vars(), &f);
        prop_assert_eq!(&m, &models(&all_vars(), &to_nnf(&f)));
        prop_assert_eq!(&m, &models(&all_vars(), &reduce_read_over_write(&f)));
    }

    #[test]
    fn entailment_is_sound(f in formula(), g in formula()) {
        let (ef, eg) = (Formula::exists(vec![idx(0)], f), Formula::exists(vec![idx(0)], g));
        if solver().entails(&ef, &eg).unwrap() == Entailment::Yes {
            let free = vec![idx(1), idx(2), arr()];
            prop_assert!(models(&free, &ef).is_subset(&models(&free, &eg)));
        }
    }

    #[test]
    fn weakening_is_entailed(f in formula(), g in formula()) {
        let ef = Formula::exists(vec![idx(0)], f.clone());
        let weaker = Formula::exists(vec![idx(0)], Formula::or(vec![f, g]));
        prop_assert_eq!(solver().entails(&ef, &weaker).unwrap(), Entailment::Yes);
    }

    #[test]
    fn abstraction_over_approximates(f in formula(), body in formula()) {
        // ∃i (f ∧ ∀k body): k is bound, j stays free
        let q = Formula::exists(vec![idx(0)], Formula::and(vec![f, Formula::forall(vec![idx(2)], body)]));
        let abs = abstract_formula(&q, &default_instantiation_set(&q, Theory::Simple)).unwrap();
        let free = vec![idx(1), arr()];
        prop_assert!(models(&free, &q).is_subset(&models(&free, &abs)));
    }
}
