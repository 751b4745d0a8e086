use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use umlsat_core::analysis::{analyze, AnalysisError, Backend};
use umlsat_core::corpus::{random_model, CorpusBounds};
use umlsat_core::loader::{parse_model, serialize_model};
use umlsat_core::model::{merge, UmlModel};
use umlsat_core::ocl::{parse_ocl, print_ocl, Literal, OclExpr, RelOp};
use umlsat_core::oracle::{eval_concept, Interpretation, SearchBound};
use umlsat_core::owl::{emit, serialize_functional, ConceptExpr, EmitOptions};
use umlsat_core::reasoner::ReasonerConfig;

fn model_from_seed(seed: u64) -> UmlModel {
    random_model(&mut StdRng::seed_from_u64(seed), &CorpusBounds::default()).1
}

fn canonical(mut m: UmlModel) -> UmlModel {
    m.canonicalize();
    m
}

fn rel_op() -> impl Strategy<Value = RelOp> {
    prop_oneof![Just(RelOp::Eq), Just(RelOp::Ne), Just(RelOp::Lt), Just(RelOp::Le), Just(RelOp::Gt), Just(RelOp::Ge)]
}

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-zA-Z0-9_]{0,6}".prop_map(|s| format!("r{s}"))
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        any::<bool>().prop_map(Literal::Bool),
        (0i64..50).prop_map(Literal::Integer),
        "[a-z ']{0,5}".prop_map(Literal::String),
    ]
}

fn ocl_expr() -> impl Strategy<Value = OclExpr> {
    let leaf = prop_oneof![
        (ident(), rel_op(), 0u64..9).prop_map(|(assoc, op, value)| OclExpr::SizeCmp { assoc, op, value }),
        (proptest::option::of(ident()), ident(), rel_op(), literal())
            .prop_map(|(via, attr, op, value)| OclExpr::AttrCmp { via, attr, op, value }),
        ident().prop_map(OclExpr::IsEmpty),
        ident().prop_map(OclExpr::NotEmpty),
        ident().prop_map(|r| OclExpr::Excludes(r.clone(), r)),
    ];
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| OclExpr::and(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| OclExpr::or(l, r)),
        ]
    })
}

fn interpretation() -> impl Strategy<Value = Interpretation> {
    (1usize..5).prop_flat_map(|n| {
        let subset = proptest::collection::btree_set(0..n, 0..=n);
        let pairs = proptest::collection::btree_set((0..n, 0..n), 0..=n * n);
        (Just(n), subset.clone(), subset, pairs).prop_map(|(n, a, b, r)| Interpretation {
            domain_size: n,
            concept_ext: BTreeMap::from([("A".to_string(), a), ("B".to_string(), b)]),
            role_ext: BTreeMap::from([("r".to_string(), r)]),
            ..Interpretation::default()
        })
    })
}

fn concept() -> impl Strategy<Value = ConceptExpr> {
    let leaf = prop_oneof![
        Just(ConceptExpr::atom("A")),
        Just(ConceptExpr::atom("B")),
        Just(ConceptExpr::Top),
        Just(ConceptExpr::Bottom),
        (0u64..4).prop_map(|n| ConceptExpr::MinCard(n, "r".into())),
        (0u64..4).prop_map(|n| ConceptExpr::MaxCard(n, "r".into())),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|c| ConceptExpr::Not(Box::new(c))),
            proptest::collection::vec(inner.clone(), 2..3).prop_map(ConceptExpr::And),
            proptest::collection::vec(inner.clone(), 2..3).prop_map(ConceptExpr::Or),
            inner.prop_map(|c| ConceptExpr::SomeValuesFrom("r".into(), Box::new(c))),
        ]
    })
}

fn not(c: ConceptExpr) -> ConceptExpr {
    ConceptExpr::Not(Box::new(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ocl_printing_round_trips(e in ocl_expr()) {
        let text = print_ocl(&e);
        prop_assert_eq!(parse_ocl(&text).map_err(|err| err.to_string()), Ok(e), "{}", text);
    }

    #[test]
    fn de_morgan_holds_in_every_interpretation(i in interpretation(), a in concept(), b in concept()) {
        let lhs = eval_concept(&i, &not(ConceptExpr::And(vec![a.clone(), b.clone()])));
        let rhs = eval_concept(&i, &ConceptExpr::Or(vec![not(a.clone()), not(b)]));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(eval_concept(&i, &not(not(a.clone()))), eval_concept(&i, &a));
    }

    #[test]
    fn cardinality_restrictions_partition_the_domain(i in interpretation(), n in 0u64..4) {
        let at_least = eval_concept(&i, &ConceptExpr::MinCard(n + 1, "r".into()));
        let at_most = eval_concept(&i, &ConceptExpr::MaxCard(n, "r".into()));
        prop_assert!(at_least.is_disjoint(&at_most));
        let union: BTreeSet<usize> = at_least.union(&at_most).copied().collect();
        prop_assert_eq!(union, i.domain());
    }

    #[test]
    fn serialized_models_reload_unchanged(seed in any::<u64>()) {
        let model = canonical(model_from_seed(seed));
        let text = serialize_model(&model);
        let reloaded = parse_model(&text).map_err(|e| e.to_string());
        prop_assert_eq!(reloaded.map(|l| canonical(l.model)), Ok(model), "{}", text);
    }

    #[test]
    fn merging_a_model_with_itself_changes_nothing(seed in any::<u64>()) {
        let model = model_from_seed(seed);
        let merged = merge(&[model.clone(), model.clone()]);
        prop_assert!(merged.conflicts.is_empty(), "{:?}", merged.conflicts);
        prop_assert_eq!(canonical(merged.model), canonical(model));
    }

    #[test]
    fn translation_ignores_declaration_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let model = model_from_seed(seed);
        let mut reordered = model.clone();
        let mut rng = StdRng::seed_from_u64(shuffle);
        reordered.classes.shuffle(&mut rng);
        reordered.associations.shuffle(&mut rng);
        reordered.objects.shuffle(&mut rng);
        reordered.constraints.shuffle(&mut rng);
        let text = |m: &UmlModel| serialize_functional(&emit(m, EmitOptions::default()).expect("corpus models translate"));
        prop_assert_eq!(text(&reordered), text(&model));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn backends_never_contradict_each_other(seed in any::<u64>()) {
        let model = model_from_seed(seed);
        let ax = emit(&model, EmitOptions::default()).expect("corpus models translate");
        let result = analyze(&ax, Backend::Both, &SearchBound::default(), &ReasonerConfig::default());
        prop_assert!(!matches!(result, Err(AnalysisError::Disagreement(_))), "{:?}\n{}", result, serialize_model(&model));
    }
}
