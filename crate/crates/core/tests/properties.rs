use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::sample::{select, subsequence};
use rand::seq::SliceRandom;
use rand::SeedableRng;

use catecom_core::builder::{build_unit_model, compose_compound_model, fixtures, functional_library, BuildOptions};
use catecom_core::entity::document::{parse_document, serialize_document};
use catecom_core::entity::validate::validate_method;
use catecom_core::entity::{
    CategoryPath, Method, MethodParameter, ParameterValue, Scalar, UnitModel, WorkflowUnitStub, WorkflowUnitType,
};
use catecom_core::fingerprint::fingerprint;
use catecom_core::interop::bind;
use catecom_core::method::{diff_against_defaults, extract_precision_features, merge_methods, FlavorDefaults};
use catecom_core::registry::{Filter, Registry};
use catecom_core::taxonomy::{
    audit_category_path, classify, rules, tag_scope, validate_tags, vocabulary, Feature, ModelFeature,
};
use catecom_core::{Entity, TaxonomyTree};

fn tree() -> TaxonomyTree {
    TaxonomyTree::builtin()
}

fn all_paths() -> Vec<String> {
    tree().paths().map(str::to_string).collect()
}

fn arb_value() -> impl Strategy<Value = ParameterValue> {
    prop_oneof![
        (-1000i64..1000).prop_map(|i| ParameterValue::Number(Scalar::Int(i))),
        (-4000i32..4000).prop_map(|i| ParameterValue::Number(Scalar::Float(f64::from(i) / 8.0))),
        "[a-z]{1,6}".prop_map(ParameterValue::Text),
        any::<bool>().prop_map(ParameterValue::Bool),
        prop::collection::vec(0i64..10, 0..4)
            .prop_map(|v| ParameterValue::List(v.into_iter().map(Scalar::Int).collect())),
    ]
}

const KEYS: [&str; 8] = ["ecutwfc", "ecutrho", "occupations", "smearing", "kpts", "conv_thr", "nbnd", "degauss"];

fn arb_parameters() -> impl Strategy<Value = Vec<MethodParameter>> {
    subsequence(KEYS.to_vec(), 0..=KEYS.len())
        .prop_flat_map(|keys| {
            let n = keys.len();
            (
                Just(keys),
                prop::collection::vec((arb_value(), any::<bool>(), prop::option::of(select(vec!["Ry", "Ha", "eV"]))), n),
            )
        })
        .prop_map(|(keys, vals)| {
            keys.into_iter()
                .zip(vals)
                .map(|(k, (v, precise, unit))| {
                    let numeric = v.is_numeric();
                    let mut p = MethodParameter::new(k, v);
                    if precise {
                        p = p.precision();
                    }
                    if let (true, Some(u)) = (numeric, unit) {
                        p = p.with_unit(u);
                    }
                    p
                })
                .collect()
        })
}

fn arb_method() -> impl Strategy<Value = Method> {
    (
        select(vec!["pseudopotential", "localorbital", "regression"]),
        select(vec!["us", "nc", "paw", "gaussian"]),
        arb_parameters(),
        prop::option::of("[a-z ]{1,12}"),
    )
        .prop_map(|(t, s, params, text)| {
            let mut m = Method::new(t, s);
            for p in params {
                m = m.with_parameter(p);
            }
            if let Some(text) = text {
                m = m.with_search_text(text);
            }
            m
        })
}

/// A valid unit model at any node of the built-in tree.
fn arb_unit_model() -> impl Strategy<Value = UnitModel> {
    (select(all_paths()), any::<u64>(), prop::option::of(arb_method()), "[a-z0-9]{1,8}")
        .prop_map(|(key, seed, method, fid)| {
            let path = CategoryPath::parse(&key).unwrap();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut tags: Vec<String> = vocabulary()
                .iter()
                .filter(|e| e.label != "scaling-power" && key.starts_with(e.scope))
                .filter(|_| rand::Rng::gen_bool(&mut rng, 0.4))
                .map(|e| e.label.to_string())
                .collect();
            if key.starts_with("pb") && rand::Rng::gen_bool(&mut rng, 0.5) {
                tags.push(format!("scaling-power:{}", rand::Rng::gen_range(&mut rng, 1..8)));
            }
            if rand::Rng::gen_bool(&mut rng, 0.2) {
                tags.push("team-label".into());
            }
            let mut options = BuildOptions::default().tags(tags);
            if key.starts_with("pb/qm/dft") {
                let lib = functional_library();
                options = options.functional(lib[rand::Rng::gen_range(&mut rng, 0..lib.len())].slug);
            }
            if let Some(m) = method {
                options = options.method(m);
            }
            build_unit_model(&tree(), &path, format!("model {fid}"), format!("m-{fid}"), fid, options).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn unit_models_round_trip(u in arb_unit_model()) {
        let e = Entity::Unit(u);
        let bytes = serialize_document(&e);
        let back = parse_document(&bytes, e.kind()).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(serialize_document(&back), bytes);
    }

    #[test]
    fn generated_methods_are_valid_and_round_trip(m in arb_method()) {
        prop_assert!(validate_method(&m).is_empty());
        let e = Entity::Method(m);
        prop_assert_eq!(parse_document(&serialize_document(&e), e.kind()).unwrap(), e);
    }

    #[test]
    fn diff_is_idempotent(params in arb_parameters(), defaults in arb_parameters()) {
        let mut d = FlavorDefaults::new("f");
        for p in defaults {
            d.defaults.insert(p.key, p.value);
        }
        let once = diff_against_defaults(&params, &d);
        prop_assert_eq!(diff_against_defaults(&once, &d), once.clone());
        for p in &params {
            let kept = once.iter().any(|q| q.key == p.key);
            let oracle = match d.defaults.get(&p.key) {
                None => true,
                Some(v) => !(v.kind() == p.value.kind() && (v == &p.value || v.same_value(&p.value))),
            };
            prop_assert_eq!(kept, oracle, "{}", p.key);
        }
    }

    #[test]
    fn precision_features_bounded_by_precision_list(m in arb_method()) {
        let x = extract_precision_features(&m);
        prop_assert!(x.features.len() <= m.precision.len());
        let all_numeric = m.precision.iter().all(|k| m.parameter(k).unwrap().value.as_f64().is_some());
        prop_assert_eq!(x.features.len() == m.precision.len(), all_numeric);
        let keys: Vec<&str> = x.features.entries.iter().map(|e| e.key.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted);
    }

    #[test]
    fn self_merge_is_identity(m in arb_method()) {
        prop_assert_eq!(merge_methods(&m, &m).unwrap(), m);
    }

    #[test]
    fn merged_methods_keep_precision_invariant(g in arb_method(), l in arb_method()) {
        if let Ok(m) = merge_methods(&g, &l) {
            prop_assert!(validate_method(&m).is_empty(), "{:?}", validate_method(&m));
            for p in &l.parameters {
                prop_assert_eq!(&m.parameter(&p.key).unwrap().value, &p.value);
            }
            let expected: BTreeSet<&String> = g.precision.iter().chain(&l.precision).collect();
            let got: BTreeSet<&String> = m.precision.iter().collect();
            prop_assert!(expected.is_subset(&got));
        }
    }

    #[test]
    fn classification_agrees_with_audit(mask in prop::collection::vec(any::<bool>(), Feature::ALL.len())) {
        let features: Vec<ModelFeature> = Feature::ALL
            .iter()
            .zip(&mask)
            .filter(|(_, on)| **on)
            .map(|(f, _)| ModelFeature::yes(*f))
            .collect();
        if let Ok(path) = classify(&features) {
            prop_assert!(audit_category_path(&tree(), &path, &features).unwrap().is_empty());
        }
    }

    #[test]
    fn shuffled_recording_gives_same_trace(
        picks in prop::collection::vec(0usize..3, 1..12),
        seed in any::<u64>(),
    ) {
        let fids = ["fid-1", "fid-5", "fid-6"];
        let wus = vec![
            WorkflowUnitStub { id: "wu1".into(), unit_type: WorkflowUnitType::Execution, application: "pw.x".into(), flavor_id: None },
            WorkflowUnitStub { id: "wu2".into(), unit_type: WorkflowUnitType::Execution, application: "gw.x".into(), flavor_id: None },
        ];
        let base = bind(fixtures::dft_gw_bse(), wus).unwrap();
        let mut shuffled = picks.clone();
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let record = |order: &[usize]| {
            order.iter().fold(base.clone(), |b, &i| b.record_property("band-gap", fids[i]).unwrap())
        };
        let a = record(&picks);
        let b = record(&shuffled);
        let orders = |x: &catecom_core::interop::InteropBinding| {
            x.property_trace("band-gap").iter().map(|p| (p.order, p.source_flowchart_id.clone())).collect::<Vec<_>>()
        };
        let mut oracle: Vec<usize> = picks.clone();
        oracle.sort();
        prop_assert_eq!(orders(&a).iter().map(|(o, _)| *o).collect::<Vec<_>>(), oracle);
        prop_assert_eq!(orders(&a), orders(&b));
        prop_assert_eq!(a.last_occurrence("band-gap"), b.last_occurrence("band-gap"));
        prop_assert_eq!(a.last_occurrence("band-gap"), a.property_trace("band-gap").last().copied());
    }

    #[test]
    fn fingerprint_ignores_flowchart_ids(u in arb_unit_model(), fid in "[a-z0-9-]{1,12}") {
        let mut renamed = u.clone();
        renamed.flowchart_id = fid;
        prop_assert_eq!(fingerprint(&u.into(), None), fingerprint(&renamed.into(), None));
    }
}

#[test]
fn tag_scope_over_rows_and_paths() {
    let t = tree();
    for entry in vocabulary() {
        let label = if entry.label == "scaling-power" { "scaling-power:3".to_string() } else { entry.label.to_string() };
        for key in t.paths() {
            let admitted = key == entry.scope || key.starts_with(&format!("{}/", entry.scope));
            let model = UnitModel {
                tags: vec![label.clone()],
                ..fixtures::decision_tree("x")
            };
            let model = UnitModel {
                categories: t.resolve_str(key).unwrap(),
                ..model
            };
            let v = validate_tags(&model);
            assert_eq!(v.len(), usize::from(!admitted), "{label} at {key}");
        }
        assert!(matches!(tag_scope(&label).scope, catecom_core::entity::TagScope::Path(_)));
    }
}

#[test]
fn each_rule_classifies_from_its_own_chain() {
    let by_id: BTreeMap<&str, _> = rules().iter().map(|r| (r.rule_id, r)).collect();
    for r in rules() {
        let mut features = Vec::new();
        let mut id = Some(r.rule_id);
        while let Some(cur) = id {
            let rule = by_id[cur];
            features.extend(rule.predicate.iter().filter(|(_, on)| *on).map(|(f, _)| ModelFeature::yes(*f)));
            id = rule.parent_id();
        }
        assert_eq!(classify(&features).unwrap().key(), r.target, "rule {}", r.rule_id);
    }
}

fn brute_force(entities: &[(String, Entity)], keep: impl Fn(&Entity) -> bool) -> Vec<String> {
    let mut ids: Vec<String> = entities.iter().filter(|(_, e)| keep(e)).map(|(id, _)| id.clone()).collect();
    ids.sort();
    ids
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn query_matches_linear_scan(models in prop::collection::vec(arb_unit_model(), 1..25), probe in select(all_paths())) {
        let dir = tempfile::tempdir().unwrap();
        let mut reg = Registry::open(dir.path()).unwrap();
        let mut stored = Vec::new();
        for (i, u) in models.into_iter().enumerate() {
            let e = Entity::Unit(u);
            let id = format!("e{i:03}");
            reg.store(&e, Some(&id), None).unwrap();
            stored.push((id, e));
        }
        let prefix = CategoryPath::parse(&probe).unwrap();
        prop_assert_eq!(
            reg.query(&[Filter::CategoryPrefix(prefix.clone())]),
            brute_force(&stored, |e| e.unit_models().iter().any(|u| prefix.is_prefix_of(&u.categories)))
        );
        for tag in ["self-consistent", "scaling-power:3", "team-label", "perturbative"] {
            prop_assert_eq!(
                reg.query(&[Filter::Tag(tag.into())]),
                brute_force(&stored, |e| e.unit_models().iter().any(|u| u.tags.iter().any(|t| t == tag)))
            );
        }
        prop_assert_eq!(reg.rebuild_index().unwrap(), reg.index().clone());
    }
}

#[test]
fn compound_fingerprint_survives_renaming() {
    let a = fixtures::dft_gw_bse();
    let renamed: Vec<UnitModel> = a
        .units_in_order()
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, u)| UnitModel { flowchart_id: format!("n{i}"), ..u.clone() })
        .collect();
    let mut b = compose_compound_model(renamed, [("n0", "s1"), ("n1", "s2"), ("n2", "s2")], a.method.clone()).unwrap();
    b.extras = a.extras.clone();
    assert_eq!(fingerprint(&a.into(), None).digest, fingerprint(&b.into(), None).digest);
}
