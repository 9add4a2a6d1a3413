//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use catecom_core::builder::{
    build_unit_model, compose_compound_model, fixtures, functional_library, validate_compound_model, BuildOptions,
};
use catecom_core::entity::document::{parse_any, serialize_document, serialize_pretty};
use catecom_core::entity::validate::Rule;
use catecom_core::entity::{
    CategoryPath, Entity, MethodParameter, ParameterValue, UnitModel, WorkflowUnitStub, WorkflowUnitType,
};
use catecom_core::fingerprint::fingerprint;
use catecom_core::interop::bind;
use catecom_core::registry::{DuplicatePolicy, Filter, Registry, RegistryError};
use catecom_core::taxonomy::{classify, rules, validate_tags, vocabulary, ModelFeature};
use catecom_core::{validate_entity, TaxonomyTree};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> Vec<u8> {
    fs::read(common::workspace_root().join("fixtures").join(name)).unwrap()
}

fn corpus_fidelity() -> Check {
    let start = Instant::now();
    let listings = [
        "um_ksdft.json",
        "method.json",
        "cm_dft_gw.json",
        "um_ksdft_hse06.json",
        "um_abin_cc.json",
        "um_st_det_lin_ols.json",
    ];
    let names: Vec<&str> = fixtures::corpus().into_iter().map(|(n, _)| n).collect();
    for l in listings {
        ensure(names.contains(&l), || format!("{l} missing from corpus"))?;
    }
    for (name, built) in fixtures::corpus() {
        let raw = fixture(name);
        let parsed = parse_any(&raw).map_err(|e| format!("{name}: {e}"))?;
        let v = validate_entity(&parsed);
        ensure(v.is_empty(), || format!("{name}: {} violations", v.len()))?;
        ensure(parsed == built, || format!("{name}: differs from builder output"))?;
        ensure(serialize_pretty(&parsed) + "\n" == String::from_utf8_lossy(&raw), || {
            format!("{name}: pretty round trip not byte-identical")
        })?;
        let compact = serialize_document(&parsed);
        ensure(serialize_document(&parse_any(&compact).unwrap()) == compact, || {
            format!("{name}: compact round trip not byte-identical")
        })?;
    }
    let Entity::Method(m) = parse_any(&fixture("method.json")).unwrap() else {
        return Err("method.json is not a method".into());
    };
    ensure(
        m.parameter("ecutrho").is_some_and(|p| p.is_precision())
            && m.parameter("ecutwfc").is_some_and(|p| p.is_precision())
            && m.parameter("occupations").is_some_and(|p| !p.is_precision()),
        || "method precision tagging".into(),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} fixtures parse, validate and round-trip in {elapsed:?}", names.len()))
}

fn taxonomy_exactness() -> Check {
    let tree = TaxonomyTree::builtin();
    let expected: BTreeSet<&str> = [
        "pb/qm/abin",
        "pb/qm/dft",
        "pb/qm/semp",
        "pb/at",
        "pb/mes",
        "st/prob",
        "st/det/lin",
        "st/det/nn",
        "st/det/dtr",
    ]
    .into();
    let leaves: Vec<String> = tree.tier_leaves().iter().map(CategoryPath::key).collect();
    let got: BTreeSet<&str> = leaves.iter().map(String::as_str).collect();
    ensure(got == expected, || format!("tier leaves {got:?}"))?;

    let by_id: BTreeMap<&str, _> = rules().iter().map(|r| (r.rule_id, r)).collect();
    let mut passed = 0;
    for r in rules() {
        let mut features = Vec::new();
        let mut id = Some(r.rule_id);
        while let Some(cur) = id {
            let rule = by_id[cur];
            features.extend(rule.predicate.iter().filter(|(_, on)| *on).map(|(f, _)| ModelFeature::yes(*f)));
            id = rule.parent_id();
        }
        match classify(&features) {
            Ok(p) if p.key() == r.target => passed += 1,
            other => return Err(format!("rule {} gave {other:?}", r.rule_id)),
        }
    }
    ensure(passed == 13 && rules().len() == 13, || format!("{passed}/{} rules", rules().len()))?;
    Ok(format!("9 tier leaves match; classify reproduces {passed}/13 rule targets"))
}

fn tag_scoping() -> Check {
    let tree = TaxonomyTree::builtin();
    let model_at = |key: &str, label: &str| UnitModel {
        categories: tree.resolve_str(key).unwrap(),
        tags: vec![label.to_string()],
        ..fixtures::decision_tree("x")
    };
    let mut checks = 0;
    for row in vocabulary() {
        let label = if row.label == "scaling-power" { "scaling-power:3".to_string() } else { row.label.to_string() };
        let at_scope = validate_tags(&model_at(row.scope, &label)).len();
        ensure(at_scope == 0, || format!("{label} at its scope {}: {at_scope}", row.scope))?;

        let scope = CategoryPath::parse(row.scope).unwrap();
        let sibling = match scope.parent() {
            Some(parent) => tree
                .children(&parent)
                .map(|n| format!("{}/{}", parent.key(), n.slug))
                .find(|k| k != row.scope),
            None => tree.roots().map(|n| n.slug.clone()).find(|k| k != row.scope),
        }
        .ok_or_else(|| format!("no sibling for {}", row.scope))?;
        let on_sibling = validate_tags(&model_at(&sibling, &label)).len();
        ensure(on_sibling == 1, || format!("{label} on sibling {sibling}: {on_sibling}"))?;

        for key in tree.paths() {
            let admitted = key == row.scope || key.starts_with(&format!("{}/", row.scope));
            let n = validate_tags(&model_at(key, &label)).len();
            ensure(n == usize::from(!admitted), || format!("{label} at {key}: {n} violations"))?;
            checks += 1;
        }
    }
    Ok(format!("{} rows, {checks} row x path checks agree with the prefix oracle", vocabulary().len()))
}

fn stub(id: &str, app: &str) -> WorkflowUnitStub {
    WorkflowUnitStub {
        id: id.into(),
        unit_type: WorkflowUnitType::Execution,
        application: app.into(),
        flavor_id: None,
    }
}

fn compound_contract() -> Check {
    let Entity::Compound(cm) = parse_any(&fixture("cm_dft_gw.json")).unwrap() else {
        return Err("cm_dft_gw.json is not a compound model".into());
    };
    let b = bind(cm.clone(), vec![stub("wu1", "pw.x"), stub("wu2", "gw.x")]).map_err(|e| e.to_string())?;
    let nodes = b.compound_model().model_graph.len();
    let wus: BTreeSet<&str> = b.compound_model().model_graph.iter().map(|n| n.workflow_unit_id.as_str()).collect();
    ensure(nodes == 3 && wus.len() == 2, || format!("{nodes} nodes over {} units", wus.len()))?;

    let mut multi_head = cm.clone();
    multi_head.model_graph[1].head = true;
    let mut cycle = cm.clone();
    cycle.model_graph[2].next = Some(cycle.model_graph[0].flowchart_id.clone());
    let mut dangling = cm.clone();
    dangling.model_graph[1].next = Some("missing".into());
    let mut unmapped = cm.clone();
    let fid = unmapped.model_graph[2].flowchart_id.clone();
    unmapped.units.remove(&fid);
    let mutations = [
        ("multi-head", multi_head, Rule::MultipleHeads),
        ("cycle", cycle, Rule::Cycle),
        ("dangling-next", dangling, Rule::DanglingNext),
        ("unmapped-node", unmapped, Rule::UnmappedNode),
    ];
    for (name, m, rule) in &mutations {
        let v = validate_compound_model(m);
        ensure(v.iter().any(|x| x.rule == *rule), || format!("{name} not rejected: {v:?}"))?;
    }
    Ok(format!("3 nodes bound to 2 workflow units; {}/4 corruptions rejected", mutations.len()))
}

fn property_provenance() -> Check {
    let base = bind(fixtures::dft_gw_bse(), vec![stub("wu1", "pw.x"), stub("wu2", "gw.x")]).map_err(|e| e.to_string())?;
    let b = base
        .record_property("band-gap", "fid-1")
        .and_then(|b| b.record_property("band-gap", "fid-5"))
        .map_err(|e| e.to_string())?;
    let last = b.last_occurrence("band-gap").ok_or("no last occurrence")?;
    ensure(last.order == 1, || format!("last at {}", last.order))?;
    ensure(b.property_trace("band-gap").last().copied() == Some(last), || "last != trace tail".into())?;

    let fids = ["fid-1", "fid-5", "fid-6"];
    let mut rng = StdRng::seed_from_u64(7);
    for trial in 0..100 {
        let n = rng.gen_range(1..10);
        let picks: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let mut shuffled = picks.clone();
        shuffled.shuffle(&mut rng);
        let rec = |order: &[usize]| {
            order
                .iter()
                .fold(base.clone(), |b, &i| b.record_property("band-gap", fids[i]).unwrap())
        };
        let (x, y) = (rec(&picks), rec(&shuffled));
        let mut oracle = picks.clone();
        oracle.sort();
        let tx: Vec<usize> = x.property_trace("band-gap").iter().map(|p| p.order).collect();
        let ty: Vec<usize> = y.property_trace("band-gap").iter().map(|p| p.order).collect();
        ensure(tx == oracle && ty == oracle, || format!("trial {trial}: {tx:?} / {ty:?} vs {oracle:?}"))?;
        ensure(x.last_occurrence("band-gap") == y.last_occurrence("band-gap"), || format!("trial {trial}: last"))?;
        ensure(x.last_occurrence("band-gap").map(|p| p.order) == oracle.last().copied(), || {
            format!("trial {trial}: last order")
        })?;
    }
    Ok("last occurrence at position 1 equals trace tail; 100 shuffled trials agree".into())
}

fn digest(e: &Entity) -> String {
    fingerprint(e, None).digest
}

fn with_unit(f: impl FnOnce(&mut UnitModel)) -> Entity {
    let mut u = fixtures::ksdft_pbe();
    f(&mut u);
    Entity::Unit(u)
}

fn fingerprint_behaviour() -> Check {
    let raw = String::from_utf8(fixture("um_ksdft.json")).unwrap();
    let base = parse_any(raw.as_bytes()).unwrap();
    let d0 = digest(&base);

    let with_id = raw.replacen('{', "{\"_id\": \"5f0c1e2a\",", 1);
    let renamed = raw.replace("\"fid-1\"", "\"abc-9\"");
    let extras_a = raw.replacen('{', "{\"zeta\": 1, \"alpha\": {\"b\": 1, \"a\": 2},", 1);
    let extras_b = raw.replacen('{', "{\"alpha\": {\"a\": 2, \"b\": 1}, \"zeta\": 1,", 1);
    let parsed = |s: &str| parse_any(s.as_bytes()).map_err(|e| e.to_string());
    ensure(digest(&parsed(&with_id)?) == d0, || "_id injection changed digest".into())?;
    ensure(digest(&parsed(&renamed)?) == d0, || "flowchartId renaming changed digest".into())?;
    ensure(digest(&parsed(&extras_a)?) == digest(&parsed(&extras_b)?), || "extras order changed digest".into())?;

    let set_param = |key: &'static str, v: i64| {
        with_unit(move |u| {
            let m = u.method.as_mut().unwrap();
            m.parameters.iter_mut().find(|p| p.key == key).unwrap().value = ParameterValue::from(v);
        })
    };
    let mutations: Vec<(&str, Entity)> = vec![
        ("category: drop type level", with_unit(|u| u.categories = u.categories.parent().unwrap())),
        ("category: ols lin -> nn", {
            let mut u = fixtures::ols();
            u.categories = TaxonomyTree::builtin().resolve_str("st/det/nn").unwrap();
            Entity::Unit(u)
        }),
        ("tag added", with_unit(|u| u.tags.push("relativistic".into()))),
        ("tag removed", with_unit(|u| u.tags.retain(|t| t != "variational"))),
        ("tag parameter", with_unit(|u| u.tags[2] = "scaling-power:4".into())),
        ("functional fraction", with_unit(|u| u.functional.as_mut().unwrap().components[0].fraction = 0.9)),
        ("precision ecutwfc", set_param("ecutwfc", 60)),
        ("precision ecutrho", set_param("ecutrho", 240)),
        ("new precision parameter", with_unit(|u| {
            let m = u.method.take().unwrap();
            u.method = Some(m.with_parameter(MethodParameter::new("degauss", 0.02).precision()));
        })),
        ("hse06 exact-exchange fraction", {
            let mut u = fixtures::ksdft_hse06();
            u.functional.as_mut().unwrap().components[0].fraction = 0.2;
            Entity::Unit(u)
        }),
    ];
    let references: BTreeMap<&str, String> = [
        ("category: ols lin -> nn", digest(&fixtures::ols().into())),
        ("hse06 exact-exchange fraction", digest(&fixtures::ksdft_hse06().into())),
    ]
    .into();
    for (name, m) in &mutations {
        let v = validate_entity(m);
        ensure(v.is_empty(), || format!("mutation `{name}` is invalid: {v:?}"))?;
        let reference = references.get(name).cloned().unwrap_or_else(|| d0.clone());
        ensure(digest(m) != reference, || format!("mutation `{name}` kept the digest"))?;
    }

    let run = || {
        let out = common::catecom(&["fingerprint", "fixtures/um_ksdft.json"], None);
        String::from_utf8(out.stdout).unwrap().trim().to_string()
    };
    let (p1, p2) = (run(), run());
    ensure(p1 == p2 && p1 == d0, || format!("process runs: {p1} / {p2} / library {d0}"))?;
    Ok(format!("3 invariances hold; {}/{} mutations change the digest; 2 process runs agree", mutations.len(), mutations.len()))
}

/// A valid random unit model; tags are drawn from the rows whose scope
/// admits the chosen path, plus cross-branch user labels.
fn random_unit(rng: &mut StdRng, tree: &TaxonomyTree, paths: &[String], i: usize) -> UnitModel {
    let key = paths.choose(rng).unwrap();
    let mut tags: Vec<String> = vocabulary()
        .iter()
        .filter(|r| r.label != "scaling-power" && (key == r.scope || key.starts_with(&format!("{}/", r.scope))))
        .filter(|_| rng.gen_bool(0.3))
        .map(|r| r.label.to_string())
        .collect();
    if key.starts_with("pb") && rng.gen_bool(0.5) {
        tags.push(format!("scaling-power:{}", rng.gen_range(1..7)));
    }
    if rng.gen_bool(0.25) {
        tags.push(format!("team-{}", rng.gen_range(0..4)));
    }
    let mut options = BuildOptions::default().tags(tags);
    if key.starts_with("pb/qm/dft") {
        options = options.functional(functional_library().choose(rng).unwrap().slug);
    }
    if rng.gen_bool(0.5) {
        let mut m = fixtures::pw_us_method();
        m.parameters[1].value = ParameterValue::from(rng.gen_range(20i64..120));
        options = options.method(m);
    }
    let path = CategoryPath::parse(key).unwrap();
    build_unit_model(tree, &path, format!("model {i}"), format!("m{i}"), format!("fid-{i}"), options).unwrap()
}

fn registry_equivalence() -> Check {
    let start = Instant::now();
    let tree = TaxonomyTree::builtin();
    let paths: Vec<String> = tree.paths().map(str::to_string).collect();
    let mut rng = StdRng::seed_from_u64(2024);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reg = Registry::open(dir.path()).map_err(|e| e.to_string())?;
    let mut stored: Vec<(String, Entity)> = Vec::new();
    for i in 0..1000 {
        let entity = if i % 10 == 9 {
            let units = vec![random_unit(&mut rng, &tree, &paths, i * 10), random_unit(&mut rng, &tree, &paths, i * 10 + 1)];
            let map = [(units[0].flowchart_id.clone(), "wu1".to_string()), (units[1].flowchart_id.clone(), "wu2".to_string())];
            Entity::Compound(compose_compound_model(units, map, fixtures::pw_us_method()).unwrap())
        } else {
            Entity::Unit(random_unit(&mut rng, &tree, &paths, i))
        };
        let out = reg.store(&entity, None, None).map_err(|e| e.to_string())?;
        stored.push((out.id, entity));
    }

    let scan = |keep: &dyn Fn(&Entity) -> bool| -> Vec<String> {
        let mut ids: Vec<String> = stored.iter().filter(|(_, e)| keep(e)).map(|(id, _)| id.clone()).collect();
        ids.sort();
        ids
    };
    let all_tags: BTreeSet<String> = stored
        .iter()
        .flat_map(|(_, e)| e.unit_models().into_iter().flat_map(|u| u.tags.clone()).collect::<Vec<_>>())
        .collect();
    for tag in &all_tags {
        let expect = scan(&|e| e.unit_models().iter().any(|u| u.tags.contains(tag)));
        ensure(reg.query(&[Filter::Tag(tag.clone())]) == expect, || format!("tag {tag} differs from scan"))?;
    }
    for key in &paths {
        let prefix = CategoryPath::parse(key).unwrap();
        let expect = scan(&|e| e.unit_models().iter().any(|u| prefix.is_prefix_of(&u.categories)));
        ensure(reg.query(&[Filter::CategoryPrefix(prefix.clone())]) == expect, || format!("category {key} differs from scan"))?;
    }
    ensure(reg.query(&[]).len() == stored.len(), || "empty query".into())?;

    let rebuilt = reg.rebuild_index().map_err(|e| e.to_string())?;
    ensure(&rebuilt == reg.index(), || "rebuilt index differs".into())?;
    let in_memory = reg.index().clone();
    drop(reg);
    fs::remove_file(dir.path().join("index.json")).map_err(|e| e.to_string())?;
    let reopened = Registry::open(dir.path()).map_err(|e| e.to_string())?;
    ensure(reopened.index() == &in_memory, || "index rebuilt on open differs".into())?;

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} entities; {} tag and {} category queries match the scan; rebuilt index equal ({elapsed:?})",
        stored.len(),
        all_tags.len(),
        paths.len()
    ))
}

fn duplicate_avoidance() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reg = Registry::open(dir.path()).map_err(|e| e.to_string())?;
    let e = parse_any(&fixture("um_ksdft.json")).unwrap();
    let first = reg.store(&e, None, Some("mp-149")).map_err(|e| e.to_string())?;
    let warned = reg.store(&e, None, Some("mp-149")).map_err(|e| e.to_string())?;
    ensure(warned.duplicate_of.as_deref() == Some(first.id.as_str()), || format!("warn mode reported {:?}", warned.duplicate_of))?;

    reg.set_policy(DuplicatePolicy::Reject);
    let before = reg.len();
    match reg.store(&e, None, Some("mp-149")) {
        Err(RegistryError::DuplicateFingerprint { existing, .. }) if existing == first.id => {}
        other => return Err(format!("reject mode returned {other:?}")),
    }
    ensure(reg.len() == before, || "rejected document was stored".into())?;
    let other_material = reg.store(&e, None, Some("mp-2534")).map_err(|e| e.to_string())?;
    ensure(other_material.duplicate_of.is_none(), || "different material flagged".into())?;
    Ok("warn mode reports the existing id; reject mode refuses".into())
}

fn cli_golden() -> Check {
    let failures: Vec<String> = common::CASES.iter().filter_map(|c| common::check(c).err()).collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    let commands: BTreeSet<&str> = common::CASES
        .iter()
        .filter_map(|c| c.args.iter().find(|a| !a.starts_with("--") && **a != "json").copied())
        .collect();
    for c in ["validate", "classify", "fingerprint", "query", "export"] {
        ensure(commands.contains(c), || format!("no golden case for {c}"))?;
    }
    Ok(format!("{} golden cases match byte-exactly with expected exit codes", common::CASES.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("corpus fidelity", corpus_fidelity),
        ("taxonomy exactness", taxonomy_exactness),
        ("tag scoping", tag_scoping),
        ("compound-model contract", compound_contract),
        ("property provenance", property_provenance),
        ("fingerprint invariance and sensitivity", fingerprint_behaviour),
        ("registry equivalence", registry_equivalence),
        ("duplicate avoidance", duplicate_avoidance),
        ("CLI golden tests", cli_golden),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
