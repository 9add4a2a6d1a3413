//! Reference models used by tests, examples and the shipped fixture files.

use serde_json::{json, Value};

use super::{build_unit_model, compose_compound_model, BuildOptions};
use crate::entity::{
    CategoryPath, CompoundModel, Entity, Method, MethodParameter, ParameterValue, Scalar, UnitModel,
};
use crate::taxonomy::TaxonomyTree;

fn unit(path: &str, name: &str, slug: &str, fid: &str, options: BuildOptions) -> UnitModel {
    let path = CategoryPath::parse(path).expect("fixture path");
    build_unit_model(&TaxonomyTree::builtin(), &path, name, slug, fid, options).expect("fixture model")
}

/// Plane-wave ultrasoft-pseudopotential method with two precision cutoffs.
pub fn pw_us_method() -> Method {
    Method::new("pseudopotential", "us")
        .with_parameter(MethodParameter::new("ecutrho", 200i64).with_unit("Ry").precision())
        .with_parameter(MethodParameter::new("ecutwfc", 50i64).with_unit("Ry").precision())
        .with_parameter(MethodParameter::new("occupations", "smearing"))
        .with_search_text("pbe gbrv")
        .with_data("pseudo", json!(["si_pbe_gbrv_1.0.upf"]))
}

/// Norm-conserving variant used with the hybrid functional.
pub fn pw_nc_hybrid_method() -> Method {
    Method::new("pseudopotential", "nc")
        .with_parameter(MethodParameter::new("ecutwfc", 60i64).with_unit("Ry").precision())
        .with_parameter(MethodParameter::new("ecutfock", 120i64).with_unit("Ry").precision())
        .with_parameter(MethodParameter::new("nqx", ParameterValue::List(vec![Scalar::Int(2); 3])).precision())
        .with_search_text("hse06 norm-conserving")
        .with_data("pseudo", json!(["si_nc_sg15.upf"]))
}

pub fn gaussian_basis_method() -> Method {
    Method::new("localorbital", "gaussian")
        .with_parameter(MethodParameter::new("basis", "cc-pVTZ"))
        .with_parameter(MethodParameter::new("conv_tol", 1e-8).with_unit("Ha").precision())
        .with_search_text("cc-pvtz")
}

pub fn least_squares_method() -> Method {
    Method::new("regression", "least-squares")
        .with_parameter(MethodParameter::new("fit_intercept", true))
        .with_search_text("least squares")
}

pub fn cart_method() -> Method {
    Method::new("tree", "cart")
        .with_parameter(MethodParameter::new("max_depth", 8i64).precision())
        .with_parameter(MethodParameter::new("criterion", "gini"))
        .with_search_text("cart")
}

pub fn bagging_method() -> Method {
    Method::new("ensemble", "bagging")
        .with_parameter(MethodParameter::new("n_estimators", 3i64).precision())
        .with_parameter(MethodParameter::new("bootstrap", true))
        .with_search_text("random forest")
}

pub fn ksdft_pbe() -> UnitModel {
    unit(
        "pb/qm/dft/ksdft",
        "PBE KS-DFT",
        "ksdft-pbe",
        "fid-1",
        BuildOptions::default()
            .functional("pbe")
            .tags(["self-consistent", "variational", "scaling-power:3"])
            .method(pw_us_method()),
    )
}

pub fn ccsd() -> UnitModel {
    unit(
        "pb/qm/abin/cc/ccsd",
        "CCSD",
        "ccsd",
        "fid-2",
        BuildOptions::default()
            .tags(["single-reference", "scaling-power:6"])
            .method(gaussian_basis_method()),
    )
}

pub fn ols() -> UnitModel {
    unit(
        "st/det/lin",
        "Ordinary least squares",
        "ols",
        "fid-3",
        BuildOptions::default().method(least_squares_method()),
    )
}

pub fn ksdft_hse06() -> UnitModel {
    unit(
        "pb/qm/dft/ksdft",
        "HSE06 KS-DFT",
        "ksdft-hse06",
        "fid-4",
        BuildOptions::default()
            .functional("hse06")
            .tags(["self-consistent", "scaling-power:4"])
            .method(pw_nc_hybrid_method()),
    )
}

pub fn gw() -> UnitModel {
    unit(
        "pb/qm/abin/mbpt/gw",
        "GW",
        "gw",
        "fid-5",
        BuildOptions::default()
            .tags(["perturbative", "excited-states", "scaling-power:4"])
            .method(pw_us_method()),
    )
}

pub fn bse() -> UnitModel {
    unit(
        "pb/qm/abin/mbpt/bse",
        "BSE",
        "bse",
        "fid-6",
        BuildOptions::default()
            .tags(["perturbative", "excited-states"])
            .method(pw_us_method()),
    )
}

pub fn dftb() -> UnitModel {
    unit(
        "pb/qm/semp/dftb",
        "DFTB",
        "dftb",
        "fid-7",
        BuildOptions::default().tags(["self-consistent", "user-adjustable", "scaling-power:3"]),
    )
}

pub fn decision_tree(flowchart_id: &str) -> UnitModel {
    unit(
        "st/det/dtr",
        "Decision tree",
        "decision-tree",
        flowchart_id,
        BuildOptions::default().method(cart_method()),
    )
}

fn labelled(mut cm: CompoundModel, name: &str, slug: &str) -> CompoundModel {
    cm.extras.insert("name".into(), Value::from(name));
    cm.extras.insert("slug".into(), Value::from(slug));
    cm
}

/// DFT ground state feeding GW, then BSE; GW and BSE share one workflow unit.
pub fn dft_gw_bse() -> CompoundModel {
    let cm = compose_compound_model(
        vec![ksdft_pbe(), gw(), bse()],
        [("fid-1", "wu1"), ("fid-5", "wu2"), ("fid-6", "wu2")],
        pw_us_method(),
    )
    .expect("fixture compound");
    labelled(cm, "DFT+GW+BSE", "dft-gw-bse")
}

/// Three decision trees chained under one workflow unit.
pub fn random_forest() -> CompoundModel {
    let trees = vec![decision_tree("tree-1"), decision_tree("tree-2"), decision_tree("tree-3")];
    let cm = compose_compound_model(
        trees,
        [("tree-1", "wu-train"), ("tree-2", "wu-train"), ("tree-3", "wu-train")],
        bagging_method(),
    )
    .expect("fixture compound");
    labelled(cm, "Random forest", "random-forest")
}

/// Every reference entity with the file name it is shipped under.
pub fn corpus() -> Vec<(&'static str, Entity)> {
    vec![
        ("um_ksdft.json", ksdft_pbe().into()),
        ("um_ksdft_hse06.json", ksdft_hse06().into()),
        ("um_abin_cc.json", ccsd().into()),
        ("um_st_det_lin_ols.json", ols().into()),
        ("um_gw.json", gw().into()),
        ("um_bse.json", bse().into()),
        ("um_semp_dftb.json", dftb().into()),
        ("um_dtr.json", decision_tree("fid-8").into()),
        ("method.json", pw_us_method().into()),
        ("cm_dft_gw.json", dft_gw_bse().into()),
        ("cm_random_forest.json", random_forest().into()),
    ]
}
