//! Golden CLI cases shared by the golden and acceptance test targets.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use catecom_core::builder::fixtures;
use catecom_core::registry::Registry;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
    /// Run against a registry seeded with the fixture corpus.
    pub registry: bool,
}

const fn case(name: &'static str, args: &'static [&'static str], code: i32) -> Case {
    Case {
        name,
        args,
        code,
        registry: false,
    }
}

const fn with_registry(name: &'static str, args: &'static [&'static str], code: i32) -> Case {
    Case {
        name,
        args,
        code,
        registry: true,
    }
}

const KSDFT: &str = "fixtures/um_ksdft.json";
const INVALID: &str = "fixtures/invalid/um_dft_perturbative.json";
const MALFORMED: &str = "fixtures/invalid/malformed.json";

pub const CASES: &[Case] = &[
    case("validate_clean", &["validate", KSDFT, "fixtures/cm_dft_gw.json", "fixtures/method.json"], 0),
    case("validate_violation", &["validate", INVALID], 1),
    case("validate_malformed", &["validate", MALFORMED], 2),
    case(
        "classify_dft",
        &[
            "classify",
            "--feature",
            "physics-based",
            "--feature",
            "density-functional",
            "--feature",
            "electronic-coordinates-or-wavefunction",
        ],
        0,
    ),
    case(
        "classify_dtr",
        &["classify", "--feature", "data-driven", "--feature", "deterministic", "--feature", "decision-tree"],
        0,
    ),
    case("classify_none", &["classify"], 1),
    case(
        "classify_ambiguous",
        &[
            "classify",
            "--feature",
            "physics-based",
            "--feature",
            "electronic-coordinates-or-wavefunction",
            "--feature",
            "density-functional",
            "--feature",
            "first-principles-wavefunction",
        ],
        1,
    ),
    case("classify_bad_token", &["classify", "--feature", "magic"], 2),
    case("fingerprint_ksdft", &["fingerprint", KSDFT], 0),
    case("fingerprint_ksdft_material", &["fingerprint", KSDFT, "--material", "mp-149"], 0),
    case("fingerprint_invalid", &["fingerprint", INVALID], 1),
    case("fingerprint_malformed", &["fingerprint", MALFORMED], 2),
    with_registry("query_tag_cubic", &["query", "--tag", "scaling-power:3"], 0),
    with_registry("query_category_pb_qm", &["query", "--category", "pb/qm"], 0),
    with_registry("query_search", &["query", "--filter", "search=gbrv", "--category", "pb/qm/abin"], 0),
    with_registry("query_no_match", &["query", "--tag", "relativistic"], 0),
    with_registry("query_unknown_filter", &["query", "--filter", "colour=red"], 1),
    case("query_no_registry", &["query", "--tag", "x"], 2),
    case("export_ksdft", &["export", KSDFT], 0),
    case("export_ols", &["export", "fixtures/um_st_det_lin_ols.json", "--id", "ols-1"], 0),
    case("export_compound_json", &["--format", "json", "export", "fixtures/cm_dft_gw.json"], 0),
    case("export_invalid", &["export", INVALID], 1),
    case("export_malformed", &["export", MALFORMED], 2),
    case(
        "new_ksdft",
        &[
            "new",
            "--category",
            "pb/qm/dft/ksdft",
            "--name",
            "PBE KS-DFT",
            "--slug",
            "ksdft-pbe",
            "--flowchart-id",
            "fid-1",
            "--functional",
            "pbe",
            "--tag",
            "self-consistent",
            "--tag",
            "variational",
            "--tag",
            "scaling-power:3",
            "--method",
            "fixtures/method.json",
        ],
        0,
    ),
    case(
        "new_unknown_category",
        &["new", "--category", "pb/qm/xyz", "--name", "x", "--slug", "x", "--flowchart-id", "f"],
        1,
    ),
    case(
        "new_bad_path",
        &["new", "--category", "pb//qm", "--name", "x", "--slug", "x", "--flowchart-id", "f"],
        2,
    ),
    case(
        "compose_dft_gw",
        &[
            "compose",
            "--unit",
            KSDFT,
            "--unit",
            "fixtures/um_gw.json",
            "--unit",
            "fixtures/um_bse.json",
            "--map",
            "fid-1=wu1",
            "--map",
            "fid-5=wu2",
            "--map",
            "fid-6=wu2",
            "--method",
            "fixtures/method.json",
            "--name",
            "DFT+GW+BSE",
            "--slug",
            "dft-gw-bse",
        ],
        0,
    ),
    case(
        "compose_unmapped",
        &["compose", "--unit", KSDFT, "--unit", "fixtures/um_gw.json", "--map", "fid-1=wu1", "--method", "fixtures/method.json"],
        1,
    ),
    case("compose_malformed", &["compose", "--unit", MALFORMED, "--method", "fixtures/method.json"], 2),
    with_registry("store_new", &["store", "fixtures/um_ksdft_hse06.json", "--id", "hse-2", "--material", "mp-149"], 0),
    with_registry("store_reject_duplicate", &["store", KSDFT, "--reject-duplicates"], 1),
    with_registry("store_invalid", &["store", INVALID], 1),
    with_registry("store_malformed", &["store", MALFORMED], 2),
    case(
        "trace_band_gap",
        &["trace", "fixtures/binding_dft_gw.json", "--property", "band-gap", "--compound", "fixtures/cm_dft_gw.json"],
        0,
    ),
    with_registry("trace_last_from_registry", &["trace", "fixtures/binding_dft_gw.json", "--property", "band-gap", "--last"], 0),
    case(
        "trace_unknown_property",
        &["trace", "fixtures/binding_dft_gw.json", "--property", "phonons", "--compound", "fixtures/cm_dft_gw.json"],
        0,
    ),
    case("trace_malformed", &["trace", MALFORMED, "--property", "band-gap"], 2),
];

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Registry holding every fixture under a readable id; the DFT+GW+BSE
/// compound is stored as `dft-gw-bse`, the id its binding refers to.
pub fn seeded_registry() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut reg = Registry::open(dir.path()).unwrap();
    for (name, entity) in fixtures::corpus() {
        let id = match name {
            "cm_dft_gw.json" => "dft-gw-bse".to_string(),
            other => other.trim_end_matches(".json").replace('_', "-"),
        };
        reg.store(&entity, Some(&id), None).unwrap();
    }
    reg.flush().unwrap();
    dir
}

pub fn catecom(args: &[&str], registry: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_catecom"));
    cmd.current_dir(workspace_root()).env_remove("CATECOM_REGISTRY").args(args);
    if let Some(r) = registry {
        cmd.env("CATECOM_REGISTRY", r);
    }
    cmd.output().unwrap()
}

/// Runs a case and compares exit code and standard output with its golden
/// file. With `CATECOM_UPDATE_GOLDEN` set the golden file is rewritten.
pub fn check(case: &Case) -> Result<(), String> {
    let reg = case.registry.then(seeded_registry);
    let out = catecom(case.args, reg.as_ref().map(|d| d.path()));
    let stdout = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let golden = golden_dir().join(format!("{}.txt", case.name));
    if std::env::var_os("CATECOM_UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &stdout).unwrap();
    }
    let expected = fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    let code = out.status.code().unwrap_or(-1);
    if code != case.code {
        return Err(format!(
            "{}: exit {code}, expected {}; stderr: {}",
            case.name,
            case.code,
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    if stdout != expected {
        return Err(format!("{}: output differs from {}\n--- got ---\n{stdout}", case.name, golden.display()));
    }
    Ok(())
}
