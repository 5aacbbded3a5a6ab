//! End-to-end runs of the `harmonic-groups` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmonic-groups"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_config(op: &str, json: &str, extra: &[&str], out: &Path) -> Output {
    let path = out.join(format!("{op}.input.json"));
    std::fs::write(&path, json).unwrap();
    let mut args = vec![op, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args, out)
}

fn manifest(out: &Path, op: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{op}.manifest.json"))).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dinfty_dimension_is_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("dinfty.json");
    let o = run(&["dimension", "--config", cfg.to_str().unwrap(), "--seed", "7"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(dir.path(), "dimension");
    assert_eq!(m["result"]["dim"], "2");
    assert_eq!(m["result"]["delta"], "0");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["rng"]["cells"][0], 1);
}

#[test]
fn weights_summing_to_099_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "verify",
        r#"{"group":{"kind":"free_abelian","d":1},
            "measure":[{"at":[1],"weight":0.5},{"at":[-1],"weight":0.49}],
            "function":{"c":0,"phi":[1]}}"#,
        &[],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("/measure") && err.contains("99/100"), "{err}");
    assert!(!dir.path().join("verify.csv").exists());
}

#[test]
fn unknown_fields_are_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("verify", r#"{"group":{"kind":"free_abelian","d":1},"colour":"red"}"#, &[], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema violation"));
}

#[test]
fn stochastic_operations_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("z_hitting.json");
    let o = run(&["hitting-measure", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
}

#[test]
fn pipeline_json_drives_the_defect_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "defect",
        r#"{"group":{"kind":"free_abelian","d":2},
            "pipeline":[{"shear":{"axis":1,"of":0,"kind":"sqrt_floor"}}],
            "params":{"probe":"rays","radius":100}}"#,
        &["--check"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(dir.path(), "defect");
    assert_eq!(m["result"]["exhaustive"], true);
    assert!(m["result"]["max_defect"].as_i64().unwrap() >= 6);
    let csv = std::fs::read_to_string(dir.path().join("defect.csv")).unwrap();
    assert!(csv.starts_with("radius,max_defect,marker\n0,0,exhaustive\n"));
}

#[test]
fn bad_pipeline_points_at_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "defect",
        r#"{"group":{"kind":"free_abelian","d":2},"pipeline":[{"shear":{"axis":0,"of":0,"kind":"mod2"}}]}"#,
        &[],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/pipeline"));
}

#[test]
fn same_seed_same_digest() {
    let cfg = configs().join("z_induce.json");
    let digest = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["induce", "--config", cfg.to_str().unwrap(), "--seed", seed], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let m = manifest(dir.path(), "induce");
        let sha = m["sha256"].as_str().unwrap().to_string();
        let bytes = std::fs::read(dir.path().join("induce.csv")).unwrap();
        assert_eq!(harmonic_groups::report::digest(&bytes), sha);
        sha
    };
    assert_eq!(digest("11"), digest("11"));
    assert_ne!(digest("11"), digest("12"));
}

#[test]
fn failed_check_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "dimension",
        r#"{"group":{"kind":"free_abelian","d":1},
            "measure":[{"at":[1],"weight":"2/3"},{"at":[-1],"weight":"1/3"}],
            "params":{"expected_dim":2}}"#,
        &["--check"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(manifest(dir.path(), "dimension")["check"]["passed"], false);
}

#[test]
fn heavy_censoring_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "hitting-measure",
        r#"{"group":{"kind":"free_abelian","d":1},"measure":"srw",
            "subgroup":{"kind":"scaled","axis":0,"modulus":3},
            "params":{"n_samples":1000,"max_steps":1}}"#,
        &["--seed", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn ball_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "verify",
        r#"{"group":{"kind":"free_abelian","d":3},"measure":"srw",
            "function":{"c":0,"phi":[1,0,0]},"params":{"radius":400}}"#,
        &[],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn shipped_configs_pass_their_checks() {
    let cases: &[(&str, &str, bool)] = &[
        ("verify", "z2_verify.json", false),
        ("lipnorm", "heisenberg_lipnorm.json", false),
        ("dimension", "z_biased_dimension.json", false),
        ("liouville", "z2_liouville.json", false),
        ("hitting-measure", "z_hitting.json", true),
        ("induce", "z_induce.json", true),
        ("constants", "z_constants.json", true),
        ("defect", "sqrt_shear_defect.json", true),
        ("homogenize", "mod2_homogenize.json", false),
        ("linearize", "lattice_linearize.json", false),
        ("straighten", "mod2_straighten.json", false),
        ("straighten", "dinfty_straighten.json", false),
    ];
    for (op, file, seeded) in cases {
        let dir = tempfile::tempdir().unwrap();
        let cfg = configs().join(file);
        let mut args = vec![*op, "--config", cfg.to_str().unwrap(), "--check"];
        if *seeded {
            args.extend_from_slice(&["--seed", "3"]);
        }
        let o = run(&args, dir.path());
        assert!(o.status.success(), "{op} {file}: {}", stderr(&o));
        let m = manifest(dir.path(), op);
        assert_eq!(m["check"]["passed"], true, "{op} {file}");
        assert_eq!(m["operation"], *op);
    }
}

#[test]
fn f64_scalar_matches_exact_linearization() {
    let dir = tempfile::tempdir().unwrap();
    let read = |scalar: &str| {
        let o = run_config(
            "linearize",
            &format!(
                r#"{{"group":{{"kind":"heisenberg3"}},
                    "pipeline":[{{"lattice_linear":{{"matrix":[[1,2],[0,1]]}}}}],
                    "params":{{"scalar":"{scalar}"}}}}"#
            ),
            &["--check"],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(dir.path().join("linearize.csv")).unwrap()
    };
    assert_eq!(read("exact"), read("f64"));
}
