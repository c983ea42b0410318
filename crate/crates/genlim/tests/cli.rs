use std::process::Command;

use serde_json::Value;

fn genlim(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_genlim"))
        .args(args)
        .output()
        .expect("spawn genlim");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.v1.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const RUNS: &[&[&str]] = &[
    &["dims", "--fixture", "he_ho"],
    &["game", "--fixture", "he_ho", "--generator", "uniform:3", "--adversary", "closure:4", "--horizon", "6"],
    &["prompted", "--fixture", "prompted_two", "--generator", "uniform:2", "--adversary", "attack:3"],
    &["attack", "--fixture", "he_ho", "--attack", "closure"],
    &["attack", "--attack", "prime_tower"],
    &["attack", "--attack", "rational"],
    &["attack", "--attack", "rational", "--generator", "chain_limit"],
    &["identify", "--fixture", "he_ho"],
    &["landscape"],
    &["randomized", "--fixture", "a_or_nonpositive_all", "--generator", "noisy:0.2"],
];

#[test]
fn reports_match_versioned_schema() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    for args in RUNS {
        let (code, out, err) = genlim(args);
        assert_eq!(code, 0, "{args:?}: {err}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["schema_version"], 1);
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

#[test]
fn schema_rejects_wrong_version() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let (_, out, _) = genlim(&["dims", "--fixture", "he_ho"]);
    let mut report: Value = serde_json::from_str(&out).unwrap();
    assert!(validator.is_valid(&report));
    report["schema_version"] = 2.into();
    assert!(!validator.is_valid(&report));
}

#[test]
fn output_is_reproducible_without_timing() {
    let args = ["game", "--fixture", "he_ho", "--generator", "uniform:3", "--adversary", "closure:4", "--seed", "7"];
    assert_eq!(genlim(&args).1, genlim(&args).1);
    let (_, timed, _) = genlim(&["dims", "--fixture", "he_ho", "--timing"]);
    let v: Value = serde_json::from_str(&timed).unwrap();
    assert!(v["wall_clock_ms"].is_u64());
}

#[test]
fn csv_game_has_header_and_one_row_per_round() {
    let (code, out, _) = genlim(&[
        "game", "--fixture", "he_ho", "--generator", "uniform:3", "--adversary", "enumeration", "--horizon", "5",
        "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with('t'), "{}", lines[0]);
    assert_eq!(lines.len(), 6);
}

#[test]
fn unknown_fixture_and_param_exit_one() {
    let (code, _, err) = genlim(&["dims", "--fixture", "no_such_class"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("genlim:"));
    let (code, _, _) = genlim(&["dims", "--fixture", "he_ho", "--param", "bogus=3"]);
    assert_eq!(code, 1);
    let (code, _, _) = genlim(&["dims", "--fixture", "he_ho", "--param", "missing_equals"]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_generator_exits_one() {
    let (code, _, _) = genlim(&["game", "--fixture", "he_ho", "--generator", "psychic"]);
    assert_eq!(code, 1);
}

#[test]
fn fixtures_lists_names() {
    let (code, out, _) = genlim(&["fixtures"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "he_ho"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("genlim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dims.json");
    let (code, out, _) = genlim(&["dims", "--fixture", "he_ho", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["artifact"], "genlim");
    std::fs::remove_dir_all(dir).unwrap();
}
