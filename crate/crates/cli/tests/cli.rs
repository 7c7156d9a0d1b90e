use std::path::PathBuf;
use std::process::{Command, Output};

use ultracomp_core::model::InteractionRecord;
use ultracomp_core::ultrafilter::GenericPoint;
use ultracomp_core::UpSet;

fn data(rel: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", rel].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultracomp"))
        .args(args)
        .env_remove("ULTRACOMP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn rollout_e1_totals_one() {
    let o = run(&["rollout", "--agent", &data("agents/constant-1.json"), "--env", &data("envs/e1.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("total 1\n"));
}

#[test]
fn rollout_zero_env_totals_zero() {
    let o = run(&[
        "rollout",
        "--agent",
        &data("agents/constant-1.json"),
        "--env",
        &data("envs/zero.json"),
        "--steps",
        "5",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 7);
    assert!(out.ends_with("total 0\n"));
}

#[test]
fn rollout_json_round_trips() {
    let o = run(&[
        "--format",
        "json",
        "rollout",
        "--agent",
        &data("agents/reader.json"),
        "--env",
        &data("envs/odd-game.json"),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], "2");
    let mut rec = v.clone();
    rec.as_object_mut().unwrap().remove("total");
    let rec: InteractionRecord = serde_json::from_value(rec).unwrap();
    assert_eq!(rec.truncated_at, 4);
    assert_eq!(rec.total().to_string(), "2");
}

#[test]
fn divergent_emitter_exits_three() {
    let o = run(&["rollout", "--agent", &data("agents/constant-1.json"), "--env", &data("envs/constant-emitter.json")]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("converge"));
    let o = run(&["validate", "--env", &data("envs/constant-emitter.json")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema":"ultracomp-spec/2","agent":{"kind":"constant","action":1}}"#).unwrap();
    let o = run(&["rollout", "--agent", bad.to_str().unwrap(), "--env", &data("envs/e1.json")]);
    assert_eq!(code(&o), 2);
    std::fs::write(&bad, "{not json").unwrap();
    let o = run(&["validate", "--agent", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = run(&["rollout", "--agent", "/nonexistent.json", "--env", &data("envs/e1.json")]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["compare", "--agents", "x.json"])), 2);
}

#[test]
fn compare_under_dictatorship_of_zero() {
    let o = run(&[
        "compare",
        "--agents",
        &data("agents/constant-1.json"),
        &data("agents/constant-2.json"),
        "--electorate",
        &data("electorates/alternating-principal.json"),
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("A>B"));
    assert!(out.contains("UP(0; 2; {0}; {})"));
}

#[test]
fn compare_generic_follows_residue_parity() {
    let o = run(&[
        "--format",
        "json",
        "compare",
        "--agents",
        &data("agents/constant-1.json"),
        &data("agents/constant-2.json"),
        "--electorate",
        &data("electorates/alternating-generic.json"),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r2 = GenericPoint::new(7).residue_mod(2);
    assert_eq!(v["verdict"], if r2 == 0 { "A>B" } else { "A<B" });
    let x1: UpSet = v["outperforms"].as_str().unwrap().parse().unwrap();
    assert_eq!(x1, UpSet::residue_class(0, 2));
}

#[test]
fn rank_single_and_many() {
    let o = run(&["rank", "--agents", &data("agents/reader.json"), "--electorate", &data("electorates/games.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = run(&[
        "--format",
        "json",
        "rank",
        "--agents",
        &data("agents/constant-0.json"),
        &data("agents/constant-3.json"),
        &data("agents/constant-1.json"),
        "--electorate",
        &data("electorates/alternating-principal.json"),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    assert!(classes[0][0].as_str().unwrap().ends_with("constant-1.json"));
}

#[test]
fn inspect_filter_paths() {
    let o = run(&["inspect-filter", "--seed", "5", "--depth", "1"]);
    assert_eq!(stdout(&o), "k=1 r=0 mod 1\n");
    let o = run(&["inspect-filter", "--seed", "42", "--depth", "4"]);
    assert_eq!(stdout(&o).lines().last(), Some("k=4 r=11 mod 24"));
    let o = run(&["inspect-filter", "--electorate", &data("electorates/alternating-principal.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("principal"));
}

#[test]
fn verify_named_suites_pass() {
    let o = run(&["verify", "--suite", "ultrafilter-axioms", "--trials", "1000", "--seed", "0"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("violations=0"));
    let o = run(&["verify", "--suite", "transitivity", "--trials", "200"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_output_is_byte_identical() {
    let args = ["verify", "--suite", "all", "--trials", "20", "--seed", "9", "--format", "json"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn seed_env_var_is_the_default() {
    let by_flag = run(&["verify", "--suite", "team-parity", "--trials", "30", "--seed", "4"]);
    let by_env = Command::new(env!("CARGO_BIN_EXE_ultracomp"))
        .args(["verify", "--suite", "team-parity", "--trials", "30"])
        .env("ULTRACOMP_SEED", "4")
        .output()
        .unwrap();
    assert_eq!(by_flag.stdout, by_env.stdout);
}

#[test]
fn broken_oracle_fails_with_replayable_reproducer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["verify", "--suite", "all", "--trials", "10", "--inject-fault", "broken-oracle", "--out", out]);
    assert_eq!(code(&o), 1);
    let case = dir.path().join("ultrafilter-axioms").join("case.json");
    assert!(case.exists());
    let replay = run(&["verify", "--replay", case.to_str().unwrap()]);
    assert_eq!(code(&replay), 1);
    assert!(stdout(&replay).contains("violated"));
}
