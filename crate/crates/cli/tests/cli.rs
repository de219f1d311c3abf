//! End-to-end runs of the `menu` binary.

use proptest::prelude::*;
use std::path::PathBuf;
use std::process::{Command, Output};

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/programs")
}

fn menu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_menu"))
        .args(args)
        .env_remove("MENU_DEPTH_DEFAULT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn laws() -> String {
    programs().join("laws.mnu").display().to_string()
}

#[test]
fn check_accepts_the_shipped_programs() {
    for f in ["dekker.mnu", "laws.mnu"] {
        let o = menu(&["check", programs().join(f).to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{f}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!stdout(&o).is_empty());
    }
}

#[test]
fn equiv_reports_equal_and_different() {
    let o = menu(&["equiv", &laws(), "unit1_lhs", "unit1_rhs", "--depth", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "equal");
    let o = menu(&["equiv", &laws(), "p", "q", "--depth", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("different"));
}

#[test]
fn dekker_is_safe_and_the_mutant_is_not() {
    let o = menu(&["dekker", "--horizon", "24"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = menu(&[
        "dekker",
        "--horizon",
        "24",
        "--mutant",
        "nobusy",
        "--format",
        "records",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let last: serde_json::Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(last["verdict"], "unsafe");
    assert!(!last["trace"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = std::env::temp_dir().join(format!("menu-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.mnu");
    std::fs::write(&bad, "def x : T 2 = ret\n").unwrap();
    let o = menu(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = menu(&["check", dir.join("missing.mnu").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn depth_default_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_menu"))
        .args(["equiv", &laws(), "p", "q", "--format", "records"])
        .env("MENU_DEPTH_DEFAULT", "3")
        .output()
        .unwrap();
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["depth"], 3);
}

#[test]
fn records_are_one_json_object_per_line() {
    let o = menu(&[
        "equiv",
        &laws(),
        "comm_lhs",
        "comm_rhs",
        "--format",
        "records",
    ]);
    for line in stdout(&o).lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["check"].is_string() && rec["verdict"].is_string());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn random_elaboration_is_reproducible(seed in 0u64..1000) {
        let s = seed.to_string();
        let args = ["elaborate", &laws(), "--random", "3", "--check", "--seed", &s, "--format", "records"];
        let (a, b) = (menu(&args), menu(&args));
        prop_assert_eq!(a.status.code(), Some(0));
        prop_assert_eq!(stdout(&a), stdout(&b));
    }
}
