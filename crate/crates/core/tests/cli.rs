use std::fs;
use std::path::Path;
use std::process::Command;

const TWO_STEP: &str = r#"
T = "4"
K = 3

[periodic]
steps = [[0.5, 1], [0.5, 9]]
X = 2

[gamma]
mode = "bump"
center = 0.5
half_width = 0.5

[solver]
n_starts = 1
"#;

const CONSTANT: &str = r#"
T = "4"

[periodic]
steps = [[1, 1]]
X = 1
"#;

fn run(config: &str, dir: &Path, args: &[&str]) -> i32 {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_breathers"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(TWO_STEP, dir.path(), &["check"]), 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["tool"].as_str().unwrap().starts_with("breathers "));
    assert_eq!(report["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(run(CONSTANT, dir.path(), &["check"]), 1);
}

#[test]
fn tabular_outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (cmd, file) in [("bands", "bands.csv"), ("eigs", "eigenvalues.csv"), ("density", "density.csv")] {
        assert_eq!(run(TWO_STEP, a.path(), &[cmd]), 0);
        assert_eq!(run(TWO_STEP, b.path(), &[cmd]), 0);
        let (x, y) = (fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn solve_is_deterministic_for_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(TWO_STEP, a.path(), &["--seed", "7", "solve"]), 0);
    assert_eq!(run(TWO_STEP, b.path(), &["--seed", "7", "solve"]), 0);
    for file in ["solution.json", "field.csv"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("[periodic]\nsteps = [[0.5, -1], [0.5, 9]]\nX = 2\n", dir.path(), &["bands"]), 2);
    assert_eq!(run("T = \"4\"\nomega = 1.0\n[periodic]\nsteps = [[1, 1]]\nX = 1\n", dir.path(), &["bands"]), 2);
    assert_eq!(run("[periodic]\nsteps = [[1, 1]]\nX = 1\nbogus = 3\n", dir.path(), &["bands"]), 2);
    assert_eq!(run(TWO_STEP, dir.path(), &["no-such-command"]), 2);
}
