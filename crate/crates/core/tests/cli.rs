use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
archetype = \"loop\"
n_normal = 60
n_abnormal = 20
hidden = 3
baseline_hidden = 3
epochs = 3
";

fn lgnb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgnb"))
        .args(args)
        .current_dir(dir)
        .env_remove("LGNB_OUT_DIR")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn failure(out: &Output) -> String {
    assert!(!out.status.success());
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn staged_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tiny.toml"), TINY).unwrap();
    let base = ["--config", "tiny.toml", "--out", "o", "--seed", "4"];
    let with = |cmd: &'static str| {
        let mut v = base.to_vec();
        v.push(cmd);
        v
    };
    ok(&lgnb(&with("preprocess"), d));
    ok(&lgnb(&with("train"), d));
    ok(&lgnb(&with("errors"), d));
    ok(&lgnb(&with("fit-nb"), d));
    let metrics = ok(&lgnb(&with("evaluate"), d));
    assert_eq!(metrics.lines().count(), 4, "{metrics}");
    for f in [
        "windows.csv",
        "normalization.json",
        "predictor.json",
        "errors.csv",
        "nb.json",
        "metrics.csv",
        "lstm_nn.json",
        "mlp.json",
    ] {
        assert!(d.join("o").join(f).is_file(), "{f}");
    }
}

#[test]
fn staged_evaluation_matches_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tiny.toml"), TINY).unwrap();
    for cmd in ["train", "errors", "fit-nb", "evaluate"] {
        ok(&lgnb(&["--config", "tiny.toml", "--out", "staged", cmd], d));
    }
    ok(&lgnb(&["--config", "tiny.toml", "--out", "full", "run"], d));
    let read = |p: &str| std::fs::read_to_string(d.join(p)).unwrap();
    assert_eq!(read("staged/metrics.csv"), read("full/metrics.csv"));
    assert_eq!(read("staged/nb.json"), read("full/nb.json"));
}

#[test]
fn generated_csv_reproduces_the_generator_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tiny.toml"), TINY.replace("loop", "power")).unwrap();
    ok(&lgnb(&["--config", "tiny.toml", "--out", "data", "generate"], d));
    ok(&lgnb(&["--config", "tiny.toml", "--out", "direct", "run"], d));
    ok(&lgnb(&["--config", "data/dataset.toml", "--out", "from_csv", "run"], d));
    let read = |p: &str| std::fs::read(d.join(p)).unwrap();
    for f in ["metrics.csv", "predictor.json", "nb.json", "mlp.json"] {
        assert_eq!(read(&format!("direct/{f}")), read(&format!("from_csv/{f}")), "{f}");
    }
}

#[test]
fn acf_prints_one_row_per_lag() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&lgnb(&["acf", "--archetype", "land", "--max-lag", "4"], dir.path()));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "lag,acf");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "0,1.000000");
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_lgnb"))
        .args(["generate", "--archetype", "land"])
        .current_dir(dir.path())
        .env("LGNB_OUT_DIR", dir.path().join("env_out"))
        .output()
        .unwrap();
    ok(&status);
    assert!(dir.path().join("env_out/series.csv").is_file());
}

#[test]
fn failures_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    std::fs::write(d.join("bad.toml"), "hidden = 4\nnot_a_key = 1\n").unwrap();
    let err = failure(&lgnb(&["--config", "bad.toml", "run"], d));
    assert!(err.contains("stage=config"), "{err}");

    let err = failure(&lgnb(&["--config", "missing.toml", "run"], d));
    assert!(err.contains("stage=config"), "{err}");

    std::fs::write(d.join("tiny.toml"), TINY).unwrap();
    let err = failure(&lgnb(&["--config", "tiny.toml", "--out", "o", "fit-nb"], d));
    assert!(err.contains("stage=nb_fit"), "{err}");

    std::fs::create_dir(d.join("o2")).unwrap();
    std::fs::write(d.join("o2/predictor.json"), "{\"format_version\": 1, \"kind\": \"mlp\"}").unwrap();
    let err = failure(&lgnb(&["--config", "tiny.toml", "--out", "o2", "errors"], d));
    assert!(err.contains("stage=error_dataset"), "{err}");

    std::fs::write(d.join("zero.toml"), "epochs = 3\nsplit_train = 0.5\n").unwrap();
    let err = failure(&lgnb(&["--config", "zero.toml", "--out", "o3", "run"], d));
    assert!(err.contains("stage=config"), "{err}");

    let err = failure(&lgnb(&["acf", "--input", "nope.csv"], d));
    assert!(err.contains("stage=acf"), "{err}");
}
