use std::path::Path;
use std::process::{Command, Output};

fn eel(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_eel"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "eel {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn setup(dir: &Path) {
    let mut text = String::from("a,b,label\n");
    for i in 0..30 {
        let x = (i as f64 * 0.53).sin();
        let y = (i as f64 * 1.7).cos();
        text += &format!("{x:.3},{y:.3},{}\n", u8::from(x - 0.3 * y > 0.0));
    }
    std::fs::write(dir.join("d.csv"), text).unwrap();
    std::fs::write(
        dir.join("run.cfg"),
        "dataset = d.csv\nfolds = 3\nruns = 1\npopulation_size = 8\nmax_evaluations = 40\nboost_max_rounds = 10\n",
    )
    .unwrap();
}

#[test]
fn run_emit_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    let stdout = eel(
        &[
            "run",
            "--config",
            "run.cfg",
            "--method",
            "off-eel",
            "--out",
            "off.json",
            "--workers",
            "1",
            "--csv",
            "off.csv",
        ],
        d,
    )
    .stdout;
    assert!(String::from_utf8_lossy(&stdout).starts_with("off-eel on "));
    assert_eq!(
        std::fs::read_to_string(d.join("off.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    eel(
        &[
            "run",
            "--config",
            "run.cfg",
            "--method",
            "boost",
            "--out",
            "boost.json",
        ],
        d,
    );

    let text =
        String::from_utf8(eel(&["compare", "--a", "off.json", "--b", "boost.json"], d).stdout)
            .unwrap();
    assert!(text.contains("test_error"), "{text}");
    let json = eel(
        &[
            "compare",
            "--a",
            "off.json",
            "--b",
            "off.json",
            "--per-fold",
            "--json",
        ],
        d,
    )
    .stdout;
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["pairing"], "per-fold");
    assert_eq!(v["pairs"], 3);

    let md = String::from_utf8(
        eel(
            &[
                "emit",
                "--report",
                "off.json",
                "--format",
                "markdown",
                "--reference",
                "boost.json",
            ],
            d,
        )
        .stdout,
    )
    .unwrap();
    assert_eq!(md.lines().count(), 3);
    assert!(md.lines().nth(2).unwrap().starts_with("| d | off-eel |"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    eel(
        &[
            "run", "--config", "run.cfg", "--method", "ga", "--out", "a.json", "--seed", "7",
        ],
        d,
    );
    eel(
        &[
            "run", "--config", "run.cfg", "--method", "ga", "--out", "b.json", "--seed", "8",
        ],
        d,
    );
    let seed = |f: &str| -> serde_json::Value {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.join(f)).unwrap()).unwrap();
        v["config"]["seed"].clone()
    };
    assert_eq!((seed("a.json"), seed("b.json")), (7.into(), 8.into()));
}

#[test]
fn verbose_writes_telemetry_and_models() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    eel(
        &[
            "run",
            "--config",
            "run.cfg",
            "--method",
            "lms",
            "--out",
            "lms.json",
            "--verbose",
            "--models",
            "models",
        ],
        d,
    );
    let telemetry = std::fs::read_to_string(d.join("lms.telemetry.csv")).unwrap();
    let mut lines = telemetry.lines();
    assert_eq!(lines.next(), Some("fold,run,step,metric,value"));
    // Each trace starts with the untrained plane.
    assert!(lines.next().unwrap().starts_with("0,0,0,rms_plane0,"));
    let models: Vec<_> = std::fs::read_dir(d.join("models")).unwrap().collect();
    assert_eq!(models.len(), 3);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("models/fold0_run0.json")).unwrap())
            .unwrap();
    assert!(m.is_object());
}

#[test]
fn run_without_method_fails() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_eel"))
        .args(["run", "--config", "run.cfg", "--out", "x.json"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no method"));
}

#[test]
fn prep_bos_discretizes_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("in.csv"),
        "x,medv\n1,18.77\n2,18.78\n3,23.74\n4,30\n",
    )
    .unwrap();
    let stdout = eel(
        &[
            "prep-bos",
            "--input",
            "in.csv",
            "--output",
            "out.csv",
            "--thresholds",
            "18.77,23.74",
        ],
        d,
    )
    .stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("[1, 2, 1]"));
    assert_eq!(
        std::fs::read_to_string(d.join("out.csv")).unwrap(),
        "x,class\n1,0\n2,1\n3,1\n4,2\n"
    );
}
