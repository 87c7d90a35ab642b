use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lab"));
    cmd.args(args).env_remove("LAB_WORKERS");
    if let Some(w) = workers {
        cmd.env("LAB_WORKERS", w);
    }
    cmd.output().expect("lab runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn version_prints_and_succeeds() {
    let o = lab(&["version"], None);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("lab "));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&lab(&[], None)), 2);
    assert_eq!(code(&lab(&["check", "--suite", "nope"], None)), 2);
    assert_eq!(code(&lab(&["quantize", "--m", "8"], None)), 2);
    assert_eq!(code(&lab(&["run", "/nonexistent/config.json"], None)), 2);
    assert_eq!(code(&lab(&["version"], Some("zero"))), 2);
    assert_eq!(code(&lab(&["version"], Some("0"))), 2);
}

#[test]
fn bad_configs_exit_2() {
    let dir = scratch("badcfg");
    let unsorted = write(
        &dir,
        "unsorted.json",
        r#"{"scenario": "commutative-bands", "seed": 1, "m_list": [16, 8]}"#,
    );
    let no_seed = write(&dir, "noseed.json", r#"{"scenario": "janssens-fuzz"}"#);
    assert_eq!(code(&lab(&["run", &unsorted], None)), 2);
    assert_eq!(code(&lab(&["run", &no_seed], None)), 2);
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = scratch("run");
    let cfg = write(
        &dir,
        "bands.json",
        r#"{"scenario": "commutative-bands", "seed": 7, "m_list": [4, 8, 16], "output": "bands"}"#,
    );
    let o = lab(&["run", &cfg, "--out-dir", dir.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.join("bands.csv")).unwrap();
    assert!(csv.starts_with(
        "scenario,m,N,nu_c,nu_q,noise_lower,ns_lower,ns_upper,m_times_nu_q,wall_time_ms,witnesses\n"
    ));
    assert_eq!(csv.lines().count(), 4);
    assert!(!csv.contains('\r'));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("bands.json")).unwrap()).unwrap();
    assert_eq!(json["scenario"], "commutative-bands");
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout
        .lines()
        .any(|l| l.starts_with("PASS commutative-bands")));
}

#[test]
fn failing_verdict_exits_1() {
    let dir = scratch("fail");
    let cfg = write(
        &dir,
        "greedy.json",
        r#"{"scenario": "commutative-bands", "seed": 7, "m_list": [4, 8], "alpha": 2.0, "output": "greedy"}"#,
    );
    let o = lab(&["run", &cfg, "--out-dir", dir.to_str().unwrap()], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL commutative-bands"));
    assert!(dir.join("greedy.csv").is_file());
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = scratch("workers");
    let cfg = write(
        &dir,
        "fuzz.json",
        r#"[{"scenario": "janssens-fuzz", "seed": 3, "cases": 40, "output": "fuzz"},
            {"scenario": "displaceable-caps", "seed": 3, "m_list": [8, 16], "m_min": 8, "output": "caps"}]"#,
    );
    let mut outputs = Vec::new();
    for w in ["1", "4"] {
        let sub = dir.join(w);
        let o = lab(&["run", &cfg, "--out-dir", sub.to_str().unwrap()], Some(w));
        assert!(code(&o) <= 1);
        outputs.push((
            std::fs::read(sub.join("fuzz.csv")).unwrap(),
            std::fs::read(sub.join("caps.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn quantize_writes_a_povm() {
    let dir = scratch("quantize");
    let out = dir.join("tetra.json");
    let o = lab(
        &[
            "quantize",
            "--m",
            "6",
            "--partition",
            "tetrahedral",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["dim"], 7);
    assert_eq!(v["N"], 4);

    let inline = r#"{"type": "bands", "N": 3, "overlap": 0.4}"#;
    let out2 = dir.join("bands.json");
    let o = lab(
        &[
            "quantize",
            "--m",
            "4",
            "--partition",
            inline,
            "--out",
            out2.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);

    let o = lab(
        &[
            "quantize",
            "--m",
            "4",
            "--partition",
            "bands:3:0.4",
            "--out",
            out2.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn quantize_rejects_bad_input() {
    let out = scratch("qbad").join("x.json");
    let out = out.to_str().unwrap();
    assert_eq!(
        code(&lab(
            &[
                "quantize",
                "--m",
                "4",
                "--partition",
                "hexagons",
                "--out",
                out
            ],
            None
        )),
        2
    );
    assert_eq!(
        code(&lab(
            &[
                "quantize",
                "--m",
                "0",
                "--partition",
                "tetrahedral",
                "--out",
                out
            ],
            None
        )),
        2
    );
    assert_eq!(
        code(&lab(
            &[
                "quantize",
                "--m",
                "4",
                "--partition",
                "bands:1:0.4",
                "--out",
                out
            ],
            None
        )),
        2
    );
}

#[test]
fn check_suites_pass() {
    let dir = scratch("check");
    for suite in ["naimark", "bt-axioms", "janssens"] {
        let prefix = dir.join(suite);
        let o = lab(
            &["check", "--suite", suite, "--out", prefix.to_str().unwrap()],
            None,
        );
        assert_eq!(
            code(&o),
            0,
            "{suite}: {}",
            String::from_utf8_lossy(&o.stdout)
        );
        assert!(dir.join(format!("{suite}.json")).is_file());
    }
}
