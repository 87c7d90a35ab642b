use unsharp_core::experiments::{
    default_suite, load_configs, parse_configs, run_scenario, ScenarioConfig, ScenarioKind,
    CSV_HEADER,
};

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("unsharp-core-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn reports_write_csv_and_summary() {
    let dir = scratch("write");
    let mut cfg = ScenarioConfig::new(ScenarioKind::CommutativeBands, 4);
    cfg.m_list = vec![4, 8];
    let report = run_scenario(&cfg).unwrap();
    let (csv, json) = report.write(&dir.join("bands")).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 2);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(v["scenario"], "commutative-bands");
    assert!(v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x["pass"] == true));
}

#[test]
fn config_files_load() {
    let dir = scratch("load");
    let path = dir.join("cfg.json");
    std::fs::write(
        &path,
        r#"{"scenario": "displaceable-caps", "seed": 2, "m_list": [8, 16],
            "partition": {"type": "caps", "N": 6, "radius_factor": 1.2}}"#,
    )
    .unwrap();
    let c = load_configs(&path).unwrap();
    assert_eq!(c[0].m_list, vec![8, 16]);
    assert!(load_configs(&dir.join("missing.json")).is_err());
}

#[test]
fn scaling_in_n_rows_have_no_m() {
    let cfg = parse_configs(
        r#"{"scenario": "scaling-in-N", "seed": 1, "n_list": [4, 6], "grid": [32, 64]}"#,
    )
    .unwrap();
    let r = run_scenario(&cfg[0]).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r
        .rows
        .iter()
        .all(|row| row.m.is_none() && row.nu_c.unwrap() > 0.0));
    assert!(r.all_pass());
}

#[test]
fn bands_partition_rejected_for_scaling() {
    let cfg = parse_configs(
        r#"{"scenario": "scaling-in-N", "seed": 1,
            "partition": {"type": "bands", "N": 3, "overlap": 0.4}}"#,
    )
    .unwrap();
    assert!(run_scenario(&cfg[0]).is_err());
}

#[test]
fn timing_column_is_opt_in() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::JanssensFuzz, 3);
    cfg.cases = Some(6);
    let quiet = run_scenario(&cfg).unwrap();
    assert!(quiet.rows.iter().all(|r| r.wall_time_ms.is_none()));
    cfg.timing = true;
    let timed = run_scenario(&cfg).unwrap();
    assert!(timed.rows.iter().all(|r| r.wall_time_ms.is_some()));
}

#[test]
fn seeds_change_fuzz_rows() {
    let run = |seed| {
        let mut cfg = ScenarioConfig::new(ScenarioKind::JanssensFuzz, seed);
        cfg.cases = Some(10);
        run_scenario(&cfg).unwrap().to_csv()
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}

#[test]
fn default_suite_covers_every_scenario() {
    let kinds: Vec<_> = default_suite(0).iter().map(|c| c.scenario).collect();
    assert_eq!(kinds, ScenarioKind::ALL.to_vec());
}

#[test]
fn shipped_suite_config_parses() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/suite.json");
    let c = load_configs(&path).unwrap();
    let kinds: Vec<_> = c.iter().map(|c| c.scenario).collect();
    assert_eq!(kinds, ScenarioKind::ALL.to_vec());
}
