use std::collections::BTreeMap;
use std::process::Command;

use campanato_cli::{
    emit_function, emit_report, generator_from_parts, ingest, parse_family, parse_report, read_report, render_report,
    run_suite, synthesize, CheckResult, CliError, Measured, ReportFormat, SuiteConfig, CHECKS, OUTPUT_DIR_ENV,
};
use campanato_core::io::Format;
use campanato_core::synth::Generator;
use campanato_core::FamilyPolicy;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_campanato"))
}

fn config(checks: &[&str]) -> SuiteConfig {
    SuiteConfig { checks: checks.iter().map(|s| s.to_string()).collect(), ..SuiteConfig::default() }
}

fn sample_result(i: usize) -> CheckResult {
    let mut measured = BTreeMap::new();
    measured.insert("ratio".to_string(), Measured(1.0 / (i as f64 + 3.0)));
    measured.insert("unbounded".to_string(), Measured(f64::INFINITY));
    CheckResult {
        tag: format!("check{i}"),
        pass: !i.is_multiple_of(3),
        measured,
        tolerance: 1e-10,
        witness: i.is_multiple_of(3).then(|| format!("cube origin [{i}, 0] side 4, \"quoted\"")),
        runtime: None,
    }
}

#[test]
fn emit_then_ingest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = synthesize(&Generator::RandomUniform { pieces: 4 }, 2, 2.0, 8, 3).unwrap();
    for name in ["f.csv", "f.json"] {
        let path = dir.path().join(name);
        emit_function(&f, &path, None).unwrap();
        let g = ingest(&path, None).unwrap();
        assert_eq!(g.samples(), f.samples());
        assert_eq!(g.domain().res(), 8);
        assert_eq!(g.domain().side(), 2.0);
    }
}

#[test]
fn csv_with_wrong_count_names_both_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "# n=1 side=1 res=4\n1\n2\n3\n").unwrap();
    match ingest(&path, Some(Format::Csv)) {
        Err(CliError::Core(campanato_core::Error::SampleCount { expected, actual })) => {
            assert_eq!((expected, actual), (4, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn json_mask_sets_active_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("masked.json");
    let doc = r#"{"dimension": 1, "side": 1.0, "resolution": 8,
        "mask": [1, 1, 1, 0, 0, 1, 1, 1], "samples": [1, 2, 3, 4, 5, 6]}"#;
    std::fs::write(&path, doc).unwrap();
    let f = ingest(&path, None).unwrap();
    assert_eq!(f.domain().active_count(), 6);
    assert_eq!(f.samples().len(), 6);
}

#[test]
fn generators_match_formulas() {
    let c = synthesize(&Generator::Constant { value: 3.0 }, 1, 1.0, 16, 0).unwrap();
    assert!(c.samples().iter().all(|&v| v == 3.0));
    let f = synthesize(&Generator::PowerCusp { beta: 0.5 }, 1, 1.0, 32, 0).unwrap();
    for (i, v) in f.samples().into_iter().enumerate() {
        let x = (i as f64 + 0.5) / 32.0;
        assert!((v - (x - 0.5).abs().sqrt()).abs() < 1e-15);
    }
    assert!(generator_from_parts("power_cusp", None, None, None, None, None, None).is_err());
    assert!(generator_from_parts("mystery", None, None, None, None, None, None).is_err());
}

#[test]
fn generate_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let st = bin()
            .args(["generate", "--kind", "random_signs", "--pieces", "8", "--res", "32", "--seed", "7", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn empty_suite_is_empty_and_passes() {
    let results = run_suite(&config(&[])).unwrap();
    assert!(results.is_empty());
    assert!(campanato_cli::all_pass(&results));
}

#[test]
fn embedding_check_on_defaults() {
    let results = run_suite(&config(&["thm2.1"])).unwrap();
    assert_eq!(results.len(), 1);
    let r = &results[0];
    assert!(r.pass, "{}", r.summary());
    assert!(r.value("max_root_ratio").unwrap() <= 2.0 * (1.0 + 1e-10));
}

#[test]
fn unknown_tag_rejected_up_front() {
    let err = run_suite(&config(&["thm2.1", "nope"])).unwrap_err();
    assert!(matches!(err, CliError::UnknownCheck(ref t) if t == "nope"));
}

#[test]
fn every_registered_check_passes_on_defaults() {
    let tags: Vec<&str> = CHECKS.iter().map(|c| c.tag).collect();
    let results = run_suite(&config(&tags)).unwrap();
    let got: Vec<&str> = results.iter().map(|r| r.tag.as_str()).collect();
    assert_eq!(got, tags);
    for r in &results {
        assert!(r.pass, "{}", r.summary());
        assert!(r.runtime.is_some());
    }
}

#[test]
fn failing_check_carries_witness() {
    let mut cfg = config(&["jn3.1"]);
    cfg.tolerances.min_r2 = 1.0;
    let r = &run_suite(&cfg).unwrap()[0];
    assert!(!r.pass);
    assert!(r.witness.as_deref().unwrap().contains("R^2"));
}

#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    let cfg = config(&["thm2.1", "jnmalpha", "weighted5", "thmr"]);
    for fmt in [ReportFormat::Json, ReportFormat::Csv] {
        let a = render_report(&run_suite(&cfg).unwrap(), fmt).unwrap();
        let b = render_report(&run_suite(&cfg).unwrap(), fmt).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn empty_report_documents() {
    let json = render_report(&[], ReportFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 0);
    let csv = render_report(&[], ReportFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), 1);
    for fmt in [ReportFormat::Json, ReportFormat::Csv] {
        assert!(parse_report(&render_report(&[], fmt).unwrap(), fmt).unwrap().is_empty());
    }
}

#[test]
fn single_result_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for r in [sample_result(0), sample_result(1)] {
        for fmt in [ReportFormat::Json, ReportFormat::Csv] {
            let path = dir.path().join(format!("r.{}", fmt.extension()));
            emit_report(std::slice::from_ref(&r), fmt, &path).unwrap();
            assert_eq!(read_report(&path, fmt).unwrap(), vec![r.clone()]);
        }
    }
}

#[test]
fn ten_results_give_ten_csv_rows() {
    let results: Vec<CheckResult> = (0..10).map(sample_result).collect();
    let csv = render_report(&results, ReportFormat::Csv).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rdr.headers().unwrap().len(), 5);
    assert_eq!(rdr.records().count(), 10);
    assert_eq!(parse_report(&csv, ReportFormat::Csv).unwrap(), results);
}

#[test]
fn family_strings() {
    assert_eq!(parse_family("dyadic").unwrap(), FamilyPolicy::Dyadic);
    assert_eq!(parse_family("anchored").unwrap(), FamilyPolicy::Anchored);
    assert_eq!(parse_family("sliding:2:4,8").unwrap(), FamilyPolicy::Sliding { stride: 2, lengths: vec![4, 8] });
    assert_eq!(parse_family("centered:1,3").unwrap(), FamilyPolicy::Centered { half_sides: vec![1, 3] });
    assert!(parse_family("sliding:2").is_err());
}

#[test]
fn config_parses_toml_and_json() {
    let toml = r#"
        checks = ["pc1", "thm2.1"]
        grid_sizes = [32, 64]
        seed = 9
        family = { policy = "anchored" }
        [exponents]
        p = [1.5]
        [tolerances]
        min_r2 = 0.8
    "#;
    let cfg = SuiteConfig::parse(toml).unwrap();
    assert_eq!(cfg.checks, ["pc1", "thm2.1"]);
    assert_eq!(cfg.family, FamilyPolicy::Anchored);
    assert_eq!(cfg.exponents.p, [1.5]);
    assert_eq!(cfg.exponents.beta, [0.5, 1.0]);
    assert_eq!(cfg.tolerances.min_r2, 0.8);
    cfg.validate().unwrap();

    let json = r#"{"checks": ["jnm1"], "dimension": 2, "grid_sizes": [8]}"#;
    let cfg = SuiteConfig::parse(json).unwrap();
    assert_eq!(cfg.dimension, 2);
    assert!(SuiteConfig::parse("colour = 1").is_err());
    assert!(SuiteConfig { grid_sizes: vec![48], ..SuiteConfig::default() }.validate().is_err());
}

#[test]
fn exit_codes_and_output_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("suite.toml");
    std::fs::write(&cfg_path, "checks = [\"pc1\", \"jnm1\"]\noutput_dir = \"unused\"\n").unwrap();
    let out = dir.path().join("reports");
    let st = bin().args(["suite", "--config"]).arg(&cfg_path).env(OUTPUT_DIR_ENV, &out).output().unwrap();
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let rows = read_report(&out.join("report.csv"), ReportFormat::Csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(read_report(&out.join("report.json"), ReportFormat::Json).unwrap() == rows);

    let st = bin().args(["suite", "--checks", "jn3.1", "--min-r2", "1"]).env_remove(OUTPUT_DIR_ENV).output().unwrap();
    assert_eq!(st.status.code(), Some(1));

    let st = bin().args(["suite", "--checks", "bogus"]).env_remove(OUTPUT_DIR_ENV).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = bin().args(["compute"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn compute_subcommands_emit_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.json");
    let g = synthesize(&Generator::LognormalWeight { sigma: 0.5 }, 1, 1.0, 32, 1).unwrap();
    emit_function(&g, &f, None).unwrap();
    let m = dir.path().join("m.csv");
    let prof = dir.path().join("profile.csv");
    let runs: Vec<Vec<String>> = vec![
        vec!["seminorm".into(), "--kind".into(), "campanato".into(), "--per-cube".into()],
        vec!["maximal".into(), "--alpha".into(), "0.5".into(), "--out".into(), m.display().to_string()],
        vec!["czd".into(), "--tau".into(), "2".into(), "--profile".into(), prof.display().to_string()],
        vec!["weight".into(), "--class".into(), "ap".into(), "--p".into(), "2".into(), "--comparison-seed".into(), "1".into()],
    ];
    for args in runs {
        let out = bin().arg("compute").args(&args).arg("--input").arg(&f).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v.is_object());
    }
    assert_eq!(ingest(&m, None).unwrap().samples().len(), 32);
    assert!(std::fs::read_to_string(prof).unwrap().starts_with("t,fraction"));
}
