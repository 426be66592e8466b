use mmptol::plan::{load, ErrorKind};
use mmptol::report::Report;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn mmptol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmptol")).args(args).output().expect("binary runs")
}

fn run(command: &str, file: &str, extra: &[&str]) -> Output {
    let path = fixture(file);
    let mut args = vec![command, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    mmptol(&args)
}

fn json_report(out: &Output) -> Report {
    serde_json::from_slice(&out.stdout).expect("stdout is a report")
}

#[test]
fn fixtures_match_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!("../schema/plan.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for name in ["block.json", "block_missing_spec.json", "block_extra_spec.json", "block_no_specs.json", "slab.json"] {
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        assert!(validator.is_valid(&doc), "{name}");
        // and the loader accepts what the schema accepts
        assert!(load(&serde_json::to_string(&doc).unwrap()).is_ok(), "{name}");
    }
}

#[test]
fn analyze_fixture() {
    let out = run("analyze", "block.json", &["--solver", "enumerate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("worst case: 0.073038 mm"), "{text}");
    assert!(text.contains("CONFORM"));
    // rotations also in degrees
    assert!(text.contains("(-0.028648°)"));
}

#[test]
fn influence_text_has_two_decimals() {
    let out = run("influence", "block.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.trim() == "rx_3S3        34.64"), "{text}");
    assert!(text.lines().any(|l| l.trim() == "tz_6           1.00"));
    assert!(text.lines().any(|l| l.trim() == "tz_3S3"));
}

#[test]
fn influence_json_keeps_full_precision() {
    let r = json_report(&run("influence", "block.json", &["--format", "json"]));
    let rows = r.influence.unwrap();
    let rx = rows.iter().find(|e| e.parameter == "rx_3S3").unwrap();
    assert!((rx.coefficient - 40.0 * 0.866_025_403_784_438_6).abs() < 1e-4);
    assert_ne!(format!("{:.2}", rx.coefficient), rx.coefficient.to_string());
    assert!(rows.iter().filter(|e| e.setup == 1).all(|e| e.coefficient == 0.0));
}

#[test]
fn synthesize_proposes_location_specs() {
    let r = json_report(&run("synthesize", "block_no_specs.json", &["--format", "json"]));
    let p = r.proposals.unwrap();
    assert_eq!(p.len(), 2);
    assert_eq!(
        (p[0].setup, p[0].datums.as_slice(), p[0].toleranced, p[0].spec_type.as_str()),
        (3, &[3, 4, 5][..], 6, "location")
    );
    assert_eq!((p[1].setup, p[1].toleranced), (4, 7));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run("verify", "block.json", &[]).status.code(), Some(0));
    let out = run("verify", "block_missing_spec.json", &[]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("INCOMPLETE") && text.contains("DIVERGENT"), "{text}");
    // tight functional zone: complete but non-conform
    let dir = tempdir();
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("block.json")).unwrap()).unwrap();
    doc["functional_gauge"]["width"] = serde_json::json!(0.3);
    let path = dir.join("tight.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = mmptol(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("COMPLETE"));
}

#[test]
fn size_and_redundancy() {
    let r = json_report(&run("size", "slab.json", &["--format", "json"]));
    let s = r.sizing.unwrap();
    assert!((s.specs[0].value.unwrap() - 0.2).abs() < 1e-6);
    let r = json_report(&run("redundancy", "block_extra_spec.json", &["--format", "json"]));
    let flags = r.redundancy.unwrap();
    assert_eq!(flags.iter().map(|f| f.unnecessary).collect::<Vec<_>>(), vec![true, false, false]);
    assert_eq!(flags[1].status_without, "DIVERGENT");
    assert_eq!(flags[1].value_without, None);
}

#[test]
fn identical_seeds_identical_bytes() {
    for solver in ["enumerate", "iterative"] {
        let args = ["--format", "json", "--seed", "7", "--solver", solver, "--starts", "4"];
        let a = run("influence", "block.json", &args);
        let b = run("influence", "block.json", &args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn report_round_trip() {
    for (cmd, file) in [
        ("influence", "block.json"),
        ("synthesize", "block.json"),
        ("verify", "block_missing_spec.json"),
        ("size", "block_no_specs.json"),
        ("redundancy", "block_extra_spec.json"),
    ] {
        let out = run(cmd, file, &["--format", "json"]);
        let report = json_report(&out);
        assert_eq!(report.to_json().as_bytes(), out.stdout.as_slice(), "{cmd}");
        let again: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(again, report, "{cmd}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempdir();
    let path = dir.join("report.json");
    let out = run("analyze", "block.json", &["--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Report = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(r.metadata.command, "analyze");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mmptol(&[]).status.code(), Some(2));
    assert_eq!(run("analyze", "block.json", &["--solver", "simplex"]).status.code(), Some(2));
    assert_eq!(run("analyze", "does_not_exist.json", &[]).status.code(), Some(2));
    // verify needs a specification section
    let out = run("verify", "block_no_specs.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("manufacturing_specs"));
}

fn tempdir() -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("mmptol-test-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn block_text() -> String {
    std::fs::read_to_string(fixture("block.json")).unwrap()
}

#[test]
fn empty_file_is_a_parse_error() {
    let errs = load("").unwrap_err();
    assert_eq!(errs[0].kind, ErrorKind::Parse);
    let errs = load("{\"nominal_part\": ").unwrap_err();
    assert_eq!(errs[0].kind, ErrorKind::Parse);
    let dir = tempdir();
    let path = dir.join("empty.json");
    std::fs::write(&path, "").unwrap();
    let out = mmptol(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("parse error"));
}

#[test]
fn schema_violation_is_located() {
    let text = block_text().replacen("\"rank\": 2", "\"rank\": \"second\"", 1);
    let line = text.lines().position(|l| l.contains("\"second\"")).unwrap() + 1;
    let errs = load(&text).unwrap_err();
    assert_eq!(errs[0].kind, ErrorKind::Schema);
    assert_eq!(errs[0].line, Some(line));
    let errs = load(&block_text().replacen("\"holder\"", "\"holders\"", 1)).unwrap_err();
    assert_eq!(errs[0].kind, ErrorKind::Schema);
}

#[test]
fn undeclared_surface_is_a_reference_error() {
    let mut doc: serde_json::Value = serde_json::from_str(&block_text()).unwrap();
    doc["process"]["setups"][1]["machining"][0]["surface"] = serde_json::json!(9);
    let text = serde_json::to_string_pretty(&doc).unwrap();
    let errs = load(&text).unwrap_err();
    assert_eq!(errs.len(), 1);
    let e = &errs[0];
    assert_eq!(e.kind, ErrorKind::Reference);
    assert!(e.message.contains('9'));
    assert_eq!(e.path.as_deref(), Some("process.setups[1].machining[0].surface"));
    let line = e.line.unwrap();
    assert!(text.lines().nth(line - 1).unwrap().contains("\"surface\": 9"));
    assert!(e.to_string().starts_with(&format!("line {line}: cross-reference error")));
}

#[test]
fn invalid_plan_is_located_at_its_setup() {
    let mut doc: serde_json::Value = serde_json::from_str(&block_text()).unwrap();
    // set-up 3 loses its tertiary locator: 5 of 6 degrees of freedom
    doc["process"]["setups"][2]["holder"].as_array_mut().unwrap().pop();
    let text = serde_json::to_string_pretty(&doc).unwrap();
    let errs = load(&text).unwrap_err();
    assert!(errs.iter().all(|e| e.kind == ErrorKind::Plan));
    assert!(errs.iter().any(|e| e.path.as_deref() == Some("process.setups[2]")), "{errs:?}");
}
