use std::process::Command;

use valfour::valuations::{euler_current, fourier_val, intrinsic_current, volume_current, ValCurrent};
use valfour_cli::transform::{read_current, transform_current};
use valfour_cli::{run_suite, Config, Format, IDENTITIES, SUITES};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_valfour"))
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert!(run_suite("nope", &Config::default()).is_err());
    let out = bin().args(["verify", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_selection_gives_empty_passing_report() {
    let cfg = Config { n: Some(1), ..Config::default() };
    let r = run_suite("inversion", &cfg).unwrap();
    assert!(r.checks.is_empty());
    assert!(r.passed());
}

#[test]
fn reports_are_deterministic() {
    let cfg = Config { n: Some(2), ..Config::default() };
    let a = run_suite("selfadjoint", &cfg).unwrap().to_json();
    let b = run_suite("selfadjoint", &cfg).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn anchors_are_registered() {
    let cfg = Config { n: Some(2), ..Config::default() };
    for name in ["signs", "selfadjoint", "plane-example", "functoriality"] {
        let r = run_suite(name, &cfg).unwrap();
        for c in &r.checks {
            let known = IDENTITIES.iter().any(|(a, _)| *a == c.anchor)
                || valfour::signs::LEDGER.iter().any(|e| e.id == c.anchor);
            assert!(known, "unregistered anchor {}", c.anchor);
        }
    }
    assert_eq!(SUITES.len(), 9);
}

#[test]
fn report_formats() {
    let cfg = Config { n: Some(2), ..Config::default() };
    let r = run_suite("plane-example", &cfg).unwrap();
    let csv = r.render(Format::Csv);
    assert!(csv.starts_with("suite,id,anchor,criterion,error,tolerance,pass,note"));
    assert_eq!(csv.lines().count(), r.checks.len() + 1);
    let back: valfour_cli::Report = serde_json::from_str(&r.render(Format::Json)).unwrap();
    assert_eq!(back, r);
    assert!(r.render(Format::Table).contains("plane-example"));
    assert!(r.to_svg().starts_with("<svg"));
}

#[test]
fn tolerance_flags_override() {
    let cfg = Config { n: Some(2), tol_spectral: Some(1e-30), ..Config::default() };
    let r = run_suite("plane-example", &cfg).unwrap();
    assert!(!r.passed());
    let out = bin().args(["verify", "plane-example", "--n", "2", "--tol-spectral", "1e-30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_with_config_file_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 2\nband-limit = 8\nseed = 5\nformat = \"json\"\n").unwrap();
    let svg = dir.path().join("out.svg");
    let out = bin().args(["verify", "selfadjoint", "--config"]).arg(&cfg).arg("--svg").arg(&svg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: valfour_cli::Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.environment.band_limit, 8);
    assert_eq!(r.environment.seed, 5);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<rect"));
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "colour = 3\n").unwrap();
    let out = bin().args(["verify", "signs", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn write(v: &ValCurrent, path: &std::path::Path) {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

#[test]
fn transform_files() {
    let dir = tempfile::tempdir().unwrap();
    for (input, want) in [
        (intrinsic_current(3, 1).unwrap(), intrinsic_current(3, 2).unwrap()),
        (euler_current(3).unwrap(), volume_current(3).unwrap()),
        (euler_current(2).unwrap(), volume_current(2).unwrap()),
    ] {
        let (a, b) = (dir.path().join("in.json"), dir.path().join("out.json"));
        write(&input, &a);
        let out = bin().arg("transform").arg(&a).arg(&b).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("round trip"));
        let got = read_current(&b).unwrap();
        assert!(got.rel_distance(&want) < 1e-12);
    }
}

#[test]
fn transform_round_trip_is_logged_value() {
    let v = intrinsic_current(2, 1).unwrap();
    let out = transform_current(&v).unwrap();
    assert!(out.round_trip < 1e-12);
    assert!(out.output.rel_distance(&fourier_val(&v).unwrap()) == 0.0);
}

#[test]
fn transform_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("in.json");
    std::fs::write(&a, "{ not json").unwrap();
    let out = bin().arg("transform").arg(&a).arg(dir.path().join("o.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dump_multipliers_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = bin().args(["dump-multipliers", "--band-limit", "4"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["n", "lambda", "m", "re", "im"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let anchor = rows.iter().find(|r| &r[0] == "3" && &r[1] == "2.0" && &r[2] == "0").unwrap();
    assert!((anchor[3].parse::<f64>().unwrap() - std::f64::consts::PI).abs() < 1e-12);
}
