use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rotset_cli::report::Report;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn rotset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotset")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_report(p: &Path) -> Report {
    std::fs::read_to_string(p).unwrap().parse().unwrap()
}

#[test]
fn estimate_translation_is_a_point() {
    let out = rotset(&["estimate", "--config", path_str(&configs().join("translation.conf"))]);
    assert_eq!(out.status.code(), Some(0));
    let report: Report = String::from_utf8(out.stdout).unwrap().parse().unwrap();
    assert_eq!(report.get_str("kind").unwrap(), "estimate");
    assert_eq!(report.get_f64s("classical.inner").unwrap(), vec![0.25, 0.5]);
}

#[test]
fn estimate_skew_is_a_segment_with_decreasing_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("skew.txt");
    let status = rotset(&["estimate", "--config", path_str(&configs().join("skew.conf")), "--out", path_str(&out)]).status;
    assert_eq!(status.code(), Some(0));
    let r = read_report(&out);
    let inner = r.get_points("classical.inner").unwrap();
    assert!(inner.iter().all(|p| p.x.abs() < 1e-3));
    let ys: Vec<f64> = inner.iter().map(|p| p.y).collect();
    assert!(ys.iter().cloned().fold(f64::INFINITY, f64::min) < 0.01);
    assert!(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 0.99);
    let trace = r.get_f64s("classical.hausdorff_trace").unwrap();
    assert!(trace.windows(2).all(|w| w[1] <= w[0]), "{trace:?}");
}

#[test]
fn malformed_config_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "[map]\nfamily = translation\nalpha = 0.5\nbeta = 0\ngird_n = 4\n").unwrap();
    let out = rotset(&["estimate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 5") && err.contains("gird_n"), "{err}");

    let missing = rotset(&["estimate", "--config", path_str(&dir.path().join("absent.conf"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn pushforward_exit_codes() {
    for (name, code) in [("translation_pushforward", 0), ("skew_identity", 0), ("skew_affine", 0), ("gate_failure", 4)] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.txt");
        let status =
            rotset(&["pushforward", "--config", path_str(&configs().join(format!("{name}.conf"))), "--out", path_str(&out)])
                .status;
        assert_eq!(status.code(), Some(code), "{name}");
        let r = read_report(&out);
        if code == 0 {
            assert_eq!(r.get_str("status").unwrap(), "ok");
            assert!(r.get_bool("theorem.pass").unwrap());
            assert_eq!(r.get_str("certificate.status").unwrap(), "valid");
            assert_eq!(r.get_i64("empirical.violation_count").unwrap(), 0);
        }
    }
}

#[test]
fn translation_pushforward_report_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    rotset(&["pushforward", "--config", path_str(&configs().join("translation_pushforward.conf")), "--out", path_str(&out)]);
    let r = read_report(&out);
    assert!(r.get_f64("theorem.distance").unwrap() <= 0.1);
    assert_eq!(r.get_i64s("words.u").unwrap(), vec![1, 0, -1]);
    assert_eq!(r.get_f64s("hypothesis.line").unwrap(), vec![-1.0, 0.0, 1.0]);
    let image = r.get_points("image.inner").unwrap();
    assert_eq!(image.len(), 1);
    assert!((image[0].x - 1.0).abs() < 1e-12 && (image[0].y - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(r.get_i64("certificate.k0").unwrap(), 1);
}

#[test]
fn certificate_failure_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    let cfg = configs().join("certificate_failure.conf");
    let status = rotset(&["pushforward", "--config", path_str(&cfg), "--out", path_str(&out)]).status;
    assert_eq!(status.code(), Some(5));
    let r = read_report(&out);
    assert!(r.get_bool("hypothesis.holds").unwrap());
    assert_eq!(r.get_str("certificate.status").unwrap(), "failed");
    assert_eq!(r.get_str("status").unwrap(), "certificate_failed");
    assert!(!r.contains("theorem.pass"));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_wave.conf");
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    rotset(&["pushforward", "--config", path_str(&cfg), "--out", path_str(&a), "--seed", "9"]);
    rotset(&["--threads", "1", "pushforward", "--config", path_str(&cfg), "--out", path_str(&b), "--seed", "9"]);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);

    let parsed = read_report(&a);
    assert_eq!(parsed.to_string().into_bytes(), ta);
    for key in ["theorem.distance", "certificate.mn_bound", "hypothesis.clearance"] {
        let v = parsed.get_f64(key).unwrap();
        assert_eq!(v.to_string(), parsed.get_str(key).unwrap());
    }
}

#[test]
fn render_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    rotset(&["pushforward", "--config", path_str(&configs().join("skew_affine.conf")), "--out", path_str(&report)]);
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    assert_eq!(rotset(&["render", path_str(&report), "--out", path_str(&a)]).status.code(), Some(0));
    assert_eq!(rotset(&["render", path_str(&report), "--out", path_str(&b)]).status.code(), Some(0));
    let svg = std::fs::read_to_string(&a).unwrap();
    assert_eq!(svg.as_bytes(), std::fs::read(&b).unwrap().as_slice());
    assert!(svg.starts_with("<?xml") && svg.contains(r#"width="800" height="800""#));
    assert!(svg.matches(r#"class="region""#).count() >= 2);
    assert!(svg.contains(r#"class="legend""#) && svg.contains("projective image inner") && svg.contains("Z^3-action inner"));

    let point = dir.path().join("p.txt");
    rotset(&["pushforward", "--config", path_str(&configs().join("gate_failure.conf")), "--out", path_str(&point)]);
    let svg = String::from_utf8(rotset(&["render", path_str(&point)]).stdout).unwrap();
    assert_eq!(svg.matches(r#"class="marker""#).count(), 1);
    assert_eq!(svg.matches(r#"class="infinity-line""#).count(), 1);

    assert_eq!(rotset(&["render", path_str(&dir.path().join("missing.txt"))]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let out = rotset(&["selftest", "--seed", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
