use sandlab::io::{parse_csv, parse_pgm};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn sandlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandlab")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn stabilize_single_vertex() {
    let v = stdout_json(&sandlab(&["stabilize", "--box", "0", "--add", "7"]));
    assert_eq!(v["height_at_origin"], 3);
    assert_eq!(v["odometer_at_origin"], 1);
}

#[test]
fn stabilize_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = sandlab(&["stabilize", "--box", "5", "--add", "200", "--out", out.to_str().unwrap()]);
    let v = stdout_json(&o);
    let rows = parse_csv(&std::fs::read_to_string(out.join("final.csv")).unwrap()).unwrap();
    assert_eq!(rows[0], ["x0", "x1", "height", "odometer"]);
    assert_eq!(rows.len(), 1 + 121);
    let origin = rows.iter().find(|r| r[0] == "0" && r[1] == "0").unwrap();
    assert_eq!(origin[3], v["odometer_at_origin"].to_string());
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["subcommand"], "stabilize");
    assert!(m["outputs"].as_array().unwrap().iter().any(|x| x == "final.csv"));
    let (w, h, maxval, _) = parse_pgm(&std::fs::read_to_string(out.join("final.pgm")).unwrap()).unwrap();
    assert_eq!((w, h, maxval), (11, 11, 3));
}

#[test]
fn data_files_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = sandlab(&["sample", "--box", "8", "--samples", "50", "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["heights.csv", "p.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between identical runs");
    }
}

#[test]
fn sample_frequencies_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = sandlab(&["sample", "--box", "8", "--samples", "40", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    let v = stdout_json(&o);
    let p: f64 = v["empirical"]["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-12);
    let rows = parse_csv(&std::fs::read_to_string(dir.path().join("heights.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
}

#[test]
fn identity_image_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let o = sandlab(&["group", "--box", "6", "--out", dir.path().to_str().unwrap()]);
    stdout_json(&o);
    let (w, h, maxval, px) = parse_pgm(&std::fs::read_to_string(dir.path().join("identity.pgm")).unwrap()).unwrap();
    assert_eq!((w, h, maxval), (13, 13, 3));
    for r in 0..h {
        for c in 0..w {
            assert_eq!(px[r * w + c], px[c * w + r]);
            assert_eq!(px[r * w + c], px[r * w + (w - 1 - c)]);
        }
    }
}

#[test]
fn identity_image_library_matches_known_small_case() {
    // Box(0) is one vertex of degree 4, its identity is height 0 (mod 4 group).
    let (w, h, _, px) = parse_pgm(&sandlab_cli::identity_image(0).unwrap()).unwrap();
    assert_eq!((w, h), (1, 1));
    assert_eq!(px, vec![0]);
    assert!(sandlab_cli::identity_image(-1).is_err());
}

#[test]
fn exact2d_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = sandlab(&["exact2d", "--report", "--n", "8", "--mo-l", "20", "--out", dir.path().to_str().unwrap()]);
    let v = stdout_json(&o);
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(v, r);
    assert!((r["kernel_reference"]["A(0,-1)"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let p0 = r["p0_determinant"]["value"].as_f64().unwrap();
    assert!((p0 - 0.0736).abs() < 2e-3);
    assert!(r["cross_check"]["difference"].as_f64().unwrap() < 1e-6);
    assert!(r["sum_Mo"]["value"].as_f64().unwrap().abs() < 1e-3);
    let k = parse_csv(&std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap()).unwrap();
    assert_eq!(k[0], ["x", "y", "A"]);
}

#[test]
fn growth_kinds_run() {
    for kind in ["point", "divisible", "explosion", "probe", "profile"] {
        let o = sandlab(&["growth", "--kind", kind, "--n", "100", "--m", "50", "--radius", "30", "--sizes", "10,40"]);
        stdout_json(&o);
    }
    let v = stdout_json(&sandlab(&["growth", "--kind", "probe", "--dim", "1", "--law", "2:1", "--sizes", "10,100"]));
    assert_eq!(v["verdict"], "Diverging");
}

#[test]
fn exit_codes() {
    assert_eq!(sandlab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(sandlab(&["stabilize", "--box", "x"]).status.code(), Some(2));
    assert_eq!(sandlab(&["growth", "--kind", "probe", "--law", "0-1"]).status.code(), Some(2));
    assert_eq!(sandlab(&["graph", "--box", "5000"]).status.code(), Some(3));
    assert_eq!(sandlab(&["growth", "--kind", "point", "--h", "3"]).status.code(), Some(2));
}

#[test]
fn text_format() {
    let o = sandlab(&["stabilize", "--box", "0", "--add", "5", "--format", "text"]);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("height_at_origin = 1"));
}
