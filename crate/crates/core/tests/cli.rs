use proptest::prelude::*;
use reeb_holo::report::to_json;
use reeb_holo::scene_file::{parse_field, DomainSpec, FormSpec, SceneFile};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BALL: &str = r#"{"n":1, "domain":{"kind":"ellipsoid","axes":[2,2,2]}, "form":{"kind":"darboux"}, "charts":"auto"}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_reeb-holo"));
    c.env("REEB_HOLO_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn invariants_of_the_ball() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "ball.json", BALL);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = run(&["invariants", "--scene", s(&scene), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let r = report(&a);
    let vol = r["report"]["vol_X"].as_f64().unwrap();
    assert!((vol - 4.0 * PI / 3.0).abs() < 1e-6, "{vol}");
    assert!((r["report"]["kappa_plus_1"].as_f64().unwrap() - PI).abs() < 1e-6);
    assert!(r["report"]["diam_R"].is_number() && r["report"]["av_R"].is_number());
    assert!(String::from_utf8(text).unwrap().contains("\"vol_X\": 4.18879020478"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["invariants", "--scene", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    assert_eq!(run(&["invariants", "--grid", "many"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let bad = write(dir.path(), "bad.json", r#"{"n":3, "domain":{"kind":"ball","radius":1}, "form":{"kind":"darboux"}}"#);
    assert_eq!(run(&["strata", "--scene", s(&bad)]).status.code(), Some(2));
    // Horizontal shifts of the Darboux ball are not contact embeddings.
    let ball = write(dir.path(), "ball.json", BALL);
    let big = write(dir.path(), "big.json", r#"{"n":1, "domain":{"kind":"ball","radius":2}, "form":{"kind":"darboux"}}"#);
    let o = run(&["squeeze", "--source", s(&ball), "--target", s(&big), "--map", "translate:0,0.3,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn causality_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "ball.json", BALL);
    let out = dir.path().join("pairs.csv");
    let o = run(&["causality", "--scene", s(&scene), "--grid", "8", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[header.len() - 1], "word");
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let get = |name: &str| rec[header.iter().position(|h| h == name).unwrap()].parse::<f64>().unwrap();
        assert!((get("x_minus_0") + get("x_plus_0")).abs() < 1e-8);
        assert_eq!(get("x_minus_1"), get("x_plus_1"));
        assert_eq!(&rec[header.len() - 1], "(1,1)");
        rows += 1;
    }
    assert_eq!(rows, 64);
}

#[test]
fn reconstruction_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "r.json", r#"{"n":1, "domain":{"kind":"ball","radius":1}, "form":{"kind":"radial"}}"#);
    let data = dir.path().join("data.json");
    let first = dir.path().join("first.json");
    let o = run(&["reconstruct", "--scene", s(&scene), "--grid", "12", "--map", "rotation:0.7", "--save-bdata", s(&data), "--out", s(&first)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let probes = write(dir.path(), "p.csv", "z,x,y\n0.1,0.2,0.3\n-0.4,0.0,0.5\n");
    let out = dir.path().join("rec.json");
    let o = run(&["reconstruct", "--scene", s(&scene), "--bdata", s(&data), "--map", "rotation:0.7", "--probe", s(&probes), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    let rows = r["report"]["probes"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let (c, sn) = (0.7f64.cos(), 0.7f64.sin());
    let img: Vec<f64> = rows[0]["image"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let want = [0.1, c * 0.2 - sn * 0.3, sn * 0.2 + c * 0.3];
    assert!(img.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-6), "{img:?}");
    // The Darboux ball has no rotation symmetry.
    let darboux = write(dir.path(), "d.json", BALL);
    let o = run(&["reconstruct", "--scene", s(&darboux), "--grid", "8", "--map", "rotation:0.7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn legendrian_commands() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "ball.json", BALL);
    let arc = write(dir.path(), "arc.json", r#"{"kind":"darboux-arc","z0":0.2,"r":0.5,"t0":0,"t1":2,"samples":64}"#);
    let out = dir.path().join("sh.json");
    assert_eq!(run(&["shadow", "--scene", s(&scene), "--legendrian", s(&arc), "--out", s(&out)]).status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["report"]["isotropy"]["passed"], true);
    assert_eq!(r["report"]["flagged_fraction"].as_f64(), Some(0.0));
    let out = dir.path().join("lift.json");
    assert_eq!(run(&["lift", "--scene", s(&scene), "--legendrian", s(&arc), "--s0", "-0.1", "--out", s(&out)]).status.code(), Some(0));
    // A horizontal circle is not Legendrian.
    let flat = write(dir.path(), "flat.json", &flat_circle());
    assert_eq!(run(&["shadow", "--scene", s(&scene), "--legendrian", s(&flat)]).status.code(), Some(2));
}

fn flat_circle() -> String {
    let pts: Vec<Vec<f64>> = (0..64)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 64.0;
            vec![0.1, 0.4 * t.cos(), 0.4 * t.sin()]
        })
        .collect();
    let patch = serde_json::json!({
        "label": "flat", "lo": [0.0], "hi": [std::f64::consts::TAU], "shape": [64], "periodic": [true], "points": pts
    });
    serde_json::json!({ "kind": "sampled", "patch": patch }).to_string()
}

#[test]
fn squeeze_ball_into_ball() {
    let dir = tempfile::tempdir().unwrap();
    let ball = write(dir.path(), "ball.json", BALL);
    let big = write(dir.path(), "big.json", r#"{"n":1, "domain":{"kind":"ball","radius":2}, "form":{"kind":"darboux"}}"#);
    let spec = write(dir.path(), "q.json", r#"{"resolution":8}"#);
    let out = dir.path().join("sq.json");
    let o = run(&[
        "squeeze", "--source", s(&ball), "--target", s(&big), "--map", "z-translate:0.3", "--spec", s(&spec), "--grid", "8",
        "--kappa", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["report"]["result"]["embedding"]["complexity"]["c_bullet"], 1);
    assert!(r["report"]["result"]["kappa_plus_1"]["rel_diff"].as_f64().unwrap() < 1e-2);
}

#[test]
fn selftest_subset() {
    let o = run(&["selftest", "--only", "1,6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    assert_eq!(run(&["selftest", "--only", "99"]).status.code(), Some(2));
}

#[test]
fn scene_files() {
    let f = SceneFile::from_json(BALL).unwrap();
    assert_eq!(f.domain, DomainSpec::Ellipsoid { axes: vec![2.0; 3], center: None });
    assert_eq!(f.build(false).unwrap().dim(), 3);
    let round = SceneFile::from_json(&serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(round, f);
    let nested = r#"{"n":1, "domain":{"kind":"sand-clock","half_height":1,"neck":0.3,"bulge":0.8},
        "form":{"kind":"shifted","base":{"kind":"darboux"},"eta":"bump:0.1","t":0.05}}"#;
    assert!(SceneFile::from_json(nested).unwrap().build(false).is_ok());
    assert!(SceneFile::from_json(r#"{"n":1,"domain":{"kind":"cube"},"form":{"kind":"darboux"}}"#).is_err());
    let mut f = SceneFile::new(1, DomainSpec::Ball { radius: 1.0 }, FormSpec::Darboux);
    f.charts = "manual".into();
    assert!(f.build(true).is_err());
    // dz + x dy − 2dz reverses the orientation everywhere.
    let flipped = r#"{"n":1, "domain":{"kind":"ball","radius":1},
        "form":{"kind":"shifted","base":{"kind":"darboux"},"eta":"z","t":-2}}"#;
    let f = SceneFile::from_json(flipped).unwrap();
    assert!(matches!(f.build(false), Err(reeb_holo::Error::SingularForm { .. })));
    assert!(f.build(true).is_ok());
    assert!(parse_field("builtin:sphere", 1).is_ok());
    assert!(parse_field("linear:1,2", 1).is_err());
    assert!(parse_field("coordinate:7", 1).is_err());
}

proptest! {
    #[test]
    fn report_floats_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        // Seventeen significant digits identify every double.
        let text = to_json(&serde_json::json!({ "v": v })).unwrap();
        let num = text.split(':').nth(1).unwrap().trim().trim_end_matches('}').trim();
        prop_assert_eq!(num.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
