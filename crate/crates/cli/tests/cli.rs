use std::path::Path;
use std::process::Command;

fn fichera(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fichera"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    let text =
        String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fichera(dir.path(), &["guide-sweep", "--bogus", "1"]).0, 1);
    assert_eq!(
        fichera(dir.path(), &["guide-sweep", "--geometry", "hexagon"]).0,
        1
    );
    assert_eq!(fichera(dir.path(), &["guide-sweep", "--R", "5:1"]).0, 1);
    assert_eq!(
        fichera(dir.path(), &["reproduce", "--criterion", "nothing"]).0,
        1
    );
    assert_eq!(fichera(dir.path(), &["--help"]).0, 0);
}

#[test]
fn guide_sweep_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "guide-sweep",
        "--R",
        "1:3",
        "--p",
        "4",
        "--layers",
        "2",
        "--ratio",
        "0.2",
    ];
    let read = |sub: &str| {
        [
            "guide-broken-pairs.csv",
            "guide-broken-logdiff.csv",
            "guide-broken-sweep.json",
        ]
        .map(|f| std::fs::read_to_string(dir.path().join(sub).join(f)).unwrap())
    };
    let plain = [&args[..], &["--out", "a"]].concat();
    assert_eq!(fichera(dir.path(), &plain).0, 0);
    let first = read("a");
    assert_eq!(fichera(dir.path(), &plain).0, 0);
    assert_eq!(read("a"), first);
    assert!(first[0].starts_with("# config_hash="));
    assert!(first[2].contains("\"config_hash\"") && first[2].contains("\"seed\""));
    // the second run is served from the cache
    let cached = [&args[..], &["--out", "b", "--cache", "c"]].concat();
    assert_eq!(fichera(dir.path(), &cached).0, 0);
    let b = read("b");
    assert_eq!(fichera(dir.path(), &cached).0, 0);
    assert_eq!(read("b"), b);
    let body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&first[0]), body(&b[0]));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "R = 1,2\np = 3\nlayers = 1\nout = from-file\n",
    )
    .unwrap();
    let (code, _) = fichera(
        dir.path(),
        &["guide-sweep", "--config", "run.cfg", "--p", "4"],
    );
    assert_eq!(code, 0);
    let json =
        std::fs::read_to_string(dir.path().join("from-file/guide-broken-sweep.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["config"]["params"]["p"], "4");
    assert_eq!(v["data"]["pairs"].as_array().unwrap().len(), 2);
    std::fs::write(dir.path().join("bad.cfg"), "unknown_key = 1\n").unwrap();
    assert_eq!(
        fichera(dir.path(), &["guide-sweep", "--config", "bad.cfg"]).0,
        1
    );
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = fichera(dir.path(), &["certify", "--p", "6"]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("verdict = true"));
    let json = std::fs::read_to_string(dir.path().join("out/certificate.json")).unwrap();
    assert!(json.contains("J_psi0"));
    assert_eq!(
        fichera(dir.path(), &["certify", "--p", "4", "--trace", "zero"]).0,
        3
    );
}

#[test]
fn closed_form_point_query() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = fichera(dir.path(), &["lambda-curve", "--x3", "0"]);
    assert_eq!(code, 0);
    assert!(text.contains("lambda(0)/pi2 = 0.5000000000"));
}

#[test]
fn missing_curve_without_build_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = fichera(
        dir.path(),
        &["sturm", "--curve", "nope.json", "--build-curve", "false"],
    );
    assert_eq!(code, 2);
}

#[test]
fn dof_guard_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = fichera(
        dir.path(),
        &["layer3d", "--R", "2", "--p", "2", "--dof-limit", "10"],
    );
    assert_eq!(code, 2, "{text}");
    assert!(dir.path().join("out/layer3d-error.json").exists());
}

#[test]
fn reproduce_one_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = fichera(
        dir.path(),
        &["reproduce", "--quick", "--criterion", "mixed-square"],
    );
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("C01 mixed-square") && text.contains("PASS"));
    let md = std::fs::read_to_string(dir.path().join("out/reproduce-report.md")).unwrap();
    assert!(md.contains("config hash"));
}
