use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn pinn_cert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinn-cert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pinn-cert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn net() -> String {
    fixture("burgers_small.json").to_string_lossy().into_owned()
}

#[test]
fn passing_certificate_exits_zero() {
    let out = pinn_cert(&[
        "certify",
        "--net",
        &net(),
        "--pde",
        "burgers",
        "--condition",
        "boundary",
        "--nb",
        "20",
        "--ns",
        "2000",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["pde"], "burgers");
    assert_eq!(cert["pass"], true);
    assert_eq!(cert["net_sha256"].as_str().unwrap().len(), 64);
    let tags: Vec<&str> = cert["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["tag"].as_str().unwrap())
        .collect();
    assert_eq!(tags, ["boundary[0]", "boundary[1]"]);
}

#[test]
fn failing_certificate_exits_one_and_writes_files() {
    let out_path = scratch("fail.json");
    let dump = scratch("fail.ndjson");
    let out = pinn_cert(&[
        "certify",
        "--net",
        &net(),
        "--pde",
        "burgers",
        "--condition",
        "residual",
        "--nb",
        "5",
        "--ns",
        "1000",
        "--tol-res",
        "1e-9",
        "--out",
        out_path.to_str().unwrap(),
        "--dump-branches",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(cert["pass"], false);
    let c = &cert["conditions"][0];
    assert_eq!(
        (c["tag"].as_str(), c["nb"].as_u64(), c["tolerance"].as_f64()),
        (Some("residual"), Some(5), Some(1e-9))
    );
    assert!(c["certified"].as_f64().unwrap() >= c["empirical"].as_f64().unwrap());
    // five splits of a 2-D box leave 1 + 3·5 leaves
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 16);
}

#[test]
fn errors_exit_two() {
    let missing = pinn_cert(&["certify", "--net", "/no/such/file.json", "--pde", "burgers"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/file.json"));
    let unknown = pinn_cert(&["certify", "--net", &net(), "--pde", "heat"]);
    assert_eq!(unknown.status.code(), Some(2));
    let no_residual = pinn_cert(&[
        "certify",
        "--net",
        &net(),
        "--pde",
        "diffusion-sorption",
        "--condition",
        "residual",
        "--nb",
        "0",
        "--ns",
        "10",
    ]);
    assert_eq!(no_residual.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_residual.stderr).contains("no residual"));
    let shape = pinn_cert(&[
        "certify",
        "--net",
        &net(),
        "--pde",
        "schrodinger",
        "--nb",
        "0",
        "--ns",
        "10",
    ]);
    assert_eq!(shape.status.code(), Some(2));
    let eta = pinn_cert(&[
        "certify",
        "--net",
        &net(),
        "--pde",
        "burgers",
        "--eta",
        "1.5",
    ]);
    assert_eq!(eta.status.code(), Some(2));
}

#[test]
fn bound_subcommand_reports_enclosure() {
    for (target, i) in [("u", "0"), ("du/di", "1"), ("d2u/di2", "1")] {
        let out = pinn_cert(&[
            "bound",
            "--net",
            &net(),
            "--box",
            "0:0.5,-1:-0.5",
            "--target",
            target,
            "--i",
            i,
            "--nb",
            "8",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let f = |k: &str| v[k].as_f64().unwrap();
        assert!(
            f("lo") <= f("empirical_lo") && f("empirical_hi") <= f("hi"),
            "{v}"
        );
    }
    let bad = pinn_cert(&["bound", "--net", &net(), "--box", "0:1", "--target", "u"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = pinn_cert(&["bound", "--net", &net(), "--box", "0:1,2", "--target", "u"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = pinn_cert(&[
        "bound",
        "--net",
        &net(),
        "--box",
        "0:1,0:1",
        "--target",
        "du",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
