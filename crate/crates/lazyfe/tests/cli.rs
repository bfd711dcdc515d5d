use std::process::Command;

fn lazyfe(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lazyfe")).args(args).output().unwrap()
}

#[test]
fn poisson_prints_report() {
    let out = lazyfe(&["poisson", "--dim", "2", "--n", "2,3", "--order", "2", "--repeats", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["problem"], "poisson");
    assert_eq!(v["config"]["partitions"], serde_json::json!([2, 3]));
    assert!(v["errors"]["h1"].as_f64().unwrap() < 1e-8);
}

#[test]
fn bench_accepts_problem() {
    let out = lazyfe(&["bench", "--problem", "stokes", "--dim", "2", "--n", "2", "--repeats", "2", "--simplexify"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["problem"], "stokes");
    assert!(v["timings"]["in_place_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn errors_are_json_on_stderr() {
    for (args, kind) in [
        (&["stokes", "--order", "1"][..], "config"),
        (&["poisson", "--geo", "file:/nonexistent/mesh.json"][..], "io"),
        (&["poisson", "--dim", "2", "--dirichlet", "nowhere"][..], "core"),
    ] {
        let out = lazyfe(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
        let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(v["error"]["kind"], kind, "{args:?}");
        assert!(!v["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn bad_arguments_rejected_by_parser() {
    let out = lazyfe(&["poisson", "--geo", "sphere"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sphere"));
}
