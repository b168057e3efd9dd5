use std::process::Command;

fn nilqc(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nilqc")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8 report"))
}

fn write_tmp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("nilqc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["metric-check", "--example", "hxh", "--samples", "200"],
        vec!["modulus-demo", "--samples", "300", "--seed", "7"],
        vec!["invariant", "--example", "heisenberg-dihedral"],
    ] {
        let (c1, a) = nilqc(&args);
        let (c2, b) = nilqc(&args);
        assert_eq!((c1, c2), (0, 0), "{args:?}");
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn report_shape() {
    let (code, text) = nilqc(&["counterexample"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "counterexample");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["result"]["verdict"], "IMPOSSIBLE");
    assert_eq!(v["result"]["d1"]["component_dim"], 2);
    assert_eq!(v["result"]["d2"]["order"], 16);
    for a in v["assertions"].as_array().unwrap() {
        assert!(a["name"].is_string() && a["tolerance"].is_number() && a["residual"].is_number());
    }
}

#[test]
fn out_flag_writes_same_report() {
    let path = std::env::temp_dir().join(format!("nilqc-out-{}.json", std::process::id()));
    let (_, stdout) = nilqc(&["analyze", "--example", "heisenberg-123"]);
    let (code, empty) = nilqc(&["analyze", "--example", "heisenberg-123", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(empty.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn input_errors_exit_2() {
    let (code, text) = nilqc(&["analyze", "--input", "/definitely/not/here.json"]);
    assert_eq!(code, 2);
    assert!(text.contains("input-error"));

    let truncated = write_tmp("trunc.json", "{\"basis\": [\"x\", \"y\"],\n \"weights\": [1,");
    let (code, text) = nilqc(&["analyze", "--input", truncated.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(text.contains("line 2"), "{text}");

    let so3 = write_tmp(
        "so3.json",
        r#"{"basis":["x","y","z"],"table":[[[0,0,0],[0,0,1],[0,-1,0]],[[0,0,-1],[0,0,0],[1,0,0]],[[0,1,0],[-1,0,0],[0,0,0]]],"weights":[1,1,1]}"#,
    );
    let (code, text) = nilqc(&["validate", "--input", so3.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(text.contains("not nilpotent"), "{text}");

    let broken = write_tmp(
        "jacobi.json",
        r#"{"basis":["a","b","c","d"],"brackets":[["a","b",{"c":1}],["b","c",{"d":1}],["a","d",{"d":1}]],"weights":[1,1,2,3]}"#,
    );
    let (code, _) = nilqc(&["validate", "--input", broken.to_str().unwrap()]);
    assert_eq!(code, 2);

    let (code, _) = nilqc(&["analyze", "--example", "no-such-example"]);
    assert_eq!(code, 2);
}

#[test]
fn every_command_passes_on_bundled_inputs() {
    for args in [
        vec!["validate", "--example", "hxh"],
        vec!["analyze", "--example", "abelian-r3"],
        vec!["sequence", "--example", "heisenberg-123"],
        vec!["metric-check", "--example", "heisenberg", "--samples", "100"],
        vec!["circumcenter"],
        vec!["iso-aut", "--example", "hxh", "--gram", "d2"],
        vec!["blowup-demo"],
    ] {
        let (code, text) = nilqc(&args);
        assert_eq!(code, 0, "{args:?}: {text}");
    }
}
