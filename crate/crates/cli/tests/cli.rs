//! End-to-end tests of the `supercartan` binary: exit codes, output formats,
//! determinism and the problem-file grammar.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercartan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("supercartan-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn el_on_the_free_particle() {
    let out = run(&["el", fixture("supermechanics.sc").to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("E[y] = -y[t,t]"), "got: {stdout}");
    assert!(stdout.contains("E[z] = 0"), "got: {stdout}");
}

#[test]
fn el_of_a_plain_fiber_coordinate_is_one() {
    let path = write_temp(
        "linear.sc",
        "base even t; base odd s; fiber even y;\nlagrangian = y;\n",
    );
    let out = run(&["el", path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("E[y] = 1"), "got: {stdout}");
}

#[test]
fn noether_certifies_supertime_translation() {
    let out = run(&[
        "noether",
        fixture("supermechanics.sc").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    let candidates = v["candidates"].as_array().unwrap();
    let d = candidates.iter().find(|c| c["name"] == "D").unwrap();
    assert_eq!(d["supersymmetry"], true);
    assert_eq!(d["noether"], true);
    assert!(d["current"].is_object());
}

#[test]
fn pc_certificate_in_the_two_odd_chart() {
    let path = write_temp(
        "m2.sc",
        "base even x; base odd s1, s2;\nfiber even y; fiber odd z;\n\
         lagrangian = y[x]^2 + y[x]*z[-1] + y*z[x];\n",
    );
    let out = run(&["pc", path.to_str().unwrap()]);
    assert!(out.status.success(), "pc must certify Θ = Θ̃");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("certificate: Theta == ThetaInt: PASS"), "got: {stdout}");
}

#[test]
fn berezin_integrates_exactly_over_the_box() {
    // base-only body: t·s·s' with top monomial coefficient t, n = 2:
    // sign (−1)^{C(2,2)} = −1, ∫_0^2 −t dt = −2.
    let path = write_temp(
        "ber.sc",
        "base even t; base odd s1, s2; fiber even y;\n\
         lagrangian = t*s1*s2;\nbox t = [0, 2];\n",
    );
    let out = run(&["berezin", path.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"][0]["box_integral"], "-2");
}

#[test]
fn berezin_pulls_back_through_sections_when_needed() {
    let out = run(&[
        "berezin",
        fixture("supermechanics.sc").to_str().unwrap(),
        "--format",
        "json",
        "--box",
        "0,1",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2, "one result per declared section");
    // L = ½y_t² has no odd top component after pullback: integrals vanish
    for r in results {
        assert_eq!(r["box_integral"], "0");
    }
}

#[test]
fn nilpotent_square_is_rejected_unless_allowed() {
    let path = write_temp(
        "nilp.sc",
        "base even t; base odd s; fiber odd z;\nlagrangian = z^2;\n",
    );
    let out = run(&["el", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["schema"], 1);
    assert_eq!(err["error"]["kind"], "parse");
    assert!(err["error"]["line"].is_number());

    let out = run(&["el", path.to_str().unwrap(), "--allow-nilpotent"]);
    assert!(out.status.success(), "--allow-nilpotent accepts the zero Lagrangian");
}

#[test]
fn malformed_bracket_reports_the_position() {
    let path = write_temp(
        "bad.sc",
        "base even t; base odd s; fiber even y;\nlagrangian = y[t,;\n",
    );
    let out = run(&["el", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
    assert_eq!(err["error"]["line"], 2);
    assert!(err["error"]["col"].as_u64().unwrap() >= 17);
}

#[test]
fn unknown_coordinate_is_a_parse_error() {
    let path = write_temp(
        "unknown.sc",
        "base even t; fiber even y;\nlagrangian = y[t] + w;\n",
    );
    let out = run(&["el", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("unknown coordinate"));
}

#[test]
fn negative_bracket_order_is_sign_sensitive() {
    // z[-2,-1] = −z[-1,-2]
    let a = write_temp(
        "order_a.sc",
        "base even t; base odd s1, s2; fiber odd z;\nlagrangian = z[-2,-1] + z[-1,-2];\n",
    );
    let out = run(&["el", a.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // the Lagrangian cancels to zero, so every EL component is empty
    for (_, comp) in v["euler_lagrange"].as_object().unwrap() {
        assert_eq!(comp["terms"].as_array().unwrap().len(), 0);
    }
}

#[test]
fn verify_passes_and_is_deterministic_under_a_seed() {
    let file = fixture("supermechanics.sc");
    let args = ["verify", file.to_str().unwrap(), "--format", "json", "--seed", "42"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed must give identical bytes");
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 42);
}

#[test]
fn json_outputs_carry_the_schema_version() {
    let file = fixture("supermechanics.sc");
    for command in ["el", "pc", "noether", "berezin"] {
        let mut args = vec![command, file.to_str().unwrap(), "--format", "json"];
        if command == "berezin" {
            args.extend(["--box", "0,1"]);
        }
        let out = run(&args);
        assert!(out.status.success(), "{command} failed");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["schema"], 1, "{command} must emit schema 1");
        assert_eq!(v["command"], command);
    }
}

#[test]
fn problem_rendering_round_trips() {
    let src = std::fs::read_to_string(fixture("supermechanics.sc")).unwrap();
    let p1 = supercartan_cli::dsl::parse_problem(&src, false).unwrap();
    let rendered = supercartan_cli::dsl::render_problem(&p1);
    let p2 = supercartan_cli::dsl::parse_problem(&rendered, false).unwrap();
    let rendered_again = supercartan_cli::dsl::render_problem(&p2);
    assert_eq!(rendered, rendered_again, "render ∘ parse must stabilize");
    assert_eq!(p1.lagrangian, p2.lagrangian);
    assert_eq!(p1.symmetries, p2.symmetries);
}
