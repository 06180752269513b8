use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn dqcalc(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dqcalc")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report, stdout)
}

#[test]
fn star_product_of_x_and_y() {
    let (code, r, _) = dqcalc(&["star-product", "--dim", "2", "--pi", "dx^dy", "--order", "2", "--a", "x", "--b", "y"]);
    assert_eq!(code, 0);
    assert_eq!(r["checks"]["product"], serde_json::json!(["1/1*xy", "1/2*1"]));
    assert_eq!(r["command"], "star-product");
    assert_eq!(r["caps"]["pi"], "dx^dy");
}

#[test]
fn non_poisson_bivector_reports_its_obstruction() {
    let (code, r, _) = dqcalc(&["star-product", "--dim", "3", "--pi", "x*dy^dz + y*dx^dy", "--triple-degree", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["checks"]["poisson"], false);
    assert_eq!(r["checks"]["obstruction_is_half_schouten_square"], true);
    assert_ne!(r["checks"]["obstruction"], "0");
}

#[test]
fn hkr_check_example_passes_with_a_table() {
    let (code, r, _) = dqcalc(&["hkr-check", "--dim", "2", "--arity-max", "2", "--internal-degree", "-2..2"]);
    assert_eq!(code, 0);
    assert_eq!(r["checks"]["rows"].as_array().unwrap().len(), 15);
    assert_eq!(r["caps"]["internal_degree_window"], serde_json::json!([-2, 2]));
}

#[test]
fn jacobi_failing_tower_exits_one_with_the_word() {
    let (code, r, _) = dqcalc(&["linfty-verify", "--input", &data("jacobi_broken_tower.json")]);
    assert_eq!(code, 1);
    let w = r["witnesses"][0].as_str().unwrap();
    assert!(w.contains("arity 3 on a·b·c"), "{w}");
    let (code, _, _) = dqcalc(&["linfty-verify", "--algebra", "jacobi_broken"]);
    assert_eq!(code, 1);
}

#[test]
fn json_dgla_inputs_are_checked() {
    assert_eq!(dqcalc(&["linfty-verify", "--input", &data("heisenberg_dgla.json")]).0, 0);
    assert_eq!(dqcalc(&["mc-check", "--input", &data("abelian_mc.json")]).0, 0);
    let (code, r, _) = dqcalc(&["mc-check", "--input", &data("not_mc.json")]);
    assert_eq!(code, 1);
    assert_eq!(r["checks"]["residual"], "eps^2*(1/1*c)");
}

#[test]
fn cover_inputs_drive_the_cech_commands() {
    for cmd in ["ts-normalize", "cech-check", "double-complex-check"] {
        assert_eq!(dqcalc(&[cmd, "--input", &data("diagonal_two_cover.json")]).0, 0, "{cmd}");
    }
}

#[test]
fn parse_failures_exit_two_with_a_location() {
    let (code, r, _) = dqcalc(&["star-product", "--pi", "dx^dq"]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("column 5"), "{}", r["error"]);
    let dir = std::env::temp_dir().join(format!("dqcalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"basis\": [\n  {\"label\": \"a\", \"degree\": }\n]}").unwrap();
    let (code, r, _) = dqcalc(&["linfty-verify", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("line 2"), "{}", r["error"]);
    std::fs::write(&bad, "{\"basis\": [{\"label\": \"a\", \"degree\": 0}], \"bracket\": [{\"left\": \"a\", \"right\": \"z\", \"value\": {}}]}").unwrap();
    let (code, r, _) = dqcalc(&["linfty-verify", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("dgla.bracket: unknown label \"z\""), "{}", r["error"]);
    std::fs::remove_dir_all(&dir).ok();
    // malformed flags are rejected by the argument parser with the same code
    let out = Command::new(env!("CARGO_BIN_EXE_dqcalc")).args(["hkr-check", "--internal-degree", "2..x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn overflow_exits_three_naming_the_cap() {
    let (code, r, _) = dqcalc(&["coordbundle-verify", "--gen-cap", "5", "--jet-cap", "8"]);
    assert_eq!(code, 3);
    assert_eq!(r["overflowed_cap"], "generator cap");
    let (code, r, _) = dqcalc(&["ts-normalize", "--weight-cap", "1", "--n-max", "3"]);
    assert_eq!(code, 3, "{r}");
    assert!(r["overflowed_cap"].is_string());
}

#[test]
fn json_out_matches_stdout_and_seed_matters() {
    let dir = std::env::temp_dir().join(format!("dqcalc-seed-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("r.json");
    let (_, _, a) = dqcalc(&["mc-check", "--count", "4", "--seed", "1", "--json-out", file.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&file).unwrap(), a);
    let (_, _, b) = dqcalc(&["mc-check", "--count", "4", "--seed", "2"]);
    assert_ne!(a, b);
    std::fs::remove_dir_all(&dir).ok();
}
