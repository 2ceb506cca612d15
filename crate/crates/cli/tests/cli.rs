use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nilfocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilfocus")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn tmp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nilfocus-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn classify_critical_case() {
    let out = nilfocus(&["classify", "--l", "2", "--k", "1", "--s", "2", "--m", "3/5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["stability"], "repeller");
    assert_eq!(v["first_index"], 10);
    assert_eq!(v["regime"], "s=kl,m=m*");
}

#[test]
fn classify_zero_damping_attracts() {
    let v = json(&nilfocus(&["classify", "--l", "2", "--k", "1", "--s", "1", "--m", "0"]));
    assert_eq!(v["stability"], "attractor");
}

#[test]
fn negative_m_is_accepted() {
    let out = nilfocus(&["classify", "--l", "3", "--k", "2", "--s", "5", "--m", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["stability"], "attractor");
}

#[test]
fn out_of_range_l_exits_2() {
    let out = nilfocus(&["classify", "--l", "1", "--k", "1", "--s", "1", "--m", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 <= l <= 2s"));
    assert_eq!(nilfocus(&["classify", "--l", "2", "--k", "1", "--s", "1", "--m", "abc"]).status.code(), Some(2));
}

#[test]
fn near_critical_float_is_inconclusive() {
    let out = nilfocus(&["classify", "--l", "2", "--k", "1", "--s", "2", "--m", "0.6"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["m_exact"], false);
    assert!(v["stability"].is_null());
}

#[test]
fn mstar_plain() {
    let out = nilfocus(&["mstar", "--l", "2", "--k", "2", "--format", "plain"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1/3");
    assert_eq!(json(&nilfocus(&["mstar", "--l", "3", "--k", "1"]))["m_star"], "3/7");
}

#[test]
fn moment_json_shape() {
    let v = json(&nilfocus(&["moment", "--l", "3", "--i", "4", "--j", "2", "--quad"]));
    assert_eq!(v["coeff_num"], "1");
    assert_eq!(v["coeff_den"], "24");
    assert_eq!(v["base"]["i0"], 0);
    assert_eq!(v["base"]["j0"], 2);
    let (f, q) = (v["float_value"].as_f64().unwrap(), v["quad_value"].as_f64().unwrap());
    assert!((f - q).abs() < 1e-8);
}

#[test]
fn lyap_numeric_cross_check() {
    let out = nilfocus(&["lyap", "--l", "2", "--k", "1", "--numeric"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["total"]["coeff"], "32/1625");
    let (e, n) = (v["total"]["float_value"].as_f64().unwrap(), v["numeric"]["total"].as_f64().unwrap());
    assert!(((e - n) / e).abs() < 1e-6);
}

#[test]
fn certify_all_contains_exact_ratio_and_rechecks() {
    let out = nilfocus(&["certify", "--l", "2", "--k", "1", "--all"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"1531\"") && text.contains("\"23205\""));
    let path = tmp("certs.json", &text);
    let re = nilfocus(&["recheck", path.to_str().unwrap()]);
    assert_eq!(re.status.code(), Some(0));

    // A forged witness is caught.
    let mut v: Value = serde_json::from_str(&text).unwrap();
    let certs = v.as_array_mut().unwrap();
    let main = certs.iter_mut().find(|c| c["claim"] == "main_terms").unwrap();
    let w = main["witness"].as_array_mut().unwrap().iter_mut().find(|w| w["name"] == "main/b2[0]").unwrap();
    w["num"] = Value::String("1532".into());
    let path = tmp("forged.json", &v.to_string());
    assert_eq!(nilfocus(&["recheck", path.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn loose_tail_index_is_inconclusive() {
    let out = nilfocus(&["certify", "--lemma", "w2w1", "--tail-n", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = nilfocus(&["certify", "--lemma", "w2w1", "--original-n"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn json_output_is_deterministic() {
    let args = ["certify", "--l", "3", "--k", "2", "--all"];
    assert_eq!(nilfocus(&args).stdout, nilfocus(&args).stdout);
}

#[test]
fn simulate_writes_trajectory_csv() {
    let out = nilfocus(&["simulate", "--l", "2", "--k", "1", "--s", "1", "--m", "-1/2", "--rho", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 0.3]);
    assert!(lines.all(|l| l.split(',').count() == 3 && !l.contains(' ')));
}

#[test]
fn sweep_rows_are_ordered_and_thread_independent() {
    let cfg = tmp(
        "grid.json",
        r#"{"grid": {"l": [2], "k": [1], "s": [1, 2], "m": ["1/2", "3/5"]},
            "points": [{"l": 5, "k": 1, "s": 2, "m": "1"}]}"#,
    );
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nilfocus"))
            .args(["sweep", "--config", cfg.to_str().unwrap()])
            .env("NILFOCUS_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("4");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "l,k,s,m,regime,stability,first_index,cert_ok,sim_delta");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("5,1,2,1,error"));
    assert!(lines[2].starts_with("2,1,1,1/2,s<kl,repeller,2,true,"));
    assert!(lines[5].starts_with("2,1,2,3/5,s=kl,m=m*,repeller,10,true,"));
}

#[test]
fn sweep_without_config_is_a_parameter_error() {
    assert_eq!(nilfocus(&["sweep"]).status.code(), Some(2));
    let bad = tmp("bad.json", r#"{"ode_tol": -1}"#);
    assert_eq!(nilfocus(&["sweep", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}
