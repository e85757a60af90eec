use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn engine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engine")).args(args).output().expect("engine runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("engine-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples_in").join(name).display().to_string()
}

fn write(name: &str, text: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn report(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SDR: &str = r#""sdr": {
  "space": { "parity": [0, 0, 1], "labels": ["a", "x", "y"] },
  "retract": { "parity": [0], "labels": ["a"] },
  "q": [["0", "0", "0"], ["0", "0", "0"], ["0", "1", "0"]],
  "i": [["1"], ["0"], ["0"]],
  "pi": [["1", "0", "0"]],
  "h": [["0", "0", "0"], ["0", "0", "H"], ["0", "0", "0"]]
}"#;

fn sdr_with(h: &str) -> String {
    SDR.replace("\"H\"", &format!("{:?}", h))
}

// l2(a,a) = l2(a,x) = l2(x,a) = y
const L2: &str = r#"[{ "arity": 2, "terms": [{ "eps": 1, "matrix": [
  ["0","0","0","0","0","0","0","0","0"],
  ["0","0","0","0","0","0","0","0","0"],
  ["1","1","0","1","0","0","0","0","0"]] }] }]"#;

#[test]
fn three_dimensional_retract_passes() {
    let out = scratch("sdr.json").display().to_string();
    let o = engine(&["sdr", "--input", &example("sdr_three.json"), "--order", "4", "--report", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(true));
    assert_eq!(r["data"]["edge_integral"][1][2], "-1");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["module"] == "complexes"));
}

#[test]
fn broken_homotopy_is_a_check_failure() {
    let f = write("bad_h.json", &format!("{{\"kind\":\"sdr\",\"payload\":{{{}}}}}", sdr_with("2")));
    let out = scratch("bad_h_report.json").display().to_string();
    let o = engine(&["sdr", "--input", &f, "--report", &out]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    let failing: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.contains(&"{Q,h} = id - i pi"), "{:?}", failing);
}

#[test]
fn malformed_rational_names_its_path() {
    let f = write("zero_den.json", &format!("{{\"kind\":\"sdr\",\"payload\":{{{}}}}}", sdr_with("1/0")));
    let o = engine(&["sdr", "--input", &f]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("payload.sdr.h[1][2]") && e.contains("\"1/0\""), "{}", e);
}

#[test]
fn schema_errors_name_their_path() {
    let f = write("missing.json", r#"{"kind":"sdr","payload":{"sdr":{"space":{"parity":[0]}}}}"#);
    let o = engine(&["sdr", "--input", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("payload.sdr"), "{}", stderr(&o));

    let f = write("parity.json", &format!("{{\"kind\":\"sdr\",\"payload\":{{{}}}}}", SDR.replace("[0, 0, 1]", "[0, 0, 2]").replace("\"H\"", "\"1\"")));
    let o = engine(&["sdr", "--input", &f]);
    assert!(stderr(&o).contains("payload.sdr.space.parity[2]"), "{}", stderr(&o));

    let o = engine(&["transfer", "--input", &example("sdr_three.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kind"));
}

#[test]
fn gaussian_field_is_accepted() {
    let f = write("gauss.json", &format!("{{\"kind\":\"sdr\",\"payload\":{{{}}}}}", sdr_with("1+0i")));
    let out = scratch("gauss_report.json").display().to_string();
    let o = engine(&["sdr", "--input", &f, "--field", "qi", "--report", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(report(&out)["field"], "qi");

    let o = engine(&["saito", "milnor", "--input", &example("saito_cubic.json"), "--field", "qi"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let model = scratch("pv_det.json").display().to_string();
    assert_eq!(engine(&["build-model", "polyvector", "--w-prime", "0,0,3", "--cutoff", "9", "--window", "3", "--output", &model]).status.code(), Some(0));
    for (cmd, input) in [(vec!["sdr"], example("sdr_three.json")), (vec!["commutativity"], model.clone())] {
        let a = scratch("det_a.json").display().to_string();
        let b = scratch("det_b.json").display().to_string();
        for out in [&a, &b] {
            let mut args = cmd.clone();
            args.extend(["--input", &input, "--order", "3", "--report", out]);
            engine(&args);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn cubic_good_section_passes() {
    let out = scratch("saito3.json").display().to_string();
    let o = engine(&["saito", "goodsection", "--input", &example("saito_cubic.json"), "--order", "3", "--report", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["command"], "saito goodsection");
    assert_eq!(r["passed"], Value::Bool(true));
}

#[test]
fn saito_stages_run() {
    for stage in ["milnor", "coperators", "gmframe"] {
        let o = engine(&["saito", stage, "--input", &example("saito_cubic.json"), "--order", "2"]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", stage, stderr(&o));
    }
    let model = scratch("saito4.json").display().to_string();
    assert_eq!(engine(&["build-model", "saito", "--n", "4", "--output", &model]).status.code(), Some(0));
    let text = std::fs::read_to_string(&model).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["kind"], "saito");
    assert_eq!(v["payload"]["n"], 4);
    let out = scratch("milnor4.json").display().to_string();
    assert_eq!(engine(&["saito", "milnor", "--input", &model, "--report", &out]).status.code(), Some(0));
    assert_eq!(report(&out)["data"]["mu"], 3);
}

#[test]
fn quartic_search_reports_the_obstruction() {
    let f = write("quartic.json", r#"{"kind":"saito","payload":{"n":4,"search_bound":1}}"#);
    let out = scratch("quartic_report.json").display().to_string();
    let o = engine(&["saito", "goodsection", "--input", &f, "--order", "1", "--report", &out]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert!(r["checks"][0]["note"].as_str().unwrap().contains("obstructed at t-order 0"));
}

#[test]
fn built_polyvector_model_round_trips() {
    let model = scratch("pv_rt.json").display().to_string();
    let o = engine(&["build-model", "polyvector", "--w-prime", "0,0,3", "--cutoff", "15", "--window", "6", "--output", &model]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(v["kind"], "commutativity");
    assert_eq!(v["payload"]["family"]["linear"].as_array().unwrap().len(), 2);
    let out = scratch("pv_rt_report.json").display().to_string();
    let o = engine(&["commutativity", "--input", &model, "--order", "3", "--report", &out]);
    // parses and runs; the model is not strong Hodge, so some checks fail
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let r = report(&out);
    let status = |name: &str| {
        r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).map(|c| c["passed"].clone())
    };
    assert_eq!(status("family: [Q,U] = 0"), Some(Value::Bool(true)));
    assert_eq!(status("build_A: dA = 0"), Some(Value::Bool(true)));
    assert_eq!(status("build_A: A^A = 0"), Some(Value::Bool(true)));
    assert_eq!(status("strong Hodge: {G,G-} = 0"), Some(Value::Bool(false)));
}

#[test]
fn cutoff_below_degree_is_a_closure_error() {
    let o = engine(&["build-model", "polyvector", "--w-prime", "0,0,3", "--cutoff", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("cutoff") && e.contains("does not close"), "{}", e);
}

#[test]
fn transfer_of_operations_and_mc() {
    let mc = r#"[{ "eps": 1, "matrix": [["0","0","0"],["0","0","0"],["1","0","0"]] }]"#;
    let f = write(
        "transfer.json",
        &format!("{{\"kind\":\"transfer\",\"payload\":{{{},\"operations\":{},\"max_arity\":3,\"mc\":{}}}}}", sdr_with("1"), L2, mc),
    );
    let out = scratch("transfer_report.json").display().to_string();
    let o = engine(&["transfer", "--input", &f, "--order", "3", "--report", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    assert!(r["data"]["transferred"]["l3"].is_array());

    // an even MC term breaks the parity rule
    let f = write(
        "transfer_bad.json",
        &format!("{{\"kind\":\"transfer\",\"payload\":{{{},\"mc\":{}}}}}", sdr_with("1"), mc.replace("[\"1\",\"0\",\"0\"]", "[\"0\",\"0\",\"1\"]")),
    );
    let o = engine(&["transfer", "--input", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("payload.mc[0].matrix"), "{}", stderr(&o));
}

#[test]
fn tree_graph_amplitude_checks() {
    let f = write(
        "tqm.json",
        &format!(
            "{{\"kind\":\"tqm\",\"payload\":{{{},\"operations\":{},\"graph\":\"(m2 L1 L2)\",\"edges\":[\"r\",\"u\",\"v\"]}}}}",
            sdr_with("1"),
            L2
        ),
    );
    let out = scratch("tqm_report.json").display().to_string();
    let o = engine(&["tqm", "--input", &f, "--order", "2", "--report", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["module"] == "tqm"));
}

#[test]
fn bcov_pipeline_reports_each_stage() {
    let f = write("bcov.json", r#"{"kind":"bcov","payload":{"model":{"w_prime":["0","0","3"],"cutoff":14,"window":3}}}"#);
    let out = scratch("bcov_report.json").display().to_string();
    let o = engine(&["bcov", "--input", &f, "--order", "3", "--report", &out]);
    assert_ne!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = report(&out);
    let passed = |name: &str| r["checks"].as_array().unwrap().iter().any(|c| c["name"] == name && c["passed"] == Value::Bool(true));
    assert!(passed("oriented associativity"));
    assert!(passed("leaf-to-root build_A: dA = 0"));
}
