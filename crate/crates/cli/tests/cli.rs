use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn aeframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aeframe"))
        .args(args)
        .output()
        .expect("spawn aeframe")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_csv(dir: &Path, name: &str, rows: &[Vec<f64>], labels: Option<&[&str]>) -> PathBuf {
    let m = rows[0].len();
    let mut s: String = (1..=m).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",");
    if labels.is_some() {
        s.push_str(",label");
    }
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        s.push_str(&r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","));
        if let Some(l) = labels {
            let _ = write!(s, ",{}", l[i]);
        }
        s.push('\n');
    }
    let p = dir.join(name);
    fs::write(&p, s).unwrap();
    p
}

fn five_points() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![1.0, 1.0, 1.0, 1.0],
    ]
}

fn gaussian_rows(seed: u64, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..m).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect()
}

fn record<'a>(report: &'a Value, check: &str) -> &'a Value {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check"] == check)
        .unwrap_or_else(|| panic!("no record {check}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_then_verify_round_trips() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "d.csv", &five_points(), None);
    let net = dir.path().join("net.json");
    let o = aeframe(&[
        "build",
        s(&data),
        "--method",
        "discriminating",
        "--widths",
        "3,2",
        "--seed",
        "7",
        "--out",
        s(&net),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = stdout_json(&o);
    assert_eq!(record(&rep, "bijective")["verdict"], true);
    // one injectivity certificate per layer
    assert_eq!(record(&rep, "layer_1_injective")["verdict"], true);
    assert_eq!(record(&rep, "layer_2_injective")["verdict"], true);

    // independent check: distinct outputs by re-evaluating the saved weights
    let saved: Value = serde_json::from_str(&fs::read_to_string(&net).unwrap()).unwrap();
    let outputs: Vec<Vec<f64>> = five_points()
        .into_iter()
        .map(|mut x| {
            for layer in saved["layers"].as_array().unwrap() {
                let w = layer["weights"].as_array().unwrap();
                let b = layer["bias"].as_array().unwrap();
                x = w
                    .iter()
                    .zip(b)
                    .map(|(row, bi)| {
                        let z: f64 = row
                            .as_array()
                            .unwrap()
                            .iter()
                            .zip(&x)
                            .map(|(a, v)| a.as_f64().unwrap() * v)
                            .sum::<f64>()
                            + bi.as_f64().unwrap();
                        z.max(0.0)
                    })
                    .collect();
            }
            x
        })
        .collect();
    assert_eq!(outputs[0].len(), 2);
    for i in 0..outputs.len() {
        for j in (i + 1)..outputs.len() {
            let gap = outputs[i]
                .iter()
                .zip(&outputs[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(gap > 1e-9);
        }
    }

    let o = aeframe(&["verify", s(&net), s(&data)]);
    assert_eq!(code(&o), 0);
    assert_eq!(record(&stdout_json(&o), "bijective")["verdict"], true);
}

#[test]
fn json_dataset_matches_csv() {
    let dir = TempDir::new().unwrap();
    let csv = write_csv(dir.path(), "d.csv", &five_points(), None);
    let items: Vec<Value> = five_points()
        .iter()
        .map(|r| {
            let mut o = serde_json::Map::new();
            for (k, v) in r.iter().enumerate() {
                o.insert(format!("x{}", k + 1), Value::from(*v));
            }
            Value::Object(o)
        })
        .collect();
    let json = dir.path().join("d.json");
    fs::write(&json, serde_json::to_string(&items).unwrap()).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(
        code(&aeframe(&[
            "build",
            s(&csv),
            "--n-e",
            "2",
            "--seed",
            "3",
            "--out",
            s(&a)
        ])),
        0
    );
    assert_eq!(
        code(&aeframe(&[
            "build",
            s(&json),
            "--n-e",
            "2",
            "--seed",
            "3",
            "--out",
            s(&b)
        ])),
        0
    );
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn spec_violations_exit_2() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "d.csv", &five_points(), None);
    let out = dir.path().join("n.json");
    let o = aeframe(&["build", s(&data), "--widths", "2,3", "--seed", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly decrease"));

    let o = aeframe(&[
        "build",
        s(&data),
        "--method",
        "distinguishable",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("m > |D| + depth"));
    assert!(!out.exists());

    assert_eq!(
        code(&aeframe(&["build", s(&data), "--widths", "3", "--out", s(&out)])),
        2,
        "seed is required"
    );
    assert_eq!(code(&aeframe(&["experiment", "thm99", "--seed", "1"])), 2);
    assert_eq!(code(&aeframe(&["experiment", "thm7"])), 2, "seed is required");
    assert_eq!(
        code(&aeframe(&["experiment", "thm7", "--seed", "1", "--eps-zero", "0"])),
        2
    );
}

#[test]
fn parse_and_dimension_errors_exit_4() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "d.csv", &five_points(), None);
    let net = dir.path().join("net.json");
    assert_eq!(
        code(&aeframe(&[
            "build",
            s(&data),
            "--widths",
            "3,2",
            "--seed",
            "1",
            "--out",
            s(&net)
        ])),
        0
    );

    let text = fs::read_to_string(&net).unwrap();
    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&aeframe(&["verify", s(&corrupt), s(&data)])), 4);

    // a weight row of the wrong length parses as JSON but not as a network
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["layers"][1]["weights"][0]
        .as_array_mut()
        .unwrap()
        .push(Value::from(1.0));
    fs::write(&corrupt, v.to_string()).unwrap();
    assert_eq!(code(&aeframe(&["verify", s(&corrupt), s(&data)])), 4);

    let small = write_csv(
        dir.path(),
        "small.csv",
        &[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
        None,
    );
    assert_eq!(code(&aeframe(&["verify", s(&net), s(&small)])), 4);

    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&aeframe(&["verify", s(&net), s(&missing)])), 4);

    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "x1,x2\n1,oops\n").unwrap();
    assert_eq!(
        code(&aeframe(&[
            "build",
            s(&junk),
            "--widths",
            "1",
            "--seed",
            "1",
            "--out",
            s(&net)
        ])),
        4
    );
}

#[test]
fn colliding_network_fails_verification() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "d.csv", &five_points(), None);
    // projects onto x1: {0, 2, 3} and {1, 4} collide
    let net = serde_json::json!({
        "role": "encoder",
        "layers": [{"weights": [[1.0, 0.0, 0.0, 0.0]], "bias": [1.0], "activation": "relu"}],
    });
    let p = dir.path().join("proj.json");
    fs::write(&p, net.to_string()).unwrap();
    let o = aeframe(&["verify", s(&p), s(&data)]);
    assert_eq!(code(&o), 1);
    let rep = stdout_json(&o);
    let bij = record(&rep, "bijective");
    assert_eq!(bij["verdict"], false);
    assert_eq!(bij["witnesses"]["colliding_pairs"].as_array().unwrap().len(), 4);
}

#[test]
fn disentangling_build_verifies() {
    let dir = TempDir::new().unwrap();
    let mut rows = vec![vec![0.0; 10]; 4];
    rows[1][0] = 1.0;
    rows[2][1] = 1.0;
    rows[3][0] = 1.0;
    rows[3][1] = 1.0;
    let data = write_csv(dir.path(), "xor.csv", &rows, Some(&["a", "b", "b", "a"]));
    let net = dir.path().join("net.json");
    let o = aeframe(&[
        "build",
        s(&data),
        "--method",
        "disentangling",
        "--seed",
        "5",
        "--out",
        s(&net),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = aeframe(&["verify", s(&net), s(&data), "--disentangled"]);
    assert_eq!(code(&o), 0);
    let rep = stdout_json(&o);
    let d = record(&rep, "disentangled");
    assert_eq!(d["witnesses"]["input_separable"], false);
    assert_eq!(d["witnesses"]["output_separable"], true);
}

#[test]
fn experiments_report_and_are_deterministic() {
    let o = aeframe(&["experiment", "thm7", "--seed", "11"]);
    assert_eq!(code(&o), 0);
    let rep = stdout_json(&o);
    let f = record(&rep, "discrimination_frequency")["metrics"]["frequency"]
        .as_f64()
        .unwrap();
    assert!(f >= 0.999);
    assert_eq!(o.stdout, aeframe(&["experiment", "thm7", "--seed", "11"]).stdout);

    let o = aeframe(&["experiment", "thm1", "--seed", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(record(&stdout_json(&o), "parallel_instance_collapses")["verdict"], true);

    let o = aeframe(&["experiment", "fig1", "--seed", "0", "--format", "table"]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.lines().skip(1).all(|l| l.starts_with("PASS")));
}

#[test]
fn build_is_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "d.csv", &gaussian_rows(9, 40, 8), None);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = aeframe(&["build", s(&data), "--n-e", "2", "--seed", "21", "--out", s(&out)]);
        assert_eq!(code(&o), 0);
        (o.stdout, fs::read(out).unwrap())
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn compare_generic_and_affine_data() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "g.csv", &gaussian_rows(4, 50, 30), None);
    let o = aeframe(&["compare", s(&data), "--n-e", "1", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = stdout_json(&o);
    let ae = c["reduction"][0]["reconstruction_error"].as_f64().unwrap();
    let pca = c["reduction"][1]["reconstruction_error"].as_f64().unwrap();
    assert!(ae <= 1e-9, "{ae}");
    assert!(pca > 1e-3, "{pca}");

    // points on a line: one principal direction captures everything
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| (0..5).map(|k| 1.0 + f64::from(i) * (k as f64 - 2.0)).collect())
        .collect();
    let line = write_csv(dir.path(), "line.csv", &rows, None);
    let c = stdout_json(&aeframe(&["compare", s(&line), "--n-e", "1", "--seed", "1"]));
    assert!(c["reduction"][0]["reconstruction_error"].as_f64().unwrap() <= 1e-9);
    assert!(c["reduction"][1]["reconstruction_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn compare_counts_tree_parameters() {
    let dir = TempDir::new().unwrap();
    let data = write_csv(dir.path(), "g.csv", &gaussian_rows(6, 12, 10), None);
    let o = aeframe(&["compare", s(&data), "--n-e", "2", "--n-b", "5", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let c = stdout_json(&o);
    assert_eq!(c["parameters"][1]["parameter_count"], 55);
    let o = aeframe(&[
        "compare",
        s(&data),
        "--n-e",
        "2",
        "--n-b",
        "5",
        "--seed",
        "1",
        "--format",
        "table",
    ]);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table
        .lines()
        .any(|l| l.starts_with("parameters") && l.trim_end().ends_with("55")));
}
