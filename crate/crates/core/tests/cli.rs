use std::path::Path;
use std::process::{Command, Output};

use lindeberg_lab::sk::{free_energy_lambda, SkParams};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindeberg-lab")).args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

fn header(text: &str) -> String {
    text.lines().next().unwrap_or("").to_string()
}

#[test]
fn csv_headers_follow_the_documented_schemas() {
    let cases: [(&[&str], &str); 5] = [
        (&["clt", "--n", "20", "--replicates", "200"], "experiment_id,n,replicates,mc_gap,std_error,bound,passed,seed"),
        (
            &["wigner", "--N", "6", "--replicates", "100"],
            "N,z_re,z_im,distX,distY,replicates,gap_re,gap_im,bound,mean_m_re,mean_m_im,m_sc_re,m_sc_im,seed",
        ),
        (
            &["sk_ground_state", "--N", "6", "--replicates", "100"],
            "kind,N,beta,h,distX,distY,replicates,gap,std_error,bound,passed,seed",
        ),
        (&["erdos_kac", "--n", "30", "--replicates", "200"], "n,distX,distY,replicates,gap,bound,ks_distance,seed"),
        (&["bound_table", "--grid", "10"], "family,size,quantity,value,dist_x,dist_y,seed,replicates"),
    ];
    for (args, expected) in cases {
        let out = lab(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(header(&String::from_utf8(out.stdout).unwrap()), expected);
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = lab(&["bound_table", "--grid", "12"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let value = &csv_rows(&text)[0][3];
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{value}");
}

#[test]
fn bound_table_reproduces_free_energy_lambda() {
    let out = lab(&["bound_table", "--grid", "12", "--beta", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = csv_rows(&text);
    let get =
        |q: &str| -> f64 { rows.iter().find(|r| &r[0] == "sk" && &r[1] == "12" && &r[2] == q).unwrap()[3].parse().unwrap() };
    let (l2, l3) = free_energy_lambda(&SkParams::new(1.0, 0.0).unwrap(), 12).unwrap();
    assert_eq!(get("lambda2_F"), l2);
    assert_eq!(get("lambda3_F"), l3);
}

#[test]
fn erdos_kac_rows_decrease_along_the_grid() {
    let out = lab(&["bound_table", "--grid", "10,100,1000,10000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> =
        csv_rows(&text).iter().filter(|r| &r[0] == "erdos_kac" && &r[2] == "corollary2").map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(values.len(), 4);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn config_file_sections_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.conf");
    std::fs::write(&cfg, "seed = 77\nreplicates = 150\n\n[erdos_kac]\nn = 25\ndistX = uniform\n\n[clt]\nn = 999\n").unwrap();
    let out = lab(&["erdos_kac", "--config", cfg.to_str().unwrap(), "--replicates", "120"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = &csv_rows(&text)[0];
    assert_eq!((&row[0], &row[1], &row[3], &row[7]), ("25", "uniform", "120", "77"));
}

#[test]
fn json_output_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("walk.json");
    let manifest = dir.path().join("manifest.json");
    let out = lab(&[
        "erdos_kac",
        "--n",
        "40",
        "--replicates",
        "300",
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(rows[0]["n"], 40);
    assert_eq!(rows[0]["replicates"], 300);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["suite"], "erdos_kac");
    assert_eq!(m["config"]["size"], "40");
    assert_eq!(m["checks"][0]["passed"], true);
    assert_eq!(m["reports"][0]["n"], 40);
}

#[test]
fn seeds_change_samples_but_not_bounds() {
    let run = |seed: &str| {
        let text = String::from_utf8(lab(&["clt", "--n", "30", "--replicates", "500", "--seed", seed]).stdout).unwrap();
        csv_rows(&text)[0].clone()
    };
    let (a, b) = (run("1"), run("2"));
    assert_ne!(&a[3], &b[3]);
    assert_eq!(&a[5], &b[5]);
    assert_eq!(run("1"), a);
}

#[test]
fn invalid_configuration_exits_with_2() {
    let cases: [&[&str]; 7] = [
        &["not_a_suite"],
        &["clt", "--n", "1"],
        &["clt", "--replicates", "5"],
        &["wigner", "--z-im", "0"],
        &["clt", "--dist-x", "cauchy"],
        &["clt", "--format", "xml"],
        &["clt", "--config", "/nonexistent/lab.conf"],
    ];
    for args in cases {
        assert_eq!(lab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_a_runtime_fault() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = lab(&["bound_table", "--grid", "10", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!Path::new(&target).exists());
}
