use std::process::{Command, Output};

use casimir::real::Real;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env_remove("CASIMIR_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and rows of a CSV document.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    &row[header.iter().position(|h| h == name).unwrap()]
}

fn value(header: &[String], row: &[String], name: &str) -> f64 {
    column(header, row, name).parse().unwrap()
}

#[test]
fn headers_are_fixed() {
    let cases: [(&[&str], &str); 6] = [
        (
            &["energy-sum", "--precision", "20"],
            "a,lambda,epsilon,n_max,energy,remainder_bound",
        ),
        (
            &["energy-expansion", "--precision", "20"],
            "a,lambda,c_m4,c_m2,c_0,c_m2_ref,c_0_ref",
        ),
        (
            &["pressure", "--precision", "20"],
            "a,lambda,field,finite_part,divergent_coeff",
        ),
        (
            &["stress", "--precision", "20"],
            "a,lambda,field,z,A,B_finite,B_div_eps2,Ttt,Tzz,trace_residual",
        ),
        (
            &["covariance", "--trials", "2", "--precision", "20"],
            "trial,rapidity,angle,residual",
        ),
        (
            &["scan", "--precision", "20"],
            "a,lambda,field,c_m2,c_0,finite_part,divergent_coeff,A,energy_finite,stress_energy",
        ),
    ];
    for (args, header) in cases {
        let o = casimir(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&o).lines().next(), Some(header));
    }
}

#[test]
fn pressure_json_at_zero_lambda() {
    let o = casimir(&[
        "pressure", "--a", "1", "--lambda", "0", "--field", "em", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["command"], "pressure");
    assert_eq!(doc["precision"], 50);
    let row = &doc["rows"][0];
    let fp = row["finite_part"].to_string();
    assert!(fp.starts_with("-4.1123351671205660911810379166"), "{fp}");
    assert!((row["finite_part"].as_f64().unwrap() + 0.0411233507).abs() < 1e-8);
    assert_eq!(row["divergent_coeff"].as_f64(), Some(0.0));
}

#[test]
fn stress_at_zero_lambda() {
    let o = casimir(&["stress", "--a", "1", "--lambda", "0", "--eps-vec", "0,0.1,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    let r = &rows[0];
    assert!((value(&h, r, "A") - 0.0548311343).abs() < 1e-8);
    assert_eq!(column(&h, r, "B_finite"), "0");
    assert_eq!(column(&h, r, "B_div_eps2"), "0");
    assert!((value(&h, r, "Tzz") + 0.0411233507).abs() < 1e-8);
    assert_eq!(column(&h, r, "z"), "");
}

#[test]
fn stress_json_reports_circle_average_remnant() {
    let o = casimir(&[
        "stress",
        "--lambda",
        "0.5",
        "--epsilon",
        "0.1",
        "--format",
        "json",
        "--precision",
        "20",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = doc["rows"][0]["circle_average_s2_weight"].as_f64().unwrap();
    assert!((w - 2.0859035).abs() < 1e-6, "{w}");
}

#[test]
fn covariance_trials_pass_and_are_reproducible() {
    let args = [
        "covariance",
        "--a",
        "1",
        "--lambda",
        "0.5",
        "--rapidity",
        "1.0",
        "--trials",
        "100",
    ];
    let o = casimir(&args);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert!(value(&h, r, "residual") <= 1e-25);
        assert!(value(&h, r, "rapidity").abs() <= 1.0);
    }
    assert_eq!(stdout(&casimir(&args)), stdout(&o));
    let other = casimir(&[
        "covariance",
        "--lambda",
        "0.5",
        "--rapidity",
        "1.0",
        "--trials",
        "100",
        "--seed",
        "9",
    ]);
    assert_ne!(stdout(&other), stdout(&o));
}

#[test]
fn scalar_covariance_uses_midplane_by_default() {
    let o = casimir(&[
        "covariance",
        "--field",
        "scalar",
        "--lambda",
        "0.3",
        "--trials",
        "10",
        "--precision",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    for r in &rows {
        assert!(value(&h, r, "residual") <= 1e-25);
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["energy-sum", "--a", "1", "--lambda", "1.2", "--epsilon", "0.1"][..],
        &["pressure", "--format", "xml"],
        &["stress", "--eps-vec", "0,0.1,0,0.3"],
        &["scan", "--a", "1:2"],
        &["bogus"],
    ] {
        let o = casimir(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = casimir(&["energy-sum", "--lambda", "1.2"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lambda"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(casimir(&["--help"]).status.code(), Some(0));
    assert_eq!(casimir(&["--version"]).status.code(), Some(0));
}

#[test]
fn wall_points_are_marked_and_the_scan_continues() {
    let o = casimir(&[
        "stress",
        "--field",
        "scalar",
        "--lambda",
        "0.5",
        "--z",
        "0:1:5",
        "--precision",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert_eq!(column(&h, &rows[0], "A"), "NaN");
    assert_eq!(column(&h, &rows[4], "A"), "NaN");
    assert!(value(&h, &rows[2], "A") > 0.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("plate"));
}

#[test]
fn non_convergence_exits_three() {
    let o = casimir(&[
        "energy-sum",
        "--lambda",
        "0.99999999",
        "--epsilon",
        "0.001",
        "--precision",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(column(&h, &rows[0], "energy"), "NaN");
}

#[test]
fn mode_sum_reports_a_certified_bound() {
    let o = casimir(&[
        "energy-sum",
        "--a",
        "1",
        "--lambda",
        "0.5",
        "--epsilon",
        "0.1",
        "--precision",
        "30",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    let r = &rows[0];
    assert!(value(&h, r, "remainder_bound") / value(&h, r, "energy") <= 1e-10);
    let fixed = casimir(&["energy-sum", "--n-max", "2", "--precision", "20"]);
    let (h, rows) = csv(&stdout(&fixed));
    assert_eq!(column(&h, &rows[0], "n_max"), "2");
}

#[test]
fn precision_flag_beats_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_casimir"));
        c.arg("pressure");
        if let Some(f) = flag {
            c.args(["--precision", f]);
        }
        match env {
            Some(e) => c.env("CASIMIR_PRECISION", e),
            None => c.env_remove("CASIMIR_PRECISION"),
        };
        let (h, rows) = csv(&String::from_utf8(c.output().unwrap().stdout).unwrap());
        let fp = column(&h, &rows[0], "finite_part").to_string();
        fp.trim_start_matches('-')
            .split('e')
            .next()
            .unwrap()
            .replace('.', "")
            .len()
    };
    assert_eq!(run(None, None), 50);
    assert_eq!(run(Some("12"), None), 12);
    assert_eq!(run(Some("12"), Some("30")), 30);
}

#[test]
fn grid_output_and_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("casimir-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.csv");
    let o = casimir(&[
        "energy-expansion",
        "--a",
        "0.5:2.0:4",
        "--lambda",
        "0:0.9:10",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let (h, rows) = csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 40);
    for r in &rows {
        for name in ["c_m2", "c_0"] {
            let got = Real::parse(column(&h, r, name)).unwrap();
            let want = Real::parse(column(&h, r, &format!("{name}_ref"))).unwrap();
            assert!((&got - &want).abs() <= Real::parse("1e-30").unwrap(), "{name} in {r:?}");
        }
        // emitted digits re-parse to the same value at that digit count
        let text = column(&h, r, "c_0");
        assert_eq!(Real::parse(text).unwrap().to_sci_string(50), text);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
