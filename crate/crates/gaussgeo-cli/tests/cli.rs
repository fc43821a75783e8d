use std::path::Path;
use std::process::{Command, Output};

fn gaussgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussgeo")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = gaussgeo(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    gaussgeo(args).status.code().expect("exited normally")
}

/// Header row and data rows of a CSV, comments dropped.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(rows: &[Vec<String>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn single_point_grid_gives_one_row() {
    let csv = stdout(&["sweep", "--model", "reservoir", "--grid", "lambda=0:0:1", "--quantities", "gap"]);
    let (header, rows) = table(&csv);
    assert_eq!(header, ["lambda", "gap"]);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1].parse::<f64>().unwrap() - 0.5).abs() < 1e-9);
    assert!(csv.starts_with("# gaussgeo "));
    assert!(csv.contains("# model: reservoir\n# fixed: theta=2.9999999999999999e-1\n# seed: 1\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn serial_and_parallel_runs_are_byte_identical() {
    for format in ["csv", "json"] {
        let base = [
            "sweep", "--model", "boundary-xy", "--set", "n=8", "--grid", "delta=0.5:1.5:0.5", "--grid", "h=0:1:0.5",
            "--quantities", "gap,gmax,detg,muc,R,xi,purity", "--format", format, "--seed", "9",
        ];
        let serial = stdout(&[&base[..], &["--jobs", "1"]].concat());
        let parallel = stdout(&[&base[..], &["--jobs", "3"]].concat());
        let again = stdout(&[&base[..], &["--jobs", "3"]].concat());
        assert_eq!(serial, parallel);
        assert_eq!(parallel, again);
    }
}

#[test]
fn rows_follow_the_grid_in_row_major_order() {
    let csv = stdout(&["sweep", "--model", "synthetic", "--grid", "n=2:3:1", "--grid", "p=1:3:1", "--quantities", "gap"]);
    let (header, rows) = table(&csv);
    assert_eq!(header, ["n", "p", "gap"]);
    let got: Vec<(String, f64, f64)> = rows.iter().map(|r| (r[0].clone(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    let want = [("2", 1.0, 2.0), ("2", 2.0, 4.0), ("2", 3.0, 8.0), ("3", 1.0, 3.0), ("3", 2.0, 9.0), ("3", 3.0, 27.0)];
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0.as_str(), g.1, g.2), w);
    }
}

#[test]
fn failed_points_name_the_error() {
    let csv = stdout(&["sweep", "--model", "rotated-xy", "--grid", "epsilon=0:1:0.5", "--quantities", "gap,xi"]);
    let (_, rows) = table(&csv);
    assert_eq!(rows[0][1..], ["DegenerateInput", "DegenerateInput"]);
    assert!(rows[1][1].parse::<f64>().unwrap() > 0.0);
    assert_eq!(rows.len(), 3);
}

#[test]
fn json_and_csv_agree() {
    let args = ["sweep", "--model", "reservoir", "--grid", "lambda=0.2:0.6:0.2", "--quantities", "gap,xi,muc"];
    let (_, rows) = table(&stdout(&args));
    let json: serde_json::Value = serde_json::from_str(&stdout(&[&args[..], &["--format", "json"]].concat())).unwrap();
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (r, j) in rows.iter().zip(jrows) {
        assert_eq!(r[0].parse::<f64>().unwrap(), j["point"][0].as_f64().unwrap());
        for k in 0..3 {
            assert_eq!(r[k + 1].parse::<f64>().unwrap(), j["values"][k].as_f64().unwrap());
        }
    }
    assert_eq!(json["quantities"], serde_json::json!(["gap", "xi", "muc"]));
    assert_eq!(json["model"], "reservoir");
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        "seed = 42\n[scaling]\nmodel = dicke\n[sweep]\nmodel = synthetic\nset.a = 2\nset.p = 1\ngrid.n = 1:3:1\nquantities = gap\n",
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let out_s = out.to_str().unwrap();
    assert_eq!(code(&["sweep", "--config", cfg_s, "--set", "p=2", "--out", out_s]), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# fixed: a=2.0000000000000000e0 p=2.0000000000000000e0\n"));
    assert!(csv.contains("# seed: 42\n"));
    let (_, rows) = table(&csv);
    assert_eq!(column(&rows, 1), [2.0, 8.0, 18.0]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["sweep", "--model", "reservoir", "--grid", "lambda=0:1:0.5"]), 1);
    assert_eq!(code(&["sweep", "--model", "reservoir", "--grid", "lambda=0:1:0", "--quantities", "gap"]), 1);
    assert_eq!(code(&["sweep", "--model", "reservoir", "--set", "lambda", "--grid", "theta=0:1:1", "--quantities", "gap"]), 1);
    assert_eq!(code(&["scaling", "--model", "synthetic", "--sizes", "10,20,30", "--quantities", "gap"]), 1);
    assert_eq!(code(&["geometry", "--model", "boundary-xy", "--set", "n=1"]), 2);
    let missing = Path::new("/nonexistent-dir/out.csv").to_str().unwrap();
    assert_eq!(code(&["sweep", "--model", "synthetic", "--grid", "n=1:1:1", "--quantities", "gap", "--out", missing]), 2);
    assert_eq!(code(&["oracle", "--cases", "1"]), 0);
    assert_eq!(code(&["oracle", "--cases", "1", "--inject-flip"]), 3);
    assert_eq!(code(&["sweep", "--config", "/nonexistent-dir/cfg"]), 2);
}

#[test]
fn oracle_reports() {
    let (header, rows) = table(&stdout(&["oracle", "--cases", "0"]));
    assert_eq!(header, ["suite", "case", "seed", "deviation", "tolerance", "status"]);
    assert!(rows.is_empty());
    let out = gaussgeo(&["oracle", "--cases", "2", "--inject-flip", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["passed"], false);
    for c in json["checks"].as_array().unwrap() {
        assert_eq!(c["status"] == "pass", c["suite"] != "boundary_xy_dense", "{c}");
    }
    let a = stdout(&["oracle", "--cases", "3", "--seed", "5", "--jobs", "1"]);
    let b = stdout(&["oracle", "--cases", "3", "--seed", "5", "--jobs", "2"]);
    assert_eq!(a, b);
}

#[test]
fn synthetic_scaling_recovers_the_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let args = ["scaling", "--model", "synthetic", "--set", "a=0.5", "--sizes", "10,20,40,80,160", "--quantities", "gap,R"];
    assert_eq!(code(&[&args[..], &["--out", out.to_str().unwrap()]].concat()), 0);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let fit = &json["fits"]["gap"];
    assert!((fit["exponent"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((fit["prefactor"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(fit["samples"].as_array().unwrap().len(), 5);
    let (header, rows) = table(&std::fs::read_to_string(dir.path().join("fit.csv")).unwrap());
    assert_eq!(header, ["n", "gap", "R"]);
    assert_eq!(rows.len(), 5);
    let windowed: serde_json::Value = serde_json::from_str(&stdout(&[&args[..], &["--fit-window", "20:160"]].concat())).unwrap();
    assert_eq!(windowed["fits"]["gap"]["n_min"], 20);
}

#[test]
fn lrmc_scaling_exponents() {
    let report = stdout(&[
        "scaling", "--model", "boundary-xy", "--set", "delta=1.25", "--set", "h=0.3", "--sizes", "20,40,80,160,320", "--quantities",
        "gap,muc",
    ]);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    let gap = json["fits"]["gap"]["exponent"].as_f64().unwrap();
    let muc = json["fits"]["muc"]["exponent"].as_f64().unwrap();
    assert!((gap + 3.0).abs() <= 0.3, "gap exponent {gap}");
    assert!((muc - 2.0).abs() <= 0.3, "muc exponent {muc}");
}

#[test]
fn gmax_ridge_follows_the_critical_field() {
    for delta in [1.25, 0.6] {
        let hc = (1.0f64 - delta * delta).abs();
        let d = format!("delta={delta}");
        let csv = stdout(&["sweep", "--model", "boundary-xy", "--set", "n=100", "--set", &d, "--grid", "h=0.2:1.0:0.05", "--quantities", "gmax"]);
        let (_, rows) = table(&csv);
        let h = column(&rows, 0);
        let g = column(&rows, 1);
        let peak = (0..g.len()).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
        assert!((h[peak] - hc).abs() <= 0.05, "delta {delta}: peak at h = {}, h_c = {hc}", h[peak]);
        // far above h_c the metric is orders of magnitude smaller than on the ridge
        assert!(g[g.len() - 1] < 1e-3 * g[peak]);
    }
}

#[test]
fn rotated_muc_jumps_at_unit_field() {
    let csv = stdout(&["sweep", "--model", "rotated-xy", "--grid", "h=0.91:1.09:0.02", "--quantities", "muc", "--pair", "h,theta"]);
    assert!(csv.contains("# muc: h,theta quadrature\n"));
    let (_, rows) = table(&csv);
    let h = column(&rows, 0);
    let u = column(&rows, 1);
    let steps: Vec<f64> = u.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let big = (0..steps.len()).max_by(|&a, &b| steps[a].total_cmp(&steps[b])).unwrap();
    assert!(h[big] < 1.0 && h[big + 1] > 1.0, "largest step between {} and {}", h[big], h[big + 1]);
    assert!(steps[big] > 0.01);
    let others = steps.iter().enumerate().filter(|(i, _)| *i != big).map(|(_, s)| *s).fold(0.0, f64::max);
    assert!(steps[big] > 3.0 * others, "{steps:?}");
}

#[test]
fn geometry_and_spectrum_reports() {
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["geometry", "--model", "xy", "--set", "n=40", "--format", "json"])).unwrap();
    let g = json["g"].as_array().unwrap();
    assert_eq!(g.len(), 3);
    for a in 0..3 {
        for b in 0..3 {
            assert_eq!(g[a][b], g[b][a]);
        }
    }
    assert_eq!(json["labels"], serde_json::json!(["theta", "h", "delta"]));
    let (header, rows) = table(&stdout(&["spectrum", "--model", "boundary-xy", "--set", "n=6"]));
    assert_eq!(header, ["re", "im"]);
    assert_eq!(rows.len(), 12);
    assert!(column(&rows, 0).iter().all(|x| *x > 0.0));
    let (_, rows) = table(&stdout(&["spectrum", "--model", "reservoir", "--set", "lambda=0"]));
    assert!((rows[0][0].parse::<f64>().unwrap() - 0.5).abs() < 1e-9);
    let (header, rows) = table(&stdout(&["geometry", "--model", "boundary-xy", "--set", "n=4"]));
    assert_eq!(header, ["quantity", "mu", "nu", "value"]);
    assert_eq!(rows.len(), 10);
    assert_eq!(code(&["geometry", "--model", "dicke"]), 1);
}
