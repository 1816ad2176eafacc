use std::fs;
use std::num::NonZeroUsize;
use std::path::Path;
use std::process::{Command, Output};

use gauss_quad::GaussHermite;

fn nongauss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nongauss"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn sum_reports_uniform_sequence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = nongauss(&["sum", "--dist", "uniform", "--n-max", "64"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("sum_divergence.csv"));
    assert_eq!(header, ["n", "D_nats", "noise_flag"]);
    assert_eq!(rows.last().unwrap()[0], "64");
    let d1: f64 = rows[0][1].parse().unwrap();
    assert!((d1 - 0.176485).abs() < 5e-4);
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("sum_monotonicity.json")).unwrap()).unwrap();
    assert_eq!(json["result"]["monotonicity"]["verdict"], "PASS");
    assert_eq!(json["header"]["seed"], 0);
}

#[test]
fn sum_on_gaussian_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(
        nongauss(&["sum", "--dist", "gaussian", "--n-max", "16"], &out)
            .status
            .success()
    );
    let (_, rows) = read_csv(&out.join("sum_divergence.csv"));
    for r in rows {
        assert!(r[1].parse::<f64>().unwrap().abs() < 1e-7);
        assert_eq!(r[2], "true");
    }
}

#[test]
fn rademacher_channel_matches_quadrature() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "Q = [1.0]\n[distribution]\nfamily = \"rademacher\"\n[snr]\nvalues = [0.0, 0.5, 1.0, 2.0]\n",
    );
    let out = tmp.path().join("out");
    let o = nongauss(&["channel", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("channel_curve.csv"));
    assert_eq!(header, ["q", "mmse_x", "mmse_gaussian", "D"]);
    let row = rows.iter().find(|r| r[0] == "1").unwrap();
    let gh = GaussHermite::new(NonZeroUsize::new(100).unwrap());
    let oracle = 1.0
        - gh.integrate(|x| (1.0 + std::f64::consts::SQRT_2 * x).tanh().powi(2))
            / std::f64::consts::PI.sqrt();
    let got: f64 = row[1].parse().unwrap();
    assert!((got - oracle).abs() < 1e-5, "{got} vs {oracle}");
}

#[test]
fn channel_identities_on_uniform_and_gaussian() {
    let tmp = tempfile::tempdir().unwrap();
    for (dist, bound) in [("uniform", 5e-4), ("gaussian", 1e-8)] {
        let out = tmp.path().join(dist);
        let o = nongauss(
            &["channel", "--dist", dist, "--Q", "4", "--format", "json"],
            &out,
        );
        assert!(o.status.success());
        assert!(!out.join("channel_curve.csv").exists());
        let json: serde_json::Value =
            serde_json::from_slice(&fs::read(out.join("channel_identities.json")).unwrap())
                .unwrap();
        let r = json["result"]["cmmse"][0]["residual"].as_f64().unwrap();
        assert!(r < bound, "{dist}: {r}");
        if dist == "gaussian" {
            assert!(json["result"]["immse"][0]["residual"].as_f64().unwrap() < bound);
        }
    }
}

#[test]
fn theorem1_writes_one_table_per_snr() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = nongauss(
        &[
            "theorem1", "--dist", "uniform", "--Q", "1,4,16", "--n-max", "64",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for q in ["1", "4", "16"] {
        let (header, rows) = read_csv(&out.join(format!("theorem1_Q{q}.csv")));
        assert_eq!(
            header,
            [
                "n",
                "D_sum",
                "D_channel",
                "scaled_lhs",
                "delta",
                "delta_scaled",
                "bound",
                "verdict"
            ]
        );
        assert_eq!(rows.len(), 14);
        for r in rows {
            let lhs: f64 = r[3].parse().unwrap();
            let ch: f64 = r[2].parse().unwrap();
            assert!(lhs - ch >= -1e-7);
            assert!(["PASS", "FAIL", "DEGENERATE"].contains(&r[7].as_str()));
        }
    }
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("theorem1_report.json")).unwrap()).unwrap();
    let reports = json["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r["verdicts"]["dpi"] == "PASS"));
}

#[test]
fn capacity_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("u");
    assert!(
        nongauss(&["capacity", "--dist", "uniform", "--n-max", "2"], &out)
            .status
            .success()
    );
    let (header, rows) = read_csv(&out.join("capacity.csv"));
    assert_eq!(header, ["n", "excess_nats"]);
    let v: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((v[0] - 0.176485).abs() < 5e-4 && (v[1] - 0.023064).abs() < 5e-4);
    let out = tmp.path().join("e");
    assert!(nongauss(
        &["capacity", "--dist", "exponential-centered", "--n-max", "1"],
        &out
    )
    .status
    .success());
    let (_, rows) = read_csv(&out.join("capacity.csv"));
    assert!((rows[0][1].parse::<f64>().unwrap() - 0.418939).abs() < 5e-4);
}

#[test]
fn config_errors_exit_two_without_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        "[grid]\nhalf_width = -4.0\n",
        "n_max = 8\nunknown = 1\n",
        "[distribution]\nfamily = \"uniform\"\nrate = 2.0\n",
        "[distribution]\nfamily = \"cauchy\"\n",
        "Q = [0.0]\n",
        "n_max = 100000\n",
        "not toml at all [",
    ];
    for (i, text) in cases.iter().enumerate() {
        let dir = tmp.path().join(format!("case{i}"));
        fs::create_dir_all(&dir).unwrap();
        let cfg = write_config(&dir, text);
        let out = dir.join("out");
        let o = nongauss(&["sum", "--config", &cfg], &out);
        assert_eq!(
            o.status.code(),
            Some(2),
            "case {i}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!out.exists(), "case {i} wrote files");
    }
    let out = tmp.path().join("flags");
    assert_eq!(
        nongauss(&["sum", "--grid-l", "-1"], &out).status.code(),
        Some(2)
    );
    assert_eq!(
        nongauss(&["sum", "--grid-n", "1000"], &out).status.code(),
        Some(2)
    );
    assert_eq!(
        nongauss(&["sum", "--dist", "rademacher"], &out)
            .status
            .code(),
        Some(2)
    );
    assert!(!out.exists());
}

#[test]
fn numerical_degradation_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // a window far too narrow for the channel output
    let o = nongauss(
        &[
            "channel", "--dist", "uniform", "--grid-l", "1.5", "--grid-n", "256",
        ],
        &out,
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!out.exists());
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_nongauss"))
        .args(["sum", "--n-max", "4", "--out"])
        .arg(&out)
        .env("NONGAUSS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "Q = [1.0, 4.0]\nn_max = 32\nseed = 42\n[distribution]\nfamily = \"laplace\"\n\
         [monte_carlo]\nsamples = 20000\nbins = 256\n[snr]\nmin = 0.01\nmax = 10.0\npoints = 8\n",
    );
    for cmd in ["sum", "channel", "theorem1", "capacity"] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        assert!(nongauss(&[cmd, "--config", &cfg], &a).status.success());
        let o = Command::new(env!("CARGO_BIN_EXE_nongauss"))
            .args([cmd, "--config", &cfg, "--out"])
            .arg(&b)
            .env("NONGAUSS_THREADS", "1")
            .output()
            .unwrap();
        assert!(o.status.success());
        let (la, lb) = (listing(&a), listing(&b));
        assert_eq!(
            la.iter().map(|f| &f.0).collect::<Vec<_>>(),
            lb.iter().map(|f| &f.0).collect::<Vec<_>>()
        );
        for ((name, x), (_, y)) in la.iter().zip(&lb) {
            // only the output directory recorded in the header may differ
            let x = String::from_utf8(x.clone())
                .unwrap()
                .replace(&format!("{cmd}-a"), "");
            let y = String::from_utf8(y.clone())
                .unwrap()
                .replace(&format!("{cmd}-b"), "");
            assert_eq!(x, y, "{cmd}: {name} differs");
        }
    }
}

#[test]
fn seed_changes_only_the_sampled_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "Q = [1.0]\n[monte_carlo]\nsamples = 20000\n[snr]\nvalues = [1.0]\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(nongauss(&["channel", "--config", &cfg, "--seed", "1"], &a)
        .status
        .success());
    assert!(nongauss(&["channel", "--config", &cfg, "--seed", "2"], &b)
        .status
        .success());
    assert_eq!(
        fs::read(a.join("channel_curve.csv")).unwrap(),
        fs::read(b.join("channel_curve.csv")).unwrap()
    );
    let ja: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("channel_identities.json")).unwrap()).unwrap();
    let jb: serde_json::Value =
        serde_json::from_slice(&fs::read(b.join("channel_identities.json")).unwrap()).unwrap();
    assert_eq!(ja["header"]["seed"], 1);
    assert_ne!(
        ja["result"]["monte_carlo"][0]["estimate"],
        jb["result"]["monte_carlo"][0]["estimate"]
    );
    assert_eq!(ja["result"]["immse"], jb["result"]["immse"]);
}
