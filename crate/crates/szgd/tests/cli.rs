//! End-to-end tests of the `szgd` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn szgd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szgd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn unknown_subcommand_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = szgd(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = szgd(&["rates", "--no-such-flag"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let tmp = tempfile::tempdir().unwrap();
    let out = szgd(&["--help"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("reproduce"));
}

#[test]
fn rates_recovers_inverse_square_series() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("0.0\n");
    for t in 1..=200 {
        text.push_str(&format!("{:e}\n", (t as f64).powi(-2)));
    }
    fs::write(tmp.path().join("series.txt"), text).unwrap();

    let out = szgd(&["rates", "--input", "series.txt"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("exponent = -2.000000"), "{text}");
    assert!(text.contains("r_squared = 1.000000"), "{text}");
}

#[test]
fn rates_reads_run_csv_column() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("exp.cfg"),
        "objective = power_quadratic\nn = 1\np = 1.0\nq_scale = 0.5\nalgo = gd\n\
         eta = 0.5\nT = 40\nruns = 1\nseed = 0\nx0 = 1.0\n",
    )
    .unwrap();
    let out = szgd(
        &["optimize", "--config", "exp.cfg", "--out", "exp_out"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // GD on x^2/2 with eta = 0.5: f_t = 0.5 * 0.25^t, slope ln(0.25).
    let out = szgd(
        &[
            "rates",
            "--input",
            "exp_out/run_1.csv",
            "--column",
            "f_value",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("slope = -1.386294"), "{text}");
}

#[test]
fn optimize_is_reproducible_and_seed_overridable() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("exp.cfg"),
        "objective = power_quadratic\nn = 5\np = 0.75\neigen_mean = 5.0\nalgo = szgd\n\
         k = 2\neta = 0.01\nT = 30\nruns = 2\nseed = 9\nx0_radius = 3\n",
    )
    .unwrap();

    for dir in ["a", "b"] {
        let out = szgd(&["optimize", "--config", "exp.cfg", "--out", dir], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["run_1.csv", "run_2.csv", "agg.csv", "q_matrix.txt", "manifest.txt"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across identical invocations");
    }

    let out = szgd(
        &["optimize", "--config", "exp.cfg", "--seed", "10", "--out", "c"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let a = fs::read(tmp.path().join("a/run_1.csv")).unwrap();
    let c = fs::read(tmp.path().join("c/run_1.csv")).unwrap();
    assert_ne!(a, c, "--seed override should change the trajectories");
}

#[test]
fn reproduce_emits_figures_and_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = szgd(
        &[
            "reproduce", "--figure", "f1", "--seed", "5", "--runs", "2", "--iters", "60",
            "--out", "rep",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    for fig in ["f1_distance.svg", "f1_fvalue.svg"] {
        let svg = fs::read_to_string(tmp.path().join("rep").join(fig)).unwrap();
        assert!(svg.starts_with("<svg"), "{fig} is not an SVG");
        for label in ["k = 1", "k = 10", "k = 20", "k = 30", "GD"] {
            assert!(svg.contains(label), "{fig} missing series {label}");
        }
    }
    for sub in ["f1_szgd_k1", "f1_gd"] {
        assert!(tmp.path().join("rep").join(sub).join("run_1.csv").exists());
        assert!(tmp.path().join("rep").join(sub).join("manifest.txt").exists());
    }
    assert!(stdout(&out).contains("f1_distance.svg"));
}

#[test]
fn sample_and_estimator_stats_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let out = szgd(
        &["sample-stats", "--n", "4", "--k", "2", "--samples", "20000", "--seed", "1"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));

    let out = szgd(
        &[
            "estimator-stats", "--n", "6", "--k", "2", "--delta", "0.05", "--trials", "4000",
            "--seed", "2",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("empirical_variance"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn optimize_reports_missing_config_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = szgd(&["optimize", "--config", "nope.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
