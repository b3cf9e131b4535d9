use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sel_cli::write_pnm;
use sel_core::RasterImage;

fn sel(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sel"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sel(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(
        sel(&["simulate", "--help"], dir.path()).status.code(),
        Some(0)
    );

    let bad = sel(&["simulate", "--no-such-flag"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(stderr(&bad).trim_end().lines().count(), 1);

    assert_eq!(sel(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(sel(&[], dir.path()).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_a_single_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = sel(
        &[
            "train",
            "--model",
            "tree",
            "--input",
            "absent.csv",
            "--output",
            "m.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert_eq!(msg.trim_end().lines().count(), 1, "{msg}");
    assert!(msg.contains("absent.csv"));
}

#[test]
fn single_rep_simulation_has_a_flat_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = sel(
        &[
            "simulate",
            "--reps",
            "1",
            "--p-values",
            "2",
            "--seed",
            "7",
            "--out-dir",
            "out",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("out/relative_rmse.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some("n_cols,model,mean_ratio,p5,p95"));
    assert!(report.lines().any(|l| l == "2,Baseline,100,100,100"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[2], cells[3]);
        assert_eq!(cells[3], cells[4]);
    }
    let wide = fs::read_to_string(dir.path().join("out/relative_rmse_wide.csv")).unwrap();
    assert!(wide.starts_with("n_cols,sel_mean,sel_p5,sel_p95,moments_mean"));
}

#[test]
fn config_file_values_yield_to_explicit_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "# small run\nn = 120\nm = 30\nreps = 1\np-values = 2\nn-trees = 5\nout-dir = a\n",
    )
    .unwrap();
    let out = sel(
        &["simulate", "--config", "run.cfg", "--out-dir", "b"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("b/relative_rmse.csv").is_file());
    assert!(!dir.path().join("a").exists());
}

const MATCHES: &str = "date,home_team,away_team,home_goals,away_goals
2023-01-01,A,B,30,25
2023-01-08,B,C,27,28
2023-01-15,C,A,24,28
2023-01-22,A,C,32,20
2023-01-29,B,A,26,26
2023-02-05,C,B,22,30
";

#[test]
fn strength_by_mean_goals_and_by_likelihood() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), MATCHES).unwrap();

    let out = sel(
        &["strength", "--matches", "m.csv", "--method", "mean"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "team,strength\nA,29\nB,27\nC,23.5\n");

    let out = sel(
        &[
            "strength",
            "--matches",
            "m.csv",
            "--output",
            "s.csv",
            "--half-life",
            "100",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let rows: Vec<(&str, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k, v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows[0].0, "(intercept)");
    assert_eq!(rows[1].0, "(home)");
    let total: f64 = rows[2..].iter().map(|r| r.1).sum();
    assert!(total.abs() < 1e-10);
    assert!(rows[2].1 > rows[4].1, "A should outrank C: {text}");
}

fn write_training_data(path: &Path) {
    let mut text = String::from("a,b,y\n");
    for i in 0..60 {
        let a = i as f64 / 10.0 - 3.0;
        let b = ((i * 37) % 11) as f64;
        text += &format!("{a},{b},{}\n", 2.0 * a + 0.01 * b);
    }
    fs::write(path, text).unwrap();
}

#[test]
fn train_predict_explain_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_training_data(&dir.path().join("train.csv"));
    for model in ["lasso", "tree", "forest", "gbt"] {
        let json = format!("{model}.json");
        let out = sel(
            &[
                "train",
                "--model",
                model,
                "--input",
                "train.csv",
                "--target",
                "y",
                "--output",
                &json,
                "--n-trees",
                "20",
                "--lambda",
                "0.01",
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{model}: {}", stderr(&out));
        let saved = fs::read_to_string(dir.path().join(&json)).unwrap();
        assert!(saved.contains(&format!("\"type\": \"{model}\"")));

        let pred = format!("{model}_pred.csv");
        let out = sel(
            &[
                "predict",
                "--model",
                &json,
                "--input",
                "train.csv",
                "--output",
                &pred,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{model}: {}", stderr(&out));
        let text = fs::read_to_string(dir.path().join(&pred)).unwrap();
        assert_eq!(text.lines().next(), Some("prediction"));
        assert_eq!(text.lines().count(), 61);

        let imp = format!("{model}_imp.csv");
        let out = sel(
            &[
                "explain",
                "--method",
                "permutation",
                "--model",
                &json,
                "--input",
                "train.csv",
                "--output",
                &imp,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{model}: {}", stderr(&out));
        let text = fs::read_to_string(dir.path().join(&imp)).unwrap();
        assert_eq!(text.lines().next(), Some("feature,importance"));
        assert!(
            text.lines().nth(1).unwrap().starts_with("a,"),
            "{model}: {text}"
        );

        let pdp = format!("{model}_pdp.csv");
        let out = sel(
            &[
                "explain",
                "--method",
                "pdp",
                "--model",
                &json,
                "--input",
                "train.csv",
                "--feature",
                "a",
                "--grid-size",
                "10",
                "--output",
                &pdp,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{model}: {}", stderr(&out));
        let text = fs::read_to_string(dir.path().join(&pdp)).unwrap();
        assert_eq!(text.lines().next(), Some("grid,value"));
        assert_eq!(text.lines().count(), 11);
    }

    let out = sel(
        &[
            "explain",
            "--method",
            "pdp",
            "--model",
            "gbt.json",
            "--input",
            "train.csv",
            "--output",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prediction_reports_missing_features() {
    let dir = tempfile::tempdir().unwrap();
    write_training_data(&dir.path().join("train.csv"));
    fs::write(dir.path().join("partial.csv"), "a\n1\n2\n").unwrap();
    assert!(sel(
        &[
            "train",
            "--model",
            "tree",
            "--input",
            "train.csv",
            "--output",
            "t.json"
        ],
        dir.path()
    )
    .status
    .success());
    let out = sel(
        &[
            "predict",
            "--model",
            "t.json",
            "--input",
            "partial.csv",
            "--output",
            "p.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains('b'));
}

#[test]
fn extractors_write_descriptive_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("proc.csv"), "1,2,3,4\n10,20,30,40\n5,5,5,6\n").unwrap();
    fs::write(d.join("base.csv"), "x,y\n0,1\n1,2\n2,3\n").unwrap();

    let out = sel(
        &[
            "extract",
            "moments",
            "--processes",
            "proc.csv",
            "--output",
            "m.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(d.join("m.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("z_mean,z_variance,z_skewness,z_kurtosis")
    );
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    for (got, want) in first.iter().zip([2.5, 5.0 / 3.0, 0.0, -1.36]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    let out = sel(
        &[
            "extract",
            "quantiles",
            "--processes",
            "proc.csv",
            "--probs",
            "0.5",
            "--input",
            "base.csv",
            "--target",
            "y",
            "--prefix",
            "p",
            "--output",
            "q.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(d.join("q.csv")).unwrap(),
        "x,y,p_q50\n0,1,2.5\n1,2,25\n2,3,5\n"
    );

    let out = sel(
        &[
            "extract",
            "ewma",
            "--processes",
            "proc.csv",
            "--window",
            "1",
            "--output",
            "e.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(d.join("e.csv")).unwrap(),
        "z_ewma1\n4\n40\n6\n"
    );

    fs::write(d.join("docs.txt"), "the cat\nthe dog dog\n").unwrap();
    let out = sel(
        &[
            "extract", "tfidf", "--docs", "docs.txt", "--output", "t.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(d.join("t.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("z_cat,z_dog,z_the"));
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((first[0] - (1.5f64.ln() + 1.0)).abs() < 1e-12);
    assert_eq!(&first[1..], &[0.0, 1.0]);

    let img = RasterImage::rgb(3, 1, vec![255, 0, 10, 0, 255, 20, 7, 7, 7]).unwrap();
    write_pnm(&img, d.join("a.ppm")).unwrap();
    write_pnm(&img, d.join("b.ppm")).unwrap();
    let out = sel(
        &[
            "extract",
            "image-moments",
            "--images",
            "a.ppm,b.ppm",
            "--output",
            "i.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(d.join("i.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("z_red_mean,z_red_variance"));
    assert_eq!(text.lines().count(), 3);

    let flat = RasterImage::gray(2, 2, vec![0; 4]).unwrap();
    write_pnm(&flat, d.join("flat.pgm")).unwrap();
    let out = sel(
        &[
            "extract",
            "image-moments",
            "--images",
            "flat.pgm",
            "--output",
            "f.csv",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(1));

    fs::write(d.join("bad.pgm"), "P2\n1 1\n65535\n0\n").unwrap();
    let out = sel(
        &[
            "extract",
            "image-moments",
            "--images",
            "bad.pgm",
            "--output",
            "j.csv",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(1));
}
