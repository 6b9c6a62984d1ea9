use std::path::Path;
use std::process::{Command, Output};

fn bagcheck(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bagcheck"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("BAGCHECK_THREADS", t),
        None => cmd.env_remove("BAGCHECK_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn unknown_distribution_is_a_usage_error() {
    let out = bagcheck(&["formulas", "--dist", "cauchy:1", "--n", "10"], None);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("cauchy:1") && stderr.contains("Usage:"),
        "{stderr}"
    );

    let out = bagcheck(&["mse-gap", "--dist", "gaussian:-1"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = bagcheck(&["no-such-experiment"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let out = bagcheck(&["formulas", "--dist", "gaussian:1", "--n", "1"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = bagcheck(
        &["oracle", "--data", "0,1,2,3,4,5,6,7,8,9", "--m", "10"],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("states"));
    let out = bagcheck(
        &[
            "formulas",
            "--dist",
            "gaussian:1",
            "--n",
            "10",
            "--out",
            "/nonexistent/dir/x.csv",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/x.csv"));
}

#[test]
fn formulas_gaussian_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let out = bagcheck(
        &[
            "formulas",
            "--dist",
            "gaussian:1",
            "--n",
            "10",
            "--m",
            "10",
            "--N",
            "20",
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&path);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mse: f64 = rows[0][col("MSE_standard")].parse().unwrap();
    approx::assert_relative_eq!(mse, 2.0 / 9.0, max_relative = 1e-15);
    // (mu4 - mu2^2)/(2 mu4 - 3 mu2^2) * n^2/m = 20/3
    assert_eq!(rows[0][col("min_N")], "7");
    let e: f64 = rows[0][col("E")].parse().unwrap();
    approx::assert_relative_eq!(e, 0.9, max_relative = 1e-15);
}

#[test]
fn oracle_two_points() {
    let out = bagcheck(&["oracle", "--data", "0,1", "--m", "2"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("quantity,enumerated,closed_form,exact_match")
    );
    let eu: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(eu[0], "eu_mean");
    assert_eq!(eu[1].parse::<f64>().unwrap(), 0.25);
    assert_eq!(eu[3], "true");

    let out = bagcheck(
        &["oracle", "--data", "-1.5,0,2", "--m", "3", "--N", "2"],
        None,
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
}

#[test]
fn estimate_subcommand() {
    let out = bagcheck(&["estimate", "--data", "-1,1,-1,1"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 4.0 / 3.0);
    assert_eq!(row[3], "false");
}

#[test]
fn headers_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (
            &["mse-gap", "--n-grid", "10:20:10", "--trials", "50"],
            "distribution,n,mc_gap,exact_gap,asymptotic_gap,mc_stderr",
        ),
        (
            &["kurtosis-sweep", "--p-grid", "0.4:0.6:0.1", "--trials", "50"],
            "p,kurtosis,mse_bagged_mc,mse_plain_mc,mse_bagged_exact,mse_plain_exact,mse_bagged_stderr,mse_plain_stderr,gap_stderr",
        ),
        (
            &["regression", "--trials", "2", "--datasets", "1", "--N", "1,2"],
            "N,mean_mse,fitted_a,fitted_b,base_model,noise_sigma,mse_stderr,fit_r2",
        ),
    ];
    for (i, (args, header)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("{i}.csv"));
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", path.to_str().unwrap()]);
        let out = bagcheck(&full, None);
        assert!(
            out.status.success(),
            "{:?}: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next(), Some(*header));
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let runs: [&[&str]; 3] = [
        &[
            "mse-gap",
            "--dist",
            "uniform:-1:1",
            "--n-grid",
            "10:30:10",
            "--N",
            "7",
            "--trials",
            "300",
            "--seed",
            "5",
        ],
        &[
            "kurtosis-sweep",
            "--p-grid",
            "0.1:0.9:0.2",
            "--trials",
            "300",
            "--seed",
            "5",
        ],
        &[
            "regression",
            "--trials",
            "3",
            "--datasets",
            "2",
            "--N",
            "1,4",
            "--seed",
            "5",
        ],
    ];
    for args in runs {
        let one = bagcheck(args, Some("1"));
        let four = bagcheck(args, Some("4"));
        let again = bagcheck(args, None);
        assert!(one.status.success());
        assert!(!one.stdout.is_empty());
        assert_eq!(one.stdout, four.stdout, "{args:?}");
        assert_eq!(one.stdout, again.stdout, "{args:?}");
    }
}

#[test]
fn seeds_change_monte_carlo_output() {
    let a = bagcheck(
        &[
            "mse-gap", "--n-grid", "10", "--trials", "100", "--seed", "1",
        ],
        None,
    );
    let b = bagcheck(
        &[
            "mse-gap", "--n-grid", "10", "--trials", "100", "--seed", "2",
        ],
        None,
    );
    assert_ne!(a.stdout, b.stdout);
}
