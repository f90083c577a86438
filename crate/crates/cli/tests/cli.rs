use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pawn-meta"))
        .args(args)
        .env_remove("PAWN_META_OUT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Data rows of a CSV: the config comment and the header are skipped.
fn records(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config "));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().nth(1).unwrap().to_string()
}

#[test]
fn pawn_indices_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "compute-indices", "--function", "ishigami", "--method", "pawn", "--N", "4000", "--n", "10", "--theta", "2",
        "--seed", "1", "--out", out,
    ]);
    let path = dir.path().join("indices.csv");
    assert_eq!(header(&path), "method,input_label,value,raw_value");
    let rows = records(&path);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[0], "pawn");
        let v: f64 = r[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert!(!fs::read_to_string(&path).unwrap().contains('\r'));
}

#[test]
fn liu_total_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["compute-indices", "--function", "liu", "--method", "sobol_total", "--N", "4000", "--theta", "1", "--out", out]);
    let rows = records(&dir.path().join("indices.csv"));
    assert_eq!(rows.len(), 2);
    for r in rows {
        let v: f64 = r[2].parse().unwrap();
        assert!((v - 0.546).abs() <= 0.06, "{v}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cases: [&[&str]; 6] = [
        &["compute-indices", "--function", "rosenbrock", "--N", "100", "--out", out],
        &["compute-indices", "--function", "liu", "--out", out],
        &["compute-indices", "--function", "liu", "--N", "1000", "--theta", "7", "--out", out],
        &["run-meta", "--setting", "max_in_theta", "--function", "liu", "--rows", "4", "--out", out],
        &["convergence-scan", "--function", "liu", "--sizes", "500", "--reps", "0", "--out", out],
        &["compute-indices", "--bogus"],
    ];
    for args in cases {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = run(&["compute-indices", "--function", "liu", "--method", "pawn", "--N", "15", "--n", "10", "--out", out]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn convergence_groups() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["convergence-scan", "--function", "ishigami", "--method", "pawn", "--sizes", "1000", "--reps", "3", "--out", out]);
    let path = dir.path().join("convergence.csv");
    assert_eq!(header(&path), "N,method,input_label,mean,sd");
    let rows = records(&path);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "1000"));
}

#[test]
fn convergence_spread_shrinks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "convergence-scan", "--function", "ishigami", "--method", "pawn", "--theta", "1", "--sizes",
        "500,1000,2000,4000", "--reps", "20", "--seed", "3", "--out", out,
    ]);
    let rows = records(&dir.path().join("convergence.csv"));
    assert_eq!(rows.len(), 12);
    let sd = |n: &str| -> f64 {
        rows.iter().filter(|r| r[0] == n).map(|r| r[4].parse::<f64>().unwrap()).sum::<f64>() / 3.0
    };
    assert!(sd("500") > sd("1000") && sd("1000") > sd("2000") && sd("2000") > sd("4000"));
    for input in ["X1", "X2", "X3"] {
        let get = |n: &str| -> f64 {
            rows.iter().find(|r| r[0] == n && r[2] == input).unwrap()[4].parse().unwrap()
        };
        assert!(get("4000") < get("500"), "{input}");
    }
}

fn meta_args<'a>(out: &'a str, parallelism: &'a str) -> Vec<&'a str> {
    vec![
        "run-meta", "--setting", "max_not_in_theta", "--function", "sobol_g", "--rows", "32", "--seed", "42",
        "--parallelism", parallelism, "--out", out,
    ]
}

const META_FILES: [&str; 4] = ["meta_result.csv", "meta_sensitivity.csv", "overlap.csv", "summary.md"];

#[test]
fn meta_outputs_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&meta_args(a.path().to_str().unwrap(), "1"));
    ok(&meta_args(b.path().to_str().unwrap(), "4"));
    for f in META_FILES {
        let x = fs::read(a.path().join(f)).unwrap();
        assert!(!x.is_empty(), "{f}");
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f}");
    }

    let result = a.path().join("meta_result.csv");
    assert_eq!(
        header(&result),
        "setting,function,row_id,N,n,eps,theta,input_label,index_value,raw_value"
    );
    // 32 rows each of A, B and four mixes, eight inputs per row.
    assert_eq!(records(&result).len(), 32 * 6 * 8);

    let sens = a.path().join("meta_sensitivity.csv");
    assert_eq!(header(&sens), "setting,scope,function,input_label,index,parameters,stat,value");
    let rows = records(&sens);
    assert!(rows.iter().any(|r| r[1] == "input" && r[4] == "first" && r[5] == "N"));
    assert!(rows.iter().any(|r| r[1] == "pooled_equal" && r[6] == "median"));
    assert!(rows.iter().any(|r| r[1] == "pooled_by_function" && r[4] == "total"));

    let overlap = a.path().join("overlap.csv");
    assert_eq!(header(&overlap), "label,X1,X2,X3,X4,X5,X6,X7,X8");
    assert_eq!(records(&overlap).len(), 8);
}

#[test]
fn total_order_star_leaves_n_and_eps_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["run-meta", "--setting", "total_order_star", "--function", "liu", "--rows", "16", "--out", out]);
    let rows = records(&dir.path().join("meta_result.csv"));
    assert!(rows.iter().all(|r| r[4].is_empty() && r[5].is_empty()));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_file = dir.path().join("from_file");
    let out_flag = dir.path().join("from_flag");
    fs::write(
        &cfg,
        format!(
            "# PAWN on Ishigami\nfunction = ishigami\nmethod = pawn\nN = 2000\nn = 10\ntheta = 1\nseed = 5\nout = {}\n",
            out_file.display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    ok(&["--config", cfg, "compute-indices"]);
    ok(&["compute-indices", "--config", cfg, "--seed", "6", "--out", out_flag.to_str().unwrap()]);
    let a = fs::read_to_string(out_file.join("indices.csv")).unwrap();
    let b = fs::read_to_string(out_flag.join("indices.csv")).unwrap();
    assert!(a.starts_with("# config command=compute-indices function=ishigami method=pawn N=2000 n=10 theta=1 seed=5\n"));
    assert!(b.contains("seed=6"));
    assert_ne!(a, b);

    fs::write(dir.path().join("bad.cfg"), "colour = blue\n").unwrap();
    let r = run(&["--config", dir.path().join("bad.cfg").to_str().unwrap(), "compute-indices"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn optimum_liu_overlap_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["run-meta", "--setting", "optimum", "--function", "liu", "--rows", "1024", "--orders", "0", "--seed", "42", "--out", out]);
    let rows = records(&dir.path().join("overlap.csv"));
    let v: f64 = rows[0][2].parse().unwrap();
    assert!(v < 0.02, "{v}");
    assert!(fs::read_to_string(dir.path().join("summary.md")).unwrap().contains('%'));
}

#[test]
fn several_functions_in_one_overlap_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["overlap", "--setting", "max_in_theta", "--function", "liu,ishigami", "--rows", "16", "--out", out]);
    let path = dir.path().join("overlap.csv");
    assert_eq!(header(&path), "label,liu:X1,liu:X2,ishigami:X1,ishigami:X2,ishigami:X3");
    let rows = records(&path);
    assert_eq!(rows[0][3], "");
    assert!(!dir.path().join("meta_result.csv").exists());
}
