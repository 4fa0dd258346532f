//! End-to-end runs of the `fractalfn` binary against golden outputs.
//!
//! Set `BLESS=1` to rewrite the golden files after an intended change.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(mode: &str, config: &str, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_fractalfn"))
        .arg(mode)
        .arg("--config")
        .arg(data(config))
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn golden(out: &Path, files: &[&str], prefix: &str) {
    let bless = std::env::var_os("BLESS").is_some();
    for f in files {
        let got = fs::read_to_string(out.join(f)).unwrap();
        let path = data(&format!("golden/{prefix}.{f}"));
        if bless {
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(&path, &got).unwrap();
            continue;
        }
        let want = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
        assert!(got == want, "{f} differs from {}", path.display());
    }
}

#[test]
fn example1_attract_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run("attract", "example1_attract.cfg", dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("converged = true"));
    golden(
        dir.path(),
        &["attractor.pgm", "attractor.csv", "trace.csv", "report.txt"],
        "example1",
    );
    // the first map keeps halving (0.4, 0.3): twelve cells, all on y = 0.75x
    let csv = fs::read_to_string(dir.path().join("attractor.csv")).unwrap();
    let pts: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(pts.len(), 12);
    assert!(pts.iter().all(|(x, y)| (y - 0.75 * x).abs() < 2.0 / 512.0));
}

#[test]
fn global_attract_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run("global-attract", "global_attract.cfg", dir.path(), &[]);
    assert_eq!(code, 0);
    golden(dir.path(), &["attractor.pgm", "trace.csv", "report.txt"], "global");
}

#[test]
fn interp_golden_and_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run("interp", "fif_interp.cfg", dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\npass = true\n"));
    golden(dir.path(), &["fixed_point.csv", "residuals.csv", "report.txt"], "fif");
}

#[test]
fn solve_residuals_decay_geometrically() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run("solve", "bspline_solve.cfg", dir.path(), &[]);
    assert_eq!(code, 0, "{stderr}");
    golden(dir.path(), &["fixed_point.csv", "report.txt"], "bspline");
    let res: Vec<f64> = fs::read_to_string(dir.path().join("residuals.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect();
    for w in res.windows(2).skip(1).filter(|w| w[0] > 1e-12) {
        assert!(w[1] <= 0.7 * w[0] + 1e-15, "{w:?}");
    }
}

#[test]
fn tensor_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run("tensor", "tensor.cfg", dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("surface = 65 x 65"));
    golden(dir.path(), &["surface.pgm", "surface_pgm.txt", "report.txt"], "tensor");
}

#[test]
fn failing_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run("check", "failing_check.cfg", dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stdout.contains("all_pass = false"));
    let lhs: Vec<f64> = stdout
        .lines()
        .filter_map(|l| l.strip_prefix("lhs = "))
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(lhs.iter().any(|&v| v >= 1.0));
}

#[test]
fn errors_exit_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run("solve", "example1_attract.cfg", dir.path(), &[]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 2"), "{stderr}");
    // contractive mode refuses sup|S| ≥ 1 and names the piece
    let cfg = dir.path().join("big.cfg");
    fs::write(
        &cfg,
        "n = 2\n[piece 1]\nlambda = 0\nS = 0.5\n[piece 2]\nlambda = 0\nS = bspline(4, 1.2)\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fractalfn"))
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("line 7") && stderr.contains("piece 2"), "{stderr}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let (code, _, _) = run("solve", "bspline_solve.cfg", dir.path(), &["--seed", "7"]);
        assert_eq!(code, 0);
    }
    for f in ["fixed_point.csv", "residuals.csv", "report.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn overrides_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(
        "interp",
        "fif_interp.cfg",
        dir.path(),
        &["--grid", "32", "--tol", "1e-12"],
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("grid = 32\n"));
    assert!(stdout.contains("tol = 0.000000000001\n"));
    let rows = fs::read_to_string(dir.path().join("fixed_point.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 34);
}
