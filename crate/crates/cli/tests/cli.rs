use std::path::Path;
use std::process::{Command, Output};

fn gausscard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gausscard")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = gausscard(&["verify", "--seed", "7", "--format", "json", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn multiplier_emits_xi_value_rows() {
    let out = gausscard(&["multiplier", "--h", "1", "--xi", "-1,0,2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "xi,value");
    assert_eq!(lines.len(), 4);
    let m0: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((m0 - 0.99989).abs() < 1e-4);
}

#[test]
fn lagrange_writes_two_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chi.csv");
    let out = gausscard(&["lagrange", "--h", "1", "--n", "8", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(path).unwrap();
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("j,b_j\n"));
    assert!(blocks[1].starts_with("x,chi\n"));
}

fn write_data(dir: &Path) -> String {
    let path = dir.join("data.csv");
    std::fs::write(&path, "j,value\n-1,0.5\n0,1\n1,0.5\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn interp_routes_agree_on_shared_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let parse = |route: &str| -> Vec<(f64, f64)> {
        let out = gausscard(&["interp", "--h", "0.5", "--data", &data, "--fine", "4", "--route", route]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        stdout(&out)
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect()
    };
    let point = parse("point");
    let spectral = parse("spectral");
    let mut shared = 0;
    for (x, v) in &point {
        if let Some((_, w)) = spectral.iter().find(|(y, _)| (y - x).abs() < 1e-12) {
            assert!((v - w).abs() < 1e-8, "x = {x}: {v} vs {w}");
            shared += 1;
        }
    }
    assert!(shared >= 5);
    let at_zero = point.iter().find(|(x, _)| *x == 0.0).unwrap().1;
    assert!((at_zero - 1.0).abs() < 1e-10);
}

#[test]
fn analyze_reports_ordered_bounds() {
    let out = gausscard(&["analyze", "--h-list", "0.5", "--p", "inf", "--budget", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("h,p,lower,upper\n"));
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(row[2] <= row[3] * (1.0 + 1e-9));
}

#[test]
fn hypothesis_violation_exits_with_2() {
    let out = gausscard(&["sweep", "--p", "2", "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k > n/p"));
}

#[test]
fn io_failures_exit_with_4() {
    let out = gausscard(&["interp", "--h", "1", "--data", "/definitely/missing.csv"]);
    assert_eq!(out.status.code(), Some(4));
    let out = gausscard(&["verify", "--out", "/definitely/missing/dir/report.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# stability run\ntrials = 2\nh_list = 0.5,0.25\nstability_points = 31\nseed = 3\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["stability", "--config", cfg.to_str().unwrap(), "--format", "json"];
        args.extend_from_slice(extra);
        let out = gausscard(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        stdout(&out)
    };
    let from_file = run(&[]);
    assert!(from_file.contains("\"trials\": \"2\""));
    assert!(from_file.contains("\"seed\": 3"));
    let overridden = run(&["--trials", "3", "--seed", "5"]);
    assert!(overridden.contains("\"trials\": \"3\""));
    assert!(overridden.contains("\"seed\": 5"));
}

#[test]
fn sweep_csv_has_one_row_per_metric() {
    let out = gausscard(&["sweep", "--h-list", "2^-1..2^-4", "--box-radius", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("h,metric,value\n"));
    assert!(text.contains(",fitted_order,"));
}
