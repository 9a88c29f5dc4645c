use std::fs;
use std::process::{Command, Output};

fn sbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbm")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

const MODEL: [&str; 10] = ["--n", "100", "--m", "2", "--p", "0.5,0.3", "--q", "0.1", "--seed", "7"];

#[test]
fn generate_then_hitting_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let el = dir.path().join("g.el");
    let el_s = el.to_str().unwrap();
    let mut args = vec!["generate"];
    args.extend(MODEL);
    args.extend(["--out", el_s]);
    let o = sbm(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&el).unwrap();
    assert!(text.starts_with("100 2\n"));

    let h = dir.path().join("h.csv");
    let o = sbm(&["hitting", "--in", el_s, "--target", "5", "--walks", "2000", "--out", h.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&h).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "w,block,d_w,H_w_exact,H_w_spectral,H_w_mc,mc_stderr");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[0], "5");
    assert_eq!(row.len(), 7);
    let exact: f64 = row[3].parse().unwrap();
    let spectral: f64 = row[4].parse().unwrap();
    assert!((exact - spectral).abs() / exact < 1e-6);
    assert!(lines.iter().any(|l| l.starts_with("# H_start=")));

    // Loading the file and sampling in memory give the same numbers.
    let from_file = sbm(&["hitting", "--in", el_s, "--walks", "0"]);
    let mut args = vec!["hitting", "--walks", "0"];
    args.extend(MODEL);
    let in_memory = sbm(&args);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, in_memory.stdout);
}

#[test]
fn spectrum_writes_eigenvalues_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let mut args = vec!["spectrum"];
    args.extend(MODEL);
    args.extend(["--out", out.to_str().unwrap()]);
    let o = sbm(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let spec = fs::read_to_string(&out).unwrap();
    assert_eq!(spec.lines().count(), 101);
    let first: f64 = spec.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 1.0).abs() < 1e-9);
    let bounds = fs::read_to_string(dir.path().join("spec_bounds.csv")).unwrap();
    assert!(bounds.starts_with("bound,empirical,envelope,satisfied\n"));
    assert!(bounds.contains("x_spectral_norm"));
}

#[test]
fn check_conditions_csv() {
    let mut args = vec!["check-conditions", "--mode", "clt"];
    args.extend(MODEL);
    let o = sbm(&args);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("condition,lhs,rhs,ratio,pass\n"));
    assert!(text.contains("# threshold=0.1"));
}

#[test]
fn clt_experiment_writes_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clt.csv");
    let o = sbm(&[
        "experiment", "--mode", "clt_target", "--replicates", "12", "--n", "60", "--m", "2", "--p", "0.4",
        "--q", "0.2", "--seed", "3", "--threads", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("replicate,h_w,statistic\n"));
    assert!(csv.contains("# ks_distance="));
    let hist = fs::read_to_string(dir.path().join("clt_hist.csv")).unwrap();
    assert!(hist.starts_with("bin_left,bin_right,count\n"));
}

#[test]
fn help_lists_flags() {
    for (sub, flags) in [
        ("generate", &["--n", "--m", "--p", "--q", "--seed", "--out", "--config", "--no-loops"][..]),
        ("spectrum", &["--in", "--matrix", "--out"][..]),
        ("hitting", &["--in", "--target", "--walks", "--out"][..]),
        ("check-conditions", &["--mode", "--threshold"][..]),
        ("experiment", &["--mode", "--replicates", "--threads", "--out", "--targets"][..]),
    ] {
        let o = sbm(&[sub, "--help"]);
        assert_eq!(code(&o), 0);
        let text = String::from_utf8(o.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{sub} --help is missing {f}");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&sbm(&["generate", "--frobnicate"])), 1);
    let o = sbm(&["generate", "--n", "10", "--m", "2", "--p", "0.5,0.3,0.1", "--q", "0.1"]);
    assert_eq!(code(&o), 1);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert_eq!(msg.lines().count(), 1, "{msg}");
    assert_eq!(code(&sbm(&["generate", "--config", "/nonexistent/model.toml"])), 1);
    // Disconnected draw: two blocks, no edges between them.
    let o = sbm(&["hitting", "--n", "10", "--m", "2", "--p", "1", "--q", "0", "--walks", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.toml");
    fs::write(&cfg, "n = 100\nm = 2\np = [0.5, 0.3]\nq = 0.1\nseed = 7\n").unwrap();
    let a = sbm(&["generate", "--config", cfg.to_str().unwrap()]);
    let mut args = vec!["generate"];
    args.extend(MODEL);
    let b = sbm(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = sbm(&["generate", "--config", cfg.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}
