use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qnn_core::experiment::parse_timeseries_csv;

fn qnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnn"))
        .args(args)
        .output()
        .expect("failed to launch qnn")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SMALL: &str = "preset = Fig3
lattice.width = 16
lattice.height = 16
steps = 3000
probes.sites = 5,5
probes.pairs = 5,5,8,9
";

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = qnn(&["run", "--config", &cfg, "--output-dir", out_dir.to_str().unwrap(), "--plot-script"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    for f in ["timeseries.csv", "analysis.csv", "report.txt", "plot.gp"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let ts = fs::read_to_string(out_dir.join("timeseries.csv")).unwrap();
    assert!(ts.starts_with("step,c_5_5,sum_c,corr_5_5_8_9\n"));
    assert_eq!(ts.lines().count(), 3002);
    let analysis = fs::read_to_string(out_dir.join("analysis.csv")).unwrap();
    assert!(analysis.starts_with("channel,classification,period_steps,cv,n_peaks,error\n"));
    assert_eq!(analysis.lines().count(), 4);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("c_5_5:"));
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}init.interior = RandomUnitCircle\n"));
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "1", "3", "8"].iter().enumerate() {
        let out_dir = dir.path().join(format!("out{i}"));
        let out = qnn(&[
            "run",
            "--config",
            &cfg,
            "--seed",
            "123",
            "--threads",
            threads,
            "--output-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push((
            fs::read(out_dir.join("timeseries.csv")).unwrap(),
            fs::read(out_dir.join("analysis.csv")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn seed_changes_random_interior() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}steps = 10\n").replace("steps = 3000\n", ""));
    let cfg_random = write_config(dir.path(), &format!("{}init.interior = RandomUnitCircle\n", fs::read_to_string(&cfg).unwrap()));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(qnn(&["run", "--config", &cfg_random, "--seed", "1", "--output-dir", a.to_str().unwrap()]).status.success());
    assert!(qnn(&["run", "--config", &cfg_random, "--seed", "2", "--output-dir", b.to_str().unwrap()]).status.success());
    assert_ne!(
        fs::read(a.join("timeseries.csv")).unwrap(),
        fs::read(b.join("timeseries.csv")).unwrap()
    );
}

#[test]
fn sweep_writes_one_row_per_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("sweep");
    let out = qnn(&[
        "sweep",
        "--config",
        &cfg,
        "--epsilons",
        "0.02,0.04,0.08",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let periods = fs::read_to_string(out_dir.join("periods.csv")).unwrap();
    let lines: Vec<&str> = periods.lines().collect();
    assert_eq!(
        lines[0],
        "epsilon,channel,classification,period_steps,cv,n_peaks,period_times_epsilon,error"
    );
    assert_eq!(lines.len(), 4);
    let eps: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(eps, [0.02, 0.04, 0.08]);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1) == Some("c_5_5")));
}

#[test]
fn validation_and_parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_eps = write_config(dir.path(), "preset = Fig3\nmodel.epsilon = -1\n");
    assert_eq!(qnn(&["run", "--config", &bad_eps]).status.code(), Some(1));

    let empty = write_config(dir.path(), "");
    let out = qnn(&["run", "--config", &empty]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("required"));

    let garbage = write_config(dir.path(), "preset = Fig3\nthis is not valid\n");
    let out = qnn(&["run", "--config", &garbage]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(qnn(&["run", "--preset", "Fig3", "--set", "nope=1"]).status.code(), Some(1));
    assert_eq!(qnn(&["run", "--config", "/definitely/missing.cfg"]).status.code(), Some(1));
    assert_eq!(qnn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qnn(&["sweep", "--preset", "Fig1", "--epsilons", "0.01"]).status.code(), Some(1));
    assert_eq!(qnn(&["sweep", "--preset", "Fig3"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("steps = 3000", "steps = 5"));
    let out = qnn(&["run", "--config", &cfg, "--output-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_subcommand_expands_presets() {
    let out = qnn(&["config", "--preset", "Fig5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("model.epsilon = 0.8"));
    assert!(text.contains("init.boundary = TwoOppositeSidesX"));
    assert!(text.contains("steps = 40000"));
    assert!(text.contains("lattice.width = 40"));

    let out = qnn(&["config", "--preset", "Fig3", "--set", "model.threshold_mode=Signed"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("model.threshold_mode = Signed"));
}

#[test]
fn emitted_csv_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("steps = 3000", "steps = 50"));
    let out_dir = dir.path().join("o");
    assert!(qnn(&["run", "--config", &cfg, "--output-dir", out_dir.to_str().unwrap()]).status.success());
    let table = parse_timeseries_csv(&fs::read_to_string(out_dir.join("timeseries.csv")).unwrap()).unwrap();
    assert_eq!(table.steps, (0..=50).collect::<Vec<u64>>());
    assert!(table.columns[0].iter().all(|c| c.abs() <= 1.0));
}
