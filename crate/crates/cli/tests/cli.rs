use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intensity-ppt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("intensity-ppt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn tmsv_sweep_csv_is_deterministic() {
    let args = ["tmsv-sweep", "--r-min", "0", "--r-max", "0.6", "--r-steps", "4", "--shots", "5000", "--seed", "11"];
    let a = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, run(&args).stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,g2,path,delta1_pt,det_sigma,lambda_minus,entangled,status,config_hash,version");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * 3);
    // the r = 0 boundary row sits at λ̃₋ = 1
    assert_eq!(&rows[0][..3], &["0", "1.8", "gaussian"]);
    assert_eq!(rows[0][5], "1");
    assert!(rows.iter().all(|r| r[9] == env!("CARGO_PKG_VERSION") && r[8] == rows[0][8]));
}

#[test]
fn config_file_and_flag_precedence() {
    let cfg = scratch("sweep.toml");
    std::fs::write(&cfg, "r_min = 0.2\nr_max = 0.4\nr_steps = 3\ncutoffs = [5, 8]\ng2 = 2.0\n").unwrap();
    let out = scratch("tmgs.csv");
    let o = run(&["tmgs-sweep", "--config", cfg.to_str().unwrap(), "--g2", "1.8", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3 * 3);
    assert!(rows.iter().all(|r| r[1] == "1.8"));
    let order: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[2])).collect();
    assert_eq!(&order[..3], &[("0.2", "0"), ("0.2", "5"), ("0.2", "8")]);

    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    let o = run(&["tmgs-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_configs_are_rejected() {
    for args in [
        &["tmsv-sweep", "--r-min", "0.9", "--r-max", "0.1"][..],
        &["tmgs-sweep", "--cutoff", "1"],
        &["tmsv-sweep", "--g2", "0.5"],
        &["tmsv-sweep", "--efficiency", "1.5"],
        &["tmgs-sweep", "--channels", "8", "--cutoff", "9"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn detector_sim_samples_reproducibly() {
    let args = ["detector-sim", "--r", "0.4", "--shots", "20000", "--seed", "5"];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
    let text = stdout(&a);
    let total: f64 = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn verify_passes_and_detects_faults() {
    let o = run(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.contains(",PASS,")));
    let o = run(&["verify", "--inject-fault", "residual-sign"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("delta2_decomposition,FAIL"));
}
