use std::fs;
use std::process::Command;

use ipd_core::read_results;

fn ipd() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipd"));
    cmd.env_remove("IPD_OUTPUT_DIR");
    cmd
}

#[test]
fn single_run_reports_one_round() {
    let out = ipd()
        .args(["run", "--mode", "single", "--n", "2", "--tau", "1", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("rounds: 1 (played 1, refused 0)"), "{text}");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn heterogeneous_sweep_writes_126_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = ipd()
            .args(["sweep", "--mode", "heterogeneous", "--seed", "42", "--realizations", "1", "--tau", "1", "-q", "-o"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        path
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let table = read_results(&a).unwrap();
    assert_eq!(table.rows.len(), 126);
    assert!(table.rows.iter().all(|r| r.mode == "heterogeneous" && r.group == "cooperators"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "mode = \"homogeneous\"\nstrategy = \"FMD\"\nagents_per_rho = 1\ntau = 2\nrealizations = 2\nmaster_seed = 5\nmu_list = [0.0, 0.5, 1.0]\n",
    )
    .unwrap();
    let out_path = dir.path().join("out.csv");
    let status = ipd()
        .args(["sweep", "-q", "--config"])
        .arg(&cfg)
        .arg("--mu-list=0.2,0.4")
        .arg("-o")
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let table = read_results(&out_path).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(table.rows.iter().all(|r| r.strategy.token() == "FMD" && r.realizations == 2));
    assert_eq!(table.rows.iter().map(|r| r.mu).collect::<Vec<_>>(), [0.2, 0.4]);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = ipd()
        .env("IPD_OUTPUT_DIR", dir.path())
        .args(["heatmap", "--seed", "3", "--realizations", "1", "--tau", "1", "-q"])
        .status()
        .unwrap();
    assert!(status.success());
    let table = read_results(&dir.path().join("heatmap.csv")).unwrap();
    assert_eq!(table.rows.len(), 2646);
}

#[test]
fn verify_endpoints_passes() {
    let out = ipd().args(["verify-endpoints", "--seed", "7", "--realizations", "1", "--tau", "2"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().trim_end().ends_with("PASS"));
}

#[test]
fn errors_exit_nonzero() {
    let out = ipd().args(["sweep", "--mode", "heterogeneous"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));

    let out = ipd().args(["frobnicate"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = ipd().args(["run", "--payoffs", "5,3,1,4"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("S < P violated"));

    let out = ipd().args(["run", "--strategy", "FMX"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown strategy"));
}
