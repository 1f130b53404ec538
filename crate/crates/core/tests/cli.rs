use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aedes_core::params::Habitat;
use aedes_core::scenario::{InitialRecipe, Scenario};
use aedes_core::sim::{Block, Grid1D};
use tempfile::TempDir;

fn aedes(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aedes"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, name: &str, sc: &Scenario) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, sc.to_config_string()).unwrap();
    p
}

/// Reference scenario on a coarse grid and a short horizon.
fn short_scenario(t_end: f64) -> Scenario {
    let mut sc = Scenario::reference();
    sc.sim.grid = Grid1D::new(-20.0, 20.0, 201).unwrap();
    sc.sim.t_end = t_end;
    sc.sim.output_stride = 500;
    let block = |v: f64, lo: f64, hi: f64| Block { value: v, lo, hi };
    sc.initial = InitialRecipe::Blocks([
        block(1000.0, -20.0, -5.0),
        block(1000.0, -20.0, -5.0),
        block(150.0, 5.0, 20.0),
        block(150.0, 5.0, 20.0),
    ]);
    sc
}

fn files_with(dir: &Path, prefix: &str) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(prefix))
        .collect();
    v.sort();
    v
}

#[test]
fn equilibria_default_report() {
    let tmp = TempDir::new().unwrap();
    let o = aedes(&["equilibria"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let f1 = text
        .lines()
        .find_map(|l| l.strip_prefix("F1* = "))
        .expect("F1* line")
        .parse::<f64>()
        .unwrap();
    assert!((f1 - 1209.0).abs() <= 0.5);
    assert!(text.contains("competition threshold"));
    let reports = files_with(tmp.path(), "equilibria-");
    assert_eq!(reports.len(), 1);
    assert_eq!(
        fs::read_to_string(tmp.path().join(&reports[0])).unwrap(),
        text
    );
}

#[test]
fn non_viable_species_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let mut sc = Scenario::reference();
    sc.system.sp2.b = 0.1;
    let cfg = write_scenario(tmp.path(), "weak.conf", &sc);
    let o = aedes(
        &["--config", cfg.to_str().unwrap(), "equilibria"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("(not viable)"));
    assert!(text.contains("species 2 only: not viable"));
    assert!(!text.contains("F2* ="));
}

#[test]
fn missing_delta_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let text: String = Scenario::reference()
        .to_config_string()
        .lines()
        .filter(|l| !l.starts_with("species2.delta"))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = tmp.path().join("broken.conf");
    fs::write(&cfg, text).unwrap();
    let o = aedes(
        &["--config", cfg.to_str().unwrap(), "equilibria"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("species2.delta"), "{}", stderr(&o));
}

#[test]
fn bad_value_reports_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.conf");
    let text = Scenario::reference()
        .to_config_string()
        .replace("shared.c = 40", "shared.c = -1");
    let line = text
        .lines()
        .position(|l| l.starts_with("shared.c"))
        .unwrap()
        + 1;
    fs::write(&cfg, text).unwrap();
    let o = aedes(
        &["--config", cfg.to_str().unwrap(), "criterion"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(&format!("line {line}")),
        "{}",
        stderr(&o)
    );
}

#[test]
fn criterion_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let o = aedes(&["criterion", "--direction", "1"], tmp.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("invasion = true"));
    assert!(stdout(&o).contains("zeta = 1.3228"));

    let o = aedes(&["criterion", "--direction", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("invasion = false"));

    let o = aedes(&["criterion", "--patch", "U"], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    let o = aedes(&["criterion", "--direction", "3"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn two_patch_urban_criterion() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_scenario(tmp.path(), "tp.conf", &Scenario::reference_two_patch());
    let o = aedes(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "criterion",
            "--direction",
            "2",
            "--patch",
            "U",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("F_inv* = 745.2"));
    assert!(text.contains("invasion = true"));
}

#[test]
fn profile_csv_is_monotone() {
    let tmp = TempDir::new().unwrap();
    let o = aedes(&["profile", "--dx", "0.1"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let inv = files_with(tmp.path(), "profile-")
        .into_iter()
        .find(|n| n.ends_with("-invader.csv"))
        .expect("invader CSV");
    let csv = fs::read_to_string(tmp.path().join(inv)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,value"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(values, sorted);
    assert_eq!(values[0], 0.0);
}

#[test]
fn two_patch_profile_reports_bridges() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_scenario(tmp.path(), "tp.conf", &Scenario::reference_two_patch());
    let o = aedes(&["--config", cfg.to_str().unwrap(), "profile"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("monotone = true"));
    let csvs: Vec<String> = files_with(tmp.path(), "profile-")
        .into_iter()
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 4);
}

#[test]
fn simulate_writes_deterministic_artifacts() {
    let tmp = TempDir::new().unwrap();
    let sc = short_scenario(10.0);
    let cfg = write_scenario(tmp.path(), "short.conf", &sc);
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    for (model, out) in [("full", &out1), ("full", &out2), ("reduced", &out1)] {
        let o = aedes(
            &[
                "--config",
                cfg.to_str().unwrap(),
                "simulate",
                "--model",
                model,
            ],
            out,
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let stem = format!("simulate-{}-full", sc.hash());
    for suffix in [
        "-snapshots.csv",
        "-diagnostics.csv",
        "-F1.pgm",
        "-F2.pgm",
        ".txt",
    ] {
        let name = format!("{stem}{suffix}");
        let a = fs::read(out1.join(&name)).unwrap();
        let b = fs::read(out2.join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let snaps = fs::read_to_string(out1.join(format!("{stem}-snapshots.csv"))).unwrap();
    assert!(snaps.starts_with("t,x,E1,F1,E2,F2\n"));
    // Snapshots at t = 0, 5, 10 on 201 nodes.
    assert_eq!(snaps.lines().count(), 1 + 3 * 201);
    let reduced =
        fs::read_to_string(out1.join(format!("simulate-{}-reduced-snapshots.csv", sc.hash())))
            .unwrap();
    assert!(reduced.starts_with("t,x,w,F1,F2\n"));
    let pgm = fs::read(out1.join(format!("{stem}-F1.pgm"))).unwrap();
    assert!(pgm.starts_with(b"P5\n201 3\n255\n"));
    assert_eq!(pgm.len(), b"P5\n201 3\n255\n".len() + 201 * 3);
}

#[test]
fn reduce_check_table() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_scenario(tmp.path(), "short.conf", &short_scenario(20.0));
    let o = aedes(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "reduce-check",
            "--c-values",
            "40,160,640",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = files_with(tmp.path(), "reduce-check-")
        .into_iter()
        .find(|n| n.ends_with(".csv"))
        .unwrap();
    let table = fs::read_to_string(tmp.path().join(csv)).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("c,distance,max_segregation"));
    let cs: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(cs, vec![40.0, 160.0, 640.0]);

    let o = aedes(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "reduce-check",
            "--c-values",
            "160,40",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_runs_every_scenario() {
    let tmp = TempDir::new().unwrap();
    let a = write_scenario(tmp.path(), "a.conf", &Scenario::reference());
    let mut other = Scenario::reference();
    other.system.habitat = Habitat::Constant {
        k1: 1500.0,
        k2: 500.0,
    };
    let b = write_scenario(tmp.path(), "b.conf", &other);
    let o = aedes(
        &[
            "--sweep",
            "2",
            "--config",
            a.to_str().unwrap(),
            "--config",
            b.to_str().unwrap(),
            "equilibria",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files_with(tmp.path(), "equilibria-").len(), 2);
    let text = stdout(&o);
    let first = text.find("K1 = 2000").expect("first scenario");
    let second = text.find("K1 = 1500").expect("second scenario");
    assert!(first < second, "reports keep scenario order");
}

#[test]
fn one_failing_scenario_sets_exit_code() {
    let tmp = TempDir::new().unwrap();
    let good = write_scenario(tmp.path(), "good.conf", &Scenario::reference());
    let missing = tmp.path().join("missing.conf");
    let o = aedes(
        &[
            "--config",
            good.to_str().unwrap(),
            "--config",
            missing.to_str().unwrap(),
            "equilibria",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("F1* = 1209"));
}

#[test]
fn default_scenario_round_trips() {
    let sc = Scenario::reference();
    let again = Scenario::parse(&sc.to_config_string()).unwrap();
    assert_eq!(sc, again);
    assert_eq!(sc.hash(), again.hash());
    let shipped = Scenario::parse(include_str!("../../../scenarios/default.conf")).unwrap();
    assert_eq!(sc, shipped);
}
