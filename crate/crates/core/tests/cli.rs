use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use vortexlab::cli::{run_experiment, Experiment, RunConfig};

const E1: &str = r#"
experiment = "E1"
domain = "rect:1,1"
field = "linear:1,0,0,1"
eps_list = [0.1, 0.05]
"#;

const E3: &str = r#"
experiment = "E3"
domain = "ball:1"
field = "vortex:0,0,1"
eps_list = [0.05, 0.025]
"#;

fn run_into(text: &str, dir: &Path) -> Vec<u8> {
    let mut cfg = RunConfig::parse(text).unwrap();
    cfg.out = Some(dir.to_path_buf());
    run_experiment(&cfg).unwrap();
    std::fs::read(dir.join("report.csv")).unwrap()
}

#[test]
fn repeated_runs_write_identical_tables() {
    for text in [E1, E3] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ca, cb) = (run_into(text, a.path()), run_into(text, b.path()));
        assert!(!ca.is_empty());
        assert_eq!(ca, cb);
        let pa = std::fs::read(a.path().join("report.gp")).unwrap();
        let pb = std::fs::read(b.path().join("report.gp")).unwrap();
        assert_eq!(pa, pb);
    }
}

#[test]
fn linear_ratios_parse_back_near_one() {
    let dir = tempfile::tempdir().unwrap();
    run_into(E1, dir.path());
    let mut rdr = csv::Reader::from_path(dir.path().join("report.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["eps", "value", "reference", "ratio", "wall_ms"]
    );
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let ratio: f64 = rec[3].parse().unwrap();
        assert!((ratio - 1.0).abs() <= 1e-3, "{ratio}");
        assert_eq!(&rec[4], "0");
        n += 1;
    }
    assert_eq!(n, 2);
}

fn experiments() -> impl Strategy<Value = Experiment> {
    prop::sample::select(vec![
        Experiment::E1,
        Experiment::E2,
        Experiment::E3,
        Experiment::E4,
        Experiment::E5,
        Experiment::E6,
        Experiment::E7,
    ])
}

fn configs() -> impl Strategy<Value = RunConfig> {
    (
        experiments(),
        prop::collection::vec(0.001f64..0.999, 1..5),
        4.0f64..32.0,
        prop::option::of((1usize..512, 1usize..256)),
        prop::collection::vec(0.01f64..0.5, 1..4),
        -360.0f64..360.0,
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(
            |(experiment, mut eps, grid_ratio, polar, margins, theta, seed, record_timing)| {
                eps.sort_by(|a, b| b.total_cmp(a));
                eps.dedup();
                RunConfig {
                    experiment,
                    kernel: "gauss:0.5:1".into(),
                    domain: "ball:1".into(),
                    field: "vortex:0.1,-0.2,1;phase=0.5".into(),
                    eps_list: eps,
                    grid_ratio,
                    polar: polar.map(|(r, a)| [r, 2 * a]),
                    margins,
                    theta,
                    seed,
                    record_timing,
                    out: None,
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(cfg in configs()) {
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vortexlab"))
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, E1).unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("report.csv").exists() && out.join("report.gp").exists());

    // At large eps the vortex energy ratio is far above its bracket.
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "experiment = \"E2\"\ndomain = \"ball:1\"\nfield = \"vortex:0,0,1\"\neps_list = [0.2]\ngrid_ratio = 4\npolar = [16, 16]\n",
    )
    .unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "experiment = \"E9\"\n").unwrap();
    let status = bin().args(["run", "--config"]).arg(&broken).status().unwrap();
    assert_eq!(status.code(), Some(1));
    std::fs::write(&broken, E1.replace("linear:1,0,0,1", "vortex:0.5,0.5,1")).unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&broken)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn energy_and_detect_subcommands() {
    let out = bin()
        .args([
            "energy",
            "--kernel",
            "indicator:1",
            "--domain",
            "rect:1,1",
            "--field",
            "linear:1,0,0,1",
        ])
        .args(["--eps", "0.1", "--scaling", "bbm"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let value: f64 = row[1].parse().unwrap();
    let exact = std::f64::consts::FRAC_PI_2 - 0.16 + 0.01 / 3.0;
    assert!((value / exact - 1.0).abs() < 1e-3);

    let out = bin()
        .args([
            "detect",
            "--field",
            "vortex:0.2,0,1;-0.2,0,-1",
            "--domain",
            "rect:-1,-1,1,1",
            "--eps",
            "0.03125",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let degrees: Vec<i32> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let mut sorted = degrees.clone();
    sorted.sort();
    assert_eq!(sorted, vec![-1, 1]);
}
