use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn noonsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noonsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn every_preset_writes_its_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    for id in [
        "FIG1", "FIG2", "FIG3", "FIG4", "FIG5", "FIG6", "FIG7", "FIG8",
    ] {
        let o = noonsim(&["preset", id, "--output-dir", out]);
        assert!(
            o.status.success(),
            "{id}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let dir = tmp.path().join(id.to_lowercase());
        let s = summary(&dir);
        for file in s["files"].as_array().unwrap() {
            let f = dir.join(file.as_str().unwrap());
            assert!(fs::metadata(&f).unwrap().len() > 0, "{}", f.display());
        }
        assert!(s["wall_time_s"].as_f64().unwrap() >= 0.0);
        assert_eq!(s["config"]["preset"], id.to_lowercase());
    }
    let fig1 = summary(&tmp.path().join("fig1"));
    let variances: Vec<f64> = fig1["results"]["ground_states"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["diff_variance"].as_f64().unwrap())
        .collect();
    assert!((variances[0] - 20.0).abs() < 1e-3);
    assert!((variances[1] - 293.0).abs() < 0.03 * 293.0);
    assert!((variances[2] - 396.0).abs() < 0.03 * 396.0);
    assert!(fig1["notes"][0].as_str().unwrap().contains("12"));

    let fig3 = tmp.path().join("fig3");
    assert_eq!(
        csv_header(&fig3.join("fringe_N20_U0.csv")),
        format!(
            "theta,mean_diff,var_diff,parity,{}",
            (0..=20)
                .map(|n| format!("p_{n}"))
                .collect::<Vec<_>>()
                .join(",")
        )
    );
    assert_eq!(
        csv_header(&tmp.path().join("fig8/spectrum_N20_U0.csv")),
        "m,fourier_re,fourier_im,coherence_re,coherence_im"
    );
    assert_eq!(
        csv_header(&tmp.path().join("fig5/ramp_N20_T4_summary.csv")),
        "t,u,diff_variance,fidelity"
    );
    assert_eq!(
        csv_header(&tmp.path().join("fig5/ramp_N20_T0.5_distribution.csv")),
        "t,n,probability"
    );
    let fig6 = summary(&tmp.path().join("fig6"));
    assert_eq!(
        fig6["results"]["fidelity_sweeps"][0]["points"]
            .as_array()
            .unwrap()
            .len(),
        6
    );
}

#[test]
fn summary_is_a_reusable_config_and_runs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("a");
    let second = tmp.path().join("b");
    let o = noonsim(&[
        "ramp",
        "--output-dir",
        first.to_str().unwrap(),
        "--atoms",
        "8",
        "--set",
        "ramp.ramp_times=[0.3]",
        "--set",
        "ramp.samples=5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = noonsim(&[
        "run",
        "--config",
        first.join("ramp/summary.json").to_str().unwrap(),
        "--output-dir",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["ramp_N8_T0.3_summary.csv", "ramp_N8_T0.3_distribution.csv"] {
        assert_eq!(
            fs::read(first.join("ramp").join(name)).unwrap(),
            fs::read(second.join("ramp").join(name)).unwrap()
        );
    }
    let a = summary(&first.join("ramp"));
    let b = summary(&second.join("ramp"));
    assert_eq!(a["results"], b["results"]);
    // The resolved TOML reproduces the same run too.
    let third = tmp.path().join("c");
    let o = noonsim(&[
        "run",
        "--config",
        first.join("ramp/config.toml").to_str().unwrap(),
        "--output-dir",
        third.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(summary(&third.join("ramp"))["results"], a["results"]);
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        "scenario = \"ramsey_sweep\"\n[system]\natoms = [3]\n[ramsey]\ngrid_points = 8\nu_interference = [0.0]\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = noonsim(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
        "--set",
        "ramsey.grid_points=16",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out.join("ramsey_sweep"));
    assert_eq!(s["config"]["ramsey"]["grid_points"], 16);
    assert_eq!(s["results"]["fringes"][0]["grid_points"], 16);
}

#[test]
fn estimate_u_flags() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = noonsim(&["estimate-u", "--output-dir", out]);
    assert!(o.status.success());
    let s = summary(&tmp.path().join("estimate_u"));
    let u = |s: &Value, k: usize| s["results"]["estimates"][k]["u"].as_f64().unwrap();
    assert!((u(&s, 0) - 30.0).abs() < 3.0);
    assert!((u(&s, 1) + 3.0).abs() < 0.3);
    let o = noonsim(&[
        "estimate-u",
        "--output-dir",
        out,
        "--omega",
        "1000,1000,100",
        "--omega-units",
        "hertz",
        "--scattering-length-a0",
        "2000",
        "--mass-amu",
        "84.911789738",
    ]);
    assert!(o.status.success());
    let s = summary(&tmp.path().join("estimate_u"));
    assert!((u(&s, 0) / 30.877 - (2.0 * std::f64::consts::PI).powf(1.5)).abs() < 0.01);
}

#[test]
fn exit_codes_classify_failures() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let code = |args: &[&str]| noonsim(args).status.code().unwrap();
    assert_eq!(
        code(&["ramp", "--output-dir", out, "--set", "ramp.bogus=1"]),
        2
    );
    assert_eq!(
        code(&["ramsey", "--output-dir", out, "--set", "ramsey.kappa_bs=0"]),
        2
    );
    assert_eq!(
        code(&["estimate-u", "--output-dir", out, "--omega", "1,2"]),
        2
    );
    assert_eq!(code(&["run", "--output-dir", out]), 2);
    assert_eq!(
        code(&[
            "coherence",
            "--output-dir",
            out,
            "--atoms",
            "20",
            "--set",
            "ramsey.grid_points=30"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "ramp",
            "--output-dir",
            out,
            "--atoms",
            "6",
            "--set",
            "ramp.ramp_times=[1]",
            "--set",
            "integrator.max_steps=3",
        ]),
        3
    );
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    assert_eq!(
        code(&["estimate-u", "--output-dir", blocker.to_str().unwrap()]),
        1
    );
    assert_eq!(
        code(&[
            "run",
            "--config",
            tmp.path().join("missing.toml").to_str().unwrap()
        ]),
        1
    );
}
