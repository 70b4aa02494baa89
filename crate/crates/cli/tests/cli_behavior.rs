//! End-to-end behavior of the config and command layer, driven in-process.

use fluxlim_cli::commands::{cmd_check, cmd_mms, cmd_oracle, cmd_run, cmd_sweep, execute_run};
use fluxlim_cli::config::{load_config, parse_config, validate, RunConfig};
use fluxlim_cli::output::{read_diag_csv, read_snapshot, write_snapshot};
use std::path::Path;

fn tiny_config(t_end: f64) -> RunConfig {
    parse_config(&format!(
        r#"{{
        "schema": 1,
        "grid": {{ "cells": [24, 24], "lengths": [1.0, 1.0] }},
        "limiter": {{ "kind": "prototype", "k_s": 1.0, "theta": 1.0 }},
        "phi": {{ "kind": "linear", "g": [0.0, -0.5] }},
        "initial": {{
            "n": {{ "kind": "gaussian-bump", "center": [0.5, 0.7], "width": 0.18, "amplitude": 1.0, "floor": 0.05, "normalize_mass": 2.0 }},
            "c": {{ "kind": "constant", "value": 0.0 }},
            "m": {{ "kind": "gaussian-bump", "center": [0.5, 0.3], "width": 0.18, "amplitude": 1.0, "floor": 0.05, "normalize_mass": 1.0 }},
            "u": {{ "kind": "zero" }}
        }},
        "scheme": {{ "dt": 0.01, "diffusion": "implicit-be", "cfl_safety": 0.8,
                     "tol_poisson": 1e-10, "tol_proj": 1e-8, "tol_implicit": 1e-12,
                     "poisson_jacobi": false }},
        "t_end": {t_end},
        "record_every": 0.05,
        "guard": 1e6,
        "eps_conv": 1e-3
    }}"#
    ))
    .unwrap()
}

#[test]
fn builtin_demos_parse_and_validate() {
    for name in fluxlim_cli::config::builtin_names() {
        let cfg = load_config(name).unwrap();
        let v = validate(&cfg, Path::new(".")).unwrap();
        assert_eq!(v.eps_conv, 1e-3);
    }
}

#[test]
fn malformed_and_negative_configs_are_rejected() {
    assert!(parse_config("{ not json").is_err());
    // unknown keys are parse errors, not silent typos
    assert!(parse_config(r#"{"schema": 1, "gird": {}}"#).is_err());

    let mut cfg = tiny_config(0.1);
    cfg.initial.n = fluxlim_cli::config::FieldInit::Constant { value: -0.1 };
    let err = match validate(&cfg, Path::new(".")) {
        Err(e) => e.to_string(),
        Ok(_) => panic!("negative initial data accepted"),
    };
    assert!(err.contains("initial.n") && err.contains("negative"), "{err}");

    let mut cfg = tiny_config(0.1);
    cfg.schema = 2;
    assert!(validate(&cfg, Path::new(".")).is_err());
}

#[test]
fn all_constant_data_validates_without_warnings() {
    let mut cfg = tiny_config(0.1);
    cfg.initial.n = fluxlim_cli::config::FieldInit::Constant { value: 2.0 };
    cfg.initial.m = fluxlim_cli::config::FieldInit::Constant { value: 1.0 };
    cfg.phi = fluxlim_cli::config::PhiConfig::Zero;
    let v = validate(&cfg, Path::new(".")).unwrap();
    assert!(v.warnings.is_empty(), "unexpected warnings: {:?}", v.warnings);
}

#[test]
fn theta_zero_is_a_warning_not_an_error() {
    let mut cfg = tiny_config(0.1);
    cfg.limiter = fluxlim_cli::config::LimiterConfig::Prototype { k_s: 1.0, theta: 0.0 };
    let v = validate(&cfg, Path::new(".")).unwrap();
    assert!(
        v.warnings.iter().any(|w| w.contains("proven")),
        "expected a regime warning, got {:?}",
        v.warnings
    );
}

#[test]
fn run_writes_outputs_and_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let art = execute_run(&tiny_config(0.5), Path::new("."), &out).unwrap();
    // short horizon: turbulence-free but far from equilibrium
    assert!(!art.report.all_passed());
    assert!(art.report.failed_names() == vec!["converged-equilibrium"]);

    let diag = read_diag_csv(&out.join("diag.csv")).unwrap();
    assert_eq!(diag.records.len(), art.records);
    assert!((diag.records[0].mass_n - 2.0).abs() < 1e-12);
    assert!((diag.records[0].mass_m - 1.0).abs() < 1e-12);
    assert_eq!(diag.targets, (1.0, 0.0));

    // the standalone checker reproduces the failing-check set
    let code = cmd_check(&out.join("diag.csv"), None).unwrap();
    assert_eq!(code, 1);
    assert!(out.join("audit.json").exists());
    assert!(out.join("audit.txt").exists());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("audit.json")).unwrap()).unwrap();
    assert_eq!(json["checks"]["mass-monotone-n"]["status"], "pass");
    assert_eq!(json["checks"]["converged-equilibrium"]["status"], "fail");
}

#[test]
fn t_end_zero_gives_single_row_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero");
    let art = execute_run(&tiny_config(0.0), Path::new("."), &out).unwrap();
    assert_eq!(art.records, 1);
    assert!(art.report.all_passed(), "{}", art.report.to_text());
    let diag = read_diag_csv(&out.join("diag.csv")).unwrap();
    assert_eq!(diag.records.len(), 1);
}

#[test]
fn absurdly_tight_guard_aborts_with_nonzero_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(0.5);
    cfg.guard = 1e-9;
    let err = match execute_run(&cfg, Path::new("."), &dir.path().join("g")) {
        Err(e) => e,
        Ok(_) => panic!("tight guard did not trip"),
    };
    assert!(format!("{err:#}").contains("blow-up suspected"), "{err:#}");
}

#[test]
fn snapshots_round_trip_and_feed_initial_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("snap");
    let mut cfg = tiny_config(0.2);
    cfg.snapshot_every = Some(0.1);
    execute_run(&cfg, Path::new("."), &out).unwrap();
    let n_path = out.join("n_000002.raw");
    let (dims, tag, t, data) = read_snapshot(&n_path).unwrap();
    assert_eq!(dims, [24, 24, 1]);
    assert_eq!(tag, "n");
    assert!((t - 0.2).abs() < 1e-9);
    assert_eq!(data.len(), 576);

    // header is exactly 64 bytes and the payload is 8 bytes per cell
    let raw = std::fs::read(&n_path).unwrap();
    assert_eq!(raw.len(), 64 + 8 * 576);
    assert!(raw.starts_with(b"FLXSNP01 "));

    // write, read back, use as an initial condition
    let custom = dir.path().join("custom.raw");
    write_snapshot(&custom, dims, 2, "n", 0.0, &data).unwrap();
    let mut cfg2 = tiny_config(0.0);
    cfg2.initial.n = fluxlim_cli::config::FieldInit::File { path: custom.clone() };
    let v = validate(&cfg2, Path::new(".")).unwrap();
    let restored = fluxlim_core::reduce::integrate(&v.initial.n).unwrap();
    let original = fluxlim_core::reduce::integrate(
        &fluxlim_core::field::ScalarField::from_values(v.grid, data).unwrap(),
    )
    .unwrap();
    assert_eq!(restored, original);
}

#[test]
fn small_runs_are_bit_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    execute_run(&tiny_config(0.3), Path::new("."), &a).unwrap();
    execute_run(&tiny_config(0.3), Path::new("."), &b).unwrap();
    let da = std::fs::read(a.join("diag.csv")).unwrap();
    let db = std::fs::read(b.join("diag.csv")).unwrap();
    assert_eq!(da, db, "diag.csv must be byte-identical across executions");
}

#[test]
fn sweep_with_one_theta_reproduces_a_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("tiny.json");
    std::fs::write(&cfg_path, serde_json::to_string(&tiny_config(0.3)).unwrap()).unwrap();

    let run_dir = dir.path().join("run");
    let sweep_dir = dir.path().join("sweep");
    let _ = cmd_run(cfg_path.to_str().unwrap(), Some(run_dir.clone())).unwrap();
    let _ = cmd_sweep(cfg_path.to_str().unwrap(), &[1.0], Some(sweep_dir.clone())).unwrap();

    let da = std::fs::read(run_dir.join("diag.csv")).unwrap();
    let db = std::fs::read(sweep_dir.join("theta_1").join("diag.csv")).unwrap();
    assert_eq!(da, db, "sweep at the same theta must be byte-identical");
    assert!(sweep_dir.join("summary.csv").exists());
}

#[test]
fn sweep_rejects_empty_theta_list() {
    assert!(cmd_sweep("demo1d", &[], None).is_err());
}

#[test]
fn tabulated_limiter_loads_and_is_gatekept() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("limiter.csv");
    // a valid table sitting under the prototype envelope for theta = 1;
    // beyond the last row the limiter extrapolates as a constant, so the
    // support must reach past the gatekeeper's largest sample
    let mut text = String::from("sigma,value\n");
    for i in 0..=110 {
        let sigma = (i as f64 / 4.0).exp2() - 1.0;
        text.push_str(&format!("{},{}\n", sigma, 0.9 / (1.0 + sigma).sqrt()));
    }
    std::fs::write(&table, &text).unwrap();

    let mut cfg = tiny_config(0.0);
    cfg.limiter = fluxlim_cli::config::LimiterConfig::Table {
        path: table.clone(),
        k_s_claim: 1.0,
        theta_claim: 1.0,
        samples: 100,
    };
    validate(&cfg, Path::new(".")).unwrap();

    // claiming a steeper envelope than the table satisfies must fail
    let mut cfg = tiny_config(0.0);
    cfg.limiter = fluxlim_cli::config::LimiterConfig::Table {
        path: table,
        k_s_claim: 0.5,
        theta_claim: 1.0,
        samples: 100,
    };
    let err = match validate(&cfg, Path::new(".")) {
        Err(e) => e.to_string(),
        Ok(_) => panic!("envelope violation accepted"),
    };
    assert!(err.contains("envelope"), "{err}");
}

#[test]
fn unknown_ids_are_reported_with_the_known_list() {
    let err = cmd_mms("no-such-case", &[], None).unwrap_err().to_string();
    assert!(err.contains("pure-diffusion-1d") && err.contains("poiseuille-2d"), "{err}");
    let err = cmd_oracle("no-such-case", None).unwrap_err().to_string();
    assert!(err.contains("homogeneous"), "{err}");
}
