//! Command implementations. Every command returns a process exit code:
//! 0 when every executed check passed, 1 when a check failed, and the caller
//! maps hard errors (bad config, IO) to 2.

use crate::config::{self, LimiterConfig, RunConfig};
use crate::output;
use anyhow::{anyhow, bail, Context, Result};
use fluxlim_core::diagnostics::{audit, AuditReport, AuditTolerances};
use fluxlim_core::integrator::run;
use fluxlim_core::oracles::{
    convergence_order, homogeneous_exact, mms_run, ode_reference, poiseuille_error, MmsCase,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub report: AuditReport,
    pub records: usize,
    pub steps: usize,
    pub sup_linf_n: f64,
    pub linf_n0: f64,
    pub final_dist: [f64; 4],
    pub wall_seconds: f64,
}

/// Validates and executes one run, writing `diag.csv`, `audit.json`,
/// `audit.txt` and optional snapshots under `out_dir`.
pub fn execute_run(cfg: &RunConfig, base_dir: &Path, out_dir: &Path) -> Result<RunArtifacts> {
    let validated = config::validate(cfg, base_dir)?;
    for w in &validated.warnings {
        println!("warning: {w}");
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let wall = Instant::now();
    let outcome = run(validated.initial, &validated.setup);
    let wall_seconds = wall.elapsed().as_secs_f64();
    let out = match outcome {
        Ok(out) => out,
        Err(e) => {
            // leave a diagnostic trace next to where the outputs would be
            let _ = std::fs::write(out_dir.join("error.txt"), format!("{e}\n"));
            return Err(anyhow!("run aborted: {e}"));
        }
    };

    let tol = AuditTolerances {
        eps_conv: validated.eps_conv,
        tol_proj: validated.setup.scheme.tol_proj,
        ..AuditTolerances::default()
    };
    let report = audit(&out.records, &tol, out.targets, &out.records[0])
        .map_err(|e| anyhow!("audit: {e}"))?;

    output::write_diag_csv(
        &out_dir.join("diag.csv"),
        &out.records,
        validated.grid.volume(),
        out.targets,
        validated.eps_conv,
    )?;
    std::fs::write(out_dir.join("audit.json"), report.to_json())?;
    std::fs::write(out_dir.join("audit.txt"), report.to_text())?;
    for (i, snap) in out.snapshots.iter().enumerate() {
        output::write_state_snapshots(out_dir, i, snap)?;
        if validated.write_vtk {
            output::write_vtk(&out_dir.join(format!("state_{i:06}.vtk")), snap)?;
        }
    }

    let sup_linf_n = out.records.iter().fold(0.0f64, |m, r| m.max(r.linf_n));
    let last = out.records.last().expect("records");
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        report,
        records: out.records.len(),
        steps: out.steps,
        sup_linf_n,
        linf_n0: out.records[0].linf_n,
        final_dist: [last.dist_n, last.dist_c, last.dist_m, last.dist_u],
        wall_seconds,
    })
}

fn default_out_dir(source: &str, override_dir: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    if let Some(d) = override_dir {
        return d.clone();
    }
    if let Some(d) = &cfg.output_dir {
        return d.clone();
    }
    let stem = Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_string());
    PathBuf::from("fluxlim-out").join(stem)
}

fn base_dir_of(source: &str) -> PathBuf {
    if config::builtin(source).is_some() {
        return PathBuf::from(".");
    }
    Path::new(source)
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn cmd_run(source: &str, output_dir: Option<PathBuf>) -> Result<i32> {
    let cfg = config::load_config(source)?;
    let out_dir = default_out_dir(source, &output_dir, &cfg);
    let art = execute_run(&cfg, &base_dir_of(source), &out_dir)?;
    println!(
        "run '{}': {} steps, {} records, {:.1}s -> {}",
        source,
        art.steps,
        art.records,
        art.wall_seconds,
        art.out_dir.display()
    );
    print!("{}", art.report.to_text());
    if art.report.all_passed() {
        Ok(0)
    } else {
        println!("failing checks: {}", art.report.failed_names().join(", "));
        Ok(1)
    }
}

pub fn cmd_sweep(source: &str, thetas: &[f64], output_dir: Option<PathBuf>) -> Result<i32> {
    if thetas.is_empty() {
        bail!("sweep: --theta list must not be empty");
    }
    let cfg = config::load_config(source)?;
    let k_s = match &cfg.limiter {
        LimiterConfig::Prototype { k_s, .. } => *k_s,
        LimiterConfig::Table { .. } => {
            bail!("sweep: the exponent sweep applies to the prototype limiter only")
        }
    };
    let base = base_dir_of(source);
    let root = default_out_dir(source, &output_dir, &cfg);
    std::fs::create_dir_all(&root)?;

    let mut rows = Vec::new();
    let mut all = true;
    for &theta in thetas {
        if !(theta >= 0.0 && theta.is_finite()) {
            bail!("sweep: invalid theta {theta}");
        }
        let mut case = cfg.clone();
        case.limiter = LimiterConfig::Prototype { k_s, theta };
        case.output_dir = None;
        let sub = root.join(format!("theta_{theta}"));
        match execute_run(&case, &base, &sub) {
            Ok(art) => {
                let pass = art.report.all_passed();
                all &= pass;
                println!(
                    "theta = {theta}: sup|n| = {:.6}, final dists = {:.2e}/{:.2e}/{:.2e}/{:.2e}, {}",
                    art.sup_linf_n,
                    art.final_dist[0],
                    art.final_dist[1],
                    art.final_dist[2],
                    art.final_dist[3],
                    if pass { "all checks pass" } else { "CHECK FAILURES" }
                );
                rows.push(output::SweepRow {
                    theta,
                    sup_linf_n: art.sup_linf_n,
                    final_dist: art.final_dist,
                    all_pass: pass,
                });
            }
            Err(e) => {
                all = false;
                println!("theta = {theta}: run failed: {e}");
                rows.push(output::SweepRow {
                    theta,
                    sup_linf_n: f64::NAN,
                    final_dist: [f64::NAN; 4],
                    all_pass: false,
                });
            }
        }
    }
    output::write_sweep_summary(&root.join("summary.csv"), &rows)?;
    println!("sweep summary -> {}", root.join("summary.csv").display());
    Ok(if all { 0 } else { 1 })
}

pub fn mms_case_ids() -> Vec<&'static str> {
    let mut ids = MmsCase::ids().to_vec();
    ids.push("poiseuille-2d");
    ids
}

pub fn cmd_mms(case_id: &str, grids: &[usize], output_dir: Option<PathBuf>) -> Result<i32> {
    let out_dir = output_dir.unwrap_or_else(|| PathBuf::from("fluxlim-out").join(format!("mms-{case_id}")));

    if case_id == "poiseuille-2d" {
        let grids: Vec<usize> = if grids.is_empty() { vec![16, 32] } else { grids.to_vec() };
        if grids.len() < 2 {
            bail!("poiseuille-2d needs at least two grids for a ratio");
        }
        let mut rows = Vec::new();
        let mut errs = Vec::new();
        for &n in &grids {
            let e = poiseuille_error(n).map_err(|e| anyhow!("{e}"))?;
            println!("poiseuille n = {n}: max error {e:.6e}");
            rows.push((1.0 / n as f64, 0.2, "u", "linf", e));
            errs.push(e);
        }
        std::fs::create_dir_all(&out_dir)?;
        output::write_error_table(&out_dir.join("errors.csv"), &rows)?;
        let mut pass = true;
        for pair in errs.windows(2) {
            let ratio = pair[0] / pair[1];
            println!("error ratio under doubling: {ratio:.3}");
            pass &= ratio >= 3.5;
        }
        println!("poiseuille-2d: {}", if pass { "PASS (ratio >= 3.5)" } else { "FAIL" });
        return Ok(if pass { 0 } else { 1 });
    }

    let case = match MmsCase::by_id(case_id) {
        Ok(c) => c,
        Err(_) => {
            bail!("unknown case '{case_id}'; known cases: {}", mms_case_ids().join(", "));
        }
    };
    let grids: Vec<usize> = if grids.is_empty() { case.default_grids.clone() } else { grids.to_vec() };
    let mut rows = Vec::new();
    let mut table_n = Vec::new();
    println!("case {case_id}: dt = {:e}, t_end = {}", case.dt, case.t_end);
    for &n in &grids {
        let e = mms_run(&case, n, case.dt, case.t_end).map_err(|err| anyhow!("{err}"))?;
        println!(
            "  N = {n:4}: linf(n) = {:.4e}, linf(c) = {:.4e}, linf(m) = {:.4e}",
            e.linf[0], e.linf[1], e.linf[2]
        );
        for (i, f) in ["n", "c", "m"].iter().enumerate() {
            rows.push((e.h, e.dt, *f, "linf", e.linf[i]));
            rows.push((e.h, e.dt, *f, "l2", e.l2[i]));
        }
        table_n.push((e.h, e.linf[0].max(1e-300)));
    }
    std::fs::create_dir_all(&out_dir)?;
    output::write_error_table(&out_dir.join("errors.csv"), &rows)?;

    let (threshold, label) = match case_id {
        "pure-diffusion-1d" => (1.8, "second-order diffusion stencil"),
        "chemo-1d" => (0.8, "upwind-limited chemotaxis"),
        _ => (f64::NEG_INFINITY, "exactness"),
    };
    if case_id == "steady-const-1d" {
        let worst = table_n.iter().fold(0.0f64, |m, (_, e)| m.max(*e));
        let pass = worst <= 1e-12;
        println!("steady constants reproduced to {worst:.2e}: {}", if pass { "PASS" } else { "FAIL" });
        return Ok(if pass { 0 } else { 1 });
    }
    let order = convergence_order(&table_n).map_err(|e| anyhow!("{e}"))?;
    let pass = order >= threshold;
    println!(
        "observed spatial order (n, linf): {order:.3} vs required {threshold} [{label}]: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

pub fn cmd_oracle(case_id: &str, output_dir: Option<PathBuf>) -> Result<i32> {
    if case_id != "homogeneous" {
        bail!("unknown oracle case '{case_id}'; known cases: homogeneous");
    }
    let out_dir = output_dir.unwrap_or_else(|| PathBuf::from("fluxlim-out").join("oracle-homogeneous"));
    std::fs::create_dir_all(&out_dir)?;
    let (n0, c0, m0) = (2.0, 0.5, 1.0);

    // closed form against the brute-force integrator
    let traj = ode_reference(n0, m0, c0, 1.0, 1e-5).map_err(|e| anyhow!("{e}"))?;
    let mut worst_rk4 = 0.0f64;
    for &(t, s) in traj.iter().step_by(20_000) {
        let exact = homogeneous_exact(n0, m0, c0, t).map_err(|e| anyhow!("{e}"))?;
        worst_rk4 = worst_rk4
            .max((s.n - exact.n).abs())
            .max((s.c - exact.c).abs())
            .max((s.m - exact.m).abs());
    }
    let (_, last_rk4) = traj.last().unwrap();
    let exact1 = homogeneous_exact(n0, m0, c0, 1.0).map_err(|e| anyhow!("{e}"))?;
    worst_rk4 = worst_rk4
        .max((last_rk4.n - exact1.n).abs())
        .max((last_rk4.c - exact1.c).abs())
        .max((last_rk4.m - exact1.m).abs());

    // full solver on constant data
    let grid = fluxlim_core::grid::GridSpec::unit_box(3, 8).map_err(|e| anyhow!("{e}"))?;
    let state = fluxlim_core::field::StateSnapshot::new(
        fluxlim_core::field::ScalarField::constant(grid, n0),
        fluxlim_core::field::ScalarField::constant(grid, c0),
        fluxlim_core::field::ScalarField::constant(grid, m0),
        fluxlim_core::field::VectorField::zeros(grid),
        fluxlim_core::field::ScalarField::zeros(grid),
        0.0,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let scheme = fluxlim_core::integrator::SchemeConfig {
        dt: fluxlim_core::integrator::DtSpec::Fixed(1e-4),
        ..Default::default()
    };
    let mut setup = fluxlim_core::integrator::RunSetup::new(
        scheme,
        fluxlim_core::sensitivity::FluxLimiter::prototype(1.0, 1.0).map_err(|e| anyhow!("{e}"))?,
        fluxlim_core::fluid::Potential::Zero,
        1.0,
    );
    setup.record_every = 0.25;
    let out = run(state, &setup).map_err(|e| anyhow!("{e}"))?;

    let mut table = String::from("# t,n_closed,c_closed,m_closed,n_pde,c_pde,m_pde\n");
    let mut worst_pde = 0.0f64;
    println!("      t |      closed form (n, c, m)       |        solver (n, c, m)");
    for r in &out.records {
        let exact = homogeneous_exact(n0, m0, c0, r.t).map_err(|e| anyhow!("{e}"))?;
        worst_pde = worst_pde
            .max((r.linf_n - exact.n).abs())
            .max((r.linf_c - exact.c).abs())
            .max((r.linf_m - exact.m).abs());
        println!(
            "{:7.3} | {:9.6} {:9.6} {:9.6}  | {:9.6} {:9.6} {:9.6}",
            r.t, exact.n, exact.c, exact.m, r.linf_n, r.linf_c, r.linf_m
        );
        table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.t, exact.n, exact.c, exact.m, r.linf_n, r.linf_c, r.linf_m
        ));
    }
    std::fs::write(out_dir.join("homogeneous.csv"), table)?;

    let expect_m1 = 1.0 / (2.0 * std::f64::consts::E - 1.0);
    let m1_err = (exact1.m - expect_m1).abs();
    println!("closed form vs RK4 (dt = 1e-5): max gap {worst_rk4:.3e} (require <= 1e-9)");
    println!("solver vs closed form (dt = 1e-4): max gap {worst_pde:.3e} (require <= 1e-5)");
    println!("m(1) = {:.12} vs 1/(2e-1) = {expect_m1:.12}", exact1.m);
    let pass = worst_rk4 <= 1e-9 && worst_pde <= 1e-5 && m1_err <= 1e-12;
    println!("homogeneous oracle: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

/// Partial tolerance overrides for `check`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceFile {
    pub mass_slack_rel: Option<f64>,
    pub diff_conserved_rel: Option<f64>,
    pub maxprin_slack: Option<f64>,
    pub compare_slack: Option<f64>,
    pub tol_pos: Option<f64>,
    pub cum_slack: Option<f64>,
    pub tol_proj: Option<f64>,
    pub bound_factor: Option<f64>,
    pub eps_conv: Option<f64>,
}

pub fn cmd_check(diag_path: &Path, tol_path: Option<&Path>) -> Result<i32> {
    let data = output::read_diag_csv(diag_path)?;
    let mut tol = AuditTolerances {
        eps_conv: data.eps_conv,
        ..AuditTolerances::default()
    };
    if let Some(p) = tol_path {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let over: ToleranceFile = serde_json::from_str(&text).context("tolerance file")?;
        if let Some(v) = over.mass_slack_rel {
            tol.mass_slack_rel = v;
        }
        if let Some(v) = over.diff_conserved_rel {
            tol.diff_conserved_rel = v;
        }
        if let Some(v) = over.maxprin_slack {
            tol.maxprin_slack = v;
        }
        if let Some(v) = over.compare_slack {
            tol.compare_slack = v;
        }
        if let Some(v) = over.tol_pos {
            tol.tol_pos = v;
        }
        if let Some(v) = over.cum_slack {
            tol.cum_slack = v;
        }
        if let Some(v) = over.tol_proj {
            tol.tol_proj = v;
        }
        if let Some(v) = over.bound_factor {
            tol.bound_factor = v;
        }
        if let Some(v) = over.eps_conv {
            tol.eps_conv = v;
        }
    }
    let report = audit(&data.records, &tol, data.targets, &data.records[0])
        .map_err(|e| anyhow!("audit: {e}"))?;
    print!("{}", report.to_text());
    Ok(if report.all_passed() { 0 } else { 1 })
}
