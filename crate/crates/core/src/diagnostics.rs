//! Per-step measurement, equilibrium targets, and the structural audit.
//!
//! Every record captures the masses, extrema, norms and cumulative integrals
//! the scheme is supposed to control. The audit replays a finished record
//! stream against the structural guarantees: monotone masses, exact
//! conservation of `mass(n) - mass(m)`, the max principle for `m`, the
//! comparison bound for `c`, positivity, bounded cumulative integrals
//! `int(n m) dt` and `int(|grad m|^2) dt`, discrete incompressibility,
//! no-growth boundedness, and terminal convergence to the constant
//! equilibrium state.
//!
//! Norm convention: `w1inf` distances are `max(sup |value|, sup |grad|)`,
//! which is equivalent (as a norm) to the sum of the two and attributes
//! failures to one term cleanly.

use crate::error::{CoreError, Result};
use crate::field::StateSnapshot;
use crate::fluid::div_mac;
use crate::reduce::{grad_linf, integrate, integrate_grad_sq, integrate_product, lp_norm};
use serde::Serialize;
use std::collections::BTreeMap;

/// Everything measured at one time level.
#[derive(Debug, Clone, Serialize)]
pub struct DiagRecord {
    pub t: f64,
    pub mass_n: f64,
    pub mass_m: f64,
    pub mass_c: f64,
    pub linf_n: f64,
    pub linf_m: f64,
    pub linf_c: f64,
    pub linf_u: f64,
    pub l2_u: f64,
    pub l2_m: f64,
    pub w1inf_c: f64,
    pub w1inf_m: f64,
    /// Instantaneous `integral(n m)`.
    pub int_nm: f64,
    /// Instantaneous `integral(|grad m|^2)`.
    pub int_gradm2: f64,
    /// Running `int_0^t integral(n m)` by per-step trapezoid.
    pub cum_nm: f64,
    /// Running `int_0^t integral(|grad m|^2)` by per-step trapezoid.
    pub cum_gradm2: f64,
    pub min_n: f64,
    pub min_m: f64,
    pub min_c: f64,
    pub div_u_inf: f64,
    /// `sup |n - n_inf|`.
    pub dist_n: f64,
    /// `max(sup |c - m_inf|, sup |grad c|)`.
    pub dist_c: f64,
    /// `max(sup |m - m_inf|, sup |grad m|)`.
    pub dist_m: f64,
    /// `sup |u|`.
    pub dist_u: f64,
}

impl DiagRecord {
    /// Fixed CSV column order, shared by the writer and the reader.
    pub const CSV_COLUMNS: &'static [&'static str] = &[
        "t",
        "mass_n",
        "mass_m",
        "mass_c",
        "linf_n",
        "linf_m",
        "linf_c",
        "linf_u",
        "l2_u",
        "l2_m",
        "w1inf_c",
        "w1inf_m",
        "int_nm",
        "int_gradm2",
        "cum_nm",
        "cum_gradm2",
        "min_n",
        "min_m",
        "min_c",
        "div_u_inf",
        "dist_n",
        "dist_c",
        "dist_m",
        "dist_u",
    ];

    pub fn csv_row(&self) -> Vec<f64> {
        vec![
            self.t,
            self.mass_n,
            self.mass_m,
            self.mass_c,
            self.linf_n,
            self.linf_m,
            self.linf_c,
            self.linf_u,
            self.l2_u,
            self.l2_m,
            self.w1inf_c,
            self.w1inf_m,
            self.int_nm,
            self.int_gradm2,
            self.cum_nm,
            self.cum_gradm2,
            self.min_n,
            self.min_m,
            self.min_c,
            self.div_u_inf,
            self.dist_n,
            self.dist_c,
            self.dist_m,
            self.dist_u,
        ]
    }

    pub fn from_csv_row(row: &[f64]) -> Result<Self> {
        if row.len() != Self::CSV_COLUMNS.len() {
            return Err(CoreError::InvalidArgument {
                context: format!(
                    "diag row has {} columns, expected {}",
                    row.len(),
                    Self::CSV_COLUMNS.len()
                ),
            });
        }
        Ok(Self {
            t: row[0],
            mass_n: row[1],
            mass_m: row[2],
            mass_c: row[3],
            linf_n: row[4],
            linf_m: row[5],
            linf_c: row[6],
            linf_u: row[7],
            l2_u: row[8],
            l2_m: row[9],
            w1inf_c: row[10],
            w1inf_m: row[11],
            int_nm: row[12],
            int_gradm2: row[13],
            cum_nm: row[14],
            cum_gradm2: row[15],
            min_n: row[16],
            min_m: row[17],
            min_c: row[18],
            div_u_inf: row[19],
            dist_n: row[20],
            dist_c: row[21],
            dist_m: row[22],
            dist_u: row[23],
        })
    }
}

/// The constant equilibria determined by the initial masses:
/// `n_inf = (mass_n0 - mass_m0)_+ / volume`, `m_inf = (mass_m0 - mass_n0)_+ / volume`.
/// At most one of the two is nonzero.
pub fn equilibrium_targets(mass_n0: f64, mass_m0: f64, volume: f64) -> Result<(f64, f64)> {
    if !(mass_n0 >= 0.0 && mass_m0 >= 0.0) {
        return Err(CoreError::NegativeInput {
            context: format!("equilibrium_targets({mass_n0}, {mass_m0}, ..)"),
        });
    }
    if !(volume > 0.0) {
        return Err(CoreError::InvalidArgument {
            context: format!("volume = {volume} must be positive"),
        });
    }
    let n_inf = ((mass_n0 - mass_m0).max(0.0)) / volume;
    let m_inf = ((mass_m0 - mass_n0).max(0.0)) / volume;
    Ok((n_inf, m_inf))
}

/// Measurement context: the equilibrium targets the distance fields use.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    pub n_inf: f64,
    pub m_inf: f64,
}

impl Diagnostics {
    pub fn new(n_inf: f64, m_inf: f64) -> Self {
        Self { n_inf, m_inf }
    }

    pub fn from_initial_masses(mass_n0: f64, mass_m0: f64, volume: f64) -> Result<Self> {
        let (n_inf, m_inf) = equilibrium_targets(mass_n0, mass_m0, volume)?;
        Ok(Self { n_inf, m_inf })
    }

    /// Fully populates a record from the state. Cumulative integrals advance
    /// from `prev` by the trapezoid rule over `dt_since_prev` (zero for the
    /// first record).
    pub fn record(
        &self,
        state: &StateSnapshot,
        prev: Option<&DiagRecord>,
        dt_since_prev: f64,
    ) -> Result<DiagRecord> {
        state.check_finite()?;
        let n = &state.n;
        let c = &state.c;
        let m = &state.m;

        let int_nm = integrate_product(n, m)?;
        let int_gradm2 = integrate_grad_sq(m)?;
        let (cum_nm, cum_gradm2) = match prev {
            Some(p) => (
                p.cum_nm + 0.5 * dt_since_prev * (p.int_nm + int_nm),
                p.cum_gradm2 + 0.5 * dt_since_prev * (p.int_gradm2 + int_gradm2),
            ),
            None => (0.0, 0.0),
        };

        let linf_c = lp_norm(c, f64::INFINITY)?;
        let linf_m = lp_norm(m, f64::INFINITY)?;
        let grad_c = grad_linf(c)?;
        let grad_m = grad_linf(m)?;
        let div = div_mac(&state.u)?;
        let div_u_inf = div.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));

        let dist_n = n
            .values()
            .iter()
            .map(|v| (v - self.n_inf).abs())
            .fold(0.0f64, f64::max);
        let dist_c_val = c
            .values()
            .iter()
            .map(|v| (v - self.m_inf).abs())
            .fold(0.0f64, f64::max);
        let dist_m_val = m
            .values()
            .iter()
            .map(|v| (v - self.m_inf).abs())
            .fold(0.0f64, f64::max);
        let linf_u = state.u.max_abs();

        Ok(DiagRecord {
            t: state.t,
            mass_n: integrate(n)?,
            mass_m: integrate(m)?,
            mass_c: integrate(c)?,
            linf_n: lp_norm(n, f64::INFINITY)?,
            linf_m,
            linf_c,
            linf_u,
            l2_u: state.u.l2(),
            l2_m: lp_norm(m, 2.0)?,
            w1inf_c: linf_c.max(grad_c),
            w1inf_m: linf_m.max(grad_m),
            int_nm,
            int_gradm2,
            cum_nm,
            cum_gradm2,
            min_n: n.min(),
            min_m: m.min(),
            min_c: c.min(),
            div_u_inf,
            dist_n,
            dist_c: dist_c_val.max(grad_c),
            dist_m: dist_m_val.max(grad_m),
            dist_u: linf_u,
        })
    }
}

/// Tolerances for the audit checks. Values are the structural slacks the
/// scheme guarantees by construction plus roundoff headroom.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditTolerances {
    /// Mass increase allowance per record pair, relative to the initial mass.
    pub mass_slack_rel: f64,
    /// Drift allowance for `mass_n - mass_m`, relative to the initial total.
    pub diff_conserved_rel: f64,
    /// Absolute per-pair increase allowance for `max(m)`.
    pub maxprin_slack: f64,
    /// Absolute allowance above `max(max c0, max m0)` for `max(c)`.
    pub compare_slack: f64,
    /// Positivity floor.
    pub tol_pos: f64,
    /// Absolute headroom for the cumulative integral bounds.
    pub cum_slack: f64,
    /// Max discrete divergence after projection.
    pub tol_proj: f64,
    /// No-growth factor for the boundedness check.
    pub bound_factor: f64,
    /// Terminal distance threshold for the convergence check.
    pub eps_conv: f64,
}

impl Default for AuditTolerances {
    fn default() -> Self {
        Self {
            mass_slack_rel: 1e-12,
            diff_conserved_rel: 1e-10,
            maxprin_slack: 1e-10,
            compare_slack: 1e-10,
            tol_pos: crate::field::TOL_POS,
            cum_slack: 1e-8,
            tol_proj: 1e-8,
            bound_factor: 10.0,
            eps_conv: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst signed violation over the trajectory (negative = margin held).
    pub worst_violation: f64,
    /// Time of the first violation, if any.
    pub t_violation: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    /// Human-readable block, one line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("audit report (w1inf = max(sup|value|, sup|grad|))\n");
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let viol = format!("{:+.3e}", c.worst_violation);
            let at = match c.t_violation {
                Some(t) => format!(" first violation at t = {t:.6}"),
                None => String::new(),
            };
            let note = match &c.note {
                Some(n) => format!(" [{n}]"),
                None => String::new(),
            };
            out.push_str(&format!(
                "{status}  {:<18} worst violation {viol}{at}{note}\n",
                c.name
            ));
        }
        out.push_str(if self.all_passed() {
            "all checks passed\n"
        } else {
            "SOME CHECKS FAILED\n"
        });
        out
    }

    /// Machine-readable JSON object: check name -> {status, worst_violation, t_violation}.
    pub fn to_json(&self) -> String {
        let mut map = BTreeMap::new();
        for c in &self.checks {
            map.insert(
                c.name.to_string(),
                serde_json::json!({
                    "status": if c.passed { "pass" } else { "fail" },
                    "worst_violation": c.worst_violation,
                    "t_violation": c.t_violation,
                    "note": c.note,
                }),
            );
        }
        let doc = serde_json::json!({
            "all_passed": self.all_passed(),
            "checks": map,
        });
        serde_json::to_string_pretty(&doc).expect("audit json")
    }
}

struct CheckAccum {
    name: &'static str,
    worst: f64,
    t_first: Option<f64>,
    note: Option<String>,
}

impl CheckAccum {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst: f64::NEG_INFINITY,
            t_first: None,
            note: None,
        }
    }

    fn observe(&mut self, violation: f64, t: f64) {
        if violation > self.worst {
            self.worst = violation;
        }
        if violation > 0.0 && self.t_first.is_none() {
            self.t_first = Some(t);
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: self.t_first.is_none(),
            worst_violation: if self.worst == f64::NEG_INFINITY {
                0.0
            } else {
                self.worst
            },
            t_violation: self.t_first,
            note: self.note,
        }
    }
}

/// Replays the record stream against every structural check.
///
/// `initial` is the t = 0 record that fixes the reference masses and bounds;
/// `targets` are the equilibrium constants used by the convergence check.
pub fn audit(
    records: &[DiagRecord],
    tol: &AuditTolerances,
    targets: (f64, f64),
    initial: &DiagRecord,
) -> Result<AuditReport> {
    if records.is_empty() {
        return Err(CoreError::InvalidArgument {
            context: "audit: no records".into(),
        });
    }
    for (i, w) in records.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(CoreError::RecordsNotSorted { index: i + 1 });
        }
    }

    let mass_tol_n = tol.mass_slack_rel * initial.mass_n.abs().max(1e-300);
    let mass_tol_m = tol.mass_slack_rel * initial.mass_m.abs().max(1e-300);
    let diff0 = initial.mass_n - initial.mass_m;
    let diff_scale = (initial.mass_n + initial.mass_m).abs().max(1e-300);
    let c_bound = initial.linf_c.max(initial.linf_m);
    let nm_bound = initial.mass_n.min(initial.mass_m) + tol.cum_slack;
    let gradm_bound = 0.5 * initial.l2_m * initial.l2_m + tol.cum_slack;
    let combined0 = initial.linf_n + initial.w1inf_c + initial.w1inf_m + initial.l2_u;
    let bound_guard = tol.bound_factor * combined0.max(1.0);

    let mut mass_n = CheckAccum::new("mass-monotone-n");
    let mut mass_m = CheckAccum::new("mass-monotone-m");
    let mut diff = CheckAccum::new("diff-conserved");
    let mut maxprin = CheckAccum::new("maxprin-m");
    let mut compare = CheckAccum::new("compare-c");
    let mut positivity = CheckAccum::new("positivity");
    let mut cum_nm = CheckAccum::new("cum-nm-bound");
    let mut cum_gradm2 = CheckAccum::new("cum-gradm2-bound");
    let mut div_free = CheckAccum::new("div-free");
    let mut bounded = CheckAccum::new("bounded-no-growth");
    let mut converged = CheckAccum::new("converged-equilibrium");

    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            let p = &records[i - 1];
            mass_n.observe(r.mass_n - p.mass_n - mass_tol_n, r.t);
            mass_m.observe(r.mass_m - p.mass_m - mass_tol_m, r.t);
            maxprin.observe(r.linf_m - p.linf_m - tol.maxprin_slack, r.t);
        }
        diff.observe(
            ((r.mass_n - r.mass_m) - diff0).abs() - tol.diff_conserved_rel * diff_scale,
            r.t,
        );
        compare.observe(r.linf_c - c_bound - tol.compare_slack, r.t);
        positivity.observe(-(r.min_n.min(r.min_m).min(r.min_c)) - tol.tol_pos, r.t);
        cum_nm.observe(r.cum_nm - nm_bound, r.t);
        cum_gradm2.observe(r.cum_gradm2 - gradm_bound, r.t);
        div_free.observe(r.div_u_inf - tol.tol_proj, r.t);
        let combined = r.linf_n + r.w1inf_c + r.w1inf_m + r.l2_u;
        bounded.observe(combined - bound_guard, r.t);
    }

    let last = records.last().expect("nonempty");
    if records.len() == 1 {
        converged.note = Some("single record; convergence not evaluated".into());
        converged.observe(-1.0, last.t);
    } else {
        let final_dist = last.dist_n.max(last.dist_c).max(last.dist_m).max(last.dist_u);
        converged.observe(final_dist - tol.eps_conv, last.t);
        // monotone-tail heuristic over the last 10% of records: reported only
        let tail_start = records.len().saturating_sub(records.len() / 10).min(records.len() - 1);
        let tail_ok = records[tail_start..].iter().all(|r| {
            r.dist_n.max(r.dist_c).max(r.dist_m).max(r.dist_u) <= 2.0 * final_dist.max(tol.eps_conv)
        });
        converged.note = Some(format!(
            "targets (n_inf, m_inf) = ({:.6e}, {:.6e}); final max distance {:.3e}; tail {}",
            targets.0,
            targets.1,
            final_dist,
            if tail_ok { "settled" } else { "still moving" }
        ));
    }

    Ok(AuditReport {
        checks: vec![
            mass_n.finish(),
            mass_m.finish(),
            diff.finish(),
            maxprin.finish(),
            compare.finish(),
            positivity.finish(),
            cum_nm.finish(),
            cum_gradm2.finish(),
            div_free.finish(),
            bounded.finish(),
            converged.finish(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, VectorField};
    use crate::grid::GridSpec;

    #[test]
    fn target_formulas() {
        assert_eq!(equilibrium_targets(2.0, 1.0, 1.0).unwrap(), (1.0, 0.0));
        assert_eq!(equilibrium_targets(1.0, 1.0, 3.7).unwrap(), (0.0, 0.0));
        assert_eq!(equilibrium_targets(1.0, 3.0, 2.0).unwrap(), (0.0, 1.0));
        assert!(equilibrium_targets(-1.0, 0.0, 1.0).is_err());
        assert!(equilibrium_targets(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn target_invariants() {
        for (a, b, v) in [(2.0, 1.0, 1.0), (0.3, 0.9, 2.0), (5.0, 5.0, 0.5)] {
            let (ni, mi) = equilibrium_targets(a, b, v).unwrap();
            assert_eq!(ni * mi, 0.0);
            assert!((v * (ni - mi) - (a - b)).abs() < 1e-12);
        }
    }

    fn equilibrium_state(g: GridSpec, n_inf: f64, t: f64) -> StateSnapshot {
        StateSnapshot::new(
            ScalarField::constant(g, n_inf),
            ScalarField::zeros(g),
            ScalarField::zeros(g),
            VectorField::zeros(g),
            ScalarField::zeros(g),
            t,
        )
        .unwrap()
    }

    #[test]
    fn record_at_equilibrium_has_zero_distances() {
        let g = GridSpec::unit_box(2, 8).unwrap();
        let diag = Diagnostics::new(1.0, 0.0);
        let r = diag.record(&equilibrium_state(g, 1.0, 0.0), None, 0.0).unwrap();
        assert_eq!(r.dist_n, 0.0);
        assert_eq!(r.dist_c, 0.0);
        assert_eq!(r.dist_m, 0.0);
        assert_eq!(r.dist_u, 0.0);
        assert_eq!(r.cum_nm, 0.0);
        assert_eq!(r.cum_gradm2, 0.0);
    }

    #[test]
    fn cumulative_trapezoid_is_exact_for_constants() {
        let g = GridSpec::unit_box(2, 8).unwrap();
        let (a, b) = (0.7, 1.3);
        let state = |t: f64| {
            StateSnapshot::new(
                ScalarField::constant(g, a),
                ScalarField::zeros(g),
                ScalarField::constant(g, b),
                VectorField::zeros(g),
                ScalarField::zeros(g),
                t,
            )
            .unwrap()
        };
        let diag = Diagnostics::new(0.0, 0.0);
        let r0 = diag.record(&state(0.0), None, 0.0).unwrap();
        let dt = 0.25;
        let r1 = diag.record(&state(dt), Some(&r0), dt).unwrap();
        assert!((r1.cum_nm - a * b * dt).abs() < 1e-13);
        assert_eq!(r1.cum_gradm2, 0.0);
    }

    #[test]
    fn audit_passes_on_constant_equilibrium_trajectory() {
        let g = GridSpec::unit_box(2, 8).unwrap();
        let diag = Diagnostics::new(1.0, 0.0);
        let mut records = Vec::new();
        let mut prev: Option<DiagRecord> = None;
        for i in 0..5 {
            let t = i as f64 * 0.1;
            let r = diag
                .record(&equilibrium_state(g, 1.0, t), prev.as_ref(), 0.1)
                .unwrap();
            prev = Some(r.clone());
            records.push(r);
        }
        let report = audit(
            &records,
            &AuditTolerances::default(),
            (1.0, 0.0),
            &records[0],
        )
        .unwrap();
        assert!(report.all_passed(), "{}", report.to_text());
    }

    #[test]
    fn audit_flags_growing_mass_with_first_violation_time() {
        let g = GridSpec::unit_box(2, 8).unwrap();
        let diag = Diagnostics::new(1.0, 0.0);
        let r0 = diag.record(&equilibrium_state(g, 1.0, 0.0), None, 0.0).unwrap();
        let mut r1 = diag.record(&equilibrium_state(g, 1.0, 0.5), Some(&r0), 0.5).unwrap();
        r1.mass_n += 0.25; // synthetic mass gain
        let report = audit(
            &[r0.clone(), r1],
            &AuditTolerances::default(),
            (1.0, 0.0),
            &r0,
        )
        .unwrap();
        let check = report.checks.iter().find(|c| c.name == "mass-monotone-n").unwrap();
        assert!(!check.passed);
        assert_eq!(check.t_violation, Some(0.5));
        // the audit is pure: same input gives the same report
        assert!(!report.all_passed());
    }

    #[test]
    fn audit_rejects_unsorted_records() {
        let g = GridSpec::unit_box(2, 8).unwrap();
        let diag = Diagnostics::new(1.0, 0.0);
        let r0 = diag.record(&equilibrium_state(g, 1.0, 1.0), None, 0.0).unwrap();
        let r1 = diag.record(&equilibrium_state(g, 1.0, 0.5), Some(&r0), 0.5).unwrap();
        assert!(matches!(
            audit(&[r0.clone(), r1], &AuditTolerances::default(), (1.0, 0.0), &r0),
            Err(CoreError::RecordsNotSorted { .. })
        ));
    }

    #[test]
    fn csv_row_roundtrip() {
        let g = GridSpec::unit_box(2, 8).unwrap();
        let diag = Diagnostics::new(1.0, 0.0);
        let r = diag.record(&equilibrium_state(g, 1.0, 0.0), None, 0.0).unwrap();
        let row = r.csv_row();
        assert_eq!(row.len(), DiagRecord::CSV_COLUMNS.len());
        let r2 = DiagRecord::from_csv_row(&row).unwrap();
        assert_eq!(r2.t, r.t);
        assert_eq!(r2.dist_u, r.dist_u);
    }
}
