//! Independent reference solutions: the spatially homogeneous system in
//! closed form, a high-accuracy ODE integrator, manufactured-solution cases
//! with order-of-accuracy extraction, and the plane-channel flow whose exact
//! parabolic profile pins the fluid discretization order.

use crate::error::{CoreError, Result};
use crate::field::{ScalarField, StateSnapshot, VectorField};
use crate::fluid::{StokesSolver, ViscousScheme};
use crate::grid::GridSpec;
use crate::integrator::{run, DiffusionScheme, DtSpec, RunSetup, SchemeConfig, SourceSet};
use crate::sensitivity::FluxLimiter;
use std::f64::consts::PI;

/// One point of the homogeneous (space-independent) system
/// `n' = -n m, c' = -c + m, m' = -m n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousState {
    pub n: f64,
    pub c: f64,
    pub m: f64,
}

fn m_closed_form(n0: f64, m0: f64, t: f64) -> f64 {
    let (lo, hi, m_is_lo) = if n0 >= m0 {
        (m0, n0, true)
    } else {
        (n0, m0, false)
    };
    let d = hi - lo;
    let lo_t = if d == 0.0 {
        lo / (1.0 + lo * t)
    } else {
        let decay = (-d * t).exp();
        let em = -(-d * t).exp_m1();
        d * lo * decay / (d + lo * em)
    };
    if m_is_lo {
        lo_t
    } else {
        lo_t + d
    }
}

/// Adaptive Simpson quadrature with a recursion-based error estimate.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Closed-form homogeneous solution. `n` and `m` come from the exact
/// reaction flow; `c(t) = c0 e^{-t} + int_0^t e^{-(t-s)} m(s) ds` is
/// evaluated by adaptive quadrature to 1e-12 (the integral has no elementary
/// antiderivative once `n0 != m0`).
pub fn homogeneous_exact(n0: f64, m0: f64, c0: f64, t: f64) -> Result<HomogeneousState> {
    if !(n0 >= 0.0 && m0 >= 0.0 && c0 >= 0.0) {
        return Err(CoreError::NegativeInput {
            context: format!("homogeneous_exact({n0}, {m0}, {c0})"),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CoreError::InvalidArgument {
            context: format!("homogeneous_exact: t = {t}"),
        });
    }
    let m_t = m_closed_form(n0, m0, t);
    let n_t = m_t + (n0 - m0);
    // the exponential weight makes anything older than ~60 time units
    // invisible at 1e-12
    let lo = (t - 60.0).max(0.0);
    let integrand = |s: f64| (-(t - s)).exp() * m_closed_form(n0, m0, s);
    let c_t = c0 * (-t).exp() + adaptive_simpson(&integrand, lo, t, 1e-13);
    Ok(HomogeneousState {
        n: n_t.max(0.0),
        c: c_t,
        m: m_t.max(0.0),
    })
}

/// Classical fourth-order Runge-Kutta on the homogeneous three-ODE system.
/// Returns the trajectory including both endpoints.
pub fn ode_reference(
    n0: f64,
    m0: f64,
    c0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, HomogeneousState)>> {
    if !(n0 >= 0.0 && m0 >= 0.0 && c0 >= 0.0) {
        return Err(CoreError::NegativeInput {
            context: format!("ode_reference({n0}, {m0}, {c0})"),
        });
    }
    if !(dt > 0.0 && t_end > 0.0 && dt <= t_end / 100.0) {
        return Err(CoreError::InvalidArgument {
            context: format!("ode_reference: need 0 < dt <= t_end/100, got dt = {dt}, t_end = {t_end}"),
        });
    }
    let deriv = |s: &HomogeneousState| HomogeneousState {
        n: -s.n * s.m,
        c: -s.c + s.m,
        m: -s.m * s.n,
    };
    let add = |a: &HomogeneousState, b: &HomogeneousState, w: f64| HomogeneousState {
        n: a.n + w * b.n,
        c: a.c + w * b.c,
        m: a.m + w * b.m,
    };
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = HomogeneousState { n: n0, c: c0, m: m0 };
    out.push((0.0, y));
    for k in 0..steps {
        let k1 = deriv(&y);
        let k2 = deriv(&add(&y, &k1, 0.5 * dt));
        let k3 = deriv(&add(&y, &k2, 0.5 * dt));
        let k4 = deriv(&add(&y, &k3, dt));
        y = HomogeneousState {
            n: y.n + dt / 6.0 * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n),
            c: y.c + dt / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c),
            m: y.m + dt / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m),
        };
        out.push(((k + 1) as f64 * dt, y));
    }
    Ok(out)
}

/// Least-squares slope of `log e` against `log h` for a refinement series
/// given from coarse to fine.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 2 {
        return Err(CoreError::InvalidErrorTable {
            context: format!("need >= 2 entries, got {}", errors.len()),
        });
    }
    for w in errors.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(CoreError::InvalidErrorTable {
                context: format!("h not strictly decreasing at {} -> {}", w[0].0, w[1].0),
            });
        }
    }
    for &(h, e) in errors {
        if !(h > 0.0 && e > 0.0) {
            return Err(CoreError::InvalidErrorTable {
                context: format!("need positive (h, e), got ({h}, {e})"),
            });
        }
    }
    let n = errors.len() as f64;
    let xs: Vec<f64> = errors.iter().map(|(h, _)| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|(_, e)| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Ok(num / den)
}

/// Built-in manufactured cases. Exact fields satisfy the zero-flux box
/// boundary conditions exactly; sources come from substituting them into the
/// continuous equations (spot-checked numerically in the test suite).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CaseKind {
    /// `n = 2 + cos(pi x) e^{-pi^2 t}` diffusing freely; `c = m = 0`.
    PureDiffusion1d,
    /// Steady cosine profiles driving the flux-limited drift; `m = 0`.
    Chemo1d,
    /// Constant fields that the discrete scheme reproduces exactly.
    SteadyConst1d,
}

pub struct MmsCase {
    pub id: &'static str,
    pub dim: usize,
    pub limiter: FluxLimiter,
    pub t_end: f64,
    pub dt: f64,
    pub default_grids: Vec<usize>,
    kind: CaseKind,
}

const CHEMO_N_BASE: f64 = 2.0;
const CHEMO_N_AMP: f64 = 0.5;
const CHEMO_C_BASE: f64 = 1.0;
const CHEMO_C_AMP: f64 = 0.3;

impl MmsCase {
    pub fn ids() -> &'static [&'static str] {
        &["pure-diffusion-1d", "chemo-1d", "steady-const-1d"]
    }

    pub fn by_id(id: &str) -> Result<Self> {
        match id {
            "pure-diffusion-1d" => Ok(Self {
                id: "pure-diffusion-1d",
                dim: 1,
                limiter: FluxLimiter::prototype(1.0, 1.0)?,
                t_end: 0.05,
                dt: 4e-7,
                default_grids: vec![32, 64, 128],
                kind: CaseKind::PureDiffusion1d,
            }),
            "chemo-1d" => Ok(Self {
                id: "chemo-1d",
                dim: 1,
                limiter: FluxLimiter::prototype(1.0, 1.0)?,
                t_end: 2.0,
                dt: 1e-5,
                default_grids: vec![32, 64, 128],
                kind: CaseKind::Chemo1d,
            }),
            "steady-const-1d" => Ok(Self {
                id: "steady-const-1d",
                dim: 1,
                limiter: FluxLimiter::prototype(1.0, 1.0)?,
                t_end: 0.1,
                dt: 1e-4,
                default_grids: vec![32, 64],
                kind: CaseKind::SteadyConst1d,
            }),
            other => Err(CoreError::UnknownCase { id: other.into() }),
        }
    }

    pub fn exact_n(&self, x: [f64; 3], t: f64) -> f64 {
        match self.kind {
            CaseKind::PureDiffusion1d => 2.0 + (PI * x[0]).cos() * (-PI * PI * t).exp(),
            CaseKind::Chemo1d => CHEMO_N_BASE + CHEMO_N_AMP * (PI * x[0]).cos(),
            CaseKind::SteadyConst1d => 2.0,
        }
    }

    pub fn exact_c(&self, x: [f64; 3], _t: f64) -> f64 {
        match self.kind {
            CaseKind::PureDiffusion1d => 0.0,
            CaseKind::Chemo1d => CHEMO_C_BASE + CHEMO_C_AMP * (PI * x[0]).cos(),
            CaseKind::SteadyConst1d => 0.0,
        }
    }

    pub fn exact_m(&self, _x: [f64; 3], _t: f64) -> f64 {
        0.0
    }

    /// Compensating source terms for the n and c equations. With `m = 0` and
    /// `u = 0` the remaining residuals are:
    ///   s_n = -lap(n*) + div(n* S(|grad c*|^2) grad c*) + n*_t
    ///   s_c = c* - lap(c*)
    /// For the pure-diffusion case both vanish identically.
    pub fn sources(&self) -> Option<SourceSet> {
        match self.kind {
            CaseKind::PureDiffusion1d | CaseKind::SteadyConst1d => None,
            CaseKind::Chemo1d => {
                let lim = self.limiter.clone();
                let s_n = move |x: [f64; 3], _t: f64| -> f64 {
                    let px = PI * x[0];
                    let n = CHEMO_N_BASE + CHEMO_N_AMP * px.cos();
                    let n_p = -CHEMO_N_AMP * PI * px.sin();
                    let n_pp = -CHEMO_N_AMP * PI * PI * px.cos();
                    let c_p = -CHEMO_C_AMP * PI * px.sin();
                    let c_pp = -CHEMO_C_AMP * PI * PI * px.cos();
                    let sigma = c_p * c_p;
                    let s = lim.eval_unchecked(sigma);
                    let s_prime = lim.eval_prime(sigma).expect("prototype limiter");
                    // d/dx [ n S(c'^2) c' ]
                    let flux_prime =
                        n_p * s * c_p + n * s_prime * 2.0 * c_p * c_pp * c_p + n * s * c_pp;
                    -n_pp + flux_prime
                };
                let s_c = |x: [f64; 3], _t: f64| -> f64 {
                    let px = PI * x[0];
                    let c = CHEMO_C_BASE + CHEMO_C_AMP * px.cos();
                    let c_pp = -CHEMO_C_AMP * PI * PI * px.cos();
                    c - c_pp
                };
                Some(SourceSet {
                    n: Some(Box::new(s_n)),
                    c: Some(Box::new(s_c)),
                    m: None,
                })
            }
        }
    }

    pub fn initial_state(&self, grid: GridSpec) -> Result<StateSnapshot> {
        StateSnapshot::new(
            ScalarField::from_fn(grid, |x| self.exact_n(x, 0.0)),
            ScalarField::from_fn(grid, |x| self.exact_c(x, 0.0)),
            ScalarField::from_fn(grid, |x| self.exact_m(x, 0.0)),
            VectorField::zeros(grid),
            ScalarField::zeros(grid),
            0.0,
        )
    }
}

/// Error table entry from one manufactured run.
#[derive(Debug, Clone, Copy)]
pub struct MmsErrors {
    pub h: f64,
    pub dt: f64,
    /// max-norm errors for (n, c, m)
    pub linf: [f64; 3],
    /// L2 errors for (n, c, m)
    pub l2: [f64; 3],
}

/// Integrates a manufactured case on `n_cells` and measures the terminal
/// errors against the exact fields. Structural monitors are disabled: the
/// sources intentionally inject mass.
pub fn mms_run(case: &MmsCase, n_cells: usize, dt: f64, t_end: f64) -> Result<MmsErrors> {
    let grid = GridSpec::unit_box(case.dim, n_cells)?;
    let initial = case.initial_state(grid)?;
    let scheme = SchemeConfig {
        dt: DtSpec::Fixed(dt),
        diffusion: DiffusionScheme::Explicit,
        cfl_safety: 0.8,
        ..SchemeConfig::default()
    };
    let mut setup = RunSetup::new(scheme, case.limiter.clone(), crate::fluid::Potential::Zero, t_end);
    setup.record_every = t_end; // initial and final records only
    setup.monitors = false;
    setup.guard_factor = 1e9;
    setup.sources = case.sources();

    let out = run(initial, &setup)?;
    let state = &out.final_state;
    let t = state.t;
    let vol = grid.cell_volume();

    let mut linf = [0.0f64; 3];
    let mut l2 = [0.0f64; 3];
    for (which, f) in [&state.n, &state.c, &state.m].into_iter().enumerate() {
        let mut worst = 0.0f64;
        let mut sq = 0.0f64;
        for (idx, &v) in f.values().iter().enumerate() {
            let x = grid.cell_center(grid.coords(idx));
            let e = match which {
                0 => v - case.exact_n(x, t),
                1 => v - case.exact_c(x, t),
                _ => v - case.exact_m(x, t),
            };
            worst = worst.max(e.abs());
            sq += e * e;
        }
        linf[which] = worst;
        l2[which] = (sq * vol).sqrt();
    }
    Ok(MmsErrors {
        h: grid.spacing(0),
        dt,
        linf,
        l2,
    })
}

/// Steady plane-channel flow: periodic in x, no-slip walls in y, unit body
/// force along x. The exact profile `u_x = y (1 - y) / 2` is quadratic, so
/// with reflected tangential ghosts the discrete steady state differs from
/// it by a uniform h^2/8 offset; the returned max error shrinks by exactly
/// 4x per grid doubling.
pub fn poiseuille_error(n_cells: usize) -> Result<f64> {
    let grid = GridSpec::unit_box(2, n_cells)?;
    let mut solver =
        StokesSolver::new(grid, 1e-13, 1e-11).with_periodic([true, false, false]);
    let mut force = VectorField::zeros(grid);
    {
        let d = grid.face_dims(0);
        let nx = grid.cells(0);
        let comp = force.component_mut(0);
        for j in 0..d[1] {
            for i in 0..nx {
                comp[grid.face_flat(0, i, j, 0)] = 1.0;
            }
        }
    }
    // backward Euler with a large step: the fixed point is the steady state
    // of the continuous problem regardless of dt
    let dt = 0.2;
    let mut u = VectorField::zeros(grid);
    let mut prev_change = f64::INFINITY;
    for _ in 0..200 {
        let (next, _p) = solver.step(&u, &force, dt, ViscousScheme::ImplicitBe { tol: 1e-13 })?;
        let mut change = 0.0f64;
        for a in 0..2 {
            for (x, y) in next.component(a).iter().zip(u.component(a)) {
                change = change.max((x - y).abs());
            }
        }
        u = next;
        if change <= 1e-14 && prev_change <= 1e-14 {
            break;
        }
        prev_change = change;
    }

    let h = grid.spacing(1);
    let mut worst = 0.0f64;
    let d = grid.face_dims(0);
    let nx = grid.cells(0);
    for j in 0..d[1] {
        let y = (j as f64 + 0.5) * h;
        let exact = 0.5 * y * (1.0 - y);
        for i in 0..nx {
            let v = u.component(0)[grid.face_flat(0, i, j, 0)];
            worst = worst.max((v - exact).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_equal_masses_decay_like_one_over_t() {
        for t in [0.0, 0.5, 1.0, 4.0] {
            let s = homogeneous_exact(1.0, 1.0, 0.0, t).unwrap();
            assert!((s.n - 1.0 / (1.0 + t)).abs() < 1e-14);
            assert!((s.m - 1.0 / (1.0 + t)).abs() < 1e-14);
        }
        let far = homogeneous_exact(1.0, 1.0, 0.0, 1e3).unwrap();
        assert!(far.n < 2e-3 && far.m < 2e-3);
    }

    #[test]
    fn homogeneous_known_point_and_rk4_cross_check() {
        // m(1) = 1/(2e - 1) for (n0, m0) = (2, 1)
        let s = homogeneous_exact(2.0, 1.0, 0.0, 1.0).unwrap();
        let expect = 1.0 / (2.0 * std::f64::consts::E - 1.0);
        assert!((s.m - expect).abs() < 1e-13, "m = {}, want {expect}", s.m);

        let traj = ode_reference(2.0, 1.0, 0.5, 1.0, 1e-5).unwrap();
        let (_, last) = traj.last().unwrap();
        let exact = homogeneous_exact(2.0, 1.0, 0.5, 1.0).unwrap();
        assert!((last.n - exact.n).abs() < 1e-9);
        assert!((last.c - exact.c).abs() < 1e-9);
        assert!((last.m - exact.m).abs() < 1e-9);
    }

    #[test]
    fn rk4_conserves_difference_and_handles_absorbing_state() {
        let traj = ode_reference(1.7, 0.6, 0.2, 10.0, 1e-3).unwrap();
        let d0 = 1.7 - 0.6;
        for (_, s) in &traj {
            assert!(((s.n - s.m) - d0).abs() < 1e-12);
        }
        // n0 = 0: m stays put, c relaxes toward m0
        let traj = ode_reference(0.0, 1.5, 0.0, 10.0, 1e-3).unwrap();
        let (_, last) = traj.last().unwrap();
        assert!((last.m - 1.5).abs() < 1e-12);
        assert!((last.c - 1.5).abs() < 1e-3);
    }

    #[test]
    fn oracle_agreement_on_random_data() {
        let mut seed = 0xfeedu64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 5.0
        };
        for _ in 0..20 {
            let (n0, m0, c0) = (next(), next(), next());
            let traj = ode_reference(n0, m0, c0, 10.0, 5e-4).unwrap();
            for &(t, s) in traj.iter().step_by(4000) {
                let exact = homogeneous_exact(n0, m0, c0, t).unwrap();
                assert!(
                    (s.n - exact.n).abs() < 1e-9
                        && (s.c - exact.c).abs() < 1e-9
                        && (s.m - exact.m).abs() < 1e-9,
                    "disagreement at t = {t} for ({n0}, {m0}, {c0})"
                );
            }
        }
    }

    #[test]
    fn homogeneous_limits_match_equilibrium_targets() {
        let (n_inf, m_inf) = crate::diagnostics::equilibrium_targets(2.0, 1.0, 1.0).unwrap();
        let s = homogeneous_exact(2.0, 1.0, 0.7, 1e3).unwrap();
        assert!((s.n - n_inf).abs() < 1e-6);
        assert!((s.m - m_inf).abs() < 1e-6);
        assert!(s.c < 1e-6);

        let (n_inf, m_inf) = crate::diagnostics::equilibrium_targets(1.0, 3.0, 1.0).unwrap();
        let s = homogeneous_exact(1.0, 3.0, 0.0, 1e3).unwrap();
        assert!((s.n - n_inf).abs() < 1e-6);
        assert!((s.m - m_inf).abs() < 1e-6);
        // c relaxes to the surviving egg density
        assert!((s.c - m_inf).abs() < 1e-6);
    }

    #[test]
    fn convergence_order_examples() {
        let two = convergence_order(&[(0.1, 1e-2), (0.05, 2.5e-3)]).unwrap();
        assert!((two - 2.0).abs() < 1e-12);
        let one = convergence_order(&[(0.1, 1e-2), (0.05, 5e-3)]).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        // three collinear points in log-log space: exact least squares
        let s = convergence_order(&[(0.4, 0.4f64.powf(1.7)), (0.2, 0.2f64.powf(1.7)), (0.1, 0.1f64.powf(1.7))]).unwrap();
        assert!((s - 1.7).abs() < 1e-12);

        assert!(convergence_order(&[(0.1, 1e-2)]).is_err());
        assert!(convergence_order(&[(0.1, 1e-2), (0.2, 1e-3)]).is_err());
        assert!(convergence_order(&[(0.1, 1e-2), (0.05, 0.0)]).is_err());
    }

    #[test]
    fn unknown_case_id_is_an_error() {
        assert!(matches!(
            MmsCase::by_id("no-such-case"),
            Err(CoreError::UnknownCase { .. })
        ));
    }

    #[test]
    fn steady_constants_are_exact_discrete_solutions() {
        let case = MmsCase::by_id("steady-const-1d").unwrap();
        let e = mms_run(&case, 32, case.dt, case.t_end).unwrap();
        assert!(e.linf.iter().all(|&v| v <= 1e-12), "{:?}", e.linf);
    }

    #[test]
    fn chemo_sources_satisfy_the_continuous_equations() {
        // spot-check the hand-derived sources with high-order finite
        // differences of the composite flux at random interior points
        let case = MmsCase::by_id("chemo-1d").unwrap();
        let lim = case.limiter.clone();
        let n_of = |x: f64| CHEMO_N_BASE + CHEMO_N_AMP * (PI * x).cos();
        let c_of = |x: f64| CHEMO_C_BASE + CHEMO_C_AMP * (PI * x).cos();
        let c_p = |x: f64| -CHEMO_C_AMP * PI * (PI * x).sin();
        let flux = |x: f64| n_of(x) * lim.eval_unchecked(c_p(x) * c_p(x)) * c_p(x);
        let sources = case.sources().unwrap();
        let s_n = sources.n.as_ref().unwrap();
        let s_c = sources.c.as_ref().unwrap();

        let h = 1e-3;
        for &x in &[0.13, 0.27, 0.5, 0.62, 0.88] {
            // 4th-order first and second derivatives
            let d1 = |f: &dyn Fn(f64) -> f64| {
                (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
            };
            let d2 = |f: &dyn Fn(f64) -> f64| {
                (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h)
                    - f(x - 2.0 * h))
                    / (12.0 * h * h)
            };
            let res_n = -d2(&n_of) + d1(&flux) - s_n([x, 0.0, 0.0], 0.0);
            assert!(res_n.abs() < 1e-6, "n residual {res_n} at x = {x}");
            let res_c = c_of(x) - d2(&c_of) - s_c([x, 0.0, 0.0], 0.0);
            assert!(res_c.abs() < 1e-6, "c residual {res_c} at x = {x}");
        }
    }

    #[test]
    fn poiseuille_profile_second_order() {
        let e16 = poiseuille_error(16).unwrap();
        let e32 = poiseuille_error(32).unwrap();
        // discrete steady state sits a uniform f h^2 / 8 above the parabola
        assert!((e16 - 1.0 / (8.0 * 256.0)).abs() < 1e-6, "e16 = {e16}");
        let ratio = e16 / e32;
        assert!(ratio >= 3.5, "expected ~4x reduction, got {ratio}");
    }
}
