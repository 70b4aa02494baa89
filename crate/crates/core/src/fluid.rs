//! The time-dependent Stokes sub-problem on the MAC grid:
//! `u_t = lap(u) + grad(P) + (n + m) grad(phi)`, `div(u) = 0`, no-slip walls.
//!
//! One step is a Chorin projection: a tentative viscous update (explicit or
//! backward Euler) followed by a pressure Poisson solve that pushes the
//! velocity back onto the discretely divergence-free subspace. The Poisson
//! solve is matrix-free conjugate gradients on the reflected Neumann
//! Laplacian restricted to mean-zero functions, with an optional Jacobi
//! preconditioner and warm starts from the previous pressure.
//!
//! Channel support: the stencil kernels accept a per-axis periodic mask so
//! the plane-channel verification flow (periodic in x, no-slip in y) runs
//! through the same code paths. For a periodic component the face array's
//! redundant last slot is kept at zero and never read; all neighbor lookups
//! wrap modulo the owned face count.

use crate::error::{CoreError, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::operators::{apply_scalar_laplacian, PeriodicMask, NO_WRAP};
use crate::sum::{dot, pairwise_sum};

/// Gravitational potential. Affine potentials have a constant gradient,
/// which keeps the buoyancy force exactly curl-free once the density
/// flattens, so the projection drives the flow to rest at equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Zero,
    /// `phi = g . x`
    Linear { g: [f64; 3] },
}

impl Potential {
    pub fn gradient(&self) -> [f64; 3] {
        match self {
            Potential::Zero => [0.0; 3],
            Potential::Linear { g } => *g,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gradient().iter().all(|&g| g == 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PoissonSolveReport {
    pub iterations: usize,
    /// Final residual relative to the right-hand side norm.
    pub residual: f64,
    pub converged: bool,
}

/// Viscous sub-step discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViscousScheme {
    /// Forward Euler; requires `dt <= 1 / (4 sum 1/h_i^2)`.
    Explicit,
    /// Backward Euler via CG with the given relative tolerance; no CFL limit.
    ImplicitBe { tol: f64 },
}

pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Global iteration counter for performance diagnostics only; never feeds
/// back into the computation.
static CG_ITERATIONS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

#[doc(hidden)]
pub fn cg_iterations_total() -> u64 {
    CG_ITERATIONS.load(std::sync::atomic::Ordering::Relaxed)
}

/// Preconditioned conjugate gradients for SPD (or PSD on the orthogonal
/// complement of a handled nullspace) matrix-free operators. Deterministic:
/// every inner product is a fixed-structure pairwise sum.
pub(crate) fn pcg<A: Fn(&[f64], &mut [f64])>(
    apply: A,
    b: &[f64],
    x: &mut [f64],
    inv_diag: Option<&[f64]>,
    tol_rel: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return CgOutcome {
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
        };
    }

    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let precond = |r: &[f64], z: &mut Vec<f64>| {
        z.clear();
        match inv_diag {
            Some(d) => z.extend(r.iter().zip(d).map(|(ri, di)| ri * di)),
            None => z.extend_from_slice(r),
        }
    };
    let mut z = Vec::with_capacity(n);
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut r_norm = dot(&r, &r).sqrt();
    if r_norm <= tol_rel * b_norm {
        return CgOutcome {
            iterations: 0,
            rel_residual: r_norm / b_norm,
            converged: true,
        };
    }

    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // direction with no positive curvature: nullspace component or
            // breakdown; stop and report whatever residual we reached
            CG_ITERATIONS.fetch_add((it - 1) as u64, std::sync::atomic::Ordering::Relaxed);
            return CgOutcome {
                iterations: it - 1,
                rel_residual: r_norm / b_norm,
                converged: r_norm <= tol_rel * b_norm,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = dot(&r, &r).sqrt();
        if r_norm <= tol_rel * b_norm {
            CG_ITERATIONS.fetch_add(it as u64, std::sync::atomic::Ordering::Relaxed);
            return CgOutcome {
                iterations: it,
                rel_residual: r_norm / b_norm,
                converged: true,
            };
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CG_ITERATIONS.fetch_add(max_iter as u64, std::sync::atomic::Ordering::Relaxed);
    CgOutcome {
        iterations: max_iter,
        rel_residual: r_norm / b_norm,
        converged: false,
    }
}

/// Iteration budget for the pressure solve: ten times the geometric-mean
/// cell count per axis, clamped to a sane range.
pub(crate) fn poisson_max_iter(grid: &GridSpec) -> usize {
    let mut prod = 1.0f64;
    for a in 0..grid.dim() {
        prod *= grid.cells(a) as f64;
    }
    let geo = prod.powf(1.0 / grid.dim() as f64);
    ((10.0 * geo).ceil() as usize).clamp(200, 50_000)
}

fn subtract_mean(v: &mut [f64]) {
    let mean = pairwise_sum(v) / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn neumann_inv_diag(grid: &GridSpec, periodic: PeriodicMask) -> Vec<f64> {
    // diagonal of -lap with reflected boundaries: a missing neighbor
    // contributes nothing in non-periodic directions
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    let mut d = vec![0.0; grid.cell_count()];
    for (idx, slot) in d.iter_mut().enumerate() {
        let mut i3 = [idx % nx, (idx / nx) % ny, idx / (nx * ny)];
        i3[1] %= ny.max(1);
        let mut diag = 0.0;
        for a in 0..grid.dim() {
            let na = grid.cells(a);
            let inv_h2 = 1.0 / (grid.spacing(a) * grid.spacing(a));
            let mut neighbors = 2.0;
            if !periodic[a] {
                if i3[a] == 0 {
                    neighbors -= 1.0;
                }
                if i3[a] == na - 1 {
                    neighbors -= 1.0;
                }
            }
            diag += neighbors * inv_h2;
        }
        *slot = if diag > 0.0 { 1.0 / diag } else { 0.0 };
    }
    d
}

/// Internal mean-zero Neumann Poisson solve `lap(phi) = rhs` with warm start.
pub(crate) fn poisson_neumann_raw(
    grid: &GridSpec,
    periodic: PeriodicMask,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    jacobi: bool,
) -> CgOutcome {
    // solve (-lap) phi = -rhs; subtract means for compatibility and gauge
    let mut b: Vec<f64> = rhs.iter().map(|v| -v).collect();
    subtract_mean(&mut b);
    subtract_mean(x);
    let inv_diag = jacobi.then(|| neumann_inv_diag(grid, periodic));
    let outcome = pcg(
        |src, dst| {
            apply_scalar_laplacian(grid, periodic, src, dst);
            for v in dst.iter_mut() {
                *v = -*v;
            }
        },
        &b,
        x,
        inv_diag.as_deref(),
        tol,
        max_iter,
    );
    subtract_mean(x);
    outcome
}

/// Mean-zero pressure Poisson solve on the sealed box:
/// returns `phi` with `lap(phi) ~ rhs` and the solver report.
pub fn poisson_solve_neumann(rhs: &ScalarField, tol: f64) -> Result<(ScalarField, PoissonSolveReport)> {
    rhs.check_finite("poisson_solve_neumann")?;
    let grid = *rhs.grid();
    let mut x = vec![0.0; grid.cell_count()];
    let outcome = poisson_neumann_raw(
        &grid,
        NO_WRAP,
        rhs.values(),
        &mut x,
        tol,
        poisson_max_iter(&grid),
        false,
    );
    let report = PoissonSolveReport {
        iterations: outcome.iterations,
        residual: outcome.rel_residual,
        converged: outcome.converged,
    };
    if !outcome.converged {
        return Err(CoreError::PoissonDiverged {
            iterations: outcome.iterations,
            residual: outcome.rel_residual,
        });
    }
    Ok((ScalarField::from_values(grid, x)?, report))
}

#[inline]
fn face_idx(d: &[usize; 3], c: [usize; 3]) -> usize {
    c[0] + d[0] * (c[1] + d[1] * c[2])
}

/// dst = lap(src) for MAC component `comp_axis`. Boundary-normal faces are
/// pinned (output 0); tangential walls use sign-flipped reflection ghosts.
pub(crate) fn apply_mac_laplacian(
    grid: &GridSpec,
    comp_axis: usize,
    periodic: PeriodicMask,
    src: &[f64],
    dst: &mut [f64],
) {
    let d = grid.face_dims(comp_axis);
    let na = grid.cells(comp_axis);
    let dim = grid.dim();
    let inv_h2 = [
        1.0 / (grid.spacing(0) * grid.spacing(0)),
        1.0 / (grid.spacing(1) * grid.spacing(1)),
        1.0 / (grid.spacing(2) * grid.spacing(2)),
    ];

    crate::sum::for_each_line_mut(dst, d[0], |line, out| {
        let j = line % d[1];
        let k = line / d[1];
        for (i, slot) in out.iter_mut().enumerate() {
            let fc = [i, j, k];
            let fa = fc[comp_axis];
            if periodic[comp_axis] {
                if fa >= na {
                    *slot = 0.0; // unused redundant slot
                    continue;
                }
            } else if fa == 0 || fa == na {
                *slot = 0.0; // pinned no-slip face
                continue;
            }
            let here = src[face_idx(&d, fc)];
            let mut acc = 0.0;
            for b in 0..dim {
                let fb = fc[b];
                let (lo, hi) = if b == comp_axis {
                    let hi = if periodic[b] {
                        let mut hc = fc;
                        hc[b] = (fb + 1) % na;
                        src[face_idx(&d, hc)]
                    } else {
                        let mut hc = fc;
                        hc[b] = fb + 1;
                        src[face_idx(&d, hc)]
                    };
                    let lo = if periodic[b] {
                        let mut lc = fc;
                        lc[b] = (fb + na - 1) % na;
                        src[face_idx(&d, lc)]
                    } else {
                        let mut lc = fc;
                        lc[b] = fb - 1;
                        src[face_idx(&d, lc)]
                    };
                    (lo, hi)
                } else {
                    let nb = d[b];
                    let hi = if fb + 1 < nb {
                        let mut hc = fc;
                        hc[b] = fb + 1;
                        src[face_idx(&d, hc)]
                    } else if periodic[b] {
                        let mut hc = fc;
                        hc[b] = 0;
                        src[face_idx(&d, hc)]
                    } else {
                        -here
                    };
                    let lo = if fb > 0 {
                        let mut lc = fc;
                        lc[b] = fb - 1;
                        src[face_idx(&d, lc)]
                    } else if periodic[b] {
                        let mut lc = fc;
                        lc[b] = nb - 1;
                        src[face_idx(&d, lc)]
                    } else {
                        -here
                    };
                    (lo, hi)
                };
                acc += (hi - 2.0 * here + lo) * inv_h2[b];
            }
            *slot = acc;
        }
    });
}

pub(crate) fn div_mac_raw(grid: &GridSpec, periodic: PeriodicMask, u: &VectorField) -> Vec<f64> {
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    let mut out = vec![0.0; grid.cell_count()];
    for a in 0..grid.dim() {
        let na = grid.cells(a);
        let inv_h = 1.0 / grid.spacing(a);
        let comp = u.component(a);
        crate::sum::for_each_line_mut(&mut out, nx, |line, row| {
            let j = line % ny;
            let k = line / ny;
            for (i, slot) in row.iter_mut().enumerate() {
                let c = [i, j, k];
                let lo = comp[grid.face_flat(a, c[0], c[1], c[2])];
                let mut hc = c;
                hc[a] += 1;
                if periodic[a] {
                    hc[a] %= na;
                }
                let hi = comp[grid.face_flat(a, hc[0], hc[1], hc[2])];
                *slot += (hi - lo) * inv_h;
            }
        });
    }
    out
}

/// Per-cell face-difference divergence of a MAC velocity on the sealed box;
/// exactly the operator whose kernel the projection targets.
pub fn div_mac(u: &VectorField) -> Result<ScalarField> {
    u.check_finite("div_mac")?;
    let grid = *u.grid();
    let out = div_mac_raw(&grid, NO_WRAP, u);
    ScalarField::from_values(grid, out)
}

/// Face-centered buoyancy force `(n + m)` averaged to faces times the
/// face-normal component of `grad(phi)`; zero on boundary faces.
pub fn buoyancy_force(n: &ScalarField, m: &ScalarField, phi: &Potential) -> Result<VectorField> {
    if n.grid() != m.grid() {
        return Err(CoreError::GridMismatch {
            context: "buoyancy_force: n and m grids differ".into(),
        });
    }
    n.check_finite("buoyancy_force")?;
    m.check_finite("buoyancy_force")?;
    let grid = *n.grid();
    let g = phi.gradient();
    let mut out = VectorField::zeros(grid);
    let nv = n.values();
    let mv = m.values();
    for a in 0..grid.dim() {
        if g[a] == 0.0 {
            continue;
        }
        let d = grid.face_dims(a);
        let na = grid.cells(a);
        let s = grid.stride(a);
        let ga = g[a];
        let comp = out.component_mut(a);
        crate::sum::for_each_line_mut(comp, d[0], |line, row| {
            let j = line % d[1];
            let k = line / d[1];
            for (i, slot) in row.iter_mut().enumerate() {
                let fc = [i, j, k];
                let fa = fc[a];
                if fa == 0 || fa == na {
                    *slot = 0.0;
                    continue;
                }
                let mut lc = fc;
                lc[a] -= 1;
                let left = grid.flat(lc[0], lc[1], lc[2]);
                let w = 0.5 * (nv[left] + mv[left] + nv[left + s] + mv[left + s]);
                *slot = w * ga;
            }
        });
    }
    Ok(out)
}

/// Stateful Stokes stepper carrying the pressure warm start and solver knobs.
#[derive(Debug, Clone)]
pub struct StokesSolver {
    grid: GridSpec,
    periodic: PeriodicMask,
    pressure_ws: Vec<f64>,
    pressure_prev: Vec<f64>,
    pub tol_poisson: f64,
    pub tol_proj: f64,
    pub jacobi: bool,
}

impl StokesSolver {
    pub fn new(grid: GridSpec, tol_poisson: f64, tol_proj: f64) -> Self {
        Self {
            grid,
            periodic: NO_WRAP,
            pressure_ws: vec![0.0; grid.cell_count()],
            pressure_prev: vec![0.0; grid.cell_count()],
            tol_poisson,
            tol_proj,
            jacobi: false,
        }
    }

    pub(crate) fn with_periodic(mut self, periodic: PeriodicMask) -> Self {
        self.periodic = periodic;
        self
    }

    /// Largest stable dt for the explicit viscous update.
    pub fn viscous_limit(&self) -> f64 {
        let mut inv = 0.0;
        for a in 0..self.grid.dim() {
            let h = self.grid.spacing(a);
            inv += 1.0 / (h * h);
        }
        1.0 / (4.0 * inv)
    }

    fn enforce_pinned(&self, u: &mut VectorField) {
        if self.periodic == NO_WRAP {
            u.enforce_noslip();
        } else {
            // zero the pinned non-periodic boundary faces and the redundant
            // slots of periodic components
            let grid = self.grid;
            for a in 0..grid.dim() {
                let d = grid.face_dims(a);
                let na = grid.cells(a);
                let periodic = self.periodic;
                let comp = u.component_mut(a);
                for k in 0..d[2] {
                    for j in 0..d[1] {
                        for i in 0..d[0] {
                            let fc = [i, j, k];
                            let fa = fc[a];
                            let kill = if periodic[a] { fa >= na } else { fa == 0 || fa == na };
                            if kill {
                                comp[face_idx(&d, fc)] = 0.0;
                            }
                        }
                    }
                }
            }
        }
    }

    /// One Chorin step: tentative viscous update with the given scheme, then
    /// projection. Returns the new velocity and the pressure `P = phi`.
    pub fn step(
        &mut self,
        u: &VectorField,
        force: &VectorField,
        dt: f64,
        scheme: ViscousScheme,
    ) -> Result<(VectorField, ScalarField)> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CoreError::InvalidArgument {
                context: format!("stokes_step: dt = {dt}"),
            });
        }
        u.check_finite("stokes_step: u")?;
        force.check_finite("stokes_step: force")?;
        let grid = self.grid;
        let mut star = VectorField::zeros(grid);

        match scheme {
            ViscousScheme::Explicit => {
                let limit = self.viscous_limit();
                if dt > limit * (1.0 + 1e-12) {
                    return Err(CoreError::ViscousCfl { dt, limit });
                }
                for a in 0..grid.dim() {
                    let mut lap = vec![0.0; grid.face_count(a)];
                    apply_mac_laplacian(&grid, a, self.periodic, u.component(a), &mut lap);
                    let fa = force.component(a);
                    let ua = u.component(a);
                    let out = star.component_mut(a);
                    for i in 0..out.len() {
                        out[i] = ua[i] + dt * (lap[i] + fa[i]);
                    }
                }
            }
            ViscousScheme::ImplicitBe { tol } => {
                for a in 0..grid.dim() {
                    let fa = force.component(a);
                    if self.periodic == NO_WRAP {
                        // sealed box: factored direct solve, and the force
                        // impulse is added after it. A force that is a
                        // discrete gradient (hydrostatic buoyancy over a flat
                        // density) then falls exactly to the projection and
                        // the fluid settles to rest.
                        let mut b = u.component(a).to_vec();
                        crate::tridiag::diffuse_component_be(&grid, a, dt, &mut b);
                        for (v, f) in b.iter_mut().zip(fa) {
                            *v += dt * f;
                        }
                        star.component_mut(a).copy_from_slice(&b);
                    } else {
                        // periodic channel: unfactored backward Euler via CG
                        // with the force inside the solve, whose fixed point
                        // is the exact discrete steady channel flow
                        let mut b = u.component(a).to_vec();
                        for (v, f) in b.iter_mut().zip(fa) {
                            *v += dt * f;
                        }
                        let mut x = b.clone();
                        let outcome = pcg(
                            |src, dst| {
                                apply_mac_laplacian(&grid, a, self.periodic, src, dst);
                                for i in 0..dst.len() {
                                    dst[i] = src[i] - dt * dst[i];
                                }
                            },
                            &b,
                            &mut x,
                            None,
                            tol,
                            poisson_max_iter(&grid).max(500),
                        );
                        if !outcome.converged {
                            return Err(CoreError::PoissonDiverged {
                                iterations: outcome.iterations,
                                residual: outcome.rel_residual,
                            });
                        }
                        star.component_mut(a).copy_from_slice(&x);
                    }
                }
            }
        }
        self.enforce_pinned(&mut star);
        let p = self.project(&mut star, dt)?;
        Ok((star, p))
    }

    /// Projects `u` onto the discretely divergence-free subspace; returns the
    /// accumulated mean-zero potential `phi` (scaled so the correction is
    /// `dt * grad(phi)`).
    ///
    /// The solver tolerance is divergence-targeted: after the correction,
    /// `|div u|_inf <= dt * |residual|_2 <= dt * tol * |rhs|_2`, so solving to
    /// `tol = tol_proj / (4 dt |rhs|_2)` reaches the target in one pass
    /// without over-resolving; the divergence is re-measured and the solve
    /// repeated if roundoff ate the margin.
    pub fn project(&mut self, u: &mut VectorField, dt: f64) -> Result<ScalarField> {
        let grid = self.grid;
        let mut phi_total = vec![0.0; grid.cell_count()];
        for attempt in 0..4 {
            let mut div = div_mac_raw(&grid, self.periodic, u);
            let worst = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if worst <= self.tol_proj {
                break;
            }
            for v in div.iter_mut() {
                *v /= dt;
            }
            let b_norm = dot(&div, &div).sqrt();
            let tol = (self.tol_proj / (4.0 * dt * b_norm)).clamp(1e-14, 0.1);
            // linear-in-time extrapolation of the two previous pressures is
            // an excellent initial guess while the flow evolves smoothly
            let mut phi = if attempt == 0 {
                let mut guess = self.pressure_ws.clone();
                for (x, p) in guess.iter_mut().zip(&self.pressure_prev) {
                    *x = 2.0 * *x - *p;
                }
                guess
            } else {
                vec![0.0; grid.cell_count()]
            };
            let outcome = poisson_neumann_raw(
                &grid,
                self.periodic,
                &div,
                &mut phi,
                tol,
                poisson_max_iter(&grid),
                self.jacobi,
            );
            if !outcome.converged {
                return Err(CoreError::PoissonDiverged {
                    iterations: outcome.iterations,
                    residual: outcome.rel_residual,
                });
            }
            self.correct_velocity(u, &phi, dt);
            for (t, p) in phi_total.iter_mut().zip(&phi) {
                *t += p;
            }
            if attempt == 0 {
                self.pressure_prev = std::mem::replace(&mut self.pressure_ws, phi);
            }
        }
        let div = div_mac_raw(&grid, self.periodic, u);
        let worst = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > self.tol_proj {
            return Err(CoreError::PoissonDiverged {
                iterations: 0,
                residual: worst,
            });
        }
        ScalarField::from_values(grid, phi_total)
    }

    fn correct_velocity(&self, u: &mut VectorField, phi: &[f64], dt: f64) {
        let grid = self.grid;
        for a in 0..grid.dim() {
            let d = grid.face_dims(a);
            let na = grid.cells(a);
            let s = grid.stride(a);
            let inv_h = 1.0 / grid.spacing(a);
            let periodic = self.periodic[a];
            let comp = u.component_mut(a);
            crate::sum::for_each_line_mut(comp, d[0], |line, row| {
                let j = line % d[1];
                let k = line / d[1];
                for (i, slot) in row.iter_mut().enumerate() {
                    let fc = [i, j, k];
                    let fa = fc[a];
                    let grad = if periodic {
                        if fa >= na {
                            continue; // redundant slot stays zero
                        }
                        // face fa sits between cells fa-1 (wrapped) and fa
                        let mut rc = fc;
                        rc[a] = fa;
                        let right = grid.flat(rc[0], rc[1], rc[2]);
                        let left = if fa == 0 {
                            let mut lc = fc;
                            lc[a] = na - 1;
                            grid.flat(lc[0], lc[1], lc[2])
                        } else {
                            right - s
                        };
                        (phi[right] - phi[left]) * inv_h
                    } else {
                        if fa == 0 || fa == na {
                            continue; // no correction through walls
                        }
                        let mut lc = fc;
                        lc[a] -= 1;
                        let left = grid.flat(lc[0], lc[1], lc[2]);
                        (phi[left + s] - phi[left]) * inv_h
                    };
                    *slot -= dt * grad;
                }
            });
        }
    }
}

/// Single explicit Chorin step with a cold pressure start: tentative
/// `u* = u + dt (lap u + force)`, then projection. Returns the projected
/// velocity and `P = phi`.
pub fn stokes_step(
    u: &VectorField,
    force: &VectorField,
    dt: f64,
    tol: f64,
) -> Result<(VectorField, ScalarField)> {
    let mut solver = StokesSolver::new(*u.grid(), tol, 1e-8);
    solver.step(u, force, dt, ViscousScheme::Explicit)
}
