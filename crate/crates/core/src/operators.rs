//! Discrete spatial operators on the box grid.
//!
//! Scalars use ghost-cell reflection (zero normal derivative) so every
//! boundary face carries zero flux; all divergence-form operators therefore
//! telescope to exactly zero total mass change. Advective and chemotactic
//! fluxes are first-order upwind, which is what makes the positivity and
//! max-principle monitors hold by construction.

use crate::error::{CoreError, Result};
use crate::field::{FaceFlux, ScalarField, VectorField, TOL_POS};
use crate::grid::GridSpec;
use crate::sensitivity::FluxLimiter;

/// Per-axis periodic wrap mask for the shared stencil kernels. The public
/// operators are all on the sealed Neumann/no-slip box (no wrap); the
/// channel-flow verification path enables wrap along one axis.
pub(crate) type PeriodicMask = [bool; 3];

pub(crate) const NO_WRAP: PeriodicMask = [false; 3];

/// dst = lap(src) with reflected (zero-flux) boundaries, optionally periodic
/// along masked axes. Written line-by-line so the inner x loop stays tight.
pub(crate) fn apply_scalar_laplacian(
    grid: &GridSpec,
    periodic: PeriodicMask,
    src: &[f64],
    dst: &mut [f64],
) {
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    let nz = grid.cells(2);
    // flux form: each axis contributes ((f_r - f) ih - (f - f_l) ih) ih,
    // bit-identical to div_face_to_cc(grad_cc_to_face(f))
    let inv_h = [
        1.0 / grid.spacing(0),
        1.0 / grid.spacing(1),
        1.0 / grid.spacing(2),
    ];
    let dim = grid.dim();

    crate::sum::for_each_line_mut(dst, nx, |line, out| {
        let j = line % ny;
        let k = line / ny;
        let base = line * nx;
        let row = &src[base..base + nx];

        // axis 0 within the line: boundary cells split out so the interior
        // loop stays branch-free
        let ih = inv_h[0];
        {
            let first_l = if periodic[0] { (row[0] - row[nx - 1]) * ih } else { 0.0 };
            let first_r = (row[1] - row[0]) * ih;
            out[0] = (first_r - first_l) * ih;
            for i in 1..nx - 1 {
                let flux_r = (row[i + 1] - row[i]) * ih;
                let flux_l = (row[i] - row[i - 1]) * ih;
                out[i] = (flux_r - flux_l) * ih;
            }
            let last_r = if periodic[0] { (row[0] - row[nx - 1]) * ih } else { 0.0 };
            let last_l = (row[nx - 1] - row[nx - 2]) * ih;
            out[nx - 1] = (last_r - last_l) * ih;
        }

        // axes 1 and 2: neighbor offsets are uniform along the line
        for b in 1..dim {
            let (pos, extent, s) = if b == 1 { (j, ny, nx) } else { (k, nz, nx * ny) };
            let ih = inv_h[b];
            let up_off: isize = if pos + 1 < extent {
                s as isize
            } else if periodic[b] {
                -((extent - 1) as isize * s as isize)
            } else {
                0
            };
            let down_off: isize = if pos > 0 {
                -(s as isize)
            } else if periodic[b] {
                (extent - 1) as isize * s as isize
            } else {
                0
            };
            match (up_off != 0, down_off != 0) {
                (true, true) => {
                    let up = &src[(base as isize + up_off) as usize..];
                    let down = &src[(base as isize + down_off) as usize..];
                    for i in 0..nx {
                        let flux_r = (up[i] - row[i]) * ih;
                        let flux_l = (row[i] - down[i]) * ih;
                        out[i] += (flux_r - flux_l) * ih;
                    }
                }
                (true, false) => {
                    let up = &src[(base as isize + up_off) as usize..];
                    for i in 0..nx {
                        out[i] += (up[i] - row[i]) * ih * ih;
                    }
                }
                (false, true) => {
                    let down = &src[(base as isize + down_off) as usize..];
                    for i in 0..nx {
                        out[i] += -(row[i] - down[i]) * ih * ih;
                    }
                }
                (false, false) => {}
            }
        }
    });
}

/// Standard 2*dim+1 point Laplacian with zero-flux boundaries. The output
/// integrates to exactly zero (up to summation roundoff) because interior
/// face fluxes cancel pairwise and boundary fluxes vanish.
pub fn laplacian_neumann(f: &ScalarField) -> Result<ScalarField> {
    f.check_finite("laplacian_neumann")?;
    let grid = *f.grid();
    let mut out = ScalarField::zeros(grid);
    apply_scalar_laplacian(&grid, NO_WRAP, f.values(), out.values_mut());
    Ok(out)
}

/// Centered difference of a cell field across each interior face; boundary
/// faces are zero (the no-flux value).
pub fn grad_cc_to_face(f: &ScalarField) -> Result<FaceFlux> {
    f.check_finite("grad_cc_to_face")?;
    let grid = *f.grid();
    let src = f.values();
    let mut out = FaceFlux::zeros(grid);
    for a in 0..grid.dim() {
        let d = grid.face_dims(a);
        let na = grid.cells(a);
        let s = grid.stride(a);
        let inv_h = 1.0 / grid.spacing(a);
        let comp = out.component_mut(a);
        crate::sum::for_each_line_mut(comp, d[0], |line, row| {
            // face lines run along x; decompose the line into (j, k)
            let j = line % d[1];
            let k = line / d[1];
            for (i, slot) in row.iter_mut().enumerate() {
                let fa = [i, j, k][a];
                if fa == 0 || fa == na {
                    *slot = 0.0;
                } else {
                    // cell right of the face minus cell left of it
                    let mut cc = [i, j, k];
                    cc[a] -= 1;
                    let left = grid.flat(cc[0], cc[1], cc[2]);
                    *slot = (src[left + s] - src[left]) * inv_h;
                }
            }
        });
    }
    Ok(out)
}

/// Per-cell sum of (outflux - influx)/h per axis. Integrates to exactly zero
/// whenever the boundary fluxes are zero, which [`FaceFlux`] guarantees.
pub fn div_face_to_cc(flux: &FaceFlux) -> Result<ScalarField> {
    let grid = *flux.grid();
    let mut out = ScalarField::zeros(grid);
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    for a in 0..grid.dim() {
        let d = grid.face_dims(a);
        let inv_h = 1.0 / grid.spacing(a);
        let comp = flux.component(a);
        crate::sum::for_each_line_mut(out.values_mut(), nx, |line, row| {
                let j = line % ny;
                let k = line / ny;
                for (i, slot) in row.iter_mut().enumerate() {
                    let c = [i, j, k];
                    let lo = grid.face_flat(a, c[0], c[1], c[2]);
                    let mut hi_c = c;
                    hi_c[a] += 1;
                    let hi = grid.face_flat(a, hi_c[0], hi_c[1], hi_c[2]);
                    debug_assert!(hi < d[0] * d[1] * d[2]);
                    *slot += (comp[hi] - comp[lo]) * inv_h;
                }
            });
    }
    out.check_finite("div_face_to_cc")?;
    Ok(out)
}

/// Conservative upwind advection: returns `div(u f)` using first-order
/// upwind face values of `f` against the face-normal velocity. Total mass of
/// the output is exactly zero since boundary-normal velocities vanish.
pub fn advect_conservative(f: &ScalarField, u: &VectorField) -> Result<ScalarField> {
    if f.grid() != u.grid() {
        return Err(CoreError::GridMismatch {
            context: "advect_conservative: field and velocity grids differ".into(),
        });
    }
    f.check_finite("advect_conservative")?;
    let grid = *f.grid();
    let src = f.values();
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    let mut out = ScalarField::zeros(grid);

    for a in 0..grid.dim() {
        let na = grid.cells(a);
        let s = grid.stride(a);
        let inv_h = 1.0 / grid.spacing(a);
        let vel = u.component(a);
        crate::sum::for_each_line_mut(out.values_mut(), nx, |line, row| {
                let j = line % ny;
                let k = line / ny;
                for (i, slot) in row.iter_mut().enumerate() {
                    let c = [i, j, k];
                    let ca = c[a];
                    let cell = grid.flat(c[0], c[1], c[2]);

                    let mut hi_c = c;
                    hi_c[a] += 1;
                    let u_hi = vel[grid.face_flat(a, hi_c[0], hi_c[1], hi_c[2])];
                    let u_lo = vel[grid.face_flat(a, c[0], c[1], c[2])];

                    let flux_hi = if ca + 1 >= na {
                        0.0
                    } else if u_hi > 0.0 {
                        u_hi * src[cell]
                    } else {
                        u_hi * src[cell + s]
                    };
                    let flux_lo = if ca == 0 {
                        0.0
                    } else if u_lo > 0.0 {
                        u_lo * src[cell - s]
                    } else {
                        u_lo * src[cell]
                    };
                    *slot += (flux_hi - flux_lo) * inv_h;
                }
            });
    }
    out.check_finite("advect_conservative")?;
    Ok(out)
}

/// Cell-centered centered differences of `c` along `axis`, with reflected
/// ghosts at the walls. Used to reconstruct tangential gradient components
/// at faces.
fn centered_diff(grid: &GridSpec, src: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.cells(axis);
    let s = grid.stride(axis);
    let inv_2h = 0.5 / grid.spacing(axis);
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    let mut out = vec![0.0; grid.cell_count()];
    crate::sum::for_each_line_mut(&mut out, nx, |line, row| {
        let j = line % ny;
        let k = line / ny;
        for (i, slot) in row.iter_mut().enumerate() {
            let c = [i, j, k];
            let ca = c[axis];
            let idx = grid.flat(c[0], c[1], c[2]);
            let hi = if ca + 1 < n { src[idx + s] } else { src[idx] };
            let lo = if ca > 0 { src[idx - s] } else { src[idx] };
            *slot = (hi - lo) * inv_2h;
        }
    });
    out
}

/// Divergence of the flux-limited chemotactic flux `n S(|grad c|^2) grad c`.
///
/// At each interior face the normal gradient is the exact centered
/// difference; tangential components are arithmetic means of the adjacent
/// cell-centered differences. The transported density is upwinded against
/// the drift `S * dc`, so a cell holding n = 0 sends out exactly zero flux.
pub fn chemo_flux_div(n: &ScalarField, c: &ScalarField, lim: &FluxLimiter) -> Result<ScalarField> {
    let flux = chemo_face_flux(n, c, lim)?;
    div_face_to_cc(&flux)
}

/// The flux-limited drift velocity `S(|grad c|^2) * dc` at each interior
/// face; the chemotactic flux is this times the upwind density. Also feeds
/// the advective time-step bound.
pub(crate) fn chemo_face_drift(c: &ScalarField, lim: &FluxLimiter) -> Result<FaceFlux> {
    c.check_finite("chemo_face_drift")?;
    let grid = *c.grid();
    let dim = grid.dim();
    let cv = c.values();

    // cell-centered tangential gradient components
    let mut cell_grad: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (b, slot) in cell_grad.iter_mut().enumerate().take(dim) {
        *slot = centered_diff(&grid, cv, b);
    }

    let mut drift = FaceFlux::zeros(grid);
    for a in 0..dim {
        let d = grid.face_dims(a);
        let na = grid.cells(a);
        let s = grid.stride(a);
        let inv_h = 1.0 / grid.spacing(a);
        let grads = &cell_grad;
        let comp = drift.component_mut(a);
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
                let right = left + s;

                let dc = (cv[right] - cv[left]) * inv_h;
                let mut g2 = dc * dc;
                for b in 0..dim {
                    if b != a {
                        let t = 0.5 * (grads[b][left] + grads[b][right]);
                        g2 += t * t;
                    }
                }
                *slot = lim.eval_unchecked(g2) * dc;
            }
        });
    }
    Ok(drift)
}

/// The face flux underlying [`chemo_flux_div`], exposed for flux-level
/// assertions and speed estimates.
pub fn chemo_face_flux(n: &ScalarField, c: &ScalarField, lim: &FluxLimiter) -> Result<FaceFlux> {
    if n.grid() != c.grid() {
        return Err(CoreError::GridMismatch {
            context: "chemo_flux_div: n and c grids differ".into(),
        });
    }
    n.check_finite("chemo_flux_div")?;
    let min_n = n.min();
    if min_n < -TOL_POS {
        return Err(CoreError::PositivityViolated {
            field: "n",
            min: min_n,
            tol: TOL_POS,
        });
    }
    let grid = *n.grid();
    let nv = n.values();
    let mut flux = chemo_face_drift(c, lim)?;
    for a in 0..grid.dim() {
        let d = grid.face_dims(a);
        let na = grid.cells(a);
        let s = grid.stride(a);
        let comp = flux.component_mut(a);
        crate::sum::for_each_line_mut(comp, d[0], |line, row| {
            let j = line % d[1];
            let k = line / d[1];
            for (i, slot) in row.iter_mut().enumerate() {
                let fc = [i, j, k];
                let fa = fc[a];
                if fa == 0 || fa == na {
                    continue;
                }
                let v = *slot;
                let mut lc = fc;
                lc[a] -= 1;
                let left = grid.flat(lc[0], lc[1], lc[2]);
                let n_up = if v > 0.0 { nv[left] } else { nv[left + s] };
                *slot = n_up * v;
            }
        });
    }
    Ok(flux)
}
