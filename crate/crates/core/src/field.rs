//! Field containers: cell-centered scalars, MAC-staggered vectors, state.

use crate::error::{CoreError, Result};
use crate::grid::GridSpec;
use crate::sum::min_max;

/// Roundoff allowance below zero for the nonnegative fields n, c, m.
/// The scheme is positivity-preserving by construction; anything below
/// `-TOL_POS` aborts the run as a scheme bug rather than physics.
pub const TOL_POS: f64 = 1e-12;

/// Boundary condition tag for cell-centered scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarBc {
    /// Zero normal derivative on every box face, realized by ghost-cell
    /// reflection; all boundary face fluxes vanish exactly.
    NeumannZeroFlux,
}

/// Boundary condition tag for MAC velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorBc {
    /// No-slip walls: normal components on boundary faces are exactly zero,
    /// tangential ghost values reflect with a sign flip.
    DirichletZero,
}

/// Cell-centered scalar samples over a [`GridSpec`], stored flat with
/// x fastest (`index = i + nx * (j + ny * k)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    bc: ScalarBc,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.cell_count()],
            bc: ScalarBc::NeumannZeroFlux,
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.cell_count()],
            bc: ScalarBc::NeumannZeroFlux,
        }
    }

    /// Builds a field from raw values, rejecting length mismatches and
    /// non-finite entries.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(CoreError::GridMismatch {
                context: format!(
                    "{} values for a grid of {} cells",
                    values.len(),
                    grid.cell_count()
                ),
            });
        }
        let f = Self {
            grid,
            values,
            bc: ScalarBc::NeumannZeroFlux,
        };
        f.check_finite("from_values")?;
        Ok(f)
    }

    /// Samples `f(x)` at cell centers.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut values = vec![0.0; grid.cell_count()];
        for (idx, v) in values.iter_mut().enumerate() {
            *v = f(grid.cell_center(grid.coords(idx)));
        }
        Self {
            grid,
            values,
            bc: ScalarBc::NeumannZeroFlux,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bc(&self) -> ScalarBc {
        self.bc
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        min_max(&self.values).0
    }

    pub fn max(&self) -> f64 {
        min_max(&self.values).1
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::NonFiniteField {
                context: context.to_string(),
            })
        }
    }
}

/// MAC-staggered vector samples: component `a` lives on the faces normal to
/// axis `a`, including the two boundary layers, which are pinned to zero
/// under no-slip. Components for padded axes are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    comps: [Vec<f64>; 3],
    bc: VectorBc,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let mut comps: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (a, comp) in comps.iter_mut().enumerate().take(grid.dim()) {
            *comp = vec![0.0; grid.face_count(a)];
        }
        Self {
            grid,
            comps,
            bc: VectorBc::DirichletZero,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bc(&self) -> VectorBc {
        self.bc
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }

    /// Zeroes the boundary-normal faces of every component.
    pub fn enforce_noslip(&mut self) {
        let grid = self.grid;
        for a in 0..grid.dim() {
            let d = grid.face_dims(a);
            let comp = &mut self.comps[a];
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        if (a == 0 && (i == 0 || i == d[0] - 1))
                            || (a == 1 && (j == 0 || j == d[1] - 1))
                            || (a == 2 && (k == 0 || k == d[2] - 1))
                        {
                            comp[i + d[0] * (j + d[1] * k)] = 0.0;
                        }
                    }
                }
            }
        }
    }

    /// Largest absolute face value over all components.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.grid.dim() {
            for &v in &self.comps[a] {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Face-sampled L2 norm: `sqrt(sum over faces of u^2 * cell_volume)`.
    pub fn l2(&self) -> f64 {
        let vol = self.grid.cell_volume();
        let mut total = 0.0;
        for a in 0..self.grid.dim() {
            total += crate::sum::dot(&self.comps[a], &self.comps[a]);
        }
        (total * vol).sqrt()
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        for a in 0..self.grid.dim() {
            if !self.comps[a].iter().all(|v| v.is_finite()) {
                return Err(CoreError::NonFiniteField {
                    context: context.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Verifies boundary-normal faces are exactly zero.
    pub fn check_noslip(&self, context: &str) -> Result<()> {
        let grid = self.grid;
        for a in 0..grid.dim() {
            let d = grid.face_dims(a);
            let na = grid.cells(a);
            let comp = &self.comps[a];
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let fa = [i, j, k][a];
                        if (fa == 0 || fa == na) && comp[i + d[0] * (j + d[1] * k)] != 0.0 {
                            return Err(CoreError::GridMismatch {
                                context: format!("{context}: nonzero boundary-normal face"),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Face-centered fluxes with the same staggering as [`VectorField`];
/// boundary-normal faces carry zero flux (no-flux scalars).
#[derive(Debug, Clone)]
pub struct FaceFlux {
    grid: GridSpec,
    comps: [Vec<f64>; 3],
}

impl FaceFlux {
    pub fn zeros(grid: GridSpec) -> Self {
        let mut comps: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (a, comp) in comps.iter_mut().enumerate().take(grid.dim()) {
            *comp = vec![0.0; grid.face_count(a)];
        }
        Self { grid, comps }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }
}

/// The full solver state at one time level.
#[derive(Debug, Clone)]
pub struct StateSnapshot {
    pub n: ScalarField,
    pub c: ScalarField,
    pub m: ScalarField,
    pub u: VectorField,
    pub p: ScalarField,
    pub t: f64,
}

impl StateSnapshot {
    pub fn new(n: ScalarField, c: ScalarField, m: ScalarField, u: VectorField, p: ScalarField, t: f64) -> Result<Self> {
        let grid = *n.grid();
        for (name, f) in [("c", &c), ("m", &m), ("p", &p)] {
            if *f.grid() != grid {
                return Err(CoreError::GridMismatch {
                    context: format!("state field {name} is on a different grid"),
                });
            }
        }
        if *u.grid() != grid {
            return Err(CoreError::GridMismatch {
                context: "state field u is on a different grid".into(),
            });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(CoreError::InvalidArgument {
                context: format!("t = {t} must be finite and nonnegative"),
            });
        }
        let state = Self { n, c, m, u, p, t };
        state.check_positivity()?;
        Ok(state)
    }

    pub fn grid(&self) -> &GridSpec {
        self.n.grid()
    }

    /// Verifies min(n), min(c), min(m) >= -TOL_POS.
    pub fn check_positivity(&self) -> Result<()> {
        for (name, f) in [("n", &self.n), ("c", &self.c), ("m", &self.m)] {
            let lo = f.min();
            if lo < -TOL_POS {
                return Err(CoreError::PositivityViolated {
                    field: match name {
                        "n" => "n",
                        "c" => "c",
                        _ => "m",
                    },
                    min: lo,
                    tol: TOL_POS,
                });
            }
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        self.n.check_finite("n")?;
        self.c.check_finite("c")?;
        self.m.check_finite("m")?;
        self.p.check_finite("p")?;
        self.u.check_finite("u")
    }
}
