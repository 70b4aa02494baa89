//! Run configuration: a single versioned JSON document, validated into the
//! solver's native types. Validation enforces the admissibility conditions
//! on the data: nonnegative initial densities with bounded gradients, a
//! gravitational potential with a constant gradient, and an initial velocity
//! that is projected onto the discretely divergence-free subspace before
//! t = 0.

use anyhow::{anyhow, bail, Context, Result};
use fluxlim_core::field::{ScalarField, StateSnapshot, VectorField};
use fluxlim_core::fluid::{Potential, StokesSolver};
use fluxlim_core::grid::GridSpec;
use fluxlim_core::integrator::{DiffusionScheme, DtSpec, RunSetup, SchemeConfig};
use fluxlim_core::reduce::{grad_linf, integrate};
use fluxlim_core::sensitivity::FluxLimiter;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub grid: GridConfig,
    pub limiter: LimiterConfig,
    #[serde(default)]
    pub phi: PhiConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub scheme: SchemeFileConfig,
    pub t_end: f64,
    pub record_every: f64,
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    /// Blow-up guard: abort when `max|n|` exceeds this multiple of its
    /// initial value.
    #[serde(default = "default_guard")]
    pub guard: f64,
    /// Convergence threshold for the terminal equilibrium check.
    #[serde(default = "default_eps_conv")]
    pub eps_conv: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Also emit legacy-ASCII VTK snapshots for visualization.
    #[serde(default)]
    pub write_vtk: bool,
}

fn default_guard() -> f64 {
    1e6
}

fn default_eps_conv() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LimiterConfig {
    Prototype {
        k_s: f64,
        theta: f64,
    },
    /// Two-column CSV `(sigma, value)`, strictly increasing sigma from 0.
    /// The claimed envelope is checked on a log-spaced sample grid.
    Table {
        path: PathBuf,
        k_s_claim: f64,
        theta_claim: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiConfig {
    #[default]
    Zero,
    Linear {
        g: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldInit {
    Constant {
        value: f64,
    },
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
        #[serde(default)]
        floor: f64,
        /// Rescale so the discrete integral equals this mass exactly.
        #[serde(default)]
        normalize_mass: Option<f64>,
    },
    /// Raw snapshot file (64-byte ASCII header + little-endian f64 cells).
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocityInit {
    #[default]
    Zero,
    /// One raw snapshot per component, in axis order.
    File {
        paths: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub n: FieldInit,
    pub c: FieldInit,
    pub m: FieldInit,
    #[serde(default)]
    pub u: VelocityInit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtConfig {
    Keyword(String),
    Number(f64),
}

impl Default for DtConfig {
    fn default() -> Self {
        DtConfig::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionConfig {
    Explicit,
    ImplicitBe,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeFileConfig {
    pub dt: DtConfig,
    pub diffusion: DiffusionConfig,
    pub cfl_safety: f64,
    pub tol_poisson: f64,
    pub tol_proj: f64,
    pub tol_implicit: f64,
    pub poisson_jacobi: bool,
}

impl Default for SchemeFileConfig {
    fn default() -> Self {
        let d = SchemeConfig::default();
        Self {
            dt: DtConfig::default(),
            diffusion: DiffusionConfig::Explicit,
            cfl_safety: d.cfl_safety,
            tol_poisson: d.tol_poisson,
            tol_proj: d.tol_proj,
            tol_implicit: d.tol_implicit,
            poisson_jacobi: d.poisson_jacobi,
        }
    }
}

/// Everything a run needs, after validation.
pub struct Validated {
    pub grid: GridSpec,
    pub initial: StateSnapshot,
    pub setup: RunSetup,
    pub eps_conv: f64,
    pub warnings: Vec<String>,
    pub write_vtk: bool,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).context("cannot parse run config")?;
    Ok(cfg)
}

/// Built-in demo configurations.
pub fn builtin_names() -> &'static [&'static str] {
    &["demo1d", "demo2d", "demo3d"]
}

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "demo1d" => Some(include_str!("demos/demo1d.json")),
        "demo2d" => Some(include_str!("demos/demo2d.json")),
        "demo3d" => Some(include_str!("demos/demo3d.json")),
        _ => None,
    }
}

/// Loads a config from a built-in demo name or a file path.
pub fn load_config(source: &str) -> Result<RunConfig> {
    if let Some(text) = builtin(source) {
        return parse_config(text);
    }
    let text = std::fs::read_to_string(source)
        .with_context(|| format!("cannot read config '{source}' (not a built-in demo either; demos: {:?})", builtin_names()))?;
    parse_config(&text)
}

fn sample_field(grid: GridSpec, name: &str, init: &FieldInit, base_dir: &Path) -> Result<ScalarField> {
    let field = match init {
        FieldInit::Constant { value } => ScalarField::constant(grid, *value),
        FieldInit::GaussianBump {
            center,
            width,
            amplitude,
            floor,
            normalize_mass,
        } => {
            if center.len() != grid.dim() {
                bail!("initial.{name}: center has {} entries for a {}D grid", center.len(), grid.dim());
            }
            if !(*width > 0.0) {
                bail!("initial.{name}: width must be positive");
            }
            let (c, w, a, fl) = (center.clone(), *width, *amplitude, *floor);
            let mut f = ScalarField::from_fn(grid, |x| {
                let mut r2 = 0.0;
                for (axis, ci) in c.iter().enumerate() {
                    let d = x[axis] - ci;
                    r2 += d * d;
                }
                fl + a * (-r2 / (2.0 * w * w)).exp()
            });
            if let Some(mass) = normalize_mass {
                if !(*mass > 0.0) {
                    bail!("initial.{name}: normalize_mass must be positive");
                }
                let total = integrate(&f).map_err(|e| anyhow!("{e}"))?;
                if total <= 0.0 {
                    bail!("initial.{name}: cannot normalize a nonpositive field");
                }
                let scale = mass / total;
                for v in f.values_mut() {
                    *v *= scale;
                }
            }
            f
        }
        FieldInit::File { path } => {
            let full = if path.is_relative() { base_dir.join(path) } else { path.clone() };
            let (dims, _field_tag, _t, data) = crate::output::read_snapshot(&full)
                .with_context(|| format!("initial.{name}: reading {}", full.display()))?;
            let expect = [grid.cells(0), grid.cells(1), grid.cells(2)];
            if dims != expect {
                bail!(
                    "initial.{name}: snapshot dims {dims:?} do not match grid {expect:?}"
                );
            }
            ScalarField::from_values(grid, data).map_err(|e| anyhow!("initial.{name}: {e}"))?
        }
    };
    Ok(field)
}

/// Validates a parsed config into solver inputs. Errors name the offending
/// field (and cell, for sign violations); physically-legal-but-unproven
/// settings come back as warnings.
pub fn validate(cfg: &RunConfig, base_dir: &Path) -> Result<Validated> {
    let mut warnings = Vec::new();
    if cfg.schema != SCHEMA_VERSION {
        bail!("schema {} unsupported (expected {SCHEMA_VERSION})", cfg.schema);
    }
    let grid = GridSpec::new(&cfg.grid.cells, &cfg.grid.lengths).map_err(|e| anyhow!("grid: {e}"))?;

    let limiter = match &cfg.limiter {
        LimiterConfig::Prototype { k_s, theta } => {
            FluxLimiter::prototype(*k_s, *theta).map_err(|e| anyhow!("limiter: {e}"))?
        }
        LimiterConfig::Table {
            path,
            k_s_claim,
            theta_claim,
            samples,
        } => {
            let full = if path.is_relative() { base_dir.join(path) } else { path.clone() };
            let text = std::fs::read_to_string(&full)
                .with_context(|| format!("limiter table {}", full.display()))?;
            let lim = FluxLimiter::tabulated_from_csv(&text, *k_s_claim, *theta_claim)
                .map_err(|e| anyhow!("limiter: {e}"))?;
            if !lim
                .verify_bound(*k_s_claim, *theta_claim, *samples)
                .map_err(|e| anyhow!("limiter: {e}"))?
            {
                bail!(
                    "limiter table violates the claimed envelope k_s = {k_s_claim}, theta = {theta_claim}"
                );
            }
            lim
        }
    };
    if limiter.theta() == 0.0 {
        warnings.push(
            "theta = 0: constant sensitivity is outside the proven decay regime; \
             boundedness is monitored, not guaranteed"
                .into(),
        );
    }

    let phi = match &cfg.phi {
        PhiConfig::Zero => Potential::Zero,
        PhiConfig::Linear { g } => {
            if g.len() != grid.dim() {
                bail!("phi: gravity vector has {} entries for a {}D grid", g.len(), grid.dim());
            }
            let mut gv = [0.0; 3];
            for (slot, v) in gv.iter_mut().zip(g) {
                if !v.is_finite() {
                    bail!("phi: non-finite gravity component");
                }
                *slot = *v;
            }
            if grid.dim() == 1 && gv[0] != 0.0 {
                warnings.push("1D run: the incompressible velocity is frozen at zero, phi has no effect".into());
            }
            Potential::Linear { g: gv }
        }
    };

    // initial data
    let n0 = sample_field(grid, "n", &cfg.initial.n, base_dir)?;
    let c0 = sample_field(grid, "c", &cfg.initial.c, base_dir)?;
    let m0 = sample_field(grid, "m", &cfg.initial.m, base_dir)?;
    for (name, f) in [("n", &n0), ("c", &c0), ("m", &m0)] {
        if let Some(idx) = f.values().iter().position(|v| *v < 0.0) {
            bail!(
                "initial.{name}: negative value {} at cell {:?}",
                f.values()[idx],
                grid.coords(idx)
            );
        }
        let g = grad_linf(f).map_err(|e| anyhow!("initial.{name}: {e}"))?;
        if !g.is_finite() {
            bail!("initial.{name}: gradient is not finite");
        }
    }

    let mut u0 = match &cfg.initial.u {
        VelocityInit::Zero => VectorField::zeros(grid),
        VelocityInit::File { paths } => {
            if paths.len() != grid.dim() {
                bail!("initial.u: {} component files for a {}D grid", paths.len(), grid.dim());
            }
            let mut u = VectorField::zeros(grid);
            for (a, path) in paths.iter().enumerate() {
                let full = if path.is_relative() { base_dir.join(path) } else { path.clone() };
                let (dims, _tag, _t, data) = crate::output::read_snapshot(&full)
                    .with_context(|| format!("initial.u[{a}]: reading {}", full.display()))?;
                let expect = grid.face_dims(a);
                if dims != expect {
                    bail!("initial.u[{a}]: snapshot dims {dims:?} do not match face dims {expect:?}");
                }
                u.component_mut(a).copy_from_slice(&data);
            }
            u.enforce_noslip();
            u
        }
    };

    // scheme
    let dt = match &cfg.scheme.dt {
        DtConfig::Keyword(k) if k == "auto" => DtSpec::Auto,
        DtConfig::Keyword(k) => bail!("scheme.dt: unknown keyword '{k}' (use a number or \"auto\")"),
        DtConfig::Number(v) => {
            if !(*v > 0.0 && v.is_finite()) {
                bail!("scheme.dt: must be positive and finite, got {v}");
            }
            DtSpec::Fixed(*v)
        }
    };
    if !(cfg.scheme.cfl_safety > 0.0 && cfg.scheme.cfl_safety <= 1.0) {
        bail!("scheme.cfl_safety: must lie in (0, 1], got {}", cfg.scheme.cfl_safety);
    }
    for (name, v) in [
        ("tol_poisson", cfg.scheme.tol_poisson),
        ("tol_proj", cfg.scheme.tol_proj),
        ("tol_implicit", cfg.scheme.tol_implicit),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            bail!("scheme.{name}: must be positive, got {v}");
        }
    }
    let scheme = SchemeConfig {
        dt,
        diffusion: match cfg.scheme.diffusion {
            DiffusionConfig::Explicit => DiffusionScheme::Explicit,
            DiffusionConfig::ImplicitBe => DiffusionScheme::ImplicitBe,
        },
        cfl_safety: cfg.scheme.cfl_safety,
        tol_poisson: cfg.scheme.tol_poisson,
        tol_proj: cfg.scheme.tol_proj,
        tol_implicit: cfg.scheme.tol_implicit,
        poisson_jacobi: cfg.scheme.poisson_jacobi,
    };

    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        bail!("t_end: must be finite and nonnegative, got {}", cfg.t_end);
    }
    if !(cfg.record_every >= 0.0) {
        bail!("record_every: must be nonnegative (zero records every step)");
    }
    if !(cfg.guard > 1e-30 && cfg.guard.is_finite()) {
        bail!("guard: must be positive, got {}", cfg.guard);
    }
    if !(cfg.eps_conv > 0.0) {
        bail!("eps_conv: must be positive, got {}", cfg.eps_conv);
    }

    // project u0 onto the divergence-free subspace before t = 0
    if grid.dim() > 1 {
        let needs = fluxlim_core::fluid::div_mac(&u0)
            .map_err(|e| anyhow!("initial.u: {e}"))?
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if needs > scheme.tol_proj {
            let mut solver = StokesSolver::new(grid, scheme.tol_poisson, scheme.tol_proj);
            solver
                .project(&mut u0, 1.0)
                .map_err(|e| anyhow!("initial.u projection: {e}"))?;
            warnings.push(format!(
                "initial velocity projected: max divergence {needs:.3e} -> below {:.1e}",
                scheme.tol_proj
            ));
        }
    }

    let initial = StateSnapshot::new(n0, c0, m0, u0, ScalarField::zeros(grid), 0.0)
        .map_err(|e| anyhow!("initial state: {e}"))?;

    let mut setup = RunSetup::new(scheme, limiter, phi, cfg.t_end);
    setup.record_every = cfg.record_every;
    setup.guard_factor = cfg.guard;
    setup.snapshot_every = cfg.snapshot_every;

    Ok(Validated {
        grid,
        initial,
        setup,
        eps_conv: cfg.eps_conv,
        warnings,
        write_vtk: cfg.write_vtk,
    })
}
