//! Run configuration files.
//!
//! Every physical field carries its unit in the key. Stacks list layers
//! from the gap outward; a bare string is a half-space.
//!
//! ```json
//! {
//!   "materials_path": "../materials.json",
//!   "case": {
//!     "geometry": "plates",
//!     "fluid": "ethanol",
//!     "left": {"layers": [{"material": "lithium_niobate", "thickness_m": 5e-8}], "terminal": "doped_silicon"},
//!     "right": "polystyrene",
//!     "area_m2": 1.0,
//!     "gravity": {"mode": "slab", "delta_rho_kg_m3": 261.0, "thickness_m": 2e-7}
//!   },
//!   "temperatures": {"start_K": 150, "stop_K": 400, "step_K": 1},
//!   "separations": {"start_m": 1e-8, "stop_m": 5e-6, "points": 200}
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::brownian::{BasinPolicy, BoltzmannDomain};
use crate::constants::G_STANDARD;
use crate::error::{Error, Result};
use crate::landscape::{GravitySpec, LandscapeOptions, SuspensionCase, SweepOptions, DEFAULT_N_SCAN};
use crate::material::{load_material_library, Material, MaterialLibrary};
use crate::quadrature::QuadOptions;
use crate::stratified::{Layer, Stack};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Relative paths resolve against the config file's directory.
    pub materials_path: PathBuf,
    #[serde(default)]
    pub case: Option<CaseConfig>,
    #[serde(default)]
    pub temperatures: Option<TemperatureGrid>,
    #[serde(default)]
    pub separations: Option<SeparationGrid>,
    #[serde(default)]
    pub tabulate: Option<TabulateConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub boltzmann: BoltzmannConfig,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub geometry: GeometryKind,
    pub fluid: String,
    #[serde(default)]
    pub left: Option<StackConfig>,
    #[serde(default)]
    pub right: Option<StackConfig>,
    #[serde(default)]
    pub area_m2: Option<f64>,
    #[serde(default)]
    pub substrate: Option<StackConfig>,
    #[serde(default)]
    pub shell: Option<String>,
    #[serde(default)]
    pub interior: Option<String>,
    #[serde(default)]
    pub r_inner_m: Option<f64>,
    #[serde(default)]
    pub r_outer_m: Option<f64>,
    #[serde(default)]
    pub gravity: Option<GravityConfig>,
    /// Temperatures outside this range are flagged in sweep metadata.
    #[serde(default, rename = "fluid_liquid_range_K")]
    pub fluid_liquid_range_k: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Plates,
    Sphere,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StackConfig {
    HalfSpace(String),
    Layered {
        #[serde(default)]
        layers: Vec<LayerConfig>,
        terminal: String,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub material: String,
    pub thickness_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum GravityConfig {
    Slab {
        delta_rho_kg_m3: f64,
        thickness_m: f64,
        #[serde(default)]
        g_m_s2: Option<f64>,
    },
    /// Radii come from the sphere geometry.
    HollowSphere {
        rho_shell_kg_m3: f64,
        rho_fluid_kg_m3: f64,
        #[serde(default)]
        g_m_s2: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TemperatureGrid {
    Values {
        #[serde(rename = "values_K")]
        values: Vec<f64>,
    },
    Range {
        #[serde(rename = "start_K")]
        start: f64,
        #[serde(rename = "stop_K")]
        stop: f64,
        #[serde(rename = "step_K")]
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeparationGrid {
    Values {
        values_m: Vec<f64>,
    },
    Range {
        start_m: f64,
        stop_m: f64,
        points: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulateConfig {
    pub materials: Vec<String>,
    pub start_rad_s: f64,
    pub stop_rad_s: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub truncation: f64,
    pub quad_rel: f64,
    pub n_scan: usize,
    #[serde(rename = "tc_tol_K")]
    pub tc_tol: f64,
    pub refine: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SweepOptions::default();
        Tolerances { truncation: 1e-10, quad_rel: QuadOptions::default().rel_tol, n_scan: DEFAULT_N_SCAN, tc_tol: s.tc_tol, refine: s.refine }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyConfig {
    #[default]
    SuspensionBasin,
    FullRange,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoltzmannConfig {
    pub policy: PolicyConfig,
    /// Also average every ensemble temperature over this frozen landscape.
    #[serde(rename = "frozen_T_K")]
    pub frozen_t: Option<f64>,
}

/// A config with every name resolved and every grid checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub library: MaterialLibrary,
    pub case: Option<SuspensionCase>,
    pub temperatures: Option<Vec<f64>>,
    pub separations: Option<Vec<f64>>,
    pub xi_grid: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { source_name: source.to_string(), message: e.to_string() })
    }

    pub fn landscape_options(&self, cache: bool) -> LandscapeOptions {
        let quad = QuadOptions { rel_tol: self.tolerances.quad_rel, ..QuadOptions::default() };
        LandscapeOptions { cache, truncation: self.tolerances.truncation, quad }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions { n_scan: self.tolerances.n_scan, tc_tol: self.tolerances.tc_tol, refine: self.tolerances.refine }
    }

    pub fn boltzmann_domain(&self, d_range: (f64, f64)) -> BoltzmannDomain {
        let policy = match self.boltzmann.policy {
            PolicyConfig::SuspensionBasin => BasinPolicy::SuspensionBasin,
            PolicyConfig::FullRange => BasinPolicy::FullRange,
        };
        BoltzmannDomain { d_lo: d_range.0, d_hi: d_range.1, policy }
    }

    /// Check everything and load materials. `base` is the config's directory.
    pub fn resolve(self, base: &Path) -> Result<Resolved> {
        let t = &self.tolerances;
        if !(t.truncation > 0.0 && t.truncation < 1.0) {
            return Err(cfg("tolerances.truncation must lie in (0, 1)"));
        }
        if !(t.quad_rel > 0.0 && t.quad_rel < 1.0) {
            return Err(cfg("tolerances.quad_rel must lie in (0, 1)"));
        }
        if t.n_scan < 16 {
            return Err(cfg("tolerances.n_scan must be at least 16"));
        }
        if !(t.tc_tol > 0.0 && t.tc_tol.is_finite()) {
            return Err(cfg("tolerances.tc_tol_K must be positive"));
        }
        if self.workers == Some(0) {
            return Err(cfg("workers must be at least 1"));
        }
        if let Some(ft) = self.boltzmann.frozen_t {
            if !(ft > 0.0 && ft.is_finite()) {
                return Err(cfg("boltzmann.frozen_T_K must be positive"));
            }
        }
        let path = if self.materials_path.is_absolute() { self.materials_path.clone() } else { base.join(&self.materials_path) };
        let library = load_material_library(&path)?;
        let case = self.case.as_ref().map(|c| build_case(c, &library)).transpose()?;
        let temperatures = self.temperatures.as_ref().map(temperature_values).transpose()?;
        let separations = self.separations.as_ref().map(separation_values).transpose()?;
        let xi_grid = match &self.tabulate {
            Some(tab) => {
                for name in &tab.materials {
                    library.get(name)?;
                }
                if tab.materials.is_empty() {
                    return Err(cfg("tabulate.materials is empty"));
                }
                Some(log_or_linear(tab.start_rad_s, tab.stop_rad_s, tab.points, Spacing::Log, "tabulate")?)
            }
            None => None,
        };
        Ok(Resolved { config: self, library, case, temperatures, separations, xi_grid })
    }
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn stack(s: &StackConfig, lib: &MaterialLibrary) -> Result<Stack> {
    match s {
        StackConfig::HalfSpace(name) => Ok(Stack::half_space(lib.get(name)?.clone())),
        StackConfig::Layered { layers, terminal } => {
            let layers = layers
                .iter()
                .map(|l| Layer::new(lib.get(&l.material)?.clone(), l.thickness_m))
                .collect::<Result<Vec<_>>>()?;
            Ok(Stack::new(layers, lib.get(terminal)?.clone()))
        }
    }
}

fn material(name: &Option<String>, field: &str, lib: &MaterialLibrary) -> Result<Material> {
    let name = name.as_ref().ok_or_else(|| cfg(format!("case.{field} is required")))?;
    Ok(lib.get(name)?.clone())
}

fn required<T: Clone>(v: &Option<T>, field: &str) -> Result<T> {
    v.clone().ok_or_else(|| cfg(format!("case.{field} is required")))
}

fn forbid(present: bool, field: &str, geometry: &str) -> Result<()> {
    if present {
        return Err(cfg(format!("case.{field} does not apply to {geometry} geometry")));
    }
    Ok(())
}

fn build_case(c: &CaseConfig, lib: &MaterialLibrary) -> Result<SuspensionCase> {
    let fluid = lib.get(&c.fluid)?.clone();
    if let Some([lo, hi]) = c.fluid_liquid_range_k {
        if !(lo >= 0.0 && hi > lo) {
            return Err(cfg("case.fluid_liquid_range_K must be [low, high] with high > low ≥ 0"));
        }
    }
    match c.geometry {
        GeometryKind::Plates => {
            forbid(c.substrate.is_some(), "substrate", "plates")?;
            forbid(c.shell.is_some() || c.interior.is_some(), "shell/interior", "plates")?;
            forbid(c.r_inner_m.is_some() || c.r_outer_m.is_some(), "r_inner_m/r_outer_m", "plates")?;
            let left = stack(c.left.as_ref().ok_or_else(|| cfg("case.left is required"))?, lib)?;
            let right = stack(c.right.as_ref().ok_or_else(|| cfg("case.right is required"))?, lib)?;
            let gravity = match &c.gravity {
                None => None,
                Some(GravityConfig::Slab { delta_rho_kg_m3, thickness_m, g_m_s2 }) => {
                    Some(GravitySpec { g: g_m_s2.unwrap_or(G_STANDARD), ..GravitySpec::slab(*delta_rho_kg_m3, *thickness_m) })
                }
                Some(GravityConfig::HollowSphere { .. }) => {
                    return Err(cfg("hollow_sphere gravity needs sphere geometry"));
                }
            };
            SuspensionCase::plates(left, right, fluid, c.area_m2.unwrap_or(1.0), gravity)
        }
        GeometryKind::Sphere => {
            forbid(c.left.is_some() || c.right.is_some(), "left/right", "sphere")?;
            forbid(c.area_m2.is_some(), "area_m2", "sphere")?;
            let substrate = stack(c.substrate.as_ref().ok_or_else(|| cfg("case.substrate is required"))?, lib)?;
            let shell = material(&c.shell, "shell", lib)?;
            let interior = material(&c.interior, "interior", lib)?;
            let r_in = required(&c.r_inner_m, "r_inner_m")?;
            let r_out = required(&c.r_outer_m, "r_outer_m")?;
            let gravity = match &c.gravity {
                None => None,
                Some(GravityConfig::HollowSphere { rho_shell_kg_m3, rho_fluid_kg_m3, g_m_s2 }) => Some(GravitySpec {
                    g: g_m_s2.unwrap_or(G_STANDARD),
                    ..GravitySpec::hollow_sphere(*rho_shell_kg_m3, *rho_fluid_kg_m3, r_in, r_out)
                }),
                Some(GravityConfig::Slab { .. }) => return Err(cfg("slab gravity needs plates geometry")),
            };
            SuspensionCase::sphere(substrate, fluid, shell, interior, r_in, r_out, gravity)
        }
    }
}

fn sorted(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(cfg(format!("{what} grid is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(cfg(format!("{what} grid must be finite and strictly increasing")));
    }
    Ok(())
}

fn temperature_values(g: &TemperatureGrid) -> Result<Vec<f64>> {
    let v = match g {
        TemperatureGrid::Values { values } => values.clone(),
        TemperatureGrid::Range { start, stop, step } => crate::landscape::temperature_grid(*start, *stop, *step)
            .map_err(|e| cfg(format!("temperatures: {e}")))?,
    };
    sorted(&v, "temperature")?;
    if v[0] < 0.0 {
        return Err(cfg("temperatures must be ≥ 0 K"));
    }
    Ok(v)
}

fn separation_values(g: &SeparationGrid) -> Result<Vec<f64>> {
    let v = match g {
        SeparationGrid::Values { values_m } => values_m.clone(),
        SeparationGrid::Range { start_m, stop_m, points, spacing } => {
            log_or_linear(*start_m, *stop_m, *points, *spacing, "separations")?
        }
    };
    sorted(&v, "separation")?;
    if !(v[0] > 0.0) {
        return Err(cfg("separations must be positive"));
    }
    Ok(v)
}

fn log_or_linear(a: f64, b: f64, n: usize, spacing: Spacing, what: &str) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(cfg(format!("{what}: points must be ≥ 1")));
    }
    if !(a > 0.0 && b >= a && b.is_finite()) || (n > 1 && b == a) {
        return Err(cfg(format!("{what}: need 0 < start < stop")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let m = (n - 1) as f64;
    Ok((0..n)
        .map(|i| match (i, spacing) {
            (0, _) => a,
            (i, _) if i == n - 1 => b,
            (i, Spacing::Log) => a * (b / a).powf(i as f64 / m),
            (i, Spacing::Linear) => a + (b - a) * i as f64 / m,
        })
        .collect())
}
