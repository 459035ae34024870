//! Total-energy landscapes of suspended bodies: Casimir interaction plus
//! gravity and buoyancy, for plate–plate and proximity-force sphere–plate
//! cases.
//!
//! Force convention throughout: positive force pushes the bodies apart.
//! Energies are zero at infinite separation apart from the linear gravity
//! ramp.

mod equilibria;
mod sweep;

use std::f64::consts::PI;

use log::warn;

use crate::cache::ModeCache;
use crate::constants::G_STANDARD;
use crate::error::{Error, Result};
use crate::lifshitz::{evaluate, ThermalSpec, ZERO_T_ROUTE};
use crate::material::Material;
use crate::quadrature::QuadOptions;
use crate::stratified::{Channels, FrequencyIntegrand, GapGeometry, Layer, Stack};

pub use equilibria::{find_equilibria, Equilibrium, Stability};
pub use sweep::{
    branch_slope, sweep_temperature, temperature_grid, Bifurcation, BifurcationKind, Branch, BranchSlope, SweepOptions,
    SweepResult,
};

/// Default separation window for equilibrium scans, m.
pub const DEFAULT_D_RANGE: (f64, f64) = (10e-9, 5e-6);
/// Default number of log-spaced scan points.
pub const DEFAULT_N_SCAN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GravityMode {
    /// A slab of thickness `thickness` whose density exceeds the fluid's by
    /// `delta_rho`.
    Slab { delta_rho: f64, thickness: f64 },
    HollowSphere { rho_shell: f64, rho_fluid: f64, r_inner: f64, r_outer: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravitySpec {
    pub mode: GravityMode,
    pub g: f64,
}

impl GravitySpec {
    pub fn slab(delta_rho: f64, thickness: f64) -> Self {
        GravitySpec { mode: GravityMode::Slab { delta_rho, thickness }, g: G_STANDARD }
    }

    pub fn hollow_sphere(rho_shell: f64, rho_fluid: f64, r_inner: f64, r_outer: f64) -> Self {
        GravitySpec { mode: GravityMode::HollowSphere { rho_shell, rho_fluid, r_inner, r_outer }, g: G_STANDARD }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::domain(format!("gravitational acceleration must be ≥ 0, got {}", self.g)));
        }
        match self.mode {
            GravityMode::Slab { delta_rho, thickness } => {
                if !(thickness >= 0.0 && thickness.is_finite() && delta_rho.is_finite()) {
                    return Err(Error::domain(format!("slab thickness must be ≥ 0, got {thickness}")));
                }
            }
            GravityMode::HollowSphere { rho_shell, rho_fluid, r_inner, r_outer } => {
                if !(0.0 < r_inner && r_inner < r_outer && r_outer.is_finite()) {
                    return Err(Error::domain(format!("sphere radii need 0 < r < R, got r = {r_inner}, R = {r_outer}")));
                }
                if !(rho_shell.is_finite() && rho_fluid.is_finite()) {
                    return Err(Error::domain("densities must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Net downward load: N/m² for a slab, N for a sphere.
    pub fn load(&self) -> f64 {
        match self.mode {
            GravityMode::Slab { delta_rho, thickness } => delta_rho * self.g * thickness,
            GravityMode::HollowSphere { rho_shell, rho_fluid, r_inner, r_outer } => {
                self.g * (rho_shell - rho_fluid) * 4.0 / 3.0 * PI * (r_outer.powi(3) - r_inner.powi(3))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseGeometry {
    Plates { left: Stack, right: Stack, area: f64 },
    /// A hollow sphere (shell over an interior medium) above a substrate,
    /// treated in the proximity-force approximation.
    Sphere { substrate: Stack, shell: Material, interior: Material, r_inner: f64, r_outer: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionCase {
    pub geometry: CaseGeometry,
    pub fluid: Material,
    pub gravity: Option<GravitySpec>,
}

impl SuspensionCase {
    pub fn plates(left: Stack, right: Stack, fluid: Material, area: f64, gravity: Option<GravitySpec>) -> Result<Self> {
        let case = SuspensionCase { geometry: CaseGeometry::Plates { left, right, area }, fluid, gravity };
        case.validate()?;
        Ok(case)
    }

    pub fn sphere(
        substrate: Stack,
        fluid: Material,
        shell: Material,
        interior: Material,
        r_inner: f64,
        r_outer: f64,
        gravity: Option<GravitySpec>,
    ) -> Result<Self> {
        let case = SuspensionCase {
            geometry: CaseGeometry::Sphere { substrate, shell, interior, r_inner, r_outer },
            fluid,
            gravity,
        };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fluid.is_metallic() {
            return Err(Error::domain(format!("gap fluid `{}` must be non-metallic", self.fluid.name)));
        }
        if let Some(g) = &self.gravity {
            g.validate()?;
        }
        match (&self.geometry, self.gravity.map(|g| g.mode)) {
            (CaseGeometry::Plates { area, .. }, mode) => {
                if !(*area > 0.0 && area.is_finite()) {
                    return Err(Error::domain(format!("plate area must be positive, got {area}")));
                }
                if let Some(GravityMode::HollowSphere { .. }) = mode {
                    return Err(Error::domain("plate case needs slab gravity"));
                }
            }
            (CaseGeometry::Sphere { r_inner, r_outer, .. }, mode) => {
                if !(0.0 < *r_inner && r_inner < r_outer && r_outer.is_finite()) {
                    return Err(Error::domain(format!("sphere radii need 0 < r < R, got r = {r_inner}, R = {r_outer}")));
                }
                match mode {
                    Some(GravityMode::Slab { .. }) => return Err(Error::domain("sphere case needs hollow-sphere gravity")),
                    Some(GravityMode::HollowSphere { r_inner: gi, r_outer: go, .. })
                        if (gi - r_inner).abs() > 1e-12 * r_outer || (go - r_outer).abs() > 1e-12 * r_outer =>
                    {
                        return Err(Error::domain("gravity radii differ from the sphere geometry"));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.geometry, CaseGeometry::Sphere { .. })
    }

    /// The two stacks facing each other across the gap.
    pub fn stacks(&self) -> (Stack, Stack) {
        match &self.geometry {
            CaseGeometry::Plates { left, right, .. } => (left.clone(), right.clone()),
            CaseGeometry::Sphere { substrate, shell, interior, r_inner, r_outer } => {
                let layer = Layer { material: shell.clone(), thickness: r_outer - r_inner };
                (substrate.clone(), Stack::new(vec![layer], interior.clone()))
            }
        }
    }

    /// Equivalent plate–plate geometry at separation `d`.
    pub fn gap(&self, d: f64) -> Result<GapGeometry> {
        let (l, r) = self.stacks();
        GapGeometry::new(l, r, self.fluid.clone(), d)
    }

    fn load(&self) -> f64 {
        self.gravity.map_or(0.0, |g| g.load())
    }

    fn warn_pfa_range(&self, d: f64) {
        if let CaseGeometry::Sphere { r_outer, .. } = self.geometry {
            if d > r_outer / 5.0 {
                warn!("proximity-force approximation used at d = {d:e} m > R/5");
            }
        }
    }

    /// Assembles (energy, force) from frequency-summed densities.
    fn assemble(&self, d: f64, t: &FrequencyIntegrand) -> (f64, f64) {
        let w = self.load();
        match self.geometry {
            CaseGeometry::Plates { area, .. } => ((t.energy + w * d) * area, (-t.pressure - w) * area),
            CaseGeometry::Sphere { r_outer, .. } => {
                (2.0 * PI * r_outer * t.pfa + w * d, 2.0 * PI * r_outer * t.energy - w)
            }
        }
    }

    fn energy_channels(&self) -> Channels {
        Channels { pressure: false, energy: !self.is_sphere(), pfa: self.is_sphere() }
    }

    fn force_channels(&self) -> Channels {
        Channels { pressure: !self.is_sphere(), energy: self.is_sphere(), pfa: false }
    }
}

fn check_d(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("separation must be positive, got {d}")));
    }
    Ok(())
}

fn adaptive_totals(case: &SuspensionCase, d: f64, spec: &ThermalSpec) -> Result<FrequencyIntegrand> {
    let t = evaluate(&case.gap(d)?, spec)?;
    Ok(FrequencyIntegrand { pressure: t.pressure.value, energy: t.energy.value, pfa: t.pfa.value })
}

/// Total energy U_T(d): J (sphere) or J for the configured plate area.
pub fn total_energy(case: &SuspensionCase, d: f64, spec: &ThermalSpec) -> Result<f64> {
    check_d(d)?;
    case.warn_pfa_range(d);
    Ok(case.assemble(d, &adaptive_totals(case, d, spec)?).0)
}

/// Total force −dU/dd in N; positive pushes apart.
pub fn total_force(case: &SuspensionCase, d: f64, spec: &ThermalSpec) -> Result<f64> {
    check_d(d)?;
    case.warn_pfa_range(d);
    Ok(case.assemble(d, &adaptive_totals(case, d, spec)?).1)
}

/// Casimir energy of the sphere case alone, 2πR ∫_d^∞ E(s) ds.
pub fn pfa_energy(case: &SuspensionCase, d: f64, spec: &ThermalSpec) -> Result<f64> {
    check_d(d)?;
    let r_outer = match case.geometry {
        CaseGeometry::Sphere { r_outer, .. } => r_outer,
        CaseGeometry::Plates { .. } => return Err(Error::domain("pfa_energy needs a sphere case")),
    };
    case.warn_pfa_range(d);
    Ok(2.0 * PI * r_outer * adaptive_totals(case, d, spec)?.pfa)
}

/// A one-dimensional energy landscape at fixed temperature.
pub trait EnergyLandscape: Sync {
    fn temperature(&self) -> f64;
    fn energy(&self, d: f64) -> Result<f64>;
    /// −dU/dd, positive pushes apart.
    fn force(&self, d: f64) -> Result<f64>;
}

/// Something that yields a landscape at any temperature.
pub trait LandscapeFamily: Sync {
    type Landscape: EnergyLandscape + Send;
    fn at_temperature(&self, t: f64, d_range: (f64, f64)) -> Result<Self::Landscape>;
}

/// Landscape from closures, mainly for analytic potentials.
pub struct FnLandscape<E, F> {
    pub temperature: f64,
    pub energy: E,
    pub force: F,
}

impl<E, F> EnergyLandscape for FnLandscape<E, F>
where
    E: Fn(f64) -> f64 + Sync,
    F: Fn(f64) -> f64 + Sync,
{
    fn temperature(&self) -> f64 {
        self.temperature
    }
    fn energy(&self, d: f64) -> Result<f64> {
        Ok((self.energy)(d))
    }
    fn force(&self, d: f64) -> Result<f64> {
        Ok((self.force)(d))
    }
}

/// Family from a closure `T -> landscape`.
pub struct FnFamily<G>(pub G);

impl<G, L> LandscapeFamily for FnFamily<G>
where
    G: Fn(f64) -> L + Sync,
    L: EnergyLandscape + Send,
{
    type Landscape = L;
    fn at_temperature(&self, t: f64, _d_range: (f64, f64)) -> Result<L> {
        Ok((self.0)(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeOptions {
    /// Store reflection products across separations.
    pub cache: bool,
    pub truncation: f64,
    pub quad: QuadOptions,
}

impl Default for LandscapeOptions {
    fn default() -> Self {
        LandscapeOptions { cache: true, truncation: 1e-10, quad: QuadOptions::default() }
    }
}

#[derive(Debug)]
enum Engine {
    Grid(ModeCache),
    Adaptive(ThermalSpec),
}

/// U_T(d) of one case at one temperature over a separation window.
///
/// Above 1 K the frequencies and wavenumbers are fixed for the whole
/// window, so the curve is smooth in `d` and reflection products can be
/// reused between separations.
#[derive(Debug)]
pub struct Landscape {
    case: SuspensionCase,
    temperature: f64,
    d_range: (f64, f64),
    engine: Engine,
}

impl Landscape {
    pub fn new(case: &SuspensionCase, temperature: f64, d_range: (f64, f64), opts: &LandscapeOptions) -> Result<Self> {
        case.validate()?;
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::domain(format!("temperature must be ≥ 0 K, got {temperature}")));
        }
        let (lo, hi) = d_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::domain(format!("invalid separation window [{lo:e}, {hi:e}]")));
        }
        case.warn_pfa_range(hi);
        let engine = if temperature < ZERO_T_ROUTE {
            Engine::Adaptive(ThermalSpec { temperature, truncation: opts.truncation, n_max_cap: 1_000_000, quad: opts.quad })
        } else {
            let (l, r) = case.stacks();
            Engine::Grid(
                ModeCache::build(&l, &r, &case.fluid, temperature, d_range, opts.cache)
                    .map_err(|e| e.context(format!("T = {temperature} K")))?,
            )
        };
        Ok(Landscape { case: case.clone(), temperature, d_range, engine })
    }

    pub fn case(&self) -> &SuspensionCase {
        &self.case
    }

    pub fn d_range(&self) -> (f64, f64) {
        self.d_range
    }

    /// Reflection-product evaluations so far (0 on the T < 1 K path).
    pub fn reflection_evaluations(&self) -> u64 {
        match &self.engine {
            Engine::Grid(c) => c.reflection_evaluations(),
            Engine::Adaptive(_) => 0,
        }
    }

    fn totals(&self, d: f64, ch: Channels) -> Result<FrequencyIntegrand> {
        check_d(d)?;
        let (lo, hi) = self.d_range;
        if !(d >= lo * (1.0 - 1e-12) && d <= hi * (1.0 + 1e-12)) {
            return Err(Error::domain(format!("separation {d:e} m outside the landscape window [{lo:e}, {hi:e}]")));
        }
        let r = match &self.engine {
            Engine::Grid(c) => c.totals(d, ch),
            Engine::Adaptive(spec) => adaptive_totals(&self.case, d, spec),
        };
        r.map_err(|e| e.context(format!("T = {} K", self.temperature)))
    }

    /// Energy and force together.
    pub fn energy_and_force(&self, d: f64) -> Result<(f64, f64)> {
        let t = self.totals(d, Channels::ALL)?;
        Ok(self.case.assemble(d, &t))
    }
}

impl EnergyLandscape for Landscape {
    fn temperature(&self) -> f64 {
        self.temperature
    }

    fn energy(&self, d: f64) -> Result<f64> {
        let t = self.totals(d, self.case.energy_channels())?;
        Ok(self.case.assemble(d, &t).0)
    }

    fn force(&self, d: f64) -> Result<f64> {
        let t = self.totals(d, self.case.force_channels())?;
        Ok(self.case.assemble(d, &t).1)
    }
}

/// A case paired with landscape options.
#[derive(Debug, Clone)]
pub struct CaseFamily<'a> {
    pub case: &'a SuspensionCase,
    pub options: LandscapeOptions,
}

impl LandscapeFamily for CaseFamily<'_> {
    type Landscape = Landscape;
    fn at_temperature(&self, t: f64, d_range: (f64, f64)) -> Result<Landscape> {
        Landscape::new(self.case, t, d_range, &self.options)
    }
}
