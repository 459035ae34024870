//! Reflection from layered half-spaces on the imaginary-frequency axis and
//! the per-frequency Lifshitz integrands.
//!
//! Conventions: a [`Stack`] lists its layers starting from the gap side and
//! ends in a semi-infinite terminal medium. For a fluid gap of width `d`,
//! the pressure density `f_P(ξ)` is positive for attraction and the energy
//! density `f_E(ξ)` is negative for binding, with
//!
//! ```text
//! f_P(ξ) = ħ/(2π²) ∫ k dk κ Σ_p r_L r_R e^{-2κd} / (1 - r_L r_R e^{-2κd})
//! f_E(ξ) = ħ/(4π²) ∫ k dk   Σ_p ln(1 - r_L r_R e^{-2κd})
//! ```
//!
//! where κ = √(k² + ε_f ξ²/c²) is the fluid decay constant. A third density,
//! `f_S`, integrates `f_E` over separations from `d` to infinity in closed
//! form (via the dilogarithm); it is what the proximity-force sphere energy
//! needs.

use std::f64::consts::PI;

use crate::constants::{C, HBAR};
use crate::error::{Error, Result};
use crate::material::{Material, StaticLimit};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::dilog;

/// Upper end of the `u = 2κd` integration window measured from its start.
pub(crate) const U_SPAN: f64 = 80.0;
/// `r_L r_R e^{-u}` must stay below `1 - LOG_GUARD`.
pub(crate) const LOG_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::TE, Polarization::TM];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: Material,
    pub thickness: f64,
}

impl Layer {
    pub fn new(material: Material, thickness: f64) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(Error::domain(format!(
                "layer `{}` thickness must be positive and finite, got {thickness}",
                material.name
            )));
        }
        Ok(Layer { material, thickness })
    }
}

/// Layers ordered from the gap outwards, backed by a semi-infinite medium.
#[derive(Debug, Clone, PartialEq)]
pub struct Stack {
    pub layers: Vec<Layer>,
    pub terminal: Material,
}

impl Stack {
    pub fn half_space(terminal: Material) -> Self {
        Stack { layers: Vec::new(), terminal }
    }

    pub fn new(layers: Vec<Layer>, terminal: Material) -> Self {
        Stack { layers, terminal }
    }

    /// A copy with `layer` placed on the gap side.
    pub fn with_front_layer(&self, layer: Layer) -> Self {
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        layers.push(layer);
        layers.extend(self.layers.iter().cloned());
        Stack { layers, terminal: self.terminal.clone() }
    }

    pub fn max_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).fold(0.0, f64::max)
    }

    pub(crate) fn resolve(&self, xi: f64, eps_fluid: f64) -> Result<ResolvedStack> {
        let media = self.layers.iter().map(|l| (&l.material, l.thickness)).chain(std::iter::once((&self.terminal, 0.0)));
        let mut eps = Vec::with_capacity(self.layers.len() + 1);
        let mut thickness = Vec::with_capacity(self.layers.len());
        let q2 = (xi / C) * (xi / C);
        let mut shift = Vec::with_capacity(self.layers.len() + 1);
        for (m, t) in media {
            let e = if xi == 0.0 {
                m.static_limit().as_f64()
            } else {
                m.permittivity(xi)?
            };
            eps.push(e);
            shift.push(if e.is_finite() { (e - eps_fluid) * q2 } else { f64::INFINITY });
            if !e.is_finite() {
                // nothing behind a perfect reflector matters
                break;
            }
            thickness.push(t);
        }
        thickness.truncate(eps.len() - 1);
        Ok(ResolvedStack { eps, shift, thickness, q2, is_static: xi == 0.0 })
    }
}

/// A stack evaluated at one imaginary frequency.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedStack {
    /// ε of each medium after the fluid, terminal (or first metal) last.
    eps: Vec<f64>,
    /// (ε_j − ε_f) ξ²/c², so that κ_j² = κ_f² + shift_j.
    shift: Vec<f64>,
    thickness: Vec<f64>,
    /// (ξ/c)².
    q2: f64,
    is_static: bool,
}

impl ResolvedStack {
    /// Reflection coefficients [TE, TM] seen from a fluid with permittivity
    /// `eps_f` for a mode with fluid decay constant `kappa_f`.
    pub(crate) fn reflection(&self, eps_f: f64, kappa_f: f64) -> [f64; 2] {
        let n = self.eps.len();
        let kap = |j: usize| -> f64 {
            if self.is_static {
                kappa_f
            } else {
                (kappa_f * kappa_f + self.shift[j]).sqrt()
            }
        };
        let k2 = (kappa_f * kappa_f - eps_f * self.q2).max(0.0);
        let mut out = [0.0; 2];
        for (slot, p) in Polarization::BOTH.iter().enumerate() {
            if self.is_static && *p == Polarization::TE {
                continue;
            }
            let last = n - 1;
            let (e_prev, k_prev) = if last == 0 { (eps_f, kappa_f) } else { (self.eps[last - 1], kap(last - 1)) };
            let mut r = self.interface(*p, k2, e_prev, k_prev, self.eps[last], kap(last));
            let mut k_j = k_prev;
            for j in (0..last).rev() {
                let (e_in, k_in) = if j == 0 { (eps_f, kappa_f) } else { (self.eps[j - 1], kap(j - 1)) };
                let rho = self.interface(*p, k2, e_in, k_in, self.eps[j], k_j);
                let prop = (-2.0 * k_j * self.thickness[j]).exp();
                r = (rho + r * prop) / (1.0 + rho * r * prop);
                k_j = k_in;
            }
            out[slot] = r;
        }
        out
    }

    /// Interface coefficient with the numerator written as a multiple of
    /// ε_out − ε_in, so nearly matched media and k ≫ √ε ξ/c keep their
    /// relative precision.
    fn interface(&self, p: Polarization, k2: f64, e_in: f64, k_in: f64, e_out: f64, k_out: f64) -> f64 {
        if e_out.is_infinite() {
            return fresnel(p, e_in, k_in, e_out, k_out);
        }
        let de = e_out - e_in;
        match p {
            // κ_in² − κ_out² = (ε_in − ε_out) ξ²/c²
            Polarization::TE => -de * self.q2 / ((k_in + k_out) * (k_in + k_out)),
            // ε_out²κ_in² − ε_in²κ_out² = (ε_out − ε_in)((ε_out + ε_in)k² + ε_in ε_out ξ²/c²)
            Polarization::TM => {
                let a = e_out * k_in;
                let b = e_in * k_out;
                de * ((e_out + e_in) * k2 + e_in * e_out * self.q2) / ((a + b) * (a + b))
            }
        }
    }
}

/// Both sides of a gap resolved at one frequency.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedGap {
    pub(crate) xi: f64,
    pub(crate) eps_fluid: f64,
    left: ResolvedStack,
    right: ResolvedStack,
}

impl ResolvedGap {
    pub(crate) fn new(left: &Stack, right: &Stack, fluid: &Material, xi: f64) -> Result<Self> {
        let eps_fluid = if xi == 0.0 {
            match fluid.static_limit() {
                StaticLimit::Finite(e) => e,
                StaticLimit::Metallic => return Err(Error::domain("gap fluid must be non-metallic")),
            }
        } else {
            fluid.permittivity(xi)?
        };
        if !eps_fluid.is_finite() {
            return Err(Error::domain("gap fluid must be non-metallic"));
        }
        Ok(ResolvedGap {
            xi,
            eps_fluid,
            left: left.resolve(xi, eps_fluid)?,
            right: right.resolve(xi, eps_fluid)?,
        })
    }

    /// Smallest fluid decay constant, reached at k = 0.
    pub(crate) fn kappa0(&self) -> f64 {
        self.eps_fluid.sqrt() * self.xi / C
    }

    /// Smallest permittivity among the fluid and the media behind it.
    pub(crate) fn min_eps(&self) -> f64 {
        self.left.eps.iter().chain(self.right.eps.iter()).fold(self.eps_fluid, |m, &e| m.min(e))
    }

    /// Round-trip reflection products r_L·r_R for [TE, TM].
    pub(crate) fn products(&self, kappa_f: f64) -> [f64; 2] {
        let l = self.left.reflection(self.eps_fluid, kappa_f);
        let r = self.right.reflection(self.eps_fluid, kappa_f);
        [l[0] * r[0], l[1] * r[1]]
    }
}

/// Which densities a mode sum should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Channels {
    pub pressure: bool,
    pub energy: bool,
    pub pfa: bool,
}

impl Channels {
    pub(crate) const ALL: Channels = Channels { pressure: true, energy: true, pfa: true };
}

/// Mode kernels at `y = r_L r_R e^{-2κd}` summed over polarizations:
/// [y/(1-y), ln(1-y), -Li₂(y)].
#[inline]
pub(crate) fn mode_kernels(products: [f64; 2], decay: f64, ch: Channels) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for x in products {
        if x == 0.0 {
            continue;
        }
        let y = x * decay;
        if y >= 1.0 - LOG_GUARD {
            return Err(Error::numerical("reflection product too close to unity (log-singularity guard)", 1.0 - y));
        }
        if ch.pressure {
            out[0] += y / (1.0 - y);
        }
        if ch.energy {
            out[1] += (-y).ln_1p();
        }
        if ch.pfa {
            out[2] -= dilog(y);
        }
    }
    Ok(out)
}

/// Per-frequency densities of the Lifshitz integrals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrequencyIntegrand {
    /// f_P(ξ), Pa·s/rad; positive is attractive.
    pub pressure: f64,
    /// f_E(ξ), J·s/(m²·rad); negative is binding.
    pub energy: f64,
    /// ∫_d^∞ f_E(ξ; s) ds, J·s/(m·rad).
    pub pfa: f64,
}

/// Two stacks facing each other across a fluid gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapGeometry {
    pub left: Stack,
    pub right: Stack,
    pub fluid: Material,
    pub separation: f64,
}

impl GapGeometry {
    pub fn new(left: Stack, right: Stack, fluid: Material, separation: f64) -> Result<Self> {
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::domain(format!("separation must be positive, got {separation}")));
        }
        if fluid.is_metallic() {
            return Err(Error::domain(format!("gap fluid `{}` must be non-metallic", fluid.name)));
        }
        Ok(GapGeometry { left, right, fluid, separation })
    }

    pub fn with_separation(&self, d: f64) -> Result<Self> {
        GapGeometry::new(self.left.clone(), self.right.clone(), self.fluid.clone(), d)
    }

    pub(crate) fn resolve(&self, xi: f64) -> Result<ResolvedGap> {
        ResolvedGap::new(&self.left, &self.right, &self.fluid, xi)
    }
}

/// κ = √(k² + εξ²/c²).
pub fn kappa(eps: f64, xi: f64, k: f64) -> Result<f64> {
    if !(xi >= 0.0 && k >= 0.0) {
        return Err(Error::domain("ξ and k must be non-negative"));
    }
    if xi == 0.0 && k == 0.0 {
        return Err(Error::domain("κ undefined at ξ = k = 0"));
    }
    if xi == 0.0 {
        return Ok(k);
    }
    let q = xi / C;
    Ok((k * k + eps * q * q).sqrt())
}

/// Single-interface reflection coefficient going from medium `in` to `out`.
/// An infinite `eps_out` is a perfect reflector.
pub fn fresnel(p: Polarization, eps_in: f64, kappa_in: f64, eps_out: f64, kappa_out: f64) -> f64 {
    if eps_out.is_infinite() {
        return match p {
            Polarization::TE => -1.0,
            Polarization::TM => 1.0,
        };
    }
    match p {
        Polarization::TE => (kappa_in - kappa_out) / (kappa_in + kappa_out),
        Polarization::TM => {
            let a = eps_out * kappa_in;
            let b = eps_in * kappa_out;
            (a - b) / (a + b)
        }
    }
}

/// Reflection coefficient of `stack` seen from `fluid` at ξ > 0 and
/// transverse wavenumber `k`.
pub fn stack_reflection(stack: &Stack, fluid: &Material, xi: f64, k: f64, p: Polarization) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::domain("stack_reflection needs ξ > 0; use zero_frequency_reflection"));
    }
    let eps_f = fluid.permittivity(xi)?;
    let kf = kappa(eps_f, xi, k)?;
    let r = stack.resolve(xi, eps_f)?.reflection(eps_f, kf);
    Ok(r[p as usize])
}

/// ξ = 0 reflection: TE vanishes for non-magnetic media, TM uses static
/// permittivities with metals reflecting perfectly.
pub fn zero_frequency_reflection(stack: &Stack, fluid: &Material, k: f64, p: Polarization) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain("zero-frequency reflection needs k > 0"));
    }
    let eps_f = match fluid.static_limit() {
        StaticLimit::Finite(e) => e,
        StaticLimit::Metallic => return Err(Error::domain("fluid must be non-metallic")),
    };
    let r = stack.resolve(0.0, eps_f)?.reflection(eps_f, k);
    Ok(r[p as usize])
}

/// f_P, f_E and f_S at one imaginary frequency (ξ = 0 uses the static
/// reflection coefficients).
pub fn frequency_integrand(g: &GapGeometry, xi: f64) -> Result<FrequencyIntegrand> {
    frequency_integrand_with(g, xi, &QuadOptions::default())
}

pub fn frequency_integrand_with(g: &GapGeometry, xi: f64, opts: &QuadOptions) -> Result<FrequencyIntegrand> {
    if !(xi >= 0.0) {
        return Err(Error::domain(format!("imaginary frequency must be ≥ 0, got {xi}")));
    }
    let gap = g.resolve(xi)?;
    integrand_adaptive(&gap, g.separation, opts)
}

/// The k-integral in the variable u = 2κd, which decays like e^{-u}
/// independently of d and ξ.
pub(crate) fn integrand_adaptive(gap: &ResolvedGap, d: f64, opts: &QuadOptions) -> Result<FrequencyIntegrand> {
    let u0 = 2.0 * d * gap.kappa0();
    let breaks: Vec<f64> = [0.0, 1.0, 4.0, 12.0, 30.0, U_SPAN].iter().map(|b| u0 + b).collect();
    let q = integrate(
        |u| {
            let x = gap.products(u / (2.0 * d));
            let k = mode_kernels(x, (-u).exp(), Channels::ALL)?;
            Ok([u * u * k[0], u * k[1], k[2]])
        },
        &breaks,
        opts,
    )
    .map_err(|e| e.context(format!("k-integral at ξ = {:e} rad/s, d = {d:e} m", gap.xi)))?;
    Ok(FrequencyIntegrand {
        pressure: HBAR / (2.0 * PI * PI) / (2.0 * d).powi(3) * q.value[0],
        energy: HBAR / (4.0 * PI * PI) / (2.0 * d).powi(2) * q.value[1],
        pfa: HBAR / (4.0 * PI * PI) / (4.0 * d) * q.value[2],
    })
}

/// Sign of the pressure density from the ordering of three permittivities:
/// −1 (repulsive) when the fluid value lies strictly between the two
/// bodies', +1 otherwise. Metals enter as +∞.
pub fn predict_sign(eps1: f64, eps_fluid: f64, eps2: f64) -> i32 {
    if (eps1 < eps_fluid && eps_fluid < eps2) || (eps2 < eps_fluid && eps_fluid < eps1) {
        -1
    } else {
        1
    }
}
