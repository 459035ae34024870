//! Finite-temperature Matsubara sums and zero-temperature frequency
//! integrals of the per-frequency densities.
//!
//! At temperature T the pressure is
//! `P = (2πk_BT/ħ) Σ'_n f_P(ξ_n)` with `ξ_n = 2πn k_BT/ħ` and the n = 0 term
//! halved; the energy and the proximity-force potential follow the same
//! rule. Below [`ZERO_T_ROUTE`] the sum is replaced by `∫_0^∞ f(ξ) dξ`.

use crate::constants::{matsubara_spacing, C};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::stratified::{integrand_adaptive, FrequencyIntegrand, GapGeometry};

/// Temperatures below this (K) are evaluated with the T = 0 integral.
pub const ZERO_T_ROUTE: f64 = 1.0;

/// Settings for a thermal evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    pub temperature: f64,
    /// Relative truncation target for the Matsubara tail.
    pub truncation: f64,
    pub n_max_cap: usize,
    /// Tolerances of the inner k-integrals (and the outer ξ integral at T = 0).
    pub quad: QuadOptions,
}

impl ThermalSpec {
    pub fn new(temperature: f64) -> Self {
        ThermalSpec { temperature, truncation: 1e-10, n_max_cap: 1_000_000, quad: QuadOptions::default() }
    }

    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_quad(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::domain(format!("temperature must be ≥ 0 K, got {}", self.temperature)));
        }
        if !(self.truncation > 0.0 && self.truncation < 1.0) {
            return Err(Error::domain(format!("truncation must lie in (0, 1), got {}", self.truncation)));
        }
        if self.n_max_cap == 0 {
            return Err(Error::domain("n_max_cap must be positive"));
        }
        Ok(())
    }
}

/// How a spectral quantity was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralPath {
    Matsubara,
    ZeroTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult {
    pub value: f64,
    /// Matsubara terms summed, including n = 0 (0 on the T = 0 path).
    pub n_terms_used: usize,
    /// Estimated magnitude of the neglected tail, or the quadrature error
    /// estimate on the T = 0 path.
    pub tail_estimate: f64,
    pub path: SpectralPath,
}

/// All three spectral quantities from one pass over the frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapTotals {
    /// Pa; positive is attractive.
    pub pressure: SpectralResult,
    /// J/m²; negative is binding.
    pub energy: SpectralResult,
    /// `∫_d^∞ E(s) ds`, J/m.
    pub pfa: SpectralResult,
}

/// n-th Matsubara frequency at temperature `t` (K).
pub fn matsubara_xi(t: f64, n: usize) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("Matsubara frequencies need T > 0, got {t}")));
    }
    Ok(n as f64 * matsubara_spacing(t))
}

/// Casimir–Lifshitz pressure (positive = attraction).
pub fn pressure(g: &GapGeometry, spec: &ThermalSpec) -> Result<SpectralResult> {
    Ok(evaluate(g, spec)?.pressure)
}

/// Interaction free energy per unit area (negative = binding).
pub fn free_energy_area(g: &GapGeometry, spec: &ThermalSpec) -> Result<SpectralResult> {
    Ok(evaluate(g, spec)?.energy)
}

/// Zero-temperature pressure by direct frequency integration.
pub fn pressure_t0(g: &GapGeometry, opts: &QuadOptions) -> Result<SpectralResult> {
    Ok(zero_temperature(g, opts)?.pressure)
}

/// P(T) − P(0).
pub fn temperature_correction(g: &GapGeometry, spec: &ThermalSpec) -> Result<f64> {
    let p = pressure(g, spec)?;
    let p0 = pressure_t0(g, &spec.quad)?;
    Ok(p.value - p0.value)
}

/// Pressure from the n = 0 term alone, the high-temperature limit.
pub fn classical_pressure(g: &GapGeometry, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("classical limit needs T > 0"));
    }
    let f0 = integrand_adaptive(&g.resolve(0.0)?, g.separation, &QuadOptions::default())?;
    Ok(0.5 * matsubara_spacing(t) * f0.pressure)
}

/// Pressure, energy and proximity-force potential at the spec's temperature.
pub fn evaluate(g: &GapGeometry, spec: &ThermalSpec) -> Result<GapTotals> {
    spec.validate()?;
    if spec.temperature < ZERO_T_ROUTE {
        return zero_temperature(g, &spec.quad);
    }
    let d = g.separation;
    let t = spec.temperature;
    let sum = matsubara_sum(spec, |xi| integrand_adaptive(&g.resolve(xi)?, d, &spec.quad))
        .map_err(|e| e.context(format!("d = {d:e} m, T = {t} K")))?;
    Ok(sum)
}

/// Tracks the stopping rule for one channel of a Matsubara series.
#[derive(Debug, Clone, Copy, Default)]
struct TailTracker {
    sum: f64,
    sum_abs: f64,
    prev_abs: f64,
    tail: f64,
    streak: usize,
}

impl TailTracker {
    fn push_first(&mut self, t0: f64) {
        self.sum = t0;
        self.sum_abs = t0.abs();
        self.prev_abs = t0.abs();
    }

    fn push(&mut self, t: f64, truncation: f64) {
        let a = t.abs();
        self.sum += t;
        self.sum_abs += a;
        let non_increasing = a <= self.prev_abs;
        self.tail = if a == 0.0 {
            0.0
        } else if non_increasing && self.prev_abs > 0.0 {
            let q = a / self.prev_abs;
            if q < 1.0 { a * q / (1.0 - q) } else { f64::INFINITY }
        } else {
            f64::INFINITY
        };
        if non_increasing && self.tail <= truncation * self.sum_abs {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.prev_abs = a;
    }
}

const STREAK: usize = 3;

pub(crate) fn matsubara_sum<F>(spec: &ThermalSpec, mut term: F) -> Result<GapTotals>
where
    F: FnMut(f64) -> Result<FrequencyIntegrand>,
{
    let dxi = matsubara_spacing(spec.temperature);
    let f0 = term(0.0)?;
    let mut tr = [TailTracker::default(); 3];
    tr[0].push_first(0.5 * f0.pressure);
    tr[1].push_first(0.5 * f0.energy);
    tr[2].push_first(0.5 * f0.pfa);
    let mut n = 1usize;
    loop {
        if n >= spec.n_max_cap {
            let tail = tr.iter().map(|t| t.tail).fold(0.0, f64::max);
            return Err(Error::numerical(
                format!("Matsubara series not converged after {n} terms"),
                tail * dxi,
            ));
        }
        let f = term(n as f64 * dxi)?;
        tr[0].push(f.pressure, spec.truncation);
        tr[1].push(f.energy, spec.truncation);
        tr[2].push(f.pfa, spec.truncation);
        n += 1;
        if tr.iter().all(|t| t.streak >= STREAK) {
            break;
        }
    }
    let wrap = |t: &TailTracker| SpectralResult {
        value: dxi * t.sum,
        n_terms_used: n,
        tail_estimate: dxi * t.tail,
        path: SpectralPath::Matsubara,
    };
    Ok(GapTotals { pressure: wrap(&tr[0]), energy: wrap(&tr[1]), pfa: wrap(&tr[2]) })
}

/// Outer breakpoints in s = 2ξd/c.
const S_BREAKS: [f64; 7] = [0.0, 0.5, 2.0, 6.0, 15.0, 40.0, 80.0];

fn zero_temperature(g: &GapGeometry, opts: &QuadOptions) -> Result<GapTotals> {
    let d = g.separation;
    let scale = C / (2.0 * d);
    let inner = QuadOptions { rel_tol: opts.rel_tol * 0.1, abs_tol: opts.abs_tol * 0.1, ..*opts };
    let q = integrate(
        |s| {
            let f = integrand_adaptive(&g.resolve(s * scale)?, d, &inner)?;
            Ok([f.pressure, f.energy, f.pfa])
        },
        &S_BREAKS,
        opts,
    )
    .map_err(|e| e.context(format!("zero-temperature ξ integral at d = {d:e} m")))?;
    let wrap = |i: usize| SpectralResult {
        value: scale * q.value[i],
        n_terms_used: 0,
        tail_estimate: scale * q.error[i],
        path: SpectralPath::ZeroTemperature,
    };
    Ok(GapTotals { pressure: wrap(0), energy: wrap(1), pfa: wrap(2) })
}
