//! Equilibrium Boltzmann statistics of a suspended body over an energy
//! landscape: mean separation, equal-tail 95% interval, barriers and
//! stiction factors.
//!
//! The density is p(z) ∝ exp(−U(z)/k_BT). U is sampled on a grid refined
//! until neighbouring samples differ by at most 0.01 k_BT and treated as
//! piecewise linear, so every panel integral is exact.

use rayon::prelude::*;

use crate::constants::K_B;
use crate::error::{Error, Result};
use crate::landscape::{
    find_equilibria, EnergyLandscape, Equilibrium, Landscape, LandscapeOptions, Stability, SuspensionCase,
    DEFAULT_D_RANGE, DEFAULT_N_SCAN,
};

/// Largest allowed energy step between neighbouring grid points, k_BT.
const MAX_STEP_KT: f64 = 0.01;
const INITIAL_POINTS: usize = 64;
const MAX_POINTS: usize = 2_000_000;
/// The suspension basin is cut where U exceeds its minimum by this, k_BT.
pub const BASIN_CUTOFF_KT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasinPolicy {
    /// Between the unstable equilibria around the lowest stable one,
    /// trimmed where U rises 30 k_BT above the minimum.
    SuspensionBasin,
    FullRange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannDomain {
    pub d_lo: f64,
    pub d_hi: f64,
    pub policy: BasinPolicy,
}

impl BoltzmannDomain {
    pub fn suspension(d_lo: f64, d_hi: f64) -> Self {
        BoltzmannDomain { d_lo, d_hi, policy: BasinPolicy::SuspensionBasin }
    }

    pub fn full_range(d_lo: f64, d_hi: f64) -> Self {
        BoltzmannDomain { d_lo, d_hi, policy: BasinPolicy::FullRange }
    }

    fn validate(&self) -> Result<()> {
        if !(self.d_lo > 0.0 && self.d_hi > self.d_lo && self.d_hi.is_finite()) {
            return Err(Error::domain(format!("invalid Boltzmann domain [{:e}, {:e}]", self.d_lo, self.d_hi)));
        }
        Ok(())
    }
}

impl Default for BoltzmannDomain {
    fn default() -> Self {
        BoltzmannDomain::suspension(DEFAULT_D_RANGE.0, DEFAULT_D_RANGE.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannStats {
    pub mean_d: f64,
    pub q025: f64,
    pub q975: f64,
    /// ∫ exp(−(U − U_min)/k_BT) dz divided by the domain length.
    pub normalization: f64,
    /// Total probability summed panel by panel after normalizing.
    pub total_mass: f64,
    /// Probability between q025 and q975 recomputed from the panels.
    pub interval_mass: f64,
    /// U(inner unstable) − U(stable) in k_BT; ∞ without an inner unstable
    /// point, NaN without a stable one.
    pub barrier_in: f64,
    pub landscape_t: f64,
    pub ensemble_t: f64,
    /// Interval actually integrated.
    pub support: (f64, f64),
    pub grid_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    /// Toward contact, k_BT.
    pub toward_contact: f64,
    /// Toward escape, k_BT; ∞ when there is no outer unstable point.
    pub toward_escape: f64,
    pub stable_d: f64,
}

/// Statistics for `case` with the Casimir energy taken at `landscape_t`
/// and the Boltzmann factor at `ensemble_t`.
pub fn boltzmann_stats(
    case: &SuspensionCase,
    landscape_t: f64,
    ensemble_t: f64,
    domain: &BoltzmannDomain,
    opts: &LandscapeOptions,
) -> Result<BoltzmannStats> {
    domain.validate()?;
    let l = Landscape::new(case, landscape_t, (domain.d_lo, domain.d_hi), opts)?;
    boltzmann_stats_on(&l, ensemble_t, domain)
}

/// Boltzmann averages of `ensemble_t` over the given landscape as a frozen
/// energy, one entry per ensemble temperature.
pub fn counterfactual_mean(
    case: &SuspensionCase,
    frozen_t: f64,
    ensemble_ts: &[f64],
    domain: &BoltzmannDomain,
    opts: &LandscapeOptions,
) -> Result<Vec<(f64, f64)>> {
    domain.validate()?;
    let l = Landscape::new(case, frozen_t, (domain.d_lo, domain.d_hi), opts)?;
    ensemble_ts.par_iter().map(|&t| Ok((t, boltzmann_stats_on(&l, t, domain)?.mean_d))).collect()
}

/// Statistics over an already built landscape.
pub fn boltzmann_stats_on<L: EnergyLandscape + ?Sized>(
    l: &L,
    ensemble_t: f64,
    domain: &BoltzmannDomain,
) -> Result<BoltzmannStats> {
    domain.validate()?;
    if !(ensemble_t > 0.0 && ensemble_t.is_finite()) {
        return Err(Error::domain(format!("ensemble temperature must be > 0, got {ensemble_t}")));
    }
    let kt = K_B * ensemble_t;
    let eqs = find_equilibria(l, (domain.d_lo, domain.d_hi), DEFAULT_N_SCAN)?;
    let basin = suspension_point(l, &eqs)?;
    let barrier_in = match &basin {
        Some((i, u0)) => match inner_unstable(&eqs, *i) {
            Some(e) => (l.energy(e.d_c)? - u0) / kt,
            None => f64::INFINITY,
        },
        None => f64::NAN,
    };
    let (a, b) = match domain.policy {
        BasinPolicy::FullRange => (domain.d_lo, domain.d_hi),
        BasinPolicy::SuspensionBasin => {
            let (i, u0) = basin.ok_or_else(|| Error::domain("landscape has no stable equilibrium in the domain"))?;
            let lo = inner_unstable(&eqs, i).map_or(domain.d_lo, |e| e.d_c);
            let hi = eqs.get(i + 1).map_or(domain.d_hi, |e| e.d_c);
            let d0 = eqs[i].d_c;
            let limit = u0 + BASIN_CUTOFF_KT * kt;
            (cutoff(l, d0, lo, limit)?, cutoff(l, d0, hi, limit)?)
        }
    };
    let grid = refine_grid(l, a, b, kt)?;
    Ok(integrate_density(&grid, kt, l.temperature(), ensemble_t, barrier_in))
}

/// Barriers around the lowest stable equilibrium of `l` in `d_range`.
pub fn barrier<L: EnergyLandscape + ?Sized>(l: &L, d_range: (f64, f64)) -> Result<Barrier> {
    let eqs = find_equilibria(l, d_range, DEFAULT_N_SCAN)?;
    let (i, u0) = suspension_point(l, &eqs)?.ok_or_else(|| Error::domain("landscape has no stable equilibrium"))?;
    let kt = K_B * l.temperature();
    if !(kt > 0.0) {
        return Err(Error::domain("barrier needs T > 0"));
    }
    let toward_contact = match inner_unstable(&eqs, i) {
        Some(e) => (l.energy(e.d_c)? - u0) / kt,
        None => f64::INFINITY,
    };
    let toward_escape = match eqs.get(i + 1) {
        Some(e) => (l.energy(e.d_c)? - u0) / kt,
        None => f64::INFINITY,
    };
    Ok(Barrier { toward_contact, toward_escape, stable_d: eqs[i].d_c })
}

/// Barriers of `case` at temperature `t` over the default scan window.
pub fn case_barrier(case: &SuspensionCase, t: f64, opts: &LandscapeOptions) -> Result<Barrier> {
    let l = Landscape::new(case, t, DEFAULT_D_RANGE, opts)?;
    barrier(&l, DEFAULT_D_RANGE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StictionFactor {
    /// exp(−barrier): a relative rate, without any attempt frequency.
    pub value: f64,
    /// The factor is below the smallest normal double.
    pub underflow: bool,
}

pub fn stiction_exponent(barrier_kt: f64) -> Result<StictionFactor> {
    if !(barrier_kt >= 0.0) {
        return Err(Error::domain(format!("barrier must be ≥ 0, got {barrier_kt}")));
    }
    let value = (-barrier_kt).exp();
    if value < f64::MIN_POSITIVE {
        return Ok(StictionFactor { value: 0.0, underflow: true });
    }
    Ok(StictionFactor { value, underflow: false })
}

/// Index and energy of the lowest stable equilibrium.
fn suspension_point<L: EnergyLandscape + ?Sized>(l: &L, eqs: &[Equilibrium]) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in eqs.iter().enumerate() {
        if e.stability != Stability::Stable {
            continue;
        }
        let u = l.energy(e.d_c)?;
        if best.is_none_or(|(_, b)| u < b) {
            best = Some((i, u));
        }
    }
    Ok(best)
}

fn inner_unstable(eqs: &[Equilibrium], stable: usize) -> Option<&Equilibrium> {
    stable.checked_sub(1).map(|j| &eqs[j])
}

/// Point between `from` and `to` where U first reaches `limit`, or `to`.
fn cutoff<L: EnergyLandscape + ?Sized>(l: &L, from: f64, to: f64, limit: f64) -> Result<f64> {
    let n = 256;
    let mut prev = from;
    for i in 1..=n {
        let x = from * (to / from).powf(i as f64 / n as f64);
        if l.energy(x)? > limit {
            let (mut lo, mut hi) = (prev, x);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if l.energy(m)? > limit {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = x;
    }
    Ok(to)
}

/// Samples (z, U) with |ΔU| ≤ 0.01 k_BT between neighbours.
fn refine_grid<L: EnergyLandscape + ?Sized>(l: &L, a: f64, b: f64, kt: f64) -> Result<Vec<(f64, f64)>> {
    let n = INITIAL_POINTS;
    let xs: Vec<f64> =
        (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect();
    let mut pts: Vec<(f64, f64)> = xs.par_iter().map(|&x| Ok((x, l.energy(x)?))).collect::<Result<_>>()?;
    loop {
        let mids: Vec<usize> =
            (0..pts.len() - 1).filter(|&i| (pts[i + 1].1 - pts[i].1).abs() > MAX_STEP_KT * kt).collect();
        if mids.is_empty() {
            return Ok(pts);
        }
        if pts.len() + mids.len() > MAX_POINTS {
            return Err(Error::numerical("Boltzmann grid refinement exceeded its point budget", mids.len() as f64));
        }
        let new: Vec<(f64, f64)> = mids
            .par_iter()
            .map(|&i| {
                let x = 0.5 * (pts[i].0 + pts[i + 1].0);
                Ok((x, l.energy(x)?))
            })
            .collect::<Result<_>>()?;
        let mut merged = Vec::with_capacity(pts.len() + new.len());
        let mut k = 0;
        for (i, &p) in pts.iter().enumerate() {
            merged.push(p);
            if k < mids.len() && mids[k] == i {
                merged.push(new[k]);
                k += 1;
            }
        }
        pts = merged;
    }
}

/// (1 − e^{−δ})/δ.
fn e0(delta: f64) -> f64 {
    if delta.abs() < 1e-12 { 1.0 - 0.5 * delta } else { -(-delta).exp_m1() / delta }
}

/// ∫₀¹ t e^{−δt} dt.
fn e1(delta: f64) -> f64 {
    if delta.abs() < 1e-3 {
        0.5 - delta / 3.0 + delta * delta / 8.0 - delta * delta * delta / 30.0
    } else {
        (1.0 - (1.0 + delta) * (-delta).exp()) / (delta * delta)
    }
}

fn integrate_density(pts: &[(f64, f64)], kt: f64, landscape_t: f64, ensemble_t: f64, barrier_in: f64) -> BoltzmannStats {
    let u_min = pts.iter().fold(f64::INFINITY, |m, p| m.min(p.1));
    let phi: Vec<f64> = pts.iter().map(|p| (p.1 - u_min) / kt).collect();
    let n = pts.len() - 1;
    let mut mass = Vec::with_capacity(n);
    let mut moment = 0.0;
    for i in 0..n {
        let h = pts[i + 1].0 - pts[i].0;
        let delta = phi[i + 1] - phi[i];
        let w = (-phi[i]).exp();
        let m = h * w * e0(delta);
        moment += pts[i].0 * m + h * h * w * e1(delta);
        mass.push(m);
    }
    let z: f64 = mass.iter().sum();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for m in &mass {
        cum.push(cum.last().unwrap() + m / z);
    }
    let quantile = |q: f64| -> f64 {
        let i = match cum.iter().position(|&c| c >= q) {
            Some(0) => return pts[0].0,
            Some(i) => i - 1,
            None => n - 1,
        };
        let h = pts[i + 1].0 - pts[i].0;
        let delta = phi[i + 1] - phi[i];
        let r = (q - cum[i]) * z;
        let w = (-phi[i]).exp();
        let x = if delta.abs() < 1e-12 { r / w } else { -(h / delta) * (-r * delta / (h * w)).ln_1p() };
        pts[i].0 + x.clamp(0.0, h)
    };
    let (q025, q975) = (quantile(0.025), quantile(0.975));
    let cdf = |x: f64| -> f64 {
        let i = pts.partition_point(|p| p.0 <= x).clamp(1, n) - 1;
        let h = pts[i + 1].0 - pts[i].0;
        let delta = phi[i + 1] - phi[i];
        let t = ((x - pts[i].0) / h).clamp(0.0, 1.0);
        let part = h * t * (-phi[i]).exp() * e0(delta * t);
        cum[i] + part / z
    };
    BoltzmannStats {
        mean_d: moment / z,
        q025,
        q975,
        normalization: z / (pts[n].0 - pts[0].0),
        total_mass: mass.iter().map(|m| m / z).sum(),
        interval_mass: cdf(q975) - cdf(q025),
        barrier_in,
        landscape_t,
        ensemble_t,
        support: (pts[0].0, pts[n].0),
        grid_points: pts.len(),
    }
}
