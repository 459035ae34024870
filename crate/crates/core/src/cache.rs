//! Fixed transverse-wavenumber grids for evaluating one landscape at many
//! separations.
//!
//! For a given temperature and separation window the Matsubara frequencies
//! and the k-nodes are chosen once, independent of `d`. The reflection
//! products `r_L r_R` at each node then do not depend on `d` either, so they
//! can be stored and reused: a new separation only costs exponentials.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::constants::{matsubara_spacing, C, HBAR};
use crate::error::{Error, Result};
use crate::material::Material;
use crate::quadrature::kronrod21;
use crate::stratified::{mode_kernels, Channels, FrequencyIntegrand, ResolvedGap, Stack, U_SPAN};

/// Geometric growth of successive k panels.
const PANEL_RATIO: f64 = 2.0;
/// Smallest first panel relative to 1/d_max.
const MIN_FIRST_PANEL: f64 = 1e-6;

#[derive(Debug)]
struct FrequencyBlock {
    xi: f64,
    /// Sum weight: Matsubara spacing, halved for n = 0.
    weight: f64,
    gap: ResolvedGap,
    /// (k, quadrature weight, fluid κ), ascending in κ.
    nodes: Vec<(f64, f64, f64)>,
    products: Option<Vec<[f64; 2]>>,
}

/// Frequencies, k-nodes and (optionally) stored reflection products for
/// one temperature and separation window.
#[derive(Debug)]
pub struct ModeCache {
    blocks: Vec<FrequencyBlock>,
    d_range: (f64, f64),
    temperature: f64,
    evaluations: AtomicU64,
}

impl ModeCache {
    /// Builds the grid. With `store` set every reflection product is
    /// computed now; otherwise they are recomputed on each evaluation.
    pub fn build(
        left: &Stack,
        right: &Stack,
        fluid: &Material,
        temperature: f64,
        d_range: (f64, f64),
        store: bool,
    ) -> Result<Self> {
        let (d_min, d_max) = d_range;
        if !(d_min > 0.0 && d_max > d_min && d_max.is_finite()) {
            return Err(Error::domain(format!("invalid separation window [{d_min:e}, {d_max:e}]")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::domain(format!("mode grid needs T > 0, got {temperature}")));
        }
        let dxi = matsubara_spacing(temperature);
        let k_max = 0.5 * U_SPAN / d_min;
        let mut blocks = Vec::new();
        for n in 0usize.. {
            let xi = n as f64 * dxi;
            let gap = ResolvedGap::new(left, right, fluid, xi)?;
            if 2.0 * gap.kappa0() * d_min >= U_SPAN {
                break;
            }
            let q = xi / C;
            let k_top = (k_max * k_max - gap.kappa0() * gap.kappa0()).max(0.0).sqrt();
            let mut b = (0.25 / d_max).min(if q > 0.0 { 0.25 * gap.min_eps().max(1.0).sqrt() * q } else { f64::INFINITY });
            b = b.max(MIN_FIRST_PANEL / d_max).min(k_top);
            let mut edges = vec![0.0, b];
            while *edges.last().unwrap() < k_top {
                let next = (edges.last().unwrap() * PANEL_RATIO).min(k_top);
                edges.push(next);
            }
            let eps_f_q2 = gap.kappa0() * gap.kappa0();
            let nodes: Vec<(f64, f64, f64)> = edges
                .windows(2)
                .filter(|w| w[1] > w[0])
                .flat_map(|w| kronrod21(w[0], w[1]))
                .map(|(k, wt)| (k, wt, (k * k + eps_f_q2).sqrt()))
                .collect();
            blocks.push(FrequencyBlock {
                xi,
                weight: if n == 0 { 0.5 * dxi } else { dxi },
                gap,
                nodes,
                products: None,
            });
            if n > 10_000_000 {
                return Err(Error::numerical("mode grid frequency count exploded", n as f64));
            }
        }
        let cache = ModeCache { blocks, d_range, temperature, evaluations: AtomicU64::new(0) };
        if store {
            let mut cache = cache;
            let mut count = 0u64;
            for b in &mut cache.blocks {
                let p: Vec<[f64; 2]> = b.nodes.iter().map(|&(_, _, kf)| b.gap.products(kf)).collect();
                count += p.len() as u64;
                b.products = Some(p);
            }
            cache.evaluations.store(count, Ordering::Relaxed);
            return Ok(cache);
        }
        Ok(cache)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn d_range(&self) -> (f64, f64) {
        self.d_range
    }

    pub fn is_stored(&self) -> bool {
        self.blocks.first().is_some_and(|b| b.products.is_some())
    }

    pub fn frequency_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn node_count(&self) -> usize {
        self.blocks.iter().map(|b| b.nodes.len()).sum()
    }

    /// Reflection-product evaluations performed so far.
    pub fn reflection_evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Frequency-summed densities at separation `d`: pressure (Pa),
    /// energy (J/m²) and the proximity-force potential (J/m).
    pub(crate) fn totals(&self, d: f64, ch: Channels) -> Result<FrequencyIntegrand> {
        let (lo, hi) = self.d_range;
        if !(d >= lo * (1.0 - 1e-12) && d <= hi * (1.0 + 1e-12)) {
            return Err(Error::domain(format!("separation {d:e} m outside the landscape window [{lo:e}, {hi:e}]")));
        }
        let mut acc = [0.0f64; 3];
        let mut fresh = 0u64;
        for b in &self.blocks {
            let mut s = [0.0f64; 3];
            for (i, &(k, w, kf)) in b.nodes.iter().enumerate() {
                let u = 2.0 * kf * d;
                if u > U_SPAN {
                    break;
                }
                let x = match &b.products {
                    Some(p) => p[i],
                    None => {
                        fresh += 1;
                        b.gap.products(kf)
                    }
                };
                let m = mode_kernels(x, (-u).exp(), ch)
                    .map_err(|e| e.context(format!("ξ = {:e} rad/s, d = {d:e} m", b.xi)))?;
                s[0] += w * k * kf * m[0];
                s[1] += w * k * m[1];
                s[2] += w * k / (2.0 * kf) * m[2];
            }
            for j in 0..3 {
                acc[j] += b.weight * s[j];
            }
        }
        if fresh > 0 {
            self.evaluations.fetch_add(fresh, Ordering::Relaxed);
        }
        Ok(FrequencyIntegrand {
            pressure: HBAR / (2.0 * PI * PI) * acc[0],
            energy: HBAR / (4.0 * PI * PI) * acc[1],
            pfa: HBAR / (4.0 * PI * PI) * acc[2],
        })
    }
}
