use rayon::prelude::*;

use super::EnergyLandscape;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub d_c: f64,
    pub stability: Stability,
    pub temperature: f64,
}

const ROOT_RTOL: f64 = 1e-10;

/// Log-spaced points from `lo` to `hi` inclusive.
pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Zeros of the force in `d_range`, located on a log-spaced scan of
/// `n_scan` points and refined by bisection, sorted by separation.
///
/// A zero where the force turns from repulsive to attractive with growing
/// `d` is stable. Zero force counts as repulsive.
pub fn find_equilibria<L: EnergyLandscape + ?Sized>(
    landscape: &L,
    d_range: (f64, f64),
    n_scan: usize,
) -> Result<Vec<Equilibrium>> {
    let (lo, hi) = d_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::domain(format!("invalid separation window [{lo:e}, {hi:e}]")));
    }
    if n_scan < 16 {
        return Err(Error::domain(format!("n_scan must be ≥ 16, got {n_scan}")));
    }
    let grid = log_grid(lo, hi, n_scan);
    let forces: Vec<f64> = grid.par_iter().map(|&d| landscape.force(d)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..n_scan - 1 {
        let (a, b) = (forces[i] >= 0.0, forces[i + 1] >= 0.0);
        if a == b {
            continue;
        }
        let d_c = bisect(landscape, grid[i], grid[i + 1], a)?;
        let stability = if a { Stability::Stable } else { Stability::Unstable };
        out.push(Equilibrium { d_c, stability, temperature: landscape.temperature() });
    }
    debug_assert!(out.windows(2).all(|w| w[0].stability != w[1].stability && w[0].d_c < w[1].d_c));
    Ok(out)
}

fn bisect<L: EnergyLandscape + ?Sized>(l: &L, mut x0: f64, mut x1: f64, left_positive: bool) -> Result<f64> {
    while (x1 - x0) > ROOT_RTOL * x0 {
        let m = (x0 * x1).sqrt();
        if m <= x0 || m >= x1 {
            break;
        }
        if (l.force(m)? >= 0.0) == left_positive {
            x0 = m;
        } else {
            x1 = m;
        }
    }
    Ok(0.5 * (x0 + x1))
}
