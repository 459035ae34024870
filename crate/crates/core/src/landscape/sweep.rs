use rayon::prelude::*;

use super::equilibria::log_grid;
use super::{find_equilibria, EnergyLandscape, Equilibrium, LandscapeFamily, Stability, DEFAULT_N_SCAN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub n_scan: usize,
    /// Width of the final temperature bracket around each critical point, K.
    pub tc_tol: f64,
    /// Locate critical temperatures between grid points.
    pub refine: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { n_scan: DEFAULT_N_SCAN, tc_tol: 0.01, refine: true }
    }
}

/// Equilibria of one stability followed continuously in temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: usize,
    pub stability: Stability,
    pub samples: Vec<Equilibrium>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BifurcationKind {
    /// The pair exists below T_c and vanishes above.
    VanishesAbove,
    /// The pair appears above T_c.
    AppearsAbove,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bifurcation {
    pub t_c: f64,
    pub d_merge: f64,
    /// Branch ids of the merging pair, smaller separation first.
    pub branch_a: usize,
    pub branch_b: usize,
    pub kind: BifurcationKind,
    /// Final temperature bracket; the pair exists at `t_exists`.
    pub t_exists: f64,
    pub t_gone: f64,
    /// Extremal |force| between the pair at `t_exists`, relative to the
    /// largest |force| in the search window.
    pub force_residual: f64,
    /// |dF/d ln d| at the merge point, relative to the same scale.
    pub slope_residual: f64,
    /// Separation of the two roots at `t_exists`, relative to `d_merge`.
    pub pair_gap: f64,
    /// False when the pair could not be bracketed and `t_c` is only the
    /// grid estimate.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub temperatures: Vec<f64>,
    pub equilibria: Vec<Vec<Equilibrium>>,
    pub branches: Vec<Branch>,
    pub bifurcations: Vec<Bifurcation>,
}

/// Evenly spaced temperatures from `t_lo` to `t_hi` inclusive.
pub fn temperature_grid(t_lo: f64, t_hi: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_lo >= 0.0 && t_hi >= t_lo && t_hi.is_finite()) {
        return Err(Error::domain(format!("invalid temperature grid {t_lo}..{t_hi} step {dt}")));
    }
    let n = ((t_hi - t_lo) / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| t_lo + i as f64 * dt).collect())
}

/// Equilibria at every temperature, linked into branches, with critical
/// temperatures where stable/unstable pairs appear or vanish.
pub fn sweep_temperature<F: LandscapeFamily>(
    family: &F,
    temperatures: &[f64],
    d_range: (f64, f64),
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if temperatures.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("temperatures must be strictly increasing"));
    }
    if !(opts.tc_tol > 0.0) {
        return Err(Error::domain("tc_tol must be positive"));
    }
    let equilibria: Vec<Vec<Equilibrium>> = temperatures
        .par_iter()
        .map(|&t| {
            let l = family.at_temperature(t, d_range)?;
            find_equilibria(&l, d_range, opts.n_scan)
        })
        .collect::<Result<_>>()?;

    let mut branches: Vec<Branch> = Vec::new();
    let mut events: Vec<PairEvent> = Vec::new();
    let mut ids: Vec<usize> = Vec::new();
    for (k, eqs) in equilibria.iter().enumerate() {
        let mut new_ids = vec![usize::MAX; eqs.len()];
        let open = |e: &Equilibrium, branches: &mut Vec<Branch>| {
            branches.push(Branch { id: branches.len(), stability: e.stability, samples: vec![*e] });
            branches.len() - 1
        };
        if k == 0 {
            for (j, e) in eqs.iter().enumerate() {
                new_ids[j] = open(e, &mut branches);
            }
        } else {
            let prev = &equilibria[k - 1];
            for op in align(prev, eqs) {
                match op {
                    Op::Match(i, j) => {
                        new_ids[j] = ids[i];
                        branches[ids[i]].samples.push(eqs[j]);
                    }
                    Op::InsertPair(j) => {
                        new_ids[j] = open(&eqs[j], &mut branches);
                        new_ids[j + 1] = open(&eqs[j + 1], &mut branches);
                        events.push(PairEvent {
                            exists_at: k,
                            gone_at: k - 1,
                            index: j,
                            ids: (new_ids[j], new_ids[j + 1]),
                        });
                    }
                    Op::InsertEnd(j) => new_ids[j] = open(&eqs[j], &mut branches),
                    Op::DeletePair(i) => events.push(PairEvent { exists_at: k - 1, gone_at: k, index: i, ids: (ids[i], ids[i + 1]) }),
                    Op::DeleteEnd(_) => {}
                }
            }
        }
        ids = new_ids;
    }

    let bifurcations = events
        .par_iter()
        .map(|ev| refine(family, temperatures, &equilibria, ev, d_range, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut bifurcations = bifurcations;
    bifurcations.sort_by(|a, b| a.t_c.total_cmp(&b.t_c).then(a.branch_a.cmp(&b.branch_a)));
    Ok(SweepResult { temperatures: temperatures.to_vec(), equilibria, branches, bifurcations })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Match(usize, usize),
    DeletePair(usize),
    InsertPair(usize),
    DeleteEnd(usize),
    InsertEnd(usize),
}

const EVENT_COST: f64 = 1.0;

/// Minimum-cost alignment of consecutive equilibrium lists. Matching
/// costs |ln(d/d')| and needs equal stability; a stable/unstable pair may
/// appear or vanish anywhere; a single equilibrium may only cross the
/// lower or upper edge of the window.
fn align(a: &[Equilibrium], b: &[Equilibrium]) -> Vec<Op> {
    let (m, n) = (a.len(), b.len());
    let mut cost = vec![vec![f64::INFINITY; n + 1]; m + 1];
    let mut choice = vec![vec![None; n + 1]; m + 1];
    cost[m][n] = 0.0;
    for i in (0..=m).rev() {
        for j in (0..=n).rev() {
            if i == m && j == n {
                continue;
            }
            let mut best = (f64::INFINITY, None);
            let mut consider = |c: f64, op: Op| {
                if c < best.0 {
                    best = (c, Some(op));
                }
            };
            if i < m && j < n && a[i].stability == b[j].stability {
                consider((a[i].d_c / b[j].d_c).ln().abs() + cost[i + 1][j + 1], Op::Match(i, j));
            }
            if i + 1 < m && a[i].stability != a[i + 1].stability {
                consider(EVENT_COST + cost[i + 2][j], Op::DeletePair(i));
            }
            if j + 1 < n && b[j].stability != b[j + 1].stability {
                consider(EVENT_COST + cost[i][j + 2], Op::InsertPair(j));
            }
            if i < m && ((i == 0 && j == 0) || (i == m - 1 && j == n)) {
                consider(EVENT_COST + cost[i + 1][j], Op::DeleteEnd(i));
            }
            if j < n && ((i == 0 && j == 0) || (j == n - 1 && i == m)) {
                consider(EVENT_COST + cost[i][j + 1], Op::InsertEnd(j));
            }
            cost[i][j] = best.0;
            choice[i][j] = best.1;
        }
    }
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < m || j < n {
        let op = choice[i][j].expect("alignment always has a path");
        ops.push(op);
        match op {
            Op::Match(..) => {
                i += 1;
                j += 1;
            }
            Op::DeletePair(_) => i += 2,
            Op::InsertPair(_) => j += 2,
            Op::DeleteEnd(_) => i += 1,
            Op::InsertEnd(_) => j += 1,
        }
    }
    ops
}

#[derive(Debug, Clone, Copy)]
struct PairEvent {
    exists_at: usize,
    gone_at: usize,
    /// Index of the lower member in the equilibria at `exists_at`.
    index: usize,
    ids: (usize, usize),
}

const WINDOW_SAMPLES: usize = 48;

struct Probe {
    /// max of s·F over the window; the pair exists iff positive.
    peak: f64,
    argmax: f64,
    scale: f64,
}

/// Extremum of the force between the pair. `s` is +1 when the force is
/// positive between the two roots (lower member unstable).
fn probe<L: EnergyLandscape>(l: &L, window: (f64, f64), s: f64) -> Result<Probe> {
    let xs = log_grid(window.0, window.1, WINDOW_SAMPLES);
    let fs: Vec<f64> = xs.iter().map(|&d| Ok(s * l.force(d)?)).collect::<Result<_>>()?;
    let scale = fs.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let (ib, _) = fs.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &f)| if f > acc.1 { (i, f) } else { acc });
    let (mut a, mut b) = (xs[ib.saturating_sub(1)].ln(), xs[(ib + 1).min(WINDOW_SAMPLES - 1)].ln());
    let g = |x: f64| -> Result<f64> { Ok(s * l.force(x.exp())?) };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d)?;
        }
    }
    let (mut peak, mut argmax) = if fc > fd { (fc, c.exp()) } else { (fd, d.exp()) };
    if fs[ib] > peak {
        peak = fs[ib];
        argmax = xs[ib];
    }
    Ok(Probe { peak, argmax, scale: scale.max(f64::MIN_POSITIVE) })
}

fn refine<F: LandscapeFamily>(
    family: &F,
    temps: &[f64],
    eqs: &[Vec<Equilibrium>],
    ev: &PairEvent,
    d_range: (f64, f64),
    opts: &SweepOptions,
) -> Result<Bifurcation> {
    let list = &eqs[ev.exists_at];
    let (lo_eq, hi_eq) = (list[ev.index], list[ev.index + 1]);
    let s = if lo_eq.stability == Stability::Unstable { 1.0 } else { -1.0 };
    let w_lo = if ev.index > 0 { (list[ev.index - 1].d_c * lo_eq.d_c).sqrt() } else { d_range.0 };
    let w_hi = list.get(ev.index + 2).map_or(d_range.1, |e| (e.d_c * hi_eq.d_c).sqrt());
    let window = (w_lo, w_hi);
    let (mut t_in, mut t_out) = (temps[ev.exists_at], temps[ev.gone_at]);
    let kind = if t_in < t_out { BifurcationKind::VanishesAbove } else { BifurcationKind::AppearsAbove };
    let at = |t: f64| -> Result<Probe> {
        let l = family.at_temperature(t, window)?;
        probe(&l, window, s).map_err(|e| e.context(format!("refining critical temperature near T = {t} K")))
    };
    let mut best = at(t_in)?;
    let mut refined = opts.refine && best.peak > 0.0;
    if refined && at(t_out)?.peak > 0.0 {
        refined = false;
    }
    if refined {
        while (t_out - t_in).abs() > opts.tc_tol {
            let mid = 0.5 * (t_in + t_out);
            let p = at(mid)?;
            if p.peak > 0.0 {
                t_in = mid;
                best = p;
            } else {
                t_out = mid;
            }
        }
    }
    let l = family.at_temperature(t_in, window)?;
    let h = 1e-4;
    let dm = best.argmax.clamp(window.0 * (1.0 + h), window.1 / (1.0 + h));
    let slope = (l.force(dm * (1.0 + h))? - l.force(dm / (1.0 + h))?) / (2.0 * h);
    let pair_gap = if best.peak > 0.0 {
        let left = root(&l, window.0, dm, s)?;
        let right = root(&l, dm, window.1, s)?;
        (right - left) / dm
    } else {
        0.0
    };
    Ok(Bifurcation {
        t_c: 0.5 * (t_in + t_out),
        d_merge: best.argmax,
        branch_a: ev.ids.0,
        branch_b: ev.ids.1,
        kind,
        t_exists: t_in,
        t_gone: t_out,
        force_residual: best.peak.abs() / best.scale,
        slope_residual: slope.abs() / best.scale,
        pair_gap,
        refined,
    })
}

/// Zero of s·F between `a` and `b`, where s·F(inner end) > 0 and the
/// outer end is ≤ 0; returns the end itself if no sign change.
fn root<L: EnergyLandscape>(l: &L, a: f64, b: f64, s: f64) -> Result<f64> {
    let (fa, fb) = (s * l.force(a)?, s * l.force(b)?);
    if (fa > 0.0) == (fb > 0.0) {
        return Ok(if fa > 0.0 { a } else { b });
    }
    let (mut x0, mut x1) = (a, b);
    let left_pos = fa > 0.0;
    while x1 - x0 > 1e-12 * x0 {
        let m = (x0 * x1).sqrt();
        if m <= x0 || m >= x1 {
            break;
        }
        if (s * l.force(m)? > 0.0) == left_pos {
            x0 = m;
        } else {
            x1 = m;
        }
    }
    Ok(0.5 * (x0 + x1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSlope {
    /// dd_c/dT, m/K.
    pub slope: f64,
    /// True when `t` is at an end of the branch and the difference is
    /// one-sided.
    pub one_sided: bool,
}

/// Finite-difference slope of a branch at the sample nearest to `t`.
pub fn branch_slope(branch: &Branch, t: f64) -> Result<BranchSlope> {
    let s = &branch.samples;
    if s.len() < 2 {
        return Err(Error::domain(format!("branch {} has fewer than two samples", branch.id)));
    }
    let (first, last) = (s[0].temperature, s[s.len() - 1].temperature);
    if !(t >= first && t <= last) {
        return Err(Error::domain(format!("T = {t} K outside branch {} ({first}..{last} K)", branch.id)));
    }
    let i = s
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.temperature - t).abs().total_cmp(&(b.1.temperature - t).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let (a, b, one_sided) = if i == 0 {
        (0, 1, true)
    } else if i == s.len() - 1 {
        (i - 1, i, true)
    } else {
        (i - 1, i + 1, false)
    };
    Ok(BranchSlope { slope: (s[b].d_c - s[a].d_c) / (s[b].temperature - s[a].temperature), one_sided })
}
