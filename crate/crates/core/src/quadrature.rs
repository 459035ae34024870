//! Adaptive 10/21-point Gauss–Kronrod quadrature for vector-valued
//! integrands, plus access to the raw 21-point Kronrod rule for building
//! fixed composite grids.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-9, abs_tol: 1e-25, max_intervals: 400 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
}

fn gk21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut resabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    for i in 0..N {
        kron[i] = fc[i] * WGK[10];
        resabs[i] = (fc[i] * WGK[10]).abs();
    }
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        for i in 0..N {
            kron[i] += WGK[j] * (f1[i] + f2[i]);
            resabs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut abs = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * kron[i];
        let mut resasc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let mut err = ((kron[i] - gauss[i]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        let ra = resabs[i] * half.abs();
        if ra > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * ra);
        }
        value[i] = kron[i] * half;
        error[i] = err;
        abs[i] = ra;
    }
    Ok(Panel { a, b, value, error, abs })
}

fn component_tol(opts: &QuadOptions, value: f64, abs: f64) -> f64 {
    // the ∫|f| floor keeps sign-changing integrands with near-zero total from stalling
    opts.abs_tol.max(opts.rel_tol * value.abs()).max(1e-3 * opts.rel_tol * abs)
}

/// Adaptively integrate an `N`-component integrand over the intervals
/// delimited by `breakpoints` (at least two, ascending).
pub fn integrate<const N: usize, F>(
    mut f: F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Quadrature<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if breakpoints.len() < 2 {
        return Err(Error::domain("integration needs at least two breakpoints"));
    }
    let mut panels = Vec::with_capacity(64);
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            panels.push(gk21(&mut f, w[0], w[1])?);
        }
    }
    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        let mut abs = [0.0; N];
        for p in &panels {
            for i in 0..N {
                total[i] += p.value[i];
                err[i] += p.error[i];
                abs[i] += p.abs[i];
            }
        }
        // worst component relative to its own tolerance
        let mut worst = None;
        let mut worst_ratio = 1.0;
        for i in 0..N {
            let ratio = err[i] / component_tol(opts, total[i], abs[i]);
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = Some(i);
            }
        }
        let Some(c) = worst else {
            return Ok(Quadrature {
                value: total,
                error: err,
                evaluations: panels.len() * 21,
            });
        };
        if panels.len() >= opts.max_intervals {
            let residual = err[c] / total[c].abs().max(f64::MIN_POSITIVE);
            return Err(Error::numerical(
                format!("adaptive quadrature did not converge in {} intervals", panels.len()),
                residual,
            ));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error[c].total_cmp(&y.1.error[c]))
            .expect("nonempty");
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            let residual = err[c] / total[c].abs().max(f64::MIN_POSITIVE);
            return Err(Error::numerical("quadrature interval underflow", residual));
        }
        panels.push(gk21(&mut f, p.a, mid)?);
        panels.push(gk21(&mut f, mid, p.b)?);
    }
}

/// Nodes and weights of the 21-point Kronrod rule mapped onto `[a, b]`.
pub fn kronrod21(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..21).map(move |k| {
        if k < 10 {
            (center - half * XGK[k], half * WGK[k])
        } else if k == 10 {
            (center, half * WGK[10])
        } else {
            let j = 20 - k;
            (center + half * XGK[j], half * WGK[j])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| Ok([x.powi(5), 1.0]), &[0.0, 2.0], &QuadOptions::default()).unwrap();
        assert!((q.value[0] - 64.0 / 6.0).abs() < 1e-13);
        assert!((q.value[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_tail() {
        let q = integrate(
            |u| Ok([u * u * (-u).exp()]),
            &[0.0, 1.0, 4.0, 12.0, 30.0, 80.0],
            &QuadOptions { rel_tol: 1e-12, ..Default::default() },
        )
        .unwrap();
        assert!((q.value[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫₀¹ ln x dx = -1
        let q = integrate(|x| Ok([x.ln()]), &[0.0, 1.0], &QuadOptions::default()).unwrap();
        assert!((q.value[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn failing_integrand_propagates() {
        let r = integrate(
            |x| if x > 0.5 { Err(Error::domain("boom")) } else { Ok([x]) },
            &[0.0, 1.0],
            &QuadOptions::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn nonconvergence_reports_residual() {
        let opts = QuadOptions { rel_tol: 1e-15, abs_tol: 0.0, max_intervals: 3 };
        let r = integrate(|x| Ok([(50.0 * x).sin()]), &[0.0, 10.0], &opts);
        match r {
            Err(Error::Numerical { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected numerical failure, got {other:?}"),
        }
    }

    #[test]
    fn kronrod_rule_weights_sum_to_length() {
        let s: f64 = kronrod21(1.0, 4.0).map(|(_, w)| w).sum();
        assert!((s - 3.0).abs() < 1e-14);
        let xs: Vec<f64> = kronrod21(1.0, 4.0).map(|(x, _)| x).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}
