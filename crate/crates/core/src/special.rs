//! Special functions needed by the spectral integrands.

use std::f64::consts::PI;

/// Real dilogarithm Li₂(x) for x ≤ 1.
pub fn dilog(x: f64) -> f64 {
    if x == 1.0 {
        return PI * PI / 6.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x > 0.5 {
        // Euler reflection
        PI * PI / 6.0 - x.ln() * (-x).ln_1p() - dilog_series(1.0 - x)
    } else if x >= -0.5 {
        dilog_series(x)
    } else if x >= -1.0 {
        // Landen: Li₂(x) = -Li₂(x/(x-1)) - ½ ln²(1-x), argument in (0, 1/2]
        let l = (-x).ln_1p();
        -dilog_series(x / (x - 1.0)) - 0.5 * l * l
    } else {
        // inversion for x < -1
        let l = (-x).ln();
        -PI * PI / 6.0 - 0.5 * l * l - dilog(1.0 / x)
    }
}

fn dilog_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = 0.0;
    let mut k = 1.0_f64;
    loop {
        let t = term / (k * k);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() || k > 200.0 {
            return sum;
        }
        term *= x;
        k += 1.0;
    }
}
