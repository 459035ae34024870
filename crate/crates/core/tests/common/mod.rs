#![allow(dead_code)]

use std::path::PathBuf;

use casilift::material::{load_material_library, Material, MaterialLibrary, Model, OscillatorModel, OscillatorTerm};
use casilift::stratified::Polarization;

pub const C: f64 = 299_792_458.0;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn library() -> MaterialLibrary {
    load_material_library(data_dir().join("materials.json")).unwrap()
}

pub fn konst(eps: f64) -> Material {
    Material::constant(format!("eps{eps}"), eps).unwrap()
}

/// One damped Lorentz term on top of ε∞.
pub fn lorentz(name: &str, eps_inf: f64, strength: f64, omega: f64, damping: f64) -> Material {
    let terms = vec![OscillatorTerm { strength, omega, damping }];
    Material::new(name, Model::Oscillators(OscillatorModel { eps_inf, terms })).unwrap()
}

/// Double-double number hi + lo, enough for a reference solution.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn quick(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let u = quick(s.hi, s.lo + t.hi);
        quick(u.hi, u.lo + t.lo)
    }
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }
    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        quick(q1, q2).add(Dd::new(q3))
    }
    pub fn sqrt(self) -> Dd {
        let s = Dd::new(self.hi.sqrt());
        s.add(self.sub(s.mul(s)).div(s.mul(Dd::new(2.0))))
    }
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 { self.neg() } else { self }
    }
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Reflection of a layered half-space seen from the fluid, by carrying
/// (ψ, ψ'/w) from the terminal medium back to the fluid interface in
/// double-double arithmetic; w is 1 for TE and ε for TM. Each layer step
/// drops the common e^{κt} factor.
pub fn transfer_matrix_reflection(layers: &[(f64, f64)], eps_terminal: f64, eps_fluid: f64, xi: f64, k: f64, p: Polarization) -> f64 {
    let one = Dd::new(1.0);
    let q = Dd::new(xi).div(Dd::new(C));
    let kk = Dd::new(k);
    let kap = |eps: f64| kk.mul(kk).add(Dd::new(eps).mul(q).mul(q)).sqrt();
    let w = |eps: f64| match p {
        Polarization::TE => one,
        Polarization::TM => Dd::new(eps),
    };
    let (mut psi, mut s) = (one, kap(eps_terminal).div(w(eps_terminal)).neg());
    for &(eps, t) in layers.iter().rev() {
        let kj = kap(eps);
        let wj = w(eps);
        let dpsi = s.mul(wj);
        // (1 ∓ e^{-2κt})/2; plain precision is enough for the propagation factor
        let sh = Dd::new(-(-2.0 * kj.to_f64() * t).exp_m1() * 0.5);
        let ch = one.sub(sh);
        let psi_a = psi.mul(ch).sub(dpsi.div(kj).mul(sh));
        let dpsi_a = psi.mul(kj).mul(sh).neg().add(dpsi.mul(ch));
        let norm = Dd::new(psi_a.abs().hi.max(dpsi_a.div(wj).div(kj).abs().hi));
        psi = psi_a.div(norm);
        s = dpsi_a.div(wj).div(norm);
    }
    let x = w(eps_fluid).mul(s).div(kap(eps_fluid));
    psi.add(x).div(psi.sub(x)).to_f64()
}
