//! Permittivity models on the imaginary-frequency axis.
//!
//! Every model here returns the real, dimensionless ε(iξ) ≥ 1 for ξ ≥ 0 in
//! rad/s. Metallic models (Drude, perfect conductor) have no finite static
//! value; asking for ξ = 0 yields [`Error::StaticMetal`] and callers switch to
//! [`Material::static_limit`].

mod library;

pub use library::{load_material_library, parse_material_library, save_material_library, MaterialLibrary};

use crate::constants::{matsubara_temperature, EPS_0, E_CHARGE};
use crate::error::{Error, Result};

/// One Lorentz term C·ω²/(ω² + ξ² + gξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorTerm {
    pub strength: f64,
    pub omega: f64,
    pub damping: f64,
}

impl OscillatorTerm {
    pub fn undamped(strength: f64, omega: f64) -> Self {
        OscillatorTerm { strength, omega, damping: 0.0 }
    }
}

/// ε(iξ) = ε∞ + Σⱼ Cⱼωⱼ²/(ωⱼ² + ξ² + gⱼξ)
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel {
    pub eps_inf: f64,
    pub terms: Vec<OscillatorTerm>,
}

impl OscillatorModel {
    pub fn eval(&self, xi: f64) -> f64 {
        self.eps_inf
            + self
                .terms
                .iter()
                .map(|t| {
                    let w2 = t.omega * t.omega;
                    t.strength * w2 / (w2 + xi * xi + t.damping * xi)
                })
                .sum::<f64>()
    }

    pub fn static_value(&self) -> f64 {
        self.eps_inf + self.terms.iter().map(|t| t.strength).sum::<f64>()
    }
}

/// Tabulated ε(iξ) with log-log linear interpolation. Values outside the
/// node range hold the nearest end value.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    points: Vec<(f64, f64)>,
}

impl TabulatedModel {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("tabulated permittivity needs at least 2 points"));
        }
        for (i, &(xi, eps)) in points.iter().enumerate() {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(Error::domain(format!("table node {i}: ξ must be positive and finite")));
            }
            if !(eps >= 1.0 && eps.is_finite()) {
                return Err(Error::domain(format!("table node {i}: ε must be finite and ≥ 1")));
            }
            if i > 0 && xi <= points[i - 1].0 {
                return Err(Error::domain(format!("table node {i}: ξ not strictly increasing")));
            }
        }
        Ok(TabulatedModel { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if xi <= first.0 {
            return first.1;
        }
        if xi >= last.0 {
            return last.1;
        }
        let j = pts.partition_point(|&(x, _)| x <= xi);
        let (x0, e0) = pts[j - 1];
        if x0 == xi {
            return e0;
        }
        let (x1, e1) = pts[j];
        let s = (xi / x0).ln() / (x1 / x0).ln();
        (e0.ln() + s * (e1 / e0).ln()).exp()
    }
}

/// Free-carrier term on top of a non-metallic background:
/// ε(iξ) = ε_bg(iξ) + ω_p²/(ξ(ξ + γ)).
#[derive(Debug, Clone, PartialEq)]
pub struct DrudeModel {
    pub background: Box<Model>,
    pub omega_p: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Constant(f64),
    Drude(DrudeModel),
    Oscillators(OscillatorModel),
    Table(TabulatedModel),
    /// ε = ∞ at every ξ > 0: reflection coefficient of unit magnitude in
    /// both polarizations.
    PerfectConductor,
}

/// Zero-frequency behaviour of a material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticLimit {
    Finite(f64),
    Metallic,
}

impl StaticLimit {
    /// Metals map to +∞, which is what ordering rules want.
    pub fn as_f64(self) -> f64 {
        match self {
            StaticLimit::Finite(e) => e,
            StaticLimit::Metallic => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub model: Model,
}

impl Material {
    /// Construct and validate.
    pub fn new(name: impl Into<String>, model: Model) -> Result<Self> {
        let m = Material { name: name.into(), model };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum() -> Self {
        Material { name: "vacuum".into(), model: Model::Constant(1.0) }
    }

    pub fn constant(name: impl Into<String>, eps: f64) -> Result<Self> {
        Material::new(name, Model::Constant(eps))
    }

    pub fn perfect_conductor() -> Self {
        Material { name: "perfect_conductor".into(), model: Model::PerfectConductor }
    }

    pub fn validate(&self) -> Result<()> {
        validate_model(&self.model).map_err(|e| Error::InvalidMaterial {
            name: self.name.clone(),
            message: match e {
                Error::Domain(m) => m,
                other => other.to_string(),
            },
        })
    }

    pub fn is_metallic(&self) -> bool {
        matches!(self.model, Model::Drude(_) | Model::PerfectConductor)
    }

    /// ε(iξ). Perfect conductors return `f64::INFINITY` for ξ > 0.
    pub fn permittivity(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) {
            return Err(Error::domain(format!("negative or NaN imaginary frequency {xi}")));
        }
        match &self.model {
            Model::Drude(_) | Model::PerfectConductor if xi == 0.0 => {
                Err(Error::StaticMetal(self.name.clone()))
            }
            model => Ok(eval_model(model, xi)),
        }
    }

    pub fn static_limit(&self) -> StaticLimit {
        match &self.model {
            Model::Constant(e) => StaticLimit::Finite(*e),
            Model::Oscillators(o) => StaticLimit::Finite(o.static_value()),
            Model::Table(t) => StaticLimit::Finite(t.points()[0].1),
            Model::Drude(_) | Model::PerfectConductor => StaticLimit::Metallic,
        }
    }

    /// One row per grid point: (ξ, ε(iξ), Matsubara temperature ħξ/2πk_B).
    pub fn tabulate(&self, xi_grid: &[f64]) -> Result<Vec<TabulationRow>> {
        if xi_grid.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::domain("ξ grid must be sorted ascending"));
        }
        xi_grid
            .iter()
            .map(|&xi| {
                Ok(TabulationRow {
                    xi,
                    eps: self.permittivity(xi)?,
                    matsubara_t: matsubara_temperature(xi),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabulationRow {
    pub xi: f64,
    pub eps: f64,
    pub matsubara_t: f64,
}

fn eval_model(model: &Model, xi: f64) -> f64 {
    match model {
        Model::Constant(e) => *e,
        Model::Oscillators(o) => o.eval(xi),
        Model::Table(t) => t.eval(xi),
        Model::Drude(d) => eval_model(&d.background, xi) + d.omega_p * d.omega_p / (xi * (xi + d.gamma)),
        Model::PerfectConductor => f64::INFINITY,
    }
}

fn validate_model(model: &Model) -> Result<()> {
    match model {
        Model::Constant(e) => {
            if !(*e >= 1.0 && e.is_finite()) {
                return Err(Error::domain(format!("constant ε = {e} must be finite and ≥ 1")));
            }
        }
        Model::Oscillators(o) => {
            if !(o.eps_inf >= 1.0 && o.eps_inf.is_finite()) {
                return Err(Error::domain(format!("eps_inf = {} must be ≥ 1", o.eps_inf)));
            }
            for (j, t) in o.terms.iter().enumerate() {
                if !(t.strength > 0.0 && t.strength.is_finite()) {
                    return Err(Error::domain(format!("oscillator {j}: strength must be > 0")));
                }
                if !(t.omega > 0.0 && t.omega.is_finite()) {
                    return Err(Error::domain(format!("oscillator {j}: resonance must be > 0")));
                }
                if !(t.damping >= 0.0 && t.damping.is_finite()) {
                    return Err(Error::domain(format!("oscillator {j}: damping must be ≥ 0")));
                }
            }
        }
        Model::Table(_) => {}
        Model::Drude(d) => {
            if !(d.omega_p > 0.0 && d.omega_p.is_finite()) {
                return Err(Error::domain("Drude plasma frequency must be > 0"));
            }
            if !(d.gamma > 0.0 && d.gamma.is_finite()) {
                return Err(Error::domain("Drude relaxation rate must be > 0"));
            }
            if matches!(*d.background, Model::Drude(_) | Model::PerfectConductor) {
                return Err(Error::domain("Drude background must be non-metallic"));
            }
            validate_model(&d.background)?;
        }
        Model::PerfectConductor => {}
    }
    Ok(())
}

/// Drude parameters from a carrier density (cm⁻³), effective mass (kg) and
/// mobility (m²/(V·s)): ω_p² = ρe²/(ε₀m*), γ = e/(m*μ).
pub fn drude_from_doping(
    rho_cm3: f64,
    m_eff: f64,
    mobility: f64,
    background: Model,
) -> Result<DrudeModel> {
    for (what, v) in [("carrier density", rho_cm3), ("effective mass", m_eff), ("mobility", mobility)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{what} must be positive, got {v}")));
        }
    }
    let rho = rho_cm3 * 1e6;
    let omega_p = (rho * E_CHARGE * E_CHARGE / (EPS_0 * m_eff)).sqrt();
    let gamma = E_CHARGE / (m_eff * mobility);
    let model = DrudeModel { background: Box::new(background), omega_p, gamma };
    validate_model(&Model::Drude(model.clone()))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{matsubara_spacing, M_E};

    fn osc(eps_inf: f64, terms: &[(f64, f64, f64)]) -> Material {
        Material::new(
            "osc",
            Model::Oscillators(OscillatorModel {
                eps_inf,
                terms: terms.iter().map(|&(c, w, g)| OscillatorTerm { strength: c, omega: w, damping: g }).collect(),
            }),
        )
        .unwrap()
    }

    fn drude(bg: f64, wp: f64, g: f64) -> Material {
        Material::new(
            "drude",
            Model::Drude(DrudeModel { background: Box::new(Model::Constant(bg)), omega_p: wp, gamma: g }),
        )
        .unwrap()
    }

    #[test]
    fn vacuum_is_one_everywhere() {
        let v = Material::vacuum();
        for xi in [0.0, 1e10, 1e16] {
            assert_eq!(v.permittivity(xi).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_oscillator_at_resonance() {
        let m = osc(1.0, &[(1.0, 1e16, 0.0)]);
        assert!((m.permittivity(1e16).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn drude_closed_form() {
        let m = drude(1.0, 1e16, 1e14);
        let expected = 1.0 + 1e32 / (1e15 * (1e15 + 1e14));
        let got = m.permittivity(1e15).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
        assert!((got - 91.909).abs() < 1e-3);
    }

    #[test]
    fn errors_for_bad_frequencies() {
        let m = drude(1.0, 1e16, 1e14);
        assert!(matches!(m.permittivity(0.0), Err(Error::StaticMetal(_))));
        assert!(matches!(Material::vacuum().permittivity(-1.0), Err(Error::Domain(_))));
        assert!(matches!(Material::perfect_conductor().permittivity(0.0), Err(Error::StaticMetal(_))));
        assert_eq!(Material::perfect_conductor().permittivity(1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn static_limits() {
        assert_eq!(Material::constant("c", 2.1).unwrap().static_limit(), StaticLimit::Finite(2.1));
        assert_eq!(osc(1.0, &[(77.0, 1e12, 0.0)]).static_limit(), StaticLimit::Finite(78.0));
        assert_eq!(drude(1.0, 1.37e16, 5.3e13).static_limit(), StaticLimit::Metallic);
    }

    #[test]
    fn invalid_models_name_the_material() {
        let err = Material::new("glass", Model::Constant(0.5)).unwrap_err();
        match err {
            Error::InvalidMaterial { name, .. } => assert_eq!(name, "glass"),
            other => panic!("{other:?}"),
        }
        assert!(Material::new(
            "bad",
            Model::Drude(DrudeModel { background: Box::new(Model::PerfectConductor), omega_p: 1.0, gamma: 1.0 })
        )
        .is_err());
    }

    #[test]
    fn doping_scaling_law() {
        let bg = Model::Constant(11.7);
        let a = drude_from_doping(1e18, 0.26 * M_E, 0.03, bg.clone()).unwrap();
        let b = drude_from_doping(2e18, 0.26 * M_E, 0.03, bg.clone()).unwrap();
        assert!((b.omega_p / a.omega_p - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(a.gamma, b.gamma);
        assert!(drude_from_doping(0.0, 1.0, 1.0, bg.clone()).is_err());
        assert!(drude_from_doping(1e18, -1.0, 1.0, bg).is_err());
    }

    #[test]
    fn doping_closed_form_value() {
        // ρ = 1e24 m⁻³: ω_p² = 1e24 · e² / (ε₀ · 0.26 mₑ)
        let a = drude_from_doping(1e18, 0.26 * M_E, 0.03, Model::Constant(11.7)).unwrap();
        let e = 1.602_176_634e-19_f64;
        let expected = (1e24 * e * e / (8.854_187_812_8e-12 * 0.26 * 9.109_383_701_5e-31)).sqrt();
        assert!((a.omega_p - expected).abs() < 1e-12 * expected);
        assert!((a.omega_p - 1.106e14).abs() < 0.001e14);
        assert!((a.gamma - e / (0.26 * 9.109_383_701_5e-31 * 0.03)).abs() < 1.0);
    }

    #[test]
    fn higher_doping_raises_permittivity() {
        let bg = Model::Constant(11.7);
        let lo = Material::new("lo", Model::Drude(drude_from_doping(1e17, 0.26 * M_E, 0.03, bg.clone()).unwrap())).unwrap();
        let hi = Material::new("hi", Model::Drude(drude_from_doping(1e19, 0.26 * M_E, 0.03, bg).unwrap())).unwrap();
        for xi in [1e12, 1e14, 1e16] {
            assert!(hi.permittivity(xi).unwrap() > lo.permittivity(xi).unwrap());
        }
    }

    #[test]
    fn drude_low_frequency_dominance() {
        let m = drude(11.7, 1e15, 1e13);
        let xi = 1e13 * 1e-4;
        let lhs = xi * m.permittivity(xi).unwrap();
        let rhs = 1e30 / 1e13;
        assert!((lhs / rhs - 1.0).abs() < 0.01);
    }

    #[test]
    fn table_reproduces_nodes_and_holds_ends() {
        let t = TabulatedModel::new(vec![(1e12, 10.0), (1e14, 5.0), (1e16, 2.0)]).unwrap();
        let m = Material::new("t", Model::Table(t)).unwrap();
        assert_eq!(m.permittivity(1e14).unwrap(), 5.0);
        assert_eq!(m.permittivity(1e12).unwrap(), 10.0);
        assert_eq!(m.permittivity(1e16).unwrap(), 2.0);
        assert_eq!(m.permittivity(1e18).unwrap(), 2.0);
        assert_eq!(m.permittivity(0.0).unwrap(), 10.0);
        // geometric midpoint interpolates geometrically
        let mid = m.permittivity(1e13).unwrap();
        assert!((mid - (10.0f64 * 5.0).sqrt()).abs() < 1e-12);
        assert!(TabulatedModel::new(vec![(1.0, 2.0)]).is_err());
        assert!(TabulatedModel::new(vec![(2.0, 2.0), (1.0, 2.0)]).is_err());
        assert!(TabulatedModel::new(vec![(1.0, 0.5), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn tabulate_reports_matsubara_temperature() {
        let m = Material::vacuum();
        let rows = m.tabulate(&[matsubara_spacing(300.0), 2.47e14]).unwrap();
        assert!((rows[0].matsubara_t - 300.0).abs() < 1e-9);
        assert!((rows[1].matsubara_t - 300.0).abs() < 0.5);
        assert!(m.tabulate(&[]).unwrap().is_empty());
        assert!(m.tabulate(&[2.0, 1.0]).is_err());
        assert!(drude(1.0, 1e15, 1e13).tabulate(&[0.0, 1.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn undamped_model() -> impl Strategy<Value = OscillatorModel> {
            (1.0f64..3.0, prop::collection::vec((0.01f64..50.0, 1e12f64..1e17), 1..5)).prop_map(|(e, ts)| {
                OscillatorModel { eps_inf: e, terms: ts.into_iter().map(|(c, w)| OscillatorTerm::undamped(c, w)).collect() }
            })
        }

        proptest! {
            #[test]
            fn undamped_oscillators_strictly_decrease(m in undamped_model(), a in 10.0f64..17.0, f in 1.001f64..100.0) {
                let x1 = 10f64.powf(a);
                let x2 = x1 * f;
                let e1 = m.eval(x1);
                let e2 = m.eval(x2);
                prop_assert!(e1 > e2 || (e1 - e2).abs() <= 1e-15 * e1);
                prop_assert!(e2 >= 1.0);
            }

            #[test]
            fn every_model_is_at_least_one(
                m in undamped_model(), g in 0.0f64..1e16, wp in 1e12f64..1e17, gamma in 1e11f64..1e15, a in 8.0f64..18.0
            ) {
                let xi = 10f64.powf(a);
                let mut damped = m.clone();
                for t in &mut damped.terms { t.damping = g; }
                let dr = Material::new("d", Model::Drude(DrudeModel { background: Box::new(Model::Oscillators(m.clone())), omega_p: wp, gamma })).unwrap();
                for eps in [m.eval(xi), damped.eval(xi), dr.permittivity(xi).unwrap(), m.eval(0.0)] {
                    prop_assert!(eps >= 1.0 && eps.is_finite());
                }
            }
        }
    }
}
