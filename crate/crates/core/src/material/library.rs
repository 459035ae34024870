//! JSON material library files.
//!
//! ```json
//! {"materials": [
//!   {"name": "water", "model": "oscillators", "unit": "eV", "eps_inf": 1.0,
//!    "terms": [{"strength": 74.8, "omega": 6.5e-5}, {"strength": 0.77, "omega": 12.4}]},
//!   {"name": "gold", "model": "drude", "unit": "eV", "omega_p": 9.0, "gamma": 0.035, "background": 1.0},
//!   {"name": "si_n", "model": "drude", "doping_cm3": 1e18, "m_eff_me": 0.26,
//!    "mobility_m2_v_s": 0.03, "background": "silicon"}
//! ]}
//! ```
//!
//! `unit` applies to every frequency of the entry (`rad_s`, the default, or
//! `eV`). A Drude `background` is a constant, the name of another entry, or
//! an inline model object.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{drude_from_doping, DrudeModel, Material, Model, OscillatorModel, OscillatorTerm, TabulatedModel};
use crate::constants::{EV_TO_RAD_S, M_E};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
enum FreqUnit {
    #[default]
    #[serde(rename = "rad_s")]
    RadPerSecond,
    #[serde(rename = "eV")]
    ElectronVolt,
}

impl FreqUnit {
    fn factor(self) -> f64 {
        match self {
            FreqUnit::RadPerSecond => 1.0,
            FreqUnit::ElectronVolt => EV_TO_RAD_S,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    strength: f64,
    omega: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    damping: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BackgroundSpec {
    Constant(f64),
    Named(String),
    Inline(Box<ModelSpec>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum ModelSpec {
    Constant {
        eps: f64,
    },
    Drude {
        #[serde(default)]
        unit: FreqUnit,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        doping_cm3: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_eff_me: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mobility_m2_v_s: Option<f64>,
        background: BackgroundSpec,
    },
    Oscillators {
        #[serde(default)]
        unit: FreqUnit,
        eps_inf: f64,
        terms: Vec<TermSpec>,
    },
    Table {
        #[serde(default)]
        unit: FreqUnit,
        points: Vec<[f64; 2]>,
    },
    PerfectConductor {},
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntrySpec {
    name: String,
    #[serde(flatten)]
    model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum FileSpec {
    Wrapped { materials: Vec<EntrySpec> },
    Bare(Vec<EntrySpec>),
}

/// Named, validated materials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialLibrary {
    materials: BTreeMap<String, Material>,
}

impl MaterialLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, material: Material) -> Result<()> {
        material.validate()?;
        if self.materials.contains_key(&material.name) {
            return Err(Error::DuplicateMaterial(material.name));
        }
        self.materials.insert(material.name.clone(), material);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown material `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.materials.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }
}

pub fn load_material_library(path: impl AsRef<Path>) -> Result<MaterialLibrary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_material_library(&text, &path.display().to_string())
}

/// Parse library text; `source_name` labels error messages.
pub fn parse_material_library(text: &str, source_name: &str) -> Result<MaterialLibrary> {
    if text.trim().is_empty() {
        return Ok(MaterialLibrary::new());
    }
    let file: FileSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        message: format!("{e} (line {}, column {})", e.line(), e.column()),
    })?;
    let entries = match file {
        FileSpec::Wrapped { materials } | FileSpec::Bare(materials) => materials,
    };
    let mut by_name: BTreeMap<&str, &EntrySpec> = BTreeMap::new();
    for e in &entries {
        if by_name.insert(&e.name, e).is_some() {
            return Err(Error::DuplicateMaterial(e.name.clone()));
        }
    }
    let mut lib = MaterialLibrary::new();
    for e in &entries {
        let model = build_model(&e.model, &by_name, &mut vec![e.name.as_str()])
            .map_err(|err| name_error(&e.name, err))?;
        lib.insert(Material { name: e.name.clone(), model })?;
    }
    Ok(lib)
}

fn name_error(name: &str, err: Error) -> Error {
    match err {
        Error::Domain(message) | Error::Config(message) => Error::InvalidMaterial { name: name.to_string(), message },
        other => other,
    }
}

fn build_model<'a>(
    spec: &'a ModelSpec,
    entries: &BTreeMap<&'a str, &'a EntrySpec>,
    stack: &mut Vec<&'a str>,
) -> Result<Model> {
    Ok(match spec {
        ModelSpec::Constant { eps } => Model::Constant(*eps),
        ModelSpec::Oscillators { unit, eps_inf, terms } => Model::Oscillators(OscillatorModel {
            eps_inf: *eps_inf,
            terms: terms
                .iter()
                .map(|t| OscillatorTerm {
                    strength: t.strength,
                    omega: t.omega * unit.factor(),
                    damping: t.damping * unit.factor(),
                })
                .collect(),
        }),
        ModelSpec::Table { unit, points } => {
            Model::Table(TabulatedModel::new(points.iter().map(|p| (p[0] * unit.factor(), p[1])).collect())?)
        }
        ModelSpec::PerfectConductor {} => Model::PerfectConductor,
        ModelSpec::Drude { unit, omega_p, gamma, doping_cm3, m_eff_me, mobility_m2_v_s, background } => {
            let bg = match background {
                BackgroundSpec::Constant(e) => Model::Constant(*e),
                BackgroundSpec::Inline(inner) => build_model(inner, entries, stack)?,
                BackgroundSpec::Named(n) => {
                    if stack.contains(&n.as_str()) {
                        return Err(Error::domain(format!("cyclic background reference through `{n}`")));
                    }
                    let entry = entries
                        .get(n.as_str())
                        .ok_or_else(|| Error::domain(format!("unknown background material `{n}`")))?;
                    stack.push(&entry.name);
                    let m = build_model(&entry.model, entries, stack)?;
                    stack.pop();
                    m
                }
            };
            match (omega_p, gamma, doping_cm3, m_eff_me, mobility_m2_v_s) {
                (Some(wp), Some(g), None, None, None) => Model::Drude(DrudeModel {
                    background: Box::new(bg),
                    omega_p: wp * unit.factor(),
                    gamma: g * unit.factor(),
                }),
                (None, None, Some(rho), Some(m), Some(mu)) => Model::Drude(drude_from_doping(*rho, m * M_E, *mu, bg)?),
                _ => {
                    return Err(Error::domain(
                        "drude entry needs either (omega_p, gamma) or (doping_cm3, m_eff_me, mobility_m2_v_s)",
                    ))
                }
            }
        }
    })
}

fn model_to_spec(model: &Model) -> ModelSpec {
    match model {
        Model::Constant(e) => ModelSpec::Constant { eps: *e },
        Model::Oscillators(o) => ModelSpec::Oscillators {
            unit: FreqUnit::RadPerSecond,
            eps_inf: o.eps_inf,
            terms: o
                .terms
                .iter()
                .map(|t| TermSpec { strength: t.strength, omega: t.omega, damping: t.damping })
                .collect(),
        },
        Model::Table(t) => ModelSpec::Table {
            unit: FreqUnit::RadPerSecond,
            points: t.points().iter().map(|&(x, e)| [x, e]).collect(),
        },
        Model::PerfectConductor => ModelSpec::PerfectConductor {},
        Model::Drude(d) => ModelSpec::Drude {
            unit: FreqUnit::RadPerSecond,
            omega_p: Some(d.omega_p),
            gamma: Some(d.gamma),
            doping_cm3: None,
            m_eff_me: None,
            mobility_m2_v_s: None,
            background: match &*d.background {
                Model::Constant(e) => BackgroundSpec::Constant(*e),
                other => BackgroundSpec::Inline(Box::new(model_to_spec(other))),
            },
        },
    }
}

/// Write a library in canonical form (all frequencies in rad/s, Drude
/// entries as plasma frequency and relaxation rate).
pub fn save_material_library(path: impl AsRef<Path>, lib: &MaterialLibrary) -> Result<()> {
    let file = FileSpec::Wrapped {
        materials: lib
            .iter()
            .map(|m| EntrySpec { name: m.name.clone(), model: model_to_spec(&m.model), source: None })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("library serializes");
    std::fs::write(path, text)?;
    Ok(())
}
