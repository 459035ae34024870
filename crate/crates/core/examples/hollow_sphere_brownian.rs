//! Boltzmann statistics of a suspended body, with the energy either
//! following temperature or frozen at one temperature.
//!
//! Uses the membrane, since the bundled hollow-sphere geometry does not
//! reach a stable suspension; the sphere's force balance is printed first.

use casilift::brownian::{boltzmann_stats, case_barrier, counterfactual_mean, stiction_exponent, BoltzmannDomain};
use casilift::landscape::{EnergyLandscape, GravitySpec, Landscape, LandscapeOptions, SuspensionCase};
use casilift::material::load_material_library;
use casilift::stratified::Stack;

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let (ethanol, ps, si) = (lib.get("ethanol")?, lib.get("polystyrene")?, lib.get("doped_silicon")?);
    let opts = LandscapeOptions::default();

    let (r_in, r_out) = (3.2e-6, 5e-6);
    let gravity = GravitySpec::hollow_sphere(1053.0, 789.0, r_in, r_out);
    let sphere = SuspensionCase::sphere(Stack::half_space(si.clone()), ethanol.clone(), ps.clone(), ethanol.clone(), r_in, r_out, Some(gravity))?;
    let l = Landscape::new(&sphere, 300.0, (20e-9, 1e-6), &opts)?;
    println!("hollow sphere, apparent weight {:.3e} N", gravity.load());
    for d in [30e-9, 100e-9, 300e-9] {
        println!("  F({:.0} nm) = {:+.3e} N", d * 1e9, l.force(d)?);
    }

    let membrane = SuspensionCase::plates(
        Stack::half_space(si.clone()),
        Stack::half_space(ps.clone()),
        ethanol.clone(),
        1e-10, // 100 µm²
        Some(GravitySpec::slab(261.0, 200e-9)),
    )?;
    let domain = BoltzmannDomain::suspension(1e-8, 5e-6);
    let ts = [260.0, 280.0, 300.0, 320.0];
    let frozen = counterfactual_mean(&membrane, 300.0, &ts, &domain, &opts)?;
    println!("\nmembrane, 100 µm² patch");
    println!("{:>6} {:>11} {:>11} {:>11} {:>11}", "T (K)", "<d> (nm)", "q2.5", "q97.5", "frozen <d>");
    for (&t, (_, cf)) in ts.iter().zip(&frozen) {
        let s = boltzmann_stats(&membrane, t, t, &domain, &opts)?;
        println!("{t:>6} {:>11.2} {:>11.2} {:>11.2} {:>11.2}", s.mean_d * 1e9, s.q025 * 1e9, s.q975 * 1e9, cf * 1e9);
    }
    let b = case_barrier(&membrane, 300.0, &opts)?;
    let f = stiction_exponent(b.toward_contact)?;
    println!("contact barrier {:.3e} kT, relative stiction rate {:e}{}", b.toward_contact, f.value, if f.underflow { " (underflow)" } else { "" });
    Ok(())
}
