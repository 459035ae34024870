//! Energy and force on a thin polystyrene slab floating over doped
//! silicon in ethanol, and the equilibria the landscape holds.

use casilift::constants::K_B;
use casilift::landscape::{find_equilibria, EnergyLandscape, GravitySpec, Landscape, LandscapeOptions, SuspensionCase};
use casilift::material::load_material_library;
use casilift::stratified::Stack;

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let case = SuspensionCase::plates(
        Stack::half_space(lib.get("doped_silicon")?.clone()),
        Stack::half_space(lib.get("polystyrene")?.clone()),
        lib.get("ethanol")?.clone(),
        1e-12, // 1 µm² of slab
        Some(GravitySpec::slab(261.0, 200e-9)),
    )?;
    let t = 300.0;
    let window = (20e-9, 3e-6);
    let l = Landscape::new(&case, t, window, &LandscapeOptions::default())?;

    println!("{:>9} {:>12} {:>12}", "d (nm)", "U (kT)", "F (N)");
    for i in 0..=12 {
        let d = window.0 * (window.1 / window.0).powf(i as f64 / 12.0);
        let (u, f) = l.energy_and_force(d)?;
        println!("{:>9.1} {:>12.3} {:>12.3e}", d * 1e9, u / (K_B * t), f);
    }
    for e in find_equilibria(&l, window, 200)? {
        println!("{} equilibrium at {:.1} nm", e.stability.as_str(), e.d_c * 1e9);
    }
    println!("(force at 1 µm: {:.3e} N)", l.force(1e-6)?);
    Ok(())
}
