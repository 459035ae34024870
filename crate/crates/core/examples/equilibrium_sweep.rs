//! Follow the suspension equilibria of the polystyrene membrane through
//! temperature and locate where the stable/unstable pair is born.

use casilift::landscape::{branch_slope, sweep_temperature, temperature_grid, CaseFamily, GravitySpec, LandscapeOptions, SuspensionCase, SweepOptions};
use casilift::material::load_material_library;
use casilift::stratified::Stack;

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let case = SuspensionCase::plates(
        Stack::half_space(lib.get("doped_silicon")?.clone()),
        Stack::half_space(lib.get("polystyrene")?.clone()),
        lib.get("ethanol")?.clone(),
        1.0,
        Some(GravitySpec::slab(261.0, 200e-9)),
    )?;
    let family = CaseFamily { case: &case, options: LandscapeOptions::default() };
    let ts = temperature_grid(200.0, 320.0, 10.0)?;
    let res = sweep_temperature(&family, &ts, (1e-8, 5e-6), &SweepOptions::default())?;

    for b in &res.branches {
        let (first, last) = (b.samples[0], b.samples[b.samples.len() - 1]);
        print!(
            "branch {} {:<8} {:.0}..{:.0} K, d {:.0} -> {:.0} nm",
            b.id,
            b.stability.as_str(),
            first.temperature,
            last.temperature,
            first.d_c * 1e9,
            last.d_c * 1e9
        );
        match branch_slope(b, 300.0) {
            Ok(s) => println!(", dd/dT at 300 K = {:+.3} nm/K", s.slope * 1e9),
            Err(_) => println!(),
        }
    }
    for bif in &res.bifurcations {
        println!("pair {:?} at T_c = {:.3} K, merging near {:.0} nm", bif.kind, bif.t_c, bif.d_merge * 1e9);
    }
    Ok(())
}
