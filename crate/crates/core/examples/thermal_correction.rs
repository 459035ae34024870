//! Size of the finite-temperature correction for gold plates in vacuum.

use casilift::lifshitz::{evaluate, pressure_t0, temperature_correction, ThermalSpec};
use casilift::material::load_material_library;
use casilift::quadrature::QuadOptions;
use casilift::stratified::{GapGeometry, Stack};

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let gold = Stack::half_space(lib.get("gold")?.clone());
    let vacuum = lib.get("vacuum")?.clone();
    for d in [100e-9, 1e-6, 5e-6] {
        let g = GapGeometry::new(gold.clone(), gold.clone(), vacuum.clone(), d)?;
        let p0 = pressure_t0(&g, &QuadOptions::default())?.value;
        println!("d = {:.0} nm, P(0) = {p0:.4e} Pa", d * 1e9);
        for t in [10.0, 77.0, 300.0] {
            let spec = ThermalSpec::new(t);
            let dp = temperature_correction(&g, &spec)?;
            let n = evaluate(&g, &spec)?.pressure.n_terms_used;
            println!("  T = {t:>5} K  ΔP = {dp:>11.4e} Pa  ({:+.3} %, {n} terms)", 100.0 * dp / p0);
        }
    }
    Ok(())
}
