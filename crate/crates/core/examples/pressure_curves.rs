//! Pressure between two half-spaces across a fluid, compared with the
//! ideal-metal law at zero temperature.

use std::f64::consts::PI;

use casilift::constants::{C, HBAR};
use casilift::lifshitz::{evaluate, pressure_t0, ThermalSpec};
use casilift::material::{load_material_library, Material};
use casilift::quadrature::QuadOptions;
use casilift::stratified::{GapGeometry, Stack};

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let pec = Stack::half_space(Material::perfect_conductor());
    let gold = Stack::half_space(lib.get("gold")?.clone());

    println!("{:>10} {:>14} {:>14} {:>14}", "d (nm)", "ideal (Pa)", "PEC T=0", "gold 300 K");
    for d in [50e-9f64, 100e-9, 200e-9, 500e-9, 1e-6] {
        let ideal = PI * PI * HBAR * C / (240.0 * d.powi(4));
        let g = GapGeometry::new(pec.clone(), pec.clone(), Material::vacuum(), d)?;
        let p0 = pressure_t0(&g, &QuadOptions::default())?.value;
        let g = GapGeometry::new(gold.clone(), gold.clone(), Material::vacuum(), d)?;
        let totals = evaluate(&g, &ThermalSpec::new(300.0))?;
        println!("{:>10.0} {:>14.4e} {:>14.4e} {:>14.4e}", d * 1e9, ideal, p0, totals.pressure.value);
    }
    Ok(())
}
