//! Repulsion across a fluid: the sign of each frequency's contribution
//! follows the ordering of the three permittivities.

use casilift::lifshitz::{evaluate, ThermalSpec};
use casilift::material::load_material_library;
use casilift::stratified::{frequency_integrand, predict_sign, GapGeometry, Stack};

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let (a, f, b) = (lib.get("silicon")?, lib.get("ethanol")?, lib.get("teflon")?);
    let g = GapGeometry::new(Stack::half_space(a.clone()), Stack::half_space(b.clone()), f.clone(), 100e-9)?;

    println!("silicon | ethanol | teflon at d = 100 nm");
    println!("{:>10} {:>8} {:>8} {:>8} {:>6} {:>13}", "ξ", "ε_Si", "ε_EtOH", "ε_PTFE", "rule", "f_P");
    for xi in [1e12, 1e13, 1e14, 1e15, 3e15, 1e16] {
        let (e1, ef, e2) = (a.permittivity(xi)?, f.permittivity(xi)?, b.permittivity(xi)?);
        let fp = frequency_integrand(&g, xi)?.pressure;
        println!("{xi:>10.0e} {e1:>8.3} {ef:>8.3} {e2:>8.3} {:>6} {fp:>13.4e}", predict_sign(e1, ef, e2));
    }
    // at ξ = 0 ethanol outranks silicon, so the n = 0 term attracts
    let p = evaluate(&g, &ThermalSpec::new(300.0))?.pressure;
    println!("\ntotal at 300 K: {:.4e} Pa ({} terms)", p.value, p.n_terms_used);
    Ok(())
}
