//! Print ε(iξ) for every material in the bundled library at a few
//! imaginary frequencies, along with the matching Matsubara temperature.

use casilift::material::load_material_library;

fn main() -> casilift::Result<()> {
    let lib = load_material_library(concat!(env!("CARGO_MANIFEST_DIR"), "/data/materials.json"))?;
    let grid = [1e13, 1e14, 1e15, 1e16];
    print!("{:<18}", "material");
    for xi in grid {
        print!("{:>12}", format!("{xi:.0e}"));
    }
    println!();
    for m in lib.iter() {
        print!("{:<18}", m.name);
        for row in m.tabulate(&grid)? {
            print!("{:>12.4}", row.eps);
        }
        println!();
    }
    let t = lib.get("ethanol")?.tabulate(&grid)?;
    println!("\nMatsubara temperature of each column (K):");
    for row in t {
        println!("  ξ = {:.0e} rad/s  ->  {:.1} K", row.xi, row.matsubara_t);
    }
    Ok(())
}
