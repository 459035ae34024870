//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::Instant;

use casilift::brownian::{boltzmann_stats, boltzmann_stats_on, counterfactual_mean, BoltzmannDomain};
use casilift::constants::{matsubara_spacing, HBAR, K_B, ZETA_3};
use casilift::landscape::{
    branch_slope, find_equilibria, sweep_temperature, temperature_grid, total_force, CaseFamily, EnergyLandscape,
    FnLandscape, GravitySpec, Landscape, LandscapeOptions, Stability, SuspensionCase, SweepOptions,
};
use casilift::lifshitz::{classical_pressure, pressure, pressure_t0, temperature_correction, ThermalSpec};
use casilift::material::{Material, MaterialLibrary};
use casilift::quadrature::QuadOptions;
use casilift::stratified::{frequency_integrand, predict_sign, stack_reflection, GapGeometry, Layer, Polarization, Stack};
use common::{konst, library, lorentz, transfer_matrix_reflection, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: casilift::Error) -> String {
    e.to_string()
}

fn pec_gap(d: f64) -> GapGeometry {
    let m = Material::perfect_conductor();
    GapGeometry::new(Stack::half_space(m.clone()), Stack::half_space(m), Material::vacuum(), d).unwrap()
}

fn c1_ideal_metal() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [50e-9, 100e-9, 1e-6] {
        let p = pressure_t0(&pec_gap(d), &QuadOptions::default()).map_err(err)?.value;
        worst = worst.max((p / (PI * PI * HBAR * C / (240.0 * d.powi(4))) - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 1.0, format!("max rel err {worst:.2e} (tol 1e-6), {secs:.3} s (limit 1 s)"))
}

fn c2_classical() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, t) in [(1e-6, 300.0), (2e-7, 1000.0), (5e-6, 77.0)] {
        let p = classical_pressure(&pec_gap(d), t).map_err(err)?;
        worst = worst.max((p / (ZETA_3 * K_B * t / (8.0 * PI * d.powi(3))) - 1.0).abs());
    }
    check(worst <= 1e-9, format!("max rel err {worst:.2e} (tol 1e-9)"))
}

fn c3_trapezoid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut mat = |name: &str| lorentz(name, 1.0, rng.gen_range(0.5..12.0), 10f64.powf(rng.gen_range(14.5..16.5)), 0.0);
        let (a, b, c) = (mat("a"), mat("b"), mat("c"));
        let left = if rng.gen_bool(0.5) {
            Stack::new(vec![Layer::new(a, rng.gen_range(5e-9..2e-7)).unwrap()], b)
        } else {
            Stack::half_space(b)
        };
        let fluid = lorentz("f", 1.0, rng.gen_range(0.0..2.0), 1.5e16, 0.0);
        let d = 10f64.powf(rng.gen_range(-8.0..-6.0));
        let t = rng.gen_range(20.0..400.0);
        let g = GapGeometry::new(left, Stack::half_space(c), fluid, d).map_err(err)?;
        let r = pressure(&g, &ThermalSpec::new(t)).map_err(err)?;
        let dxi = matsubara_spacing(t);
        let mut sum = 0.5 * frequency_integrand(&g, 0.0).map_err(err)?.pressure;
        for n in 1..r.n_terms_used {
            sum += frequency_integrand(&g, n as f64 * dxi).map_err(err)?.pressure;
        }
        worst = worst.max((r.value - dxi * sum).abs() / (dxi * sum).abs());
    }
    check(worst <= 1e-12, format!("20 geometries, max rel diff {worst:.2e} (tol 1e-12)"))
}

fn c4_t_squared() -> Outcome {
    let a = lorentz("a", 1.0, 9.0, 1e15, 1e15);
    let b = lorentz("b", 1.0, 4.5, 2e15, 2e15);
    let g = GapGeometry::new(Stack::half_space(a), Stack::half_space(b), Material::vacuum(), 300e-9).map_err(err)?;
    let quad = QuadOptions { rel_tol: 1e-12, abs_tol: 0.0, max_intervals: 4000 };
    let mut pts = Vec::new();
    for t in [10.0, 20.0, 30.0, 40.0, 60.0, 80.0] {
        let dp = temperature_correction(&g, &ThermalSpec::new(t).with_truncation(1e-14).with_quad(quad)).map_err(err)?;
        pts.push((f64::ln(t), dp.abs().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let p = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum::<f64>() / pts.iter().map(|q| (q.0 - mx).powi(2)).sum::<f64>();
    check((p - 2.0).abs() <= 0.3, format!("fitted exponent {p:.3} (need 2 ± 0.3)"))
}

fn c5_sign_rule(lib: &MaterialLibrary) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pool: Vec<Material> = lib.iter().cloned().collect();
    let (mut violations, mut cases) = (0, 0);
    while cases < 100 {
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.3) {
                konst(rng.gen_range(1.0..30.0))
            } else {
                pool[rng.gen_range(0..pool.len())].clone()
            }
        };
        let (m1, mf, m2) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        if mf.is_metallic() || matches!(mf.model, casilift::material::Model::PerfectConductor) {
            continue;
        }
        let xi = 10f64.powf(rng.gen_range(12.0..17.0));
        let (e1, ef, e2) = (m1.permittivity(xi).map_err(err)?, mf.permittivity(xi).map_err(err)?, m2.permittivity(xi).map_err(err)?);
        if ef.is_infinite() {
            continue;
        }
        // keep the light cone inside the integration window
        let d = C / (4.0 * xi * ef.sqrt());
        let g = GapGeometry::new(Stack::half_space(m1), Stack::half_space(m2), mf, d).map_err(err)?;
        let f = frequency_integrand(&g, xi).map_err(err)?.pressure;
        cases += 1;
        let predicted = predict_sign(e1, ef, e2);
        let actual = if f > 0.0 { 1 } else if f < 0.0 { -1 } else { 0 };
        let tie = e1 == ef || e2 == ef;
        if actual != predicted && !(tie && actual == 0) {
            violations += 1;
        }
    }
    check(violations == 0, format!("{violations} violations in {cases} cases"))
}

fn c6_transfer_matrix() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=5);
        let layers: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(1.0..30.0), 10f64.powf(rng.gen_range(-9.0..-5.5)))).collect();
        let (terminal, fluid) = (rng.gen_range(1.0..30.0), rng.gen_range(1.0..25.0));
        let (xi, k) = (10f64.powf(rng.gen_range(12.0..17.0)), 10f64.powf(rng.gen_range(4.0..9.0)));
        let stack = Stack::new(layers.iter().map(|&(e, t)| Layer::new(konst(e), t).unwrap()).collect(), konst(terminal));
        for p in [Polarization::TE, Polarization::TM] {
            let got = stack_reflection(&stack, &konst(fluid), xi, k, p).map_err(err)?;
            let want = transfer_matrix_reflection(&layers, terminal, fluid, xi, k, p);
            worst = worst.max((got - want).abs() / want.abs());
        }
    }
    check(worst <= 1e-10, format!("1000 stacks × 2 polarizations, max rel diff {worst:.2e} (tol 1e-10)"))
}

fn c7_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let e = |rng: &mut ChaCha8Rng| konst(rng.gen_range(1.5..12.0));
        let fluid = e(&mut rng);
        let case = if rng.gen_bool(0.5) {
            let left = Stack::new(vec![Layer::new(e(&mut rng), rng.gen_range(1e-8..2e-7)).unwrap()], e(&mut rng));
            let grav = GravitySpec::slab(rng.gen_range(10.0..2000.0), rng.gen_range(1e-7..1e-5));
            SuspensionCase::plates(left, Stack::half_space(e(&mut rng)), fluid, 1e-8, Some(grav))
        } else {
            let r_out = rng.gen_range(2e-6..20e-6);
            let r_in = r_out * rng.gen_range(0.3..0.95);
            let grav = GravitySpec::hollow_sphere(rng.gen_range(1000.0..2500.0), 900.0, r_in, r_out);
            SuspensionCase::sphere(Stack::half_space(e(&mut rng)), fluid.clone(), e(&mut rng), fluid, r_in, r_out, Some(grav))
        }
        .map_err(err)?;
        let t = rng.gen_range(50.0..400.0);
        let l = Landscape::new(&case, t, (1e-8, 1e-6), &LandscapeOptions::default()).map_err(err)?;
        for _ in 0..3 {
            let d = 10f64.powf(rng.gen_range(-7.7..-6.2));
            let h = 1e-3 * d;
            let u = |x: f64| l.energy(x).unwrap();
            let fd = -(8.0 * (u(d + h) - u(d - h)) - (u(d + 2.0 * h) - u(d - 2.0 * h))) / (12.0 * h);
            let f = total_force(&case, d, &ThermalSpec::new(t)).map_err(err)?;
            worst = worst.max((fd - f).abs() / f.abs());
        }
    }
    check(worst <= 1e-6, format!("30 random (case, T, d), max rel diff {worst:.2e} (tol 1e-6)"))
}

fn membrane(lib: &MaterialLibrary) -> SuspensionCase {
    SuspensionCase::plates(
        Stack::half_space(lib.get("doped_silicon").unwrap().clone()),
        Stack::half_space(lib.get("polystyrene").unwrap().clone()),
        lib.get("ethanol").unwrap().clone(),
        1.0,
        Some(GravitySpec::slab(261.0, 2e-7)),
    )
    .unwrap()
}

fn c8_bifurcation(lib: &MaterialLibrary) -> Outcome {
    let case = membrane(lib);
    let family = CaseFamily { case: &case, options: LandscapeOptions::default() };
    let mut found = Vec::new();
    for dt in [5.0, 2.5] {
        let temps = temperature_grid(150.0, 400.0, dt).map_err(err)?;
        let r = sweep_temperature(&family, &temps, (1e-8, 5e-6), &SweepOptions::default()).map_err(err)?;
        if r.bifurcations.len() != 1 {
            return Err(format!("dT = {dt}: {} critical points found, expected 1", r.bifurcations.len()));
        }
        found.push(r.bifurcations[0]);
    }
    let (a, b) = (found[0], found[1]);
    let tangent = [a, b].iter().all(|x| x.refined && x.force_residual <= 1e-6 && x.slope_residual <= 1e-4 && x.pair_gap <= 0.05);
    check(
        (a.t_c - b.t_c).abs() <= 0.1 && tangent,
        format!(
            "T_c {:.3} K (dT 5) vs {:.3} K (dT 2.5), merge at {:.0} nm, force residual {:.1e}, slope residual {:.1e}, pair gap {:.3}",
            a.t_c,
            b.t_c,
            a.d_merge * 1e9,
            a.force_residual.max(b.force_residual),
            a.slope_residual.max(b.slope_residual),
            a.pair_gap.max(b.pair_gap)
        ),
    )
}

fn c9a_branch_slope(lib: &MaterialLibrary) -> Outcome {
    let case = SuspensionCase::plates(
        Stack::half_space(lib.get("silicon").unwrap().clone()),
        Stack::half_space(lib.get("teflon").unwrap().clone()),
        lib.get("ethanol").unwrap().clone(),
        1.0,
        None,
    )
    .map_err(err)?;
    let family = CaseFamily { case: &case, options: LandscapeOptions::default() };
    let temps = temperature_grid(290.0, 310.0, 2.0).map_err(err)?;
    let r = sweep_temperature(&family, &temps, (1e-8, 5e-6), &SweepOptions::default()).map_err(err)?;
    let branch = r
        .branches
        .iter()
        .find(|b| b.stability == Stability::Stable && b.samples.iter().any(|s| s.temperature == 300.0))
        .ok_or("no stable branch at 300 K")?;
    let d = branch.samples.iter().find(|s| s.temperature == 300.0).unwrap().d_c;
    let s = branch_slope(branch, 300.0).map_err(err)?.slope * 1e9;
    check(
        (0.2..=20.0).contains(&s.abs()) && (100e-9..=1e-6).contains(&d),
        format!("silicon|ethanol|teflon: d_c(300 K) = {:.1} nm, dd_c/dT = {s:.3} nm/K", d * 1e9),
    )
}

fn sphere_case(lib: &MaterialLibrary) -> SuspensionCase {
    let (r_in, r_out) = (3.2e-6, 5e-6);
    let eth = lib.get("ethanol").unwrap().clone();
    SuspensionCase::sphere(
        Stack::half_space(lib.get("doped_silicon").unwrap().clone()),
        eth.clone(),
        lib.get("polystyrene").unwrap().clone(),
        eth,
        r_in,
        r_out,
        Some(GravitySpec::hollow_sphere(1053.0, 789.0, r_in, r_out)),
    )
    .unwrap()
}

fn c9b_sphere(lib: &MaterialLibrary) -> Outcome {
    let case = sphere_case(lib);
    let range = (1e-8, 2e-6);
    let l = Landscape::new(&case, 300.0, range, &LandscapeOptions::default()).map_err(err)?;
    let eqs = find_equilibria(&l, range, 200).map_err(err)?;
    if !eqs.iter().any(|e| e.stability == Stability::Stable) {
        let peak = (0..200)
            .map(|i| range.0 * (range.1 / range.0).powf(i as f64 / 199.0))
            .map(|d| l.force(d).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        return Err(format!("no stable suspension at 300 K (max net force {peak:.3e} N against weight; the sphere sinks)"));
    }
    let domain = BoltzmannDomain::suspension(range.0, range.1);
    let opts = LandscapeOptions::default();
    let lo = boltzmann_stats(&case, 290.0, 290.0, &domain, &opts).map_err(err)?;
    let hi = boltzmann_stats(&case, 310.0, 310.0, &domain, &opts).map_err(err)?;
    let mid = boltzmann_stats(&case, 300.0, 300.0, &domain, &opts).map_err(err)?;
    let slope = (hi.mean_d - lo.mean_d) / 20.0 * 1e9;
    check(
        (0.1..=8.0).contains(&slope.abs()) && (10.0..=500.0).contains(&mid.barrier_in),
        format!("<d> slope {slope:.3} nm/K, contact barrier {:.1} kT", mid.barrier_in),
    )
}

fn c10_boltzmann(lib: &MaterialLibrary) -> Outcome {
    let z0 = 2e-7;
    let k = K_B * 300.0 / 1e-16;
    let h = FnLandscape { temperature: 300.0, energy: move |z: f64| 0.5 * k * (z - z0).powi(2), force: move |z: f64| -k * (z - z0) };
    let s = boltzmann_stats_on(&h, 300.0, &BoltzmannDomain::full_range(z0 - 1.5e-7, z0 + 1.5e-7)).map_err(err)?;
    let mean_err = (s.mean_d / z0 - 1.0).abs();
    let case = membrane(lib);
    let domain = BoltzmannDomain::suspension(1e-8, 5e-6);
    let opts = LandscapeOptions::default();
    let truth = boltzmann_stats(&case, 300.0, 300.0, &domain, &opts).map_err(err)?;
    let cf = counterfactual_mean(&case, 300.0, &[280.0, 300.0, 320.0], &domain, &opts).map_err(err)?;
    let norm = (truth.total_mass - 1.0).abs().max((s.total_mass - 1.0).abs());
    let interval = (truth.interval_mass - 0.95).abs().max((s.interval_mass - 0.95).abs());
    let cf_gap = (cf[1].1 - truth.mean_d).abs() / truth.mean_d;
    check(
        norm <= 1e-9 && interval <= 1e-6 && mean_err <= 1e-12 && cf_gap <= 1e-12,
        format!("mass err {norm:.1e}, 95% interval err {interval:.1e}, harmonic mean err {mean_err:.1e}, counterfactual gap {cf_gap:.1e}"),
    )
}

fn c11_determinism_and_speed(lib: &MaterialLibrary) -> Outcome {
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("run.json");
    let body = format!(
        r#"{{"materials_path": "{}",
  "case": {{"geometry": "plates", "fluid": "ethanol",
    "left": {{"layers": [{{"material": "lithium_niobate", "thickness_m": 5e-8}}], "terminal": "doped_silicon"}},
    "right": "polystyrene", "gravity": {{"mode": "slab", "delta_rho_kg_m3": 261.0, "thickness_m": 2e-7}}}},
  "temperatures": {{"start_K": 200, "stop_K": 300, "step_K": 10}},
  "separations": {{"start_m": 1e-8, "stop_m": 5e-6, "points": 200}}}}"#,
        common::data_dir().join("materials.json").display()
    );
    fs::write(&cfg, body).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for w in ["1", "8"] {
        let dir = tmp.path().join(w);
        let st = Command::new(env!("CARGO_BIN_EXE_casilift"))
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--workers", w])
            .env_remove("CASILIFT_WORKERS")
            .status()
            .map_err(|e| e.to_string())?;
        if !st.success() {
            return Err(format!("sweep with {w} workers failed"));
        }
        let read = |f: &str| fs::read(dir.join(f)).unwrap();
        outputs.push((read("sweep_branches.csv"), read("sweep_bifurcations.csv")));
    }
    let identical = outputs[0] == outputs[1];

    // 200 temperatures × 200 separations, three media plus a coating
    let case = SuspensionCase::plates(
        Stack::new(vec![Layer::new(lib.get("lithium_niobate").unwrap().clone(), 5e-8).unwrap()], lib.get("doped_silicon").unwrap().clone()),
        Stack::half_space(lib.get("teflon").unwrap().clone()),
        lib.get("ethanol").unwrap().clone(),
        1.0,
        None,
    )
    .map_err(err)?;
    let family = CaseFamily { case: &case, options: LandscapeOptions::default() };
    let temps = temperature_grid(150.0, 349.0, 1.0).map_err(err)?;
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let start = Instant::now();
    sweep_temperature(&family, &temps, (1e-8, 5e-6), &SweepOptions { n_scan: 200, ..Default::default() }).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    check(
        identical && secs < 300.0,
        format!(
            "workers 1 vs 8 byte-identical: {identical}; {}×200 sweep in {secs:.1} s on {cores} core(s) (limit 300 s)",
            temps.len()
        ),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let lib = library();
    let criteria: Vec<Criterion> = vec![
        ("1 ideal-metal T=0 law", Box::new(c1_ideal_metal)),
        ("2 classical limit", Box::new(c2_classical)),
        ("3 trapezoid identity", Box::new(c3_trapezoid)),
        ("4 O(T^2) correction", Box::new(c4_t_squared)),
        ("5 sign rule", Box::new(|| c5_sign_rule(&lib))),
        ("6 multilayer oracle", Box::new(c6_transfer_matrix)),
        ("7 energy/force duality", Box::new(c7_duality)),
        ("8 bifurcation detection", Box::new(|| c8_bifurcation(&lib))),
        ("9a stable-branch slope", Box::new(|| c9a_branch_slope(&lib))),
        ("9b sphere suspension", Box::new(|| c9b_sphere(&lib))),
        ("10 Boltzmann properties", Box::new(|| c10_boltzmann(&lib))),
        ("11 determinism and speed", Box::new(|| c11_determinism_and_speed(&lib))),
    ];
    // ACCEPTANCE_ONLY=5,9a runs a subset
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|x| x.trim().to_string()).collect());
    let criteria: Vec<_> = criteria
        .into_iter()
        .filter(|(name, _)| only.as_ref().is_none_or(|o| o.iter().any(|x| name.split(' ').next() == Some(x.as_str()))))
        .collect();
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d} [{secs:.1} s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
