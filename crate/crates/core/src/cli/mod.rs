//! The `casilift` command line.
//!
//! Every subcommand reads one JSON run configuration, validates all of it
//! before computing, writes CSV tables into the output directory and
//! finishes with `manifest.json` (config hash, constants, output checksums).
//! Exit codes: 0 success, 2 configuration or validation error, 3 numerical
//! failure.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{Resolved, RunConfig};

use crate::brownian::{boltzmann_stats_on, BasinPolicy};
use crate::constants::{C, EPS_0, E_CHARGE, G_STANDARD, HBAR, K_B, M_E};
use crate::error::{Error, Result};
use crate::landscape::{
    find_equilibria, sweep_temperature, BifurcationKind, CaseFamily, Landscape, Stability,
    SuspensionCase,
};
use crate::lifshitz::{evaluate, ThermalSpec};

pub const FORCE_CONVENTION: &str =
    "force_N > 0 pushes the bodies apart (repulsive); pressure_Pa > 0 is attractive; energy includes gravity";

#[derive(Debug, Parser)]
#[command(name = "casilift", version, about = "Casimir suspension landscapes in fluids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to the config's out_dir, then `.`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N", env = "CASILIFT_WORKERS")]
    workers: Option<usize>,
    /// Recompute reflection products at every separation.
    #[arg(long)]
    no_cache: bool,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Material tables.
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
    },
    /// Pressure and energy per area over the T × d grid.
    Pressure(Common),
    /// Total energy and force over the T × d grid.
    Landscape(Common),
    /// Equilibrium branches and critical temperatures.
    Sweep(Common),
    /// Boltzmann mean separation, 95% interval and contact barrier.
    Boltzmann(Common),
}

#[derive(Debug, Subcommand)]
enum MaterialsAction {
    /// ε(iξ) of each configured material on a log ξ grid.
    Tabulate(Common),
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, common) = match &cli.command {
        Command::Materials { action: MaterialsAction::Tabulate(c) } => ("materials tabulate", c),
        Command::Pressure(c) => ("pressure", c),
        Command::Landscape(c) => ("landscape", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Boltzmann(c) => ("boltzmann", c),
    };
    let level = if common.verbose { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .format_timestamp(None)
        .try_init();
    match execute(name, common) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
    warnings: Vec<String>,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Outputs {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        let hash = hex::encode(Sha256::digest(contents.as_bytes()));
        self.files.push((name.to_string(), hash));
        info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn execute(name: &str, common: &Common) -> Result<()> {
    let start = Instant::now();
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let config = RunConfig::parse(&text, &common.config.display().to_string())?;
    let base = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let workers = common.workers.or(config.workers).unwrap_or(1);
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let dir = common.out.clone().or_else(|| config.out_dir.as_ref().map(|d| base.join(d))).unwrap_or_else(|| ".".into());
    let r = config.resolve(&base)?;
    let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::Config(format!("`{name}` needs {what} in the config"))) };
    match name {
        "materials tabulate" => need(r.xi_grid.is_some(), "a `tabulate` section")?,
        _ => {
            need(r.case.is_some(), "a `case`")?;
            need(r.temperatures.is_some(), "`temperatures`")?;
            need(r.separations.is_some(), "`separations`")?;
        }
    }
    fs::create_dir_all(&dir)?;
    let mut out = Outputs { dir, files: Vec::new(), warnings: Vec::new(), extra: serde_json::Map::new() };
    let cache = !common.no_cache;
    match name {
        "materials tabulate" => tabulate(&r, &mut out)?,
        "pressure" => pressure_table(&r, workers, &mut out)?,
        "landscape" => landscape_table(&r, workers, cache, &mut out)?,
        "sweep" => sweep(&r, workers, cache, &mut out)?,
        "boltzmann" => boltzmann(&r, workers, cache, &mut out)?,
        _ => unreachable!(),
    }
    let manifest = json!({
        "artifact": "casilift",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "config_path": common.config.display().to_string(),
        "config_sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "constants": {
            "hbar_J_s": HBAR, "k_B_J_K": K_B, "c_m_s": C, "g_m_s2": G_STANDARD,
            "e_C": E_CHARGE, "eps0_F_m": EPS_0, "m_e_kg": M_E,
        },
        "force_convention": FORCE_CONVENTION,
        "workers": workers,
        "cache": cache,
        "outputs": out.files.iter().map(|(f, h)| json!({"file": f, "sha256": h})).collect::<Vec<_>>(),
        "warnings": out.warnings,
        "details": out.extra,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(out.dir.join("manifest.json"), body + "\n")?;
    Ok(())
}

/// Run `f` over `tasks` on `workers` threads; results come back in task
/// order and the first failing task (in task order) is reported.
pub fn parallel_map<T, R, F>(tasks: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    if tasks.is_empty() {
        return Ok(Vec::new());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<R>> = pool.install(|| tasks.par_iter().map(&f).collect());
    results.into_iter().collect()
}

fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn case(r: &Resolved) -> &SuspensionCase {
    r.case.as_ref().expect("checked before dispatch")
}

fn tabulate(r: &Resolved, out: &mut Outputs) -> Result<()> {
    let tab = r.config.tabulate.as_ref().expect("checked");
    let grid = r.xi_grid.as_ref().expect("checked");
    for name in &tab.materials {
        let m = r.library.get(name)?;
        let mut csv = String::from("xi_rad_s,eps,matsubara_K\n");
        for row in m.tabulate(grid)? {
            writeln!(csv, "{:e},{:e},{:e}", row.xi, row.eps, row.matsubara_t).unwrap();
        }
        out.write(&format!("materials_{name}.csv"), &csv)?;
    }
    Ok(())
}

fn pressure_table(r: &Resolved, workers: usize, out: &mut Outputs) -> Result<()> {
    let case = case(r);
    let quad = r.config.landscape_options(true).quad;
    let tasks: Vec<(f64, f64)> = r
        .temperatures
        .as_ref()
        .unwrap()
        .iter()
        .flat_map(|&t| r.separations.as_ref().unwrap().iter().map(move |&d| (t, d)))
        .collect();
    let rows = parallel_map(&tasks, workers, |&(t, d)| {
        let spec = ThermalSpec::new(t).with_truncation(r.config.tolerances.truncation).with_quad(quad);
        evaluate(&case.gap(d)?, &spec).map_err(|e| e.context(format!("T = {t} K, d = {d:e} m")))
    })?;
    let mut csv = String::from("d_m,T_K,pressure_Pa,energy_J_m2,n_terms\n");
    for (&(t, d), g) in tasks.iter().zip(&rows) {
        writeln!(csv, "{d:e},{t},{:e},{:e},{}", g.pressure.value, g.energy.value, g.pressure.n_terms_used).unwrap();
    }
    out.write("pressure.csv", &csv)
}

fn d_range(r: &Resolved) -> (f64, f64) {
    let d = r.separations.as_ref().unwrap();
    (d[0], d[d.len() - 1])
}

fn landscape_table(r: &Resolved, workers: usize, cache: bool, out: &mut Outputs) -> Result<()> {
    let case = case(r);
    let opts = r.config.landscape_options(cache);
    let ds = r.separations.as_ref().unwrap();
    let temps = r.temperatures.as_ref().unwrap();
    let range = d_range(r);
    let rows = parallel_map(temps, workers, |&t| {
        let l = Landscape::new(case, t, range, &opts)?;
        ds.iter().map(|&d| l.energy_and_force(d).map_err(|e| e.context(format!("d = {d:e} m")))).collect::<Result<Vec<_>>>()
    })?;
    let mut csv = String::from("T_K,d_m,energy_J,force_N,energy_kT\n");
    for (&t, row) in temps.iter().zip(&rows) {
        for (&d, &(u, f)) in ds.iter().zip(row) {
            writeln!(csv, "{t},{d:e},{u:e},{f:e},{:e}", u / (K_B * t)).unwrap();
        }
    }
    out.write("landscape.csv", &csv)
}

fn sweep(r: &Resolved, workers: usize, cache: bool, out: &mut Outputs) -> Result<()> {
    let case = case(r);
    let family = CaseFamily { case, options: r.config.landscape_options(cache) };
    let temps = r.temperatures.as_ref().unwrap();
    let res = with_pool(workers, || sweep_temperature(&family, temps, d_range(r), &r.config.sweep_options()))??;
    let mut rows: Vec<(f64, usize, f64, Stability)> =
        res.branches.iter().flat_map(|b| b.samples.iter().map(move |e| (e.temperature, b.id, e.d_c, b.stability))).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if rows.is_empty() {
        out.warn("no equilibria found in the separation range at any temperature".into());
    }
    let mut csv = String::from("T_K,branch_id,d_c_m,stability\n");
    for (t, id, d, s) in &rows {
        writeln!(csv, "{t},{id},{d:e},{}", s.as_str()).unwrap();
    }
    out.write("sweep_branches.csv", &csv)?;
    let mut csv = String::from("T_c_K,d_merge_m,branch_a,branch_b\n");
    let mut details = Vec::new();
    for b in &res.bifurcations {
        writeln!(csv, "{},{:e},{},{}", b.t_c, b.d_merge, b.branch_a, b.branch_b).unwrap();
        details.push(json!({
            "T_c_K": b.t_c,
            "kind": match b.kind { BifurcationKind::VanishesAbove => "vanishes_above", BifurcationKind::AppearsAbove => "appears_above" },
            "T_exists_K": b.t_exists,
            "T_gone_K": b.t_gone,
            "force_residual": b.force_residual,
            "slope_residual": b.slope_residual,
            "pair_gap": b.pair_gap,
            "refined": b.refined,
        }));
        if !b.refined {
            out.warn(format!("critical temperature near {} K could not be refined", b.t_c));
        }
    }
    out.write("sweep_bifurcations.csv", &csv)?;
    out.extra.insert("bifurcations".into(), json!(details));
    if let Some([lo, hi]) = case_liquid_range(r) {
        let outside: Vec<f64> = temps.iter().copied().filter(|&t| t < lo || t > hi).collect();
        if !outside.is_empty() {
            out.warn(format!("{} temperatures lie outside the fluid's liquid range [{lo}, {hi}] K", outside.len()));
        }
        out.extra.insert(
            "fluid_phase".into(),
            json!({"fluid": case.fluid.name, "liquid_range_K": [lo, hi], "non_liquid_temperatures_K": outside}),
        );
    }
    Ok(())
}

fn case_liquid_range(r: &Resolved) -> Option<[f64; 2]> {
    r.config.case.as_ref().and_then(|c| c.fluid_liquid_range_k)
}

fn boltzmann(r: &Resolved, workers: usize, cache: bool, out: &mut Outputs) -> Result<()> {
    let case = case(r);
    let opts = r.config.landscape_options(cache);
    let range = d_range(r);
    let domain = r.config.boltzmann_domain(range);
    let temps = r.temperatures.as_ref().unwrap();
    if temps[0] <= 0.0 {
        return Err(Error::Config("boltzmann needs temperatures above 0 K".into()));
    }
    let n_scan = r.config.tolerances.n_scan;
    let suspended = |l: &Landscape| -> Result<bool> {
        Ok(domain.policy == BasinPolicy::FullRange
            || find_equilibria(l, range, n_scan)?.iter().any(|e| e.stability == Stability::Stable))
    };
    let rows = parallel_map(temps, workers, |&t| {
        let l = Landscape::new(case, t, range, &opts)?;
        if !suspended(&l)? {
            return Ok(None);
        }
        boltzmann_stats_on(&l, t, &domain).map(Some).map_err(|e| e.context(format!("T = {t} K")))
    })?;
    let mut csv = String::from("T_K,mean_d_m,q025_m,q975_m,barrier_contact_kT\n");
    for (&t, s) in temps.iter().zip(&rows) {
        match s {
            Some(s) => writeln!(csv, "{t},{:e},{:e},{:e},{:e}", s.mean_d, s.q025, s.q975, s.barrier_in).unwrap(),
            None => out.warn(format!("no stable equilibrium at T = {t} K; row omitted")),
        }
    }
    out.write("boltzmann.csv", &csv)?;
    if let Some(ft) = r.config.boltzmann.frozen_t {
        let l = with_pool(workers, || Landscape::new(case, ft, range, &opts))??;
        if !suspended(&l)? {
            return Err(Error::Config(format!("frozen landscape at {ft} K has no stable equilibrium")));
        }
        let means = parallel_map(temps, workers, |&t| Ok(boltzmann_stats_on(&l, t, &domain)?.mean_d))?;
        let mut csv = String::from("T_K,mean_d_m\n");
        for (&t, m) in temps.iter().zip(&means) {
            writeln!(csv, "{t},{m:e}").unwrap();
        }
        out.write("boltzmann_counterfactual.csv", &csv)?;
        out.extra.insert("frozen_T_K".into(), json!(ft));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let tasks: Vec<usize> = (0..100).collect();
        let a = parallel_map(&tasks, 1, |&i| Ok(i * i)).unwrap();
        let b = parallel_map(&tasks, 8, |&i| Ok(i * i)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
        assert!(parallel_map(&Vec::<usize>::new(), 4, |&i| Ok(i)).unwrap().is_empty());
    }

    #[test]
    fn parallel_map_reports_first_failure() {
        let tasks: Vec<usize> = (0..50).collect();
        let e = parallel_map(&tasks, 4, |&i| if i >= 10 { Err(Error::Config(format!("task {i}"))) } else { Ok(i) }).unwrap_err();
        assert_eq!(e.to_string(), "configuration error: task 10");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["casilift", "frobnicate"]), 2);
        assert_eq!(run(["casilift", "pressure", "--bogus"]), 2);
        assert_eq!(run(["casilift", "pressure", "--config", "/nonexistent/x.json"]), 2);
    }
}
