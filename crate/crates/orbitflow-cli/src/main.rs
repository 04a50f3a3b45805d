//! Command-line runner: validate run configs, integrate flows, run
//! diagnostic checks and work with the built-in system catalog.
//!
//! Exit codes: 0 success, 1 validation or check failure, 2 unreadable or
//! unparsable input, 3 runtime divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use orbitflow::catalog::{self, CatalogEntry};
use orbitflow::config::{BuiltConfig, RunConfig};
use orbitflow::hamiltonian::{
    conservation_report, level_set_probe, Trajectory, LEVEL_SET_RADII,
};
use orbitflow::report::{
    to_json_bytes, trajectory_csv, write_atomic, AggregateReport, CheckItem, CheckReport,
    DriftEntry, InvarianceEntry, LevelSetSummary, SimulateReport, ValidateReport,
};
use orbitflow::representation::{orbit_tangent, poisson_bracket, tau_invariance_residual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Residual bound for invariance and involution sweeps.
const CHECK_TOL: f64 = 1e-10;
/// Invariant drift bound along integrated catalog flows.
const DRIFT_TOL: f64 = 1e-8;
/// Closed-form reproduction bound for catalog flows.
const CLOSED_FORM_TOL: f64 = 1e-6;
/// Points per randomized residual sweep.
const SWEEP_POINTS: usize = 100;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "orbitflow",
    version,
    about = "Hamiltonian flows on Lie-algebra orbits: validate, simulate, check, catalog"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a config and run the structural validations.
    Validate {
        config: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the configured flow and emit a trajectory plus a summary.
    Simulate {
        config: PathBuf,
        /// Override the configured horizon.
        #[arg(long)]
        t: Option<f64>,
        /// Override the configured step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Write the trajectory here (the summary always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory file format.
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run invariance, involution, orbit-dimension and level-set checks.
    Check {
        config: PathBuf,
        /// Override the configured RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect or export the built-in systems.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Print the available entry ids.
    List,
    /// Emit an entry as a self-contained config file.
    Export {
        id: String,
        /// System id within the entry (defaults to the entry's first flow).
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate, integrate and check every catalog flow; emit one aggregate
    /// report.
    RunAll {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ORBITFLOW_LOG")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config, out } => cmd_validate(&config, out.as_deref()),
        Command::Simulate {
            config,
            t,
            dt,
            out,
            format,
        } => cmd_simulate(&config, t, dt, out.as_deref(), format),
        Command::Check { config, seed, out } => cmd_check(&config, seed, out.as_deref()),
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for id in catalog::CATALOG_IDS {
                    println!("{id}");
                }
                ExitCode::SUCCESS
            }
            CatalogAction::Export { id, system, out } => {
                cmd_catalog_export(&id, system.as_deref(), out.as_deref())
            }
            CatalogAction::RunAll { out } => cmd_catalog_run_all(out.as_deref()),
        },
    }
}

/// Read and parse a config; any failure here is a parse error (exit 2).
fn load_config(path: &Path) -> Result<RunConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    RunConfig::from_json(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn emit<T: serde::Serialize>(report: &T, out: Option<&Path>) -> Result<(), ExitCode> {
    let bytes = to_json_bytes(report);
    match out {
        Some(path) => write_atomic(path, &bytes).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_FAILURE)
        }),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn validate_config(name: &str, cfg: &RunConfig) -> (ValidateReport, Option<BuiltConfig>) {
    let mut items = Vec::new();
    let built = match cfg.build() {
        Ok(b) => b,
        Err(e) => {
            items.push(CheckItem {
                name: "build".into(),
                passed: false,
                detail: e.to_string(),
            });
            return (
                ValidateReport {
                    config: name.to_string(),
                    passed: false,
                    items,
                },
                None,
            );
        }
    };

    // The constructors enforce these exactly; surface them as explicit items.
    items.push(CheckItem {
        name: "jacobi".into(),
        passed: built.algebra.jacobi_residual() == num::Zero::zero(),
        detail: "cyclic bracket sums vanish in exact arithmetic".into(),
    });
    items.push(CheckItem {
        name: "antisymmetry".into(),
        passed: built.algebra.antisymmetry_residual() == num::Zero::zero(),
        detail: "structure constants are antisymmetric in exact arithmetic".into(),
    });
    items.push(CheckItem {
        name: "metric".into(),
        passed: true,
        detail: "Gram matrix is symmetric and invertible".into(),
    });
    if built.split.is_some() {
        items.push(CheckItem {
            name: "split".into(),
            passed: true,
            detail: "subalgebras close and span the algebra as a direct sum".into(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for inv in &built.invariants {
        let mut max = 0.0_f64;
        for _ in 0..SWEEP_POINTS {
            let u = random_point(built.algebra.dim(), &mut rng);
            match tau_invariance_residual(&built.algebra, &built.metric, inv, &u) {
                Ok(r) => max = max.max(r),
                Err(e) => {
                    max = f64::INFINITY;
                    log::warn!("invariance sweep for {} failed: {e}", inv.name());
                }
            }
        }
        items.push(CheckItem {
            name: format!("invariance:{}", inv.name()),
            passed: max < CHECK_TOL,
            detail: format!("max residual {max:.3e} over {SWEEP_POINTS} sampled points"),
        });
    }

    let passed = items.iter().all(|i| i.passed);
    (
        ValidateReport {
            config: name.to_string(),
            passed,
            items,
        },
        Some(built),
    )
}

fn cmd_validate(path: &Path, out: Option<&Path>) -> ExitCode {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (report, _) = validate_config(&cfg.name, &cfg);
    if let Err(code) = emit(&report, out) {
        return code;
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn single_row_trajectory(initial: &DVector<f64>, dt: f64) -> Trajectory {
    Trajectory {
        times: vec![0.0],
        states: vec![initial.clone()],
        dt,
        method: "rk4",
    }
}

fn trajectory_bytes(traj: &Trajectory, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => trajectory_csv(traj).into_bytes(),
        Format::Json => {
            let states: Vec<Vec<f64>> = traj.states.iter().map(|s| s.iter().copied().collect()).collect();
            to_json_bytes(&serde_json::json!({
                "method": traj.method,
                "dt": traj.dt,
                "times": traj.times,
                "states": states,
            }))
        }
    }
}

fn cmd_simulate(
    path: &Path,
    t: Option<f64>,
    dt: Option<f64>,
    out: Option<&Path>,
    format: Format,
) -> ExitCode {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let built = match cfg.build() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let t_final = t.unwrap_or(cfg.t);
    let dt = dt.unwrap_or(cfg.dt);

    let (traj, err) = if t_final == 0.0 {
        (single_row_trajectory(&built.system.initial, dt), None)
    } else {
        built.system.integrate_partial(t_final, dt)
    };

    if let Some(path) = out {
        if let Err(e) = write_atomic(path, &trajectory_bytes(&traj, format)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_FAILURE);
        }
    }

    let conservation = conservation_report(&traj, &built.invariants)
        .unwrap_or_default()
        .into_iter()
        .map(|(name, drift)| DriftEntry { name, drift })
        .collect();
    let mut max_tangency = 0.0_f64;
    let stride = (traj.len() / 16).max(1);
    for s in traj.states.iter().step_by(stride) {
        if let Ok(r) = built.system.tangency_residual(s) {
            max_tangency = max_tangency.max(r);
        }
    }

    let report = SimulateReport {
        config: cfg.name.clone(),
        t: t_final,
        dt,
        sign: built.system.sign,
        steps: traj.len() - 1,
        final_state: traj.final_state().iter().copied().collect(),
        conservation,
        max_tangency_residual: max_tangency,
    };
    if let Err(code) = emit(&report, None) {
        return code;
    }
    match err {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DIVERGED)
        }
    }
}

fn random_point(dim: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.gen_range(-2.0..2.0))
}

fn check_config(cfg: &RunConfig, built: &BuiltConfig, seed: u64) -> CheckReport {
    let dim = built.algebra.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut invariance = Vec::new();
    for inv in &built.invariants {
        let mut max = 0.0_f64;
        for _ in 0..SWEEP_POINTS {
            let u = random_point(dim, &mut rng);
            if let Ok(r) = tau_invariance_residual(&built.algebra, &built.metric, inv, &u) {
                max = max.max(r);
            }
        }
        invariance.push(InvarianceEntry {
            name: inv.name().to_string(),
            max_residual: max,
        });
    }

    let n = built.invariants.len();
    let mut involution = vec![vec![0.0_f64; n]; n];
    for _ in 0..SWEEP_POINTS {
        let u = random_point(dim, &mut rng);
        for i in 0..n {
            for j in 0..n {
                if let Ok(pb) = poisson_bracket(
                    &built.algebra,
                    &built.metric,
                    &built.invariants[i],
                    &built.invariants[j],
                    &u,
                    None,
                ) {
                    involution[i][j] = involution[i][j].max(pb.abs());
                }
            }
        }
    }

    let orbit_dimension = orbit_tangent(
        &built.algebra,
        &built.metric,
        &built.system.initial,
        built.split.as_ref().map(|(s, role)| (s.as_ref(), *role)),
    )
    .map(|o| o.dim)
    .unwrap_or(0);

    let level_set = if cfg.checks.iter().any(|c| c == "level_set") && !built.invariants.is_empty()
    {
        let values: Vec<f64> = built
            .invariants
            .iter()
            .map(|f| f.eval(&built.system.initial).unwrap_or(f64::NAN))
            .collect();
        level_set_probe(
            &built.system,
            &built.invariants,
            &values,
            &LEVEL_SET_RADII,
            seed,
        )
        .ok()
        .map(|rep| LevelSetSummary {
            verdict: format!("{:?}", rep.verdict).to_uppercase(),
            witness_count: rep.witnesses.len(),
            max_witness_norm: rep
                .witnesses
                .iter()
                .map(|w| w.norm())
                .fold(0.0, f64::max),
        })
    } else {
        None
    };

    let passed = invariance.iter().all(|e| e.max_residual < CHECK_TOL)
        && involution
            .iter()
            .flatten()
            .all(|&v| v < CHECK_TOL);
    CheckReport {
        config: cfg.name.clone(),
        seed,
        invariance,
        involution_fields: built.invariants.iter().map(|f| f.name().to_string()).collect(),
        involution_matrix: involution,
        orbit_dimension,
        level_set,
        passed,
    }
}

fn cmd_check(path: &Path, seed: Option<u64>, out: Option<&Path>) -> ExitCode {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let built = match cfg.build() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let report = check_config(&cfg, &built, seed.unwrap_or(cfg.seed));
    if let Err(code) = emit(&report, out) {
        return code;
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn cmd_catalog_export(id: &str, system: Option<&str>, out: Option<&Path>) -> ExitCode {
    let entry = match catalog::entry(id) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let system_id = match system {
        Some(s) => s.to_string(),
        None => entry.systems[0].id.clone(),
    };
    let cfg = match RunConfig::from_catalog(&entry, &system_id) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let text = cfg.to_json();
    match out {
        Some(path) => {
            if let Err(e) = write_atomic(path, text.as_bytes()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_FAILURE);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

/// One catalog flow: config round trip, validation sweep, integration with
/// conservation and closed-form reproduction.
fn run_all_entry(entry: &CatalogEntry, system_id: &str) -> ValidateReport {
    let name = format!("{}/{}", entry.id, system_id);
    let mut items = Vec::new();

    let cfg = match RunConfig::from_catalog(entry, system_id) {
        Ok(c) => c,
        Err(e) => {
            return ValidateReport {
                config: name,
                passed: false,
                items: vec![CheckItem {
                    name: "export".into(),
                    passed: false,
                    detail: e.to_string(),
                }],
            }
        }
    };

    let text = cfg.to_json();
    let round_trip = RunConfig::from_json(&text)
        .map(|c| c.to_json() == text)
        .unwrap_or(false);
    items.push(CheckItem {
        name: "round_trip".into(),
        passed: round_trip,
        detail: "export → parse → export is byte-identical".into(),
    });

    let (mut validation, built) = validate_config(&name, &cfg);
    items.append(&mut validation.items);
    let Some(built) = built else {
        return ValidateReport {
            config: name,
            passed: false,
            items,
        };
    };

    match built.system.integrate(cfg.t, cfg.dt) {
        Err(e) => items.push(CheckItem {
            name: "integrate".into(),
            passed: false,
            detail: e.to_string(),
        }),
        Ok(traj) => {
            let max_drift = conservation_report(&traj, &built.invariants)
                .unwrap_or_default()
                .into_iter()
                .map(|(_, d)| d)
                .fold(0.0, f64::max);
            items.push(CheckItem {
                name: "conservation".into(),
                passed: max_drift < DRIFT_TOL,
                detail: format!("max invariant drift {max_drift:.3e}"),
            });
            if entry
                .system_spec(system_id)
                .map(|s| s.closed_form.is_some())
                .unwrap_or(false)
            {
                let mut dev = 0.0_f64;
                for (t, s) in traj.times.iter().zip(&traj.states) {
                    match entry.closed_form(system_id, &built.system.initial, *t) {
                        Ok(cf) => dev = dev.max((cf - s).amax()),
                        Err(_) => dev = f64::INFINITY,
                    }
                }
                items.push(CheckItem {
                    name: "closed_form".into(),
                    passed: dev < CLOSED_FORM_TOL,
                    detail: format!("max deviation from the published solution {dev:.3e}"),
                });
            }
        }
    }

    let passed = items.iter().all(|i| i.passed);
    ValidateReport {
        config: name,
        passed,
        items,
    }
}

fn cmd_catalog_run_all(out: Option<&Path>) -> ExitCode {
    let mut entries = Vec::new();
    for id in catalog::CATALOG_IDS {
        let entry = match catalog::entry(id) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAILURE);
            }
        };
        for spec in &entry.systems {
            log::info!("running {}/{}", entry.id, spec.id);
            entries.push(run_all_entry(&entry, &spec.id));
        }
    }
    let failures = entries.iter().filter(|r| !r.passed).count();
    let report = AggregateReport { entries, failures };
    if let Err(code) = emit(&report, out) {
        return code;
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}
