//! Command-line front end: `verify`, `run`, `care`, `steady` and
//! `mesh-dump` subcommands over the library pipeline.
//!
//! Exit codes: 0 on success, 2 for configuration/argument problems,
//! 3 for numerical or convergence failures, 4 when a `verify` property
//! fails. `BURGERS_STAB_THREADS` caps the per-level worker count of
//! `run`.

use crate::assembly::{self, ControlRegion};
use crate::config::{load_config, ExperimentConfig};
use crate::convergence::run_experiment;
use crate::error::{Error, Result};
use crate::expr;
use crate::linalg::{self, DenseMatrix};
use crate::mesh::{DofVector, MeshLevel};
use crate::quadrature::QuadDegree;
use crate::report;
use crate::riccati::{self, CareProblem};
use crate::sparse::CsrMatrix;
use crate::steady;
use clap::{Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::fs;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "burgers-stab",
    about = "Riccati-stabilized 2D viscous Burgers: P1 finite elements, \
             feedback synthesis, BDF2/Newton time stepping, convergence tables"
)]
pub struct Cli {
    /// Configuration file (required by run, care and steady)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory override
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Allow the long-running level-6 Riccati solve
    #[arg(long, global = true)]
    pub allow_large: bool,
    /// Seed for randomized self-check properties
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Suppress informational output
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the built-in property suite (structural identities, oracles)
    Verify,
    /// Run an experiment configuration and emit tables and norm histories
    Run,
    /// Solve the Riccati equation at one level and export gain/certificates
    Care {
        /// Mesh refinement level
        #[arg(long)]
        level: u32,
    },
    /// Solve the steady Burgers equation by Picard iteration
    Steady {
        /// Mesh refinement level
        #[arg(long, default_value_t = 4)]
        level: u32,
    },
    /// Write the plain-text dump of one mesh level
    MeshDump {
        /// Mesh refinement level
        #[arg(long)]
        level: u32,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Verify => cmd_verify(cli.seed, cli.quiet),
        Command::Run => cmd_run(cli),
        Command::Care { level } => cmd_care(cli, *level),
        Command::Steady { level } => cmd_steady(cli, *level),
        Command::MeshDump { level } => cmd_mesh_dump(cli, *level),
    }
}

fn require_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand needs --config PATH".into()))?;
    load_config(path)
}

fn care_level_cap(allow_large: bool) -> u32 {
    if allow_large {
        6
    } else {
        5
    }
}

fn output_dir(cli: &Cli, config: &ExperimentConfig) -> PathBuf {
    cli.output
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir))
}

// ---------------------------------------------------------------- run

fn cmd_run(cli: &Cli) -> Result<()> {
    let config = require_config(cli)?;
    let cap = care_level_cap(cli.allow_large);
    let needs_care = config.control_enabled
        && matches!(
            config.tables,
            crate::config::Tables::Stabilized | crate::config::Tables::Both
        );
    for &k in &config.levels {
        if needs_care && k > cap {
            return Err(Error::Config(format!(
                "level {k} exceeds the Riccati cap {cap}; rerun with --allow-large \
                 (cap 6) or drop the level"
            )));
        }
        if k > 6 {
            return Err(Error::Config(format!(
                "level {k} exceeds the dense simulation cap 6"
            )));
        }
    }
    let out_dir = output_dir(cli, &config);
    fs::create_dir_all(&out_dir)?;

    let output = run_experiment(&config)?;
    for table in &output.tables {
        let name = format!("{}-{}.csv", config.id, table.metadata.variant);
        let mut f = fs::File::create(out_dir.join(&name))?;
        report::write_table_csv(table, &mut f)?;
        let mut f = fs::File::create(
            out_dir.join(format!("{}-{}-metadata.json", config.id, table.metadata.variant)),
        )?;
        report::write_metadata_json(&table.metadata, &mut f)?;
        if !cli.quiet {
            print!("{}", report::format_table(table));
            println!("wrote {}", out_dir.join(&name).display());
        }
    }
    // norm histories for both the shifted variable and the physical one
    let ys_expr = expr::parse(&config.ys)?;
    let params = config.physics();
    for run in &output.levels {
        let ys_nodes = run.mesh.interpolate(&ys_expr, 0.0)?;
        for (variant, traj) in [("stabilized", &run.stabilized), ("uncontrolled", &run.uncontrolled)]
        {
            if let Some(traj) = traj {
                let name = format!("{}-{}-k{}.jsonl", config.id, variant, run.level);
                let mut f = fs::File::create(out_dir.join(name))?;
                report::write_trajectory_jsonl(traj, &mut f)?;
                let physical =
                    crate::timestepping::unshift(traj, &params, &ys_nodes, &run.matrices)?;
                let name = format!("{}-{}-k{}-physical.jsonl", config.id, variant, run.level);
                let mut f = fs::File::create(out_dir.join(name))?;
                report::write_trajectory_jsonl(&physical, &mut f)?;
            }
        }
        if let (Some(sol), false) = (&run.gain, cli.quiet) {
            println!(
                "level {}: ARE residual {:.3e} ({} refinement steps)",
                run.level,
                sol.relative_residual,
                sol.refinement_history.len() - 1
            );
        }
    }
    Ok(())
}

// --------------------------------------------------------------- care

fn cmd_care(cli: &Cli, level: u32) -> Result<()> {
    let config = require_config(cli)?;
    let cap = care_level_cap(cli.allow_large);
    if level > cap {
        return Err(Error::Config(format!(
            "level {level} exceeds the Riccati cap {cap}; the dense solver is \
             O((2 n_h)^3) and level 6 already has n_h = 3969. Use --allow-large \
             for level 6; higher levels are not supported"
        )));
    }
    if !config.control_enabled {
        return Err(Error::Config(
            "control.enabled = false: no control operator, nothing to solve".into(),
        ));
    }
    let params = config.physics();
    let mesh = MeshLevel::build_uniform(level)?;
    let ys = expr::parse(&config.ys)?;
    let matrices = assembly::assemble_static(&mesh, &params, &ys, &config.control_region)?;
    let problem = CareProblem::from_matrices(&matrices, &params);
    let mut sol = riccati::solve_generalized_care(&problem)?;
    let (abscissa, omega_p, alpha) = riccati::certify_closed_loop(&problem, &mut sol)?;

    let out_dir = output_dir(cli, &config);
    fs::create_dir_all(&out_dir)?;
    let p_path = out_dir.join(format!("{}-P-k{level}.mtx", config.id));
    let s_path = out_dir.join(format!("{}-S-k{level}.mtx", config.id));
    report::write_dense_matrix_market(&sol.p, &mut fs::File::create(&p_path)?)?;
    report::write_dense_matrix_market(&sol.gain, &mut fs::File::create(&s_path)?)?;

    println!("level {level}: n = {}", problem.n());
    println!("relative ARE residual = {:.6e}", sol.relative_residual);
    println!("closed-loop abscissa  = {abscissa:.6}");
    println!("omega_P               = {omega_p:.6}");
    println!("alpha                 = {alpha:.3e}");
    if !cli.quiet {
        println!("wrote {} and {}", p_path.display(), s_path.display());
    }
    Ok(())
}

// ------------------------------------------------------------- steady

fn cmd_steady(cli: &Cli, level: u32) -> Result<()> {
    let config = require_config(cli)?;
    let params = config.physics();
    let mesh = MeshLevel::build_uniform(level)?;
    let ys = expr::parse(&config.ys)?;
    let profile = steady::SteadyProfile::new(ys, &params);
    let degree = if profile.fs.has_transcendental() {
        QuadDegree::TRIG
    } else {
        QuadDegree::DEFAULT
    };
    let load = assembly::load_vector(&mesh, &profile.fs, 0.0, degree)?;
    let y = steady::solve_steady_picard(&mesh, &load, &params, 1e-12, 100)?;
    let (l2, h1) = assembly::continuum_error(&mesh, &y, &profile.ys, 0.0, degree)?;
    let matrices = assembly::assemble_static(&mesh, &params, &profile.ys, &config.control_region)?;
    let report = steady::coercivity_margin(&matrices, &params)?;
    println!("level {level}: Picard converged");
    println!("|| y_h - y_s ||_L2 = {l2:.6e}");
    println!("|| y_h - y_s ||_H1 = {h1:.6e}");
    println!("coercivity margin   = {:.6}", report.margin);
    println!("gradient margin     = {:.6}", report.grad_margin);
    Ok(())
}

// ---------------------------------------------------------- mesh-dump

fn cmd_mesh_dump(cli: &Cli, level: u32) -> Result<()> {
    let mesh = MeshLevel::build_uniform(level)?;
    match &cli.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("mesh-k{level}.txt"));
            let mut f = fs::File::create(&path)?;
            mesh.dump(&mut f)?;
            if !cli.quiet {
                println!("wrote {}", path.display());
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            mesh.dump(&mut out)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------- verify

struct Check {
    name: &'static str,
    outcome: std::result::Result<(), String>,
}

fn check(name: &'static str, f: impl FnOnce() -> std::result::Result<(), String>) -> Check {
    Check {
        name,
        outcome: f(),
    }
}

/// Run the built-in property suite; every line prints `PASS`/`FAIL` and
/// any failure exits with code 4.
pub fn cmd_verify(seed: u64, quiet: bool) -> Result<()> {
    let ex1_params = assembly::PhysicsParams {
        eta: 1.0,
        nu0: 0.0,
        v: [1.0, 1.0],
        omega: 24.0,
    };
    let bubble = expr::parse("x1*x2*(1-x1)*(1-x2)").map_err(|e| Error::Property(e.to_string()))?;
    let sine = expr::parse("sin(pi*x1)*sin(pi*x2)").map_err(|e| Error::Property(e.to_string()))?;

    let skew_violation = |ys: &expr::Expr, degree: QuadDegree| -> std::result::Result<f64, String> {
        let mesh = MeshLevel::build_uniform(3).map_err(|e| e.to_string())?;
        let m = assembly::assemble_static_with_degree(
            &mesh,
            &ex1_params,
            ys,
            &ControlRegion::Full,
            degree,
        )
        .map_err(|e| e.to_string())?;
        let sum = CsrMatrix::linear_combination(&[
            (1.0, &m.conv_steady),
            (1.0, &m.conv_steady.transpose()),
            (1.0, &m.react_steady),
        ])
        .map_err(|e| e.to_string())?;
        Ok(sum.max_abs())
    };

    let checks = vec![
        check("mesh counting formulas and unit area", || {
            for (k, nv, nt, ni) in [(1u32, 9, 8, 1), (2, 25, 32, 9), (3, 81, 128, 49)] {
                let mesh = MeshLevel::build_uniform(k).map_err(|e| e.to_string())?;
                if mesh.num_vertices() != nv
                    || mesh.num_triangles() != nt
                    || mesh.num_interior() != ni
                {
                    return Err(format!("level {k}: wrong counts"));
                }
                let area: f64 = (0..mesh.num_triangles()).map(|t| mesh.triangle_area(t)).sum();
                if (area - 1.0).abs() > 1e-13 {
                    return Err(format!("level {k}: area sum {area}"));
                }
            }
            Ok(())
        }),
        check("prolongation reproduces coarse P1 fields", || {
            let coarse = MeshLevel::build_uniform(3).map_err(|e| e.to_string())?;
            let fine = MeshLevel::build_uniform(4).map_err(|e| e.to_string())?;
            let zc = coarse.interpolate(&sine, 0.0).map_err(|e| e.to_string())?;
            let zf = crate::mesh::prolongate(&zc, &coarse, &fine).map_err(|e| e.to_string())?;
            let mut rng = StdRng::seed_from_u64(seed);
            for _ in 0..100 {
                let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                let a = crate::mesh::eval_p1(&zc, &coarse, p).map_err(|e| e.to_string())?;
                let b = crate::mesh::eval_p1(&zf, &fine, p).map_err(|e| e.to_string())?;
                if (a - b).abs() > 1e-13 {
                    return Err(format!("mismatch {a} vs {b} at {p:?}"));
                }
            }
            Ok(())
        }),
        check("skew identity, polynomial steady state (<= 1e-12)", || {
            let v = skew_violation(&bubble, QuadDegree::DEFAULT)?;
            (v <= 1e-12).then_some(()).ok_or(format!("violation {v:.3e}"))
        }),
        check("skew identity, trigonometric steady state (<= 1e-8)", || {
            let v = skew_violation(&sine, QuadDegree::TRIG)?;
            (v <= 1e-8).then_some(()).ok_or(format!("violation {v:.3e}"))
        }),
        check("skew identity breaks under degree-2 quadrature", || {
            let v = skew_violation(&bubble, QuadDegree(2))?;
            (v > 1e-8)
                .then_some(())
                .ok_or(format!("violation only {v:.3e}; sensitivity lost"))
        }),
        check("convective term is energy neutral (100 random states)", || {
            let mesh = MeshLevel::build_uniform(3).map_err(|e| e.to_string())?;
            let mut rng = StdRng::seed_from_u64(seed ^ 0x11);
            for _ in 0..100 {
                let z = DofVector::from_values(
                    &mesh,
                    (0..mesh.num_interior())
                        .map(|_| rng.gen_range(-1.0..1.0))
                        .collect(),
                )
                .map_err(|e| e.to_string())?;
                let n = assembly::assemble_nonlinear(&mesh, &z, [1.0, 1.0])
                    .map_err(|e| e.to_string())?;
                let dot: f64 = z.values.iter().zip(&n.values).map(|(a, b)| a * b).sum();
                let scale = z
                    .values
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .powf(1.5)
                    .max(1.0);
                if dot.abs() > 1e-12 * scale {
                    return Err(format!("Z'N(Z)Z = {dot:.3e}"));
                }
            }
            Ok(())
        }),
        check("convective Jacobian matches finite differences", || {
            for k in [1u32, 2, 3] {
                let mesh = MeshLevel::build_uniform(k).map_err(|e| e.to_string())?;
                let n = mesh.num_interior();
                let mut rng = StdRng::seed_from_u64(seed ^ u64::from(k));
                let z = DofVector::from_values(
                    &mesh,
                    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
                .map_err(|e| e.to_string())?;
                let jac = DenseMatrix::from_csr(
                    &assembly::assemble_nonlinear_jacobian(&mesh, &z, [1.0, 1.0])
                        .map_err(|e| e.to_string())?,
                );
                let eps = 1e-6;
                for col in 0..n {
                    let mut zp = z.clone();
                    zp.values[col] += eps;
                    let mut zm = z.clone();
                    zm.values[col] -= eps;
                    let np = assembly::assemble_nonlinear(&mesh, &zp, [1.0, 1.0])
                        .map_err(|e| e.to_string())?;
                    let nm = assembly::assemble_nonlinear(&mesh, &zm, [1.0, 1.0])
                        .map_err(|e| e.to_string())?;
                    for row in 0..n {
                        let fd = (np.values[row] - nm.values[row]) / (2.0 * eps);
                        let exact = jac.get(row, col);
                        if (fd - exact).abs() / exact.abs().max(1.0) > 1e-6 {
                            return Err(format!("k={k} entry ({row},{col}): {exact} vs {fd}"));
                        }
                    }
                }
            }
            Ok(())
        }),
        check("scalar Riccati equation matches -1 + sqrt(2)", || {
            let a = DenseMatrix::from_rows(&[vec![-1.0]]);
            let b = DenseMatrix::from_rows(&[vec![1.0]]);
            let (p, _) = riccati::solve_care(&a, &b).map_err(|e| e.to_string())?;
            let expect = -1.0 + 2.0f64.sqrt();
            let err = (p.get(0, 0) - expect).abs();
            (err <= 1e-12).then_some(()).ok_or(format!("error {err:.3e}"))
        }),
        check("Riccati residual and closed-loop certificates (level 2)", || {
            let mesh = MeshLevel::build_uniform(2).map_err(|e| e.to_string())?;
            let m = assembly::assemble_static(&mesh, &ex1_params, &bubble, &ControlRegion::Full)
                .map_err(|e| e.to_string())?;
            let problem = CareProblem::from_matrices(&m, &ex1_params);
            let mut sol = riccati::solve_generalized_care(&problem).map_err(|e| e.to_string())?;
            if sol.relative_residual > 1e-10 {
                return Err(format!("residual {:.3e}", sol.relative_residual));
            }
            let (lmin, pnorm) = riccati::psd_margin(&sol.p).map_err(|e| e.to_string())?;
            if lmin < -1e-10 * pnorm {
                return Err(format!("P not PSD: lambda_min {lmin:.3e}"));
            }
            let (abscissa, omega_p, _) =
                riccati::certify_closed_loop(&problem, &mut sol).map_err(|e| e.to_string())?;
            if abscissa >= 0.0 {
                return Err(format!("closed loop not stable: abscissa {abscissa}"));
            }
            if omega_p <= 0.0 || omega_p > -abscissa + 1e-9 {
                return Err(format!("omega_P {omega_p} vs abscissa {abscissa}"));
            }
            Ok(())
        }),
        check("Lyapunov solve residual on a random stable system", || {
            let mut rng = StdRng::seed_from_u64(seed ^ 0x77);
            let n = 20;
            let a = DenseMatrix::from_fn(n, n, |r, c| {
                let v: f64 = rng.gen_range(-1.0..1.0);
                if r == c {
                    v - n as f64
                } else {
                    v
                }
            });
            let q = DenseMatrix::identity(n);
            let x = linalg::solve_lyapunov(&a, &q).map_err(|e| e.to_string())?;
            let resid = a
                .transpose()
                .matmul(&x)
                .add(&x.matmul(&a))
                .add(&q)
                .frobenius()
                / q.frobenius();
            (resid <= 1e-10).then_some(()).ok_or(format!("residual {resid:.3e}"))
        }),
        check("L2 projection satisfies Galerkin orthogonality", || {
            let mesh = MeshLevel::build_uniform(3).map_err(|e| e.to_string())?;
            let proj = assembly::l2_project(&mesh, &sine, 0.0).map_err(|e| e.to_string())?;
            let load = assembly::load_vector(&mesh, &sine, 0.0, QuadDegree::TRIG)
                .map_err(|e| e.to_string())?;
            let m = assembly::assemble_static(&mesh, &ex1_params, &bubble, &ControlRegion::Full)
                .map_err(|e| e.to_string())?;
            let mp = m.mass.matvec(&proj.values);
            for j in 0..mesh.num_interior() {
                if (mp[j] - load.values[j]).abs() > 1e-13 {
                    return Err(format!("row {j}: defect {}", mp[j] - load.values[j]));
                }
            }
            Ok(())
        }),
    ];

    let mut failures = 0;
    for c in &checks {
        match &c.outcome {
            Ok(()) => {
                if !quiet {
                    println!("PASS {}", c.name);
                }
            }
            Err(why) => {
                println!("FAIL {}: {why}", c.name);
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(Error::Property(format!(
            "{failures} of {} properties failed",
            checks.len()
        )));
    }
    if !quiet {
        println!("all {} properties passed", checks.len());
    }
    Ok(())
}
