//! Errors between refinement levels or against exact solutions,
//! convergence orders, and the experiment driver that assembles the
//! tables.
//!
//! Inter-level errors follow `err(z_{h_k}) = ||z_{h_{k+1}} - z_{h_k}||`:
//! the coarse state is prolonged to the finer mesh (exact on P1 thanks
//! to nestedness) and the difference is measured in the fine-mesh mass
//! and mass-plus-stiffness norms. Each error is reported in the row of
//! the coarser level of its pair (the level whose accuracy it
//! witnesses), so a run over levels `k_0..k_m` produces rows
//! `h = 2^{-k_0} .. 2^{-(k_m - 1)}`. Orders between consecutive rows
//! use `log(e_{i+1}/e_i) / log(h_{i+1}/h_i)`.
//!
//! Runs with a manufactured forcing instead measure each level against
//! the exact solution by elementwise quadrature, one row per level.

use crate::assembly::{self, SystemMatrices};
use crate::config::{ExperimentConfig, Mode, Tables};
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::mesh::{self, MeshLevel};
#[cfg(test)]
use crate::mesh::DofVector;
use crate::quadrature::QuadDegree;
use crate::riccati::{self, CareProblem, CareSolution};
use crate::steady;
use crate::timestepping::{self, NewtonConfig, TimeGrid, Trajectory};

/// One row of a convergence table; `None` orders are undefined (first
/// row) and a `None` control column means no feedback was active.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub h: f64,
    pub err_l2: f64,
    pub order_l2: Option<f64>,
    pub err_h1: f64,
    pub order_h1: Option<f64>,
    pub err_u: Option<f64>,
    pub order_u: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TableMetadata {
    pub example: String,
    pub variant: String,
    pub t_eval: f64,
    pub dt_rule: String,
    pub omega: f64,
    pub levels: Vec<u32>,
    pub quad_degree: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub metadata: TableMetadata,
}

/// Per-pair orders `log(e_{i+1}/e_i) / log(h_{i+1}/h_i)`; the first
/// entry is undefined, a zero error maps to the infinity sentinel.
pub fn compute_orders(errors: &[f64], h_values: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(errors.len(), h_values.len());
    let mut orders = vec![None; errors.len()];
    for i in 1..errors.len() {
        if errors[i] == 0.0 {
            orders[i] = Some(f64::INFINITY);
        } else if errors[i - 1] > 0.0 {
            orders[i] = Some((errors[i] / errors[i - 1]).ln() / (h_values[i] / h_values[i - 1]).ln());
        }
    }
    orders
}

/// Inter-level error at `t_eval` (snapped to the nearest stored time
/// level): coarse state and control prolonged to the fine mesh,
/// difference measured with the fine-mesh norms. Returns
/// `(l2, h1, control_l2)`.
pub fn error_between_levels(
    fine: &Trajectory,
    fine_mesh: &MeshLevel,
    coarse: &Trajectory,
    coarse_mesh: &MeshLevel,
    matrices_fine: &SystemMatrices,
    t_eval: f64,
) -> Result<(f64, f64, f64)> {
    if fine_mesh.level() != coarse_mesh.level() + 1 {
        return Err(Error::Argument(format!(
            "inter-level error requires nested consecutive levels, got {} and {}",
            coarse_mesh.level(),
            fine_mesh.level()
        )));
    }
    let fi = fine.index_at(t_eval).ok_or_else(|| {
        Error::Argument(format!("fine trajectory has no state near t = {t_eval}"))
    })?;
    let ci = coarse.index_at(t_eval).ok_or_else(|| {
        Error::Argument(format!("coarse trajectory has no state near t = {t_eval}"))
    })?;
    let state_c = mesh::prolongate(&coarse.states[ci], coarse_mesh, fine_mesh)?;
    let control_c = mesh::prolongate(&coarse.controls[ci], coarse_mesh, fine_mesh)?;
    let dz: Vec<f64> = fine.states[fi]
        .values
        .iter()
        .zip(&state_c.values)
        .map(|(a, b)| a - b)
        .collect();
    let du: Vec<f64> = fine.controls[fi]
        .values
        .iter()
        .zip(&control_c.values)
        .map(|(a, b)| a - b)
        .collect();
    let l2sq = matrices_fine.mass.bilinear(&dz, &dz);
    let h1sq = l2sq + matrices_fine.stiffness.bilinear(&dz, &dz);
    let usq = matrices_fine.mass.bilinear(&du, &du);
    Ok((
        l2sq.max(0.0).sqrt(),
        h1sq.max(0.0).sqrt(),
        usq.max(0.0).sqrt(),
    ))
}

/// Error of a computed trajectory against a closed-form exact solution
/// at `t_eval`, measured by elementwise quadrature against the true
/// field and its exact gradient. Returns `(l2, h1)`.
pub fn error_vs_exact(
    traj: &Trajectory,
    exact: &Expr,
    mesh: &MeshLevel,
    t_eval: f64,
) -> Result<(f64, f64)> {
    let i = traj.index_at(t_eval).ok_or_else(|| {
        Error::Argument(format!("trajectory has no state near t = {t_eval}"))
    })?;
    // degree >= 6 against the true exact avoids superconvergence artifacts
    let degree = if exact.has_transcendental() {
        QuadDegree::TRIG
    } else {
        QuadDegree::DEFAULT
    };
    assembly::continuum_error(mesh, &traj.states[i], exact, traj.times[i], degree)
}

/// Everything computed for one mesh level of an experiment run.
pub struct LevelRun {
    pub level: u32,
    pub h: f64,
    pub dt: f64,
    pub mesh: MeshLevel,
    pub matrices: SystemMatrices,
    pub gain: Option<CareSolution>,
    /// shifted trajectories by variant name
    pub stabilized: Option<Trajectory>,
    pub uncontrolled: Option<Trajectory>,
}

pub struct ExperimentOutput {
    pub tables: Vec<ConvergenceTable>,
    pub levels: Vec<LevelRun>,
}

fn worker_cap() -> usize {
    match std::env::var("BURGERS_STAB_THREADS") {
        Ok(v) => v.parse().unwrap_or(1).max(1),
        Err(_) => 1,
    }
}

fn run_level(config: &ExperimentConfig, k: u32) -> Result<LevelRun> {
    let params = config.physics();
    let mesh = MeshLevel::build_uniform(k)?;
    let ys = expr::parse(&config.ys)?;
    let matrices = assembly::assemble_static(&mesh, &params, &ys, &config.control_region)?;
    let z0 = assembly::l2_project(&mesh, &config.initial_shifted()?, 0.0)?;
    let grid = TimeGrid::from_rule(config.dt_rule, mesh.h(), config.t_final)?;

    let gain = if config.control_enabled
        && matches!(config.tables, Tables::Stabilized | Tables::Both)
    {
        let problem = CareProblem::from_matrices(&matrices, &params);
        Some(riccati::solve_generalized_care(&problem)?)
    } else {
        None
    };

    let forcing = match &config.forcing_exact {
        Some(exact_text) => {
            let exact = expr::parse(exact_text)?;
            Some(steady::manufactured_forcing(&exact, &ys, &params))
        }
        None => None,
    };

    let simulate = |g: Option<&CareSolution>| -> Result<Trajectory> {
        match config.mode {
            Mode::Linear => timestepping::simulate_linear(&matrices, &params, g, &z0, &grid),
            Mode::Nonlinear => timestepping::simulate_nonlinear(
                &mesh,
                &matrices,
                &params,
                g,
                &z0,
                &grid,
                forcing.as_ref(),
                &NewtonConfig::default(),
            ),
        }
    };

    let stabilized = match (&gain, config.tables) {
        (Some(g), Tables::Stabilized | Tables::Both) => Some(simulate(Some(g))?),
        _ => None,
    };
    let uncontrolled = match config.tables {
        Tables::Uncontrolled | Tables::Both => Some(simulate(None)?),
        _ => None,
    };

    Ok(LevelRun {
        level: k,
        h: mesh.h(),
        dt: grid.dt,
        mesh,
        matrices,
        gain,
        stabilized,
        uncontrolled,
    })
}

fn metadata(config: &ExperimentConfig, variant: &str) -> TableMetadata {
    TableMetadata {
        example: config.id.clone(),
        variant: variant.to_string(),
        t_eval: config.t_final,
        dt_rule: match config.dt_rule {
            timestepping::DtRule::HOver2 => "h_over_2".to_string(),
            timestepping::DtRule::Fixed(dt) => format!("fixed {dt}"),
        },
        omega: config.omega,
        levels: config.levels.clone(),
        quad_degree: assembly::quad_degree_for(&expr::parse(&config.ys).unwrap_or(Expr::Pi)).0,
    }
}

fn table_vs_exact(
    config: &ExperimentConfig,
    levels: &[LevelRun],
    variant: &str,
    pick: impl Fn(&LevelRun) -> Option<&Trajectory>,
) -> Result<ConvergenceTable> {
    let exact_text = config.forcing_exact.as_ref().ok_or_else(|| {
        Error::Argument("exact-solution table requires a manufactured forcing".into())
    })?;
    let exact = expr::parse(exact_text)?;
    let mut rows = Vec::new();
    let mut l2s = Vec::new();
    let mut h1s = Vec::new();
    let mut hs = Vec::new();
    for run in levels {
        let traj = pick(run).ok_or_else(|| {
            Error::Argument(format!("level {} has no {variant} trajectory", run.level))
        })?;
        let (l2, h1) = error_vs_exact(traj, &exact, &run.mesh, config.t_final)?;
        hs.push(run.h);
        l2s.push(l2);
        h1s.push(h1);
    }
    let o_l2 = compute_orders(&l2s, &hs);
    let o_h1 = compute_orders(&h1s, &hs);
    for i in 0..hs.len() {
        rows.push(ConvergenceRow {
            h: hs[i],
            err_l2: l2s[i],
            order_l2: o_l2[i],
            err_h1: h1s[i],
            order_h1: o_h1[i],
            err_u: None,
            order_u: None,
        });
    }
    Ok(ConvergenceTable {
        rows,
        metadata: metadata(config, variant),
    })
}

fn table_between_levels(
    config: &ExperimentConfig,
    levels: &[LevelRun],
    variant: &str,
    with_control: bool,
    pick: impl Fn(&LevelRun) -> Option<&Trajectory>,
) -> Result<ConvergenceTable> {
    let mut hs = Vec::new();
    let mut l2s = Vec::new();
    let mut h1s = Vec::new();
    let mut us = Vec::new();
    for pair in levels.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        if fine.level != coarse.level + 1 {
            return Err(Error::Argument(format!(
                "inter-level tables need consecutive levels, got {} then {}",
                coarse.level, fine.level
            )));
        }
        let tc = pick(coarse).ok_or_else(|| {
            Error::Argument(format!("level {} has no {variant} trajectory", coarse.level))
        })?;
        let tf = pick(fine).ok_or_else(|| {
            Error::Argument(format!("level {} has no {variant} trajectory", fine.level))
        })?;
        let (l2, h1, u) = error_between_levels(
            tf,
            &fine.mesh,
            tc,
            &coarse.mesh,
            &fine.matrices,
            config.t_final,
        )?;
        // the row carries the coarser member of the pair, whose accuracy
        // the difference witnesses
        hs.push(coarse.h);
        l2s.push(l2);
        h1s.push(h1);
        us.push(u);
    }
    let o_l2 = compute_orders(&l2s, &hs);
    let o_h1 = compute_orders(&h1s, &hs);
    let o_u = compute_orders(&us, &hs);
    let rows = (0..hs.len())
        .map(|i| ConvergenceRow {
            h: hs[i],
            err_l2: l2s[i],
            order_l2: o_l2[i],
            err_h1: h1s[i],
            order_h1: o_h1[i],
            err_u: with_control.then_some(us[i]),
            order_u: if with_control { o_u[i] } else { None },
        })
        .collect();
    Ok(ConvergenceTable {
        rows,
        metadata: metadata(config, variant),
    })
}

/// Run all requested levels of an experiment (in parallel when
/// `BURGERS_STAB_THREADS` allows) and assemble the convergence tables.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let cap = worker_cap().min(config.levels.len()).max(1);
    let mut levels: Vec<Option<Result<LevelRun>>> =
        (0..config.levels.len()).map(|_| None).collect();
    if cap <= 1 {
        for (slot, &k) in levels.iter_mut().zip(&config.levels) {
            *slot = Some(run_level(config, k));
        }
    } else {
        // batches of `cap` levels run concurrently; each thread writes
        // into its own slot, so the reduction order stays fixed
        std::thread::scope(|scope| {
            for (slot_batch, level_batch) in
                levels.chunks_mut(cap).zip(config.levels.chunks(cap))
            {
                let handles: Vec<_> = slot_batch
                    .iter_mut()
                    .zip(level_batch)
                    .map(|(slot, &k)| scope.spawn(move || *slot = Some(run_level(config, k))))
                    .collect();
                for h in handles {
                    h.join().expect("level worker panicked");
                }
            }
        });
    }
    let mut runs = Vec::with_capacity(levels.len());
    for slot in levels {
        runs.push(slot.expect("level slot filled")?);
    }

    let mut tables = Vec::new();
    let exact_mode = config.forcing_exact.is_some();
    if matches!(config.tables, Tables::Stabilized | Tables::Both) {
        let table = if exact_mode {
            table_vs_exact(config, &runs, "stabilized", |r| r.stabilized.as_ref())?
        } else {
            table_between_levels(config, &runs, "stabilized", true, |r| {
                r.stabilized.as_ref()
            })?
        };
        tables.push(table);
    }
    if matches!(config.tables, Tables::Uncontrolled | Tables::Both) {
        let table = if exact_mode {
            table_vs_exact(config, &runs, "uncontrolled", |r| r.uncontrolled.as_ref())?
        } else {
            table_between_levels(config, &runs, "uncontrolled", false, |r| {
                r.uncontrolled.as_ref()
            })?
        };
        tables.push(table);
    }
    Ok(ExperimentOutput {
        tables,
        levels: runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_static, ControlRegion, PhysicsParams};
    use crate::timestepping::DtRule;

    #[test]
    fn orders_from_table_one_values() {
        // first order entry of the stabilized table; the printed errors
        // are rounded to 7 digits, so compare at 1e-4
        let orders = compute_orders(&[8.368279e-2, 2.145333e-2], &[0.25, 0.125]);
        assert!(orders[0].is_none());
        let got = orders[1].unwrap();
        assert!((got - 1.963728).abs() < 1e-3, "order {got}");
    }

    #[test]
    fn orders_trivial_cases() {
        let orders = compute_orders(&[1.0, 1.0], &[0.5, 0.25]);
        assert_eq!(orders[1], Some(0.0));
        let orders = compute_orders(&[1.0, 0.25], &[0.5, 0.25]);
        assert!((orders[1].unwrap() - 2.0).abs() < 1e-14);
        let orders = compute_orders(&[1.0, 0.0], &[0.5, 0.25]);
        assert_eq!(orders[1], Some(f64::INFINITY));
        // invariant under uniform scaling of the errors
        let a = compute_orders(&[0.3, 0.08, 0.021], &[0.5, 0.25, 0.125]);
        let b = compute_orders(&[3.0, 0.8, 0.21], &[0.5, 0.25, 0.125]);
        for (x, y) in a.iter().zip(&b).skip(1) {
            assert!((x.unwrap() - y.unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn identical_levels_give_zero_error() {
        let params = PhysicsParams {
            eta: 1.0,
            nu0: 0.0,
            v: [1.0, 1.0],
            omega: 0.0,
        };
        let ys = expr::parse("0").unwrap();
        let coarse_mesh = MeshLevel::build_uniform(2).unwrap();
        let fine_mesh = MeshLevel::build_uniform(3).unwrap();
        let mc = assemble_static(&coarse_mesh, &params, &ys, &ControlRegion::Full).unwrap();
        let mf = assemble_static(&fine_mesh, &params, &ys, &ControlRegion::Full).unwrap();
        let z0c =
            assembly::l2_project(&coarse_mesh, &expr::parse("sin(pi*x1)*sin(pi*x2)").unwrap(), 0.0)
                .unwrap();
        let grid = TimeGrid::new(0.05, 0.1).unwrap();
        let tc = timestepping::simulate_linear(&mc, &params, None, &z0c, &grid).unwrap();
        // build a fake fine trajectory that is exactly the prolonged coarse
        let mut tf = tc.clone();
        for s in &mut tf.states {
            *s = mesh::prolongate(s, &coarse_mesh, &fine_mesh).unwrap();
        }
        for u in &mut tf.controls {
            *u = mesh::prolongate(u, &coarse_mesh, &fine_mesh).unwrap();
        }
        let (l2, h1, u) =
            error_between_levels(&tf, &fine_mesh, &tc, &coarse_mesh, &mf, 0.1).unwrap();
        assert!(l2 < 1e-14 && h1 < 1e-13 && u < 1e-14);
    }

    #[test]
    fn constructed_difference_is_recovered() {
        // fine = prolonged coarse + a known fine-level perturbation
        let params = PhysicsParams {
            eta: 1.0,
            nu0: 0.0,
            v: [1.0, 1.0],
            omega: 0.0,
        };
        let ys = expr::parse("0").unwrap();
        let coarse_mesh = MeshLevel::build_uniform(2).unwrap();
        let fine_mesh = MeshLevel::build_uniform(3).unwrap();
        let mc = assemble_static(&coarse_mesh, &params, &ys, &ControlRegion::Full).unwrap();
        let mf = assemble_static(&fine_mesh, &params, &ys, &ControlRegion::Full).unwrap();
        let z0c = assembly::l2_project(
            &coarse_mesh,
            &expr::parse("x1*(1-x1)*x2*(1-x2)").unwrap(),
            0.0,
        )
        .unwrap();
        let grid = TimeGrid::new(0.05, 0.1).unwrap();
        let tc = timestepping::simulate_linear(&mc, &params, None, &z0c, &grid).unwrap();
        let mut tf = tc.clone();
        let bump = fine_mesh
            .interpolate(&expr::parse("sin(pi*x1)*sin(pi*x2)").unwrap(), 0.0)
            .unwrap();
        for s in &mut tf.states {
            let mut p = mesh::prolongate(s, &coarse_mesh, &fine_mesh).unwrap();
            for (a, b) in p.values.iter_mut().zip(&bump.values) {
                *a += b;
            }
            *s = p;
        }
        for u in &mut tf.controls {
            *u = mesh::prolongate(u, &coarse_mesh, &fine_mesh).unwrap();
        }
        let (l2, _, _) =
            error_between_levels(&tf, &fine_mesh, &tc, &coarse_mesh, &mf, 0.1).unwrap();
        let bump_l2 = mf.mass.bilinear(&bump.values, &bump.values).sqrt();
        assert!((l2 - bump_l2).abs() < 1e-13);
    }

    #[test]
    fn mismatched_levels_are_rejected() {
        let params = PhysicsParams {
            eta: 1.0,
            nu0: 0.0,
            v: [1.0, 1.0],
            omega: 0.0,
        };
        let ys = expr::parse("0").unwrap();
        let m2 = MeshLevel::build_uniform(2).unwrap();
        let m4 = MeshLevel::build_uniform(4).unwrap();
        let mats = assemble_static(&m4, &params, &ys, &ControlRegion::Full).unwrap();
        let z2 = DofVector::zeros(&m2);
        let grid = TimeGrid::new(0.05, 0.1).unwrap();
        let mc = assemble_static(&m2, &params, &ys, &ControlRegion::Full).unwrap();
        let t2 = timestepping::simulate_linear(&mc, &params, None, &z2, &grid).unwrap();
        let z4 = DofVector::zeros(&m4);
        let t4 = timestepping::simulate_linear(&mats, &params, None, &z4, &grid).unwrap();
        assert!(error_between_levels(&t4, &m4, &t2, &m2, &mats, 0.1).is_err());
    }

    #[test]
    fn manufactured_experiment_shows_second_order() {
        // small Example-2-style run over three levels
        let text = "\
[experiment]
id = mms-smoke
mode = nonlinear
tables = uncontrolled

[physics]
eta = 5
nu0 = 0
v = 1, 1
omega = 0

[steady_state]
ys = x1*x2*(1-x1)*(1-x2)

[initial]
z0 = sin(pi*x1)*sin(pi*x2)

[control]
enabled = false
region = full

[time]
dt_rule = h_over_2
T = 0.1

[mesh]
levels = 2, 3, 4

[forcing]
kind = manufactured
exact = exp(t)*sin(pi*x1)*sin(pi*x2)

[output]
directory = out/mms-smoke
";
        let cfg = crate::config::parse_config(text).unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.tables.len(), 1);
        let table = &out.tables[0];
        assert_eq!(table.rows.len(), 3);
        let last = table.rows.last().unwrap();
        let order = last.order_l2.unwrap();
        assert!(order > 1.6, "L2 order {order}");
        let order_h1 = last.order_h1.unwrap();
        assert!(order_h1 > 0.8 && order_h1 < 1.2, "H1 order {order_h1}");
    }

    #[test]
    fn dt_rule_metadata_round_trip() {
        let cfg_text = "\
[experiment]
id = t
mode = linear
tables = uncontrolled

[physics]
eta = 1
nu0 = 0
v = 0, 0
omega = 0

[steady_state]
ys = 0

[initial]
z0 = sin(pi*x1)*sin(pi*x2)

[control]
enabled = false
region = full

[time]
dt_rule = fixed
dt = 0.025
T = 0.1

[mesh]
levels = 2, 3

[forcing]
kind = none

[output]
directory = out/t
";
        let cfg = crate::config::parse_config(cfg_text).unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.levels[0].dt, 0.025);
        assert_eq!(out.tables[0].metadata.dt_rule, "fixed 0.025");
        assert_eq!(cfg.dt_rule, DtRule::Fixed(0.025));
    }
}
